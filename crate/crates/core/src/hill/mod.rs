//! Hill equations `γ'' = -k γ` with antiperiodic monodromy and the Schwarzian derivative.

pub mod frame;
pub mod ghys;
pub mod potential;
pub mod projective;
pub mod sl2;

pub use frame::{integrate_frame, integrate_frame_with, FrameOptions, FramePath, PlaneCurve};
pub use ghys::{solve_converse_ghys, GhysDiagnostics, GhysOptions, GhysSolution};
pub use potential::{
    monodromy, monodromy_jacobian, solve_tan_equation, MonodromyJacobian, StepPotential,
    StretchPerturbation, TanSolution,
};
pub use projective::{classical_schwarzian, potential_of, recover_diffeo, schwarzian, ProjDiffeo};
pub use sl2::{rotation_exp, sl2_exp, sl2_log, Sl2};
