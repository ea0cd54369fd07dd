//! Reparametrizations of circle functions: orthogonality to Chebyshev systems, step
//! functions orthogonal to a basis, and potentials of Hill equations with prescribed
//! monodromy.

// `!(a < b)` is used on purpose so that NaN fails the check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod chebyshev;
pub mod diffeo;
pub mod error;
pub mod expr;
pub mod function;
pub mod hill;
pub mod newton;
pub mod pchip;
pub mod quadrature;
pub mod shk;
pub mod signs;
pub mod stepspace;

pub use chebyshev::{ChebyshevReport, ChebyshevSystem, SturmHurwitzReport, SystemSpec};
pub use diffeo::{
    build_stretch_to_step, discrepancy_measure, psi_alpha, AlphaFamily, CircleDiffeo, StretchOptions,
};
pub use error::{Error, Result};
pub use expr::Expression;
pub use function::{inner_product, inner_products, CircleFunction};
pub use quadrature::QuadratureRule;
pub use newton::{trust_region_newton, NewtonOptions, NewtonOutcome};
pub use shk::{jacobian_at_origin, solve_converse_shk, AlphaMap, SHKDiagnostics, SHKProblem, SHKSolution};
pub use signs::{count_sign_changes, find_alternation_points, AlternationPoints, SignChangeReport};
pub use stepspace::{
    cell_map, moment_map, orth_alternating_step, solve_hobby_rice, step_from_sphere, HobbyRiceOptions,
    HobbyRiceSolution, SignedPartition, StepFunction,
};
