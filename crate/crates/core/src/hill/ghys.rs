//! Reparametrizing a potential so that the Hill equation has antiperiodic monodromy.

use std::f64::consts::PI;

use serde::Serialize;

use super::frame::{integrate_frame_with, FrameOptions, PlaneCurve};
use super::potential::{monodromy_jacobian, solve_tan_equation, StepPotential, TanSolution};
use super::projective::{recover_diffeo, ProjDiffeo};
use super::sl2::{sl2_log, Sl2};
use crate::diffeo::{build_stretch_to_step, psi_alpha, AlphaFamily, CircleDiffeo, StretchOptions};
use crate::error::{Error, Result};
use crate::function::CircleFunction;
use crate::newton::{trust_region_newton, NewtonOptions};
use crate::signs::{count_sign_changes, find_alternation_points};

#[derive(Debug, Clone, PartialEq)]
pub struct GhysOptions {
    pub eps_schedule: Vec<f64>,
    /// Frame grid used inside the Newton iteration.
    pub grid: usize,
    /// Frame grid used to verify an accepted solution.
    pub verify_grid: usize,
    pub newton_iterations: usize,
    pub closure_tol: f64,
    /// Bound on `|½ S(g) + 1 - k ∘ φ|` at the verification nodes.
    pub potential_tol: f64,
}

impl Default for GhysOptions {
    fn default() -> Self {
        GhysOptions {
            eps_schedule: vec![1e-2, 1e-3, 1e-4],
            grid: 2048,
            verify_grid: 8192,
            newton_iterations: 40,
            closure_tol: 1e-6,
            potential_tol: 1e-5,
        }
    }
}

/// Largest contrast `c` used for the model potential `1 ± c`.
pub const MAX_CONTRAST: f64 = 0.3;

/// How many times `c` is halved after a failed bracket.
pub const CONTRAST_RETRIES: usize = 6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GhysAttempt {
    pub eps: f64,
    pub iterations: usize,
    pub best_residual: f64,
    pub outcome: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GhysDiagnostics {
    pub iterations: usize,
    pub eps: f64,
    pub contrast: f64,
    pub contrast_halvings: usize,
    pub jacobian_sigma_min: f64,
    pub attempts: Vec<GhysAttempt>,
}

#[derive(Debug, Clone)]
pub struct GhysSolution {
    /// `φ₀ ∘ ψ_α⁻¹`.
    pub phi: CircleDiffeo,
    pub alpha: Vec<f64>,
    pub model: StepPotential,
    pub tan: TanSolution,
    /// `k ∘ φ`.
    pub pulled: CircleFunction,
    pub curve: PlaneCurve,
    pub g: ProjDiffeo,
    pub monodromy: Sl2,
    pub closure_gap: f64,
    /// `max |½ S(g) + 1 - k ∘ φ|` over the verification nodes.
    pub potential_residual: f64,
    pub diagnostics: GhysDiagnostics,
}

/// `log(-M)` of the monodromy of `k` on `[0, π]`.
fn monodromy_residual(k: &CircleFunction, opts: FrameOptions) -> Result<Vec<f64>> {
    let path = integrate_frame_with(k, Sl2::IDENTITY, opts)?;
    Ok(sl2_log(&path.monodromy().neg()).to_vec())
}

/// Finds `φ` such that `k ∘ φ` is the potential of a closed centrally symmetric curve, and
/// the lift `g` with `½ S(g) + 1 = k ∘ φ`. Requires `k - 1` to change sign at least four
/// times on `[0, π)`.
pub fn solve_converse_ghys(k: &CircleFunction, opts: &GhysOptions) -> Result<GhysSolution> {
    crate::function::same_period(k.period(), PI)?;
    if opts.eps_schedule.is_empty() || opts.eps_schedule.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::InvalidInput("eps schedule must be non-empty and positive".into()));
    }
    let deviation = k.affine(1.0, -1.0);
    let count = match count_sign_changes(&deviation, 0.0) {
        Ok(r) => r.count,
        Err(Error::AllNeutral) => 0,
        Err(e) => return Err(e),
    };
    if count < 4 {
        return Err(Error::InsufficientSignChanges { found: count, needed: 4 });
    }
    // the default level is half the smallest run peak
    let smallest_peak = 2.0 * find_alternation_points(&deviation, 4, None)?.c;
    let mut c = (0.9 * smallest_peak).min(MAX_CONTRAST);
    let mut halvings = 0;
    let (alternation, tan) = loop {
        let alt = find_alternation_points(&deviation, 4, Some(c))?;
        match solve_tan_equation(1.0 + c, 1.0 - c) {
            Ok(t) => break (alt, t),
            Err(Error::BracketFailure { .. }) if halvings < CONTRAST_RETRIES => {
                c *= 0.5;
                halvings += 1;
            }
            Err(e) => return Err(e),
        }
    };
    let (k1, k2) = (1.0 + c, 1.0 - c);
    let model = if alternation.signs[0] > 0 {
        StepPotential::four_interval(k1, k2, tan.t1, tan.t2)?
    } else {
        StepPotential::four_interval(k2, k1, tan.t2, tan.t1)?
    };
    let jacobian = monodromy_jacobian(&model)?;
    let j0 = jacobian.breakpoint_matrix();
    let step = model.normalized_step()?;
    let normalized = deviation.scaled(1.0 / c);
    let family = AlphaFamily::new(PI, model.breakpoints())?;
    let newton_frame = FrameOptions::new(opts.grid);
    let verify_frame = FrameOptions {
        grid: opts.verify_grid,
        min_steps: 64,
    };

    let mut attempts = Vec::new();
    let mut best = f64::INFINITY;
    let mut total_iterations = 0;
    for &eps in &opts.eps_schedule {
        let stretch = match build_stretch_to_step(
            &normalized,
            &alternation.points,
            &step,
            StretchOptions::scaled(eps),
        ) {
            Ok(s) => s,
            Err(e @ (Error::NoStableNeighborhood { .. } | Error::InvalidInput(_))) => {
                attempts.push(GhysAttempt {
                    eps,
                    iterations: 0,
                    best_residual: f64::INFINITY,
                    outcome: e.to_string(),
                });
                continue;
            }
            Err(e) => return Err(e),
        };
        let base = k.pullback(&stretch)?;
        let residual = |alpha: &[f64]| {
            let psi = psi_alpha(&family, alpha)?.invert();
            monodromy_residual(&base.pullback(&psi)?, newton_frame)
        };
        let newton = NewtonOptions {
            tol: 1e-10,
            max_iter: opts.newton_iterations,
            radius: family.radius(),
            ..NewtonOptions::default()
        };
        let outcome = trust_region_newton(residual, vec![0.0; 3], Some(j0.clone()), &newton)?;
        total_iterations += outcome.iterations;
        best = best.min(outcome.max_residual());
        if !outcome.converged {
            attempts.push(GhysAttempt {
                eps,
                iterations: outcome.iterations,
                best_residual: outcome.max_residual(),
                outcome: outcome.reason.unwrap_or_else(|| "did not converge".into()),
            });
            continue;
        }
        let phi = stretch.compose(&psi_alpha(&family, &outcome.x)?.invert())?;
        let pulled = k.pullback(&phi)?;
        let path = integrate_frame_with(&pulled, Sl2::IDENTITY, verify_frame)?;
        let curve = path.curve();
        let closure_gap = curve.closure_gap();
        if !(closure_gap < opts.closure_tol) {
            attempts.push(GhysAttempt {
                eps,
                iterations: outcome.iterations,
                best_residual: outcome.max_residual(),
                outcome: format!("verification grid left a closure gap of {closure_gap}"),
            });
            continue;
        }
        let g = recover_diffeo(&curve)?;
        let potential_residual = g
            .potential_samples(0)?
            .iter()
            .map(|(x, v)| (v - pulled.eval(*x)).abs())
            .fold(0.0f64, f64::max);
        if !(potential_residual < opts.potential_tol) {
            attempts.push(GhysAttempt {
                eps,
                iterations: outcome.iterations,
                best_residual: outcome.max_residual(),
                outcome: format!("recovered potential differs by {potential_residual}"),
            });
            continue;
        }
        attempts.push(GhysAttempt {
            eps,
            iterations: outcome.iterations,
            best_residual: outcome.max_residual(),
            outcome: "converged".into(),
        });
        return Ok(GhysSolution {
            phi,
            alpha: outcome.x,
            model,
            tan,
            pulled,
            monodromy: path.monodromy(),
            curve,
            g,
            closure_gap,
            potential_residual,
            diagnostics: GhysDiagnostics {
                iterations: total_iterations,
                eps,
                contrast: c,
                contrast_halvings: halvings,
                jacobian_sigma_min: jacobian.restricted_sigma_min(),
                attempts,
            },
        });
    }
    Err(Error::ConvergenceFailure {
        best_residual: best,
        detail: format!(
            "eps schedule {:?} exhausted: {}",
            opts.eps_schedule,
            attempts
                .iter()
                .map(|a| format!("eps {}: {}", a.eps, a.outcome))
                .collect::<Vec<_>>()
                .join("; ")
        ),
    })
}
