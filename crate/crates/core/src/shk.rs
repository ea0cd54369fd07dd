//! Reparametrizing a function to make it orthogonal to a Chebyshev system.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::chebyshev::ChebyshevSystem;
use crate::diffeo::{build_stretch_to_step, psi_alpha, AlphaFamily, CircleDiffeo, StretchOptions};
use crate::error::{Error, Result};
use crate::function::CircleFunction;
use crate::newton::{max_abs, trust_region_newton, NewtonOptions};
use crate::quadrature::QuadratureRule;
use crate::signs::{count_sign_changes, find_alternation_points, AlternationPoints};
use crate::stepspace::{orth_alternating_step, HobbyRiceOptions, StepFunction};

/// `C[i][j] = 2 (-1)^(j+1) g_i(x_j)` with `j` counted from 1: the derivative at `α = 0` of
/// the moments of an alternating step starting with `+1` as its breakpoints move.
pub fn jacobian_at_origin(system: &ChebyshevSystem, breakpoints: &[f64]) -> Result<DMatrix<f64>> {
    let col = system.collocation_matrix(breakpoints)?;
    let n = breakpoints.len();
    Ok(DMatrix::from_fn(n, n, |i, j| {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        2.0 * sign * col.matrix[(i, j)]
    }))
}

/// `α ↦ residual_vector(g0 ∘ ψ_α⁻¹)`: moments of `g0` after moving its breakpoints
/// `x_j` to `x_j + α_j`.
#[derive(Debug, Clone)]
pub struct AlphaMap<'a> {
    g0: CircleFunction,
    system: &'a ChebyshevSystem,
    family: AlphaFamily,
}

impl<'a> AlphaMap<'a> {
    pub fn new(g0: CircleFunction, system: &'a ChebyshevSystem, family: AlphaFamily) -> Result<Self> {
        crate::function::same_period(g0.period(), system.period())?;
        if family.dimension() != system.dimension() {
            return Err(Error::InvalidInput(format!(
                "family has {} parameters for a system of dimension {}",
                family.dimension(),
                system.dimension()
            )));
        }
        Ok(AlphaMap { g0, system, family })
    }

    pub fn family(&self) -> &AlphaFamily {
        &self.family
    }

    /// The reparametrization applied to `g0` at `alpha`.
    pub fn diffeo(&self, alpha: &[f64]) -> Result<CircleDiffeo> {
        Ok(psi_alpha(&self.family, alpha)?.invert())
    }

    pub fn eval(&self, alpha: &[f64]) -> Result<Vec<f64>> {
        self.eval_with(alpha, self.system.rule())
    }

    pub fn eval_with(&self, alpha: &[f64], rule: &QuadratureRule) -> Result<Vec<f64>> {
        let g = self.g0.pullback(&self.diffeo(alpha)?)?;
        self.system.residual_vector_with(&g, rule)
    }
}

#[derive(Debug, Clone)]
pub struct SHKProblem {
    pub f: CircleFunction,
    pub system: ChebyshevSystem,
    /// Decreasing stretch parameters tried in order.
    pub eps_schedule: Vec<f64>,
    /// Bound on `max_i |⟨f ∘ φ, g_i⟩|`.
    pub target: f64,
    pub hobby_rice: HobbyRiceOptions,
    pub newton_iterations: usize,
}

impl SHKProblem {
    pub fn new(f: CircleFunction, system: ChebyshevSystem) -> Self {
        SHKProblem {
            f,
            system,
            eps_schedule: vec![1e-2, 1e-3, 1e-4],
            target: 1e-8,
            hobby_rice: HobbyRiceOptions::default(),
            newton_iterations: 40,
        }
    }
}

/// One pass of the pipeline at a fixed stretch parameter.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Attempt {
    pub eps: f64,
    pub level: f64,
    pub iterations: usize,
    pub best_residual: f64,
    pub outcome: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SHKDiagnostics {
    pub iterations: usize,
    pub eps: f64,
    pub level: f64,
    pub jacobian_condition: f64,
    /// Alternation level `c`; the solver works with `f / c`.
    pub scale: f64,
    pub attempts: Vec<Attempt>,
    /// Winding number of the moment map around the boundary of the α-interval (n = 1 only).
    pub winding: Option<i32>,
}

#[derive(Debug, Clone)]
pub struct SHKSolution {
    /// `φ₀ ∘ ψ_α⁻¹`.
    pub phi: CircleDiffeo,
    pub stretch: CircleDiffeo,
    pub alpha: Vec<f64>,
    /// Residuals of `f ∘ φ` with the solver's quadrature.
    pub residuals: Vec<f64>,
    /// Residuals of `f ∘ φ` with the refined quadrature.
    pub verified_residuals: Vec<f64>,
    pub step: StepFunction,
    pub alternation: AlternationPoints,
    pub diagnostics: SHKDiagnostics,
}

impl SHKSolution {
    pub fn max_residual(&self) -> f64 {
        max_abs(&self.verified_residuals)
    }
}

fn condition_number(m: &DMatrix<f64>) -> f64 {
    let sv = m.clone().singular_values();
    let smin = sv.min();
    if smin > 0.0 {
        sv.max() / smin
    } else {
        f64::INFINITY
    }
}

/// Finds an orientation-preserving `φ` with `f ∘ φ` orthogonal to every function of the
/// system, given that `f` changes sign at least `n + 1` times.
pub fn solve_converse_shk(problem: &SHKProblem) -> Result<SHKSolution> {
    let f = &problem.f;
    let system = &problem.system;
    crate::function::same_period(f.period(), system.period())?;
    let n = system.dimension();
    if !(problem.target > 0.0) {
        return Err(Error::InvalidInput("residual target must be positive".into()));
    }
    if problem.eps_schedule.is_empty() || problem.eps_schedule.iter().any(|e| !(*e > 0.0)) {
        return Err(Error::InvalidInput("eps schedule must be non-empty and positive".into()));
    }
    let count = match count_sign_changes(f, 0.0) {
        Ok(r) => r.count,
        Err(Error::AllNeutral) => 0,
        Err(e) => return Err(e),
    };
    if count < n + 1 {
        return Err(Error::InsufficientSignChanges {
            found: count,
            needed: n + 1,
        });
    }

    let mut h = orth_alternating_step(system, &problem.hobby_rice)?;
    let alternation = find_alternation_points(f, n + 1, None)?;
    if alternation.signs[0] != h.signs()[0] {
        h = h.negate();
    }
    let c = alternation.c;
    let normalized = f.scaled(1.0 / c);
    let breakpoints = h.interior_breakpoints();
    let family = AlphaFamily::new(f.period(), breakpoints.clone())?;
    let j0 = jacobian_at_origin(system, &breakpoints)? * (h.signs()[0] as f64);
    let jacobian_condition = condition_number(&j0);

    let refined = system.rule().refined();
    let mut attempts = Vec::new();
    let mut best = f64::INFINITY;
    let mut total_iterations = 0;
    for &eps in &problem.eps_schedule {
        let opts = StretchOptions::scaled(eps);
        let stretch = match build_stretch_to_step(&normalized, &alternation.points, &h, opts) {
            Ok(s) => s,
            Err(e @ (Error::NoStableNeighborhood { .. } | Error::InvalidInput(_))) => {
                attempts.push(Attempt {
                    eps,
                    level: opts.level,
                    iterations: 0,
                    best_residual: f64::INFINITY,
                    outcome: e.to_string(),
                });
                continue;
            }
            Err(e) => return Err(e),
        };
        let g0 = normalized.pullback(&stretch)?;
        let map = AlphaMap::new(g0, system, family.clone())?;
        let newton = NewtonOptions {
            tol: 0.5 * problem.target / c,
            max_iter: problem.newton_iterations,
            radius: family.radius(),
            ..NewtonOptions::default()
        };
        let outcome = trust_region_newton(|a| map.eval(a), vec![0.0; n], Some(j0.clone()), &newton)?;
        total_iterations += outcome.iterations;
        best = best.min(c * outcome.max_residual());
        if !outcome.converged {
            attempts.push(Attempt {
                eps,
                level: opts.level,
                iterations: outcome.iterations,
                best_residual: c * outcome.max_residual(),
                outcome: outcome.reason.unwrap_or_else(|| "did not converge".into()),
            });
            continue;
        }
        let phi = stretch.compose(&map.diffeo(&outcome.x)?)?;
        let pulled = f.pullback(&phi)?;
        let verified = system.residual_vector_with(&pulled, &refined)?;
        let residuals: Vec<f64> = outcome.residual.iter().map(|r| c * r).collect();
        if max_abs(&verified) >= problem.target {
            best = best.min(max_abs(&verified));
            attempts.push(Attempt {
                eps,
                level: opts.level,
                iterations: outcome.iterations,
                best_residual: max_abs(&verified),
                outcome: "refined quadrature rejected the solution".into(),
            });
            continue;
        }
        attempts.push(Attempt {
            eps,
            level: opts.level,
            iterations: outcome.iterations,
            best_residual: max_abs(&verified),
            outcome: "converged".into(),
        });
        let winding = if n == 1 { Some(boundary_winding(&map)?) } else { None };
        return Ok(SHKSolution {
            phi,
            stretch,
            alpha: outcome.x,
            residuals,
            verified_residuals: verified,
            step: h,
            alternation,
            diagnostics: SHKDiagnostics {
                iterations: total_iterations,
                eps,
                level: opts.level,
                jacobian_condition,
                scale: c,
                attempts,
                winding,
            },
        });
    }
    Err(Error::ConvergenceFailure {
        best_residual: best,
        detail: format!(
            "eps schedule {:?} exhausted: {}",
            problem.eps_schedule,
            attempts
                .iter()
                .map(|a| format!("eps {}: {}", a.eps, a.outcome))
                .collect::<Vec<_>>()
                .join("; ")
        ),
    })
}

/// Degree of `α ↦ F(α)` on the boundary `{±0.9 δ}` of the one-dimensional trust interval.
fn boundary_winding(map: &AlphaMap) -> Result<i32> {
    let r = 0.9 * map.family().radius();
    let lo = map.eval(&[-r])?[0];
    let hi = map.eval(&[r])?[0];
    Ok(if lo < 0.0 && hi > 0.0 {
        1
    } else if lo > 0.0 && hi < 0.0 {
        -1
    } else {
        0
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::newton::fd_jacobian;
    use std::f64::consts::{FRAC_PI_2, PI, TAU};

    fn half_step() -> StepFunction {
        StepFunction::new(TAU, vec![0.0, PI, TAU], vec![1, -1]).unwrap()
    }

    #[test]
    fn jacobian_for_constants() {
        let c = jacobian_at_origin(&ChebyshevSystem::trig(0), &[PI]).unwrap();
        assert_eq!(c[(0, 0)], 2.0);
    }

    #[test]
    fn alpha_map_moves_the_jump() {
        let v = ChebyshevSystem::trig(0);
        let fam = AlphaFamily::new(TAU, vec![PI]).unwrap();
        let map = AlphaMap::new(CircleFunction::from_step(half_step()), &v, fam).unwrap();
        for a in [-0.3, 0.0, 0.1, 0.5] {
            let r = map.eval(&[a]).unwrap();
            assert!((r[0] - 2.0 * a).abs() < 1e-12, "{a}: {}", r[0]);
        }
    }

    #[test]
    fn alpha_map_at_origin_for_orthogonal_step() {
        let v = ChebyshevSystem::trig(1);
        let h = StepFunction::new(TAU, vec![0.0, FRAC_PI_2, PI, 3.0 * FRAC_PI_2, TAU], vec![1, -1, 1, -1])
            .unwrap();
        let fam = AlphaFamily::new(TAU, h.interior_breakpoints()).unwrap();
        let map = AlphaMap::new(CircleFunction::from_step(h.clone()), &v, fam).unwrap();
        assert!(max_abs(&map.eval(&[0.0; 3]).unwrap()) < 1e-9);
        let mut r = |a: &[f64]| map.eval(a);
        let fd = fd_jacobian(&mut r, &[0.0; 3], 1e-5, f64::INFINITY).unwrap();
        let c = jacobian_at_origin(&v, &h.interior_breakpoints()).unwrap();
        assert!((fd - c).abs().max() < 1e-6);
    }

    #[test]
    fn column_parity_flips_sign() {
        let v = ChebyshevSystem::trig(1);
        let c = jacobian_at_origin(&v, &[1.0, 2.0, 4.0]).unwrap();
        let g = |i: usize, x: f64| v.basis()[i].eval(x);
        for i in 0..3 {
            assert!((c[(i, 1)] + 2.0 * g(i, 2.0)).abs() < 1e-15);
            assert!((c[(i, 2)] - 2.0 * g(i, 4.0)).abs() < 1e-15);
        }
    }

    #[test]
    fn sine_against_constants() {
        let f = CircleFunction::parse("sin(x)", TAU).unwrap();
        let sol = solve_converse_shk(&SHKProblem::new(f, ChebyshevSystem::trig(0))).unwrap();
        assert!(sol.max_residual() < 1e-8);
        assert!(sol.phi.min_slope(4096) > 0.0);
        assert_eq!(sol.diagnostics.winding, Some(1));
    }

    #[test]
    fn harmonic_mixture_against_first_harmonics() {
        let f = CircleFunction::parse("0.8*sin(2*x)+0.1*cos(x)", TAU).unwrap();
        let v = ChebyshevSystem::trig(1);
        let sol = solve_converse_shk(&SHKProblem::new(f.clone(), v.clone())).unwrap();
        let oracle = v
            .residual_vector_with(&f.pullback(&sol.phi).unwrap(), &QuadratureRule::default().refined())
            .unwrap();
        assert!(max_abs(&oracle) < 1e-8, "{oracle:?}");
        assert!(sol.phi.min_slope(4096) > 0.0);
    }

    #[test]
    fn no_sign_change_is_rejected() {
        let f = CircleFunction::parse("2+sin(x)", TAU).unwrap();
        let r = solve_converse_shk(&SHKProblem::new(f, ChebyshevSystem::trig(0)));
        assert_eq!(r.unwrap_err(), Error::InsufficientSignChanges { found: 0, needed: 2 });
    }
}
