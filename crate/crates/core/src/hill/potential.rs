//! Piecewise-constant potentials of `γ'' = -k γ` on a half-period `[0, π)`.

use std::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{DMatrix, Matrix2};
use serde::Serialize;

use super::sl2::{generator, rotation_exp, sl2_coords, Sl2};
use crate::error::{Error, Result};
use crate::function::CircleFunction;
use crate::stepspace::StepFunction;

/// Values `k_i` on consecutive intervals of lengths `t_i` summing to `π`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StepPotential {
    values: Vec<f64>,
    lengths: Vec<f64>,
}

impl StepPotential {
    pub fn new(values: Vec<f64>, lengths: Vec<f64>) -> Result<Self> {
        if values.is_empty() || values.len() != lengths.len() {
            return Err(Error::InvalidInput(format!(
                "{} values for {} lengths",
                values.len(),
                lengths.len()
            )));
        }
        if lengths.iter().any(|t| !(*t > 0.0)) {
            return Err(Error::InvalidInput("interval lengths must be positive".into()));
        }
        let total: f64 = lengths.iter().sum();
        if (total - PI).abs() >= 1e-12 {
            return Err(Error::InvalidInput(format!("lengths sum to {total}, not π")));
        }
        Ok(StepPotential { values, lengths })
    }

    /// `k_1, k_2, k_1, k_2` on `t_1, t_2, t_1, t_2`.
    pub fn four_interval(k1: f64, k2: f64, t1: f64, t2: f64) -> Result<Self> {
        Self::new(vec![k1, k2, k1, k2], vec![t1, t2, t1, PI - 2.0 * t1 - t2])
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    /// Interior interval endpoints.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut acc = 0.0;
        self.lengths[..self.lengths.len() - 1]
            .iter()
            .map(|t| {
                acc += t;
                acc
            })
            .collect()
    }

    pub fn eval(&self, x: f64) -> f64 {
        let x = x.rem_euclid(PI);
        let b = self.breakpoints();
        self.values[b.partition_point(|e| *e <= x)]
    }

    pub fn to_function(&self) -> CircleFunction {
        let p = self.clone();
        CircleFunction::from_fn(PI, self.breakpoints(), move |x| p.eval(x))
    }

    /// `(k - 1) / c` as a `±1` step, for a two-valued potential `1 ± c`.
    pub fn normalized_step(&self) -> Result<StepFunction> {
        let mut edges = vec![0.0];
        edges.extend(self.breakpoints());
        edges.push(PI);
        let signs = self.values.iter().map(|k| if *k > 1.0 { 1 } else { -1 }).collect();
        StepFunction::new(PI, edges, signs)
    }
}

/// Ordered product `exp(t_1 A_1) exp(t_2 A_2) …`, the frame at `π` for `F(0) = E`.
pub fn monodromy(p: &StepPotential) -> Sl2 {
    p.values
        .iter()
        .zip(&p.lengths)
        .fold(Sl2::IDENTITY, |acc, (k, t)| acc.mul(&rotation_exp(*k, *t)))
}

/// Solution of the symmetric monodromy condition for `k_1, k_2, k_1, k_2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TanSolution {
    pub alpha: f64,
    pub beta: f64,
    pub t1: f64,
    pub t2: f64,
}

/// Finds `t_1 + t_2 = π/2` with `exp(t_1 A_1) exp(t_2 A_2)` of trace zero, which makes the
/// four-interval product equal to `-E`. With `α = √k₁ t₁`, `β = √k₂ t₂` the condition
/// reads `tan α tan β = 2√(k₁k₂) / (k₁ + k₂)`.
pub fn solve_tan_equation(k1: f64, k2: f64) -> Result<TanSolution> {
    if !(k1 > 0.0 && k2 > 0.0) {
        return Err(Error::NonPositiveK { k1, k2 });
    }
    if k1 == k2 {
        if k1 == 1.0 {
            let q = PI / 4.0;
            return Ok(TanSolution {
                alpha: q,
                beta: q,
                t1: q,
                t2: q,
            });
        }
        return Err(Error::BracketFailure { k1, k2 });
    }
    if k1 < k2 {
        let s = solve_tan_equation(k2, k1)?;
        return Ok(TanSolution {
            alpha: s.beta,
            beta: s.alpha,
            t1: s.t2,
            t2: s.t1,
        });
    }
    // now k1 > k2
    if !(k1 > 1.0 && k2 <= 1.0) {
        return Err(Error::BracketFailure { k1, k2 });
    }
    let (r1, r2) = (k1.sqrt(), k2.sqrt());
    let target = 2.0 * r1 * r2 / (k1 + k2);
    let beta = |a: f64| r2 * (FRAC_PI_2 - a / r1);
    let g = |a: f64| a.tan() * beta(a).tan() - target;
    // g < 0 as α → 0 and g → +∞ as α → π/2, where β stays in (0, π/2)
    let (mut lo, mut hi) = (0.0, FRAC_PI_2);
    if !(beta(hi) > 0.0 && beta(hi) < FRAC_PI_2) {
        return Err(Error::BracketFailure { k1, k2 });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if g(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let alpha = 0.5 * (lo + hi);
    let b = beta(alpha);
    Ok(TanSolution {
        alpha,
        beta: b,
        t1: alpha / r1,
        t2: b / r2,
    })
}

/// Shifts `s_i` of the interval lengths with `Σ s_i = 0`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StretchPerturbation(Vec<f64>);

impl StretchPerturbation {
    pub fn new(s: Vec<f64>) -> Result<Self> {
        let total: f64 = s.iter().sum();
        if total.abs() >= 1e-14 {
            return Err(Error::InvalidInput(format!("stretch components sum to {total}")));
        }
        Ok(StretchPerturbation(s))
    }

    /// The length changes produced by moving interior breakpoint `j` by `α_j`.
    pub fn from_breakpoint_shifts(alpha: &[f64]) -> Self {
        let m = alpha.len() + 1;
        let s = (0..m)
            .map(|i| {
                let right = if i < alpha.len() { alpha[i] } else { 0.0 };
                let left = if i > 0 { alpha[i - 1] } else { 0.0 };
                right - left
            })
            .collect();
        StretchPerturbation(s)
    }

    pub fn components(&self) -> &[f64] {
        &self.0
    }
}

/// Derivative of the monodromy with respect to the interval lengths, `dM(s) = L(s) M`
/// with `L(s) = Σ s_i P_i A_i P_i⁻¹` and `P_i` the product of the factors left of `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct MonodromyJacobian {
    generators: Vec<Matrix2<f64>>,
    monodromy: Sl2,
}

impl MonodromyJacobian {
    /// `dM(s)`.
    pub fn apply(&self, s: &StretchPerturbation) -> Matrix2<f64> {
        self.log_derivative(s) * self.monodromy.matrix()
    }

    /// `L(s)`, the derivative of `log(-M)` at `M = -E`.
    pub fn log_derivative(&self, s: &StretchPerturbation) -> Matrix2<f64> {
        self.generators
            .iter()
            .zip(s.components())
            .fold(Matrix2::zeros(), |acc, (g, si)| acc + g * *si)
    }

    /// Columns are the `sl2_coords` of the conjugated generators, one per interval.
    pub fn coordinate_matrix(&self) -> DMatrix<f64> {
        let m = self.generators.len();
        DMatrix::from_fn(3, m, |r, c| sl2_coords(&self.generators[c])[r])
    }

    /// The same map in breakpoint-shift coordinates.
    pub fn breakpoint_matrix(&self) -> DMatrix<f64> {
        let m = self.generators.len();
        // s = T α with T[i][j] = δ_{ij} - δ_{i,j+1}
        let t = DMatrix::from_fn(m, m - 1, |i, j| {
            if i == j {
                1.0
            } else if i == j + 1 {
                -1.0
            } else {
                0.0
            }
        });
        self.coordinate_matrix() * t
    }

    /// Smallest singular value of the map restricted to `Σ s_i = 0`.
    pub fn restricted_sigma_min(&self) -> f64 {
        self.breakpoint_matrix().singular_values().min()
    }
}

pub fn monodromy_jacobian(p: &StepPotential) -> Result<MonodromyJacobian> {
    let m = monodromy(p);
    let gap = m.distance(&Sl2::IDENTITY.neg());
    if gap >= 1e-8 {
        return Err(Error::InvalidInput(format!(
            "monodromy differs from -E by {gap}; the Jacobian is taken at a solved potential"
        )));
    }
    let mut left = Sl2::IDENTITY;
    let mut generators = Vec::with_capacity(p.values.len());
    for (k, t) in p.values.iter().zip(&p.lengths) {
        generators.push(left.matrix() * generator(*k) * left.inverse().matrix());
        left = left.mul(&rotation_exp(*k, *t));
    }
    let jac = MonodromyJacobian {
        generators,
        monodromy: m,
    };
    let sigma = jac.restricted_sigma_min();
    if !(sigma > 1e-6) {
        return Err(Error::DegenerateJacobian { sigma });
    }
    Ok(jac)
}
