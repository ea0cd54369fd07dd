//! Lifts of projective-line diffeomorphisms in the angle coordinate and their Schwarzians.
//!
//! A lift `g` satisfies `g(x + π) = g(x) + π`. In the angle coordinate the Schwarzian of
//! the projective map is `S(g) = S_c(g) + 2 (g'² - 1)`, where `S_c` is the classical
//! Schwarzian `g'''/g' - 3/2 (g''/g')²`; it vanishes exactly on projective maps and
//! satisfies `½ S(g) + 1 = k` for the potential `k` of the curve `g'^(-1/2) (cos g, sin g)`.

use std::f64::consts::PI;

use super::frame::PlaneCurve;
use crate::diffeo::CircleDiffeo;
use crate::error::{Error, Result};
use crate::expr::Expression;
use crate::function::CircleFunction;

/// Smallest admissible derivative of a lift.
pub const MIN_DERIVATIVE: f64 = 1e-8;

#[derive(Debug, Clone)]
enum Lift {
    Symbolic(Expression),
    Sampled {
        lift: CircleDiffeo,
        xs: Vec<f64>,
        /// `g', g'', g'''` at each node.
        derivatives: Vec<[f64; 3]>,
    },
}

/// An increasing `g` with `g(x + π) = g(x) + π`.
#[derive(Debug, Clone)]
pub struct ProjDiffeo {
    lift: Lift,
}

impl ProjDiffeo {
    pub fn identity() -> Self {
        Self::from_expression("x").expect("identity is a lift")
    }

    /// A lift given by a formula, checked for quasi-periodicity and monotonicity.
    pub fn from_expression(text: &str) -> Result<Self> {
        let e = Expression::parse(text)?;
        for i in 0..512 {
            let x = PI * i as f64 / 512.0;
            let shift = e.eval(x + PI) - e.eval(x) - PI;
            if !(shift.abs() < 1e-10) {
                return Err(Error::InvalidInput(format!(
                    "{text} is not a lift: g(x + π) - g(x) - π = {shift} at x = {x}"
                )));
            }
            let d = e.eval_derivative(1, x);
            if !(d >= MIN_DERIVATIVE) {
                return Err(Error::DerivativeUnderflow { x, value: d });
            }
        }
        Ok(ProjDiffeo {
            lift: Lift::Symbolic(e),
        })
    }

    pub fn eval(&self, x: f64) -> f64 {
        match &self.lift {
            Lift::Symbolic(e) => e.eval(x),
            Lift::Sampled { lift, .. } => lift.eval(x),
        }
    }

    /// Nodes where derivatives are known: the sampling grid, or a uniform grid of `n` points.
    pub fn nodes(&self, n: usize) -> Vec<f64> {
        match &self.lift {
            Lift::Symbolic(_) => (0..n).map(|i| PI * i as f64 / n as f64).collect(),
            Lift::Sampled { xs, .. } => xs.clone(),
        }
    }

    /// `(g', g'', g''')` at the nodes returned by [`ProjDiffeo::nodes`].
    pub fn derivatives(&self, n: usize) -> Vec<[f64; 3]> {
        match &self.lift {
            Lift::Symbolic(e) => self
                .nodes(n)
                .iter()
                .map(|&x| [e.eval_derivative(1, x), e.eval_derivative(2, x), e.eval_derivative(3, x)])
                .collect(),
            Lift::Sampled { derivatives, .. } => derivatives.clone(),
        }
    }

    /// Values of `S(g)` at the nodes.
    pub fn schwarzian_samples(&self, n: usize) -> Result<Vec<(f64, f64)>> {
        self.nodes(n)
            .into_iter()
            .zip(self.derivatives(n))
            .map(|(x, [d1, d2, d3])| {
                if !(d1 >= MIN_DERIVATIVE) {
                    return Err(Error::DerivativeUnderflow { x, value: d1 });
                }
                Ok((x, classical_from_derivatives(d1, d2, d3) + 2.0 * (d1 * d1 - 1.0)))
            })
            .collect()
    }

    /// Values of `½ S(g) + 1` at the nodes.
    pub fn potential_samples(&self, n: usize) -> Result<Vec<(f64, f64)>> {
        Ok(self
            .schwarzian_samples(n)?
            .into_iter()
            .map(|(x, s)| (x, 0.5 * s + 1.0))
            .collect())
    }
}

fn classical_from_derivatives(d1: f64, d2: f64, d3: f64) -> f64 {
    d3 / d1 - 1.5 * (d2 / d1).powi(2)
}

/// Classical Schwarzian `f'''/f' - 3/2 (f''/f')²` of a formula.
pub fn classical_schwarzian(f: &Expression, x: f64) -> f64 {
    classical_from_derivatives(f.eval_derivative(1, x), f.eval_derivative(2, x), f.eval_derivative(3, x))
}

/// Number of nodes used when sampling symbolic lifts.
const SYMBOLIC_SAMPLES: usize = 1024;

/// `S(g)` as a function of period `π`.
pub fn schwarzian(g: &ProjDiffeo) -> Result<CircleFunction> {
    match &g.lift {
        Lift::Symbolic(e) => {
            g.schwarzian_samples(SYMBOLIC_SAMPLES)?;
            let e = e.clone();
            Ok(CircleFunction::from_fn(PI, Vec::new(), move |x| {
                let d1 = e.eval_derivative(1, x);
                classical_from_derivatives(d1, e.eval_derivative(2, x), e.eval_derivative(3, x))
                    + 2.0 * (d1 * d1 - 1.0)
            }))
        }
        Lift::Sampled { .. } => samples_to_function(g.schwarzian_samples(0)?),
    }
}

/// `½ S(g) + 1`, the potential of the curve attached to `g`.
pub fn potential_of(g: &ProjDiffeo) -> Result<CircleFunction> {
    Ok(schwarzian(g)?.affine(0.5, 1.0))
}

fn samples_to_function(samples: Vec<(f64, f64)>) -> Result<CircleFunction> {
    let mut xs = Vec::with_capacity(samples.len());
    let mut ys = Vec::with_capacity(samples.len());
    for (x, y) in samples {
        if x >= PI || xs.last().is_some_and(|l| x <= *l) {
            continue;
        }
        xs.push(x);
        ys.push(y);
    }
    CircleFunction::from_samples(xs, ys, PI)
}

/// Points in each finite-difference stencil.
const STENCIL: usize = 7;

/// First-derivative weights at `z` for nodes `nodes` (Fornberg's recursion).
fn first_derivative_weights(z: f64, nodes: &[f64]) -> Vec<f64> {
    let m = nodes.len();
    // c[j][k]: weight of node j for the k-th derivative, k = 0, 1
    let mut c = vec![[0.0f64; 2]; m];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - z;
    for i in 1..m {
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - z;
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                c[i][1] = c1 * (c[i - 1][0] - c5 * c[i - 1][1]) / c2;
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            c[j][1] = (c4 * c[j][1] - c[j][0]) / c3;
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.iter().map(|w| w[1]).collect()
}

/// Sixth-order first derivative of uniformly spaced samples; one-sided stencils near the ends.
fn differentiate_uniform(v: &[f64], h: f64) -> Vec<f64> {
    let n = v.len();
    let half = STENCIL / 2;
    let nodes: Vec<f64> = (0..STENCIL).map(|j| j as f64).collect();
    (0..n)
        .map(|i| {
            let start = i.saturating_sub(half).min(n - STENCIL);
            let w = first_derivative_weights((i - start) as f64, &nodes);
            w.iter().zip(&v[start..start + STENCIL]).map(|(a, b)| a * b).sum::<f64>() / h
        })
        .collect()
}

/// Closure tolerance of [`recover_diffeo`].
pub const CLOSURE_TOL: f64 = 1e-6;

/// The lift `g` with `γ = g'^(-1/2) (cos g, sin g)`: the unwrapped polar angle of `γ`.
///
/// `g' = 1/|γ|²` and `g'' = -2⟨γ, γ'⟩/|γ|⁴` come from the curve data; `g'''` is the
/// sixth-order numerical derivative of `g''` within each uniformly sampled segment.
pub fn recover_diffeo(curve: &PlaneCurve) -> Result<ProjDiffeo> {
    let n = curve.xs.len() - 1;
    let (p0, pn) = (curve.position[0], curve.position[n]);
    let (v0, vn) = (curve.velocity[0], curve.velocity[n]);
    let gap = (p0[0] + pn[0]).hypot(p0[1] + pn[1]).max((v0[0] + vn[0]).hypot(v0[1] + vn[1]));
    if !(gap < CLOSURE_TOL) {
        return Err(Error::CurveNotClosed { gap });
    }
    let scale = curve
        .position
        .iter()
        .fold(0.0f64, |m, p| m.max(p[0].hypot(p[1])));
    for (x, p) in curve.xs.iter().zip(&curve.position) {
        if p[0].hypot(p[1]) < 1e-12 * scale.max(1.0) {
            return Err(Error::OriginHit { x: *x });
        }
    }
    // unwrapped angle
    let mut angles = Vec::with_capacity(n + 1);
    let mut prev = curve.position[0][1].atan2(curve.position[0][0]);
    angles.push(prev);
    for p in &curve.position[1..] {
        let raw = p[1].atan2(p[0]);
        let mut a = raw + (prev - raw).div_euclid(2.0 * PI) * 2.0 * PI;
        while a - prev > PI {
            a -= 2.0 * PI;
        }
        while a - prev < -PI {
            a += 2.0 * PI;
        }
        angles.push(a);
        prev = a;
    }
    let turn = angles[n] - angles[0];
    if !((turn - PI).abs() < 1e-4) {
        return Err(Error::InvalidInput(format!(
            "curve turns by {turn} over a half period; expected π"
        )));
    }
    let mut d1 = Vec::with_capacity(n + 1);
    let mut d2 = Vec::with_capacity(n + 1);
    for (p, v) in curve.position.iter().zip(&curve.velocity) {
        let r2 = p[0] * p[0] + p[1] * p[1];
        let w = p[0] * v[1] - p[1] * v[0];
        if !((w - 1.0).abs() < 1e-6) {
            return Err(Error::InvalidInput(format!("Wronskian {w} differs from 1")));
        }
        d1.push(1.0 / r2);
        d2.push(-2.0 * (p[0] * v[0] + p[1] * v[1]) / (r2 * r2));
    }
    let mut d3 = vec![0.0; n + 1];
    for &(a, b) in &curve.segments {
        if b - a + 1 < STENCIL {
            return Err(Error::InvalidInput(format!(
                "segment {a}..={b} is too short to differentiate"
            )));
        }
        let h = (curve.xs[b] - curve.xs[a]) / (b - a) as f64;
        let d = differentiate_uniform(&d2[a..=b], h);
        d3[a..=b].copy_from_slice(&d);
    }
    // lift through the distinct nodes in [0, π)
    let mut bx = Vec::new();
    let mut by = Vec::new();
    let offset = angles[0];
    for (x, a) in curve.xs.iter().zip(&angles) {
        if *x >= PI || bx.last().is_some_and(|l| x <= l) {
            continue;
        }
        bx.push(*x);
        by.push(a - offset);
    }
    let lift = CircleDiffeo::from_breakpoints(PI, bx, by)?;
    for (x, g1) in curve.xs.iter().zip(&d1) {
        if !(*g1 >= MIN_DERIVATIVE) {
            return Err(Error::DerivativeUnderflow { x: *x, value: *g1 });
        }
    }
    let derivatives = d1
        .into_iter()
        .zip(d2)
        .zip(d3)
        .map(|((a, b), c)| [a, b, c])
        .collect();
    Ok(ProjDiffeo {
        lift: Lift::Sampled {
            lift,
            xs: curve.xs.clone(),
            derivatives,
        },
    })
}
