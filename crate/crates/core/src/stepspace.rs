//! Signed step functions, the sphere parametrization of the step space, and the
//! Hobby–Rice theorem.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::chebyshev::ChebyshevSystem;
use crate::error::{Error, Result};
use crate::function::CircleFunction;
use crate::quadrature::QuadratureRule;

/// A function on `[0, domain)` taking values `±1` on consecutive intervals.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction {
    domain: f64,
    edges: Vec<f64>,
    signs: Vec<i8>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct StepJson {
    domain: f64,
    breakpoints: Vec<f64>,
    signs: Vec<i8>,
}

impl StepFunction {
    /// `edges` runs from `0` to `domain` and is non-decreasing; `signs[i]` is the value on
    /// `[edges[i], edges[i+1])`.
    pub fn new(domain: f64, edges: Vec<f64>, signs: Vec<i8>) -> Result<Self> {
        if !(domain > 0.0 && domain.is_finite()) {
            return Err(Error::InvalidInput(format!("domain must be positive, got {domain}")));
        }
        if signs.is_empty() || edges.len() != signs.len() + 1 {
            return Err(Error::InvalidInput(format!(
                "{} edges do not bound {} intervals",
                edges.len(),
                signs.len()
            )));
        }
        if edges[0] != 0.0 || edges[edges.len() - 1] != domain {
            return Err(Error::InvalidInput("edges must start at 0 and end at the domain length".into()));
        }
        if edges.windows(2).any(|w| !(w[1] >= w[0])) {
            return Err(Error::InvalidInput("edges must be non-decreasing".into()));
        }
        if signs.iter().any(|s| *s != 1 && *s != -1) {
            return Err(Error::InvalidInput("signs must be +1 or -1".into()));
        }
        Ok(StepFunction { domain, edges, signs })
    }

    /// Consecutive interval lengths; the last edge is pinned to `domain`.
    pub fn from_lengths(domain: f64, lengths: &[f64], signs: Vec<i8>) -> Result<Self> {
        if lengths.iter().any(|l| !(*l >= 0.0)) {
            return Err(Error::InvalidInput("lengths must be non-negative".into()));
        }
        let mut edges = Vec::with_capacity(lengths.len() + 1);
        edges.push(0.0);
        let mut acc = 0.0;
        for l in &lengths[..lengths.len().saturating_sub(1)] {
            acc += l;
            edges.push(acc.min(domain));
        }
        edges.push(domain);
        Self::new(domain, edges, signs)
    }

    pub fn domain(&self) -> f64 {
        self.domain
    }

    /// Interval endpoints including `0` and the domain length.
    pub fn edges(&self) -> &[f64] {
        &self.edges
    }

    pub fn signs(&self) -> &[i8] {
        &self.signs
    }

    pub fn lengths(&self) -> Vec<f64> {
        self.edges.windows(2).map(|w| w[1] - w[0]).collect()
    }

    /// Edges strictly inside the domain.
    pub fn interior_breakpoints(&self) -> Vec<f64> {
        self.edges[1..self.edges.len() - 1].to_vec()
    }

    pub fn value(&self, x: f64) -> f64 {
        let x = x.rem_euclid(self.domain);
        let i = self.edges.partition_point(|e| *e <= x);
        let i = i.clamp(1, self.signs.len());
        self.signs[i - 1] as f64
    }

    pub fn negate(&self) -> Self {
        StepFunction {
            domain: self.domain,
            edges: self.edges.clone(),
            signs: self.signs.iter().map(|s| -s).collect(),
        }
    }

    /// Drops intervals no longer than `min_length` and merges neighbours with equal signs.
    pub fn canonicalize_with(&self, min_length: f64) -> Self {
        let mut edges = vec![0.0];
        let mut signs: Vec<i8> = Vec::new();
        for (i, &s) in self.signs.iter().enumerate() {
            let (a, b) = (self.edges[i], self.edges[i + 1]);
            if b - a <= min_length {
                continue;
            }
            if signs.last() == Some(&s) {
                *edges.last_mut().unwrap() = b;
            } else {
                if signs.is_empty() {
                    edges[0] = 0.0;
                } else {
                    *edges.last_mut().unwrap() = a;
                }
                edges.push(b);
                signs.push(s);
            }
        }
        if signs.is_empty() {
            // every interval was dropped; keep the longest sign
            let i = self
                .lengths()
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.partial_cmp(b.1).unwrap())
                .map(|(i, _)| i)
                .unwrap_or(0);
            return StepFunction {
                domain: self.domain,
                edges: vec![0.0, self.domain],
                signs: vec![self.signs[i]],
            };
        }
        // dropped intervals at the ends fold into the neighbouring interval
        let last = edges.len() - 1;
        edges[last] = self.domain;
        edges[0] = 0.0;
        StepFunction {
            domain: self.domain,
            edges,
            signs,
        }
    }

    /// Drops zero-length intervals and merges neighbours with equal signs.
    pub fn canonicalize(&self) -> Self {
        self.canonicalize_with(0.0)
    }

    pub fn is_canonical(&self) -> bool {
        self.lengths().iter().all(|l| *l > 0.0) && self.signs.windows(2).all(|w| w[0] != w[1])
    }

    /// Exact `L¹` distance between two step functions on the same domain.
    pub fn l1_distance(&self, other: &StepFunction) -> Result<f64> {
        crate::function::same_period(self.domain, other.domain)?;
        let mut cuts: Vec<f64> = self.edges.iter().chain(&other.edges).copied().collect();
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        cuts.dedup();
        Ok(cuts
            .windows(2)
            .filter(|w| w[1] > w[0])
            .map(|w| {
                let mid = 0.5 * (w[0] + w[1]);
                (self.value(mid) - other.value(mid)).abs() * (w[1] - w[0])
            })
            .sum())
    }

    pub fn to_json(&self) -> serde_json::Value {
        serde_json::to_value(StepJson {
            domain: self.domain,
            breakpoints: self.interior_breakpoints(),
            signs: self.signs.clone(),
        })
        .expect("plain data serializes")
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        let s: StepJson = serde_json::from_value(value.clone())
            .map_err(|e| Error::InvalidInput(format!("step function json: {e}")))?;
        let mut edges = Vec::with_capacity(s.breakpoints.len() + 2);
        edges.push(0.0);
        edges.extend(s.breakpoints);
        edges.push(s.domain);
        Self::new(s.domain, edges, s.signs)
    }

    /// CSV with header `start,end,sign`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("start,end,sign\n");
        for (i, s) in self.signs.iter().enumerate() {
            out.push_str(&format!(
                "{},{},{}\n",
                crate::diffeo::fmt17(self.edges[i]),
                crate::diffeo::fmt17(self.edges[i + 1]),
                s
            ));
        }
        out
    }
}

/// The face map `ψ_±`: a point of the simplex (interval lengths summing to the domain)
/// to the step function with alternating signs starting at `sign`.
pub fn cell_map(sign: i8, lengths: &[f64], domain: f64) -> Result<StepFunction> {
    let signs = (0..lengths.len())
        .map(|i| if i % 2 == 0 { sign } else { -sign })
        .collect();
    StepFunction::from_lengths(domain, lengths, signs)
}

/// A point on the unit sphere `S^n` read as a signed partition of `[0, domain]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SignedPartition {
    coords: Vec<f64>,
    domain: f64,
}

impl SignedPartition {
    /// Requires `|Σ x_i² - 1| < 1e-12`.
    pub fn new(coords: Vec<f64>, domain: f64) -> Result<Self> {
        let norm2: f64 = coords.iter().map(|x| x * x).sum();
        if (norm2 - 1.0).abs() >= 1e-12 {
            return Err(Error::InvalidInput(format!(
                "coordinates must lie on the unit sphere, |x|² = {norm2}"
            )));
        }
        Ok(SignedPartition { coords, domain })
    }

    pub fn normalized(mut coords: Vec<f64>, domain: f64) -> Result<Self> {
        let norm = coords.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(norm > 0.0) {
            return Err(Error::InvalidInput("cannot normalize the zero vector".into()));
        }
        coords.iter_mut().for_each(|x| *x /= norm);
        Ok(SignedPartition { coords, domain })
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn domain(&self) -> f64 {
        self.domain
    }

    pub fn antipode(&self) -> Self {
        SignedPartition {
            coords: self.coords.iter().map(|x| -x).collect(),
            domain: self.domain,
        }
    }
}

/// Interval `i` has length `L x_i²` and sign `sign(x_i)`; zero coordinates give empty
/// intervals, which are kept.
pub fn step_from_sphere(p: &SignedPartition) -> StepFunction {
    let lengths: Vec<f64> = p.coords.iter().map(|x| p.domain * x * x).collect();
    let signs = p.coords.iter().map(|x| if *x < 0.0 { -1 } else { 1 }).collect();
    StepFunction::from_lengths(p.domain, &lengths, signs).expect("sphere points give valid steps")
}

/// `F(x) = (∫ g_1 h_x, …, ∫ g_n h_x)` with exact splitting at the step edges.
pub fn moment_map(p: &SignedPartition, basis: &[CircleFunction], rule: &QuadratureRule) -> Vec<f64> {
    step_moments(&step_from_sphere(p), basis, rule)
}

pub fn step_moments(h: &StepFunction, basis: &[CircleFunction], rule: &QuadratureRule) -> Vec<f64> {
    let mut kinks = h.interior_breakpoints();
    for g in basis {
        kinks.extend(g.kinks());
    }
    rule.integrate_vec(basis.len(), 0.0, h.domain(), &kinks, |x, out| {
        let s = h.value(x);
        for (o, g) in out.iter_mut().zip(basis) {
            *o = s * g.eval(x);
        }
    })
}

/// Derivative of the moment map with respect to the ambient coordinates, `n × (n+1)`.
fn moment_jacobian(p: &SignedPartition, basis: &[CircleFunction]) -> DMatrix<f64> {
    let x = &p.coords;
    let m = x.len();
    let n = basis.len();
    let h = step_from_sphere(p);
    let edges = h.edges();
    let sigma: Vec<f64> = h.signs().iter().map(|s| *s as f64).collect();
    // g at every edge
    let gb: Vec<Vec<f64>> = edges
        .iter()
        .map(|&b| basis.iter().map(|g| g.eval_closed(b)).collect())
        .collect();
    let mut jac = DMatrix::zeros(n, m);
    for r in 0..n {
        // suffix[i] = Σ_{k>i} σ_k (g(B_{k+1}) - g(B_k))
        let mut suffix = vec![0.0; m];
        for i in (0..m.saturating_sub(1)).rev() {
            let k = i + 1;
            suffix[i] = suffix[i + 1] + sigma[k] * (gb[k + 1][r] - gb[k][r]);
        }
        for i in 0..m {
            let d = sigma[i] * gb[i + 1][r] + suffix[i];
            jac[(r, i)] = 2.0 * p.domain * x[i] * d;
        }
    }
    jac
}

#[derive(Debug, Clone, PartialEq)]
pub struct HobbyRiceOptions {
    pub tol: f64,
    pub max_iter: usize,
    /// Number of starting points tried before giving up.
    pub seeds: usize,
    pub seed: u64,
    pub rule: QuadratureRule,
}

impl Default for HobbyRiceOptions {
    fn default() -> Self {
        HobbyRiceOptions {
            tol: 1e-9,
            max_iter: 60,
            seeds: 32,
            seed: 0,
            rule: QuadratureRule::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct HobbyRiceSolution {
    pub partition: SignedPartition,
    pub step: StepFunction,
    pub moments: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
    pub seed_index: usize,
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |a, x| a.max(x.abs()))
}

fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Starting points: the alternating equal partition, its antipode, then random antipodal
/// pairs.
fn seed_points(m: usize, count: usize, seed: u64) -> Vec<Vec<f64>> {
    let mut out = Vec::with_capacity(count);
    let equal: Vec<f64> = (0..m)
        .map(|i| if i % 2 == 0 { 1.0 } else { -1.0 } / (m as f64).sqrt())
        .collect();
    out.push(equal.clone());
    out.push(equal.iter().map(|x| -x).collect());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    while out.len() < count {
        let v: Vec<f64> = (0..m).map(|_| StandardNormal.sample(&mut rng)).collect();
        let norm = norm2(&v);
        if norm < 1e-8 {
            continue;
        }
        let v: Vec<f64> = v.iter().map(|x| x / norm).collect();
        out.push(v.iter().map(|x| -x).collect());
        out.insert(out.len() - 1, v);
    }
    out.truncate(count);
    out
}

/// Projected Gauss–Newton on the sphere from one start.
fn newton_on_sphere(
    start: Vec<f64>,
    domain: f64,
    basis: &[CircleFunction],
    opts: &HobbyRiceOptions,
) -> (SignedPartition, Vec<f64>, usize) {
    let m = start.len();
    let mut p = SignedPartition::normalized(start, domain).expect("seed is nonzero");
    let mut f = moment_map(&p, basis, &opts.rule);
    let mut iters = 0;
    while iters < opts.max_iter && max_abs(&f) >= opts.tol {
        iters += 1;
        let jac = moment_jacobian(&p, basis);
        let x = DVector::from_column_slice(&p.coords);
        let proj = DMatrix::identity(m, m) - &x * x.transpose();
        let jp = jac * proj;
        let svd = jp.svd(true, true);
        let cutoff = 1e-12 * svd.singular_values.max().max(f64::MIN_POSITIVE);
        let step = match svd.solve(&DVector::from_column_slice(&f), cutoff) {
            Ok(s) => -s,
            Err(_) => break,
        };
        let current = norm2(&f);
        let mut t = 1.0;
        let mut accepted = false;
        while t >= 1.0 / 1024.0 {
            let trial: Vec<f64> = p.coords.iter().zip(step.iter()).map(|(a, d)| a + t * d).collect();
            if let Ok(q) = SignedPartition::normalized(trial, domain) {
                let fq = moment_map(&q, basis, &opts.rule);
                if norm2(&fq) < current * (1.0 - 1e-4 * t) {
                    p = q;
                    f = fq;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            break;
        }
    }
    (p, f, iters)
}

fn solve_hobby_rice_where<A>(
    basis: &[CircleFunction],
    opts: &HobbyRiceOptions,
    accept: A,
) -> Result<HobbyRiceSolution>
where
    A: Fn(&StepFunction) -> bool,
{
    let first = basis
        .first()
        .ok_or_else(|| Error::InvalidInput("empty basis".into()))?;
    let domain = first.period();
    for g in basis {
        crate::function::same_period(domain, g.period())?;
    }
    let n = basis.len();
    let mut best = f64::INFINITY;
    for (index, start) in seed_points(n + 1, opts.seeds.max(1), opts.seed).into_iter().enumerate() {
        let (p, f, iterations) = newton_on_sphere(start, domain, basis, opts);
        let residual = max_abs(&f);
        let step = step_from_sphere(&p);
        if residual < opts.tol && accept(&step) {
            return Ok(HobbyRiceSolution {
                partition: p,
                step,
                moments: f,
                residual,
                iterations,
                seed_index: index,
            });
        }
        best = best.min(residual);
    }
    Err(Error::ConvergenceFailure {
        best_residual: best,
        detail: format!("no step function orthogonal to the basis from {} starts", opts.seeds),
    })
}

/// Finds a step function with at most `n` sign changes orthogonal to `basis`.
pub fn solve_hobby_rice(basis: &[CircleFunction], opts: &HobbyRiceOptions) -> Result<HobbyRiceSolution> {
    solve_hobby_rice_where(basis, opts, |_| true)
}

/// For a Chebyshev system of dimension `n`, the orthogonal step function with exactly
/// `n + 1` alternating intervals.
pub fn orth_alternating_step(system: &ChebyshevSystem, opts: &HobbyRiceOptions) -> Result<StepFunction> {
    let report = system.verify_chebyshev(200, opts.seed);
    if !report.pass {
        return Err(Error::NotChebyshev {
            sign_changes: report.zero_count,
            allowed: report.allowed,
        });
    }
    let n = system.dimension();
    let domain = system.period();
    let min_length = 1e-9 * domain;
    let sol = solve_hobby_rice_where(system.basis(), opts, |h| {
        h.canonicalize_with(min_length).signs().len() == n + 1
    })?;
    Ok(sol.step.canonicalize_with(min_length))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use std::f64::consts::{FRAC_PI_2, PI, TAU};

    fn sphere_point(rng: &mut ChaCha8Rng, m: usize) -> SignedPartition {
        let v: Vec<f64> = (0..m).map(|_| StandardNormal.sample(rng)).collect();
        SignedPartition::normalized(v, TAU).unwrap()
    }

    #[test]
    fn sphere_parametrization_examples() {
        let h = step_from_sphere(&SignedPartition::new(vec![1.0, 0.0], TAU).unwrap()).canonicalize();
        assert_eq!(h.signs(), &[1]);
        assert_eq!(h.edges(), &[0.0, TAU]);
        let s = 0.5f64.sqrt();
        let h = step_from_sphere(&SignedPartition::new(vec![s, -s], TAU).unwrap());
        assert_eq!(h.signs(), &[1, -1]);
        assert!((h.edges()[1] - PI).abs() < 1e-15);
        assert!(SignedPartition::new(vec![1.0, 1.0], TAU).is_err());
    }

    #[test]
    fn antipodes_negate() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            let p = sphere_point(&mut rng, 4);
            let h = step_from_sphere(&p);
            let g = step_from_sphere(&p.antipode());
            assert_eq!(h.negate(), g);
        }
    }

    #[test]
    fn lengths_sum_to_domain() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let m = rng.random_range(1..7);
            let p = sphere_point(&mut rng, m);
            let total: f64 = step_from_sphere(&p).lengths().iter().sum();
            assert!((total - TAU).abs() < 1e-12);
        }
    }

    #[test]
    fn boundary_faces_drop_one_dimension() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in 1..6 {
            for _ in 0..20 {
                let w: Vec<f64> = (0..n).map(|_| rng.random_range(0.01..1.0)).collect();
                let total: f64 = w.iter().sum();
                let x: Vec<f64> = w.iter().map(|v| v / total * TAU).collect();
                for sign in [1i8, -1] {
                    let mut first = vec![0.0];
                    first.extend(&x);
                    let lhs = cell_map(sign, &first, TAU).unwrap().canonicalize();
                    let rhs = cell_map(-sign, &x, TAU).unwrap();
                    assert!(lhs.l1_distance(&rhs).unwrap() < 1e-12);
                    assert_eq!(lhs.signs(), rhs.signs());

                    let mut last = x.clone();
                    last.push(0.0);
                    let lhs = cell_map(sign, &last, TAU).unwrap().canonicalize();
                    let rhs = cell_map(sign, &x, TAU).unwrap();
                    assert!(lhs.l1_distance(&rhs).unwrap() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn interior_faces_merge_neighbours() {
        let h = cell_map(1, &[1.0, 0.0, 2.0, 3.0], 6.0).unwrap().canonicalize();
        assert_eq!(h.signs(), &[1, -1]);
        assert_eq!(h.edges(), &[0.0, 3.0, 6.0]);
    }

    #[test]
    fn canonical_form() {
        let h = StepFunction::new(4.0, vec![0.0, 1.0, 1.0, 2.0, 3.0, 4.0], vec![1, -1, 1, 1, -1]).unwrap();
        let c = h.canonicalize();
        assert!(c.is_canonical());
        assert_eq!(c.edges(), &[0.0, 3.0, 4.0]);
        assert_eq!(c.signs(), &[1, -1]);
        assert_eq!(h.l1_distance(&c).unwrap(), 0.0);
    }

    #[test]
    fn json_round_trip() {
        let h = StepFunction::new(TAU, vec![0.0, 1.0, 4.0, TAU], vec![-1, 1, -1]).unwrap();
        let v = h.to_json();
        assert_eq!(v["breakpoints"], serde_json::json!([1.0, 4.0]));
        assert_eq!(StepFunction::from_json(&v).unwrap(), h);
    }

    #[test]
    fn value_respects_half_open_intervals() {
        let h = StepFunction::new(TAU, vec![0.0, PI, TAU], vec![1, -1]).unwrap();
        assert_eq!(h.value(0.0), 1.0);
        assert_eq!(h.value(PI), -1.0);
        assert_eq!(h.value(TAU), 1.0);
        assert_eq!(h.value(-0.1), -1.0);
    }

    #[test]
    fn moment_jacobian_matches_finite_differences_along_the_sphere() {
        let basis: Vec<CircleFunction> = ["1", "cos(x)", "sin(x)"]
            .iter()
            .map(|e| CircleFunction::parse(e, TAU).unwrap())
            .collect();
        let rule = QuadratureRule::default();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..10 {
            let p = sphere_point(&mut rng, 4);
            let jac = moment_jacobian(&p, &basis);
            let w: Vec<f64> = (0..4).map(|_| StandardNormal.sample(&mut rng)).collect();
            let dot: f64 = w.iter().zip(&p.coords).map(|(a, b)| a * b).sum();
            let v: Vec<f64> = w.iter().zip(&p.coords).map(|(a, b)| a - dot * b).collect();
            let d = 1e-6;
            let shifted = |t: f64| {
                let c = p.coords.iter().zip(&v).map(|(a, b)| a + t * b).collect();
                moment_map(&SignedPartition::normalized(c, TAU).unwrap(), &basis, &rule)
            };
            let (fu, fd) = (shifted(d), shifted(-d));
            let jv = &jac * DVector::from_column_slice(&v);
            for r in 0..3 {
                let num = (fu[r] - fd[r]) / (2.0 * d);
                assert!((num - jv[r]).abs() < 1e-5 * (1.0 + num.abs()), "{num} vs {}", jv[r]);
            }
        }
    }

    #[test]
    fn hobby_rice_for_constants() {
        let basis = vec![CircleFunction::constant(1.0, TAU)];
        let sol = solve_hobby_rice(&basis, &HobbyRiceOptions::default()).unwrap();
        let h = sol.step.canonicalize();
        assert!(h.signs().len() <= 2);
        let lengths = h.lengths();
        assert!((lengths[0] - PI).abs() < 1e-8);
    }

    #[test]
    fn hobby_rice_for_first_harmonics() {
        let basis: Vec<CircleFunction> = ["1", "cos(x)", "sin(x)"]
            .iter()
            .map(|e| CircleFunction::parse(e, TAU).unwrap())
            .collect();
        let sol = solve_hobby_rice(&basis, &HobbyRiceOptions::default()).unwrap();
        assert!(sol.residual < 1e-9);
        assert!(sol.step.canonicalize_with(1e-9).signs().len() <= 4);
        let check = step_moments(&sol.step, &basis, &QuadratureRule::default().refined());
        assert!(max_abs(&check) < 1e-9);
    }

    #[test]
    fn orthogonal_steps_for_trig_systems() {
        for k in 0..=2 {
            let v = ChebyshevSystem::trig(k);
            let h = orth_alternating_step(&v, &HobbyRiceOptions::default()).unwrap();
            assert_eq!(h.signs().len(), 2 * k + 2);
            let r = step_moments(&h, v.basis(), &QuadratureRule::default());
            assert!(max_abs(&r) < 1e-9, "k = {k}: {r:?}");
            // the orthogonal alternating step is unique up to rotation: equal lengths
            for l in h.lengths().iter().skip(1).take(2 * k) {
                assert!((l - TAU / (2 * k + 2) as f64).abs() < 1e-7, "{:?}", h.lengths());
            }
        }
    }

    #[test]
    fn orthogonal_step_needs_a_chebyshev_system() {
        let basis = ["1", "cos(2*x)", "sin(2*x)"]
            .iter()
            .map(|e| CircleFunction::parse(e, TAU).unwrap())
            .collect();
        let v = ChebyshevSystem::new(basis, QuadratureRule::default()).unwrap();
        assert!(matches!(
            orth_alternating_step(&v, &HobbyRiceOptions::default()),
            Err(Error::NotChebyshev { .. })
        ));
    }

    #[test]
    fn quarter_step_is_orthogonal_to_first_harmonics() {
        let h = StepFunction::new(TAU, vec![0.0, FRAC_PI_2, PI, 3.0 * FRAC_PI_2, TAU], vec![1, -1, 1, -1])
            .unwrap();
        let basis: Vec<CircleFunction> = ["1", "cos(x)", "sin(x)"]
            .iter()
            .map(|e| CircleFunction::parse(e, TAU).unwrap())
            .collect();
        assert!(max_abs(&step_moments(&h, &basis, &QuadratureRule::default())) < 1e-13);
    }
}
