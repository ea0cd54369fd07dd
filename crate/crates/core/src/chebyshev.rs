//! Chebyshev systems on the circle.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::{inner_product, inner_products, same_period, CircleFunction};
use crate::quadrature::QuadratureRule;
use crate::signs::count_sign_changes;

/// Declarative description of a system, as read from the command line or a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum SystemSpec {
    Trig { order: usize },
    Custom { basis: Vec<String>, period: f64 },
}

/// An ordered basis `g_1, …, g_n` of functions sharing one period.
#[derive(Debug, Clone)]
pub struct ChebyshevSystem {
    basis: Vec<CircleFunction>,
    rule: QuadratureRule,
}

/// Smallest eigenvalue of the Gram matrix after scaling to unit diagonal.
pub fn normalized_gram_min_eigenvalue(
    basis: &[CircleFunction],
    rule: &QuadratureRule,
) -> Result<f64> {
    let n = basis.len();
    let mut gram = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = inner_product(&basis[i], &basis[j], rule)?;
            gram[(i, j)] = v;
            gram[(j, i)] = v;
        }
    }
    let d: Vec<f64> = (0..n).map(|i| gram[(i, i)].max(f64::MIN_POSITIVE).sqrt()).collect();
    for i in 0..n {
        for j in 0..n {
            gram[(i, j)] /= d[i] * d[j];
        }
    }
    let eig = SymmetricEigen::new(gram);
    Ok(eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min))
}

impl ChebyshevSystem {
    pub fn new(basis: Vec<CircleFunction>, rule: QuadratureRule) -> Result<Self> {
        let period = basis
            .first()
            .ok_or_else(|| Error::InvalidInput("a system needs at least one function".into()))?
            .period();
        for g in &basis {
            same_period(period, g.period())?;
        }
        let min_eigenvalue = normalized_gram_min_eigenvalue(&basis, &rule)?;
        if !(min_eigenvalue > 1e-10) {
            return Err(Error::DependentBasis { min_eigenvalue });
        }
        Ok(ChebyshevSystem { basis, rule })
    }

    /// `{1, cos x, sin x, …, cos kx, sin kx}` on period 2π.
    pub fn trig(order: usize) -> Self {
        let tau = std::f64::consts::TAU;
        let mut basis = vec![CircleFunction::parse("1", tau).expect("constant")];
        for m in 1..=order {
            basis.push(CircleFunction::parse(&format!("cos({m}*x)"), tau).expect("cosine"));
            basis.push(CircleFunction::parse(&format!("sin({m}*x)"), tau).expect("sine"));
        }
        ChebyshevSystem {
            basis,
            rule: QuadratureRule::default(),
        }
    }

    pub fn from_spec(spec: &SystemSpec) -> Result<Self> {
        match spec {
            SystemSpec::Trig { order } => Ok(Self::trig(*order)),
            SystemSpec::Custom { basis, period } => {
                let funcs = basis
                    .iter()
                    .map(|t| CircleFunction::parse(t, *period))
                    .collect::<Result<Vec<_>>>()?;
                Self::new(funcs, QuadratureRule::default())
            }
        }
    }

    pub fn with_rule(mut self, rule: QuadratureRule) -> Self {
        self.rule = rule;
        self
    }

    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    pub fn period(&self) -> f64 {
        self.basis[0].period()
    }

    pub fn basis(&self) -> &[CircleFunction] {
        &self.basis
    }

    pub fn rule(&self) -> &QuadratureRule {
        &self.rule
    }

    /// `(⟨f, g_1⟩, …, ⟨f, g_n⟩)`.
    pub fn residual_vector(&self, f: &CircleFunction) -> Result<Vec<f64>> {
        inner_products(f, &self.basis, &self.rule)
    }

    pub fn residual_vector_with(&self, f: &CircleFunction, rule: &QuadratureRule) -> Result<Vec<f64>> {
        inner_products(f, &self.basis, rule)
    }

    /// Matrix `M[i][j] = g_i(x_j)` with its LU factorization.
    pub fn collocation_matrix(&self, points: &[f64]) -> Result<Collocation> {
        let n = self.dimension();
        if points.len() != n {
            return Err(Error::InvalidInput(format!(
                "need {n} collocation points, got {}",
                points.len()
            )));
        }
        let matrix = DMatrix::from_fn(n, n, |i, j| self.basis[i].eval(points[j]));
        let sv = matrix.clone().singular_values();
        let smax = sv.max();
        let smin = sv.min();
        let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
        if !(condition <= CONDITION_LIMIT) {
            return Err(Error::SingularMatrix { condition });
        }
        let lu = matrix.clone().lu();
        Ok(Collocation {
            matrix,
            lu,
            condition,
        })
    }

    /// Randomized falsifier of the Chebyshev property: draws `trials` unit coefficient
    /// vectors and counts sign changes of each combination. Tangential zeros are invisible.
    pub fn verify_chebyshev(&self, trials: usize, seed: u64) -> ChebyshevReport {
        let n = self.dimension();
        let allowed = n - 1;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut worst: Option<(Vec<f64>, usize)> = None;
        for _ in 0..trials.max(1) {
            let mut c: Vec<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
            let norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
            c.iter_mut().for_each(|v| *v /= norm);
            let count = self.combination_sign_changes(&c);
            if worst.as_ref().is_none_or(|(_, w)| count > *w) {
                worst = Some((c, count));
            }
        }
        let (worst_coefficients, zero_count) = worst.expect("at least one trial");
        ChebyshevReport {
            pass: zero_count <= allowed,
            worst_coefficients,
            zero_count,
            allowed,
        }
    }

    fn combination_sign_changes(&self, c: &[f64]) -> usize {
        let terms: Vec<(f64, CircleFunction)> =
            c.iter().copied().zip(self.basis.iter().cloned()).collect();
        let combo = CircleFunction::linear_combination(&terms).expect("shared period");
        let scale = combo.sup_norm(1024);
        count_sign_changes(&combo, 1e-12 * scale.max(f64::MIN_POSITIVE))
            .map(|r| r.count)
            .unwrap_or(0)
    }

    /// Forward Sturm–Hurwitz–Kellogg check: a function orthogonal to the system must change
    /// sign at least `n + 1` times.
    pub fn sturm_hurwitz_check(&self, f: &CircleFunction) -> Result<SturmHurwitzReport> {
        let residuals = self.residual_vector(f)?;
        let max_residual = residuals.iter().fold(0.0f64, |a, r| a.max(r.abs()));
        if !(max_residual < ORTHOGONALITY_TOL) {
            return Err(Error::NotOrthogonal {
                residual: max_residual,
            });
        }
        let tol = 1e-9 * f.sup_norm(4096);
        let report = count_sign_changes(f, tol)?;
        let required = self.dimension() + 1;
        Ok(SturmHurwitzReport {
            pass: report.count >= required,
            count: report.count,
            required,
            locations: report.locations,
            residuals,
        })
    }
}

/// Condition numbers above this are reported as singular.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Residuals below this count as orthogonal in the forward check.
pub const ORTHOGONALITY_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct Collocation {
    pub matrix: DMatrix<f64>,
    pub lu: nalgebra::LU<f64, nalgebra::Dyn, nalgebra::Dyn>,
    pub condition: f64,
}

impl Collocation {
    pub fn determinant(&self) -> f64 {
        self.lu.determinant()
    }

    pub fn solve(&self, rhs: &[f64]) -> Option<Vec<f64>> {
        self.lu
            .solve(&DVector::from_column_slice(rhs))
            .map(|v| v.iter().copied().collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChebyshevReport {
    pub pass: bool,
    pub worst_coefficients: Vec<f64>,
    /// Largest sign-change count seen among the sampled combinations.
    pub zero_count: usize,
    pub allowed: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SturmHurwitzReport {
    pub pass: bool,
    pub count: usize,
    pub required: usize,
    pub locations: Vec<f64>,
    pub residuals: Vec<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use std::f64::consts::{PI, TAU};

    fn custom(exprs: &[&str]) -> ChebyshevSystem {
        let basis = exprs.iter().map(|e| CircleFunction::parse(e, TAU).unwrap()).collect();
        ChebyshevSystem::new(basis, QuadratureRule::default()).unwrap()
    }

    #[test]
    fn trig_systems() {
        let v0 = ChebyshevSystem::trig(0);
        assert_eq!(v0.dimension(), 1);
        let v1 = ChebyshevSystem::trig(1);
        assert_eq!(v1.dimension(), 3);
        let at0: Vec<f64> = v1.basis().iter().map(|g| g.eval(0.0)).collect();
        assert_eq!(at0, vec![1.0, 1.0, 0.0]);
        assert!(ChebyshevSystem::trig(2).verify_chebyshev(200, 0).pass);
    }

    #[test]
    fn chebyshev_falsifier() {
        let r = ChebyshevSystem::trig(1).verify_chebyshev(500, 1);
        assert!(r.pass);
        assert!(r.zero_count <= 2);
        let r = custom(&["1", "cos(2*x)", "sin(2*x)"]).verify_chebyshev(500, 1);
        assert!(!r.pass);
        assert!(r.zero_count >= 4);
        let r = custom(&["sin(x)"]).verify_chebyshev(10, 1);
        assert!(!r.pass);
        assert_eq!(r.zero_count, 2);
    }

    #[test]
    fn trig_combinations_have_few_sign_changes() {
        // amplitude-phase oracle: a + r cos(x - t) changes sign twice iff |a| < r
        let v = ChebyshevSystem::trig(1);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let c: Vec<f64> = (0..3).map(|_| rng.random_range(-1.0..1.0)).collect();
            let r = c[1].hypot(c[2]);
            let expected = if c[0].abs() < r { 2 } else { 0 };
            if (c[0].abs() - r).abs() < 1e-6 {
                continue;
            }
            assert_eq!(v.combination_sign_changes(&c), expected);
        }
    }

    #[test]
    fn dependent_basis_is_rejected() {
        let basis = ["sin(x)", "2*sin(x)"]
            .iter()
            .map(|e| CircleFunction::parse(e, TAU).unwrap())
            .collect();
        assert!(matches!(
            ChebyshevSystem::new(basis, QuadratureRule::default()),
            Err(Error::DependentBasis { .. })
        ));
    }

    #[test]
    fn collocation_examples() {
        let m = ChebyshevSystem::trig(0).collocation_matrix(&[1.3]).unwrap();
        assert_eq!(m.matrix[(0, 0)], 1.0);
        let pts = [0.0, 2.0 * PI / 3.0, 4.0 * PI / 3.0];
        let col = ChebyshevSystem::trig(1).collocation_matrix(&pts).unwrap();
        // cofactor expansion oracle
        let g = |i: usize, x: f64| match i {
            0 => 1.0,
            1 => x.cos(),
            _ => x.sin(),
        };
        let a = |i: usize, j: usize| g(i, pts[j]);
        let det = a(0, 0) * (a(1, 1) * a(2, 2) - a(1, 2) * a(2, 1))
            - a(0, 1) * (a(1, 0) * a(2, 2) - a(1, 2) * a(2, 0))
            + a(0, 2) * (a(1, 0) * a(2, 1) - a(1, 1) * a(2, 0));
        assert!((col.determinant() - det).abs() < 1e-12);
        assert!((det.abs() - 3.0 * 3f64.sqrt() / 2.0).abs() < 1e-12);
        assert!(matches!(
            ChebyshevSystem::trig(1).collocation_matrix(&[0.5, 0.5, 2.0]),
            Err(Error::SingularMatrix { .. })
        ));
    }

    #[test]
    fn generic_points_are_nonsingular() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for k in 1..=3 {
            let v = ChebyshevSystem::trig(k);
            let n = v.dimension();
            for _ in 0..1000 / 3 + 1 {
                let mut pts: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..TAU)).collect();
                pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
                if pts.windows(2).any(|w| w[1] - w[0] < 1e-2) {
                    continue;
                }
                assert!(v.collocation_matrix(&pts).is_ok());
            }
        }
    }

    #[test]
    fn residual_examples() {
        let v = ChebyshevSystem::trig(1);
        let r = v.residual_vector(&CircleFunction::parse("1", TAU).unwrap()).unwrap();
        assert!((r[0] - TAU).abs() < 1e-13 && r[1].abs() < 1e-13 && r[2].abs() < 1e-13);
        let r = v.residual_vector(&CircleFunction::parse("sin(2*x)", TAU).unwrap()).unwrap();
        assert!(r.iter().all(|x| x.abs() < 1e-13));
        let r = v.residual_vector(&CircleFunction::parse("sin(x)", TAU).unwrap()).unwrap();
        assert!(r[0].abs() < 1e-13 && r[1].abs() < 1e-13 && (r[2] - PI).abs() < 1e-13);
    }

    #[test]
    fn residual_is_linear() {
        let v = ChebyshevSystem::trig(2);
        let f1 = CircleFunction::parse("exp(cos(x))", TAU).unwrap();
        let f2 = CircleFunction::parse("sin(3*x)*x", TAU).unwrap();
        let (a, b) = (1.7, -0.3);
        let combo = CircleFunction::linear_combination(&[(a, f1.clone()), (b, f2.clone())]).unwrap();
        let r = v.residual_vector(&combo).unwrap();
        let r1 = v.residual_vector(&f1).unwrap();
        let r2 = v.residual_vector(&f2).unwrap();
        for i in 0..5 {
            assert!((r[i] - (a * r1[i] + b * r2[i])).abs() < 1e-10);
        }
    }

    #[test]
    fn sturm_hurwitz_examples() {
        let v = ChebyshevSystem::trig(1);
        let r = v.sturm_hurwitz_check(&CircleFunction::parse("sin(2*x)", TAU).unwrap()).unwrap();
        assert!(r.pass && r.count == 4);
        let r = v.sturm_hurwitz_check(&CircleFunction::parse("cos(3*x)", TAU).unwrap()).unwrap();
        assert!(r.pass && r.count == 6);
        let e = v.sturm_hurwitz_check(&CircleFunction::parse("sin(x)", TAU).unwrap());
        assert!(matches!(e, Err(Error::NotOrthogonal { residual }) if (residual - PI).abs() < 1e-10));
    }

    #[test]
    fn forward_theorem_on_high_harmonics() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for k in 1..=2usize {
            let v = ChebyshevSystem::trig(k);
            for _ in 0..50 {
                let mut expr = String::from("0");
                for m in (k + 1)..=(k + 3) {
                    let a: f64 = rng.random_range(-1.0..1.0);
                    let b: f64 = rng.random_range(-1.0..1.0);
                    expr.push_str(&format!("+({a})*cos({m}*x)+({b})*sin({m}*x)"));
                }
                let f = CircleFunction::parse(&expr, TAU).unwrap();
                let r = v.sturm_hurwitz_check(&f).unwrap();
                assert!(r.pass, "{expr}: {} sign changes", r.count);
            }
        }
    }

    #[test]
    fn spec_round_trips_through_json() {
        let s: SystemSpec = serde_json::from_str(r#"{"type":"trig","order":2}"#).unwrap();
        assert_eq!(s, SystemSpec::Trig { order: 2 });
        let s: SystemSpec =
            serde_json::from_str(r#"{"type":"custom","basis":["1","cos(x)"],"period":6.283185307179586}"#)
                .unwrap();
        assert_eq!(ChebyshevSystem::from_spec(&s).unwrap().dimension(), 2);
    }
}
