//! Periodic real functions on a circle of given period.

use std::fmt;
use std::io::Read;
use std::sync::Arc;

use crate::diffeo::CircleDiffeo;
use crate::error::{Error, Result};
use crate::expr::Expression;
use crate::pchip::PeriodicPchip;
use crate::quadrature::QuadratureRule;
use crate::stepspace::StepFunction;

/// Number of probe points used to reject expressions that are not finite.
pub const PROBE_GRID: usize = 4096;

/// Minimum node count of a sampled function.
pub const MIN_SAMPLES: usize = 16;

type Custom = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Body {
    Expr(Expression),
    Samples(PeriodicPchip),
    Pullback(CircleFunction, CircleDiffeo),
    Step(StepFunction),
    Affine {
        inner: CircleFunction,
        scale: f64,
        offset: f64,
    },
    Combination(Vec<(f64, CircleFunction)>),
    Custom(Custom, Vec<f64>),
}

/// A real function on `R / period Z`.
///
/// Evaluation always reduces the argument modulo the period, so periodicity holds by
/// construction. Cloning is cheap.
#[derive(Clone)]
pub struct CircleFunction {
    period: f64,
    body: Arc<Body>,
}

impl fmt::Debug for CircleFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &*self.body {
            Body::Expr(e) => format!("expr({})", e.text()),
            Body::Samples(p) => format!("samples({})", p.nodes().len()),
            Body::Pullback(..) => "pullback".to_string(),
            Body::Step(s) => format!("step({} intervals)", s.signs().len()),
            Body::Affine { scale, offset, .. } => format!("affine({scale}, {offset})"),
            Body::Combination(terms) => format!("combination({})", terms.len()),
            Body::Custom(..) => "custom".to_string(),
        };
        write!(f, "CircleFunction {{ period: {}, {kind} }}", self.period)
    }
}

fn check_period(period: f64) -> Result<()> {
    if period > 0.0 && period.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("period must be positive, got {period}")))
    }
}

impl CircleFunction {
    fn with_body(period: f64, body: Body) -> Self {
        CircleFunction {
            period,
            body: Arc::new(body),
        }
    }

    /// Parses an expression in `x` and checks it is finite on the probe grid.
    pub fn parse(text: &str, period: f64) -> Result<Self> {
        check_period(period)?;
        let expr = Expression::parse(text)?;
        for i in 0..PROBE_GRID {
            let x = period * i as f64 / PROBE_GRID as f64;
            if !expr.eval(x).is_finite() {
                return Err(Error::Domain { x });
            }
        }
        Ok(Self::with_body(period, Body::Expr(expr)))
    }

    pub fn constant(value: f64, period: f64) -> Self {
        Self::with_body(
            period,
            Body::Custom(Arc::new(move |_| value), Vec::new()),
        )
    }

    /// Monotone-cubic interpolation of periodic samples; `xs` must increase strictly
    /// within `[0, period)`.
    pub fn from_samples(xs: Vec<f64>, ys: Vec<f64>, period: f64) -> Result<Self> {
        check_period(period)?;
        if xs.len() < MIN_SAMPLES {
            return Err(Error::InvalidInput(format!(
                "sampled functions need at least {MIN_SAMPLES} nodes, got {}",
                xs.len()
            )));
        }
        if xs[0] < 0.0 || xs[xs.len() - 1] >= period {
            return Err(Error::InvalidInput(format!(
                "sample abscissae must lie in [0, {period})"
            )));
        }
        let pchip = PeriodicPchip::new(period, 0.0, xs, ys)?;
        Ok(Self::with_body(period, Body::Samples(pchip)))
    }

    /// Reads two-column `x,value` CSV with a header row.
    pub fn from_csv<R: Read>(reader: R, period: f64) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for (line, record) in rdr.records().enumerate() {
            let record = record.map_err(|e| Error::InvalidInput(e.to_string()))?;
            if record.len() != 2 {
                return Err(Error::InvalidInput(format!(
                    "row {} has {} columns, expected 2",
                    line + 2,
                    record.len()
                )));
            }
            let parse = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| Error::InvalidInput(format!("row {}: bad number '{s}'", line + 2)))
            };
            xs.push(parse(&record[0])?);
            ys.push(parse(&record[1])?);
        }
        Self::from_samples(xs, ys, period)
    }

    /// Wraps an arbitrary closure; `kinks` lists points where it may fail to be smooth.
    pub fn from_fn<F>(period: f64, kinks: Vec<f64>, f: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::with_body(period, Body::Custom(Arc::new(f), kinks))
    }

    pub fn from_step(step: StepFunction) -> Self {
        Self::with_body(step.domain(), Body::Step(step))
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn expression(&self) -> Option<&Expression> {
        match &*self.body {
            Body::Expr(e) => Some(e),
            _ => None,
        }
    }

    pub fn as_step(&self) -> Option<&StepFunction> {
        match &*self.body {
            Body::Step(s) => Some(s),
            _ => None,
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        let u = x.rem_euclid(self.period);
        self.eval_reduced(u)
    }

    /// Evaluates without reduction on the closed fundamental domain `[0, period]`, so that
    /// functions of an interval are read correctly at the right endpoint.
    pub fn eval_closed(&self, x: f64) -> f64 {
        if (0.0..=self.period).contains(&x) {
            match &*self.body {
                Body::Expr(e) => e.eval(x),
                _ => self.eval_reduced(x.min(self.period)),
            }
        } else {
            self.eval(x)
        }
    }

    fn eval_reduced(&self, u: f64) -> f64 {
        match &*self.body {
            Body::Expr(e) => e.eval(u),
            Body::Samples(p) => p.eval(u),
            Body::Pullback(f, phi) => f.eval(phi.eval(u)),
            Body::Step(s) => s.value(u),
            Body::Affine {
                inner,
                scale,
                offset,
            } => scale * inner.eval(u) + offset,
            Body::Combination(terms) => terms.iter().map(|(c, g)| c * g.eval(u)).sum(),
            Body::Custom(f, _) => f(u),
        }
    }

    /// Derivative of order 1..=3 where available (expressions exactly, samples up to order 2).
    pub fn derivative(&self, order: usize, x: f64) -> Option<f64> {
        if order == 0 {
            return Some(self.eval(x));
        }
        let u = x.rem_euclid(self.period);
        match &*self.body {
            Body::Expr(e) if order <= 3 => Some(e.eval_derivative(order, u)),
            Body::Samples(p) if order == 1 => Some(p.derivative(u)),
            Body::Samples(p) if order == 2 => Some(p.second_derivative(u)),
            Body::Affine { inner, scale, .. } => inner.derivative(order, u).map(|d| scale * d),
            Body::Combination(terms) => terms
                .iter()
                .map(|(c, g)| g.derivative(order, u).map(|d| c * d))
                .sum(),
            Body::Pullback(f, phi) if order == 1 => {
                f.derivative(1, phi.eval(u)).map(|d| d * phi.derivative(u))
            }
            _ => None,
        }
    }

    /// Points in `[0, period)` where the function may fail to be smooth.
    pub fn kinks(&self) -> Vec<f64> {
        let p = self.period;
        let mut out: Vec<f64> = match &*self.body {
            Body::Expr(_) => Vec::new(),
            Body::Samples(s) => s.nodes().to_vec(),
            Body::Pullback(f, phi) => {
                let mut k = phi.kinks();
                k.extend(f.kinks().into_iter().map(|y| phi.eval_inverse(y)));
                k
            }
            Body::Step(s) => s.edges().to_vec(),
            Body::Affine { inner, .. } => inner.kinks(),
            Body::Combination(terms) => terms.iter().flat_map(|(_, g)| g.kinks()).collect(),
            Body::Custom(_, k) => k.clone(),
        };
        for v in out.iter_mut() {
            *v = v.rem_euclid(p);
            if *v >= p {
                *v = 0.0;
            }
        }
        out.sort_by(|a, b| a.partial_cmp(b).unwrap());
        out.dedup_by(|a, b| (*a - *b).abs() < 1e-14 * p);
        out
    }

    /// `scale * f + offset`.
    pub fn affine(&self, scale: f64, offset: f64) -> Self {
        Self::with_body(
            self.period,
            Body::Affine {
                inner: self.clone(),
                scale,
                offset,
            },
        )
    }

    pub fn scaled(&self, scale: f64) -> Self {
        self.affine(scale, 0.0)
    }

    pub fn linear_combination(terms: &[(f64, CircleFunction)]) -> Result<Self> {
        let period = terms
            .first()
            .map(|(_, g)| g.period)
            .ok_or_else(|| Error::InvalidInput("empty combination".into()))?;
        for (_, g) in terms {
            same_period(period, g.period)?;
        }
        Ok(Self::with_body(period, Body::Combination(terms.to_vec())))
    }

    /// The pullback `f ∘ phi`.
    pub fn pullback(&self, phi: &CircleDiffeo) -> Result<Self> {
        same_period(self.period, phi.period())?;
        Ok(Self::with_body(
            self.period,
            Body::Pullback(self.clone(), phi.clone()),
        ))
    }

    /// Uniform samples `x_i = i * period / n`.
    pub fn sample(&self, n: usize) -> (Vec<f64>, Vec<f64>) {
        let xs: Vec<f64> = (0..n).map(|i| self.period * i as f64 / n as f64).collect();
        let ys = xs.iter().map(|&x| self.eval(x)).collect();
        (xs, ys)
    }

    /// `max |f|` on a uniform grid of `n` points.
    pub fn sup_norm(&self, n: usize) -> f64 {
        (0..n)
            .map(|i| self.eval(self.period * i as f64 / n as f64).abs())
            .fold(0.0, f64::max)
    }
}

pub(crate) fn same_period(a: f64, b: f64) -> Result<()> {
    if (a - b).abs() <= 1e-12 * a.abs().max(b.abs()) {
        Ok(())
    } else {
        Err(Error::PeriodMismatch { left: a, right: b })
    }
}

/// `∫_0^period f g dx`, with cuts at the kinks of both factors.
pub fn inner_product(f: &CircleFunction, g: &CircleFunction, rule: &QuadratureRule) -> Result<f64> {
    same_period(f.period, g.period)?;
    let mut kinks = f.kinks();
    kinks.extend(g.kinks());
    let v = rule.integrate_vec(1, 0.0, f.period, &kinks, |x, out| {
        out[0] = f.eval(x) * g.eval(x);
    });
    Ok(v[0])
}

/// `(⟨f, g_1⟩, …, ⟨f, g_n⟩)` computed in one pass over the quadrature nodes.
pub fn inner_products(
    f: &CircleFunction,
    basis: &[CircleFunction],
    rule: &QuadratureRule,
) -> Result<Vec<f64>> {
    let mut kinks = f.kinks();
    for g in basis {
        same_period(f.period, g.period)?;
        kinks.extend(g.kinks());
    }
    Ok(rule.integrate_vec(basis.len(), 0.0, f.period, &kinks, |x, out| {
        let fx = f.eval(x);
        for (o, g) in out.iter_mut().zip(basis) {
            *o = fx * g.eval(x);
        }
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{PI, TAU};

    #[test]
    fn parse_and_evaluate() {
        let f = CircleFunction::parse("sin(x)", TAU).unwrap();
        assert_eq!(f.eval(0.0), 0.0);
        assert!((f.eval(PI / 2.0) - 1.0).abs() < 1e-15);
        let g = CircleFunction::parse("cos(x)+2", TAU).unwrap();
        assert_eq!(g.eval(0.0), 3.0);
    }

    #[test]
    fn evaluation_is_periodic_by_reduction() {
        let f = CircleFunction::parse("x", TAU).unwrap();
        assert!((f.eval(1.0 + TAU) - 1.0).abs() < 1e-14);
        assert!((f.eval(1.0 - 3.0 * TAU) - 1.0).abs() < 1e-14);
        assert!((f.eval_closed(TAU) - TAU).abs() < 1e-15);
    }

    #[test]
    fn non_finite_expression_is_a_domain_error() {
        assert!(matches!(
            CircleFunction::parse("1/x", TAU),
            Err(Error::Domain { x }) if x == 0.0
        ));
    }

    #[test]
    fn inner_product_examples() {
        let rule = QuadratureRule::default();
        let s = CircleFunction::parse("sin(x)", TAU).unwrap();
        let c = CircleFunction::parse("cos(x)", TAU).unwrap();
        let one = CircleFunction::parse("1", TAU).unwrap();
        assert!(inner_product(&s, &c, &rule).unwrap().abs() < 1e-14);
        assert!((inner_product(&one, &one, &rule).unwrap() - TAU).abs() < 1e-13);
        assert!((inner_product(&s, &s, &rule).unwrap() - PI).abs() < 1e-13);
        let other = CircleFunction::parse("1", PI).unwrap();
        assert!(matches!(
            inner_product(&s, &other, &rule),
            Err(Error::PeriodMismatch { .. })
        ));
    }

    #[test]
    fn inner_product_is_symmetric() {
        let rule = QuadratureRule::default();
        let f = CircleFunction::parse("exp(sin(x))", TAU).unwrap();
        let g = CircleFunction::parse("cos(3*x) + x^2/10", TAU).unwrap();
        let a = inner_product(&f, &g, &rule).unwrap();
        let b = inner_product(&g, &f, &rule).unwrap();
        assert!((a - b).abs() < 1e-14);
    }

    #[test]
    fn samples_need_sixteen_nodes() {
        let xs: Vec<f64> = (0..8).map(|i| i as f64).collect();
        assert!(CircleFunction::from_samples(xs.clone(), xs, 8.0).is_err());
    }

    #[test]
    fn csv_round_trip_of_sampled_sine() {
        let mut text = String::from("x,value\n");
        for i in 0..64 {
            let x = TAU * i as f64 / 64.0;
            text.push_str(&format!("{x},{}\n", x.sin()));
        }
        let f = CircleFunction::from_csv(text.as_bytes(), TAU).unwrap();
        assert!((f.eval(1.0) - 1f64.sin()).abs() < 2e-4);
        // monotone interpolation: never overshoots the sample range
        assert!(f.sup_norm(10_000) <= 1.0 + 1e-12);
        let bad = "x,value\n0,1\n0,2\n";
        assert!(CircleFunction::from_csv(bad.as_bytes(), TAU).is_err());
    }

    #[test]
    fn symbolic_derivatives_match_finite_differences() {
        use rand::{Rng, SeedableRng};
        let f = CircleFunction::parse("exp(sin(x))*cos(2*x) + tan(x/4)^2", TAU).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let h = 1e-5;
        for _ in 0..64 {
            let x: f64 = rng.random_range(0.1..6.0);
            for order in 1..=3 {
                let exact = f.derivative(order, x).unwrap();
                let lower = |y: f64| f.derivative(order - 1, y).unwrap();
                let fd = (lower(x + h) - lower(x - h)) / (2.0 * h);
                let rel = (exact - fd).abs() / exact.abs().max(1.0);
                assert!(rel < 1e-6, "order {order} at {x}: {exact} vs {fd}");
            }
        }
    }
}
