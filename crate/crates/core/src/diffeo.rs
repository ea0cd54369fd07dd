//! Orientation-preserving circle diffeomorphisms stored as monotone breakpoint splines.
//!
//! A map is represented by its lift `phi: R -> R` with `phi(x + P) = phi(x) + P`.
//! Compositions and inverses are kept symbolic so that round trips are exact up to the
//! root-finding tolerance of the spline inverse.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::function::{same_period, CircleFunction};
use crate::pchip::PeriodicPchip;
use crate::stepspace::StepFunction;

#[derive(Debug)]
enum Repr {
    Rotation(f64),
    Spline(PeriodicPchip),
    Inverse(CircleDiffeo),
    Compose(CircleDiffeo, CircleDiffeo),
}

#[derive(Debug, Clone)]
pub struct CircleDiffeo {
    period: f64,
    repr: Arc<Repr>,
}

/// JSON header accompanying the sampled CSV form of a diffeomorphism.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffeoHeader {
    pub period: f64,
    pub breakpoints: Vec<f64>,
    pub images: Vec<f64>,
}

impl CircleDiffeo {
    /// Monotone spline through `(breakpoints[j], images[j])`. Breakpoints increase in
    /// `[0, period)`; images increase and stay below `images[0] + period`.
    pub fn from_breakpoints(period: f64, breakpoints: Vec<f64>, images: Vec<f64>) -> Result<Self> {
        if breakpoints.first().is_some_and(|&b| b < 0.0)
            || breakpoints.last().is_some_and(|&b| b >= period)
        {
            return Err(Error::InvalidInput(format!(
                "breakpoints must lie in [0, {period})"
            )));
        }
        if images.windows(2).any(|w| w[1] <= w[0])
            || images.last().zip(images.first()).is_some_and(|(l, f)| *l >= f + period)
        {
            return Err(Error::InvalidInput(
                "breakpoint images must increase strictly within one period".into(),
            ));
        }
        let spline = PeriodicPchip::new(period, period, breakpoints, images)?;
        Ok(CircleDiffeo {
            period,
            repr: Arc::new(Repr::Spline(spline)),
        })
    }

    pub fn identity(period: f64) -> Self {
        Self::rotation(period, 0.0)
    }

    pub fn rotation(period: f64, angle: f64) -> Self {
        CircleDiffeo {
            period,
            repr: Arc::new(Repr::Rotation(angle)),
        }
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn eval(&self, x: f64) -> f64 {
        match &*self.repr {
            Repr::Rotation(a) => x + a,
            Repr::Spline(s) => s.eval(x),
            Repr::Inverse(inner) => inner.eval_inverse(x),
            Repr::Compose(outer, inner) => outer.eval(inner.eval(x)),
        }
    }

    pub fn eval_inverse(&self, y: f64) -> f64 {
        match &*self.repr {
            Repr::Rotation(a) => y - a,
            Repr::Spline(s) => s.inverse(y),
            Repr::Inverse(inner) => inner.eval(y),
            Repr::Compose(outer, inner) => inner.eval_inverse(outer.eval_inverse(y)),
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match &*self.repr {
            Repr::Rotation(_) => 1.0,
            Repr::Spline(s) => s.derivative(x),
            Repr::Inverse(inner) => 1.0 / inner.derivative(inner.eval_inverse(x)),
            Repr::Compose(outer, inner) => outer.derivative(inner.eval(x)) * inner.derivative(x),
        }
    }

    /// Points in `[0, period)` where the lift may fail to be smooth.
    pub fn kinks(&self) -> Vec<f64> {
        let mut out = match &*self.repr {
            Repr::Rotation(_) => Vec::new(),
            Repr::Spline(s) => s.nodes().to_vec(),
            Repr::Inverse(inner) => inner.kinks().iter().map(|&k| inner.eval(k)).collect(),
            Repr::Compose(outer, inner) => {
                let mut k = inner.kinks();
                k.extend(outer.kinks().iter().map(|&y| inner.eval_inverse(y)));
                k
            }
        };
        let p = self.period;
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

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &CircleDiffeo) -> Result<Self> {
        same_period(self.period, inner.period)?;
        Ok(CircleDiffeo {
            period: self.period,
            repr: Arc::new(Repr::Compose(self.clone(), inner.clone())),
        })
    }

    pub fn invert(&self) -> Self {
        if let Repr::Inverse(inner) = &*self.repr {
            return inner.clone();
        }
        CircleDiffeo {
            period: self.period,
            repr: Arc::new(Repr::Inverse(self.clone())),
        }
    }

    /// Smallest derivative on a uniform grid of `n` points.
    pub fn min_slope(&self, n: usize) -> f64 {
        (0..n)
            .map(|i| self.derivative(self.period * i as f64 / n as f64))
            .fold(f64::INFINITY, f64::min)
    }

    /// `sup |self(x) - other(x)|` on a uniform grid of `n` points.
    pub fn sup_distance(&self, other: &CircleDiffeo, n: usize) -> f64 {
        (0..n)
            .map(|i| {
                let x = self.period * i as f64 / n as f64;
                (self.eval(x) - other.eval(x)).abs()
            })
            .fold(0.0, f64::max)
    }

    pub fn header(&self) -> DiffeoHeader {
        let (breakpoints, images) = match &*self.repr {
            Repr::Rotation(a) => (vec![0.0], vec![*a]),
            Repr::Spline(s) => (s.nodes().to_vec(), s.values().to_vec()),
            _ => {
                let k = self.kinks();
                let img = k.iter().map(|&x| self.eval(x)).collect();
                (k, img)
            }
        };
        DiffeoHeader {
            period: self.period,
            breakpoints,
            images,
        }
    }

    /// `x,phi(x)` samples on a uniform grid of `n` points.
    pub fn to_csv(&self, n: usize) -> String {
        let mut out = String::from("x,phi(x)\n");
        for i in 0..n {
            let x = self.period * i as f64 / n as f64;
            out.push_str(&format!("{},{}\n", fmt17(x), fmt17(self.eval(x))));
        }
        out
    }
}

/// Seventeen significant digits, stable across runs.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

/// The finite-dimensional family `alpha ↦ psi_alpha` that fixes 0 and moves each base
/// breakpoint `x_i` to `x_i + alpha_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct AlphaFamily {
    period: f64,
    breakpoints: Vec<f64>,
    radius: f64,
}

impl AlphaFamily {
    /// Interior breakpoints in `(0, period)`; the trust radius defaults to a quarter of the
    /// smallest gap among `0, x_1, …, x_n, period`.
    pub fn new(period: f64, breakpoints: Vec<f64>) -> Result<Self> {
        let mut all = vec![0.0];
        all.extend(&breakpoints);
        all.push(period);
        let min_gap = all.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
        if !(min_gap > 0.0) {
            return Err(Error::InvalidInput(
                "family breakpoints must increase strictly inside (0, period)".into(),
            ));
        }
        Ok(AlphaFamily {
            period,
            breakpoints,
            radius: 0.25 * min_gap,
        })
    }

    pub fn with_radius(mut self, radius: f64) -> Self {
        self.radius = radius;
        self
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn dimension(&self) -> usize {
        self.breakpoints.len()
    }
}

pub fn psi_alpha(family: &AlphaFamily, alpha: &[f64]) -> Result<CircleDiffeo> {
    if alpha.len() != family.dimension() {
        return Err(Error::InvalidInput(format!(
            "expected {} shifts, got {}",
            family.dimension(),
            alpha.len()
        )));
    }
    for &a in alpha {
        if !(a.abs() < family.radius) {
            return Err(Error::TrustRegionExceeded {
                value: a,
                radius: family.radius,
            });
        }
    }
    let mut nodes = vec![0.0];
    let mut images = vec![0.0];
    for (x, a) in family.breakpoints.iter().zip(alpha) {
        nodes.push(*x);
        images.push(x + a);
    }
    CircleDiffeo::from_breakpoints(family.period, nodes, images)
}

/// Parameters of the stretch construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StretchOptions {
    /// Bound on the measure of the set where the pullback differs from the step.
    pub eps: f64,
    /// Neighborhoods of the alternation points keep `|f - (±1)| < level`.
    pub level: f64,
}

impl StretchOptions {
    pub fn new(eps: f64) -> Self {
        StretchOptions { eps, level: 0.1 }
    }

    /// Level tied to `eps` (`10 eps`, clamped to `[1e-3, 0.1]`), so that finer stretches
    /// also bring the pullback closer to the step values.
    pub fn scaled(eps: f64) -> Self {
        StretchOptions {
            eps,
            level: (10.0 * eps).clamp(1e-3, 0.1),
        }
    }
}

/// Left and right extents of the neighborhood of `p` on which `|f - target| < level`,
/// each at most `cap`.
fn stable_radii(f: &CircleFunction, p: f64, target: f64, level: f64, cap: f64) -> (f64, f64) {
    let ok = |y: f64| (f.eval(y) - target).abs() < level;
    let side = |dir: f64| {
        let steps = 4096;
        let h = cap / steps as f64;
        let mut good = 0.0;
        for i in 1..=steps {
            let r = i as f64 * h;
            if !ok(p + dir * r) {
                let (mut lo, mut hi) = (good, r);
                while hi - lo > 1e-13 * (1.0 + cap) {
                    let mid = 0.5 * (lo + hi);
                    if ok(p + dir * mid) {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                return lo;
            }
            good = r;
        }
        cap
    };
    (side(-1.0), side(1.0))
}

const STRETCH_SUBDIVISIONS: usize = 8;

/// Builds `phi` whose pullback `f ∘ phi` is close in measure to the step `h`.
///
/// Each interval of `h`, shrunk by the margin `eps / (4(n+1))` at both ends, maps into a
/// neighborhood of the matching alternation point on which `f` stays within `level` of the
/// step value; the margins map monotonically onto the gaps between neighborhoods.
pub fn build_stretch_to_step(
    f: &CircleFunction,
    points: &[f64],
    h: &StepFunction,
    opts: StretchOptions,
) -> Result<CircleDiffeo> {
    let period = f.period();
    same_period(period, h.domain())?;
    let m = points.len();
    if h.signs().len() != m {
        return Err(Error::InvalidInput(format!(
            "step has {} intervals but {m} alternation points were given",
            h.signs().len()
        )));
    }
    if m < 2 {
        return Err(Error::InsufficientSignChanges { found: m, needed: 2 });
    }
    if !(opts.eps > 0.0 && opts.level > 0.0) {
        return Err(Error::InvalidInput("eps and level must be positive".into()));
    }
    if points.windows(2).any(|w| w[1] <= w[0]) || points[0] < 0.0 || points[m - 1] >= period {
        return Err(Error::InvalidInput(
            "alternation points must increase strictly within [0, period)".into(),
        ));
    }
    let margin = opts.eps / (4.0 * m as f64);
    let edges = h.edges();
    for k in 0..m {
        if edges[k + 1] - edges[k] <= 4.0 * margin {
            return Err(Error::InvalidInput(format!(
                "step interval {k} is too short for eps = {}",
                opts.eps
            )));
        }
    }
    let mut nodes = Vec::with_capacity((STRETCH_SUBDIVISIONS + 1) * m);
    let mut images = Vec::with_capacity((STRETCH_SUBDIVISIONS + 1) * m);
    for k in 0..m {
        let target = h.signs()[k] as f64;
        let p = points[k];
        if (f.eval(p) - target).abs() >= opts.level {
            return Err(Error::NoStableNeighborhood {
                point: p,
                target,
                level: opts.level,
            });
        }
        let prev = if k == 0 { points[m - 1] - period } else { points[k - 1] };
        let next = if k + 1 == m { points[0] + period } else { points[k + 1] };
        let cap = 0.49 * (p - prev).min(next - p);
        let (left, right) = stable_radii(f, p, target, opts.level, cap);
        if left.min(right) < 1e-9 {
            return Err(Error::NoStableNeighborhood {
                point: p,
                target,
                level: opts.level,
            });
        }
        // evenly spaced interior nodes keep the spline close to affine on each interval
        let (a, b) = (edges[k] + margin, edges[k + 1] - margin);
        for j in 0..=STRETCH_SUBDIVISIONS {
            let t = j as f64 / STRETCH_SUBDIVISIONS as f64;
            nodes.push(a + t * (b - a));
            images.push(p - left + t * (left + right));
        }
    }
    CircleDiffeo::from_breakpoints(period, nodes, images)
}

/// Measure of `{x : |f(phi(x)) - h(x)| > threshold}` by midpoint sampling.
pub fn discrepancy_measure(
    f: &CircleFunction,
    phi: &CircleDiffeo,
    h: &StepFunction,
    threshold: f64,
    samples: usize,
) -> f64 {
    let period = f.period();
    let dx = period / samples as f64;
    let bad = (0..samples)
        .filter(|&i| {
            let x = (i as f64 + 0.5) * dx;
            (f.eval(phi.eval(x)) - h.value(x)).abs() > threshold
        })
        .count();
    bad as f64 * dx
}
