//! Composite Gauss–Legendre quadrature with adaptive panel doubling.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    panels: usize,
    points: usize,
    tol: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Default for QuadratureRule {
    fn default() -> Self {
        QuadratureRule::new(64, 8, 1e-10).expect("default rule is valid")
    }
}

const MAX_DOUBLINGS: usize = 10;

impl QuadratureRule {
    /// `panels` per integration range (at least 8), `points` per panel (4 to 16), and the
    /// absolute tolerance on successive doublings.
    pub fn new(panels: usize, points: usize, tol: f64) -> Result<Self> {
        if panels < 8 {
            return Err(Error::InvalidInput(format!("need at least 8 panels, got {panels}")));
        }
        if !(4..=16).contains(&points) {
            return Err(Error::InvalidInput(format!(
                "points per panel must be in 4..=16, got {points}"
            )));
        }
        if !(tol > 0.0) {
            return Err(Error::InvalidInput("tolerance must be positive".into()));
        }
        let (nodes, weights) = gauss_legendre(points);
        Ok(QuadratureRule {
            panels,
            points,
            tol,
            nodes,
            weights,
        })
    }

    pub fn panels(&self) -> usize {
        self.panels
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    /// Twice the panels and a tenth of the tolerance; used for independent re-verification.
    pub fn refined(&self) -> Self {
        QuadratureRule::new(self.panels * 2, self.points, self.tol * 0.1)
            .expect("refinement of a valid rule is valid")
    }

    /// Reference Gauss–Legendre nodes and weights on `[-1, 1]`.
    pub fn reference(&self) -> (&[f64], &[f64]) {
        (&self.nodes, &self.weights)
    }

    /// Integral over `[a, b]` with exactly `panels` equal panels, accumulated into `acc`.
    pub fn fixed<F>(&self, a: f64, b: f64, panels: usize, acc: &mut [f64], f: &mut F)
    where
        F: FnMut(f64, &mut [f64]),
    {
        let mut buf = vec![0.0; acc.len()];
        let width = (b - a) / panels as f64;
        for p in 0..panels {
            let lo = a + p as f64 * width;
            let mid = lo + 0.5 * width;
            let half = 0.5 * width;
            for (t, w) in self.nodes.iter().zip(&self.weights) {
                f(mid + half * t, &mut buf);
                for (s, v) in acc.iter_mut().zip(&buf) {
                    *s += w * half * v;
                }
            }
        }
    }

    pub fn integrate<F>(&self, a: f64, b: f64, mut f: F) -> f64
    where
        F: FnMut(f64) -> f64,
    {
        self.integrate_vec(1, a, b, &[], |x, out| out[0] = f(x))[0]
    }

    /// Integrates a vector-valued integrand over `[a, b]`, splitting at `kinks` (points
    /// where the integrand may lose smoothness). Each piece is refined independently.
    pub fn integrate_vec<F>(&self, dim: usize, a: f64, b: f64, kinks: &[f64], mut f: F) -> Vec<f64>
    where
        F: FnMut(f64, &mut [f64]),
    {
        let mut total = vec![0.0; dim];
        if b <= a {
            return total;
        }
        let length = b - a;
        let cuts = split_points(a, b, kinks);
        for w in cuts.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let frac = (hi - lo) / length;
            let mut n = ((self.panels as f64 * frac).ceil() as usize).max(2);
            let mut prev = vec![0.0; dim];
            self.fixed(lo, hi, n, &mut prev, &mut f);
            let tol = self.tol * frac;
            for _ in 0..MAX_DOUBLINGS {
                n *= 2;
                let mut next = vec![0.0; dim];
                self.fixed(lo, hi, n, &mut next, &mut f);
                let diff = prev
                    .iter()
                    .zip(&next)
                    .map(|(p, q)| (p - q).abs())
                    .fold(0.0, f64::max);
                prev = next;
                if diff <= tol {
                    break;
                }
            }
            for (t, v) in total.iter_mut().zip(&prev) {
                *t += v;
            }
        }
        total
    }
}

/// Sorted, deduplicated cut points `a = c_0 < ... < c_m = b`.
pub(crate) fn split_points(a: f64, b: f64, kinks: &[f64]) -> Vec<f64> {
    let gap = 1e-13 * (b - a).max(1.0);
    let mut inner: Vec<f64> = kinks
        .iter()
        .copied()
        .filter(|&k| k.is_finite() && k > a + gap && k < b - gap)
        .collect();
    inner.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let mut cuts = Vec::with_capacity(inner.len() + 2);
    cuts.push(a);
    for k in inner {
        if k - *cuts.last().unwrap() > gap {
            cuts.push(k);
        }
    }
    if b - *cuts.last().unwrap() <= gap && cuts.len() > 1 {
        cuts.pop();
    }
    cuts.push(b);
    cuts
}

/// Gauss–Legendre nodes and weights on `[-1, 1]` by Newton iteration on `P_n`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}
