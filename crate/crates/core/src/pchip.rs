//! Periodic monotone piecewise-cubic Hermite interpolation.
//!
//! Nodes `x_0 < ... < x_{m-1}` lie in one period `[x_0, x_0 + P)`. Values extend by
//! `y(x + P) = y(x) + shift`: `shift = 0` gives a periodic function, `shift = P` the lift
//! of a circle map.

use crate::error::{Error, Result};

/// Upper bound on `d / secant` at every node. Strictly below 3 keeps the slope of each
/// cubic piece strictly positive whenever its secant is positive.
const SLOPE_CAP: f64 = 2.5;

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicPchip {
    period: f64,
    shift: f64,
    xs: Vec<f64>,
    ys: Vec<f64>,
    ds: Vec<f64>,
}

impl PeriodicPchip {
    pub fn new(period: f64, shift: f64, xs: Vec<f64>, ys: Vec<f64>) -> Result<Self> {
        if !(period > 0.0 && period.is_finite()) {
            return Err(Error::InvalidInput(format!("period must be positive, got {period}")));
        }
        if xs.is_empty() || xs.len() != ys.len() {
            return Err(Error::InvalidInput(
                "interpolation needs matching, non-empty node and value arrays".into(),
            ));
        }
        if xs.windows(2).any(|w| w[1] <= w[0]) || xs[xs.len() - 1] >= xs[0] + period {
            return Err(Error::InvalidInput(
                "interpolation nodes must increase strictly within one period".into(),
            ));
        }
        if ys.iter().chain(xs.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite interpolation data".into()));
        }
        let m = xs.len();
        let h: Vec<f64> = (0..m).map(|j| next_x(&xs, period, j) - xs[j]).collect();
        let secant: Vec<f64> = (0..m)
            .map(|j| (next_y(&ys, shift, j) - ys[j]) / h[j])
            .collect();
        let ds = (0..m)
            .map(|j| {
                let jp = (j + m - 1) % m;
                let (s0, s1) = (secant[jp], secant[j]);
                if s0 * s1 <= 0.0 {
                    return 0.0;
                }
                let (h0, h1) = (h[jp], h[j]);
                let w1 = 2.0 * h1 + h0;
                let w2 = h1 + 2.0 * h0;
                let d = (w1 + w2) / (w1 / s0 + w2 / s1);
                let cap = SLOPE_CAP * s0.abs().min(s1.abs());
                d.signum() * d.abs().min(cap)
            })
            .collect();
        Ok(PeriodicPchip {
            period,
            shift,
            xs,
            ys,
            ds,
        })
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn nodes(&self) -> &[f64] {
        &self.xs
    }

    pub fn values(&self) -> &[f64] {
        &self.ys
    }

    /// Splits `x` into a period count and the interval index and local data.
    fn locate(&self, x: f64) -> (f64, usize, f64) {
        let x0 = self.xs[0];
        let k = ((x - x0) / self.period).floor();
        let mut u = x - k * self.period;
        if u >= x0 + self.period {
            u -= self.period;
        }
        let j = match self.xs.binary_search_by(|v| v.partial_cmp(&u).unwrap()) {
            Ok(j) => j,
            Err(j) => j.saturating_sub(1),
        };
        (k, j, u)
    }

    fn piece(&self, j: usize) -> (f64, f64, f64, f64, f64, f64) {
        let m = self.xs.len();
        let x1 = next_x(&self.xs, self.period, j);
        let y1 = next_y(&self.ys, self.shift, j);
        let d1 = self.ds[(j + 1) % m];
        (self.xs[j], x1, self.ys[j], y1, self.ds[j], d1)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.eval_with(x, 0)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        self.eval_with(x, 1)
    }

    pub fn second_derivative(&self, x: f64) -> f64 {
        self.eval_with(x, 2)
    }

    fn eval_with(&self, x: f64, order: usize) -> f64 {
        let (k, j, u) = self.locate(x);
        let (xa, xb, ya, yb, da, db) = self.piece(j);
        let h = xb - xa;
        let t = (u - xa) / h;
        match order {
            0 => {
                let t2 = t * t;
                let t3 = t2 * t;
                let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
                let h10 = t3 - 2.0 * t2 + t;
                let h01 = -2.0 * t3 + 3.0 * t2;
                let h11 = t3 - t2;
                h00 * ya + h10 * h * da + h01 * yb + h11 * h * db + k * self.shift
            }
            1 => {
                let t2 = t * t;
                let g00 = 6.0 * t2 - 6.0 * t;
                let g10 = 3.0 * t2 - 4.0 * t + 1.0;
                let g01 = -6.0 * t2 + 6.0 * t;
                let g11 = 3.0 * t2 - 2.0 * t;
                (g00 * ya + g01 * yb) / h + g10 * da + g11 * db
            }
            _ => {
                let g00 = 12.0 * t - 6.0;
                let g10 = 6.0 * t - 4.0;
                let g01 = -12.0 * t + 6.0;
                let g11 = 6.0 * t - 2.0;
                (g00 * ya + g01 * yb) / (h * h) + (g10 * da + g11 * db) / h
            }
        }
    }

    /// Inverse of an increasing lift (`shift == period`, all secants positive).
    pub fn inverse(&self, y: f64) -> f64 {
        let y0 = self.ys[0];
        let k = ((y - y0) / self.shift).floor();
        let mut v = y - k * self.shift;
        if v >= y0 + self.shift {
            v -= self.shift;
        }
        let j = match self.ys.binary_search_by(|w| w.partial_cmp(&v).unwrap()) {
            Ok(j) => j,
            Err(j) => j.saturating_sub(1),
        };
        let (xa, xb, ya, yb, _, _) = self.piece(j);
        // Safeguarded Newton on the local cubic.
        let (mut lo, mut hi) = (xa, xb);
        let mut x = xa + (v - ya) / (yb - ya) * (xb - xa);
        let tol = 4.0 * f64::EPSILON * (1.0 + xb.abs());
        for _ in 0..100 {
            let f = self.eval(x) - v;
            if f == 0.0 {
                break;
            }
            if f > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            if hi - lo <= tol {
                break;
            }
            let d = self.derivative(x);
            let step = x - f / d;
            if d > 0.0 && (step - x).abs() <= tol {
                x = step.clamp(lo, hi);
                break;
            }
            x = if d > 0.0 && step > lo && step < hi {
                step
            } else {
                0.5 * (lo + hi)
            };
        }
        x + k * self.period
    }
}

fn next_x(xs: &[f64], period: f64, j: usize) -> f64 {
    if j + 1 < xs.len() {
        xs[j + 1]
    } else {
        xs[0] + period
    }
}

fn next_y(ys: &[f64], shift: f64, j: usize) -> f64 {
    if j + 1 < ys.len() {
        ys[j + 1]
    } else {
        ys[0] + shift
    }
}
