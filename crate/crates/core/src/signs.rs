//! Sign changes of periodic functions and alternation points.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::function::CircleFunction;

const INITIAL_GRID: usize = 1024;
const MIN_GRID: usize = 4096;
const MAX_GRID: usize = 1 << 16;
const ABSCISSA_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SignChangeReport {
    pub count: usize,
    /// Increasing crossing locations in `[0, period)`.
    pub locations: Vec<f64>,
    /// Sign of the function just after each location (alternates).
    pub signs_after: Vec<i8>,
    pub tolerance: f64,
    pub period: f64,
}

impl SignChangeReport {
    /// Sign runs as `(start, end)` pairs in lifted coordinates, `end` possibly beyond the
    /// period; run `i` starts at `locations[i]` and carries sign `signs_after[i]`.
    pub fn runs(&self) -> Vec<(f64, f64, i8)> {
        let m = self.locations.len();
        (0..m)
            .map(|i| {
                let start = self.locations[i];
                let end = if i + 1 < m {
                    self.locations[i + 1]
                } else {
                    self.locations[0] + self.period
                };
                (start, end, self.signs_after[i])
            })
            .collect()
    }
}

fn sign_of(v: f64, tol: f64) -> i8 {
    if v > tol {
        1
    } else if v < -tol {
        -1
    } else {
        0
    }
}

/// Bisection for a sign change of `f` between `a` (sign `sa`) and `b`.
fn bisect_crossing(f: &CircleFunction, mut a: f64, mut b: f64, sa: f64) -> f64 {
    while b - a > ABSCISSA_TOL {
        let m = 0.5 * (a + b);
        let v = f.eval(m);
        if v == 0.0 {
            return m;
        }
        if v.signum() == sa {
            a = m;
        } else {
            b = m;
        }
    }
    0.5 * (a + b)
}

fn scan(f: &CircleFunction, tol: f64, n: usize) -> Option<(Vec<f64>, Vec<i8>)> {
    let period = f.period();
    let h = period / n as f64;
    let samples: Vec<(f64, i8)> = (0..n)
        .map(|i| {
            let x = i as f64 * h;
            (x, sign_of(f.eval(x), tol))
        })
        .filter(|(_, s)| *s != 0)
        .collect();
    if samples.is_empty() {
        return None;
    }
    let m = samples.len();
    let mut locations = Vec::new();
    let mut signs = Vec::new();
    for i in 0..m {
        let (xa, sa) = samples[i];
        let (mut xb, sb) = samples[(i + 1) % m];
        if i + 1 == m {
            xb += period;
        }
        if sa != sb {
            // last sample of one run and first of the next; the crossing lies between
            let mut loc = bisect_crossing(f, xa, xb, sa as f64).rem_euclid(period);
            if period - loc < ABSCISSA_TOL {
                loc = 0.0;
            }
            locations.push(loc);
            signs.push(sb);
        }
    }
    let mut pairs: Vec<(f64, i8)> = locations.into_iter().zip(signs).collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    Some(pairs.into_iter().unzip())
}

/// Counts sign changes over one period. Values with `|f| <= tol` are neutral and do not
/// break a sign run. The grid doubles from 1024 nodes until two consecutive counts agree.
pub fn count_sign_changes(f: &CircleFunction, tol: f64) -> Result<SignChangeReport> {
    if !(tol >= 0.0) {
        return Err(Error::InvalidInput(format!("tolerance must be >= 0, got {tol}")));
    }
    let mut n = INITIAL_GRID;
    let mut current = scan(f, tol, n).ok_or(Error::AllNeutral)?;
    while n < MAX_GRID {
        n *= 2;
        let next = scan(f, tol, n).ok_or(Error::AllNeutral)?;
        let stable = next.0.len() == current.0.len();
        current = next;
        if stable && n >= MIN_GRID {
            break;
        }
    }
    let (locations, signs_after) = current;
    Ok(SignChangeReport {
        count: locations.len(),
        locations,
        signs_after,
        tolerance: tol,
        period: f.period(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlternationPoints {
    pub c: f64,
    /// Increasing points in `[0, period)`.
    pub points: Vec<f64>,
    /// `f(points[j]) = signs[j] * c`; consecutive signs alternate, cyclically as well.
    pub signs: Vec<i8>,
}

/// Maximum of `|f|` on a run and a point attaining it.
fn run_peak(f: &CircleFunction, start: f64, end: f64) -> (f64, f64) {
    let n = 512;
    let h = (end - start) / n as f64;
    let (mut best_x, mut best) = (start, 0.0);
    for i in 1..n {
        let x = start + i as f64 * h;
        let v = f.eval(x).abs();
        if v > best {
            best = v;
            best_x = x;
        }
    }
    // golden-section refinement on the bracketing cell
    let (mut a, mut b) = ((best_x - h).max(start), (best_x + h).min(end));
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    for _ in 0..80 {
        if f.eval(c).abs() > f.eval(d).abs() {
            b = d;
        } else {
            a = c;
        }
        c = b - g * (b - a);
        d = a + g * (b - a);
    }
    let x = 0.5 * (a + b);
    let v = f.eval(x).abs();
    if v >= best {
        (x, v)
    } else {
        (best_x, best)
    }
}

/// Finds `m` points with alternating values `±c` on `m` consecutive sign runs of `f`.
///
/// Without a hint, `c` is half the smallest run peak among the chosen runs. The window
/// of runs is the one whose smallest peak is largest.
pub fn find_alternation_points(
    f: &CircleFunction,
    m: usize,
    c_hint: Option<f64>,
) -> Result<AlternationPoints> {
    if m == 0 || m % 2 == 1 {
        return Err(Error::InvalidInput(format!(
            "alternation count must be even and positive, got {m}"
        )));
    }
    let report = match count_sign_changes(f, 0.0) {
        Ok(r) => r,
        Err(Error::AllNeutral) => {
            return Err(Error::InsufficientSignChanges { found: 0, needed: m })
        }
        Err(e) => return Err(e),
    };
    if report.count < m {
        return Err(Error::InsufficientSignChanges {
            found: report.count,
            needed: m,
        });
    }
    let runs = report.runs();
    let peaks: Vec<(f64, f64)> = runs.iter().map(|&(a, b, _)| run_peak(f, a, b)).collect();
    let r = runs.len();
    let window_min = |s: usize| (0..m).map(|j| peaks[(s + j) % r].1).fold(f64::INFINITY, f64::min);
    let start = (0..r)
        .max_by(|&a, &b| window_min(a).partial_cmp(&window_min(b)).unwrap().then(b.cmp(&a)))
        .unwrap_or(0);
    let min_peak = window_min(start);
    let c = match c_hint {
        Some(c) => {
            if !(c > 0.0) || c > min_peak * (1.0 + 1e-12) {
                return Err(Error::InvalidInput(format!(
                    "level {c} is not attained on every chosen run (smallest peak {min_peak})"
                )));
            }
            c
        }
        None => (0.5 * min_peak).min(0.9 * min_peak),
    };
    let period = f.period();
    let mut found = Vec::with_capacity(m);
    for j in 0..m {
        let idx = (start + j) % r;
        let (a, _, sign) = runs[idx];
        let (peak_x, peak) = peaks[idx];
        let x = if peak - c <= 1e-12 * peak.max(1.0) {
            peak_x
        } else {
            // |f| - c goes from negative at the run start to positive at the peak
            let (mut lo, mut hi) = (a, peak_x);
            while hi - lo > ABSCISSA_TOL {
                let mid = 0.5 * (lo + hi);
                if f.eval(mid).abs() < c {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        };
        found.push((x.rem_euclid(period), sign));
    }
    found.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let (points, signs): (Vec<f64>, Vec<i8>) = found.into_iter().unzip();
    Ok(AlternationPoints { c, points, signs })
}
