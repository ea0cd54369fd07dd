//! Integration of the frame equation `F' = F A(x)` and the resulting plane curves.

use std::f64::consts::PI;
use std::fmt::Write as _;

use nalgebra::Matrix2;

use super::sl2::{generator, sl2_exp, Sl2};
use crate::diffeo::fmt17;
use crate::error::{Error, Result};
use crate::function::CircleFunction;
use crate::quadrature::split_points;

/// Smallest grid accepted by [`integrate_frame`].
pub const MIN_GRID: usize = 256;

/// Frames on a grid over `[0, π]`. The grid is uniform inside each segment between
/// consecutive kinks of the potential; segment boundaries appear once per segment.
#[derive(Debug, Clone)]
pub struct FramePath {
    pub xs: Vec<f64>,
    pub frames: Vec<Sl2>,
    /// Index ranges `start..=end` of each segment.
    pub segments: Vec<(usize, usize)>,
}

impl FramePath {
    /// `F(0)⁻¹ F(π)`.
    pub fn monodromy(&self) -> Sl2 {
        self.frames[0].inverse().mul(self.frames.last().expect("non-empty path"))
    }

    /// `γ` and `γ'` are the first and second columns of the frame.
    pub fn curve(&self) -> PlaneCurve {
        let position = self.frames.iter().map(|f| [f.a(), f.c()]).collect();
        let velocity = self.frames.iter().map(|f| [f.b(), f.d()]).collect();
        PlaneCurve {
            xs: self.xs.clone(),
            position,
            velocity,
            segments: self.segments.clone(),
        }
    }
}

/// Controls the step layout of [`integrate_frame_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameOptions {
    /// Steps over `[0, π]` before kink alignment.
    pub grid: usize,
    /// Lower bound on the steps in each segment.
    pub min_steps: usize,
}

impl FrameOptions {
    pub fn new(grid: usize) -> Self {
        FrameOptions { grid, min_steps: 8 }
    }
}

/// Fourth-order Magnus integration of `F' = F A` with `A = [[0, -k], [1, 0]]`, so that
/// the first column `γ` solves `γ'' = -k γ`. Determinants are renormalized after each step.
pub fn integrate_frame(k: &CircleFunction, f0: Sl2, grid: usize) -> Result<FramePath> {
    integrate_frame_with(k, f0, FrameOptions::new(grid))
}

pub fn integrate_frame_with(k: &CircleFunction, f0: Sl2, opts: FrameOptions) -> Result<FramePath> {
    if opts.grid < MIN_GRID {
        return Err(Error::InvalidInput(format!(
            "frame grid must have at least {MIN_GRID} steps, got {}",
            opts.grid
        )));
    }
    crate::function::same_period(k.period(), PI)?;
    let cuts = split_points(0.0, PI, &k.kinks());
    let c = 3f64.sqrt() / 6.0;
    let mut xs = vec![0.0];
    let mut frames = vec![f0];
    let mut segments = Vec::with_capacity(cuts.len() - 1);
    let mut frame = f0;
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let n = ((opts.grid as f64 * (b - a) / PI).ceil() as usize).max(opts.min_steps);
        let h = (b - a) / n as f64;
        let start = xs.len() - 1;
        if start > 0 {
            // repeat the boundary node so each segment owns a full uniform grid
            xs.push(a);
            frames.push(frame);
        }
        let first = xs.len() - 1;
        for i in 0..n {
            let x = a + i as f64 * h;
            let a1 = generator(k.eval(x + (0.5 - c) * h));
            let a2 = generator(k.eval(x + (0.5 + c) * h));
            let omega: Matrix2<f64> = (a1 + a2) * (0.5 * h) + (a1 * a2 - a2 * a1) * (3f64.sqrt() / 12.0 * h * h);
            frame = frame.mul(&sl2_exp(&omega)).renormalized();
            xs.push(if i + 1 == n { b } else { a + (i + 1) as f64 * h });
            frames.push(frame);
        }
        segments.push((first, xs.len() - 1));
    }
    Ok(FramePath {
        xs,
        frames,
        segments,
    })
}

/// Samples of a plane curve `γ` and its velocity over `[0, π]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneCurve {
    pub xs: Vec<f64>,
    pub position: Vec<[f64; 2]>,
    pub velocity: Vec<[f64; 2]>,
    /// Index ranges of smooth, uniformly sampled pieces.
    pub segments: Vec<(usize, usize)>,
}

impl PlaneCurve {
    /// A curve given in closed form, sampled uniformly with `n` steps.
    pub fn from_fn<F>(n: usize, f: F) -> Self
    where
        F: Fn(f64) -> ([f64; 2], [f64; 2]),
    {
        let xs: Vec<f64> = (0..=n).map(|i| PI * i as f64 / n as f64).collect();
        let (position, velocity) = xs.iter().map(|&x| f(x)).unzip();
        PlaneCurve {
            xs,
            position,
            velocity,
            segments: vec![(0, n)],
        }
    }

    /// `|γ(π) + γ(0)| + |γ'(π) + γ'(0)|`, zero for a closed centrally symmetric curve.
    pub fn closure_gap(&self) -> f64 {
        let n = self.xs.len() - 1;
        let p = self.position[0];
        let q = self.position[n];
        let v = self.velocity[0];
        let w = self.velocity[n];
        (p[0] + q[0]).hypot(p[1] + q[1]) + (v[0] + w[0]).hypot(v[1] + w[1])
    }

    /// `det(γ, γ')` at each sample.
    pub fn wronskians(&self) -> Vec<f64> {
        self.position
            .iter()
            .zip(&self.velocity)
            .map(|(p, v)| p[0] * v[1] - p[1] * v[0])
            .collect()
    }

    /// CSV with header `x,gx,gy,dgx,dgy`; repeated segment boundaries are written once.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,gx,gy,dgx,dgy\n");
        for i in 0..self.xs.len() {
            if i > 0 && self.xs[i] == self.xs[i - 1] {
                continue;
            }
            let (p, v) = (self.position[i], self.velocity[i]);
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                fmt17(self.xs[i]),
                fmt17(p[0]),
                fmt17(p[1]),
                fmt17(v[0]),
                fmt17(v[1])
            );
        }
        out
    }

    /// SVG with `γ` and its reflection `-γ` as polylines, which together close up.
    pub fn to_svg(&self) -> String {
        let r = self
            .position
            .iter()
            .fold(0.0f64, |m, p| m.max(p[0].abs()).max(p[1].abs()))
            .max(1e-12)
            * 1.1;
        let points = |sign: f64| {
            self.position
                .iter()
                .map(|p| format!("{:.6},{:.6}", sign * p[0], -sign * p[1]))
                .collect::<Vec<_>>()
                .join(" ")
        };
        let mut out = String::new();
        let _ = writeln!(
            out,
            r#"<svg xmlns="http://www.w3.org/2000/svg" viewBox="{:.6} {:.6} {:.6} {:.6}" width="480" height="480">"#,
            -r,
            -r,
            2.0 * r,
            2.0 * r
        );
        let stroke = 2.0 * r / 240.0;
        let _ = writeln!(
            out,
            r#"  <polyline fill="none" stroke="steelblue" stroke-width="{stroke:.6}" points="{}"/>"#,
            points(1.0)
        );
        let _ = writeln!(
            out,
            r#"  <polyline fill="none" stroke="darkorange" stroke-width="{stroke:.6}" points="{}"/>"#,
            points(-1.0)
        );
        out.push_str("</svg>\n");
        out
    }
}
