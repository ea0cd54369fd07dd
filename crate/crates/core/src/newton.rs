//! Damped quasi-Newton iteration inside a box trust region.

use nalgebra::{DMatrix, DVector};

use crate::error::Result;

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonOptions {
    /// Stop once `max |F(x)| < tol`.
    pub tol: f64,
    pub max_iter: usize,
    /// Iterates stay in the box `|x_i| <= 0.9 * radius`.
    pub radius: f64,
    /// Finite-difference Jacobian refresh period; Broyden updates in between.
    pub refresh_every: usize,
    pub fd_step: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        NewtonOptions {
            tol: 1e-10,
            max_iter: 40,
            radius: f64::INFINITY,
            refresh_every: 6,
            fd_step: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonOutcome {
    pub x: Vec<f64>,
    pub residual: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Why the iteration stopped when it did not converge.
    pub reason: Option<String>,
}

impl NewtonOutcome {
    pub fn max_residual(&self) -> f64 {
        max_abs(&self.residual)
    }
}

pub(crate) fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |a, x| a.max(x.abs()))
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Central-difference Jacobian, with steps shortened near the box boundary.
pub fn fd_jacobian<F>(residual: &mut F, x: &[f64], step: f64, bound: f64) -> Result<DMatrix<f64>>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    let n = x.len();
    let mut cols = Vec::with_capacity(n);
    let mut rows = 0;
    for j in 0..n {
        let room = (bound - x[j].abs()).max(0.0);
        let h = step.min(0.5 * room).max(step * 1e-3);
        let mut up = x.to_vec();
        up[j] += h;
        let mut dn = x.to_vec();
        dn[j] -= h;
        let fu = residual(&up)?;
        let fd = residual(&dn)?;
        rows = fu.len();
        cols.push(fu.iter().zip(&fd).map(|(a, b)| (a - b) / (2.0 * h)).collect::<Vec<_>>());
    }
    Ok(DMatrix::from_fn(rows, n, |i, j| cols[j][i]))
}

/// Solves `F(x) = 0` from `x0` for square systems.
///
/// Steps are Newton steps for the current Jacobian model, clipped to the box and
/// backtracked until `|F|` decreases. The model starts at `j0` (or a finite-difference
/// Jacobian), is refreshed every `refresh_every` iterations or after a failed line
/// search, and receives Broyden updates otherwise.
pub fn trust_region_newton<F>(
    mut residual: F,
    x0: Vec<f64>,
    j0: Option<DMatrix<f64>>,
    opts: &NewtonOptions,
) -> Result<NewtonOutcome>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    let bound = 0.9 * opts.radius;
    let mut x = x0;
    let mut r = residual(&x)?;
    let mut jac = match j0 {
        Some(j) => j,
        None => fd_jacobian(&mut residual, &x, opts.fd_step, bound)?,
    };
    let mut fresh = false;
    let mut since_refresh = 0;
    let mut iterations = 0;
    let mut reason = None;
    while max_abs(&r) >= opts.tol {
        if iterations >= opts.max_iter {
            reason = Some(format!("iteration limit {} reached", opts.max_iter));
            break;
        }
        iterations += 1;
        if since_refresh >= opts.refresh_every && !fresh {
            jac = fd_jacobian(&mut residual, &x, opts.fd_step, bound)?;
            fresh = true;
            since_refresh = 0;
        }
        let step = jac
            .clone()
            .lu()
            .solve(&DVector::from_column_slice(&r))
            .map(|d| -d);
        let Some(step) = step else {
            if fresh {
                reason = Some("singular Jacobian".into());
                break;
            }
            jac = fd_jacobian(&mut residual, &x, opts.fd_step, bound)?;
            fresh = true;
            since_refresh = 0;
            continue;
        };
        // largest multiple of the step that stays in the box
        let mut t_max: f64 = 1.0;
        for (xi, di) in x.iter().zip(step.iter()) {
            if *di != 0.0 {
                let limit = if *di > 0.0 { (bound - xi) / di } else { (-bound - xi) / di };
                t_max = t_max.min(limit.max(0.0));
            }
        }
        let current = norm(&r);
        let mut t = t_max;
        let mut accepted = None;
        while t > t_max / 64.0 && t > 0.0 {
            let trial: Vec<f64> = x.iter().zip(step.iter()).map(|(a, d)| a + t * d).collect();
            let rt = residual(&trial)?;
            if norm(&rt) < current {
                accepted = Some((trial, rt));
                break;
            }
            t *= 0.5;
        }
        match accepted {
            Some((xn, rn)) => {
                // Broyden rank-one update
                let s = DVector::from_iterator(x.len(), xn.iter().zip(&x).map(|(a, b)| a - b));
                let y = DVector::from_iterator(r.len(), rn.iter().zip(&r).map(|(a, b)| a - b));
                let ss = s.dot(&s);
                if ss > 0.0 {
                    let u = (y - &jac * &s) / ss;
                    jac += u * s.transpose();
                }
                x = xn;
                r = rn;
                fresh = false;
                since_refresh += 1;
            }
            None => {
                if fresh {
                    reason = Some(if t_max < 1.0 {
                        "stalled at the trust region boundary".into()
                    } else {
                        "line search failed".into()
                    });
                    break;
                }
                jac = fd_jacobian(&mut residual, &x, opts.fd_step, bound)?;
                fresh = true;
                since_refresh = 0;
            }
        }
    }
    let converged = max_abs(&r) < opts.tol;
    Ok(NewtonOutcome {
        x,
        residual: r,
        iterations,
        converged,
        reason: if converged { None } else { reason },
    })
}
