//! `SL(2, R)` and its Lie algebra.

use nalgebra::Matrix2;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// A real 2×2 matrix of determinant one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sl2(Matrix2<f64>);

impl Serialize for Sl2 {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        [[self.a(), self.b()], [self.c(), self.d()]].serialize(s)
    }
}

impl Sl2 {
    pub const IDENTITY: Sl2 = Sl2(Matrix2::new(1.0, 0.0, 0.0, 1.0));

    /// Rows `(a, b)` and `(c, d)`; requires `|ad - bc - 1| < 1e-10`.
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let det = a * d - b * c;
        if !((det - 1.0).abs() < 1e-10) {
            return Err(Error::InvalidInput(format!("determinant {det} is not 1")));
        }
        Ok(Sl2(Matrix2::new(a, b, c, d)))
    }

    pub fn matrix(&self) -> &Matrix2<f64> {
        &self.0
    }

    pub fn a(&self) -> f64 {
        self.0[(0, 0)]
    }

    pub fn b(&self) -> f64 {
        self.0[(0, 1)]
    }

    pub fn c(&self) -> f64 {
        self.0[(1, 0)]
    }

    pub fn d(&self) -> f64 {
        self.0[(1, 1)]
    }

    pub fn det(&self) -> f64 {
        self.a() * self.d() - self.b() * self.c()
    }

    pub fn trace(&self) -> f64 {
        self.a() + self.d()
    }

    pub fn mul(&self, other: &Sl2) -> Sl2 {
        Sl2(self.0 * other.0)
    }

    pub fn inverse(&self) -> Sl2 {
        Sl2(Matrix2::new(self.d(), -self.b(), -self.c(), self.a()))
    }

    pub fn neg(&self) -> Sl2 {
        Sl2(-self.0)
    }

    /// Divides by `sqrt(det)` to remove accumulated drift.
    pub fn renormalized(&self) -> Sl2 {
        let det = self.det();
        Sl2(self.0 / det.abs().sqrt())
    }

    /// Largest entrywise difference.
    pub fn distance(&self, other: &Sl2) -> f64 {
        (self.0 - other.0).abs().max()
    }
}

/// The generator `[[0, -k], [1, 0]]` of `F' = F A` for `γ'' = -k γ`.
pub fn generator(k: f64) -> Matrix2<f64> {
    Matrix2::new(0.0, -k, 1.0, 0.0)
}

/// Exponential of a traceless matrix in closed form: `exp(X) = C(δ) E + S(δ) X` where
/// `X² = -δ E`.
pub fn sl2_exp(x: &Matrix2<f64>) -> Sl2 {
    let delta = x[(0, 0)] * x[(1, 1)] - x[(0, 1)] * x[(1, 0)];
    let (c, s) = if delta > 0.0 {
        let w = delta.sqrt();
        (w.cos(), sinc(w))
    } else if delta < 0.0 {
        let w = (-delta).sqrt();
        (w.cosh(), sinhc(w))
    } else {
        (1.0, 1.0)
    };
    Sl2(Matrix2::identity() * c + x * s)
}

fn sinc(w: f64) -> f64 {
    if w.abs() < 1e-4 {
        1.0 - w * w / 6.0 + w.powi(4) / 120.0
    } else {
        w.sin() / w
    }
}

fn sinhc(w: f64) -> f64 {
    if w.abs() < 1e-4 {
        1.0 + w * w / 6.0 + w.powi(4) / 120.0
    } else {
        w.sinh() / w
    }
}

/// `exp(t A)` for the generator of constant `k`.
pub fn rotation_exp(k: f64, t: f64) -> Sl2 {
    if k > 0.0 {
        let r = k.sqrt();
        let (s, c) = (r * t).sin_cos();
        Sl2(Matrix2::new(c, -r * s, s / r, c))
    } else if k < 0.0 {
        let r = (-k).sqrt();
        let (s, c) = ((r * t).sinh(), (r * t).cosh());
        Sl2(Matrix2::new(c, r * s, s / r, c))
    } else {
        Sl2(Matrix2::new(1.0, 0.0, t, 1.0))
    }
}

/// Coordinates `(h, x, y)` of `[[h, x], [y, -h]]`; the trace part is dropped.
pub fn sl2_coords(m: &Matrix2<f64>) -> [f64; 3] {
    let h = 0.5 * (m[(0, 0)] - m[(1, 1)]);
    [h, m[(0, 1)], m[(1, 0)]]
}

pub fn from_sl2_coords(v: &[f64]) -> Matrix2<f64> {
    Matrix2::new(v[0], v[1], v[2], -v[0])
}

/// Logarithm of an element near the identity, in `sl2_coords`. Far from the identity
/// (trace at most `-2`, where the principal logarithm is undefined) the traceless part of
/// `N - E` is returned instead; it vanishes exactly at the identity as well.
pub fn sl2_log(n: &Sl2) -> [f64; 3] {
    let half = 0.5 * n.trace();
    let traceless = n.0 - Matrix2::identity() * half;
    let factor = if half > 1.0 {
        let w = half.acosh();
        1.0 / sinhc(w)
    } else if half > -1.0 + 1e-6 {
        let w = half.acos();
        1.0 / sinc(w)
    } else {
        1.0
    };
    sl2_coords(&(traceless * factor))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_2, PI};

    #[test]
    fn rotation_examples() {
        let minus = Sl2::IDENTITY.neg();
        assert!(rotation_exp(1.0, PI).distance(&minus) < 1e-15);
        assert_eq!(rotation_exp(3.0, 0.0), Sl2::IDENTITY);
        assert!(rotation_exp(4.0, FRAC_PI_2).distance(&minus) < 1e-15);
        assert_eq!(rotation_exp(0.0, 2.0), Sl2::new(1.0, 0.0, 2.0, 1.0).unwrap());
    }

    #[test]
    fn one_parameter_group_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..500 {
            let k = rng.random_range(-2.0..4.0);
            let s = rng.random_range(0.0..2.0);
            let t = rng.random_range(0.0..2.0);
            let lhs = rotation_exp(k, s + t);
            let rhs = rotation_exp(k, s).mul(&rotation_exp(k, t));
            assert!(lhs.distance(&rhs) < 1e-12 * (1.0 + lhs.matrix().abs().max()));
            assert!((lhs.det() - 1.0).abs() < 1e-12 * (1.0 + lhs.matrix().norm_squared()));
        }
    }

    #[test]
    fn exponential_agrees_with_rotation() {
        for k in [-1.5, 0.0, 0.7, 2.0] {
            let t = 0.9;
            let e = sl2_exp(&(generator(k) * t));
            assert!(e.distance(&rotation_exp(k, t)) < 1e-14);
        }
    }

    #[test]
    fn exponential_against_taylor_series() {
        let x = Matrix2::new(0.3, -0.8, 0.5, -0.3);
        let mut term = Matrix2::identity();
        let mut sum = Matrix2::identity();
        for i in 1..40 {
            term = term * x / i as f64;
            sum += term;
        }
        assert!((sl2_exp(&x).matrix() - sum).abs().max() < 1e-14);
    }

    #[test]
    fn log_inverts_exp() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..200 {
            let v: Vec<f64> = (0..3).map(|_| rng.random_range(-0.5..0.5)).collect();
            let x = from_sl2_coords(&v);
            let back = sl2_log(&sl2_exp(&x));
            for i in 0..3 {
                assert!((back[i] - v[i]).abs() < 1e-12);
            }
        }
        assert_eq!(sl2_log(&Sl2::IDENTITY), [0.0, 0.0, 0.0]);
    }

    #[test]
    fn rejects_bad_determinant() {
        assert!(Sl2::new(1.0, 1.0, 1.0, 1.0).is_err());
    }
}
