//! Complex scalars and their `[re, im]` JSON form.

use serde::{Deserialize, Serialize};

pub type C64 = num_complex::Complex64;

/// A complex number serialized as a two-element array `[re, im]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
pub struct Cx(pub f64, pub f64);

impl From<C64> for Cx {
    fn from(z: C64) -> Self {
        Cx(z.re, z.im)
    }
}

impl From<Cx> for C64 {
    fn from(c: Cx) -> Self {
        C64::new(c.0, c.1)
    }
}

impl From<f64> for Cx {
    fn from(x: f64) -> Self {
        Cx(x, 0.0)
    }
}

pub fn to_cx(v: &[C64]) -> Vec<Cx> {
    v.iter().copied().map(Cx::from).collect()
}

pub fn from_cx(v: &[Cx]) -> Vec<C64> {
    v.iter().copied().map(C64::from).collect()
}

pub fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub fn max_abs(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn diff_norm(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm_sqr()).sum::<f64>().sqrt()
}

/// `a += s * b`
pub fn axpy(a: &mut [C64], s: C64, b: &[C64]) {
    for (x, y) in a.iter_mut().zip(b) {
        *x += s * y;
    }
}
