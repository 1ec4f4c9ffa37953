use std::fmt;

use nalgebra::Vector3;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::Bispinor;

/// Spin quantum number s = ±1 of the free bispinors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum SpinLabel {
    Up,
    Down,
}

impl SpinLabel {
    pub const BOTH: [SpinLabel; 2] = [SpinLabel::Up, SpinLabel::Down];

    pub fn sign(self) -> f64 {
        match self {
            SpinLabel::Up => 1.0,
            SpinLabel::Down => -1.0,
        }
    }

    pub fn index(self) -> usize {
        match self {
            SpinLabel::Up => 0,
            SpinLabel::Down => 1,
        }
    }
}

impl TryFrom<i8> for SpinLabel {
    type Error = String;

    fn try_from(v: i8) -> Result<Self, String> {
        match v {
            1 => Ok(SpinLabel::Up),
            -1 => Ok(SpinLabel::Down),
            _ => Err(format!("spin label must be +1 or -1, got {v}")),
        }
    }
}

impl From<SpinLabel> for i8 {
    fn from(s: SpinLabel) -> i8 {
        match s {
            SpinLabel::Up => 1,
            SpinLabel::Down => -1,
        }
    }
}

impl fmt::Display for SpinLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:+}", i8::from(*self))
    }
}

/// ε = c√(c² + p²).
pub fn energy(p: &Vector3<f64>, c: f64) -> f64 {
    c * (c * c + p.norm_squared()).sqrt()
}

fn cplx(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Positive-energy bispinor u(p, s).
pub fn bispinor_u(p: &Vector3<f64>, s: SpinLabel, c: f64) -> Bispinor {
    let p0 = (c * c + p.norm_squared()).sqrt();
    // c − p⁰ without cancellation
    let c_minus = -p.norm_squared() / (c + p0);
    let n = 1.0 / (2.0 * (p0 * (p0 - p[0])).sqrt());
    let v = match s {
        SpinLabel::Up => Bispinor::new(
            cplx(c + p0 - p[0], p[1]),
            cplx(p[2], 0.0),
            cplx(p[2], 0.0),
            cplx(c_minus + p[0], p[1]),
        ),
        SpinLabel::Down => Bispinor::new(
            cplx(-p[2], 0.0),
            cplx(c + p0 - p[0], -p[1]),
            cplx(c_minus + p[0], -p[1]),
            cplx(-p[2], 0.0),
        ),
    };
    v * Complex64::from(n)
}

/// Negative-energy bispinor v(p, s).
pub fn bispinor_v(p: &Vector3<f64>, s: SpinLabel, c: f64) -> Bispinor {
    let p0 = (c * c + p.norm_squared()).sqrt();
    let c_minus = -p.norm_squared() / (c + p0);
    let n = 1.0 / (2.0 * (p0 * (p0 + p[0])).sqrt());
    let v = match s {
        SpinLabel::Up => Bispinor::new(
            cplx(c_minus - p[0], p[1]),
            cplx(p[2], 0.0),
            cplx(p[2], 0.0),
            cplx(c + p0 + p[0], p[1]),
        ),
        SpinLabel::Down => Bispinor::new(
            cplx(-p[2], 0.0),
            cplx(c_minus - p[0], -p[1]),
            cplx(c + p0 + p[0], -p[1]),
            cplx(-p[2], 0.0),
        ),
    };
    v * Complex64::from(n)
}
