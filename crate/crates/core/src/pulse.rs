//! Finite linearly polarized plane-wave pulse with a sin² envelope.
//!
//! The field depends on space-time through the light-front coordinate
//! ξ = ct − z and is supported on [0, ξ_max] with ξ_max = 2πcN_c/ω.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{integrate_pieces, QuadratureSpec};

pub const SPEED_OF_LIGHT: f64 = 137.035999;

/// Relative sign between 𝒜 and the running integral of ℰ, with E = −(1/c)∂A/∂t.
pub const A_SIGN: f64 = -1.0;

fn default_c() -> f64 {
    SPEED_OF_LIGHT
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PulseParams {
    pub e_star: f64,
    pub omega: f64,
    pub n_c: f64,
    /// Front-edge offset; chosen from the packet width when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l: Option<f64>,
    /// Rear margin at t_out; chosen from the classical exit when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub l_tilde: Option<f64>,
    #[serde(default = "default_c")]
    pub c: f64,
}

impl PulseParams {
    pub fn new(e_star: f64, omega: f64, n_c: f64) -> Self {
        Self { e_star, omega, n_c, l: None, l_tilde: None, c: SPEED_OF_LIGHT }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidPulse(m.to_string()));
        if !(self.e_star >= 0.0 && self.e_star.is_finite()) {
            return bad("E_star must be finite and >= 0");
        }
        if !(self.omega > 0.0 && self.omega.is_finite()) {
            return bad("omega must be finite and > 0");
        }
        if !(self.n_c >= 0.0 && self.n_c.is_finite()) {
            return bad("N_c must be finite and >= 0");
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return bad("c must be finite and > 0");
        }
        if self.l.is_some_and(|l| !(l > 0.0 && l.is_finite())) {
            return bad("L must be finite and > 0");
        }
        if self.l_tilde.is_some_and(|l| !(l > 0.0 && l.is_finite())) {
            return bad("L_tilde must be finite and > 0");
        }
        Ok(())
    }

    pub fn xi_max(&self) -> f64 {
        2.0 * PI * self.c * self.n_c / self.omega
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldSample {
    pub xi: f64,
    pub e: f64,
    pub a: f64,
}

/// sin²(η/(2N_c)) on [0, 2πN_c], zero elsewhere.
pub fn envelope(eta: f64, n_c: f64) -> f64 {
    if n_c <= 0.0 || !(0.0..=2.0 * PI * n_c).contains(&eta) {
        return 0.0;
    }
    (eta / (2.0 * n_c)).sin().powi(2)
}

/// (1 − cos bφ)/b written without cancellation; tends to 0 as b → 0.
fn versine(b: f64, phi: f64) -> f64 {
    if b == 0.0 {
        return 0.0;
    }
    2.0 * (0.5 * b * phi).sin().powi(2) / b
}

/// sin²(πN)/(1 − N²) with the removable singularity at N = 1.
fn area_shape(n: f64) -> f64 {
    if n == 1.0 {
        return 0.0;
    }
    let s = (PI * (n - n.round())).sin();
    s * s / ((1.0 - n) * (1.0 + n))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pulse {
    pub params: PulseParams,
    pub a_sign: f64,
    xi_max: f64,
    k: f64,
    area: f64,
    a0: f64,
}

impl Pulse {
    pub fn new(params: PulseParams) -> Result<Self> {
        params.validate()?;
        let area = params.e_star / params.omega * area_shape(params.n_c);
        Ok(Self {
            params,
            a_sign: A_SIGN,
            xi_max: params.xi_max(),
            k: params.omega / params.c,
            area,
            a0: A_SIGN * params.c * area,
        })
    }

    /// Same pulse with a different 𝒜 sign; used for negative controls.
    pub fn with_a_sign(mut self, sign: f64) -> Self {
        self.a_sign = sign;
        self.a0 = sign * self.params.c * self.area;
        self
    }

    pub fn c(&self) -> f64 {
        self.params.c
    }

    pub fn xi_max(&self) -> f64 {
        self.xi_max
    }

    /// Electric field area S_E = (1/c)∫ℰ dξ.
    pub fn area(&self) -> f64 {
        self.area
    }

    pub fn sigma(&self) -> f64 {
        self.area / (2.0 * self.params.c)
    }

    /// Post-pulse vector potential 𝒜₀.
    pub fn a0(&self) -> f64 {
        self.a0
    }

    pub fn is_empty(&self) -> bool {
        self.params.e_star == 0.0 || self.params.n_c == 0.0
    }

    pub fn field(&self, xi: f64) -> f64 {
        if !(0.0..=self.xi_max).contains(&xi) || self.params.n_c == 0.0 {
            return 0.0;
        }
        let phi = self.k * xi;
        self.params.e_star * envelope(phi, self.params.n_c) * phi.sin()
    }

    /// ∫₀^ξ ℰ dξ′ in closed form, clamped to the support.
    fn running_integral(&self, xi: f64) -> f64 {
        if xi <= 0.0 || self.params.n_c == 0.0 {
            return 0.0;
        }
        let phi = self.k * xi.min(self.xi_max);
        let a = 1.0 / self.params.n_c;
        let g = versine(1.0, phi) - 0.5 * versine(1.0 + a, phi) - 0.5 * versine(1.0 - a, phi);
        0.5 * self.params.e_star * g / self.k
    }

    pub fn potential(&self, xi: f64) -> f64 {
        if xi <= 0.0 {
            0.0
        } else if xi >= self.xi_max {
            self.a0
        } else {
            self.a_sign * self.running_integral(xi)
        }
    }

    /// Vector potential by adaptive quadrature of the field; a cross-check of
    /// [`Pulse::potential`].
    pub fn potential_by_quadrature(&self, xi: f64) -> Result<f64> {
        if xi <= 0.0 {
            return Ok(0.0);
        }
        let end = xi.min(self.xi_max);
        let mut points = self.sign_changes(end);
        points.insert(0, 0.0);
        points.push(end);
        let spec = QuadratureSpec { rel_tol: 1e-14, abs_tol: 1e-300, ..Default::default() };
        Ok(self.a_sign * integrate_pieces(|x| self.field(x), &points, &spec)?.value)
    }

    /// Interior zeros of the carrier inside (0, end).
    fn sign_changes(&self, end: f64) -> Vec<f64> {
        let step = PI / self.k;
        (1..).map(|j| j as f64 * step).take_while(|&x| x < end).collect()
    }

    pub fn sample(&self, xi: f64) -> FieldSample {
        FieldSample { xi, e: self.field(xi), a: self.potential(xi) }
    }

    /// Field area by quadrature of ℰ over the support, for cross-checks.
    pub fn area_by_quadrature(&self, spec: &QuadratureSpec) -> Result<f64> {
        if self.xi_max == 0.0 {
            return Ok(0.0);
        }
        let mut points = self.sign_changes(self.xi_max);
        points.insert(0, 0.0);
        points.push(self.xi_max);
        Ok(integrate_pieces(|x| self.field(x), &points, spec)?.value / self.params.c)
    }

    /// |∫ℰ dt| / ∫|ℰ| dt.
    pub fn unipolarity(&self) -> Result<f64> {
        if self.is_empty() {
            return Err(Error::DegeneratePulse("field vanishes identically".into()));
        }
        let mut points = self.sign_changes(self.xi_max);
        points.insert(0, 0.0);
        points.push(self.xi_max);
        let spec = QuadratureSpec { rel_tol: 1e-13, abs_tol: 1e-300, ..Default::default() };
        let signed = integrate_pieces(|x| self.field(x), &points, &spec)?.value;
        let total = integrate_pieces(|x| self.field(x).abs(), &points, &spec)?.value;
        if total == 0.0 {
            return Err(Error::DegeneratePulse("integral of |E| is zero".into()));
        }
        Ok((signed.abs() / total).min(1.0))
    }
}

pub fn electric_field(xi: f64, params: &PulseParams) -> Result<f64> {
    Ok(Pulse::new(*params)?.field(xi))
}

pub fn vector_potential(xi: f64, params: &PulseParams) -> Result<f64> {
    Ok(Pulse::new(*params)?.potential(xi))
}

pub fn field_area(params: &PulseParams) -> Result<f64> {
    Ok(Pulse::new(*params)?.area())
}

pub fn sigma_e(params: &PulseParams) -> Result<f64> {
    Ok(Pulse::new(*params)?.sigma())
}

pub fn unipolarity(params: &PulseParams) -> Result<f64> {
    Pulse::new(*params)?.unipolarity()
}
