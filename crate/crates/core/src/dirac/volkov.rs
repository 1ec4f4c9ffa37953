use std::f64::consts::PI;

use nalgebra::Vector3;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::bispinor::{bispinor_u, bispinor_v, energy, SpinLabel};
use crate::algebra::{alpha, beta, gamma, Bispinor, Mat4};
use crate::numerics::{finite_difference_residual, pairwise_sum, GaussLegendre};
use crate::pulse::Pulse;

const PANEL_ORDER: usize = 20;

/// Running integrals I₁(ξ) = ∫₀^ξ 𝒜 and I₂(ξ) = ∫₀^ξ 𝒜², tabulated at panel
/// breaks over the support and completed inside a panel by a Gauss–Legendre
/// rule on the partial interval.
#[derive(Debug, Clone)]
pub struct PhaseIntegrals {
    breaks: Vec<f64>,
    cum1: Vec<f64>,
    cum2: Vec<f64>,
    gl: GaussLegendre,
    xi_max: f64,
    a0: f64,
}

impl PhaseIntegrals {
    pub fn new(pulse: &Pulse) -> Self {
        let gl = GaussLegendre::new(PANEL_ORDER);
        let xi_max = pulse.xi_max();
        if xi_max == 0.0 {
            return Self { breaks: vec![0.0], cum1: vec![0.0], cum2: vec![0.0], gl, xi_max, a0: pulse.a0() };
        }
        let n_c = pulse.params.n_c;
        // highest carrier harmonic of 𝒜² in φ is 2(1 + 1/N_c)
        let dphi = 0.25 * PI / (1.0 + 1.0 / n_c);
        let panels = ((2.0 * PI * n_c / dphi).ceil() as usize).max(16);
        let h = xi_max / panels as f64;
        let breaks: Vec<f64> = (0..=panels).map(|i| if i == panels { xi_max } else { h * i as f64 }).collect();
        let mut cum1 = vec![0.0];
        let mut cum2 = vec![0.0];
        let mut p1 = Vec::with_capacity(panels);
        let mut p2 = Vec::with_capacity(panels);
        for w in breaks.windows(2) {
            p1.push(gl.integrate(|x| pulse.potential(x), w[0], w[1]));
            p2.push(gl.integrate(|x| pulse.potential(x).powi(2), w[0], w[1]));
            cum1.push(pairwise_sum(&p1));
            cum2.push(pairwise_sum(&p2));
        }
        Self { breaks, cum1, cum2, gl, xi_max, a0: pulse.a0() }
    }

    pub fn at(&self, pulse: &Pulse, xi: f64) -> (f64, f64) {
        if xi <= 0.0 {
            return (0.0, 0.0);
        }
        let last = self.breaks.len() - 1;
        if xi >= self.xi_max {
            let d = xi - self.xi_max;
            return (self.cum1[last] + self.a0 * d, self.cum2[last] + self.a0 * self.a0 * d);
        }
        let k = self.breaks.partition_point(|&b| b <= xi) - 1;
        let lo = self.breaks[k];
        let i1 = self.gl.integrate(|x| pulse.potential(x), lo, xi);
        let i2 = self.gl.integrate(|x| pulse.potential(x).powi(2), lo, xi);
        (self.cum1[k] + i1, self.cum2[k] + i2)
    }
}

/// (I₁, I₂) for a one-off evaluation; builds the table each call.
pub fn volkov_phase_integrals(xi: f64, pulse: &Pulse) -> (f64, f64) {
    PhaseIntegrals::new(pulse).at(pulse, xi)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum EnergySign {
    Positive,
    Negative,
}

impl EnergySign {
    pub fn sign(self) -> f64 {
        match self {
            EnergySign::Positive => 1.0,
            EnergySign::Negative => -1.0,
        }
    }
}

/// Volkov solutions of the Dirac equation for one pulse.
#[derive(Debug, Clone)]
pub struct VolkovBasis {
    pub pulse: Pulse,
    pub phases: PhaseIntegrals,
    /// (γ⁰ − γ³)γ¹
    n_matrix: Mat4,
}

impl VolkovBasis {
    pub fn new(pulse: Pulse) -> Self {
        let g = gamma();
        Self { phases: PhaseIntegrals::new(&pulse), n_matrix: (g[0] - g[3]) * g[1], pulse }
    }

    pub fn c(&self) -> f64 {
        self.pulse.c()
    }

    /// w₊ = u(p′, s′), w₋ = v(−p′, s′).
    pub fn free_spinor(&self, zeta: EnergySign, p: &Vector3<f64>, s: SpinLabel) -> Bispinor {
        match zeta {
            EnergySign::Positive => bispinor_u(p, s, self.c()),
            EnergySign::Negative => bispinor_v(&(-p), s, self.c()),
        }
    }

    /// f^(ζ)(t, z): the Volkov state without the plane-wave factor e^{iζp′·r}.
    pub fn function(&self, zeta: EnergySign, p: &Vector3<f64>, s: SpinLabel, t: f64, z: f64) -> Bispinor {
        let w = self.free_spinor(zeta, p, s);
        self.function_with_spinor(zeta, p, &w, t, z)
    }

    pub(crate) fn function_with_spinor(
        &self,
        zeta: EnergySign,
        p: &Vector3<f64>,
        w: &Bispinor,
        t: f64,
        z: f64,
    ) -> Bispinor {
        let c = self.c();
        let zs = zeta.sign();
        let eps = energy(p, c);
        let h = light_front_energy(p, c);
        let xi = c * t - z;
        let (i1, i2) = self.phases.at(&self.pulse, xi);
        let phase = -zs * eps * t - (p[0] * i1 + zs * i2 / (2.0 * c)) / h;
        let a = self.pulse.potential(xi);
        let m = Mat4::identity() + self.n_matrix * Complex64::from(zs * a / (2.0 * h));
        (m * w) * Complex64::from_polar(1.0, phase)
    }

    /// The one-dimensional Volkov wave (2π)^{−1/2} e^{iζp′_z z} f^(ζ)(t, z).
    pub fn wave(&self, zeta: EnergySign, p: &Vector3<f64>, s: SpinLabel, t: f64, z: f64) -> Bispinor {
        let plane = Complex64::from_polar((2.0 * PI).sqrt().recip(), zeta.sign() * p[2] * z);
        self.function(zeta, p, s, t, z) * plane
    }

    /// Matrix factor 1 + 𝒜N/(2h′) for positive energy at a given 𝒜.
    pub fn spinor_factor(&self, p: &Vector3<f64>, a: f64) -> Mat4 {
        Mat4::identity() + self.n_matrix * Complex64::from(a / (2.0 * light_front_energy(p, self.c())))
    }
}

/// Relative Dirac residual of the one-dimensional Volkov wave on a 7×7
/// (t, z) grid of spacing `step` starting at (t0, z0), with the free energy
/// ε′ demodulated. Values are drawn from `sampler`, the Hamiltonian from `b`;
/// passing a different sampler gives a negative control.
#[allow(clippy::too_many_arguments)]
pub fn volkov_residual(
    b: &VolkovBasis,
    sampler: &VolkovBasis,
    zeta: EnergySign,
    p: &Vector3<f64>,
    s: SpinLabel,
    t0: f64,
    z0: f64,
    step: f64,
) -> crate::Result<f64> {
    let c = b.c();
    let zs = zeta.sign();
    let eps = energy(p, c);
    let samples: Vec<Vec<Bispinor>> = (0..7)
        .map(|i| {
            let t = t0 + step * i as f64;
            (0..7)
                .map(|j| sampler.wave(zeta, p, s, t, z0 + step * j as f64) * Complex64::from_polar(1.0, zs * eps * t))
                .collect()
        })
        .collect();
    let a = alpha();
    let bt = beta();
    finite_difference_residual(&samples, t0, step, z0, step, c * c, |t, z, psi, dz| {
        let kx = zs * p[0] + b.pulse.potential(c * t - z) / c;
        let local = a[0] * Complex64::from(c * kx) + a[1] * Complex64::from(c * zs * p[1]) + bt * Complex64::from(c * c)
            - Mat4::identity() * Complex64::from(zs * eps);
        local * psi + a[2] * dz * Complex64::new(0.0, -c)
    })
}

/// h′ = ε′ − c p′_z, always positive.
pub fn light_front_energy(p: &Vector3<f64>, c: f64) -> f64 {
    let eps = energy(p, c);
    // ε′ − c p_z = c²(c² + p_⊥²)/(ε′ + c p_z) for p_z > 0
    if p[2] > 0.0 {
        c * c * (c * c + p[0] * p[0] + p[1] * p[1]) / (eps + c * p[2])
    } else {
        eps - c * p[2]
    }
}
