use std::f64::consts::PI;
use std::io::Write;

use nalgebra::Vector3;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::bispinor::{bispinor_u, energy, SpinLabel};
use super::volkov::{light_front_energy, EnergySign, VolkovBasis};
use crate::algebra::{Bispinor, ZERO};
use crate::classical::{integrate_motion, ClassicalState, OdeOptions};
use crate::error::{Error, Result};
use crate::numerics::{pairwise_reduce, pairwise_sum, phase_bounded_panels, Grid1D};
use crate::pulse::Pulse;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PacketSpec {
    /// Central canonical momentum.
    pub p: [f64; 3],
    pub s: SpinLabel,
    pub dq: f64,
}

impl PacketSpec {
    pub fn new(p: [f64; 3], s: SpinLabel, dq: f64) -> Self {
        Self { p, s, dq }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dq > 0.0 && self.dq.is_finite()) {
            return Err(Error::Config("packet.dq must be finite and > 0".into()));
        }
        if self.p.iter().any(|x| !x.is_finite()) {
            return Err(Error::Config("packet.p must be finite".into()));
        }
        Ok(())
    }

    pub fn momentum(&self) -> Vector3<f64> {
        Vector3::from(self.p)
    }
}

/// f(q) = (Δq√π)^{−1/2} exp(−q²/(2Δq²)).
pub fn spectral_profile(q: f64, dq: f64) -> f64 {
    (dq * PI.sqrt()).sqrt().recip() * (-0.5 * (q / dq).powi(2)).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuantumOptions {
    /// Half-width of the p′_z window in units of Δq.
    pub window: f64,
    pub gl_order: usize,
    pub min_panels: usize,
    pub phase_rate_bound: f64,
    /// Packet widths kept between packet and pulse at t_in and t_out, and
    /// the initial half-width of the coordinate box.
    pub margin: f64,
    pub tail_tol: f64,
    pub norm_tol: f64,
    pub max_box_growth: f64,
    pub max_panels: usize,
    pub ode: OdeOptions,
}

impl Default for QuantumOptions {
    fn default() -> Self {
        Self {
            window: 8.0,
            gl_order: 16,
            min_panels: 32,
            phase_rate_bound: PI / 4.0,
            margin: 6.0,
            tail_tol: 1e-10,
            norm_tol: 1e-6,
            max_box_growth: 64.0,
            max_panels: 20_000,
            ode: OdeOptions::default(),
        }
    }
}

impl QuantumOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.window >= 4.0) {
            return Err(Error::Config("quantum.window must be >= 4".into()));
        }
        if self.gl_order < 2 || self.min_panels < 1 {
            return Err(Error::Config("quantum.gl_order >= 2 and quantum.min_panels >= 1 required".into()));
        }
        if !(self.phase_rate_bound > 0.0 && self.phase_rate_bound <= PI / 2.0) {
            return Err(Error::Config("quantum.phase_rate_bound must lie in (0, pi/2]".into()));
        }
        if !(self.margin > 0.0 && self.tail_tol > 0.0 && self.norm_tol > 0.0 && self.max_box_growth >= 1.0) {
            return Err(Error::Config("quantum margins and tolerances must be positive".into()));
        }
        Ok(())
    }
}

/// Placement of packet and pulse: the packet is centred at z = 0 at
/// t_in = −L/c, when the pulse front is at z = −L, and t_out = (L̃ + ξ_max)/c.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Geometry {
    pub l: f64,
    pub l_tilde: f64,
    pub t_in: f64,
    pub t_out: f64,
    pub t_exit: f64,
    pub z_exit: f64,
    pub u_final: [f64; 3],
}

impl Geometry {
    pub fn resolve(pulse: &Pulse, spec: &PacketSpec, opts: &QuantumOptions) -> Result<Self> {
        let c = pulse.c();
        let dq = spec.dq;
        let l = pulse.params.l.unwrap_or(opts.margin / dq);
        let t_in = -l / c;
        let start = ClassicalState::new(t_in, 0.0, spec.p, c);
        let traj = integrate_motion(&start, pulse, f64::INFINITY, &opts.ode)?;
        let exit = *traj.last();
        let v = exit.velocity()[2];
        let l_tilde = match pulse.params.l_tilde {
            Some(x) => x,
            None => {
                let m = opts.margin;
                let coef = c - v - m * dq;
                if coef <= 0.0 {
                    return Err(Error::Config(format!(
                        "packet width dq = {dq} too large to separate packet and pulse after exit"
                    )));
                }
                let rhs = pulse.xi_max() + exit.z - v * exit.t + m / dq - m * dq * t_in;
                let t_out = (rhs / coef).max(exit.t);
                (c * t_out - pulse.xi_max()).max(m / dq)
            }
        };
        Ok(Self {
            l,
            l_tilde,
            t_in,
            t_out: (l_tilde + pulse.xi_max()) / c,
            t_exit: exit.t,
            z_exit: exit.z,
            u_final: exit.u,
        })
    }

    /// Conservative 1/e half-width of |ψ|² at time t.
    pub fn width(&self, t: f64, dq: f64) -> f64 {
        1.0 / dq + dq * (t - self.t_in).abs()
    }
}

/// Gaussian tail mass of the initial packet beyond distance L.
pub fn front_tail_mass(l: f64, dq: f64) -> f64 {
    0.5 * libm::erfc(l * dq)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoefficientSource {
    Analytic,
    Quadrature,
}

/// Positive-energy expansion coefficients c⁽⁺⁾(p′_z, s′) on a Gauss panel grid.
#[derive(Debug, Clone)]
pub struct CoefficientTable {
    pub grid: Grid1D,
    pub breaks: Vec<f64>,
    /// Coefficients for s′ = +1 and s′ = −1 at each node.
    pub values: Vec<[Complex64; 2]>,
    pub p_x: f64,
    pub p_y: f64,
    pub t_in: f64,
    pub source: CoefficientSource,
    pub spec: PacketSpec,
}

impl CoefficientTable {
    pub fn norm(&self) -> f64 {
        let terms: Vec<f64> = self
            .values
            .iter()
            .zip(&self.grid.weights)
            .map(|(v, w)| w * (v[0].norm_sqr() + v[1].norm_sqr()))
            .collect();
        pairwise_sum(&terms)
    }

    /// ℓ² distance to another table on the same grid.
    pub fn distance(&self, other: &CoefficientTable) -> f64 {
        assert_eq!(self.grid.len(), other.grid.len());
        let terms: Vec<f64> = self
            .values
            .iter()
            .zip(&other.values)
            .zip(&self.grid.weights)
            .map(|((a, b), w)| w * ((a[0] - b[0]).norm_sqr() + (a[1] - b[1]).norm_sqr()))
            .collect();
        pairwise_sum(&terms).sqrt()
    }

    pub fn momentum(&self, pz: f64) -> Vector3<f64> {
        Vector3::new(self.p_x, self.p_y, pz)
    }

    /// Columnar dump: `#` header lines, then `p_z' re(c+) im(c+) re(c-) im(c-) weight`.
    pub fn write_columns(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "# coefficient_table")?;
        writeln!(w, "# source = {:?}", self.source)?;
        writeln!(w, "# p_x = {:.17e}", self.p_x)?;
        writeln!(w, "# p_y = {:.17e}", self.p_y)?;
        writeln!(w, "# p_z = {:.17e}", self.spec.p[2])?;
        writeln!(w, "# s = {}", self.spec.s)?;
        writeln!(w, "# dq = {:.17e}", self.spec.dq)?;
        writeln!(w, "# t_in = {:.17e}", self.t_in)?;
        writeln!(w, "# columns = pz re_up im_up re_down im_down weight")?;
        for ((p, v), wt) in self.grid.nodes.iter().zip(&self.values).zip(&self.grid.weights) {
            writeln!(
                w,
                "{:.17e} {:.17e} {:.17e} {:.17e} {:.17e} {:.17e}",
                p, v[0].re, v[0].im, v[1].re, v[1].im, wt
            )?;
        }
        Ok(())
    }
}

fn window_breaks(spec: &PacketSpec, opts: &QuantumOptions) -> Vec<f64> {
    let lo = spec.p[2] - opts.window * spec.dq;
    let hi = spec.p[2] + opts.window * spec.dq;
    let n = opts.min_panels;
    (0..=n).map(|i| if i == n { hi } else { lo + (hi - lo) * i as f64 / n as f64 }).collect()
}

fn analytic_table(spec: &PacketSpec, c: f64, t_in: f64, breaks: Vec<f64>, opts: &QuantumOptions) -> CoefficientTable {
    let grid = Grid1D::gauss_panels(&breaks, opts.gl_order);
    let values = grid
        .nodes
        .iter()
        .map(|&pz| {
            let p = Vector3::new(spec.p[0], spec.p[1], pz);
            let amp = Complex64::from_polar(spectral_profile(pz - spec.p[2], spec.dq), energy(&p, c) * t_in);
            let mut v = [ZERO; 2];
            v[spec.s.index()] = amp;
            v
        })
        .collect();
    CoefficientTable {
        grid,
        breaks,
        values,
        p_x: spec.p[0],
        p_y: spec.p[1],
        t_in,
        source: CoefficientSource::Analytic,
        spec: *spec,
    }
}

/// Initial packet ψ⁽⁰⁾(z) at the given points, by quadrature over q.
pub fn initial_packet(spec: &PacketSpec, c: f64, zs: &[f64], opts: &QuantumOptions) -> Vec<Bispinor> {
    let q_breaks: Vec<f64> = window_breaks(&PacketSpec { p: [0.0; 3], ..*spec }, opts);
    let qg = Grid1D::gauss_panels(&q_breaks, opts.gl_order);
    let terms: Vec<(f64, Bispinor)> = qg
        .nodes
        .iter()
        .zip(&qg.weights)
        .map(|(&q, &w)| {
            let p = Vector3::new(spec.p[0], spec.p[1], spec.p[2] + q);
            (spec.p[2] + q, bispinor_u(&p, spec.s, c) * Complex64::from(w * spectral_profile(q, spec.dq)))
        })
        .collect();
    let norm = (2.0 * PI).sqrt().recip();
    zs.par_iter()
        .map(|&z| {
            let parts: Vec<Bispinor> =
                terms.iter().map(|(k, b)| b * Complex64::from_polar(norm, k * z)).collect();
            pairwise_reduce(&parts, Bispinor::zeros())
        })
        .collect()
}

fn quadrature_z_grid(spec: &PacketSpec, opts: &QuantumOptions) -> Grid1D {
    let half = (opts.margin + 4.0) / spec.dq;
    let h = PI / (2.0 * opts.window * spec.dq);
    let n = (2.0 * half / h).ceil() as usize + 1;
    Grid1D::uniform(-half, half, n.max(16))
}

/// Direct z-quadrature of ⟨φ^(ζ)_{p′,s′}(t_in)|ψ⁽⁰⁾⟩ for the labels in `grid`.
fn project(
    spec: &PacketSpec,
    basis: &VolkovBasis,
    t_in: f64,
    zeta: EnergySign,
    grid: &Grid1D,
    opts: &QuantumOptions,
) -> Vec<[Complex64; 2]> {
    let c = basis.c();
    let zg = quadrature_z_grid(spec, opts);
    let psi0 = initial_packet(spec, c, &zg.nodes, opts);
    let zs = zeta.sign();
    let norm = (2.0 * PI).sqrt().recip();
    grid.nodes
        .par_iter()
        .map(|&pz| {
            let p = Vector3::new(zs * spec.p[0], zs * spec.p[1], pz);
            let mut out = [ZERO; 2];
            for s in SpinLabel::BOTH {
                let w = basis.free_spinor(zeta, &p, s);
                let terms: Vec<Complex64> = zg
                    .nodes
                    .iter()
                    .zip(&zg.weights)
                    .zip(&psi0)
                    .map(|((&z, &wz), psi)| {
                        let f = basis.function_with_spinor(zeta, &p, &w, t_in, z);
                        let plane = Complex64::from_polar(norm * wz, -zs * pz * z);
                        f.dotc(psi) * plane
                    })
                    .collect();
                out[s.index()] = pairwise_reduce(&terms, ZERO);
            }
            out
        })
        .collect()
}

/// Expansion of the initial packet in positive-energy Volkov states at t_in.
pub fn expansion_coefficients(
    spec: &PacketSpec,
    basis: &VolkovBasis,
    t_in: f64,
    source: CoefficientSource,
    opts: &QuantumOptions,
) -> Result<CoefficientTable> {
    spec.validate()?;
    opts.validate()?;
    let c = basis.c();
    let tail = front_tail_mass(-c * t_in, spec.dq);
    if !(tail < 1e-12) {
        return Err(Error::OverlapViolation { tail_mass: tail, suggested_l: opts.margin.max(5.1) / spec.dq });
    }
    let table = analytic_table(spec, c, t_in, window_breaks(spec, opts), opts);
    match source {
        CoefficientSource::Analytic => Ok(table),
        CoefficientSource::Quadrature => {
            let values = project(spec, basis, t_in, EnergySign::Positive, &table.grid, opts);
            Ok(CoefficientTable { values, source: CoefficientSource::Quadrature, ..table })
        }
    }
}

/// ℓ² norm of the projection of the initial packet onto negative-energy
/// Volkov states, over the p′_z window where it could be supported.
pub fn negative_energy_projection(
    spec: &PacketSpec,
    basis: &VolkovBasis,
    t_in: f64,
    opts: &QuantumOptions,
) -> Result<f64> {
    spec.validate()?;
    let mirror = PacketSpec { p: [-spec.p[0], -spec.p[1], -spec.p[2]], ..*spec };
    let grid = Grid1D::gauss_panels(&window_breaks(&mirror, opts), opts.gl_order);
    let values = project(spec, basis, t_in, EnergySign::Negative, &grid, opts);
    let terms: Vec<f64> =
        values.iter().zip(&grid.weights).map(|(v, w)| w * (v[0].norm_sqr() + v[1].norm_sqr())).collect();
    Ok(pairwise_sum(&terms).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Representation {
    Coordinate,
    Momentum,
}

#[derive(Debug, Clone)]
pub struct WaveFunctionSample {
    pub representation: Representation,
    /// z nodes, or kinetic p_z nodes in the momentum representation.
    pub grid: Grid1D,
    pub values: Vec<Bispinor>,
    pub t: f64,
    /// Vector potential over the packet when it is constant there.
    pub a_at_packet: Option<f64>,
    pub p_x: f64,
    pub p_y: f64,
    pub c: f64,
    /// Estimated packet mass inside the pulse support.
    pub field_overlap: f64,
    pub tail_mass: f64,
    pub z_classical: f64,
}

impl WaveFunctionSample {
    pub fn density(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.norm_squared()).collect()
    }

    pub fn norm(&self) -> f64 {
        self.grid.integrate(&self.density())
    }

    /// Kinetic momentum per node divided by c; momentum representation only.
    pub fn kinetic_pi(&self, j: usize) -> Vector3<f64> {
        let a = self.a_at_packet.unwrap_or(0.0);
        Vector3::new(self.p_x + a / self.c, self.p_y, self.grid.nodes[j]) / self.c
    }

    /// Columnar dump: `#` header lines, then the grid value and eight
    /// decimals (re, im of each component) per row.
    pub fn write_columns(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "# wave_function_sample")?;
        writeln!(w, "# representation = {:?}", self.representation)?;
        writeln!(w, "# t = {:.17e}", self.t)?;
        writeln!(w, "# p_x = {:.17e}", self.p_x)?;
        writeln!(w, "# p_y = {:.17e}", self.p_y)?;
        match self.a_at_packet {
            Some(a) => writeln!(w, "# a_at_packet = {a:.17e}")?,
            None => writeln!(w, "# a_at_packet = none")?,
        }
        writeln!(w, "# columns = x weight re0 im0 re1 im1 re2 im2 re3 im3")?;
        for ((x, wt), v) in self.grid.nodes.iter().zip(&self.grid.weights).zip(&self.values) {
            write!(w, "{x:.17e} {wt:.17e}")?;
            for k in 0..4 {
                write!(w, " {:.17e} {:.17e}", v[k].re, v[k].im)?;
            }
            writeln!(w)?;
        }
        Ok(())
    }
}

struct PacketPosition {
    z: f64,
    width: f64,
    overlap: f64,
    region: Region,
}

#[derive(Clone, Copy, PartialEq)]
enum Region {
    Before,
    After,
    Inside,
}

fn locate(coeffs: &CoefficientTable, basis: &VolkovBasis, t: f64, opts: &QuantumOptions) -> Result<PacketPosition> {
    let c = basis.c();
    let start = ClassicalState::new(coeffs.t_in, 0.0, coeffs.spec.p, c);
    let z = integrate_motion(&start, &basis.pulse, t, &opts.ode)?.last().z;
    let width = 1.0 / coeffs.spec.dq + coeffs.spec.dq * (t - coeffs.t_in).abs();
    // pulse occupies z ∈ [ct − ξ_max, ct]
    let front = c * t;
    let rear = c * t - basis.pulse.xi_max();
    let overlap = if basis.pulse.is_empty() {
        0.0
    } else {
        0.5 * (libm::erf((front - z) / width) - libm::erf((rear - z) / width)).abs()
    };
    let region = if basis.pulse.is_empty() || (overlap < opts.tail_tol && z > front) {
        Region::Before
    } else if overlap < opts.tail_tol && z < rear {
        Region::After
    } else {
        Region::Inside
    };
    Ok(PacketPosition { z, width, overlap, region })
}

fn regrid(coeffs: &CoefficientTable, basis: &VolkovBasis, t: f64, z_lo: f64, z_hi: f64, opts: &QuantumOptions) -> Result<CoefficientTable> {
    if coeffs.source != CoefficientSource::Analytic {
        return Ok(coeffs.clone());
    }
    let c = basis.c();
    let ends: Vec<(f64, f64, f64, f64)> = [z_lo, z_hi]
        .iter()
        .map(|&z| {
            let xi = c * t - z;
            let (i1, i2) = basis.phases.at(&basis.pulse, xi);
            (z, i1, i2, 0.0)
        })
        .collect();
    let phase = |pz: f64, e: &(f64, f64, f64, f64)| {
        let p = coeffs.momentum(pz);
        let h = light_front_energy(&p, c);
        pz * e.0 - energy(&p, c) * (t - coeffs.t_in) - (p[0] * e.1 + e.2 / (2.0 * c)) / h
    };
    let advance = |a: f64, b: f64| {
        let m = 0.5 * (a + b);
        ends.iter()
            .map(|e| (phase(m, e) - phase(a, e)).abs() + (phase(b, e) - phase(m, e)).abs())
            .fold(0.0, f64::max)
    };
    let lo = coeffs.breaks[0];
    let hi = *coeffs.breaks.last().unwrap();
    let breaks = phase_bounded_panels(lo, hi, opts.min_panels, opts.phase_rate_bound, opts.max_panels, advance)
        .map_err(|_| Error::GridTooCoarse { norm_error: f64::NAN })?;
    Ok(analytic_table(&coeffs.spec, c, coeffs.t_in, breaks, opts))
}

fn coordinate_values(coeffs: &CoefficientTable, basis: &VolkovBasis, t: f64, zs: &[f64]) -> Vec<Bispinor> {
    let c = basis.c();
    struct Node {
        pz: f64,
        eps: f64,
        h: f64,
        spinor: Bispinor,
        p: Vector3<f64>,
    }
    let mut nodes = Vec::new();
    for ((&pz, &w), v) in coeffs.grid.nodes.iter().zip(&coeffs.grid.weights).zip(&coeffs.values) {
        let p = coeffs.momentum(pz);
        let mut spinor = Bispinor::zeros();
        for s in SpinLabel::BOTH {
            if v[s.index()] != ZERO {
                spinor += bispinor_u(&p, s, c) * (v[s.index()] * w);
            }
        }
        nodes.push(Node { pz, eps: energy(&p, c), h: light_front_energy(&p, c), spinor, p });
    }
    let norm = (2.0 * PI).sqrt().recip();
    zs.par_iter()
        .map(|&z| {
            let xi = c * t - z;
            let (i1, i2) = basis.phases.at(&basis.pulse, xi);
            let a = basis.pulse.potential(xi);
            let terms: Vec<Bispinor> = nodes
                .iter()
                .map(|n| {
                    let phase = n.pz * z - n.eps * t - (n.p[0] * i1 + i2 / (2.0 * c)) / n.h;
                    let m = basis.spinor_factor(&n.p, a);
                    (m * n.spinor) * Complex64::from_polar(norm, phase)
                })
                .collect();
            pairwise_reduce(&terms, Bispinor::zeros())
        })
        .collect()
}

/// Wave function at time t from the positive-energy Volkov superposition.
pub fn propagate(
    coeffs: &CoefficientTable,
    t: f64,
    basis: &VolkovBasis,
    representation: Representation,
    opts: &QuantumOptions,
) -> Result<WaveFunctionSample> {
    let c = basis.c();
    let pos = locate(coeffs, basis, t, opts)?;
    let a_at_packet = match pos.region {
        Region::Before => Some(0.0),
        Region::After => Some(basis.pulse.a0()),
        Region::Inside => None,
    };
    let mut sample = WaveFunctionSample {
        representation,
        grid: Grid1D { nodes: vec![], weights: vec![], kind: crate::numerics::GridKind::Uniform },
        values: vec![],
        t,
        a_at_packet,
        p_x: coeffs.p_x,
        p_y: coeffs.p_y,
        c,
        field_overlap: pos.overlap,
        tail_mass: 0.0,
        z_classical: pos.z,
    };
    match representation {
        Representation::Momentum => {
            let a = a_at_packet.ok_or(Error::FieldNotConstant { overlap: pos.overlap })?;
            let mut nodes = Vec::with_capacity(coeffs.grid.len());
            let mut weights = Vec::with_capacity(coeffs.grid.len());
            let mut values = Vec::with_capacity(coeffs.grid.len());
            for ((&pz, &w), v) in coeffs.grid.nodes.iter().zip(&coeffs.grid.weights).zip(&coeffs.values) {
                let p = coeffs.momentum(pz);
                let h = light_front_energy(&p, c);
                let kappa = (p[0] * a + a * a / (2.0 * c)) / h;
                let jac = 1.0 + kappa * c / energy(&p, c);
                // amplitude of e^{i(p′+κ)z}, read off at z = 0 with 𝒜 continued as constant
                let xi = c * t;
                let (i1, i2) = if pos.region == Region::Before {
                    (0.0, 0.0)
                } else {
                    basis.phases.at(&basis.pulse, xi.max(basis.pulse.xi_max()))
                };
                let shift = if pos.region == Region::After { xi - xi.max(basis.pulse.xi_max()) } else { 0.0 };
                let (i1, i2) = (i1 + a * shift, i2 + a * a * shift);
                let phase = -energy(&p, c) * t - (p[0] * i1 + i2 / (2.0 * c)) / h;
                let m = basis.spinor_factor(&p, a);
                let mut spinor = Bispinor::zeros();
                for s in SpinLabel::BOTH {
                    if v[s.index()] != ZERO {
                        spinor += (m * bispinor_u(&p, s, c)) * v[s.index()];
                    }
                }
                nodes.push(pz + kappa);
                weights.push(w * jac);
                values.push(spinor * Complex64::from_polar(1.0 / jac, phase));
            }
            sample.grid = Grid1D { nodes, weights, kind: crate::numerics::GridKind::GaussPanels };
            sample.values = values;
        }
        Representation::Coordinate => {
            let lo = coeffs.breaks[0];
            let hi = *coeffs.breaks.last().unwrap();
            let a = a_at_packet.unwrap_or(basis.pulse.a0());
            let band = |pz: f64| {
                let p = coeffs.momentum(pz);
                pz + (p[0] * a + a * a / (2.0 * c)) / light_front_energy(&p, c)
            };
            let bandwidth = (band(hi) - band(lo)).abs().max(hi - lo);
            let mut half = opts.margin * pos.width;
            loop {
                let h = (PI / bandwidth).min(2.0 * half / 64.0);
                let n = (2.0 * half / h).ceil() as usize + 1;
                let grid = Grid1D::uniform(pos.z - half, pos.z + half, n);
                let table = regrid(coeffs, basis, t, pos.z - half, pos.z + half, opts)?;
                let values = coordinate_values(&table, basis, t, &grid.nodes);
                let dens: Vec<f64> = values.iter().map(|v| v.norm_squared()).collect();
                let total = grid.integrate(&dens);
                let edge = 0.9 * half;
                let outer: Vec<f64> = grid
                    .nodes
                    .iter()
                    .zip(&grid.weights)
                    .zip(&dens)
                    .map(|((&z, &w), &d)| if (z - pos.z).abs() > edge { w * d } else { 0.0 })
                    .collect();
                let tail = pairwise_sum(&outer) / total;
                if tail < opts.tail_tol {
                    sample.grid = grid;
                    sample.values = values;
                    sample.tail_mass = tail;
                    break;
                }
                half *= 1.5;
                if half > opts.max_box_growth * opts.margin * pos.width {
                    return Err(Error::BoxTooSmall { tail_mass: tail, half_width: half });
                }
            }
        }
    }
    let norm_error = (sample.norm() - 1.0).abs();
    if !(norm_error <= opts.norm_tol) {
        return Err(Error::GridTooCoarse { norm_error });
    }
    Ok(sample)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Kinematics {
    pub norm: f64,
    pub z_mean: Option<f64>,
    pub pz_mean: Option<f64>,
}

/// Norm, and ⟨z⟩ or ⟨p_z⟩ depending on the sample's representation.
pub fn observables_kinematic(sample: &WaveFunctionSample) -> Kinematics {
    let dens = sample.density();
    let norm = sample.grid.integrate(&dens);
    let first: Vec<f64> = dens.iter().zip(&sample.grid.nodes).map(|(d, x)| d * x).collect();
    let mean = sample.grid.integrate(&first) / norm;
    match sample.representation {
        Representation::Coordinate => Kinematics { norm, z_mean: Some(mean), pz_mean: None },
        Representation::Momentum => Kinematics { norm, z_mean: None, pz_mean: Some(mean) },
    }
}
