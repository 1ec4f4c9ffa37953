//! Relativistic spin operators and their expectation values on wave-function
//! samples.

use std::fmt;
use std::str::FromStr;

use nalgebra::Vector3;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{alpha, beta, cross, expectation, sigma, Bispinor, Mat4, I};
use crate::dirac::{Representation, WaveFunctionSample};
use crate::error::{Error, Result};
use crate::numerics::pairwise_sum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SpinOperatorKind {
    Pauli,
    Fw,
    Frenkel,
    Pryce,
    BoostRestFrame,
}

impl SpinOperatorKind {
    pub const ALL: [SpinOperatorKind; 5] = [
        SpinOperatorKind::Pauli,
        SpinOperatorKind::Fw,
        SpinOperatorKind::Frenkel,
        SpinOperatorKind::Pryce,
        SpinOperatorKind::BoostRestFrame,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SpinOperatorKind::Pauli => "PAULI",
            SpinOperatorKind::Fw => "FW",
            SpinOperatorKind::Frenkel => "FRENKEL",
            SpinOperatorKind::Pryce => "PRYCE",
            SpinOperatorKind::BoostRestFrame => "BOOST_REST_FRAME",
        }
    }
}

impl fmt::Display for SpinOperatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SpinOperatorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_uppercase().replace('-', "_");
        Self::ALL
            .into_iter()
            .find(|k| k.name() == key || (key == "BOOST" && *k == SpinOperatorKind::BoostRestFrame))
            .ok_or_else(|| Error::Config(format!("unknown spin operator '{s}' (expected PAULI, FW, FRENKEL, PRYCE or BOOST_REST_FRAME)")))
    }
}

/// The three Cartesian components of a spin operator at kinetic momentum
/// π = p/c (dimensionless).
pub fn spin_matrix(kind: SpinOperatorKind, pi: &Vector3<f64>) -> Result<[Mat4; 3]> {
    let s = sigma();
    let half = Complex64::from(0.5);
    let pauli = s.map(|m| m * half);
    match kind {
        SpinOperatorKind::Pauli => Ok(pauli),
        SpinOperatorKind::Fw => {
            let pi2 = pi.norm_squared();
            let g = (1.0 + pi2).sqrt();
            let b = beta();
            let pxa = cross(pi, &alpha());
            let pdots = crate::algebra::dot(&s, pi);
            let k2 = Complex64::from(1.0 / (2.0 * g * (g + 1.0)));
            Ok(std::array::from_fn(|k| {
                pauli[k] + b * pxa[k] * (I / (2.0 * g))
                    - (s[k] * Complex64::from(pi2) - pdots * Complex64::from(pi[k])) * k2
            }))
        }
        SpinOperatorKind::Frenkel => {
            let b = beta();
            let pxa = cross(pi, &alpha());
            Ok(std::array::from_fn(|k| pauli[k] + b * pxa[k] * (I * 0.5)))
        }
        SpinOperatorKind::Pryce => {
            let pi2 = pi.norm_squared();
            if pi2 == 0.0 {
                return Err(Error::ZeroMomentum);
            }
            let b = beta();
            let pdots = crate::algebra::dot(&s, pi);
            let proj = pdots * (Mat4::identity() - b);
            Ok(std::array::from_fn(|k| b * s[k] * half + proj * Complex64::from(0.5 * pi[k] / pi2)))
        }
        SpinOperatorKind::BoostRestFrame => Err(Error::NoMatrixForm),
    }
}

fn require_constant_momentum(sample: &WaveFunctionSample) -> Result<()> {
    if sample.representation != Representation::Momentum {
        return Err(Error::RepresentationMismatch("operator requires the momentum representation".into()));
    }
    if sample.a_at_packet.is_none() {
        return Err(Error::FieldNotConstant { overlap: sample.field_overlap });
    }
    Ok(())
}

fn weighted_mean(sample: &WaveFunctionSample, per_node: impl Fn(usize, &Bispinor) -> Result<Vector3<f64>>) -> Result<Vector3<f64>> {
    let n = sample.grid.len();
    let mut cols = [Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n)];
    let mut dens = Vec::with_capacity(n);
    for (j, (psi, w)) in sample.values.iter().zip(&sample.grid.weights).enumerate() {
        let v = per_node(j, psi)?;
        for k in 0..3 {
            cols[k].push(w * v[k]);
        }
        dens.push(w * psi.norm_squared());
    }
    let norm = pairwise_sum(&dens);
    Ok(Vector3::new(pairwise_sum(&cols[0]), pairwise_sum(&cols[1]), pairwise_sum(&cols[2])) / norm)
}

/// Normalized mean spin ⟨ψ|ŝ|ψ⟩/⟨ψ|ψ⟩ for one operator kind.
pub fn mean_spin(sample: &WaveFunctionSample, kind: SpinOperatorKind) -> Result<Vector3<f64>> {
    match kind {
        SpinOperatorKind::Pauli => {
            let m = spin_matrix(kind, &Vector3::zeros())?;
            weighted_mean(sample, |_, psi| Ok(Vector3::from_fn(|k, _| expectation(&m[k], psi).re)))
        }
        SpinOperatorKind::BoostRestFrame => rest_frame_spin(sample),
        _ => {
            require_constant_momentum(sample)?;
            weighted_mean(sample, |j, psi| {
                let m = spin_matrix(kind, &sample.kinetic_pi(j))?;
                Ok(Vector3::from_fn(|k, _| expectation(&m[k], psi).re))
            })
        }
    }
}

/// Pauli spin of each momentum component after the boost to its rest
/// frame, renormalized per node and weighted by the node probability.
pub fn rest_frame_spin(sample: &WaveFunctionSample) -> Result<Vector3<f64>> {
    require_constant_momentum(sample)?;
    let s = sigma();
    let a = alpha();
    weighted_mean(sample, |j, psi| {
        let pi = sample.kinetic_pi(j);
        let g = (1.0 + pi.norm_squared()).sqrt();
        let inv = (Mat4::identity() * Complex64::from(1.0 + g) - crate::algebra::dot(&a, &pi))
            * Complex64::from((2.0 * (1.0 + g)).sqrt().recip());
        let phi = inv * psi;
        let n = phi.norm_squared();
        if n == 0.0 {
            return Ok(Vector3::zeros());
        }
        Ok(Vector3::from_fn(|k, _| 0.5 * expectation(&s[k], &phi).re / n) * psi.norm_squared())
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Helicity {
    pub value: f64,
    /// Probability carried by nodes with π = 0, which have no direction.
    pub excluded_weight: f64,
}

/// ⟨Σ·π/(2|π|)⟩ over nodes with nonzero kinetic momentum.
pub fn helicity_mean(sample: &WaveFunctionSample) -> Result<Helicity> {
    projected_helicity(sample, SpinOperatorKind::Pauli)
}

/// Expectation of ŝ_kind·π̂, the helicity as seen by one operator kind.
pub fn projected_helicity(sample: &WaveFunctionSample, kind: SpinOperatorKind) -> Result<Helicity> {
    require_constant_momentum(sample)?;
    let s = sigma();
    let mut num = Vec::with_capacity(sample.grid.len());
    let mut den = Vec::with_capacity(sample.grid.len());
    let mut excluded = Vec::new();
    for (j, (psi, w)) in sample.values.iter().zip(&sample.grid.weights).enumerate() {
        let pi = sample.kinetic_pi(j);
        let d = w * psi.norm_squared();
        den.push(d);
        let len = pi.norm();
        if len == 0.0 {
            excluded.push(d);
            continue;
        }
        let dir = pi / len;
        let value = match kind {
            SpinOperatorKind::BoostRestFrame => return Err(Error::NoMatrixForm),
            SpinOperatorKind::Pauli => 0.5 * expectation(&crate::algebra::dot(&s, &dir), psi).re,
            _ => {
                let m = spin_matrix(kind, &pi)?;
                expectation(&crate::algebra::dot(&m, &dir), psi).re
            }
        };
        num.push(w * value);
    }
    let norm = pairwise_sum(&den);
    Ok(Helicity { value: pairwise_sum(&num) / norm, excluded_weight: pairwise_sum(&excluded) / norm })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpinReport {
    pub operator: SpinOperatorKind,
    pub s_in: [f64; 3],
    pub s_out: [f64; 3],
    pub ds: [f64; 3],
    pub helicity: f64,
    pub norm: f64,
    pub z_mean: Option<f64>,
    pub pz_mean: Option<f64>,
    pub t_in: f64,
    pub t_out: f64,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{commutator, free_hamiltonian, norm};

    #[test]
    fn fw_at_rest_is_pauli() {
        let fw = spin_matrix(SpinOperatorKind::Fw, &Vector3::zeros()).unwrap();
        let p = spin_matrix(SpinOperatorKind::Pauli, &Vector3::zeros()).unwrap();
        for k in 0..3 {
            assert!(norm(&(fw[k] - p[k])) < 1e-16);
        }
    }

    #[test]
    fn frenkel_z_component_for_x_momentum() {
        let a = 0.3;
        let f = spin_matrix(SpinOperatorKind::Frenkel, &Vector3::new(a, 0.0, 0.0)).unwrap();
        let expect = sigma()[2] * Complex64::from(0.5) + beta() * alpha()[1] * (I * (0.5 * a));
        assert!(norm(&(f[2] - expect)) < 1e-15);
    }

    #[test]
    fn pryce_rejects_zero_momentum() {
        assert_eq!(spin_matrix(SpinOperatorKind::Pryce, &Vector3::zeros()).unwrap_err(), Error::ZeroMomentum);
    }

    #[test]
    fn pauli_does_not_commute_with_hamiltonian() {
        let pi = Vector3::new(0.2, -0.1, 0.4);
        let h = free_hamiltonian(&(pi * 137.0), 137.0);
        let m = spin_matrix(SpinOperatorKind::Pauli, &pi).unwrap();
        assert!(norm(&commutator(&m[0], &h)) > 1.0);
    }

    #[test]
    fn parse_names() {
        assert_eq!("fw".parse::<SpinOperatorKind>().unwrap(), SpinOperatorKind::Fw);
        assert_eq!("boost".parse::<SpinOperatorKind>().unwrap(), SpinOperatorKind::BoostRestFrame);
        assert!("czachor".parse::<SpinOperatorKind>().is_err());
    }
}
