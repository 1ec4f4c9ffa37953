//! One parameter point through the classical and quantum pipelines.

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};

use crate::algebra::expectation;
use crate::classical::{
    analytic_spin_change, integrate, AnalyticModel, AnalyticSpinInput, ClassicalState, OdeOptions, SpinModel,
};
use crate::dirac::{
    bispinor_u, expansion_coefficients, observables_kinematic, propagate, CoefficientSource, Geometry, PacketSpec,
    QuantumOptions, Representation, SpinLabel, VolkovBasis, WaveFunctionSample,
};
use crate::error::Result;
use crate::pulse::Pulse;
use crate::spin::{helicity_mean, mean_spin, spin_matrix, SpinOperatorKind, SpinReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ClassicalModel {
    Larmor,
    Tbmt,
    AnalyticNr,
    AnalyticNrApprox,
    AnalyticRel,
}

impl ClassicalModel {
    pub const ALL: [ClassicalModel; 5] = [
        ClassicalModel::Larmor,
        ClassicalModel::Tbmt,
        ClassicalModel::AnalyticNr,
        ClassicalModel::AnalyticNrApprox,
        ClassicalModel::AnalyticRel,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ClassicalModel::Larmor => "LARMOR",
            ClassicalModel::Tbmt => "TBMT",
            ClassicalModel::AnalyticNr => "ANALYTIC_NR",
            ClassicalModel::AnalyticNrApprox => "ANALYTIC_NR_APPROX",
            ClassicalModel::AnalyticRel => "ANALYTIC_REL",
        }
    }
}

/// FW spin of the free bispinor u(p, s), used as the classical initial spin.
pub fn initial_spin(p: [f64; 3], s: SpinLabel, c: f64) -> [f64; 3] {
    let pv = Vector3::from(p);
    let u = bispinor_u(&pv, s, c);
    let m = spin_matrix(SpinOperatorKind::Fw, &(pv / c)).expect("FW is defined at every momentum");
    [0, 1, 2].map(|k| expectation(&m[k], &u).re)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassicalOutcome {
    /// Δs per requested model, in the order requested.
    pub ds: Vec<(ClassicalModel, [f64; 3])>,
    pub theta0: f64,
    pub delta_pz: f64,
    pub u_final: [f64; 3],
    pub z_final: f64,
    pub max_spin_norm_error: f64,
}

impl ClassicalOutcome {
    pub fn get(&self, model: ClassicalModel) -> Option<[f64; 3]> {
        self.ds.iter().find(|(m, _)| *m == model).map(|(_, d)| *d)
    }
}

pub fn run_classical(
    pulse: &Pulse,
    p: [f64; 3],
    s: SpinLabel,
    models: &[ClassicalModel],
    ode: &OdeOptions,
) -> Result<ClassicalOutcome> {
    let c = pulse.c();
    let s0 = initial_spin(p, s, c);
    let theta0 = s0[0].atan2(s0[2]);
    let t0 = -1.0;
    let start = ClassicalState::with_spin(t0, 0.0, 0.0, p, s0, c);
    let mut out = ClassicalOutcome {
        ds: Vec::new(),
        theta0,
        delta_pz: 0.0,
        u_final: p,
        z_final: 0.0,
        max_spin_norm_error: 0.0,
    };
    let motion = integrate(&start, pulse, f64::INFINITY, None, ode)?;
    out.u_final = motion.last().u;
    out.z_final = motion.last().z;
    out.delta_pz = motion.last().u[2] - p[2];
    for &model in models {
        let ds = match model {
            ClassicalModel::Larmor | ClassicalModel::Tbmt => {
                let sm = if model == ClassicalModel::Larmor { SpinModel::Larmor } else { SpinModel::Tbmt };
                let traj = integrate(&start, pulse, f64::INFINITY, Some(sm), ode)?;
                out.max_spin_norm_error = out.max_spin_norm_error.max(traj.max_spin_norm_error());
                traj.spin_change()
            }
            ClassicalModel::AnalyticNr | ClassicalModel::AnalyticNrApprox | ClassicalModel::AnalyticRel => {
                let am = match model {
                    ClassicalModel::AnalyticNr => AnalyticModel::Nr,
                    ClassicalModel::AnalyticNrApprox => AnalyticModel::NrApprox,
                    _ => AnalyticModel::Rel,
                };
                analytic_spin_change(&AnalyticSpinInput { sigma: pulse.sigma(), theta0, p_z: p[2], model: am, c })
            }
        };
        out.ds.push((model, ds));
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantumOutcome {
    pub geometry: Geometry,
    pub reports: Vec<SpinReport>,
    pub pz_in: f64,
    pub pz_out: f64,
    pub z_out: f64,
    pub z_classical: f64,
    pub helicity_in: f64,
    pub helicity_out: f64,
    pub norm_error: f64,
    pub tail_mass: f64,
    /// max |FW − Pryce| over components, initial and final packets.
    pub fw_pryce: f64,
    /// max |FW − boost rest-frame| over components, initial and final packets.
    pub fw_boost: f64,
}

impl QuantumOutcome {
    pub fn report(&self, kind: SpinOperatorKind) -> Option<&SpinReport> {
        self.reports.iter().find(|r| r.operator == kind)
    }

    pub fn delta_pz(&self) -> f64 {
        self.pz_out - self.pz_in
    }
}

fn spin_in(mom: &WaveFunctionSample, coord: &WaveFunctionSample, kind: SpinOperatorKind) -> Result<[f64; 3]> {
    let sample = if kind == SpinOperatorKind::Pauli { coord } else { mom };
    Ok(mean_spin(sample, kind)?.into())
}

fn max_diff(a: [f64; 3], b: [f64; 3]) -> f64 {
    (0..3).map(|k| (a[k] - b[k]).abs()).fold(0.0, f64::max)
}

/// Expansion at t_in, propagation to t_out, and spin/kinematic observables.
pub fn run_quantum(
    pulse: &Pulse,
    spec: &PacketSpec,
    operators: &[SpinOperatorKind],
    opts: &QuantumOptions,
) -> Result<QuantumOutcome> {
    let basis = VolkovBasis::new(*pulse);
    let geometry = Geometry::resolve(pulse, spec, opts)?;
    let coeffs = expansion_coefficients(spec, &basis, geometry.t_in, CoefficientSource::Analytic, opts)?;
    let m_in = propagate(&coeffs, geometry.t_in, &basis, Representation::Momentum, opts)?;
    let m_out = propagate(&coeffs, geometry.t_out, &basis, Representation::Momentum, opts)?;
    let x_in = propagate(&coeffs, geometry.t_in, &basis, Representation::Coordinate, opts)?;
    let x_out = propagate(&coeffs, geometry.t_out, &basis, Representation::Coordinate, opts)?;
    let k_in = observables_kinematic(&m_in);
    let k_out = observables_kinematic(&m_out);
    let kx_out = observables_kinematic(&x_out);
    let helicity_in = helicity_mean(&m_in)?.value;
    let helicity_out = helicity_mean(&m_out)?.value;

    let mut reports = Vec::with_capacity(operators.len());
    for &kind in operators {
        let s_in = spin_in(&m_in, &x_in, kind)?;
        let s_out = spin_in(&m_out, &x_out, kind)?;
        reports.push(SpinReport {
            operator: kind,
            s_in,
            s_out,
            ds: [s_out[0] - s_in[0], s_out[1] - s_in[1], s_out[2] - s_in[2]],
            helicity: helicity_out,
            norm: k_out.norm,
            z_mean: kx_out.z_mean,
            pz_mean: k_out.pz_mean,
            t_in: geometry.t_in,
            t_out: geometry.t_out,
        });
    }

    let mut fw_pryce = 0.0_f64;
    let mut fw_boost = 0.0_f64;
    for m in [&m_in, &m_out] {
        let fw: [f64; 3] = mean_spin(m, SpinOperatorKind::Fw)?.into();
        let pr: [f64; 3] = mean_spin(m, SpinOperatorKind::Pryce)?.into();
        let bo: [f64; 3] = mean_spin(m, SpinOperatorKind::BoostRestFrame)?.into();
        fw_pryce = fw_pryce.max(max_diff(fw, pr));
        fw_boost = fw_boost.max(max_diff(fw, bo));
    }

    let norm_error = [k_in.norm, k_out.norm, observables_kinematic(&x_in).norm, kx_out.norm]
        .iter()
        .map(|n| (n - 1.0).abs())
        .fold(0.0, f64::max);
    Ok(QuantumOutcome {
        geometry,
        reports,
        pz_in: k_in.pz_mean.unwrap_or(f64::NAN),
        pz_out: k_out.pz_mean.unwrap_or(f64::NAN),
        z_out: kx_out.z_mean.unwrap_or(f64::NAN),
        z_classical: x_out.z_classical,
        helicity_in,
        helicity_out,
        norm_error,
        tail_mass: x_in.tail_mass.max(x_out.tail_mass),
        fw_pryce,
        fw_boost,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulse::PulseParams;

    #[test]
    fn initial_spin_angle_matches_theta0() {
        let c = crate::pulse::SPEED_OF_LIGHT;
        let s = initial_spin([0.0, 0.0, 14.0], SpinLabel::Up, c);
        assert!((s[0].atan2(s[2]) - crate::classical::theta0_of_pz(14.0, c)).abs() < 1e-12);
        assert!((s[0].hypot(s[2]) - 0.5).abs() < 1e-14);
        assert_eq!(s[1], 0.0);
    }

    #[test]
    fn half_cycle_quantum_fw_matches_tbmt() {
        let pulse = Pulse::new(PulseParams::new(10.0, 1.0, 0.5)).unwrap();
        let spec = PacketSpec::new([0.0; 3], SpinLabel::Up, 0.01);
        let q = run_quantum(&pulse, &spec, &SpinOperatorKind::ALL, &QuantumOptions::default()).unwrap();
        let fw = q.report(SpinOperatorKind::Fw).unwrap().ds;
        assert!((fw[0] - 0.048534150081).abs() < 1e-6, "{fw:?}");
        assert!((fw[2] + 0.0023611).abs() < 1e-6, "{fw:?}");
        assert!(q.fw_pryce < 1e-10 && q.fw_boost < 1e-10, "{} {}", q.fw_pryce, q.fw_boost);
        let pauli = q.report(SpinOperatorKind::Pauli).unwrap().ds;
        assert!((pauli[0] - 0.0484198).abs() < 1e-6, "{pauli:?}");
    }
}
