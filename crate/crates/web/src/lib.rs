//! Browser bindings: field profiles, the area curve and spin changes.
//!
//! Every export returns a JSON string; the page parses it with `JSON.parse`.

use serde::Serialize;
use volkov_spin::classical::OdeOptions;
use volkov_spin::dirac::{PacketSpec, QuantumOptions, SpinLabel};
use volkov_spin::experiment::{run_classical, run_quantum, ClassicalModel};
use volkov_spin::pulse::{Pulse, PulseParams};
use volkov_spin::spin::SpinOperatorKind;
use wasm_bindgen::prelude::*;

#[derive(Debug, Serialize)]
pub struct FieldProfile {
    /// Carrier phase ωξ/c at each sample.
    pub phase: Vec<f64>,
    pub field: Vec<f64>,
    /// 𝒜(ξ)/c, the transverse momentum kick so far.
    pub potential: Vec<f64>,
    pub area: f64,
    pub sigma: f64,
    pub unipolarity: Option<f64>,
}

fn pulse(e_star: f64, omega: f64, n_c: f64) -> Result<Pulse, String> {
    Pulse::new(PulseParams::new(e_star, omega, n_c)).map_err(|e| e.to_string())
}

pub fn field_profile_data(e_star: f64, omega: f64, n_c: f64, samples: usize) -> Result<FieldProfile, String> {
    let p = pulse(e_star, omega, n_c)?;
    let n = samples.clamp(2, 20_000);
    let c = p.c();
    let xs: Vec<f64> = (0..n).map(|k| p.xi_max() * k as f64 / (n - 1) as f64).collect();
    Ok(FieldProfile {
        phase: xs.iter().map(|x| omega * x / c).collect(),
        field: xs.iter().map(|&x| p.field(x)).collect(),
        potential: xs.iter().map(|&x| p.potential(x) / c).collect(),
        area: p.area(),
        sigma: p.sigma(),
        unipolarity: p.unipolarity().ok(),
    })
}

#[derive(Debug, Serialize)]
pub struct AreaCurve {
    pub n_c: Vec<f64>,
    pub s_e: Vec<f64>,
    pub sigma_e: Vec<f64>,
}

pub fn area_curve_data(e_star: f64, omega: f64, step: f64) -> Result<AreaCurve, String> {
    if !(step >= 1e-3 && step <= 1.0) {
        return Err("step must lie in [0.001, 1]".into());
    }
    let n = (2.0 / step + 1e-9).floor() as usize;
    let mut out = AreaCurve { n_c: Vec::new(), s_e: Vec::new(), sigma_e: Vec::new() };
    for k in 1..=n {
        let p = pulse(e_star, omega, k as f64 * step)?;
        out.n_c.push(k as f64 * step);
        out.s_e.push(p.area());
        out.sigma_e.push(p.sigma());
    }
    Ok(out)
}

#[derive(Debug, Serialize)]
pub struct SpinChange {
    pub theta0: f64,
    pub sigma: f64,
    pub delta_pz: f64,
    /// (name, [Δs_x, Δs_y, Δs_z]) for each classical model.
    pub classical: Vec<(String, [f64; 3])>,
    /// Same for each quantum operator; empty unless requested.
    pub quantum: Vec<(String, [f64; 3])>,
}

pub fn spin_change_data(e_star: f64, omega: f64, n_c: f64, p_z: f64, quantum: bool) -> Result<SpinChange, String> {
    let p = pulse(e_star, omega, n_c)?;
    let cl = run_classical(&p, [0.0, 0.0, p_z], SpinLabel::Up, &ClassicalModel::ALL, &OdeOptions::default())
        .map_err(|e| e.to_string())?;
    let mut out = SpinChange {
        theta0: cl.theta0,
        sigma: p.sigma(),
        delta_pz: cl.delta_pz,
        classical: cl.ds.iter().map(|(m, d)| (m.name().to_string(), *d)).collect(),
        quantum: Vec::new(),
    };
    if quantum {
        let ops = [SpinOperatorKind::Pauli, SpinOperatorKind::Fw, SpinOperatorKind::Frenkel];
        let q = run_quantum(&p, &PacketSpec::new([0.0, 0.0, p_z], SpinLabel::Up, 0.01), &ops, &QuantumOptions::default())
            .map_err(|e| e.to_string())?;
        out.quantum = q.reports.iter().map(|r| (r.operator.name().to_string(), r.ds)).collect();
    }
    Ok(out)
}

fn json<T: Serialize>(r: Result<T, String>) -> Result<String, JsError> {
    r.and_then(|v| serde_json::to_string(&v).map_err(|e| e.to_string())).map_err(|e| JsError::new(&e))
}

/// Field and 𝒜/c over the pulse as `{phase, field, potential, area, sigma, unipolarity}`.
#[wasm_bindgen]
pub fn field_profile(e_star: f64, omega: f64, n_c: f64, samples: usize) -> Result<String, JsError> {
    json(field_profile_data(e_star, omega, n_c, samples))
}

/// S_E and σ_E on the grid N_c = step, 2·step, …, 2.
#[wasm_bindgen]
pub fn area_curve(e_star: f64, omega: f64, step: f64) -> Result<String, JsError> {
    json(area_curve_data(e_star, omega, step))
}

/// Spin change of an electron starting with momentum (0, 0, p_z).
#[wasm_bindgen]
pub fn spin_change(e_star: f64, omega: f64, n_c: f64, p_z: f64, quantum: bool) -> Result<String, JsError> {
    json(spin_change_data(e_star, omega, n_c, p_z, quantum))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_ends_at_the_total_kick() {
        let f = field_profile_data(10.0, 1.0, 0.5, 101).unwrap();
        assert_eq!(f.phase.len(), 101);
        assert!((f.potential[100] + f.area).abs() < 1e-9);
        assert!((f.phase[100] - std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn area_curve_grid() {
        let a = area_curve_data(10.0, 1.0, 0.25).unwrap();
        assert_eq!(a.n_c.len(), 8);
        assert!(area_curve_data(10.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn quantum_fw_tracks_tbmt() {
        let s = spin_change_data(10.0, 1.0, 0.5, 0.0, true).unwrap();
        let tbmt = s.classical.iter().find(|(n, _)| n == "TBMT").unwrap().1;
        let fw = s.quantum.iter().find(|(n, _)| n == "FW").unwrap().1;
        assert!((tbmt[0] - fw[0]).abs() < 1e-6);
    }
}
