use proptest::prelude::*;
use volkov_spin::classical::*;
use volkov_spin::pulse::{Pulse, PulseParams, SPEED_OF_LIGHT as CL};

fn mono(phi0: f64) -> Monochromatic {
    Monochromatic { e_star: 10.0, omega: 1.0, phi0, c: CL }
}

/// Integrates through `cycles` carrier periods of a monochromatic wave and
/// checks every accepted state against the closed forms at the same τ.
fn check_monochromatic(p_z: f64, phi0: f64, model: SpinModel, cycles: f64) -> f64 {
    let field = mono(phi0);
    let start = ClassicalState::new(0.0, 0.0, [0.0, 0.0, p_z], CL);
    let theta0 = theta0_of_pz(p_z, CL);
    let v = start.velocity()[2];
    let t_end = cycles * 2.0 * std::f64::consts::PI / (1.0 - v / CL);
    let traj = integrate(&start, &field, t_end, Some(model), &OdeOptions::default()).unwrap();
    let analytic = match model {
        SpinModel::Larmor => AnalyticModel::Nr,
        SpinModel::Tbmt => AnalyticModel::Rel,
    };
    let mut worst = 0.0_f64;
    for st in &traj.states {
        let tau = st.t - st.z / CL;
        let (ux, uz, g) = analytic_kinematics(tau, p_z, 10.0, 1.0, phi0, CL);
        worst = worst.max((st.u[0] - ux).abs()).max((st.u[2] - uz).abs() / (1.0 + uz.abs())).max((st.gamma - g).abs());
        let sigma = -st.u[0] / (2.0 * CL);
        let d = analytic_spin_change(&AnalyticSpinInput { sigma, theta0, p_z, model: analytic, c: CL });
        for k in 0..3 {
            worst = worst.max((st.s[k] - start.s[k] - d[k]).abs());
        }
    }
    worst
}

#[test]
fn monochromatic_trajectory_matches_closed_forms() {
    for p_z in [0.0, 14.0, 70.0] {
        for model in [SpinModel::Larmor, SpinModel::Tbmt] {
            let e = check_monochromatic(p_z, 0.0, model, 3.0);
            assert!(e < 1e-6, "p_z = {p_z}, {model:?}: {e}");
        }
    }
}

#[test]
fn carrier_phase_does_not_change_spin_area_relation() {
    for phi0 in [0.7, 2.0, -1.3] {
        let e = check_monochromatic(14.0, phi0, SpinModel::Tbmt, 2.0);
        assert!(e < 1e-6, "phi0 = {phi0}: {e}");
    }
}

#[test]
fn small_area_models_agree_to_third_order() {
    for k in 1..=20 {
        let sigma = 0.005 * k as f64;
        let get = |model| analytic_spin_change(&AnalyticSpinInput { sigma, theta0: 0.0, p_z: 0.0, model, c: CL });
        let ds = [get(AnalyticModel::Nr), get(AnalyticModel::NrApprox), get(AnalyticModel::Rel)];
        for a in &ds {
            for b in &ds {
                assert!((a[0] - b[0]).abs() <= 2.0 * sigma.powi(3));
                assert!((a[2] - b[2]).abs() <= 2.0 * sigma.powi(3));
            }
        }
    }
}

#[test]
fn vertex_of_nr_parabola() {
    let theta0 = theta0_of_pz(14.0, CL);
    let dz = |sigma: f64| {
        analytic_spin_change(&AnalyticSpinInput { sigma, theta0, p_z: 14.0, model: AnalyticModel::NrApprox, c: CL })[2]
    };
    let star = -0.5 * theta0.tan();
    assert!((star + 0.051).abs() < 5e-4);
    assert!(dz(star) > dz(star - 1e-3) && dz(star) > dz(star + 1e-3));
}

#[test]
fn delta_pz_reaches_quoted_values() {
    let pulse = |omega: f64| Pulse::new(PulseParams::new(10.0, omega, 0.58898)).unwrap();
    assert!((delta_pz_estimate(0.0, pulse(1.0).area(), CL) - 0.730).abs() < 1e-3);
    assert!((delta_pz_estimate(0.0, pulse(0.1).area(), CL) - 73.0).abs() < 0.1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn finite_pulse_tbmt_matches_total_area_form(
        n_c in 0.05..2.0f64,
        pz_idx in 0usize..3,
        slow in any::<bool>(),
    ) {
        let p_z = [0.0, 14.0, 70.0][pz_idx];
        let omega = if slow { 0.1 } else { 1.0 };
        let pulse = Pulse::new(PulseParams::new(10.0, omega, n_c)).unwrap();
        let start = ClassicalState::new(-1.0, 0.0, [0.0, 0.0, p_z], CL);
        let traj = integrate(&start, &pulse, f64::INFINITY, Some(SpinModel::Tbmt), &OdeOptions::default()).unwrap();
        prop_assert!(traj.t_exit.is_some());
        prop_assert!(traj.max_spin_norm_error() < 1e-9);
        let ds = traj.spin_change();
        let rel = analytic_spin_change(&AnalyticSpinInput {
            sigma: pulse.sigma(),
            theta0: theta0_of_pz(p_z, CL),
            p_z,
            model: AnalyticModel::Rel,
            c: CL,
        });
        for k in 0..3 {
            prop_assert!((ds[k] - rel[k]).abs() < 1e-3);
        }
        prop_assert!(ds[1].abs() <= 1e-5 * ds[0].abs().max(ds[2].abs()) + 1e-14);
        let last = traj.last();
        prop_assert!((last.u[0] - pulse.a0() / CL).abs() < 1e-7 * (1.0 + pulse.area().abs()));
        let est = delta_pz_estimate(p_z, pulse.area(), CL);
        prop_assert!((last.u[2] - p_z - est).abs() < 1e-6 * (1.0 + est));
    }

    #[test]
    fn larmor_and_tbmt_preserve_spin_length(n_c in 0.1..2.0f64, p_z in -50.0..80.0f64) {
        let pulse = Pulse::new(PulseParams::new(10.0, 1.0, n_c)).unwrap();
        for model in [SpinModel::Larmor, SpinModel::Tbmt] {
            let start = ClassicalState::new(-1.0, 0.0, [0.0, 0.0, p_z], CL);
            let traj = integrate(&start, &pulse, f64::INFINITY, Some(model), &OdeOptions::default()).unwrap();
            prop_assert!(traj.max_spin_norm_error() < 1e-9);
            prop_assert!(traj.states.iter().all(|s| s.u[1] == 0.0 && s.s[1] == 0.0));
        }
    }
}
