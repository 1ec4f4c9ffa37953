use nalgebra::Vector3;
use num_complex::Complex64;
use proptest::prelude::*;
use volkov_spin::algebra::{free_hamiltonian, Bispinor, Mat4};
use volkov_spin::dirac::packet::initial_packet;
use volkov_spin::dirac::*;
use volkov_spin::numerics::finite_difference_residual;
use volkov_spin::pulse::{Pulse, PulseParams, SPEED_OF_LIGHT as CL};
use volkov_spin::Error;

fn basis(e_star: f64, omega: f64, n_c: f64) -> VolkovBasis {
    VolkovBasis::new(Pulse::new(PulseParams::new(e_star, omega, n_c)).unwrap())
}

proptest! {
    #[test]
    fn bispinors_orthonormal_and_complete(px in -80.0..80.0f64, py in -80.0..80.0f64, pz in -80.0..80.0f64) {
        let p = Vector3::new(px, py, pz);
        let set = [
            bispinor_u(&p, SpinLabel::Up, CL),
            bispinor_u(&p, SpinLabel::Down, CL),
            bispinor_v(&p, SpinLabel::Up, CL),
            bispinor_v(&p, SpinLabel::Down, CL),
        ];
        for i in 0..4 {
            for j in 0..4 {
                let g = set[i].dotc(&set[j]);
                let e = if i == j { 1.0 } else { 0.0 };
                prop_assert!((g - Complex64::from(e)).norm() < 1e-13);
            }
        }
        let mut sum = Mat4::zeros();
        for b in &set {
            sum += b * b.adjoint();
        }
        prop_assert!((sum - Mat4::identity()).norm() < 1e-13);
        let h = free_hamiltonian(&p, CL);
        let eps = energy(&p, CL);
        for (k, b) in set.iter().enumerate() {
            let sign = if k < 2 { 1.0 } else { -1.0 };
            prop_assert!((h * b - b * Complex64::from(sign * eps)).norm() < 1e-10 * eps);
        }
    }
}

fn residual(b: &VolkovBasis, sampler: &VolkovBasis, zeta: EnergySign, p: Vector3<f64>, s: SpinLabel, t0: f64, z0: f64) -> f64 {
    volkov_residual(b, sampler, zeta, &p, s, t0, z0, 1e-3).unwrap()
}

#[test]
fn free_plane_wave_residual() {
    let b = basis(0.0, 1.0, 0.5);
    let r = residual(&b, &b, EnergySign::Positive, Vector3::new(0.5, 0.0, 3.0), SpinLabel::Up, 1.0, 0.0);
    assert!(r < 1e-8, "{r}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]
    #[test]
    fn volkov_residual_inside_pulse(
        px in -5.0..5.0f64,
        py in -5.0..5.0f64,
        pz in -20.0..80.0f64,
        up in any::<bool>(),
        positive in any::<bool>(),
        frac in 0.05..0.95f64,
    ) {
        let b = basis(10.0, 1.0, 0.5);
        let c = b.c();
        let s = if up { SpinLabel::Up } else { SpinLabel::Down };
        let zeta = if positive { EnergySign::Positive } else { EnergySign::Negative };
        let t0 = 2.0;
        let z0 = c * t0 - frac * b.pulse.xi_max();
        let r = residual(&b, &b, zeta, Vector3::new(px, py, pz), s, t0, z0);
        prop_assert!(r < 1e-6, "residual {}", r);
    }
}

#[test]
fn wrong_potential_sign_is_detected() {
    let b = basis(10.0, 1.0, 0.5);
    let wrong = VolkovBasis::new(b.pulse.with_a_sign(1.0));
    let c = b.c();
    let z0 = 2.0 * c - 0.5 * b.pulse.xi_max();
    let good = residual(&b, &b, EnergySign::Positive, Vector3::zeros(), SpinLabel::Up, 2.0, z0);
    let bad = residual(&b, &wrong, EnergySign::Positive, Vector3::zeros(), SpinLabel::Up, 2.0, z0);
    assert!(good < 1e-6, "{good}");
    assert!(bad > 1e-2, "{bad}");
}

#[test]
fn grid_too_small_is_reported() {
    let samples = vec![vec![Bispinor::zeros(); 3]; 7];
    let err = finite_difference_residual(&samples, 0.0, 1.0, 0.0, 1.0, 1.0, |_, _, p, _| *p).unwrap_err();
    assert!(matches!(err, Error::GridTooSmall { .. }));
}

#[test]
fn phase_integrals_outside_and_beyond() {
    let b = basis(10.0, 1.0, 1.0);
    assert_eq!(volkov_phase_integrals(-3.0, &b.pulse), (0.0, 0.0));
    let xm = b.pulse.xi_max();
    let (i1, i2) = volkov_phase_integrals(xm, &b.pulse);
    let (j1, j2) = volkov_phase_integrals(xm + 250.0, &b.pulse);
    assert!((j1 - i1).abs() < 1e-9 * i1.abs().max(1.0));
    assert!((j2 - i2).abs() < 1e-9 * i2.abs());
    // N_c = 1: ∫𝒜 dξ over the support is −(3π/4)E*c²/ω²
    let exact = -0.75 * std::f64::consts::PI * 10.0 * CL * CL;
    assert!((i1 - exact).abs() < 1e-12 * exact.abs(), "{i1}");
}

#[test]
fn expansion_paths_agree() {
    let opts = QuantumOptions::default();
    for (p, e) in [([0.0, 0.0, 0.0], 10.0), ([1.0, 0.0, 14.0], 10.0), ([0.0, 0.0, 70.0], 0.0)] {
        let b = basis(e, 1.0, 0.5);
        let spec = PacketSpec::new(p, SpinLabel::Up, 0.05);
        let geo = Geometry::resolve(&b.pulse, &spec, &opts).unwrap();
        let a = expansion_coefficients(&spec, &b, geo.t_in, CoefficientSource::Analytic, &opts).unwrap();
        let q = expansion_coefficients(&spec, &b, geo.t_in, CoefficientSource::Quadrature, &opts).unwrap();
        assert!((a.norm() - 1.0).abs() < 1e-10);
        assert!(a.distance(&q) < 1e-8, "{}", a.distance(&q));
        let opposite: f64 = q.values.iter().zip(&q.grid.weights).map(|(v, w)| w * v[1].norm_sqr()).sum();
        assert!(opposite.sqrt() < 1e-8);
        let neg = negative_energy_projection(&spec, &b, geo.t_in, &opts).unwrap();
        assert!(neg < 1e-12, "{neg}");
    }
}

#[test]
fn overlap_is_rejected() {
    let b = basis(10.0, 1.0, 0.5);
    let spec = PacketSpec::new([0.0; 3], SpinLabel::Up, 0.01);
    let err = expansion_coefficients(&spec, &b, -100.0 / b.c(), CoefficientSource::Analytic, &QuantumOptions::default())
        .unwrap_err();
    assert!(matches!(err, Error::OverlapViolation { .. }));
}

#[test]
fn identity_evolution_reproduces_initial_packet() {
    let opts = QuantumOptions::default();
    let b = basis(10.0, 1.0, 0.5);
    let spec = PacketSpec::new([0.0, 0.0, 14.0], SpinLabel::Up, 0.05);
    let geo = Geometry::resolve(&b.pulse, &spec, &opts).unwrap();
    let coeffs = expansion_coefficients(&spec, &b, geo.t_in, CoefficientSource::Analytic, &opts).unwrap();
    let sample = propagate(&coeffs, geo.t_in, &b, Representation::Coordinate, &opts).unwrap();
    let direct = initial_packet(&spec, b.c(), &sample.grid.nodes, &opts);
    let err: f64 = sample
        .values
        .iter()
        .zip(&direct)
        .zip(&sample.grid.weights)
        .map(|((a, d), w)| w * (a - d).norm_squared())
        .sum::<f64>()
        .sqrt();
    assert!(err < 1e-8, "{err}");
    let k = observables_kinematic(&sample);
    assert!((k.norm - 1.0).abs() < 1e-8);
    assert!(k.z_mean.unwrap().abs() < 1e-8);
    let m = propagate(&coeffs, geo.t_in, &b, Representation::Momentum, &opts).unwrap();
    assert!((observables_kinematic(&m).pz_mean.unwrap() - 14.0).abs() < 1e-8);
}

#[test]
fn free_dispersion_follows_group_velocity() {
    let opts = QuantumOptions::default();
    let b = basis(0.0, 1.0, 0.5);
    let spec = PacketSpec::new([0.0, 0.0, 14.0], SpinLabel::Up, 0.05);
    let geo = Geometry::resolve(&b.pulse, &spec, &opts).unwrap();
    let coeffs = expansion_coefficients(&spec, &b, geo.t_in, CoefficientSource::Analytic, &opts).unwrap();
    let t = geo.t_in + 300.0;
    let sample = propagate(&coeffs, t, &b, Representation::Coordinate, &opts).unwrap();
    let z = observables_kinematic(&sample).z_mean.unwrap();
    let eps = energy(&Vector3::new(0.0, 0.0, 14.0), CL);
    let expect = CL * CL * 14.0 / eps * 300.0;
    assert!((z - expect).abs() < 1e-4 * expect, "{z} vs {expect}");
}

#[test]
fn post_pulse_momentum_shift() {
    let opts = QuantumOptions::default();
    let b = basis(10.0, 1.0, 0.5);
    let spec = PacketSpec::new([0.0; 3], SpinLabel::Up, 0.01);
    let geo = Geometry::resolve(&b.pulse, &spec, &opts).unwrap();
    let coeffs = expansion_coefficients(&spec, &b, geo.t_in, CoefficientSource::Analytic, &opts).unwrap();
    let m = propagate(&coeffs, geo.t_out, &b, Representation::Momentum, &opts).unwrap();
    assert_eq!(m.a_at_packet, Some(b.pulse.a0()));
    let dpz = observables_kinematic(&m).pz_mean.unwrap();
    let est = volkov_spin::classical::delta_pz_estimate(0.0, b.pulse.area(), CL);
    assert!((dpz - est).abs() < 1e-3 * est, "{dpz} vs {est}");
    let x = propagate(&coeffs, geo.t_out, &b, Representation::Coordinate, &opts).unwrap();
    let k = observables_kinematic(&x);
    assert!((k.norm - 1.0).abs() < 1e-8, "{}", k.norm);
    let zc = x.z_classical;
    assert!((k.z_mean.unwrap() - zc).abs() < 1e-4 * zc.abs(), "{} vs {zc}", k.z_mean.unwrap());
}

#[test]
fn momentum_sample_refused_inside_pulse() {
    let opts = QuantumOptions::default();
    let b = basis(10.0, 1.0, 0.5);
    let spec = PacketSpec::new([0.0; 3], SpinLabel::Up, 0.01);
    let geo = Geometry::resolve(&b.pulse, &spec, &opts).unwrap();
    let coeffs = expansion_coefficients(&spec, &b, geo.t_in, CoefficientSource::Analytic, &opts).unwrap();
    let t = geo.t_in + (geo.l + 0.5 * b.pulse.xi_max()) / b.c();
    let err = propagate(&coeffs, t, &b, Representation::Momentum, &opts).unwrap_err();
    assert!(matches!(err, Error::FieldNotConstant { .. }));
}
