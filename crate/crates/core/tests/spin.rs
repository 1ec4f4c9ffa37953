use nalgebra::Vector3;
use num_complex::Complex64;
use proptest::prelude::*;
use volkov_spin::algebra::{commutator, free_hamiltonian, Mat4};
use volkov_spin::classical::theta0_of_pz;
use volkov_spin::dirac::*;
use volkov_spin::pulse::{Pulse, PulseParams, SPEED_OF_LIGHT as CL};
use volkov_spin::spin::*;
use volkov_spin::verify::{spectrum_violation, su2_violation};
use volkov_spin::Error;

fn momentum() -> impl Strategy<Value = Vector3<f64>> {
    (-2.0..2.0f64, -2.0..2.0f64, -2.0..2.0f64).prop_map(|(x, y, z)| Vector3::new(x, y, z))
}

fn hermitian_error(m: &[Mat4; 3]) -> f64 {
    m.iter().map(|a| (a - a.adjoint()).norm()).fold(0.0, f64::max)
}

const KINDS: [SpinOperatorKind; 4] =
    [SpinOperatorKind::Pauli, SpinOperatorKind::Fw, SpinOperatorKind::Frenkel, SpinOperatorKind::Pryce];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn matrices_are_hermitian(pi in momentum()) {
        prop_assume!(pi.norm() > 1e-6);
        for kind in KINDS {
            prop_assert!(hermitian_error(&spin_matrix(kind, &pi).unwrap()) < 1e-15);
        }
    }

    #[test]
    fn relativistic_operators_commute_with_free_hamiltonian(pi in momentum()) {
        prop_assume!(pi.norm() > 1e-6);
        let h = free_hamiltonian(&(pi * CL), CL);
        for kind in [SpinOperatorKind::Fw, SpinOperatorKind::Frenkel, SpinOperatorKind::Pryce] {
            let s = spin_matrix(kind, &pi).unwrap();
            for m in &s {
                prop_assert!(commutator(m, &h).norm() < 1e-12 * CL * CL, "{kind}");
            }
        }
    }

    #[test]
    fn fw_and_pryce_satisfy_su2(pi in momentum()) {
        prop_assume!(pi.norm() > 1e-6);
        for kind in [SpinOperatorKind::Fw, SpinOperatorKind::Pryce] {
            let s = spin_matrix(kind, &pi).unwrap();
            prop_assert!(su2_violation(&s) < 1e-12);
            prop_assert!(spectrum_violation(&s) < 1e-12);
        }
    }

    #[test]
    fn frenkel_is_the_linear_part_of_fw(pi in momentum()) {
        // odd part of FW is iβ(π×α)/(2g); rescaled by g it is ŝ_F − ŝ_P
        let g = (1.0 + pi.norm_squared()).sqrt();
        let plus = spin_matrix(SpinOperatorKind::Fw, &pi).unwrap();
        let minus = spin_matrix(SpinOperatorKind::Fw, &(-pi)).unwrap();
        let f = spin_matrix(SpinOperatorKind::Frenkel, &pi).unwrap();
        let p = spin_matrix(SpinOperatorKind::Pauli, &pi).unwrap();
        for k in 0..3 {
            let odd = (plus[k] - minus[k]) * Complex64::from(0.5 * g);
            prop_assert!((odd - (f[k] - p[k])).norm() < 1e-14);
        }
    }

    #[test]
    fn fw_minus_frenkel_is_second_order(dir in momentum()) {
        prop_assume!(dir.norm() > 1e-3);
        let pi = dir.normalize() * 0.1;
        let fw = spin_matrix(SpinOperatorKind::Fw, &pi).unwrap();
        let fr = spin_matrix(SpinOperatorKind::Frenkel, &pi).unwrap();
        for k in 0..3 {
            prop_assert!((fw[k] - fr[k]).norm() < 0.01);
        }
    }
}

#[test]
fn frenkel_violates_su2_and_spectrum() {
    let s = spin_matrix(SpinOperatorKind::Frenkel, &Vector3::new(0.3, 0.0, 0.4)).unwrap();
    assert!(su2_violation(&s) > 1e-6);
    assert!(spectrum_violation(&s) > 1e-6);
}

#[test]
fn fw_frenkel_gap_scales_quadratically() {
    let dir = Vector3::new(0.6, -0.48, 0.64);
    let gap = |r: f64| {
        let fw = spin_matrix(SpinOperatorKind::Fw, &(dir * r)).unwrap();
        let fr = spin_matrix(SpinOperatorKind::Frenkel, &(dir * r)).unwrap();
        (0..3).map(|k| (fw[k] - fr[k]).norm()).fold(0.0, f64::max)
    };
    let ratio = gap(0.01) / gap(0.001);
    assert!((ratio - 100.0).abs() < 0.1, "{ratio}");
}

struct Packet {
    basis: VolkovBasis,
    coeffs: CoefficientTable,
    geometry: Geometry,
}

fn packet(p: [f64; 3], s: SpinLabel, dq: f64, e_star: f64, n_c: f64) -> Packet {
    let opts = QuantumOptions::default();
    let pulse = Pulse::new(PulseParams::new(e_star, 1.0, n_c)).unwrap();
    let basis = VolkovBasis::new(pulse);
    let spec = PacketSpec::new(p, s, dq);
    let geometry = Geometry::resolve(&pulse, &spec, &opts).unwrap();
    let coeffs = expansion_coefficients(&spec, &basis, geometry.t_in, CoefficientSource::Analytic, &opts).unwrap();
    Packet { basis, coeffs, geometry }
}

impl Packet {
    fn at(&self, t: f64, rep: Representation) -> WaveFunctionSample {
        propagate(&self.coeffs, t, &self.basis, rep, &QuantumOptions::default()).unwrap()
    }

    fn initial(&self) -> WaveFunctionSample {
        self.at(self.geometry.t_in, Representation::Momentum)
    }

    fn fin(&self) -> WaveFunctionSample {
        self.at(self.geometry.t_out, Representation::Momentum)
    }
}

fn close(a: Vector3<f64>, b: [f64; 3], tol: f64) -> bool {
    (0..3).all(|k| (a[k] - b[k]).abs() < tol)
}

#[test]
fn resting_packet_has_pauli_spin_for_every_kind() {
    let pk = packet([0.0; 3], SpinLabel::Up, 0.01, 10.0, 0.5);
    let m = pk.initial();
    for kind in SpinOperatorKind::ALL {
        let s = mean_spin(&m, kind).unwrap();
        assert!(close(s, [0.0, 0.0, 0.5], 1e-8), "{kind}: {s:?}");
    }
    let x = pk.at(pk.geometry.t_in, Representation::Coordinate);
    assert!(close(mean_spin(&x, SpinOperatorKind::Pauli).unwrap(), [0.0, 0.0, 0.5], 1e-8));
}

#[test]
fn moving_packet_fw_spin_is_tilted_by_theta0() {
    let pk = packet([0.0, 0.0, 14.0], SpinLabel::Up, 0.01, 10.0, 0.5);
    let m = pk.initial();
    let th = theta0_of_pz(14.0, CL);
    let fw = mean_spin(&m, SpinOperatorKind::Fw).unwrap();
    assert!(close(fw, [0.5 * th.sin(), 0.0, 0.5 * th.cos()], 1e-6), "{fw:?}");
    assert!((th - 0.1018).abs() < 1e-4);
    let boost = rest_frame_spin(&m).unwrap();
    assert!((boost - fw).amax() < 1e-10);
}

#[test]
fn boost_matches_fw_after_the_pulse() {
    let pk = packet([0.0, 0.0, 70.0], SpinLabel::Up, 0.01, 10.0, 0.5);
    let m = pk.fin();
    let fw = mean_spin(&m, SpinOperatorKind::Fw).unwrap();
    assert!((rest_frame_spin(&m).unwrap() - fw).amax() < 1e-8);
}

#[test]
fn integer_cycles_leave_spin_unchanged() {
    for n_c in [1.0, 2.0] {
        let pk = packet([0.0; 3], SpinLabel::Up, 0.01, 10.0, n_c);
        let (a, b) = (pk.initial(), pk.fin());
        for kind in SpinOperatorKind::ALL {
            let d = mean_spin(&b, kind).unwrap() - mean_spin(&a, kind).unwrap();
            assert!(d.amax() < 1e-10, "{kind} N_c = {n_c}: {d:?}");
        }
    }
}

#[test]
fn spin_length_bounded_for_proper_operators() {
    let pk = packet([0.5, -0.3, 14.0], SpinLabel::Down, 0.5, 10.0, 0.5);
    for m in [pk.initial(), pk.fin()] {
        for kind in [SpinOperatorKind::Pauli, SpinOperatorKind::Fw, SpinOperatorKind::Pryce] {
            assert!(mean_spin(&m, kind).unwrap().norm() <= 0.5 + 1e-15, "{kind}");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn fw_equals_pryce_and_helicity_is_shared(
        px in -3.0..3.0f64,
        py in -3.0..3.0f64,
        pz in 0.5..60.0f64,
        dq in 0.01..0.5f64,
        up in any::<bool>(),
    ) {
        let s = if up { SpinLabel::Up } else { SpinLabel::Down };
        let pk = packet([px, py, pz], s, dq, 10.0, 0.7);
        for m in [pk.initial(), pk.fin()] {
            let fw = mean_spin(&m, SpinOperatorKind::Fw).unwrap();
            let pr = mean_spin(&m, SpinOperatorKind::Pryce).unwrap();
            prop_assert!((fw - pr).amax() < 1e-12);
            let h = helicity_mean(&m).unwrap();
            prop_assert!(h.excluded_weight < 1e-12);
            for kind in [SpinOperatorKind::Fw, SpinOperatorKind::Frenkel, SpinOperatorKind::Pryce] {
                let hk = projected_helicity(&m, kind).unwrap();
                prop_assert!((hk.value - h.value).abs() < 1e-12, "{kind}");
            }
        }
    }
}

#[test]
fn helicity_flips_with_spin_label() {
    // u(p, s) has its rest-frame spin tilted by θ₀ from the momentum axis
    for pz in [0.1, 14.0] {
        let up = helicity_mean(&packet([0.0, 0.0, pz], SpinLabel::Up, 0.01, 10.0, 0.5).initial()).unwrap();
        let down = helicity_mean(&packet([0.0, 0.0, pz], SpinLabel::Down, 0.01, 10.0, 0.5).initial()).unwrap();
        let expect = 0.5 * theta0_of_pz(pz, CL).cos();
        assert!((up.value - expect).abs() < 1e-6, "{} vs {expect}", up.value);
        assert!((up.value + down.value).abs() < 1e-14);
    }
}

#[test]
fn relativistic_operators_need_momentum_representation() {
    let pk = packet([0.0; 3], SpinLabel::Up, 0.01, 10.0, 0.5);
    let x = pk.at(pk.geometry.t_in, Representation::Coordinate);
    for kind in [SpinOperatorKind::Fw, SpinOperatorKind::Frenkel, SpinOperatorKind::Pryce, SpinOperatorKind::BoostRestFrame] {
        assert!(matches!(mean_spin(&x, kind), Err(Error::RepresentationMismatch(_))), "{kind}");
    }
}
