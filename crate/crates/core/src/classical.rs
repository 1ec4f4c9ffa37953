//! Classical electron motion and spin precession in a plane-wave field.
//!
//! The field is E = (ℰ, 0, 0), B = (0, ℰ, 0) with ℰ a function of
//! ξ = ct − z. The electron charge is −1 and u = γv is the proper velocity.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pulse::Pulse;

/// A linearly polarized plane wave propagating along +z.
pub trait PlaneWave: Sync {
    fn field(&self, xi: f64) -> f64;
    /// Interval of ξ outside which the field vanishes; `hi` may be infinite.
    fn support(&self) -> (f64, f64);
    fn c(&self) -> f64;
    /// Characteristic time used to seed the step size.
    fn time_scale(&self) -> f64;
}

impl PlaneWave for Pulse {
    fn field(&self, xi: f64) -> f64 {
        Pulse::field(self, xi)
    }

    fn support(&self) -> (f64, f64) {
        (0.0, self.xi_max())
    }

    fn c(&self) -> f64 {
        Pulse::c(self)
    }

    fn time_scale(&self) -> f64 {
        1.0 / self.params.omega
    }
}

/// ℰ(ξ) = E*·cos(ωξ/c + φ₀) switched on at ξ = 0 and never switched off.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Monochromatic {
    pub e_star: f64,
    pub omega: f64,
    pub phi0: f64,
    pub c: f64,
}

impl PlaneWave for Monochromatic {
    fn field(&self, xi: f64) -> f64 {
        if xi < 0.0 {
            return 0.0;
        }
        self.e_star * (self.omega * xi / self.c + self.phi0).cos()
    }

    fn support(&self) -> (f64, f64) {
        (0.0, f64::INFINITY)
    }

    fn c(&self) -> f64 {
        self.c
    }

    fn time_scale(&self) -> f64 {
        1.0 / self.omega
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassicalState {
    pub t: f64,
    pub x: f64,
    pub z: f64,
    pub u: [f64; 3],
    pub s: [f64; 3],
    pub gamma: f64,
}

impl ClassicalState {
    /// Electron at (x, z) = (0, z) with proper velocity `u` and spin along the
    /// FW rest-frame direction of a free electron with that momentum.
    pub fn new(t: f64, z: f64, u: [f64; 3], c: f64) -> Self {
        let theta0 = theta0_of_pz(u[2], c);
        let s = [0.5 * theta0.sin(), 0.0, 0.5 * theta0.cos()];
        Self::with_spin(t, 0.0, z, u, s, c)
    }

    pub fn with_spin(t: f64, x: f64, z: f64, u: [f64; 3], s: [f64; 3], c: f64) -> Self {
        Self { t, x, z, u, s, gamma: lorentz_gamma(&u, c) }
    }

    pub fn xi(&self, c: f64) -> f64 {
        c * self.t - self.z
    }

    pub fn velocity(&self) -> [f64; 3] {
        self.u.map(|u| u / self.gamma)
    }

    pub fn spin_norm(&self) -> f64 {
        self.s.iter().map(|s| s * s).sum::<f64>().sqrt()
    }

    fn to_vec(self) -> [f64; 8] {
        [self.x, self.z, self.u[0], self.u[1], self.u[2], self.s[0], self.s[1], self.s[2]]
    }

    fn from_vec(t: f64, y: &[f64; 8], c: f64) -> Self {
        Self::with_spin(t, y[0], y[1], [y[2], y[3], y[4]], [y[5], y[6], y[7]], c)
    }
}

fn lorentz_gamma(u: &[f64; 3], c: f64) -> f64 {
    (1.0 + (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]) / (c * c)).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum SpinModel {
    Larmor,
    Tbmt,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum AnalyticModel {
    Nr,
    NrApprox,
    Rel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnalyticSpinInput {
    pub sigma: f64,
    pub theta0: f64,
    pub p_z: f64,
    pub model: AnalyticModel,
    pub c: f64,
}

impl AnalyticSpinInput {
    /// Whether the small-area expansion is in its regime of validity.
    pub fn small_area_ok(&self) -> bool {
        self.sigma.abs() < 0.1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-12, max_steps: 2_000_000 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub states: Vec<ClassicalState>,
    pub spin_model: Option<SpinModel>,
    pub accepted: usize,
    pub rejected: usize,
    /// Time at which ξ first reaches the rear edge of the support.
    pub t_exit: Option<f64>,
}

impl Trajectory {
    pub fn first(&self) -> &ClassicalState {
        &self.states[0]
    }

    pub fn last(&self) -> &ClassicalState {
        self.states.last().unwrap()
    }

    pub fn spin_change(&self) -> [f64; 3] {
        let (a, b) = (self.first().s, self.last().s);
        [b[0] - a[0], b[1] - a[1], b[2] - a[2]]
    }

    pub fn max_spin_norm_error(&self) -> f64 {
        self.states.iter().map(|s| (s.spin_norm() - 0.5).abs()).fold(0.0, f64::max)
    }
}

fn rhs(field: &dyn PlaneWave, model: Option<SpinModel>, t: f64, y: &[f64; 8]) -> [f64; 8] {
    let c = field.c();
    let u = [y[2], y[3], y[4]];
    let gamma = lorentz_gamma(&u, c);
    let v = u.map(|u| u / gamma);
    let e = field.field(c * t - y[1]);
    let du = [-e * (1.0 - v[2] / c), 0.0, -v[0] * e / c];
    let mut out = [v[0], v[2], du[0], du[1], du[2], 0.0, 0.0, 0.0];
    if let Some(model) = model {
        let bmt = match model {
            SpinModel::Larmor => [0.0, e * (1.0 - v[2] / c), e * v[1] / c],
            SpinModel::Tbmt => {
                let k = 1.0 / (gamma + 1.0);
                [0.0, e / gamma - k * e * v[2] / c, k * e * v[1] / c]
            }
        };
        let s = [y[5], y[6], y[7]];
        let sxo = [
            s[1] * bmt[2] - s[2] * bmt[1],
            s[2] * bmt[0] - s[0] * bmt[2],
            s[0] * bmt[1] - s[1] * bmt[0],
        ];
        out[5] = -sxo[0] / c;
        out[6] = -sxo[1] / c;
        out[7] = -sxo[2] / c;
    }
    out
}

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
const C: [f64; 6] = [0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];

fn axpy(y: &[f64; 8], h: f64, terms: &[(f64, &[f64; 8])]) -> [f64; 8] {
    let mut out = *y;
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = 0.0;
        for (a, k) in terms {
            acc += a * k[i];
        }
        *o += h * acc;
    }
    out
}

fn free_flight(state: &ClassicalState, t: f64, c: f64) -> ClassicalState {
    let v = state.velocity();
    let dt = t - state.t;
    ClassicalState::with_spin(t, state.x + v[0] * dt, state.z + v[2] * dt, state.u, state.s, c)
}

/// Dormand–Prince 5(4) integration of motion, and of spin when `model` is
/// given, from `initial` to `t_end`. Field-free stretches before and after
/// the support are advanced analytically.
pub fn integrate(
    initial: &ClassicalState,
    field: &dyn PlaneWave,
    t_end: f64,
    model: Option<SpinModel>,
    opts: &OdeOptions,
) -> Result<Trajectory> {
    let c = field.c();
    let (lo, hi) = field.support();
    let mut states = vec![*initial];
    let mut traj = Trajectory { states: Vec::new(), spin_model: model, accepted: 0, rejected: 0, t_exit: None };
    let mut cur = *initial;

    let v = cur.velocity();
    if cur.xi(c) < lo {
        let t_enter = cur.t + (lo - cur.xi(c)) / (c - v[2]);
        if t_enter >= t_end {
            states.push(free_flight(&cur, t_end, c));
            traj.states = states;
            return Ok(traj);
        }
        cur = free_flight(&cur, t_enter, c);
        states.push(cur);
    }
    if hi <= lo {
        traj.t_exit = Some(cur.t);
        if t_end.is_finite() && t_end > cur.t {
            states.push(free_flight(&cur, t_end, c));
        }
        traj.states = states;
        return Ok(traj);
    }

    let mut t = cur.t;
    let mut y = cur.to_vec();
    let mut h = 1e-3 * field.time_scale();
    let mut k1 = rhs(field, model, t, &y);
    let mut steps = 0usize;
    while t < t_end && c * t - y[1] < hi {
        steps += 1;
        if steps > opts.max_steps {
            return Err(Error::StepFailure { t, reason: format!("exceeded {} steps", opts.max_steps) });
        }
        h = h.min(t_end - t);
        let k2 = rhs(field, model, t + C[0] * h, &axpy(&y, h, &[(A21, &k1)]));
        let k3 = rhs(field, model, t + C[1] * h, &axpy(&y, h, &[(A31, &k1), (A32, &k2)]));
        let k4 = rhs(field, model, t + C[2] * h, &axpy(&y, h, &[(A41, &k1), (A42, &k2), (A43, &k3)]));
        let k5 = rhs(field, model, t + C[3] * h, &axpy(&y, h, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]));
        let k6 = rhs(
            field,
            model,
            t + C[4] * h,
            &axpy(&y, h, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
        );
        let yn = axpy(&y, h, &[(B1, &k1), (B3, &k3), (B4, &k4), (B5, &k5), (B6, &k6)]);
        let k7 = rhs(field, model, t + h, &yn);
        let mut err = 0.0_f64;
        for i in 0..8 {
            let e = h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
            let sc = opts.atol + opts.rtol * y[i].abs().max(yn[i].abs());
            err = err.max(e.abs() / sc);
        }
        if !err.is_finite() {
            return Err(Error::StepFailure { t, reason: "non-finite error estimate".into() });
        }
        if err <= 1.0 {
            t += h;
            y = yn;
            k1 = k7;
            traj.accepted += 1;
            states.push(ClassicalState::from_vec(t, &y, c));
        } else {
            traj.rejected += 1;
        }
        let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
        h *= fac;
        if h < 1e-14 * t.abs().max(1.0) {
            return Err(Error::StepFailure { t, reason: "step size underflow".into() });
        }
    }
    let last = *states.last().unwrap();
    if last.xi(c) >= hi {
        traj.t_exit = Some(last.t);
        if t_end.is_finite() && t_end > last.t {
            states.push(free_flight(&last, t_end, c));
        }
    }
    traj.states = states;
    Ok(traj)
}

/// Motion only; the spin is carried along unchanged.
pub fn integrate_motion(
    initial: &ClassicalState,
    field: &dyn PlaneWave,
    t_end: f64,
    opts: &OdeOptions,
) -> Result<Trajectory> {
    integrate(initial, field, t_end, None, opts)
}

/// Spin history for the trajectory, co-integrated with the motion from the
/// trajectory's first state over the same interval.
pub fn integrate_spin(
    trajectory: &Trajectory,
    field: &dyn PlaneWave,
    model: SpinModel,
    opts: &OdeOptions,
) -> Result<Trajectory> {
    integrate(trajectory.first(), field, trajectory.last().t, Some(model), opts)
}

/// Initial FW precession angle arctan(p_z/c) of a spin-up electron.
pub fn theta0_of_pz(p_z: f64, c: f64) -> f64 {
    (p_z / c).atan()
}

/// D = (1 + Π_z − p_z/c)/2 with Π_z = √(1 + (p_z/c)²).
pub fn d_factor(p_z: f64, c: f64) -> f64 {
    let r = p_z / c;
    0.5 * (1.0 + (1.0 + r * r).sqrt() - r)
}

pub fn analytic_spin_change(input: &AnalyticSpinInput) -> [f64; 3] {
    let AnalyticSpinInput { sigma, theta0, p_z, model, c } = *input;
    match model {
        AnalyticModel::Nr => [sigma.sin() * (theta0 + sigma).cos(), 0.0, -sigma.sin() * (theta0 + sigma).sin()],
        AnalyticModel::NrApprox => {
            let (s, co) = theta0.sin_cos();
            [sigma * co - sigma * sigma * s, 0.0, -sigma * s - sigma * sigma * co]
        }
        AnalyticModel::Rel => {
            let eff = (sigma / d_factor(p_z, c)).atan();
            [eff.sin() * (theta0 + eff).cos(), 0.0, -eff.sin() * (theta0 + eff).sin()]
        }
    }
}

/// Proper velocity and γ in a monochromatic wave as functions of τ = t − z/c,
/// for an electron with u = (0, 0, p_z) at τ = 0.
pub fn analytic_kinematics(tau: f64, p_z: f64, e_star: f64, omega: f64, phi0: f64, c: f64) -> (f64, f64, f64) {
    let u0 = -e_star / omega;
    let ux = u0 * ((omega * tau + phi0).sin() - phi0.sin());
    let pi_z = (1.0 + (p_z / c).powi(2)).sqrt();
    let h = pi_z - p_z / c;
    let uz = p_z + ux * ux / (2.0 * c * h);
    (ux, uz, h + uz / c)
}

/// Δp_z ≈ c/(√(c²+p_z²) − p_z) · S_E²/(2c).
pub fn delta_pz_estimate(p_z: f64, s_e: f64, c: f64) -> f64 {
    c / ((c * c + p_z * p_z).sqrt() - p_z) * s_e * s_e / (2.0 * c)
}
