//! Quadrature, reductions and finite-difference residuals shared by the
//! physics modules.

use std::ops::Add;

use serde::{Deserialize, Serialize};

use num_complex::Complex64;

use crate::algebra::{Bispinor, I};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_panels: usize,
    pub phase_rate_bound: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            abs_tol: 1e-14,
            max_panels: 4096,
            phase_rate_bound: std::f64::consts::FRAC_PI_4,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) {
            return Err(Error::Config("numerics.rel_tol and numerics.abs_tol must be positive".into()));
        }
        if self.max_panels == 0 {
            return Err(Error::Config("numerics.max_panels must be at least 1".into()));
        }
        if !(self.phase_rate_bound > 0.0 && self.phase_rate_bound <= std::f64::consts::FRAC_PI_2) {
            return Err(Error::Config("numerics.phase_rate_bound must lie in (0, pi/2]".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GridKind {
    Uniform,
    GaussPanels,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Grid1D {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub kind: GridKind,
}

impl Grid1D {
    /// Trapezoid rule on `n` equally spaced nodes spanning `[a, b]`.
    pub fn uniform(a: f64, b: f64, n: usize) -> Self {
        assert!(n >= 2 && b > a);
        let h = (b - a) / (n - 1) as f64;
        let nodes = (0..n).map(|i| a + h * i as f64).collect();
        let mut weights = vec![h; n];
        weights[0] = 0.5 * h;
        weights[n - 1] = 0.5 * h;
        Self { nodes, weights, kind: GridKind::Uniform }
    }

    /// Gauss–Legendre rule of the given order on every panel between
    /// consecutive `breaks`.
    pub fn gauss_panels(breaks: &[f64], order: usize) -> Self {
        let gl = GaussLegendre::new(order);
        let mut nodes = Vec::with_capacity(order * breaks.len());
        let mut weights = Vec::with_capacity(order * breaks.len());
        for w in breaks.windows(2) {
            let (x, ww) = gl.on(w[0], w[1]);
            nodes.extend(x);
            weights.extend(ww);
        }
        Self { nodes, weights, kind: GridKind::GaussPanels }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn spacing(&self) -> Option<f64> {
        match self.kind {
            GridKind::Uniform if self.nodes.len() > 1 => Some(self.nodes[1] - self.nodes[0]),
            _ => None,
        }
    }

    pub fn integrate(&self, values: &[f64]) -> f64 {
        let terms: Vec<f64> = self.weights.iter().zip(values).map(|(w, v)| w * v).collect();
        pairwise_sum(&terms)
    }
}

/// Gauss–Legendre nodes and weights on [−1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// Nodes and weights mapped to [a, b].
    pub fn on(&self, a: f64, b: f64) -> (Vec<f64>, Vec<f64>) {
        let h = 0.5 * (b - a);
        let m = 0.5 * (a + b);
        (
            self.nodes.iter().map(|x| m + h * x).collect(),
            self.weights.iter().map(|w| h * w).collect(),
        )
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
        let h = 0.5 * (b - a);
        let m = 0.5 * (a + b);
        let terms: Vec<f64> = self.nodes.iter().zip(&self.weights).map(|(x, w)| w * f(m + h * x)).collect();
        h * pairwise_sum(&terms)
    }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { p0 } else { p1 };
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p, d)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
}

const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

fn gauss_kronrod15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let h = 0.5 * (b - a);
    let m = 0.5 * (a + b);
    let fc = f(m);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for j in 0..7 {
        let fs = f(m - h * XGK[j]) + f(m + h * XGK[j]);
        k += WGK[j] * fs;
        if j % 2 == 1 {
            g += WG[j / 2] * fs;
        }
    }
    (h * k, (h * (k - g)).abs())
}

/// Globally adaptive Gauss–Kronrod (7, 15) quadrature.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, spec: &QuadratureSpec) -> Result<Quadrature> {
    if a == b {
        return Ok(Quadrature { value: 0.0, error: 0.0 });
    }
    let mut panels: Vec<(f64, f64, f64, f64)> = Vec::new();
    let (v, e) = gauss_kronrod15(&f, a, b);
    panels.push((a, b, v, e));
    loop {
        panels.sort_by(|x, y| x.0.total_cmp(&y.0));
        let value = pairwise_sum(&panels.iter().map(|p| p.2).collect::<Vec<_>>());
        let error = pairwise_sum(&panels.iter().map(|p| p.3).collect::<Vec<_>>());
        if !value.is_finite() {
            return Err(Error::ToleranceNotMet { value, estimate: error });
        }
        if error <= spec.abs_tol.max(spec.rel_tol * value.abs()) {
            return Ok(Quadrature { value, error });
        }
        if panels.len() >= spec.max_panels {
            return Err(Error::ToleranceNotMet { value, estimate: error });
        }
        let worst = panels
            .iter()
            .enumerate()
            .max_by(|x, y| x.1 .3.total_cmp(&y.1 .3))
            .map(|(i, _)| i)
            .unwrap();
        let (lo, hi, _, _) = panels.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Err(Error::ToleranceNotMet { value, estimate: error });
        }
        let (v1, e1) = gauss_kronrod15(&f, lo, mid);
        let (v2, e2) = gauss_kronrod15(&f, mid, hi);
        panels.push((lo, mid, v1, e1));
        panels.push((mid, hi, v2, e2));
    }
}

/// Integrates over consecutive subintervals of `points`, summing the parts.
pub fn integrate_pieces(f: impl Fn(f64) -> f64, points: &[f64], spec: &QuadratureSpec) -> Result<Quadrature> {
    let mut values = Vec::with_capacity(points.len());
    let mut errors = Vec::with_capacity(points.len());
    for w in points.windows(2) {
        let q = integrate(&f, w[0], w[1], spec)?;
        values.push(q.value);
        errors.push(q.error);
    }
    Ok(Quadrature { value: pairwise_sum(&values), error: pairwise_sum(&errors) })
}

/// Fixed-tree pairwise reduction; the grouping depends only on the length.
pub fn pairwise_reduce<T: Copy + Add<Output = T>>(xs: &[T], zero: T) -> T {
    const BLOCK: usize = 8;
    if xs.len() <= BLOCK {
        return xs.iter().fold(zero, |acc, &x| acc + x);
    }
    let mid = xs.len() / 2;
    pairwise_reduce(&xs[..mid], zero) + pairwise_reduce(&xs[mid..], zero)
}

pub fn pairwise_sum(xs: &[f64]) -> f64 {
    pairwise_reduce(xs, 0.0)
}

/// Splits `[a, b]` into panels such that `advance(x0, x1)`, the largest phase
/// advance across a panel, stays below `bound`.
pub fn phase_bounded_panels(
    a: f64,
    b: f64,
    initial: usize,
    bound: f64,
    max_panels: usize,
    advance: impl Fn(f64, f64) -> f64,
) -> Result<Vec<f64>> {
    let initial = initial.max(1);
    let h = (b - a) / initial as f64;
    let mut breaks = vec![a];
    let mut stack: Vec<(f64, f64)> = (0..initial)
        .rev()
        .map(|i| (a + h * i as f64, if i + 1 == initial { b } else { a + h * (i + 1) as f64 }))
        .collect();
    let mut worst = 0.0_f64;
    while let Some((x0, x1)) = stack.pop() {
        let d = advance(x0, x1);
        if d > bound {
            if breaks.len() + stack.len() + 2 > max_panels {
                worst = worst.max(d);
                return Err(Error::ToleranceNotMet { value: max_panels as f64, estimate: worst });
            }
            let xm = 0.5 * (x0 + x1);
            stack.push((xm, x1));
            stack.push((x0, xm));
        } else {
            breaks.push(x1);
        }
    }
    Ok(breaks)
}

/// Relative residual ‖i∂ₜψ − Hψ‖₂ / ‖scale·ψ‖₂ over interior nodes of a
/// uniform (t, z) grid, with fourth-order central differences in both
/// directions. `apply_h(t, z, ψ, ∂zψ)` returns Hψ.
pub fn finite_difference_residual(
    samples: &[Vec<Bispinor>],
    t0: f64,
    dt: f64,
    z0: f64,
    dz: f64,
    scale: f64,
    apply_h: impl Fn(f64, f64, &Bispinor, &Bispinor) -> Bispinor,
) -> Result<f64> {
    const NEEDED: usize = 5;
    let nt = samples.len();
    let nz = samples.first().map_or(0, Vec::len);
    if nt < NEEDED || nz < NEEDED || samples.iter().any(|r| r.len() != nz) {
        return Err(Error::GridTooSmall { needed: NEEDED, got: nt.min(nz) });
    }
    let d4 = |m2: &Bispinor, m1: &Bispinor, p1: &Bispinor, p2: &Bispinor, h: f64| {
        let eight = Complex64::from(8.0);
        (m2 - m1 * eight + p1 * eight - p2) / Complex64::from(12.0 * h)
    };
    let mut res = Vec::new();
    let mut refn = Vec::new();
    for i in 2..nt - 2 {
        for j in 2..nz - 2 {
            let psi = &samples[i][j];
            let dtpsi = d4(&samples[i - 2][j], &samples[i - 1][j], &samples[i + 1][j], &samples[i + 2][j], dt);
            let dzpsi = d4(&samples[i][j - 2], &samples[i][j - 1], &samples[i][j + 1], &samples[i][j + 2], dz);
            let t = t0 + dt * i as f64;
            let z = z0 + dz * j as f64;
            let r = dtpsi * I - apply_h(t, z, psi, &dzpsi);
            res.push(r.norm_squared());
            refn.push(psi.norm_squared() * scale * scale);
        }
    }
    Ok((pairwise_sum(&res) / pairwise_sum(&refn)).sqrt())
}
