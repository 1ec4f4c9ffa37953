//! Dirac matrices in the standard representation.

use nalgebra::{Matrix2, Matrix4, Vector3, Vector4};
use num_complex::Complex64;

pub type Bispinor = Vector4<Complex64>;
pub type Mat4 = Matrix4<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn pauli() -> [Matrix2<Complex64>; 3] {
    [
        Matrix2::new(ZERO, ONE, ONE, ZERO),
        Matrix2::new(ZERO, -I, I, ZERO),
        Matrix2::new(ONE, ZERO, ZERO, -ONE),
    ]
}

fn blocks(a: &Matrix2<Complex64>, b: &Matrix2<Complex64>, c: &Matrix2<Complex64>, d: &Matrix2<Complex64>) -> Mat4 {
    let mut m = Mat4::zeros();
    m.fixed_view_mut::<2, 2>(0, 0).copy_from(a);
    m.fixed_view_mut::<2, 2>(0, 2).copy_from(b);
    m.fixed_view_mut::<2, 2>(2, 0).copy_from(c);
    m.fixed_view_mut::<2, 2>(2, 2).copy_from(d);
    m
}

pub fn identity() -> Mat4 {
    Mat4::identity()
}

pub fn beta() -> Mat4 {
    let i2 = Matrix2::identity();
    let z = Matrix2::zeros();
    blocks(&i2, &z, &z, &(-i2))
}

/// α_k = offdiag(σ_k, σ_k).
pub fn alpha() -> [Mat4; 3] {
    let z = Matrix2::zeros();
    pauli().map(|s| blocks(&z, &s, &s, &z))
}

/// Σ_k = diag(σ_k, σ_k).
pub fn sigma() -> [Mat4; 3] {
    let z = Matrix2::zeros();
    pauli().map(|s| blocks(&s, &z, &z, &s))
}

/// γ⁰ = β and γᵏ = βαₖ.
pub fn gamma() -> [Mat4; 4] {
    let b = beta();
    let a = alpha();
    [b, b * a[0], b * a[1], b * a[2]]
}

/// Free Dirac Hamiltonian cα·p + βc² for a real momentum.
pub fn free_hamiltonian(p: &Vector3<f64>, c: f64) -> Mat4 {
    let a = alpha();
    let mut h = beta() * Complex64::from(c * c);
    for k in 0..3 {
        h += a[k] * Complex64::from(c * p[k]);
    }
    h
}

pub fn dot(a: &[Mat4; 3], v: &Vector3<f64>) -> Mat4 {
    a[0] * Complex64::from(v[0]) + a[1] * Complex64::from(v[1]) + a[2] * Complex64::from(v[2])
}

/// Componentwise v × M for a real vector and a matrix-valued vector.
pub fn cross(v: &Vector3<f64>, m: &[Mat4; 3]) -> [Mat4; 3] {
    let r = |x: f64| Complex64::from(x);
    [
        m[2] * r(v[1]) - m[1] * r(v[2]),
        m[0] * r(v[2]) - m[2] * r(v[0]),
        m[1] * r(v[0]) - m[0] * r(v[1]),
    ]
}

pub fn commutator(a: &Mat4, b: &Mat4) -> Mat4 {
    a * b - b * a
}

/// Frobenius norm of a complex matrix.
pub fn norm(m: &Mat4) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// ⟨a|M|a⟩ without normalization.
pub fn expectation(m: &Mat4, a: &Bispinor) -> Complex64 {
    a.dotc(&(m * a))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clifford_relations() {
        let g = gamma();
        let eta = [1.0, -1.0, -1.0, -1.0];
        for mu in 0..4 {
            for nu in 0..4 {
                let anti = g[mu] * g[nu] + g[nu] * g[mu];
                let expect = if mu == nu { identity() * Complex64::from(2.0 * eta[mu]) } else { Mat4::zeros() };
                assert!(norm(&(anti - expect)) < 1e-15);
            }
        }
    }

    #[test]
    fn sigma_is_minus_i_alpha_cross_alpha() {
        let a = alpha();
        let s = sigma();
        let sx = (a[1] * a[2] - a[2] * a[1]) * (-I * 0.5);
        assert!(norm(&(sx - s[0])) < 1e-15);
    }

    #[test]
    fn hamiltonian_squares_to_energy() {
        let p = Vector3::new(3.0, -1.0, 14.0);
        let c = 137.035999;
        let h = free_hamiltonian(&p, c);
        let e2 = c * c * (c * c + p.norm_squared());
        assert!(norm(&(h * h - identity() * Complex64::from(e2))) < 1e-9 * e2);
    }
}
