//! Small complex linear-algebra helpers shared by the modules.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type CVector = DVector<Complex64>;
pub type CMatrix = DMatrix<Complex64>;

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// `Σ_n row[n]·x[n]`: a row vector (stored as a column) acting on `x`.
#[inline]
pub fn row_apply(row: &CVector, x: impl Iterator<Item = Complex64>) -> Complex64 {
    row.iter().zip(x).map(|(a, b)| a * b).sum()
}

/// Applies a row vector to column `col` of `w`.
#[inline]
pub fn row_apply_column(row: &CVector, w: &CMatrix, col: usize) -> Complex64 {
    row_apply(row, w.column(col).iter().copied())
}

/// Real inner product `Re Σ conj(a)·b` of two equally shaped arrays.
#[inline]
pub fn real_inner(a: &CMatrix, b: &CMatrix) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

#[inline]
pub fn frob_norm_sq(a: &CMatrix) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum()
}

/// One draw of a circularly-symmetric complex Gaussian with unit variance.
pub fn sample_cn<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// `x·xᴴ`.
pub fn outer(x: &CVector) -> CMatrix {
    x * x.adjoint()
}

/// Random vector with unit norm.
pub fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R, len: usize) -> CVector {
    loop {
        let v = CVector::from_fn(len, |_, _| sample_cn(rng));
        let n = v.norm();
        if n > 1e-12 {
            return v / Complex64::from(n);
        }
    }
}

/// Vector of uniformly distributed unit-modulus entries.
pub fn random_phases<R: Rng + ?Sized>(rng: &mut R, len: usize) -> CVector {
    CVector::from_fn(len, |_, _| {
        let theta: f64 = rng.random_range(0.0..std::f64::consts::TAU);
        Complex64::from_polar(1.0, theta)
    })
}
