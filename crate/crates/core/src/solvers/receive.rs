//! Receive beamformer: maximize `uᴴAu / uᴴBu` with
//! `A = m_s ζ² H_bt (Σ_i w_i w_iᴴ) H_btᴴ` and `B = I + m_s P_e h_bt h_btᴴ`.

use nalgebra::Cholesky;
use num_complex::Complex64;

use crate::channel::ChannelSet;
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector};

const POWER_TOL: f64 = 1e-10;
const POWER_MAX_ITERS: usize = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct ReceiveSolution {
    /// Unit-norm receive beamformer.
    pub u: CVector,
    /// Set when `A = 0` and every `u` is equally good.
    pub degenerate: bool,
    pub iterations: usize,
}

/// `uᴴAu / uᴴBu`.
pub fn rayleigh_quotient(a: &CMatrix, b: &CMatrix, u: &CVector) -> f64 {
    let num = u.dotc(&(a * u)).re;
    let den = u.dotc(&(b * u)).re;
    num / den
}

/// Dominant eigenvector of `B⁻¹A` by power iteration, given `B⁻¹`.
/// Returns the unit vector and the iteration count; `None` when the
/// iteration collapses to zero (`A` annihilates the start vector).
fn power_iteration(b_inv_a: &CMatrix, start: CVector) -> Option<(CVector, usize)> {
    let mut x = start;
    let n0 = x.norm();
    if !(n0 > 0.0) {
        return None;
    }
    x /= Complex64::from(n0);
    for it in 1..=POWER_MAX_ITERS {
        let mut y = b_inv_a * &x;
        let ny = y.norm();
        if !(ny > 0.0) {
            return None;
        }
        y /= Complex64::from(ny);
        // Remove the arbitrary phase before comparing iterates.
        let overlap = x.dotc(&y);
        if overlap.norm() > 0.0 {
            y *= overlap.conj() / overlap.norm();
        }
        let change = (&y - &x).norm();
        x = y;
        if change <= POWER_TOL {
            return Some((x, it));
        }
    }
    Some((x, POWER_MAX_ITERS))
}

/// Starts from the column of `B⁻¹A` with the largest norm, which lies in
/// its range.
fn range_start(m: &CMatrix) -> CVector {
    let best = (0..m.ncols())
        .max_by(|&i, &j| m.column(i).norm().total_cmp(&m.column(j).norm()))
        .unwrap_or(0);
    m.column(best).into_owned()
}

/// Generalized Rayleigh maximizer for a Hermitian `A ⪰ 0` and `B ≻ 0`.
pub fn dominant_generalized_eigvec(a: &CMatrix, b: &CMatrix) -> Result<ReceiveSolution> {
    let n = a.nrows();
    if a.shape() != (n, n) || b.shape() != (n, n) || n == 0 {
        return Err(Error::Dimension("A and B must be equal-sized square matrices".into()));
    }
    let not_pd = || Error::Domain("B is not positive definite".into());
    let chol = Cholesky::new(b.clone()).ok_or_else(not_pd)?;
    // Complex square roots never fail, so check the factor's diagonal.
    let l = chol.l_dirty();
    if (0..n).any(|i| !(l[(i, i)].re > 0.0) || l[(i, i)].im.abs() > 1e-12 * l[(i, i)].re) {
        return Err(not_pd());
    }
    let b_inv_a = chol.solve(a);
    let start = range_start(&b_inv_a);
    Ok(match power_iteration(&b_inv_a, start) {
        Some((u, iterations)) => ReceiveSolution { u, degenerate: false, iterations },
        None => {
            let mut u = CVector::zeros(n);
            u[0] = Complex64::new(1.0, 0.0);
            ReceiveSolution { u, degenerate: true, iterations: 0 }
        }
    })
}

/// Echo-SCNR maximizing receive beamformer for the given transmit matrix.
pub fn solve_receive_beamformer(ch: &ChannelSet, w: &CMatrix) -> Result<ReceiveSolution> {
    let h = &ch.h_bt;
    let h_norm = h.norm();
    if !(h_norm > 0.0) {
        return crate::error::domain("target channel h_bt is zero");
    }
    let p = &ch.params;
    let m_s = 1.0 / p.noise_sensing;
    let h_unit = h / Complex64::from(h_norm);
    if w.iter().all(|z| z.norm_sqr() == 0.0) {
        return Ok(ReceiveSolution { u: h_unit, degenerate: true, iterations: 0 });
    }
    let a = (&ch.h_bt_outer * w) * (w.adjoint() * &ch.h_bt_outer.adjoint()) * Complex64::from(m_s * p.rcs);
    let c = m_s * p.jam_power;
    let n = h.len();
    let b_inv = CMatrix::identity(n, n) - (h * h.adjoint()) * Complex64::from(c / (1.0 + c * h_norm * h_norm));
    let b_inv_a = b_inv * a;
    Ok(match power_iteration(&b_inv_a, h_unit.clone()) {
        Some((u, iterations)) => ReceiveSolution { u, degenerate: false, iterations },
        None => ReceiveSolution { u: h_unit, degenerate: true, iterations: 0 },
    })
}
