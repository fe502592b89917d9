//! Relaxed reflection subproblem.
//!
//! With `W` fixed every link is affine in φ. The AE leakage does not depend
//! on φ and enters as the constant `c_k = R_ae,k`. The objective is
//!
//! ```text
//! G(φ) = Σ_k [ φ̂_k(φ)/ln 2 − max(c_k, φ̂_p,k(φ)/ln 2) ] + ρ (2Re{φᴴφ₀} − ‖φ₀‖²)
//! ```
//!
//! over `|φ_m| ≤ 1`, where the last term is the tangent of the `ρ‖φ‖²`
//! reward that pushes the relaxed solution to the unit circle. As for the
//! transmit block, a log-sum-exp copy of the `max` warm-starts the exact
//! ascent.

use num_complex::Complex64;

use super::projection::project_unit_disks;
use super::spg::{smoothed_ascent, soft_max, AscentProblem};
use super::{SolverParams, SubproblemReport};
use crate::channel::ChannelSet;
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector};
use crate::metrics::{rate_ae, BeamformingState};
use crate::surrogate::{ris_decompose, AuxiliaryVars, NoiseScale, RisDecomposition};

const LN2: f64 = std::f64::consts::LN_2;

/// Concave surrogate of the reflection subproblem at fixed `W`.
#[derive(Debug, Clone)]
pub struct PhiSurrogate {
    decomp: RisDecomposition,
    conj_s: Vec<Vec<CVector>>,
    conj_a: Vec<CVector>,
    /// Links at the anchor, `φ₀ᵀs_{k,i} + t_{k,i}` and `φ₀ᵀa_i + b_i`.
    user_anchor: Vec<Vec<Complex64>>,
    pe_anchor: Vec<Complex64>,
    anchor: CVector,
    /// `R_ae,k` in bits.
    leak_ae: Vec<f64>,
    jam: Vec<f64>,
    aux: AuxiliaryVars,
    scales: NoiseScale,
    pub rho: f64,
    /// Log-sum-exp temperature in nats; zero gives the exact `max`.
    smoothing: f64,
}

fn as_vector(x: &CMatrix) -> CVector {
    CVector::from_iterator(x.len(), x.iter().copied())
}

fn as_matrix(v: &CVector) -> CMatrix {
    CMatrix::from_iterator(v.len(), 1, v.iter().copied())
}

impl PhiSurrogate {
    pub fn new(
        ch: &ChannelSet,
        state: &BeamformingState,
        aux: &AuxiliaryVars,
        anchor_phi: &CVector,
        rho: f64,
    ) -> Result<Self> {
        state.check_dims(ch)?;
        if anchor_phi.len() != ch.ris_elements() {
            return Err(Error::Dimension("anchor phi length differs from M".into()));
        }
        if !(rho >= 0.0 && rho.is_finite()) {
            return crate::error::domain(format!("penalty weight must be non-negative, got {rho}"));
        }
        let k = ch.users();
        if aux.r.len() != k || aux.r_p.len() != k {
            return Err(Error::Dimension("auxiliary variables must have one entry per user".into()));
        }
        let decomp = ris_decompose(ch, &state.w)?;
        let conj = |v: &CVector| v.map(|z| z.conj());
        let conj_s = decomp.s.iter().map(|row| row.iter().map(conj).collect()).collect();
        let conj_a = decomp.a.iter().map(conj).collect();
        let user_anchor = (0..k)
            .map(|u| (0..decomp.streams()).map(|i| decomp.user_link(anchor_phi, u, i)).collect())
            .collect();
        let pe_anchor = (0..decomp.streams()).map(|i| decomp.pe_link(anchor_phi, i)).collect();
        let leak_ae = (0..k).map(|u| rate_ae(ch, state, u)).collect::<Result<Vec<_>>>()?;
        let scales = NoiseScale::from_params(&ch.params);
        let jam = ch.h_ae.iter().map(|h| scales.m_k * ch.params.jam_power * h.norm_sqr()).collect();
        Ok(Self {
            decomp,
            conj_s,
            conj_a,
            user_anchor,
            pe_anchor,
            anchor: anchor_phi.clone(),
            leak_ae,
            jam,
            aux: aux.clone(),
            scales,
            rho,
            smoothing: 0.0,
        })
    }

    /// Value and optional gradient at `phi`.
    pub fn evaluate(&self, phi: &CVector, want_grad: bool) -> (f64, Option<CVector>) {
        let d = &self.decomp;
        let sc = &self.scales;
        let cols = d.streams();
        let m = phi.len();
        let pe_links: Vec<Complex64> = (0..cols).map(|i| d.pe_link(phi, i)).collect();
        let pe_total = sc.m_p * pe_links.iter().map(|z| z.norm_sqr()).sum::<f64>() + 1.0;
        let pe_eta: Vec<f64> = pe_links
            .iter()
            .zip(&self.pe_anchor)
            .map(|(&z, &a0)| 2.0 * (a0.conj() * z).re - a0.norm_sqr())
            .collect();
        let pe_eta_sum: f64 = pe_eta.iter().sum();

        let mut grad = want_grad.then(|| CVector::zeros(m));
        let mut total = 0.0;
        for k in 0..d.users() {
            let links: Vec<Complex64> = (0..cols).map(|i| d.user_link(phi, k, i)).collect();
            let anchors = &self.user_anchor[k];
            let eta_sum: f64 = links
                .iter()
                .zip(anchors)
                .map(|(&z, &a0)| 2.0 * (a0.conj() * z).re - a0.norm_sqr())
                .sum();
            let interference: f64 = links.iter().enumerate().filter(|(i, _)| *i != k).map(|(_, z)| z.norm_sqr()).sum();
            let (r, r_p) = (self.aux.r[k], self.aux.r_p[k]);
            let big_l = sc.m_k * eta_sum + self.jam[k] + 1.0;
            let j_p = sc.m_p * (pe_eta_sum - pe_eta[k]) + 1.0;
            if !(big_l > 0.0) || !(j_p > 0.0) {
                return (f64::NEG_INFINITY, None);
            }
            let phi_k = big_l.ln() - r * (sc.m_k * interference + self.jam[k] + 1.0) + r.ln() + 1.0;
            let phi_p = r_p * pe_total - r_p.ln() - 1.0 - j_p.ln();
            let (leak, ae_weight) = soft_max(self.leak_ae[k] * LN2, phi_p, self.smoothing);
            total += (phi_k - leak) / LN2;

            if let Some(g) = grad.as_mut() {
                for i in 0..cols {
                    let mut c = anchors[i] * (2.0 * sc.m_k / big_l);
                    if i != k {
                        c -= links[i] * (2.0 * r * sc.m_k);
                    }
                    g.axpy(c / LN2, &self.conj_s[k][i], Complex64::new(1.0, 0.0));
                }
                let pe_weight = 1.0 - ae_weight;
                if pe_weight > 0.0 {
                    for i in 0..cols {
                        let mut c = pe_links[i] * (2.0 * r_p * sc.m_p);
                        if i != k {
                            c -= self.pe_anchor[i] * (2.0 * sc.m_p / j_p);
                        }
                        g.axpy(-c * (pe_weight / LN2), &self.conj_a[i], Complex64::new(1.0, 0.0));
                    }
                }
            }
        }
        total += self.rho * crate::surrogate::norm_sq_minorizer(phi, &self.anchor);
        if let Some(g) = grad.as_mut() {
            g.axpy(Complex64::from(2.0 * self.rho), &self.anchor, Complex64::new(1.0, 0.0));
        }
        (total, grad)
    }
}

impl PhiSurrogate {
    /// Copy with the leakage `max` replaced by a log-sum-exp of
    /// temperature `tau` (nats). It lies below the exact surrogate.
    pub fn smoothed(&self, tau: f64) -> Self {
        Self { smoothing: tau, ..self.clone() }
    }
}

impl AscentProblem for PhiSurrogate {
    fn value(&self, x: &CMatrix) -> f64 {
        self.evaluate(&as_vector(x), false).0
    }

    fn gradient(&self, x: &CMatrix) -> CMatrix {
        let v = as_vector(x);
        as_matrix(&self.evaluate(&v, true).1.unwrap_or_else(|| CVector::zeros(v.len())))
    }

    fn project(&self, x: &CMatrix) -> Result<CMatrix> {
        Ok(as_matrix(&project_unit_disks(&as_vector(x))))
    }

    fn scale(&self) -> f64 {
        (self.anchor.len() as f64).sqrt()
    }
}

/// Gradient of the reflection surrogate in complex-encoded real
/// coordinates.
pub fn surrogate_gradient_phi(surrogate: &PhiSurrogate, phi: &CVector) -> CVector {
    surrogate.evaluate(phi, true).1.unwrap_or_else(|| CVector::zeros(phi.len()))
}

/// Maximizes the penalized reflection surrogate around `anchor_phi`.
pub fn solve_phi_subproblem(
    ch: &ChannelSet,
    state: &BeamformingState,
    aux: &AuxiliaryVars,
    anchor_phi: &CVector,
    rho: f64,
    params: &SolverParams,
) -> Result<(CVector, SubproblemReport)> {
    let surrogate = PhiSurrogate::new(ch, state, aux, anchor_phi, rho)?;
    let smooth = (params.smoothing > 0.0).then(|| surrogate.smoothed(params.smoothing));
    let (x, mut report) = smoothed_ascent(&surrogate, smooth.as_ref(), &as_matrix(anchor_phi), params)?;
    let phi = as_vector(&x);
    report.residuals = phi.iter().map(|z| 1.0 - z.norm()).collect();
    Ok((phi, report))
}
