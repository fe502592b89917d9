//! Transmit-beamformer subproblem.
//!
//! The objective is the variational surrogate with the convex quadratics
//! inside the logarithms replaced by tangent planes at the anchor:
//!
//! ```text
//! F(W) = Σ_k [ φ̂_k(W) − max(φ̂_a,k(W), φ̂_p,k(W)) ] / ln 2
//! φ̂_k   = ln(m_k Σ_i η_k(w_i) + m_k P_e|h_ae,k|² + 1)
//!         − r_k (m_k Σ_{i≠k}|g_k w_i|² + m_k P_e|h_ae,k|² + 1) + ln r_k + 1
//! φ̂_a,k = r_a,k (m_a Σ_i |h_btᴴw_i|² + 1) − ln r_a,k − 1 − ln(m_a Σ_{i≠k} η_ae(w_i) + 1)
//! ```
//!
//! and `φ̂_p,k` like `φ̂_a,k` with the composite PE row. The epigraph
//! variable of the leakage term is eliminated: at the optimum it equals
//! the larger of the two eavesdropper bounds. Ties take the AE branch.
//! The solver first ascends a copy with the `max` replaced by a
//! log-sum-exp, then the exact surrogate.
//! The feasible set is the power ball intersected with the linearized echo
//! constraint.

use num_complex::Complex64;

use super::projection::{project_ball_halfspace, project_power_ball, Halfspace};
use super::spg::{smoothed_ascent, soft_max, AscentProblem};
use super::{SolverParams, SubproblemReport, Termination};
use crate::channel::ChannelSet;
use crate::error::{Error, Result};
use crate::linalg::{frob_norm_sq, row_apply_column, CMatrix, CVector};
use crate::metrics::{ae_row, composite_pe_channel, composite_user_channel, BeamformingState};
use crate::surrogate::{AuxiliaryVars, NoiseScale};

const LN2: f64 = std::f64::consts::LN_2;

/// One receiver row together with its links at the anchor.
#[derive(Debug, Clone)]
struct AnchoredRow {
    row: CVector,
    conj_row: CVector,
    anchor: Vec<Complex64>,
}

impl AnchoredRow {
    fn new(row: CVector, anchor_w: &CMatrix) -> Self {
        let anchor = (0..anchor_w.ncols()).map(|i| row_apply_column(&row, anchor_w, i)).collect();
        let conj_row = row.map(|z| z.conj());
        Self { row, conj_row, anchor }
    }

    fn links(&self, w: &CMatrix) -> Vec<Complex64> {
        (0..w.ncols()).map(|i| row_apply_column(&self.row, w, i)).collect()
    }

    /// Tangent of `|link_i|²` at the anchor link.
    fn eta(&self, i: usize, link: Complex64) -> f64 {
        let a0 = self.anchor[i];
        2.0 * (a0.conj() * link).re - a0.norm_sqr()
    }
}

/// Concave surrogate of the transmit subproblem at a fixed `(φ, u)` and
/// anchor `W`.
#[derive(Debug, Clone)]
pub struct TransmitSurrogate {
    users: Vec<AnchoredRow>,
    ae: AnchoredRow,
    pe: AnchoredRow,
    /// `m_k P_e |h_ae,k|²`.
    jam: Vec<f64>,
    aux: AuxiliaryVars,
    scales: NoiseScale,
    power: f64,
    /// Linearized echo constraint; absent when `γ_echo = 0`.
    pub sensing: Option<Halfspace>,
    dykstra_iters: usize,
    dykstra_tol: f64,
    /// Log-sum-exp temperature; zero gives the exact `max`.
    smoothing: f64,
}

impl TransmitSurrogate {
    /// Builds the surrogate around `anchor_w` with `state.phi` and
    /// `state.u` held fixed.
    pub fn new(
        ch: &ChannelSet,
        state: &BeamformingState,
        aux: &AuxiliaryVars,
        anchor_w: &CMatrix,
        params: &SolverParams,
    ) -> Result<Self> {
        state.check_dims(ch)?;
        if anchor_w.shape() != state.w.shape() {
            return Err(Error::Dimension("anchor W shape differs from W".into()));
        }
        let k = ch.users();
        if aux.r.len() != k || aux.r_a.len() != k || aux.r_p.len() != k {
            return Err(Error::Dimension("auxiliary variables must have one entry per user".into()));
        }
        let scales = NoiseScale::from_params(&ch.params);
        let users = (0..k)
            .map(|u| Ok(AnchoredRow::new(composite_user_channel(ch, &state.phi, u)?, anchor_w)))
            .collect::<Result<Vec<_>>>()?;
        let jam = ch.h_ae.iter().map(|h| scales.m_k * ch.params.jam_power * h.norm_sqr()).collect();
        let sensing = (ch.params.gamma_echo > 0.0).then(|| Halfspace::sensing(ch, anchor_w, &state.u));
        Ok(Self {
            users,
            ae: AnchoredRow::new(ae_row(ch), anchor_w),
            pe: AnchoredRow::new(composite_pe_channel(ch, &state.phi)?, anchor_w),
            jam,
            aux: aux.clone(),
            scales,
            power: ch.params.bs_power,
            sensing,
            dykstra_iters: params.dykstra_iters,
            dykstra_tol: params.dykstra_tol,
            smoothing: 0.0,
        })
    }

    /// Copy with the leakage `max` replaced by a log-sum-exp of
    /// temperature `tau` (nats). It lies below the exact surrogate.
    pub fn smoothed(&self, tau: f64) -> Self {
        Self { smoothing: tau, ..self.clone() }
    }

    /// Value and, on request, gradient. The gradient is accumulated as one
    /// coefficient per (row, column) pair multiplying `conj(row)`.
    fn evaluate(&self, w: &CMatrix, want_grad: bool) -> (f64, Option<CMatrix>) {
        let k_users = self.users.len();
        let cols = w.ncols();
        let sc = &self.scales;
        let ae_links = self.ae.links(w);
        let pe_links = self.pe.links(w);
        let ae_total: f64 = sc.m_a * ae_links.iter().map(|z| z.norm_sqr()).sum::<f64>() + 1.0;
        let pe_total: f64 = sc.m_p * pe_links.iter().map(|z| z.norm_sqr()).sum::<f64>() + 1.0;
        let ae_eta: Vec<f64> = ae_links.iter().enumerate().map(|(i, &z)| self.ae.eta(i, z)).collect();
        let pe_eta: Vec<f64> = pe_links.iter().enumerate().map(|(i, &z)| self.pe.eta(i, z)).collect();
        let ae_eta_sum: f64 = ae_eta.iter().sum();
        let pe_eta_sum: f64 = pe_eta.iter().sum();

        let mut coef_user = vec![vec![Complex64::new(0.0, 0.0); cols]; if want_grad { k_users } else { 0 }];
        let mut coef_ae = vec![Complex64::new(0.0, 0.0); cols];
        let mut coef_pe = vec![Complex64::new(0.0, 0.0); cols];
        let mut total = 0.0;

        for k in 0..k_users {
            let row = &self.users[k];
            let links = row.links(w);
            let eta_sum: f64 = links.iter().enumerate().map(|(i, &z)| row.eta(i, z)).sum();
            let interference: f64 = links.iter().enumerate().filter(|(i, _)| *i != k).map(|(_, z)| z.norm_sqr()).sum();
            let (r, r_a, r_p) = (self.aux.r[k], self.aux.r_a[k], self.aux.r_p[k]);
            let big_l = sc.m_k * eta_sum + self.jam[k] + 1.0;
            if !(big_l > 0.0) {
                return (f64::NEG_INFINITY, None);
            }
            let phi_k = big_l.ln() - r * (sc.m_k * interference + self.jam[k] + 1.0) + r.ln() + 1.0;

            let j_a = sc.m_a * (ae_eta_sum - ae_eta[k]) + 1.0;
            let j_p = sc.m_p * (pe_eta_sum - pe_eta[k]) + 1.0;
            if !(j_a > 0.0) || !(j_p > 0.0) {
                return (f64::NEG_INFINITY, None);
            }
            let phi_a = r_a * ae_total - r_a.ln() - 1.0 - j_a.ln();
            let phi_p = r_p * pe_total - r_p.ln() - 1.0 - j_p.ln();
            let (leak, ae_weight) = soft_max(phi_a, phi_p, self.smoothing);
            total += (phi_k - leak) / LN2;

            if want_grad {
                for j in 0..cols {
                    let mut c = row.anchor[j] * (2.0 * sc.m_k / big_l);
                    if j != k {
                        c -= links[j] * (2.0 * r * sc.m_k);
                    }
                    coef_user[k][j] += c / LN2;
                }
                let branches = [
                    (&mut coef_ae, &ae_links, &self.ae.anchor, r_a, sc.m_a, j_a, ae_weight),
                    (&mut coef_pe, &pe_links, &self.pe.anchor, r_p, sc.m_p, j_p, 1.0 - ae_weight),
                ];
                for (coef, links_e, anchored, r_e, m_e, j_e, weight) in branches {
                    if weight == 0.0 {
                        continue;
                    }
                    for j in 0..cols {
                        let mut c = links_e[j] * (2.0 * r_e * m_e);
                        if j != k {
                            c -= anchored[j] * (2.0 * m_e / j_e);
                        }
                        coef[j] -= c * (weight / LN2);
                    }
                }
            }
        }

        if !want_grad {
            return (total, None);
        }
        let mut grad = CMatrix::zeros(w.nrows(), cols);
        for j in 0..cols {
            let mut col = &self.ae.conj_row * coef_ae[j] + &self.pe.conj_row * coef_pe[j];
            for (row, coefs) in self.users.iter().zip(&coef_user) {
                col += &row.conj_row * coefs[j];
            }
            grad.set_column(j, &col);
        }
        (total, Some(grad))
    }

    /// `[P − ‖W‖²_F, linearized echo residual]`.
    pub fn residuals(&self, w: &CMatrix) -> Vec<f64> {
        let mut out = vec![self.power - frob_norm_sq(w)];
        if let Some(h) = &self.sensing {
            out.push(h.residual(w));
        }
        out
    }
}

impl AscentProblem for TransmitSurrogate {
    fn value(&self, x: &CMatrix) -> f64 {
        self.evaluate(x, false).0
    }

    fn gradient(&self, x: &CMatrix) -> CMatrix {
        self.evaluate(x, true).1.unwrap_or_else(|| CMatrix::zeros(x.nrows(), x.ncols()))
    }

    fn project(&self, x: &CMatrix) -> Result<CMatrix> {
        match &self.sensing {
            None => Ok(project_power_ball(x, self.power)),
            Some(h) => project_ball_halfspace(x, self.power, h, self.dykstra_iters, self.dykstra_tol),
        }
    }

    fn scale(&self) -> f64 {
        self.power.sqrt()
    }
}

/// Gradient of the transmit surrogate in complex-encoded real coordinates.
pub fn surrogate_gradient_w(surrogate: &TransmitSurrogate, w: &CMatrix) -> CMatrix {
    surrogate.gradient(w)
}

/// Maximizes the transmit surrogate around `anchor_w`. When the constraint
/// set turns out empty the anchor is returned with an `Infeasible`
/// termination.
pub fn solve_w_subproblem(
    ch: &ChannelSet,
    state: &BeamformingState,
    aux: &AuxiliaryVars,
    anchor_w: &CMatrix,
    params: &SolverParams,
) -> Result<(CMatrix, SubproblemReport)> {
    let surrogate = TransmitSurrogate::new(ch, state, aux, anchor_w, params)?;
    let smooth = (params.smoothing > 0.0).then(|| surrogate.smoothed(params.smoothing));
    match smoothed_ascent(&surrogate, smooth.as_ref(), anchor_w, params) {
        Ok((w, mut report)) => {
            report.residuals = surrogate.residuals(&w);
            Ok((w, report))
        }
        Err(Error::Infeasible(_)) => {
            let report = SubproblemReport {
                objective: vec![surrogate.value(anchor_w)],
                residuals: surrogate.residuals(anchor_w),
                steps: 0,
                termination: Termination::Infeasible,
            };
            Ok((anchor_w.clone(), report))
        }
        Err(e) => Err(e),
    }
}
