//! Performance quantities: composite channels, SINRs and rates of the users
//! and both eavesdroppers, the echo SCNR and the system secrecy rate.
//!
//! Row vectors (`g_k(Φ)`, `h_pe(Φ)`) are stored as plain vectors and act on
//! a beamformer column without conjugation.

use num_complex::Complex64;

use crate::channel::ChannelSet;
use crate::error::{domain, Error, Result};
use crate::linalg::{frob_norm_sq, row_apply_column, CMatrix, CVector};

/// Decision variables of the design problem.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamformingState {
    /// `N×(K+N)`: communication columns first, then the radar columns.
    pub w: CMatrix,
    /// RIS reflection vector, `Φ = diag(phi)`.
    pub phi: CVector,
    /// Receive beamformer at the BS.
    pub u: CVector,
}

impl BeamformingState {
    pub fn check_dims(&self, ch: &ChannelSet) -> Result<()> {
        let (n, cols, m) = (ch.antennas(), ch.streams(), ch.ris_elements());
        if self.w.shape() != (n, cols) {
            return Err(Error::Dimension(format!(
                "W is {:?}, expected ({n}, {cols})",
                self.w.shape()
            )));
        }
        if self.phi.len() != m {
            return Err(Error::Dimension(format!("phi has {} entries, expected {m}", self.phi.len())));
        }
        if self.u.len() != n {
            return Err(Error::Dimension(format!("u has {} entries, expected {n}", self.u.len())));
        }
        Ok(())
    }

    pub fn power(&self) -> f64 {
        frob_norm_sq(&self.w)
    }

    /// `max_m ||φ_m| − 1|`, zero without a RIS.
    pub fn modulus_deviation(&self) -> f64 {
        self.phi.iter().map(|z| (z.norm() - 1.0).abs()).fold(0.0, f64::max)
    }
}

/// Secrecy rate together with every intermediate quantity and the
/// constraint residuals.
#[derive(Debug, Clone, PartialEq)]
pub struct SecrecyReport {
    pub rate_user: Vec<f64>,
    pub rate_ae: Vec<f64>,
    pub rate_pe: Vec<f64>,
    /// `max(0, R_k − max(R_ae,k, R_pe,k))`.
    pub secrecy_terms: Vec<f64>,
    /// `Σ_k (R_k − max(R_ae,k, R_pe,k))` without the clamp.
    pub unclamped_sum: f64,
    pub secrecy_rate: f64,
    pub scnr: f64,
    /// `P − ‖W‖²_F`.
    pub power_slack: f64,
    /// `SCNR − γ_echo`.
    pub scnr_slack: f64,
    pub modulus_deviation: f64,
}

fn check_user(ch: &ChannelSet, k: usize) -> Result<()> {
    if k >= ch.users() {
        return Err(Error::IndexOutOfRange { what: "user", index: k, len: ch.users() });
    }
    Ok(())
}

fn check_phi(ch: &ChannelSet, phi: &CVector) -> Result<()> {
    if phi.len() != ch.ris_elements() {
        return Err(Error::Dimension(format!(
            "phi has {} entries, expected {}",
            phi.len(),
            ch.ris_elements()
        )));
    }
    Ok(())
}

/// `d_directᴴ + rᴴ·diag(φ)·H_br` as a row.
fn composite_row(direct: &CVector, reflected: &CVector, phi: &CVector, h_br: &crate::linalg::CMatrix) -> CVector {
    let mut row = direct.map(|z| z.conj());
    for m in 0..phi.len() {
        let coef = reflected[m].conj() * phi[m];
        for (n, entry) in row.iter_mut().enumerate() {
            *entry += coef * h_br[(m, n)];
        }
    }
    row
}

/// Composite BS→user-`k` channel `g_b,kᴴ + g_r,kᴴ·diag(φ)·H_br` (0-based `k`).
pub fn composite_user_channel(ch: &ChannelSet, phi: &CVector, k: usize) -> Result<CVector> {
    check_user(ch, k)?;
    check_phi(ch, phi)?;
    Ok(composite_row(&ch.g_b[k], &ch.g_r[k], phi, &ch.h_br))
}

/// Composite BS→PE channel `h_bpᴴ + h_rpᴴ·diag(φ)·H_br`.
pub fn composite_pe_channel(ch: &ChannelSet, phi: &CVector) -> Result<CVector> {
    check_phi(ch, phi)?;
    Ok(composite_row(&ch.h_bp, &ch.h_rp, phi, &ch.h_br))
}

/// The AE sees `h_btᴴ·x`; as a row that is `conj(h_bt)`.
pub fn ae_row(ch: &ChannelSet) -> CVector {
    ch.h_bt.map(|z| z.conj())
}

/// `|row·w_i|²` for every column `i` of `w`.
pub fn column_gains(row: &CVector, w: &CMatrix) -> Vec<f64> {
    (0..w.ncols()).map(|i| row_apply_column(row, w, i).norm_sqr()).collect()
}

/// `gains[k] / (Σ_{i≠k} gains[i] + extra)`.
pub(crate) fn sinr_from_gains(gains: &[f64], k: usize, extra: f64) -> f64 {
    let interference: f64 = gains.iter().enumerate().filter(|(i, _)| *i != k).map(|(_, g)| g).sum();
    gains[k] / (interference + extra)
}

/// User SINR; the interference sum covers every other column, radar included.
pub fn sinr_user(ch: &ChannelSet, state: &BeamformingState, k: usize) -> Result<f64> {
    state.check_dims(ch)?;
    let row = composite_user_channel(ch, &state.phi, k)?;
    let gains = column_gains(&row, &state.w);
    let p = &ch.params;
    Ok(sinr_from_gains(&gains, k, p.jam_power * ch.h_ae[k].norm_sqr() + p.noise_user))
}

/// `log2(1 + SINR_k)` in bits/s/Hz.
pub fn rate_user(ch: &ChannelSet, state: &BeamformingState, k: usize) -> Result<f64> {
    Ok(sinr_user(ch, state, k)?.ln_1p() / std::f64::consts::LN_2)
}

/// Echo SCNR after receive beamforming with `u`.
pub fn scnr_echo(ch: &ChannelSet, state: &BeamformingState) -> Result<f64> {
    state.check_dims(ch)?;
    scnr_for(ch, &state.w, &state.u)
}

pub(crate) fn scnr_for(ch: &ChannelSet, w: &CMatrix, u: &CVector) -> Result<f64> {
    let u_norm_sq = u.norm_squared();
    if u_norm_sq == 0.0 {
        return domain("receive beamformer u must be non-zero");
    }
    let p = &ch.params;
    // uᴴH_bt = (uᴴh_bt)·h_btᴴ, so the echo row is a scaled conj(h_bt).
    let u_h = u.dotc(&ch.h_bt);
    let echo_row = ch.h_bt.map(|z| u_h * z.conj());
    let signal: f64 = column_gains(&echo_row, w).iter().sum();
    let denom = p.noise_sensing * u_norm_sq + p.jam_power * u_h.norm_sqr();
    Ok(p.rcs * signal / denom)
}

pub fn sinr_ae(ch: &ChannelSet, state: &BeamformingState, k: usize) -> Result<f64> {
    state.check_dims(ch)?;
    check_user(ch, k)?;
    let gains = column_gains(&ae_row(ch), &state.w);
    Ok(sinr_from_gains(&gains, k, ch.params.noise_ae))
}

pub fn rate_ae(ch: &ChannelSet, state: &BeamformingState, k: usize) -> Result<f64> {
    Ok(sinr_ae(ch, state, k)?.ln_1p() / std::f64::consts::LN_2)
}

pub fn sinr_pe(ch: &ChannelSet, state: &BeamformingState, k: usize) -> Result<f64> {
    state.check_dims(ch)?;
    check_user(ch, k)?;
    let row = composite_pe_channel(ch, &state.phi)?;
    let gains = column_gains(&row, &state.w);
    Ok(sinr_from_gains(&gains, k, ch.params.noise_pe))
}

pub fn rate_pe(ch: &ChannelSet, state: &BeamformingState, k: usize) -> Result<f64> {
    Ok(sinr_pe(ch, state, k)?.ln_1p() / std::f64::consts::LN_2)
}

/// Per-user rates `(R_k, R_ae,k, R_pe,k)` computed with shared gain tables.
pub fn rates(ch: &ChannelSet, state: &BeamformingState) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    state.check_dims(ch)?;
    let p = &ch.params;
    let to_bits = |sinr: f64| sinr.ln_1p() / std::f64::consts::LN_2;
    let ae_gains = column_gains(&ae_row(ch), &state.w);
    let pe_gains = column_gains(&composite_pe_channel(ch, &state.phi)?, &state.w);
    let mut r_user = Vec::with_capacity(ch.users());
    let mut r_ae = Vec::with_capacity(ch.users());
    let mut r_pe = Vec::with_capacity(ch.users());
    for k in 0..ch.users() {
        let row = composite_user_channel(ch, &state.phi, k)?;
        let gains = column_gains(&row, &state.w);
        r_user.push(to_bits(sinr_from_gains(&gains, k, p.jam_power * ch.h_ae[k].norm_sqr() + p.noise_user)));
        r_ae.push(to_bits(sinr_from_gains(&ae_gains, k, p.noise_ae)));
        r_pe.push(to_bits(sinr_from_gains(&pe_gains, k, p.noise_pe)));
    }
    Ok((r_user, r_ae, r_pe))
}

/// `Σ_k (R_k − max(R_ae,k, R_pe,k))`, the quantity the optimizer ascends.
pub fn unclamped_secrecy_sum(ch: &ChannelSet, state: &BeamformingState) -> Result<f64> {
    let (u, a, p) = rates(ch, state)?;
    Ok((0..u.len()).map(|k| u[k] - a[k].max(p[k])).sum())
}

/// System secrecy rate `Σ_k (R_k − max(R_ae,k, R_pe,k))⁺` and residuals.
pub fn secrecy_rate(ch: &ChannelSet, state: &BeamformingState) -> Result<SecrecyReport> {
    let (rate_user, rate_ae, rate_pe) = rates(ch, state)?;
    let raw: Vec<f64> = (0..rate_user.len())
        .map(|k| rate_user[k] - rate_ae[k].max(rate_pe[k]))
        .collect();
    let secrecy_terms: Vec<f64> = raw.iter().map(|t| t.max(0.0)).collect();
    let scnr = scnr_echo(ch, state)?;
    Ok(SecrecyReport {
        unclamped_sum: raw.iter().sum(),
        secrecy_rate: secrecy_terms.iter().sum(),
        secrecy_terms,
        rate_user,
        rate_ae,
        rate_pe,
        scnr,
        power_slack: ch.params.bs_power - state.power(),
        scnr_slack: scnr - ch.params.gamma_echo,
        modulus_deviation: state.modulus_deviation(),
    })
}

/// Clamped per-user secrecy sum from precomputed rates.
pub fn clamped_secrecy(rate_user: &[f64], rate_ae: &[f64], rate_pe: &[f64]) -> f64 {
    rate_user
        .iter()
        .zip(rate_ae.iter().zip(rate_pe))
        .map(|(r, (a, p))| (r - a.max(*p)).max(0.0))
        .sum()
}

/// Multiplies column `i` of `w` by a unit phasor.
pub fn rotate_column(w: &CMatrix, i: usize, theta: f64) -> CMatrix {
    let mut out = w.clone();
    let ph = Complex64::from_polar(1.0, theta);
    out.column_mut(i).iter_mut().for_each(|z| *z *= ph);
    out
}
