//! Variational log-ratio transform and first-order minorizers.
//!
//! Each rate is a difference of logs. The variational forms
//! `−ln x = max_{r>0} (−r·x + ln r + 1)` and
//! `ln x = min_{r>0} (r·x − ln r − 1)`, both attained at `r* = 1/x`, turn
//! the user rate into a lower bound and the eavesdropper rates into upper
//! bounds that are tight at the closed-form auxiliaries. All `phi_*`
//! functions return nats; conversion to bits happens when the objective is
//! assembled.
//!
//! The convex quadratics `|v·w|²` that end up on the wrong side of a
//! concave objective are replaced by their tangent planes at an anchor,
//! which are global lower bounds.

use num_complex::Complex64;

use crate::channel::{ChannelSet, SignalParams};
use crate::error::{domain, Error, Result};
use crate::linalg::{row_apply, row_apply_column, CMatrix, CVector};
use crate::metrics::{ae_row, column_gains, composite_pe_channel, composite_user_channel, BeamformingState};

/// Closed-form auxiliaries `r_k`, `r_a,k`, `r_p,k` for every user.
#[derive(Debug, Clone, PartialEq)]
pub struct AuxiliaryVars {
    pub r: Vec<f64>,
    pub r_a: Vec<f64>,
    pub r_p: Vec<f64>,
}

impl AuxiliaryVars {
    /// Evaluates all auxiliaries at `state`.
    pub fn at(ch: &ChannelSet, state: &BeamformingState) -> Result<Self> {
        let scales = NoiseScale::from_params(&ch.params);
        let k = ch.users();
        let mut out = Self { r: Vec::with_capacity(k), r_a: Vec::with_capacity(k), r_p: Vec::with_capacity(k) };
        for user in 0..k {
            out.r.push(opt_r_user(ch, state, user, &scales)?);
            out.r_a.push(opt_r_ae(ch, state, user, &scales)?);
            out.r_p.push(opt_r_pe(ch, state, user, &scales)?);
        }
        Ok(out)
    }
}

/// Inverse noise powers `m = 1/σ²`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseScale {
    pub m_k: f64,
    pub m_a: f64,
    pub m_p: f64,
    pub m_s: f64,
}

impl NoiseScale {
    pub fn from_params(p: &SignalParams) -> Self {
        Self {
            m_k: 1.0 / p.noise_user,
            m_a: 1.0 / p.noise_ae,
            m_p: 1.0 / p.noise_pe,
            m_s: 1.0 / p.noise_sensing,
        }
    }
}

fn sum_except(gains: &[f64], k: usize) -> f64 {
    gains.iter().enumerate().filter(|(i, _)| *i != k).map(|(_, g)| g).sum()
}

fn check_user(ch: &ChannelSet, k: usize) -> Result<()> {
    if k >= ch.users() {
        return Err(Error::IndexOutOfRange { what: "user", index: k, len: ch.users() });
    }
    Ok(())
}

/// User-`k` interference-plus-noise level in units of the noise power.
fn user_levels(ch: &ChannelSet, state: &BeamformingState, k: usize, scales: &NoiseScale) -> Result<(f64, f64)> {
    state.check_dims(ch)?;
    let row = composite_user_channel(ch, &state.phi, k)?;
    let gains = column_gains(&row, &state.w);
    let jam = scales.m_k * ch.params.jam_power * ch.h_ae[k].norm_sqr();
    let total = scales.m_k * gains.iter().sum::<f64>() + jam + 1.0;
    let interference = scales.m_k * sum_except(&gains, k) + jam + 1.0;
    Ok((total, interference))
}

fn ae_levels(ch: &ChannelSet, state: &BeamformingState, k: usize, scales: &NoiseScale) -> Result<(f64, f64)> {
    state.check_dims(ch)?;
    check_user(ch, k)?;
    let gains = column_gains(&ae_row(ch), &state.w);
    Ok((scales.m_a * gains.iter().sum::<f64>() + 1.0, scales.m_a * sum_except(&gains, k) + 1.0))
}

fn pe_levels(ch: &ChannelSet, state: &BeamformingState, k: usize, scales: &NoiseScale) -> Result<(f64, f64)> {
    state.check_dims(ch)?;
    check_user(ch, k)?;
    let gains = column_gains(&composite_pe_channel(ch, &state.phi)?, &state.w);
    Ok((scales.m_p * gains.iter().sum::<f64>() + 1.0, scales.m_p * sum_except(&gains, k) + 1.0))
}

/// `r_k = 1 / (m_k Σ_{i≠k}|g_k w_i|² + m_k P_e|h_ae,k|² + 1)`.
pub fn opt_r_user(ch: &ChannelSet, state: &BeamformingState, k: usize, scales: &NoiseScale) -> Result<f64> {
    Ok(1.0 / user_levels(ch, state, k, scales)?.1)
}

/// `r_a,k = 1 / (m_a Σ_i |h_btᴴ w_i|² + 1)`; the sum includes `i = k`.
pub fn opt_r_ae(ch: &ChannelSet, state: &BeamformingState, k: usize, scales: &NoiseScale) -> Result<f64> {
    Ok(1.0 / ae_levels(ch, state, k, scales)?.0)
}

/// `r_p,k = 1 / (m_p Σ_i |h_pe(Φ) w_i|² + 1)`; the sum includes `i = k`.
pub fn opt_r_pe(ch: &ChannelSet, state: &BeamformingState, k: usize, scales: &NoiseScale) -> Result<f64> {
    Ok(1.0 / pe_levels(ch, state, k, scales)?.0)
}

fn check_r(r: f64) -> Result<()> {
    if !(r > 0.0) {
        return domain(format!("auxiliary variable must be positive, got {r}"));
    }
    Ok(())
}

/// `ln(total) − r·interference + ln r + 1`, a lower bound on the user rate
/// in nats that is tight at `r = opt_r_user`.
pub fn phi_user(ch: &ChannelSet, state: &BeamformingState, r: f64, k: usize) -> Result<f64> {
    check_r(r)?;
    let scales = NoiseScale::from_params(&ch.params);
    let (total, interference) = user_levels(ch, state, k, &scales)?;
    Ok(total.ln() - r * interference + r.ln() + 1.0)
}

/// `r·total − ln r − 1 − ln(interference)`, an upper bound on the AE rate in
/// nats that is tight at `r = opt_r_ae`.
pub fn phi_ae(ch: &ChannelSet, state: &BeamformingState, r: f64, k: usize) -> Result<f64> {
    check_r(r)?;
    let scales = NoiseScale::from_params(&ch.params);
    let (total, interference) = ae_levels(ch, state, k, &scales)?;
    Ok(r * total - r.ln() - 1.0 - interference.ln())
}

/// PE counterpart of [`phi_ae`].
pub fn phi_pe(ch: &ChannelSet, state: &BeamformingState, r: f64, k: usize) -> Result<f64> {
    check_r(r)?;
    let scales = NoiseScale::from_params(&ch.params);
    let (total, interference) = pe_levels(ch, state, k, &scales)?;
    Ok(r * total - r.ln() - 1.0 - interference.ln())
}

/// Tangent of `|row·w|²` at `anchor`:
/// `2Re{conj(row·anchor)(row·w)} − |row·anchor|²`.
pub fn taylor_eta_row(row: &CVector, w: &CVector, anchor: &CVector) -> f64 {
    let a0 = row_apply(row, anchor.iter().copied());
    let a = row_apply(row, w.iter().copied());
    2.0 * (a0.conj() * a).re - a0.norm_sqr()
}

/// Minorizer `η_k(w_i)` of `|g_k(Φ) w_i|²`.
pub fn taylor_eta_user(ch: &ChannelSet, phi: &CVector, w: &CVector, anchor: &CVector, k: usize) -> Result<f64> {
    let row = composite_user_channel(ch, phi, k)?;
    Ok(taylor_eta_row(&row, w, anchor))
}

/// Minorizer `η_ae(w_i)` of `|h_btᴴ w_i|²`.
pub fn taylor_eta_ae(ch: &ChannelSet, w: &CVector, anchor: &CVector) -> f64 {
    taylor_eta_row(&ae_row(ch), w, anchor)
}

/// Minorizer `η_pe(w_i)` of `|h_pe(Φ) w_i|²`.
pub fn taylor_eta_pe(ch: &ChannelSet, phi: &CVector, w: &CVector, anchor: &CVector) -> Result<f64> {
    Ok(taylor_eta_row(&composite_pe_channel(ch, phi)?, w, anchor))
}

/// Echo row `uᴴH_bt`.
pub fn echo_row(ch: &ChannelSet, u: &CVector) -> CVector {
    let u_h = u.dotc(&ch.h_bt);
    ch.h_bt.map(|z| u_h * z.conj())
}

/// Minorizer `η_echo(w_i)` of `|uᴴH_bt w_i|²`.
pub fn taylor_eta_echo(ch: &ChannelSet, u: &CVector, w: &CVector, anchor: &CVector) -> f64 {
    taylor_eta_row(&echo_row(ch, u), w, anchor)
}

/// Affine-in-φ pieces of every link: `g_k(Φ)w_i = φᵀs_{k,i} + t_{k,i}` and
/// `h_pe(Φ)w_i = φᵀa_i + b_i`.
#[derive(Debug, Clone, PartialEq)]
pub struct RisDecomposition {
    /// `s[k][i]`, length `M`.
    pub s: Vec<Vec<CVector>>,
    pub t: Vec<Vec<Complex64>>,
    /// `a[i]`, length `M`.
    pub a: Vec<CVector>,
    pub b: Vec<Complex64>,
}

impl RisDecomposition {
    pub fn users(&self) -> usize {
        self.s.len()
    }

    pub fn streams(&self) -> usize {
        self.b.len()
    }

    /// `φᵀs_{k,i} + t_{k,i}`.
    pub fn user_link(&self, phi: &CVector, k: usize, i: usize) -> Complex64 {
        phi.iter().zip(self.s[k][i].iter()).map(|(p, s)| p * s).sum::<Complex64>() + self.t[k][i]
    }

    /// `φᵀa_i + b_i`.
    pub fn pe_link(&self, phi: &CVector, i: usize) -> Complex64 {
        phi.iter().zip(self.a[i].iter()).map(|(p, a)| p * a).sum::<Complex64>() + self.b[i]
    }
}

/// Builds `s_{k,i} = diag(g_r,kᴴ)H_br w_i`, `t_{k,i} = g_b,kᴴw_i`,
/// `a_i = diag(h_rpᴴ)H_br w_i` and `b_i = h_bpᴴw_i`.
pub fn ris_decompose(ch: &ChannelSet, w: &CMatrix) -> Result<RisDecomposition> {
    let (n, cols) = (ch.antennas(), ch.streams());
    if w.shape() != (n, cols) {
        return Err(Error::Dimension(format!("W is {:?}, expected ({n}, {cols})", w.shape())));
    }
    let reflected = &ch.h_br * w; // M × (K+N)
    let conj_row = |v: &CVector| v.map(|z| z.conj());
    let s = ch
        .g_r
        .iter()
        .map(|g_r| {
            (0..cols)
                .map(|i| CVector::from_fn(g_r.len(), |m, _| g_r[m].conj() * reflected[(m, i)]))
                .collect()
        })
        .collect();
    let t = ch
        .g_b
        .iter()
        .map(|g_b| {
            let row = conj_row(g_b);
            (0..cols).map(|i| row_apply_column(&row, w, i)).collect()
        })
        .collect();
    let a = (0..cols)
        .map(|i| CVector::from_fn(ch.h_rp.len(), |m, _| ch.h_rp[m].conj() * reflected[(m, i)]))
        .collect();
    let bp = conj_row(&ch.h_bp);
    let b = (0..cols).map(|i| row_apply_column(&bp, w, i)).collect();
    Ok(RisDecomposition { s, t, a, b })
}

/// Tangent of `|φᵀs + t|²` at `anchor`; the cross and constant terms are
/// affine in φ already, so this is the full first-order expansion.
pub fn taylor_eta_phi(s: &CVector, t: Complex64, phi: &CVector, anchor: &CVector) -> f64 {
    let lin = |p: &CVector| p.iter().zip(s.iter()).map(|(a, b)| a * b).sum::<Complex64>();
    let q0 = lin(anchor);
    let q = lin(phi);
    // q0 q0* + 2Re{q0 (q − q0)*} + 2Re{t q*} + |t|²
    q0.norm_sqr() + 2.0 * (q0 * (q - q0).conj()).re + 2.0 * (t * q.conj()).re + t.norm_sqr()
}

/// `η_{k,i}(φ)`.
pub fn taylor_eta_phi_user(d: &RisDecomposition, phi: &CVector, anchor: &CVector, k: usize, i: usize) -> f64 {
    taylor_eta_phi(&d.s[k][i], d.t[k][i], phi, anchor)
}

/// `η_i(φ)`.
pub fn taylor_eta_phi_pe(d: &RisDecomposition, phi: &CVector, anchor: &CVector, i: usize) -> f64 {
    taylor_eta_phi(&d.a[i], d.b[i], phi, anchor)
}

/// `2Re{φᴴφ_anchor} − ‖φ_anchor‖²`, a lower bound on `‖φ‖²`.
pub fn norm_sq_minorizer(phi: &CVector, anchor: &CVector) -> f64 {
    2.0 * phi.dotc(anchor).re - anchor.norm_squared()
}
