//! Exhaustive search on micro instances (one user, two antennas, at most two
//! RIS elements).
//!
//! Every reflection vector on a uniform phase grid is paired with every
//! point of a transmit grid. The communication beam is
//! `√p_c·[cos α, sin α·e^{jβ}]` and all remaining power goes to a single
//! radar beam, either in the null space of the user channel or on the same
//! `(α, β)` direction grid. The receive beamformer is the matched filter
//! `h_bt/‖h_bt‖`. Points that miss the echo constraint are skipped.
//!
//! Rates are evaluated with closed forms written for this layout only, so
//! the search shares no code with the optimizer or the metric module.

use std::f64::consts::{FRAC_PI_2, LN_2, TAU};

use num_complex::Complex64;

use rayon::prelude::*;

use crate::channel::{generate_scenario, ChannelSet, SystemConfig};
use crate::jbrd::{run_jbrd, JbrdConfig};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector};
use crate::metrics::BeamformingState;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleGrid {
    /// Phases per RIS element.
    pub phase_levels: usize,
    /// Splits of the beam direction magnitude over `[0, π/2]`.
    pub alpha_levels: usize,
    /// Relative phases over `[0, 2π)`.
    pub beta_levels: usize,
    /// Communication power fractions `1/L, 2/L, …, 1`.
    pub power_levels: usize,
}

impl Default for OracleGrid {
    fn default() -> Self {
        Self { phase_levels: 64, alpha_levels: 10, beta_levels: 10, power_levels: 10 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult {
    /// Best secrecy rate found, zero when no grid point is feasible.
    pub secrecy_rate: f64,
    pub feasible_points: usize,
    /// Maximizer; `None` when nothing is feasible.
    pub state: Option<BeamformingState>,
}

/// Shrinks `base` to the micro layout: K = 1, N = 2, M = 2.
pub fn micro_config(base: &SystemConfig, seed: u64) -> SystemConfig {
    SystemConfig { users: 1, antennas: 2, ris_elements: 2, seed, ..base.clone() }
}

fn dot(a: [Complex64; 2], b: [Complex64; 2]) -> Complex64 {
    a[0] * b[0] + a[1] * b[1]
}

fn rows_for(ch: &ChannelSet, phi: &[Complex64]) -> ([Complex64; 2], [Complex64; 2]) {
    let mut user = [ch.g_b[0][0].conj(), ch.g_b[0][1].conj()];
    let mut pe = [ch.h_bp[0].conj(), ch.h_bp[1].conj()];
    for (m, &p) in phi.iter().enumerate() {
        let cu = ch.g_r[0][m].conj() * p;
        let cp = ch.h_rp[m].conj() * p;
        for n in 0..2 {
            user[n] += cu * ch.h_br[(m, n)];
            pe[n] += cp * ch.h_br[(m, n)];
        }
    }
    (user, pe)
}

/// Searches the grid on a micro instance.
pub fn brute_force(ch: &ChannelSet, grid: &OracleGrid) -> Result<OracleResult> {
    if ch.users() != 1 || ch.antennas() != 2 || ch.ris_elements() > 2 {
        return Err(Error::Dimension("oracle expects K = 1, N = 2 and M <= 2".into()));
    }
    if grid.phase_levels == 0 || grid.alpha_levels == 0 || grid.beta_levels == 0 || grid.power_levels == 0 {
        return crate::error::domain("oracle grid levels must be positive");
    }
    let p = &ch.params;
    let m = ch.ris_elements();
    let h = [ch.h_bt[0], ch.h_bt[1]];
    let ae = [h[0].conj(), h[1].conj()];
    let h_sq = h[0].norm_sqr() + h[1].norm_sqr();
    // Matched filter: |uᴴh|² = ‖h‖². The AE row doubles as the echo row.
    let echo_scale = p.rcs * h_sq / (p.noise_sensing + p.jam_power * h_sq);
    let user_extra = p.jam_power * ch.h_ae[0].norm_sqr() + p.noise_user;

    let directions: Vec<[Complex64; 2]> = (0..grid.alpha_levels)
        .flat_map(|ia| {
            let alpha = if grid.alpha_levels == 1 { 0.0 } else { FRAC_PI_2 * ia as f64 / (grid.alpha_levels - 1) as f64 };
            (0..grid.beta_levels).map(move |ib| {
                let beta = TAU * ib as f64 / grid.beta_levels as f64;
                [Complex64::from(alpha.cos()), Complex64::from_polar(alpha.sin(), beta)]
            })
        })
        .collect();
    let fractions: Vec<f64> = (1..=grid.power_levels).map(|j| j as f64 / grid.power_levels as f64).collect();

    let combos = grid.phase_levels.pow(m as u32);
    // (rate, φ index, comm direction, radar direction, comm fraction)
    let mut best = (f64::NEG_INFINITY, usize::MAX, usize::MAX, usize::MAX, 0.0);
    let mut feasible_points = 0;
    let mut phi = vec![Complex64::from(1.0); m];
    for c in 0..combos {
        let mut idx = c;
        for z in phi.iter_mut() {
            *z = Complex64::from_polar(1.0, TAU * (idx % grid.phase_levels) as f64 / grid.phase_levels as f64);
            idx /= grid.phase_levels;
        }
        let (user, pe) = rows_for(ch, &phi);
        let gains: Vec<[f64; 3]> = std::iter::once(null_direction(user))
            .chain(directions.iter().copied())
            .map(|d| [dot(user, d).norm_sqr(), dot(ae, d).norm_sqr(), dot(pe, d).norm_sqr()])
            .collect();
        for (d_idx, &[g_user, g_ae, g_pe]) in gains[1..].iter().enumerate() {
            for (v_idx, &[user_radar, ae_radar, pe_radar]) in gains.iter().enumerate() {
                for &f in &fractions {
                    let p_c = f * p.bs_power;
                    let p_r = p.bs_power - p_c;
                    let scnr = echo_scale * (g_ae * p_c + ae_radar * p_r);
                    if scnr < p.gamma_echo {
                        continue;
                    }
                    feasible_points += 1;
                    let r_user = (g_user * p_c / (user_radar * p_r + user_extra)).ln_1p();
                    let r_ae = (g_ae * p_c / (ae_radar * p_r + p.noise_ae)).ln_1p();
                    let r_pe = (g_pe * p_c / (pe_radar * p_r + p.noise_pe)).ln_1p();
                    let sr = ((r_user - r_ae.max(r_pe)) / LN_2).max(0.0);
                    if sr > best.0 {
                        best = (sr, c, d_idx, v_idx, f);
                    }
                }
            }
        }
    }
    if feasible_points == 0 {
        return Ok(OracleResult { secrecy_rate: 0.0, feasible_points, state: None });
    }

    let (sr, c, d_idx, v_idx, f) = best;
    let mut idx = c;
    for z in phi.iter_mut() {
        *z = Complex64::from_polar(1.0, TAU * (idx % grid.phase_levels) as f64 / grid.phase_levels as f64);
        idx /= grid.phase_levels;
    }
    let (user, _) = rows_for(ch, &phi);
    let v = if v_idx == 0 { null_direction(user) } else { directions[v_idx - 1] };
    let d = directions[d_idx];
    let (amp_c, amp_r) = ((f * p.bs_power).sqrt(), ((1.0 - f) * p.bs_power).sqrt());
    let mut w = CMatrix::zeros(2, 3);
    for n in 0..2 {
        w[(n, 0)] = d[n] * amp_c;
        w[(n, 1)] = v[n] * amp_r;
    }
    let u = CVector::from_vec(vec![h[0] / h_sq.sqrt(), h[1] / h_sq.sqrt()]);
    let state = BeamformingState { w, phi: CVector::from_vec(phi), u };
    Ok(OracleResult { secrecy_rate: sr, feasible_points, state: Some(state) })
}

/// JBRD against the grid optimum on one micro instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleComparison {
    pub seed: u64,
    pub jbrd_sr: f64,
    pub oracle_sr: f64,
    pub jbrd_infeasible: bool,
}

impl OracleComparison {
    /// `jbrd_sr / oracle_sr`, or 1 when the oracle finds nothing positive.
    pub fn ratio(&self) -> f64 {
        if self.oracle_sr > 0.0 {
            self.jbrd_sr / self.oracle_sr
        } else {
            1.0
        }
    }
}

/// Runs JBRD and the grid search on micro instances derived from `base`.
pub fn compare_micro(
    base: &SystemConfig,
    config: &JbrdConfig,
    seeds: &[u64],
    grid: &OracleGrid,
) -> Result<Vec<OracleComparison>> {
    seeds
        .par_iter()
        .map(|&seed| {
            let ch = generate_scenario(&micro_config(base, seed))?;
            let (_, trace) = run_jbrd(&ch, config)?;
            let oracle = brute_force(&ch, grid)?;
            Ok(OracleComparison {
                seed,
                jbrd_sr: trace.final_secrecy_rate,
                oracle_sr: oracle.secrecy_rate,
                jbrd_infeasible: trace.is_infeasible(),
            })
        })
        .collect()
}

/// Unit vector `v` with `row·v = 0`.
fn null_direction(row: [Complex64; 2]) -> [Complex64; 2] {
    let norm = (row[0].norm_sqr() + row[1].norm_sqr()).sqrt();
    if norm == 0.0 {
        return [Complex64::from(1.0), Complex64::from(0.0)];
    }
    [row[1] / norm, -row[0] / norm]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn null_direction_is_orthogonal_unit() {
        let row = [Complex64::new(1.0, -2.0), Complex64::new(0.5, 0.25)];
        let v = null_direction(row);
        assert!(dot(row, v).norm() < 1e-15);
        assert!(((v[0].norm_sqr() + v[1].norm_sqr()) - 1.0).abs() < 1e-15);
    }
}
