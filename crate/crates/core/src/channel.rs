//! Scenario geometry and channel realizations.
//!
//! The BS and the RIS carry uniform linear arrays whose broadside points
//! along `+y`. The angle of a peer seen from an array at `origin` is
//! `atan2(Δx, Δy)`, so `sin θ = Δx / d`.
//!
//! Links that involve the RIS (BS→RIS, RIS→user, RIS→PE) are Rician with a
//! steering-vector LOS part; BS→user, BS→PE and AE→user are Rayleigh; the
//! BS→target link is pure LOS. Every link is scaled by `sqrt(PL(d))`.
//!
//! Randomness comes from ChaCha8 (`rand_chacha::ChaCha8Rng::seed_from_u64`)
//! split into independent streams with `set_stream`, one per purpose. The
//! direct links and the user placement never share a stream with the RIS
//! links, so changing `M` leaves every non-RIS channel untouched.

use std::f64::consts::{PI, TAU};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{domain, Error, Result};
use crate::linalg::{outer, sample_cn, CMatrix, CVector};

/// RNG stream used for the user placement.
pub const STREAM_PLACEMENT: u64 = 1;
/// RNG stream used for the direct (non-RIS) fading links.
pub const STREAM_DIRECT: u64 = 2;
/// RNG stream used for the RIS-side fading links.
pub const STREAM_RIS: u64 = 3;
/// RNG stream reserved for the benchmark schemes (random phases, random `u`).
pub const STREAM_BENCHMARK: u64 = 4;
/// RNG stream reserved for randomized initial points.
pub const STREAM_INIT: u64 = 5;

/// Builds the generator for one purpose-specific stream of `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * watts.log10() + 30.0
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Distance-dependent path loss `C0·(d0/d)^ε`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathLossModel {
    /// Reference gain at `d0` (linear).
    pub c0: f64,
    /// Reference distance (m).
    pub d0: f64,
    pub exp_bs_target: f64,
    pub exp_bs_ris: f64,
    /// RIS→user and RIS→PE.
    pub exp_ris_user: f64,
    /// BS→user and BS→PE.
    pub exp_bs_user: f64,
    pub exp_ae_user: f64,
}

impl Default for PathLossModel {
    fn default() -> Self {
        Self {
            c0: db_to_linear(-30.0),
            d0: 1.0,
            exp_bs_target: 2.0,
            exp_bs_ris: 2.2,
            exp_ris_user: 2.4,
            exp_bs_user: 3.7,
            exp_ae_user: 2.6,
        }
    }
}

/// Node positions in the 2-D plane (meters).
#[derive(Debug, Clone, PartialEq)]
pub struct Geometry {
    pub bs: [f64; 2],
    pub ris: [f64; 2],
    /// Sensing target, which is also the active eavesdropper.
    pub target: [f64; 2],
    pub pe: [f64; 2],
    /// Users sit on a circle of this radius.
    pub user_circle_radius: f64,
    /// Circle center; `None` puts it at the RIS.
    pub user_center: Option<[f64; 2]>,
}

impl Default for Geometry {
    fn default() -> Self {
        Self {
            bs: [0.0, 0.0],
            ris: [30.0, 10.0],
            target: [10.0, 15.0],
            pe: [20.0, -5.0],
            user_circle_radius: 20.0,
            user_center: None,
        }
    }
}

/// Every scalar that defines one scenario. All powers and variances are
/// linear (watts), ratios are linear.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemConfig {
    /// K
    pub users: usize,
    /// N (transmit = receive antennas)
    pub antennas: usize,
    /// M; zero means no RIS.
    pub ris_elements: usize,
    /// P, maximum BS transmit power.
    pub bs_power: f64,
    /// P_e, AE jamming power.
    pub jam_power: f64,
    /// Echo SCNR threshold.
    pub gamma_echo: f64,
    pub noise_user: f64,
    pub noise_ae: f64,
    pub noise_pe: f64,
    pub noise_sensing: f64,
    /// Radar cross-section expectation ζ² (m²).
    pub rcs: f64,
    /// Rician factor κ.
    pub rician_factor: f64,
    /// Penalty coefficient for the unit-modulus relaxation; `None` selects it
    /// automatically from the objective scale.
    pub rho: Option<f64>,
    /// Convergence threshold on the objective variation rate.
    pub delta: f64,
    pub geometry: Geometry,
    pub path_loss: PathLossModel,
    /// Element spacing over wavelength, shared by both arrays.
    pub element_spacing_ratio: f64,
    pub seed: u64,
    /// Redraw user positions from `seed` (true) or from `placement_seed`.
    pub resample_users: bool,
    pub placement_seed: u64,
}

impl Default for SystemConfig {
    /// Default simulation parameters (K = 3, N = 6, M = 80, P = 49 dBm,
    /// P_e = 7 dBm, γ = 15 dB, noise −60 dBm, κ = 3 dB).
    fn default() -> Self {
        Self {
            users: 3,
            antennas: 6,
            ris_elements: 80,
            bs_power: dbm_to_watts(49.0),
            jam_power: dbm_to_watts(7.0),
            gamma_echo: db_to_linear(15.0),
            noise_user: dbm_to_watts(-60.0),
            noise_ae: dbm_to_watts(-60.0),
            noise_pe: dbm_to_watts(-60.0),
            noise_sensing: dbm_to_watts(-60.0),
            rcs: 1.0,
            rician_factor: db_to_linear(3.0),
            rho: None,
            delta: 1e-3,
            geometry: Geometry::default(),
            path_loss: PathLossModel::default(),
            element_spacing_ratio: 0.5,
            seed: 0,
            resample_users: true,
            placement_seed: 0,
        }
    }
}

impl SystemConfig {
    pub fn validate(&self) -> Result<()> {
        if self.users == 0 || self.antennas == 0 {
            return domain("K and N must be at least 1");
        }
        let strictly_positive = [
            ("bs_power", self.bs_power),
            ("noise_user", self.noise_user),
            ("noise_ae", self.noise_ae),
            ("noise_pe", self.noise_pe),
            ("noise_sensing", self.noise_sensing),
            ("rcs", self.rcs),
            ("delta", self.delta),
            ("path_loss.c0", self.path_loss.c0),
            ("path_loss.d0", self.path_loss.d0),
            ("element_spacing_ratio", self.element_spacing_ratio),
        ];
        for (name, v) in strictly_positive {
            if !(v > 0.0 && v.is_finite()) {
                return domain(format!("{name} must be positive and finite, got {v}"));
            }
        }
        let non_negative = [
            ("jam_power", self.jam_power),
            ("gamma_echo", self.gamma_echo),
            ("rician_factor", self.rician_factor),
        ];
        for (name, v) in non_negative {
            if !(v >= 0.0 && v.is_finite()) {
                return domain(format!("{name} must be non-negative and finite, got {v}"));
            }
        }
        if let Some(rho) = self.rho {
            if !(rho >= 0.0 && rho.is_finite()) {
                return domain(format!("rho must be non-negative, got {rho}"));
            }
        }
        if !(self.geometry.user_circle_radius > 0.0) {
            return domain("user_circle_radius must be positive");
        }
        Ok(())
    }

    pub fn signal_params(&self) -> SignalParams {
        SignalParams {
            bs_power: self.bs_power,
            jam_power: self.jam_power,
            gamma_echo: self.gamma_echo,
            noise_user: self.noise_user,
            noise_ae: self.noise_ae,
            noise_pe: self.noise_pe,
            noise_sensing: self.noise_sensing,
            rcs: self.rcs,
        }
    }
}

/// Power and noise scalars that the metrics need next to the channels.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignalParams {
    pub bs_power: f64,
    pub jam_power: f64,
    pub gamma_echo: f64,
    pub noise_user: f64,
    pub noise_ae: f64,
    pub noise_pe: f64,
    pub noise_sensing: f64,
    pub rcs: f64,
}

/// One realization of every channel in the system.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelSet {
    /// BS→RIS, `M×N`.
    pub h_br: CMatrix,
    /// BS→user direct links, `K` vectors of length `N`.
    pub g_b: Vec<CVector>,
    /// RIS→user links, `K` vectors of length `M`.
    pub g_r: Vec<CVector>,
    /// BS→PE direct link, length `N`.
    pub h_bp: CVector,
    /// RIS→PE link, length `M`.
    pub h_rp: CVector,
    /// BS→target (AE) link, length `N`.
    pub h_bt: CVector,
    /// AE→user jamming links.
    pub h_ae: Vec<Complex64>,
    /// Round-trip matrix `h_bt·h_btᴴ`.
    pub h_bt_outer: CMatrix,
    pub params: SignalParams,
    pub user_positions: Vec<[f64; 2]>,
    /// Seed of the scenario; benchmark and initialization streams derive from it.
    pub seed: u64,
}

impl ChannelSet {
    /// Assembles a channel set from explicit links, checking dimensions.
    #[allow(clippy::too_many_arguments)]
    pub fn from_links(
        h_br: CMatrix,
        g_b: Vec<CVector>,
        g_r: Vec<CVector>,
        h_bp: CVector,
        h_rp: CVector,
        h_bt: CVector,
        h_ae: Vec<Complex64>,
        params: SignalParams,
    ) -> Result<Self> {
        let n = h_bt.len();
        let m = h_br.nrows();
        let k = g_b.len();
        if n == 0 || k == 0 {
            return Err(Error::Dimension("need N ≥ 1 and K ≥ 1".into()));
        }
        if h_br.ncols() != n && m > 0 {
            return Err(Error::Dimension(format!("H_br has {} columns, expected {n}", h_br.ncols())));
        }
        if g_r.len() != k || h_ae.len() != k {
            return Err(Error::Dimension("per-user link counts differ".into()));
        }
        if g_b.iter().any(|g| g.len() != n) || h_bp.len() != n {
            return Err(Error::Dimension("direct links must have length N".into()));
        }
        if g_r.iter().any(|g| g.len() != m) || h_rp.len() != m {
            return Err(Error::Dimension("RIS links must have length M".into()));
        }
        let h_br = if m == 0 { CMatrix::zeros(0, n) } else { h_br };
        Ok(Self {
            h_bt_outer: outer(&h_bt),
            h_br,
            g_b,
            g_r,
            h_bp,
            h_rp,
            h_bt,
            h_ae,
            params,
            user_positions: Vec::new(),
            seed: 0,
        })
    }

    pub fn users(&self) -> usize {
        self.g_b.len()
    }

    pub fn antennas(&self) -> usize {
        self.h_bt.len()
    }

    pub fn ris_elements(&self) -> usize {
        self.h_br.nrows()
    }

    /// `K + N`, the number of columns of the transmit beamformer.
    pub fn streams(&self) -> usize {
        self.users() + self.antennas()
    }

    /// The same scenario with every RIS-side link removed (`M = 0`).
    pub fn without_ris(&self) -> Self {
        let n = self.antennas();
        Self {
            h_br: CMatrix::zeros(0, n),
            g_r: vec![CVector::zeros(0); self.users()],
            h_rp: CVector::zeros(0),
            ..self.clone()
        }
    }
}

/// Angle of `peer` as seen from an array at `origin`, broadside along `+y`.
pub fn arrival_angle(origin: [f64; 2], peer: [f64; 2]) -> f64 {
    (peer[0] - origin[0]).atan2(peer[1] - origin[1])
}

pub fn distance(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// ULA response `[1, e^{j2π·s·sinθ}, …, e^{j2π(len−1)·s·sinθ}]ᵀ`.
pub fn steering_vector(theta: f64, len: usize, spacing_ratio: f64) -> CVector {
    let step = 2.0 * PI * spacing_ratio * theta.sin();
    CVector::from_fn(len, |n, _| Complex64::from_polar(1.0, step * n as f64))
}

/// BS array response `a_bs(θ)`.
pub fn steering_bs(theta: f64, antennas: usize, spacing_ratio: f64) -> CVector {
    steering_vector(theta, antennas, spacing_ratio)
}

/// RIS array response `a_ris(θ)`.
pub fn steering_ris(theta: f64, elements: usize, spacing_ratio: f64) -> CVector {
    steering_vector(theta, elements, spacing_ratio)
}

/// `C0·(d0/d)^ε`.
pub fn path_loss(d: f64, epsilon: f64, c0: f64, d0: f64) -> Result<f64> {
    if !(d > 0.0) {
        return domain(format!("path loss needs a positive distance, got {d}"));
    }
    Ok(c0 * (d0 / d).powf(epsilon))
}

/// Rician mixture `sqrt(κ/(κ+1))·LOS + sqrt(1/(κ+1))·G`, `G` i.i.d. CN(0, 1).
pub fn rician_channel<R: Rng + ?Sized>(los: &CMatrix, kappa: f64, rng: &mut R) -> Result<CMatrix> {
    if !(kappa >= 0.0) {
        return domain(format!("Rician factor must be non-negative, got {kappa}"));
    }
    let los_w = (kappa / (kappa + 1.0)).sqrt();
    let nlos_w = (1.0 / (kappa + 1.0)).sqrt();
    let nlos = DMatrix::from_fn(los.nrows(), los.ncols(), |_, _| sample_cn(rng));
    Ok(los.map(|z| z * los_w) + nlos * Complex64::from(nlos_w))
}

fn rician_vector<R: Rng + ?Sized>(los: &CVector, kappa: f64, rng: &mut R) -> Result<CVector> {
    let m = rician_channel(&CMatrix::from_column_slice(los.len(), 1, los.as_slice()), kappa, rng)?;
    Ok(CVector::from_column_slice(m.as_slice()))
}

fn rayleigh_vector<R: Rng + ?Sized>(len: usize, rng: &mut R) -> CVector {
    CVector::from_fn(len, |_, _| sample_cn(rng))
}

fn checked_distance(a: [f64; 2], b: [f64; 2], what: &str) -> Result<f64> {
    let d = distance(a, b);
    if !(d > 0.0) {
        return domain(format!("coincident positions on the {what} link"));
    }
    Ok(d)
}

/// Draws user positions uniformly on the user circle.
pub fn place_users(config: &SystemConfig) -> Vec<[f64; 2]> {
    let seed = if config.resample_users {
        config.seed
    } else {
        config.placement_seed
    };
    let mut rng = stream_rng(seed, STREAM_PLACEMENT);
    let center = config.geometry.user_center.unwrap_or(config.geometry.ris);
    let r = config.geometry.user_circle_radius;
    (0..config.users)
        .map(|_| {
            let psi: f64 = rng.random_range(0.0..TAU);
            [center[0] + r * psi.cos(), center[1] + r * psi.sin()]
        })
        .collect()
}

/// Builds one channel realization for `config`.
pub fn generate_scenario(config: &SystemConfig) -> Result<ChannelSet> {
    config.validate()?;
    let geo = &config.geometry;
    let pl = &config.path_loss;
    let gain = |d: f64, eps: f64| path_loss(d, eps, pl.c0, pl.d0).map(f64::sqrt);
    let (k, n, m) = (config.users, config.antennas, config.ris_elements);
    let spacing = config.element_spacing_ratio;
    let kappa = config.rician_factor;

    let users = place_users(config);

    let mut direct = stream_rng(config.seed, STREAM_DIRECT);
    let mut g_b = Vec::with_capacity(k);
    for pos in &users {
        let amp = gain(checked_distance(geo.bs, *pos, "BS-user")?, pl.exp_bs_user)?;
        g_b.push(rayleigh_vector(n, &mut direct) * Complex64::from(amp));
    }
    let amp_bp = gain(checked_distance(geo.bs, geo.pe, "BS-PE")?, pl.exp_bs_user)?;
    let h_bp = rayleigh_vector(n, &mut direct) * Complex64::from(amp_bp);
    let mut h_ae = Vec::with_capacity(k);
    for pos in &users {
        let amp = gain(checked_distance(geo.target, *pos, "AE-user")?, pl.exp_ae_user)?;
        h_ae.push(sample_cn(&mut direct) * amp);
    }

    let d_bt = checked_distance(geo.bs, geo.target, "BS-target")?;
    let h_bt = steering_bs(arrival_angle(geo.bs, geo.target), n, spacing)
        * Complex64::from(gain(d_bt, pl.exp_bs_target)?);

    let (h_br, g_r, h_rp) = if m == 0 {
        (CMatrix::zeros(0, n), vec![CVector::zeros(0); k], CVector::zeros(0))
    } else {
        let mut ris_rng = stream_rng(config.seed, STREAM_RIS);
        let d_br = checked_distance(geo.bs, geo.ris, "BS-RIS")?;
        let los_br = steering_ris(arrival_angle(geo.ris, geo.bs), m, spacing)
            * steering_bs(arrival_angle(geo.bs, geo.ris), n, spacing).adjoint();
        let h_br = rician_channel(&los_br, kappa, &mut ris_rng)?
            * Complex64::from(gain(d_br, pl.exp_bs_ris)?);
        let mut g_r = Vec::with_capacity(k);
        for pos in &users {
            let d = checked_distance(geo.ris, *pos, "RIS-user")?;
            let los = steering_ris(arrival_angle(geo.ris, *pos), m, spacing);
            g_r.push(rician_vector(&los, kappa, &mut ris_rng)? * Complex64::from(gain(d, pl.exp_ris_user)?));
        }
        let d_rp = checked_distance(geo.ris, geo.pe, "RIS-PE")?;
        let los_rp = steering_ris(arrival_angle(geo.ris, geo.pe), m, spacing);
        let h_rp = rician_vector(&los_rp, kappa, &mut ris_rng)? * Complex64::from(gain(d_rp, pl.exp_ris_user)?);
        (h_br, g_r, h_rp)
    };

    let mut set = ChannelSet::from_links(h_br, g_b, g_r, h_bp, h_rp, h_bt, h_ae, config.signal_params())?;
    set.user_positions = users;
    set.seed = config.seed;
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn assert_vec_close(got: &CVector, want: &[Complex64], tol: f64) {
        assert_eq!(got.len(), want.len());
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).norm() <= tol, "{g} vs {w}");
        }
    }

    #[test]
    fn steering_examples() {
        let one = Complex64::new(1.0, 0.0);
        let j = Complex64::new(0.0, 1.0);
        assert_vec_close(&steering_bs(0.0, 4, 0.5), &[one; 4], 1e-15);
        assert_vec_close(&steering_bs(FRAC_PI_2, 2, 0.5), &[one, -one], 1e-12);
        assert_vec_close(&steering_bs(PI / 6.0, 3, 0.5), &[one, j, -one], 1e-12);
        assert_vec_close(&steering_ris(0.0, 8, 0.5), &[one; 8], 1e-15);
        assert_vec_close(&steering_ris(FRAC_PI_2, 3, 0.5), &[one, -one, one], 1e-12);
        assert_vec_close(&steering_ris(-FRAC_PI_2, 2, 0.5), &[one, -one], 1e-12);
    }

    #[test]
    fn path_loss_examples() {
        let c0 = db_to_linear(-30.0);
        assert!((path_loss(1.0, 2.0, c0, 1.0).unwrap() - 1e-3).abs() < 1e-18);
        assert!((path_loss(10.0, 2.0, c0, 1.0).unwrap() - 1e-5).abs() < 1e-20);
        assert_eq!(path_loss(3.5, 2.7, 0.25, 3.5).unwrap(), 0.25);
        assert!(path_loss(0.0, 2.0, c0, 1.0).is_err());
        assert!(path_loss(-1.0, 2.0, c0, 1.0).is_err());
    }

    #[test]
    fn unit_conversions() {
        assert!((dbm_to_watts(30.0) - 1.0).abs() < 1e-15);
        assert!((dbm_to_watts(-60.0) - 1e-9).abs() < 1e-24);
        assert!((db_to_linear(3.0) - 1.995_262_314_968_879_5).abs() < 1e-12);
        assert!((watts_to_dbm(dbm_to_watts(47.0)) - 47.0).abs() < 1e-12);
    }

    #[test]
    fn rician_rejects_negative_kappa() {
        let mut rng = stream_rng(1, 0);
        assert!(rician_channel(&CMatrix::zeros(2, 2), -0.1, &mut rng).is_err());
    }

    #[test]
    fn rician_los_limit() {
        let mut rng = stream_rng(7, 0);
        let los = CMatrix::from_fn(3, 2, |r, c| Complex64::from_polar(1.0, 0.3 * (r + 2 * c) as f64));
        let h = rician_channel(&los, 1e12, &mut rng).unwrap();
        let rel = (&h - &los).norm() / los.norm();
        assert!(rel < 1e-5, "{rel}");
    }

    #[test]
    fn rician_nlos_moments() {
        let mut rng = stream_rng(11, 0);
        let draws = 10_000;
        let los = CMatrix::from_element(1, 1, Complex64::new(1.0, 0.0));
        let mut sum = Complex64::new(0.0, 0.0);
        for _ in 0..draws {
            sum += rician_channel(&los, 0.0, &mut rng).unwrap()[(0, 0)];
        }
        let mean = sum / draws as f64;
        // Standard error of each component of the mean is sqrt(0.5 / draws).
        let sigma = (0.5 / draws as f64).sqrt();
        assert!(mean.re.abs() < 3.0 * sigma && mean.im.abs() < 3.0 * sigma, "{mean}");

        let zero_los = CMatrix::zeros(1, 1);
        let samples: Vec<Complex64> = (0..draws)
            .map(|_| rician_channel(&zero_los, 1.0, &mut rng).unwrap()[(0, 0)])
            .collect();
        let m = samples.iter().sum::<Complex64>() / draws as f64;
        let var = samples.iter().map(|z| (z - m).norm_sqr()).sum::<f64>() / (draws - 1) as f64;
        // With zero LOS the κ = 1 mixture keeps half of the unit NLOS power.
        assert!((var - 0.5).abs() < 0.05 * 0.5, "{var}");

        let unit_los = CMatrix::from_element(1, 1, Complex64::new(1.0, 0.0));
        let samples: Vec<Complex64> = (0..draws)
            .map(|_| {
                let h = rician_channel(&unit_los, 1.0, &mut rng).unwrap()[(0, 0)];
                h
            })
            .collect();
        let power = samples.iter().map(|z| z.norm_sqr()).sum::<f64>() / draws as f64;
        // Unit-modulus LOS: E|h|² = κ/(κ+1) + 1/(κ+1) = 1.
        assert!((power - 1.0).abs() < 0.05, "{power}");
    }

    #[test]
    fn scenario_is_deterministic() {
        let cfg = SystemConfig { seed: 42, ..SystemConfig::default() };
        let a = generate_scenario(&cfg).unwrap();
        let b = generate_scenario(&cfg).unwrap();
        assert_eq!(a, b);
        let c = generate_scenario(&SystemConfig { seed: 43, ..cfg }).unwrap();
        assert_ne!(a.g_b, c.g_b);
    }

    #[test]
    fn scenario_dimensions_and_target_gain() {
        let cfg = SystemConfig { seed: 3, users: 2, antennas: 4, ris_elements: 16, ..Default::default() };
        let ch = generate_scenario(&cfg).unwrap();
        assert_eq!(ch.h_br.shape(), (16, 4));
        assert_eq!(ch.g_r.len(), 2);
        assert!(ch.g_r.iter().all(|g| g.len() == 16));
        assert_eq!(ch.h_rp.len(), 16);
        let expected = 4.0 * path_loss(325f64.sqrt(), 2.0, db_to_linear(-30.0), 1.0).unwrap();
        assert!((ch.h_bt.norm_squared() - expected).abs() <= 1e-12 * expected);
        let diff = &ch.h_bt_outer - outer(&ch.h_bt);
        assert!(diff.iter().all(|z| z.norm() <= 1e-12));
        for pos in &ch.user_positions {
            assert!((distance(*pos, cfg.geometry.ris) - 20.0).abs() < 1e-9);
        }
    }

    #[test]
    fn no_ris_scenario_keeps_direct_links() {
        let cfg = SystemConfig { seed: 5, ..Default::default() };
        let with = generate_scenario(&cfg).unwrap();
        let without = generate_scenario(&SystemConfig { ris_elements: 0, ..cfg }).unwrap();
        assert_eq!(without.ris_elements(), 0);
        assert!(without.g_r.iter().all(|g| g.is_empty()));
        assert_eq!(with.g_b, without.g_b);
        assert_eq!(with.h_bp, without.h_bp);
        assert_eq!(with.h_ae, without.h_ae);
        assert_eq!(with.without_ris(), without);
    }

    #[test]
    fn coincident_positions_are_rejected() {
        let mut cfg = SystemConfig::default();
        cfg.geometry.target = cfg.geometry.bs;
        assert!(matches!(generate_scenario(&cfg), Err(Error::Domain(_))));
    }

    #[test]
    fn fixed_placement_ignores_trial_seed() {
        let cfg = SystemConfig { resample_users: false, placement_seed: 9, seed: 1, ..Default::default() };
        let a = place_users(&cfg);
        let b = place_users(&SystemConfig { seed: 2, ..cfg.clone() });
        assert_eq!(a, b);
    }
}
