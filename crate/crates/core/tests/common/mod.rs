#![allow(dead_code)]

use isac_secrecy::channel::{db_to_linear, dbm_to_watts, generate_scenario, stream_rng, ChannelSet, SystemConfig};
use isac_secrecy::linalg::{random_phases, random_unit_vector, sample_cn, CMatrix, CVector};
use isac_secrecy::metrics::BeamformingState;
use isac_secrecy::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Desk-scale operating point shared by the integration tests.
pub fn reduced_config(seed: u64) -> SystemConfig {
    SystemConfig {
        users: 2,
        antennas: 4,
        ris_elements: 16,
        bs_power: dbm_to_watts(45.0),
        gamma_echo: db_to_linear(-15.0),
        seed,
        ..SystemConfig::default()
    }
}

pub fn scenario(seed: u64, users: usize, antennas: usize, ris_elements: usize) -> ChannelSet {
    let cfg = SystemConfig { users, antennas, ris_elements, ..reduced_config(seed) };
    generate_scenario(&cfg).expect("valid scenario")
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    stream_rng(seed, 99)
}

pub fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> CMatrix {
    CMatrix::from_fn(rows, cols, |_, _| sample_cn(rng))
}

/// Random state with `‖W‖² = fraction·P`, unit-modulus φ and unit u.
pub fn random_state(rng: &mut ChaCha8Rng, ch: &ChannelSet, fraction: f64) -> BeamformingState {
    let w = random_matrix(rng, ch.antennas(), ch.streams());
    let scale = (fraction * ch.params.bs_power).sqrt() / w.norm();
    BeamformingState {
        w: w * Complex64::from(scale),
        phi: random_phases(rng, ch.ris_elements()),
        u: random_unit_vector(rng, ch.antennas()),
    }
}

/// φ strictly inside the unit disks.
pub fn interior_phi(rng: &mut ChaCha8Rng, m: usize) -> CVector {
    CVector::from_fn(m, |_, _| Complex64::from_polar(rng.random_range(0.2..0.95), rng.random_range(0.0..std::f64::consts::TAU)))
}

/// Central differences in complex-encoded real coordinates.
pub fn fd_gradient(f: impl Fn(&CMatrix) -> f64, x: &CMatrix, h: f64) -> CMatrix {
    let mut g = CMatrix::zeros(x.nrows(), x.ncols());
    for idx in 0..x.len() {
        let mut part = [0.0; 2];
        for (slot, dir) in [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)].into_iter().enumerate() {
            let mut plus = x.clone();
            plus[idx] += dir * h;
            let mut minus = x.clone();
            minus[idx] -= dir * h;
            part[slot] = (f(&plus) - f(&minus)) / (2.0 * h);
        }
        g[idx] = Complex64::new(part[0], part[1]);
    }
    g
}

pub fn as_matrix(v: &CVector) -> CMatrix {
    CMatrix::from_iterator(v.len(), 1, v.iter().copied())
}

pub fn as_vector(x: &CMatrix) -> CVector {
    CVector::from_iterator(x.len(), x.iter().copied())
}

/// `‖a − b‖ ≤ rel·‖b‖`.
pub fn close_rel(a: &CMatrix, b: &CMatrix, rel: f64) -> bool {
    (a - b).norm() <= rel * b.norm().max(1e-300)
}
