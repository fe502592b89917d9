mod common;

use common::*;
use isac_secrecy::channel::{generate_scenario, SystemConfig};
use isac_secrecy::jbrd::{init_state, run_benchmark, run_jbrd, IterationTrace, JbrdConfig, RunTermination, Scheme};
use isac_secrecy::metrics::{scnr_echo, secrecy_rate};

fn same_trace_except_time(a: &IterationTrace, b: &IterationTrace) -> bool {
    a.secrecy_rate == b.secrecy_rate
        && a.unclamped_sum == b.unclamped_sum
        && a.surrogate_objective == b.surrogate_objective
        && a.scnr_residual == b.scnr_residual
        && a.power == b.power
        && a.inner_w_iters == b.inner_w_iters
        && a.inner_phi_iters == b.inner_phi_iters
        && a.termination == b.termination
        && a.final_secrecy_rate == b.final_secrecy_rate
}

#[test]
fn init_meets_constraints() {
    let config = JbrdConfig::default();
    for seed in 0..20 {
        let ch = generate_scenario(&reduced_config(seed)).unwrap();
        let init = init_state(&ch, &config).unwrap();
        assert!(init.feasible);
        let p = ch.params.bs_power;
        // The echo threshold is reachable with 0.9 P on this layout.
        assert!((init.state.power() / (0.9 * p) - 1.0).abs() < 1e-12);
        assert!(init.state.phi.iter().all(|z| (z.norm() - 1.0).abs() < 1e-12));
        assert!(scnr_echo(&ch, &init.state).unwrap() >= ch.params.gamma_echo);
    }
}

#[test]
fn unreachable_echo_threshold_is_flagged() {
    let cfg = SystemConfig { gamma_echo: 1e3, ..reduced_config(1) };
    let ch = generate_scenario(&cfg).unwrap();
    assert!(!init_state(&ch, &JbrdConfig::default()).unwrap().feasible);
    let (_, trace) = run_jbrd(&ch, &JbrdConfig::default()).unwrap();
    assert_eq!(trace.termination, RunTermination::Infeasible);
}

#[test]
fn ascends_from_init_without_jamming() {
    let mut cfg = SystemConfig { users: 1, jam_power: 0.0, ..reduced_config(5) };
    cfg.geometry.pe = [1e6, 0.0];
    for seed in 0..5 {
        let ch = generate_scenario(&SystemConfig { seed, ..cfg.clone() }).unwrap();
        let init = init_state(&ch, &JbrdConfig::default()).unwrap();
        let init_sr = secrecy_rate(&ch, &init.state).unwrap().secrecy_rate;
        let (_, trace) = run_jbrd(&ch, &JbrdConfig::default()).unwrap();
        assert!(trace.final_secrecy_rate >= init_sr - 1e-9);
    }
}

#[test]
fn unclamped_sum_is_monotone() {
    for seed in 0..10 {
        let ch = generate_scenario(&reduced_config(seed)).unwrap();
        let (_, trace) = run_jbrd(&ch, &JbrdConfig::default()).unwrap();
        assert!(trace.unclamped_sum.windows(2).all(|w| w[1] >= w[0] - 1e-6), "seed {seed}");
        assert!(trace.secrecy_rate.iter().all(|&s| s >= 0.0));
        assert!(trace.outer_iterations() <= JbrdConfig::default().max_outer);
    }
}

#[test]
fn output_is_feasible() {
    for seed in 0..10 {
        let ch = generate_scenario(&reduced_config(seed)).unwrap();
        let (state, trace) = run_jbrd(&ch, &JbrdConfig::default()).unwrap();
        let report = secrecy_rate(&ch, &state).unwrap();
        assert!(report.power_slack >= -1e-6 * ch.params.bs_power);
        assert!(report.scnr >= ch.params.gamma_echo * (1.0 - 1e-3));
        assert_eq!(report.modulus_deviation, 0.0);
        assert_eq!(report.secrecy_rate, trace.final_secrecy_rate);
    }
}

#[test]
fn no_ris_ignores_ris_size() {
    let config = JbrdConfig::default();
    let small = generate_scenario(&SystemConfig { ris_elements: 8, ..reduced_config(3) }).unwrap();
    let large = generate_scenario(&SystemConfig { ris_elements: 32, ..reduced_config(3) }).unwrap();
    let none = generate_scenario(&SystemConfig { ris_elements: 0, ..reduced_config(3) }).unwrap();
    let (_, a) = run_benchmark(&small, &config, Scheme::NoRis).unwrap();
    let (_, b) = run_benchmark(&large, &config, Scheme::NoRis).unwrap();
    let (_, c) = run_jbrd(&none, &config).unwrap();
    assert!(same_trace_except_time(&a, &b));
    assert!(same_trace_except_time(&a, &c));
}

#[test]
fn benchmarks_are_reproducible() {
    let ch = generate_scenario(&reduced_config(9)).unwrap();
    for scheme in Scheme::ALL {
        let (s1, t1) = run_benchmark(&ch, &JbrdConfig::default(), scheme).unwrap();
        let (s2, t2) = run_benchmark(&ch, &JbrdConfig::default(), scheme).unwrap();
        assert_eq!(s1, s2);
        assert!(same_trace_except_time(&t1, &t2));
    }
}

#[test]
fn jbrd_beats_benchmarks_on_most_instances() {
    let config = JbrdConfig::default();
    let trials = 50;
    let mut wins = [0usize; 3];
    let mut sums = [0.0; 4];
    for seed in 0..trials {
        let ch = generate_scenario(&reduced_config(500 + seed)).unwrap();
        let srs: Vec<f64> = Scheme::ALL.iter().map(|&s| run_benchmark(&ch, &config, s).unwrap().1.final_secrecy_rate).collect();
        for i in 0..4 {
            sums[i] += srs[i];
        }
        for i in 1..4 {
            if srs[0] >= srs[i] {
                wins[i - 1] += 1;
            }
        }
    }
    for i in 0..3 {
        assert!(wins[i] * 5 >= trials as usize * 4, "{:?} wins {wins:?}", Scheme::ALL[i + 1]);
        assert!(sums[0] >= sums[i + 1]);
    }
}

#[test]
fn escapes_equal_leakage_stall() {
    // Micro instance whose first iterate lands where the AE and PE rates
    // tie; a branch-gradient ascent stalls there near 0.08 bps/Hz.
    let base = reduced_config(0);
    let cfg = SystemConfig { users: 1, antennas: 2, ris_elements: 2, seed: 1005, ..base };
    let ch = generate_scenario(&cfg).unwrap();
    let (_, trace) = run_jbrd(&ch, &JbrdConfig::default()).unwrap();
    assert!(trace.final_secrecy_rate > 5.0, "{}", trace.final_secrecy_rate);
}
