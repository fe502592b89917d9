use std::path::{Path, PathBuf};
use std::process::Command;

use isac_secrecy::harness::config::{parse_config, ConfigError};
use isac_secrecy::harness::output::RESULT_HEADER;
use isac_secrecy::harness::{dump_config, emit_csv, load_config, run_experiment, SweepVariable};
use isac_secrecy::jbrd::Scheme;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn table1_text() -> String {
    std::fs::read_to_string(configs().join("table1.json")).unwrap()
}

/// Small experiment on the reduced layout.
fn small_spec_text(trials: usize, schemes: &str) -> String {
    let mut doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(configs().join("fig2_power.json")).unwrap()).unwrap();
    doc["experiment"]["trials"] = trials.into();
    doc["experiment"]["schemes"] = serde_json::from_str(schemes).unwrap();
    doc["experiment"]["sweep"]["values"] = serde_json::json!([45.0]);
    doc.to_string()
}

#[test]
fn shipped_configs_load() {
    for entry in std::fs::read_dir(configs()).unwrap() {
        let path = entry.unwrap().path();
        load_config(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    }
}

#[test]
fn table1_round_trips() {
    let spec = load_config(configs().join("table1.json")).unwrap();
    let dumped = dump_config(&spec);
    let again = parse_config(&dumped).unwrap();
    assert_eq!(spec, again);
    assert_eq!(dumped, dump_config(&again));
    assert_eq!(dumped, table1_text());
}

#[test]
fn decibel_keys_are_converted() {
    let spec = parse_config(&table1_text()).unwrap();
    assert!((spec.base.gamma_echo - 31.622776601683793).abs() < 1e-12);
    assert!((spec.base.bs_power - 10f64.powf(1.9)).abs() < 1e-12);
    assert!((spec.base.noise_user - 1e-9).abs() < 1e-24);
    assert_eq!(spec.trials, 20);
}

#[test]
fn malformed_json_reports_byte_offset() {
    let text = "{\n  \"system\": {\n    \"users\": 3,,\n";
    match parse_config(text) {
        Err(ConfigError::Syntax { offset, line, .. }) => {
            assert_eq!(line, 3);
            assert_eq!(&text[offset..offset + 1], ",");
            assert_eq!(offset, text.find(",,").unwrap() + 1);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn missing_key_is_named() {
    let mut doc: serde_json::Value = serde_json::from_str(&table1_text()).unwrap();
    doc["system"].as_object_mut().unwrap().remove("noise_pe_dbm");
    match parse_config(&doc.to_string()) {
        Err(ConfigError::Schema { key, .. }) => assert_eq!(key, "system.noise_pe_dbm"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn wrong_type_is_named() {
    let mut doc: serde_json::Value = serde_json::from_str(&table1_text()).unwrap();
    doc["system"]["antennas"] = "six".into();
    match parse_config(&doc.to_string()) {
        Err(ConfigError::Schema { key, .. }) => assert_eq!(key, "system.antennas"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn unknown_key_is_rejected() {
    let mut doc: serde_json::Value = serde_json::from_str(&table1_text()).unwrap();
    doc["system"]["antenas"] = 6.into();
    assert!(matches!(parse_config(&doc.to_string()), Err(ConfigError::Schema { .. })));
}

#[test]
fn non_positive_quantity_is_named() {
    let mut doc: serde_json::Value = serde_json::from_str(&table1_text()).unwrap();
    doc["system"]["rcs"] = 0.0.into();
    match parse_config(&doc.to_string()) {
        Err(ConfigError::Invalid { key, .. }) => assert_eq!(key, "system.rcs"),
        other => panic!("{other:?}"),
    }
    let mut doc: serde_json::Value = serde_json::from_str(&table1_text()).unwrap();
    doc["experiment"]["trials"] = 0.into();
    match parse_config(&doc.to_string()) {
        Err(ConfigError::Invalid { key, .. }) => assert_eq!(key, "experiment.trials"),
        other => panic!("{other:?}"),
    }
}

#[test]
fn sweep_selection() {
    let spec = parse_config(&table1_text()).unwrap();
    assert_eq!(spec.sweep, SweepVariable::None);
    let spec = spec.with_sweep(SweepVariable::BsPower).unwrap();
    assert_eq!(spec.values, vec![45.0, 47.0, 49.0]);
    let fixed = load_config(configs().join("fig3_gamma.json")).unwrap();
    assert!(fixed.clone().with_sweep(SweepVariable::GammaEcho).is_ok());
    assert!(fixed.with_sweep(SweepVariable::PePower).is_err());
}

#[test]
fn empty_rows_give_header_only() {
    assert_eq!(emit_csv(&[]), format!("{RESULT_HEADER}\n"));
}

#[test]
fn experiment_is_deterministic() {
    let spec = parse_config(&small_spec_text(2, r#"["jbrd", "no_ris"]"#)).unwrap();
    let a = emit_csv(&run_experiment(&spec).unwrap().rows);
    let single = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let b = single.install(|| emit_csv(&run_experiment(&spec).unwrap().rows));
    assert_eq!(a, b);
    assert!(!a.contains('\r'));
    assert_eq!(a.lines().count(), 3);
}

#[test]
fn csv_row_round_trips_through_reader() {
    let spec = parse_config(&small_spec_text(2, r#"["jbrd"]"#)).unwrap();
    let out = run_experiment(&spec).unwrap();
    let text = emit_csv(&out.rows);
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let headers: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(headers.join(","), RESULT_HEADER);
    let records: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(records.len(), 1);
    let row = &out.rows[0];
    let r = &records[0];
    assert_eq!(&r[0], "bs_power");
    assert_eq!(r[1].parse::<f64>().unwrap(), 45.0);
    assert_eq!(&r[2], Scheme::Jbrd.name());
    assert_eq!(r[3].parse::<usize>().unwrap(), 4);
    assert_eq!(r[4].parse::<usize>().unwrap(), 16);
    assert_eq!(r[5].parse::<usize>().unwrap(), 2);
    let mean: f64 = r[6].parse().unwrap();
    assert!((mean - row.mean_sr).abs() <= 1e-5 * row.mean_sr.abs().max(1.0));
    assert_eq!(r[9].parse::<f64>().unwrap(), 0.0);
    assert_eq!(r[11].parse::<u64>().unwrap(), spec.seed_base);
}

#[test]
fn trials_use_consecutive_seeds() {
    let spec = parse_config(&small_spec_text(3, r#"["jbrd"]"#)).unwrap();
    let out = run_experiment(&spec).unwrap();
    let seeds: Vec<u64> = out.trials.iter().map(|t| t.seed).collect();
    assert_eq!(seeds, vec![spec.seed_base, spec.seed_base + 1, spec.seed_base + 2]);
}

fn cli(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_isac-secrecy")).args(args).output().unwrap()
}

#[test]
fn cli_writes_results_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("small.json");
    std::fs::write(&cfg, small_spec_text(1, r#"["jbrd"]"#)).unwrap();
    let out = dir.path().join("out");
    let run = cli(&["sweep-power", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--trials", "1"]);
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    let csv = std::fs::read_to_string(out.join("bs_power.csv")).unwrap();
    assert!(csv.starts_with(RESULT_HEADER));
    assert!(out.join("config.json").exists());

    let missing = cli(&["sweep-power", "--config", dir.path().join("nope.json").to_str().unwrap()]);
    assert_eq!(missing.status.code(), Some(1));

    let mut doc: serde_json::Value = serde_json::from_str(&small_spec_text(1, r#"["jbrd"]"#)).unwrap();
    doc["system"]["gamma_echo_db"] = 30.0.into();
    let hard = dir.path().join("hard.json");
    std::fs::write(&hard, doc.to_string()).unwrap();
    let run = cli(&["sweep-power", "--config", hard.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(2));
    let csv = std::fs::read_to_string(out.join("bs_power.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().ends_with(",1,1000"));
}

#[test]
fn cli_convergence_writes_traces() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("conv");
    let cfg = configs().join("reduced.json");
    let run = cli(&["convergence", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap(), "--trials", "2"]);
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    let traces: Vec<_> = std::fs::read_dir(out.join("traces")).unwrap().collect();
    assert_eq!(traces.len(), 2);
    let text = std::fs::read_to_string(out.join("traces").join("jbrd_N4_v0_t0.csv")).unwrap();
    assert!(text.starts_with("iteration,secrecy_rate,unclamped_sum"));
}

#[test]
fn oracle_state_reproduces_its_rate() {
    use isac_secrecy::harness::oracle::{brute_force, micro_config, OracleGrid};
    use isac_secrecy::metrics::secrecy_rate;
    let spec = load_config(configs().join("reduced.json")).unwrap();
    let grid = OracleGrid { phase_levels: 8, alpha_levels: 5, beta_levels: 6, power_levels: 5 };
    let mut positive = 0;
    for seed in 0..6 {
        let ch = isac_secrecy::channel::generate_scenario(&micro_config(&spec.base, seed)).unwrap();
        let found = brute_force(&ch, &grid).unwrap();
        let Some(state) = found.state else { continue };
        let report = secrecy_rate(&ch, &state).unwrap();
        assert!((report.secrecy_rate - found.secrecy_rate).abs() <= 1e-9 * found.secrecy_rate.max(1.0));
        assert!(report.scnr >= ch.params.gamma_echo * (1.0 - 1e-12));
        assert!(report.power_slack >= -1e-9 * ch.params.bs_power);
        positive += usize::from(found.secrecy_rate > 0.0);
    }
    assert!(positive > 0);
    let big = isac_secrecy::channel::generate_scenario(&spec.base).unwrap();
    assert!(brute_force(&big, &grid).is_err());
}
