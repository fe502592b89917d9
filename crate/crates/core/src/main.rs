//! Command-line driver for the secrecy-rate experiments.
//!
//! Exit status: 0 on success, 2 when some trial was infeasible (results are
//! still written), 1 on any error.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use isac_secrecy::harness::oracle::{compare_micro, OracleGrid};
use isac_secrecy::harness::output::emit_trace;
use isac_secrecy::harness::{dump_config, emit_csv, format_g, load_config, run_experiment, ExperimentSpec, SweepVariable};
use isac_secrecy::Result;

#[derive(Parser)]
#[command(version, about = "Secrecy-rate maximization for RIS-aided ISAC")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Single operating point with per-iteration traces.
    Convergence(Common),
    /// Sweep the BS transmit power (dBm).
    SweepPower(Common),
    /// Sweep the echo SCNR threshold (dB).
    SweepGamma(Common),
    /// Sweep the PE jamming power (dBm).
    SweepPe(Common),
    /// Sweep the number of RIS elements.
    SweepM(Common),
    /// Sweep the RIS x-coordinate (m).
    SweepRisX(Common),
    /// Compare JBRD with exhaustive search on micro instances.
    OracleCheck(Common),
}

#[derive(Args)]
struct Common {
    /// JSON configuration file.
    #[arg(long)]
    config: PathBuf,
    /// Output directory; overrides `experiment.output`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides `experiment.seed_base`.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides `experiment.trials`.
    #[arg(long)]
    trials: Option<usize>,
}

impl Common {
    fn load(&self) -> Result<ExperimentSpec> {
        let mut spec = load_config(&self.config)?;
        if let Some(out) = &self.out {
            spec.output = out.clone();
            spec.document.experiment.output = out.display().to_string();
        }
        if let Some(seed) = self.seed {
            spec.seed_base = seed;
            spec.document.experiment.seed_base = seed;
        }
        if let Some(trials) = self.trials {
            if trials == 0 {
                return Err(isac_secrecy::Error::Domain("--trials must be at least 1".into()));
            }
            spec.trials = trials;
            spec.document.experiment.trials = trials;
        }
        Ok(spec)
    }
}

fn write(path: &Path, contents: &str) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, contents)?;
    Ok(())
}

/// Returns whether any trial was infeasible.
fn run_sweep(spec: ExperimentSpec, variable: SweepVariable, traces: bool) -> Result<bool> {
    let spec = spec.with_sweep(variable)?;
    let out = run_experiment(&spec)?;
    let dir = &spec.output;
    write(&dir.join(format!("{}.csv", variable.name())), &emit_csv(&out.rows))?;
    write(&dir.join("config.json"), &dump_config(&spec))?;
    if traces || spec.write_traces {
        for t in &out.trials {
            let name = format!(
                "{}_N{}_v{}_t{}.csv",
                t.scheme.name(),
                t.antennas,
                format_g(t.sweep_value),
                t.trial
            );
            write(&dir.join("traces").join(name), &emit_trace(&t.trace))?;
        }
    }
    for r in &out.rows {
        println!(
            "{}={} {} N={} M={}: {} bit/s/Hz ({} infeasible)",
            r.sweep_name,
            format_g(r.sweep_value),
            r.scheme.name(),
            r.antennas,
            r.ris_elements,
            format_g(r.mean_sr),
            r.infeasible_trials
        );
    }
    Ok(out.rows.iter().any(|r| r.infeasible_trials > 0))
}

fn run_oracle(spec: ExperimentSpec) -> Result<bool> {
    let seeds: Vec<u64> = (0..spec.trials as u64).map(|t| spec.seed_base.wrapping_add(t)).collect();
    let results = compare_micro(&spec.base, &spec.jbrd, &seeds, &OracleGrid::default())?;
    let mut csv = String::from("seed,jbrd_sr,oracle_sr,ratio\n");
    for r in &results {
        let _ = writeln!(csv, "{},{},{},{}", r.seed, format_g(r.jbrd_sr), format_g(r.oracle_sr), format_g(r.ratio()));
        println!("seed {}: jbrd {} oracle {}", r.seed, format_g(r.jbrd_sr), format_g(r.oracle_sr));
    }
    write(&spec.output.join("oracle.csv"), &csv)?;
    Ok(results.iter().any(|r| r.jbrd_infeasible))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Convergence(c) => c.load().and_then(|s| run_sweep(s, SweepVariable::None, true)),
        Command::SweepPower(c) => c.load().and_then(|s| run_sweep(s, SweepVariable::BsPower, false)),
        Command::SweepGamma(c) => c.load().and_then(|s| run_sweep(s, SweepVariable::GammaEcho, false)),
        Command::SweepPe(c) => c.load().and_then(|s| run_sweep(s, SweepVariable::PePower, false)),
        Command::SweepM(c) => c.load().and_then(|s| run_sweep(s, SweepVariable::RisElements, false)),
        Command::SweepRisX(c) => c.load().and_then(|s| run_sweep(s, SweepVariable::RisXPosition, false)),
        Command::OracleCheck(c) => c.load().and_then(run_oracle),
    };
    match result {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => {
            eprintln!("warning: some trials could not meet the echo constraint");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
