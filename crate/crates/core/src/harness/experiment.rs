//! Monte-Carlo sweeps.
//!
//! Trial `t` uses seed `seed_base + t` for every sweep point, antenna count
//! and scheme, so schemes are compared on identical channel draws. Trials
//! run in parallel; results are reduced in a fixed order, which makes the
//! output independent of the thread count.

use rayon::prelude::*;

use super::config::ExperimentSpec;
use crate::channel::generate_scenario;
use crate::error::Result;
use crate::jbrd::{run_benchmark, IterationTrace, Scheme};

/// One aggregated line of the results table.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub sweep_name: String,
    pub sweep_value: f64,
    pub scheme: Scheme,
    pub antennas: usize,
    pub ris_elements: usize,
    pub trial_count: usize,
    /// Mean over feasible trials; zero when none is feasible.
    pub mean_sr: f64,
    /// Sample standard deviation over feasible trials.
    pub std_sr: f64,
    pub mean_outer_iters: f64,
    pub mean_wall_ms: f64,
    pub infeasible_trials: usize,
    pub seed_base: u64,
}

/// Outcome of a single run.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub sweep_value: f64,
    pub scheme: Scheme,
    pub antennas: usize,
    pub trial: usize,
    pub seed: u64,
    pub trace: IterationTrace,
}

impl TrialRecord {
    pub fn secrecy_rate(&self) -> f64 {
        self.trace.final_secrecy_rate
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub rows: Vec<ResultRow>,
    /// Every run, ordered by sweep value, antenna count, scheme and trial.
    pub trials: Vec<TrialRecord>,
}

struct Job {
    value: f64,
    antennas: usize,
    scheme: Scheme,
    trial: usize,
}

fn run_job(spec: &ExperimentSpec, job: &Job) -> Result<TrialRecord> {
    let cfg = spec.trial_config(job.value, job.antennas, job.trial)?;
    let ch = generate_scenario(&cfg)?;
    let (_, mut trace) = run_benchmark(&ch, &spec.jbrd, job.scheme)?;
    if !spec.record_wall_time {
        trace.wall_ms.iter_mut().for_each(|t| *t = 0.0);
    }
    Ok(TrialRecord {
        sweep_value: job.value,
        scheme: job.scheme,
        antennas: job.antennas,
        trial: job.trial,
        seed: cfg.seed,
        trace,
    })
}

fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        0.0
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

fn sample_std(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64).sqrt()
}

fn aggregate(spec: &ExperimentSpec, group: &[TrialRecord]) -> Result<ResultRow> {
    let first = &group[0];
    let cfg = spec.trial_config(first.sweep_value, first.antennas, 0)?;
    let feasible: Vec<&TrialRecord> = group.iter().filter(|r| !r.trace.is_infeasible()).collect();
    let srs: Vec<f64> = feasible.iter().map(|r| r.secrecy_rate()).collect();
    let iters: Vec<f64> = feasible.iter().map(|r| r.trace.outer_iterations() as f64).collect();
    let wall: Vec<f64> = feasible.iter().map(|r| r.trace.wall_ms.last().copied().unwrap_or(0.0)).collect();
    Ok(ResultRow {
        sweep_name: spec.sweep.name().to_string(),
        sweep_value: first.sweep_value,
        scheme: first.scheme,
        antennas: first.antennas,
        ris_elements: cfg.ris_elements,
        trial_count: group.len(),
        mean_sr: mean(&srs),
        std_sr: sample_std(&srs),
        mean_outer_iters: mean(&iters),
        mean_wall_ms: mean(&wall),
        infeasible_trials: group.len() - feasible.len(),
        seed_base: spec.seed_base,
    })
}

/// Runs every (sweep value, antenna count, scheme, trial) combination.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    let mut jobs = Vec::new();
    for &value in &spec.values {
        for &antennas in &spec.antenna_counts {
            for &scheme in &spec.schemes {
                for trial in 0..spec.trials {
                    jobs.push(Job { value, antennas, scheme, trial });
                }
            }
        }
    }
    let trials = jobs.par_iter().map(|job| run_job(spec, job)).collect::<Result<Vec<_>>>()?;
    let rows = trials.chunks(spec.trials).map(|group| aggregate(spec, group)).collect::<Result<Vec<_>>>()?;
    Ok(ExperimentOutput { rows, trials })
}
