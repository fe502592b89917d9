//! Joint beamforming and reflection design: alternating optimization over
//! the receive beamformer `u`, the transmit matrix `W` and the RIS vector
//! `φ`, each block improved by successive concave minorization, plus the
//! benchmark schemes obtained by freezing one block.

use std::time::Instant;

use num_complex::Complex64;

use crate::channel::{stream_rng, ChannelSet, STREAM_BENCHMARK, STREAM_INIT};
use crate::error::{domain, Result};
use crate::linalg::{random_phases, random_unit_vector, CMatrix, CVector};
use crate::metrics::{composite_user_channel, scnr_for, secrecy_rate, unclamped_secrecy_sum, BeamformingState};
use crate::solvers::{solve_phi_subproblem, solve_receive_beamformer, solve_w_subproblem, SolverParams, Termination};
use crate::surrogate::AuxiliaryVars;

/// Penalty weight of the unit-modulus relaxation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RhoPolicy {
    /// `factor · max(|S₀|, 1) / M` with `S₀` the unclamped secrecy sum at
    /// the initial point.
    Auto { factor: f64 },
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitPolicy {
    /// MRT communication columns, tilted towards the target until the radar
    /// share is smallest, radar columns along the target and RIS phases
    /// co-phased with the first user's direct link.
    MrtAligned,
    /// Random unit-norm communication directions and RIS phases.
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    Jbrd,
    /// φ frozen at random phases; `u` and `W` optimized.
    RisRandomPhase,
    /// `u` frozen at a random unit vector; `W` and `φ` optimized.
    URandom,
    /// RIS links removed; `u` and `W` optimized.
    NoRis,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [Scheme::Jbrd, Scheme::RisRandomPhase, Scheme::URandom, Scheme::NoRis];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Jbrd => "jbrd",
            Scheme::RisRandomPhase => "ris_random_phase",
            Scheme::URandom => "u_random",
            Scheme::NoRis => "no_ris",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.name() == name)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct JbrdConfig {
    /// Threshold on the objective variation rate, shared by the outer and
    /// inner loops.
    pub delta: f64,
    pub max_outer: usize,
    pub max_inner_w: usize,
    pub max_inner_phi: usize,
    pub rho: RhoPolicy,
    pub init: InitPolicy,
    pub solver: SolverParams,
    /// The initial point targets `SCNR ≥ γ(1 + margin)`.
    pub scnr_margin: f64,
    /// Smallest share of the initial power placed on the radar columns.
    pub init_radar_fraction: f64,
}

impl Default for JbrdConfig {
    fn default() -> Self {
        Self {
            delta: 1e-3,
            max_outer: 50,
            max_inner_w: 10,
            max_inner_phi: 10,
            rho: RhoPolicy::Auto { factor: 10.0 },
            init: InitPolicy::MrtAligned,
            solver: SolverParams::default(),
            scnr_margin: 0.05,
            init_radar_fraction: 0.2,
        }
    }
}

impl JbrdConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0) {
            return domain("delta must be positive");
        }
        if self.max_outer == 0 || self.max_inner_w == 0 || self.max_inner_phi == 0 {
            return domain("iteration caps must be at least 1");
        }
        if !(self.scnr_margin >= 0.0) {
            return domain("scnr_margin must be non-negative");
        }
        if !(0.0..=1.0).contains(&self.init_radar_fraction) {
            return domain("init_radar_fraction must lie in [0, 1]");
        }
        match self.rho {
            RhoPolicy::Auto { factor } if !(factor >= 0.0 && factor.is_finite()) => {
                return domain("rho factor must be non-negative")
            }
            RhoPolicy::Fixed(r) if !(r >= 0.0 && r.is_finite()) => return domain("rho must be non-negative"),
            _ => {}
        }
        self.solver.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunTermination {
    Converged,
    MaxOuter,
    /// The echo constraint cannot be met within the power budget.
    Infeasible,
}

/// Per-outer-iteration record. Index 0 holds the initial point.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationTrace {
    pub secrecy_rate: Vec<f64>,
    pub unclamped_sum: Vec<f64>,
    /// Final value of the last transmit surrogate of the iteration (bits).
    pub surrogate_objective: Vec<f64>,
    /// `SCNR − γ_echo`.
    pub scnr_residual: Vec<f64>,
    pub power: Vec<f64>,
    pub modulus_deviation: Vec<f64>,
    pub inner_w_iters: Vec<usize>,
    pub inner_phi_iters: Vec<usize>,
    /// Elapsed time since the start of the run.
    pub wall_ms: Vec<f64>,
    pub termination: RunTermination,
    pub rho: f64,
    /// Secrecy rate right before the final unit-modulus projection.
    pub sr_before_projection: f64,
    /// Secrecy rate of the returned state.
    pub final_secrecy_rate: f64,
}

impl IterationTrace {
    fn new() -> Self {
        Self {
            secrecy_rate: Vec::new(),
            unclamped_sum: Vec::new(),
            surrogate_objective: Vec::new(),
            scnr_residual: Vec::new(),
            power: Vec::new(),
            modulus_deviation: Vec::new(),
            inner_w_iters: Vec::new(),
            inner_phi_iters: Vec::new(),
            wall_ms: Vec::new(),
            termination: RunTermination::MaxOuter,
            rho: 0.0,
            sr_before_projection: 0.0,
            final_secrecy_rate: 0.0,
        }
    }

    /// Number of outer iterations performed.
    pub fn outer_iterations(&self) -> usize {
        self.unclamped_sum.len().saturating_sub(1)
    }

    pub fn is_infeasible(&self) -> bool {
        self.termination == RunTermination::Infeasible
    }

    fn record(
        &mut self,
        ch: &ChannelSet,
        state: &BeamformingState,
        surrogate: f64,
        inner: (usize, usize),
        start: Instant,
    ) -> Result<()> {
        let report = secrecy_rate(ch, state)?;
        self.secrecy_rate.push(report.secrecy_rate);
        self.unclamped_sum.push(report.unclamped_sum);
        self.surrogate_objective.push(surrogate);
        self.scnr_residual.push(report.scnr_slack);
        self.power.push(state.power());
        self.modulus_deviation.push(report.modulus_deviation);
        self.inner_w_iters.push(inner.0);
        self.inner_phi_iters.push(inner.1);
        self.wall_ms.push(start.elapsed().as_secs_f64() * 1e3);
        Ok(())
    }
}

/// `|new − old| / max(|old|, 1e−12)`.
pub fn variation_rate(obj_new: f64, obj_old: f64) -> f64 {
    (obj_new - obj_old).abs() / obj_old.abs().max(1e-12)
}

/// Initial point and whether it meets the echo constraint.
#[derive(Debug, Clone, PartialEq)]
pub struct Initialization {
    pub state: BeamformingState,
    pub feasible: bool,
}

/// Optional frozen blocks for the benchmark schemes.
#[derive(Debug, Clone, Default)]
struct Frozen {
    phi: Option<CVector>,
    u: Option<CVector>,
}

/// Plain MRT starting point with the default free blocks.
pub fn init_state(ch: &ChannelSet, config: &JbrdConfig) -> Result<Initialization> {
    Ok(init_with(ch, config, &Frozen::default())?.swap_remove(0))
}

fn unit(v: CVector) -> CVector {
    let n = v.norm();
    if n > 0.0 {
        v / Complex64::from(n)
    } else {
        v
    }
}

/// Phases that co-phase every reflected path of user 0 with its direct path
/// for the direct-link MRT direction.
fn aligned_phases(ch: &ChannelSet) -> CVector {
    let m = ch.ris_elements();
    if m == 0 {
        return CVector::zeros(0);
    }
    let g_b = &ch.g_b[0];
    let w_ref = unit(g_b.clone());
    let direct = g_b.dotc(&w_ref);
    let reflected = &ch.h_br * &w_ref;
    CVector::from_fn(m, |i, _| {
        let path = ch.g_r[0][i].conj() * reflected[i];
        Complex64::from_polar(1.0, direct.arg() - path.arg())
    })
}

/// Grid steps of the communication-beam tilt towards the target.
const INIT_TILT_STEPS: usize = 10;

/// Starting points: plain MRT first, then the tilted variant when the tilt
/// lowers the radar share.
fn init_with(ch: &ChannelSet, config: &JbrdConfig, frozen: &Frozen) -> Result<Vec<Initialization>> {
    let (k, n) = (ch.users(), ch.antennas());
    let p = &ch.params;
    let mut rng = stream_rng(ch.seed, STREAM_INIT);
    let phi = match (&frozen.phi, config.init) {
        (Some(phi), _) => phi.clone(),
        (None, InitPolicy::MrtAligned) => aligned_phases(ch),
        (None, InitPolicy::Random) => random_phases(&mut rng, ch.ris_elements()),
    };
    let h_norm = ch.h_bt.norm();
    if !(h_norm > 0.0) {
        return domain("target channel h_bt is zero");
    }
    let h_unit = &ch.h_bt / Complex64::from(h_norm);
    let u = frozen.u.clone().unwrap_or_else(|| h_unit.clone());

    let mut beams = Vec::with_capacity(k);
    for user in 0..k {
        beams.push(match config.init {
            InitPolicy::MrtAligned => unit(composite_user_channel(ch, &phi, user)?.map(|z| z.conj())),
            InitPolicy::Random => random_unit_vector(&mut rng, n),
        });
    }
    let radar: Vec<CVector> = random_phases(&mut rng, n).iter().map(|&ph| &h_unit * ph).collect();

    // Communication beams tilted by t towards the target, in phase with
    // their own projection on it.
    let tilted = |t: f64| -> Vec<CVector> {
        beams
            .iter()
            .map(|b| {
                let proj = h_unit.dotc(b);
                let ph = if proj.norm() > 0.0 { proj / proj.norm() } else { Complex64::from(1.0) };
                unit(b * Complex64::from(1.0 - t) + &h_unit * (ph * t))
            })
            .collect()
    };
    // Radar share τ of the total power; SCNR is affine in τ.
    let build = |comm: &[CVector], tau: f64, total: f64| {
        let mut w = CMatrix::zeros(n, k + n);
        let c = Complex64::from(((1.0 - tau) * total / k as f64).sqrt());
        let r = Complex64::from((tau * total / n as f64).sqrt());
        for (i, col) in comm.iter().enumerate() {
            w.set_column(i, &(col * c));
        }
        for (i, col) in radar.iter().enumerate() {
            w.set_column(k + i, &(col * r));
        }
        w
    };
    let base = 0.9 * p.bs_power;
    let target = p.gamma_echo * (1.0 + config.scnr_margin);
    let floor = config.init_radar_fraction;
    let place = |comm: &[CVector]| -> Result<(f64, f64)> {
        let s0 = scnr_for(ch, &build(comm, 0.0, base), &u)?;
        let s1 = scnr_for(ch, &build(comm, 1.0, base), &u)?;
        Ok(if s0 >= target {
            (floor, base)
        } else if s1 >= target {
            (((target - s0) / (s1 - s0)).clamp(0.0, 1.0).max(floor), base)
        } else {
            // All power towards the target, grown up to the budget.
            (1.0, (base * target / s1.max(1e-300)).min(p.bs_power))
        })
    };
    // Radar power jams the users too, so MRT beams are tilted just far
    // enough to carry as much of the echo as they can.
    let tilts = match config.init {
        InitPolicy::MrtAligned => INIT_TILT_STEPS,
        InitPolicy::Random => 0,
    };
    let untilted = (tilted(0.0), place(&tilted(0.0))?);
    let mut chosen: Option<(Vec<CVector>, (f64, f64))> = None;
    for step in 1..=tilts {
        let best_tau = chosen.as_ref().map_or(untilted.1 .0, |c| c.1 .0);
        if best_tau <= floor {
            break;
        }
        let comm = tilted(step as f64 / INIT_TILT_STEPS as f64);
        let placed = place(&comm)?;
        if placed.0 < best_tau {
            chosen = Some((comm, placed));
        }
    }
    let finish = |(comm, (tau, total)): (Vec<CVector>, (f64, f64))| -> Result<Initialization> {
        let w = build(&comm, tau, total);
        let feasible = scnr_for(ch, &w, &u)? >= p.gamma_echo * (1.0 - 1e-9);
        Ok(Initialization { state: BeamformingState { w, phi: phi.clone(), u: u.clone() }, feasible })
    };
    let mut out = vec![finish(untilted)?];
    if let Some(c) = chosen {
        out.push(finish(c)?);
    }
    Ok(out)
}

/// Element-wise `φ/|φ|`, mapping zeros to 1.
pub fn hard_project(phi: &CVector) -> CVector {
    phi.map(|z| if z.norm() > 0.0 { z / z.norm() } else { Complex64::new(1.0, 0.0) })
}

fn with_phi(state: &BeamformingState, phi: CVector) -> BeamformingState {
    BeamformingState { phi, ..state.clone() }
}

/// Runs the alternating ascent from every starting point and keeps the
/// run with the highest final secrecy rate (the earlier one on ties).
fn run_with(ch: &ChannelSet, config: &JbrdConfig, frozen: Frozen) -> Result<(BeamformingState, IterationTrace)> {
    config.validate()?;
    let start = Instant::now();
    let mut best: Option<(BeamformingState, IterationTrace)> = None;
    for init in init_with(ch, config, &frozen)? {
        let run = ascend(ch, config, &frozen, init, start)?;
        let better = match &best {
            None => true,
            Some((_, t)) => t.is_infeasible() && !run.1.is_infeasible() || run.1.final_secrecy_rate > t.final_secrecy_rate,
        };
        if better {
            best = Some(run);
        }
    }
    Ok(best.expect("at least one starting point"))
}

fn ascend(
    ch: &ChannelSet,
    config: &JbrdConfig,
    frozen: &Frozen,
    init: Initialization,
    start: Instant,
) -> Result<(BeamformingState, IterationTrace)> {
    let optimize_u = frozen.u.is_none();
    let optimize_phi = frozen.phi.is_none() && ch.ris_elements() > 0;
    let mut state = init.state;
    let mut trace = IterationTrace::new();
    let mut sum = unclamped_secrecy_sum(ch, &state)?;
    trace.rho = match config.rho {
        RhoPolicy::Fixed(r) => r,
        RhoPolicy::Auto { factor } => factor * sum.abs().max(1.0) / ch.ris_elements().max(1) as f64,
    };
    trace.record(ch, &state, sum, (0, 0), start)?;
    if !init.feasible {
        trace.termination = RunTermination::Infeasible;
        trace.sr_before_projection = *trace.secrecy_rate.last().unwrap_or(&0.0);
        trace.final_secrecy_rate = trace.sr_before_projection;
        return Ok((state, trace));
    }

    for _ in 0..config.max_outer {
        let previous = sum;
        if optimize_u {
            state.u = solve_receive_beamformer(ch, &state.w)?.u;
        }

        let mut w_iters = 0;
        let mut surrogate = sum;
        let mut last_f: Option<f64> = None;
        for _ in 0..config.max_inner_w {
            let aux = AuxiliaryVars::at(ch, &state)?;
            let (w_new, report) = solve_w_subproblem(ch, &state, &aux, &state.w, &config.solver)?;
            if report.termination == Termination::Infeasible {
                trace.termination = RunTermination::Infeasible;
                break;
            }
            w_iters += 1;
            let candidate = BeamformingState { w: w_new, ..state.clone() };
            let candidate_sum = unclamped_secrecy_sum(ch, &candidate)?;
            if !(candidate_sum >= sum) {
                break;
            }
            state = candidate;
            sum = candidate_sum;
            let f = report.final_objective();
            surrogate = f;
            let old = last_f.unwrap_or(report.objective[0]);
            last_f = Some(f);
            if variation_rate(f, old) <= config.delta {
                break;
            }
        }
        if trace.termination == RunTermination::Infeasible {
            break;
        }

        let mut phi_iters = 0;
        if optimize_phi {
            let before = state.phi.clone();
            let mut relaxed = state.clone();
            let mut last_g: Option<f64> = None;
            for _ in 0..config.max_inner_phi {
                let aux = AuxiliaryVars::at(ch, &relaxed)?;
                let (phi_new, report) =
                    solve_phi_subproblem(ch, &relaxed, &aux, &relaxed.phi, trace.rho, &config.solver)?;
                phi_iters += 1;
                relaxed.phi = phi_new;
                let g = report.final_objective();
                let old = last_g.unwrap_or(report.objective[0]);
                last_g = Some(g);
                if variation_rate(g, old) <= config.delta {
                    break;
                }
            }
            let hard = with_phi(&state, hard_project(&relaxed.phi));
            let hard_sum = unclamped_secrecy_sum(ch, &hard)?;
            let relaxed_sum = unclamped_secrecy_sum(ch, &relaxed)?;
            if hard_sum >= sum {
                state = hard;
                sum = hard_sum;
            } else if relaxed_sum > sum {
                state = relaxed;
                sum = relaxed_sum;
            } else {
                state.phi = before;
            }
        }

        trace.record(ch, &state, surrogate, (w_iters, phi_iters), start)?;
        if variation_rate(sum, previous) <= config.delta {
            trace.termination = RunTermination::Converged;
            break;
        }
    }

    trace.sr_before_projection = secrecy_rate(ch, &state)?.secrecy_rate;
    state.phi = hard_project(&state.phi);
    if optimize_u {
        state.u = solve_receive_beamformer(ch, &state.w)?.u;
    }
    trace.final_secrecy_rate = secrecy_rate(ch, &state)?.secrecy_rate;
    Ok((state, trace))
}

/// Full alternating design.
pub fn run_jbrd(ch: &ChannelSet, config: &JbrdConfig) -> Result<(BeamformingState, IterationTrace)> {
    run_with(ch, config, Frozen::default())
}

/// Benchmark schemes; `Scheme::Jbrd` is accepted and forwards to
/// [`run_jbrd`].
pub fn run_benchmark(ch: &ChannelSet, config: &JbrdConfig, scheme: Scheme) -> Result<(BeamformingState, IterationTrace)> {
    match scheme {
        Scheme::Jbrd => run_jbrd(ch, config),
        Scheme::NoRis => run_jbrd(&ch.without_ris(), config),
        Scheme::RisRandomPhase => {
            let mut rng = stream_rng(ch.seed, STREAM_BENCHMARK);
            let phi = random_phases(&mut rng, ch.ris_elements());
            run_with(ch, config, Frozen { phi: Some(phi), u: None })
        }
        Scheme::URandom => {
            let mut rng = stream_rng(ch.seed, STREAM_BENCHMARK);
            let u = random_unit_vector(&mut rng, ch.antennas());
            run_with(ch, config, Frozen { phi: None, u: Some(u) })
        }
    }
}
