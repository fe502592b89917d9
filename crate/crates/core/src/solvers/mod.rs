//! Subproblem solvers for the alternating design.
//!
//! - [`receive`]: receive beamformer as a generalized Rayleigh quotient.
//! - [`transmit`]: concave surrogate of the transmit-beamformer subproblem.
//! - [`reflection`]: concave surrogate of the relaxed RIS subproblem.
//! - [`projection`]: closed-form projections and Dykstra alternation.
//! - [`spg`]: projected gradient ascent with Armijo backtracking shared by
//!   both surrogates.

pub mod projection;
pub mod receive;
pub mod reflection;
pub mod spg;
pub mod transmit;

pub use projection::{
    project_ball_halfspace, project_halfspace, project_power_ball, project_sensing_halfspace, project_unit_disks,
    Halfspace,
};
pub use receive::{dominant_generalized_eigvec, rayleigh_quotient, solve_receive_beamformer, ReceiveSolution};
pub use reflection::{solve_phi_subproblem, surrogate_gradient_phi, PhiSurrogate};
pub use spg::{projected_ascent, smoothed_ascent, soft_max, AscentProblem};
pub use transmit::{solve_w_subproblem, surrogate_gradient_w, TransmitSurrogate};

/// Tuning knobs of the inner first-order solvers.
#[derive(Debug, Clone, PartialEq)]
pub struct SolverParams {
    pub max_inner_steps: usize,
    /// First trial step, relative to the variable scale over the gradient
    /// norm.
    pub step_init: f64,
    /// Backtracking factor β ∈ (0, 1).
    pub backtrack: f64,
    /// Armijo sufficient-increase constant.
    pub armijo: f64,
    pub max_backtracks: usize,
    /// Relative objective improvement below which the ascent stops.
    pub tolerance: f64,
    pub dykstra_iters: usize,
    pub dykstra_tol: f64,
    /// Temperature (nats) of the log-sum-exp stand-in for the leakage
    /// `max`, used for a warm-start pass before the exact ascent. Zero
    /// disables the pass.
    pub smoothing: f64,
}

impl Default for SolverParams {
    fn default() -> Self {
        Self {
            max_inner_steps: 200,
            step_init: 0.1,
            backtrack: 0.5,
            armijo: 1e-4,
            max_backtracks: 40,
            tolerance: 1e-9,
            dykstra_iters: 2000,
            dykstra_tol: 1e-12,
            smoothing: 1e-2,
        }
    }
}

impl SolverParams {
    pub fn validate(&self) -> crate::Result<()> {
        let ok = self.max_inner_steps >= 1
            && self.step_init > 0.0
            && self.backtrack > 0.0
            && self.backtrack < 1.0
            && self.armijo > 0.0
            && self.armijo < 1.0
            && self.max_backtracks >= 1
            && self.tolerance > 0.0
            && self.dykstra_iters >= 1
            && self.dykstra_tol > 0.0
            && self.smoothing >= 0.0
            && self.smoothing.is_finite();
        if ok {
            Ok(())
        } else {
            crate::error::domain(format!("invalid solver parameters: {self:?}"))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Converged,
    MaxSteps,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubproblemReport {
    /// Objective at the start point followed by every accepted step.
    pub objective: Vec<f64>,
    /// Constraint residuals at the returned point; non-negative when
    /// satisfied. Power slack first, then the solver-specific ones.
    pub residuals: Vec<f64>,
    pub steps: usize,
    pub termination: Termination,
}

impl SubproblemReport {
    pub fn final_objective(&self) -> f64 {
        *self.objective.last().unwrap_or(&f64::NEG_INFINITY)
    }
}
