//! Monotone projected gradient ascent with Barzilai–Borwein trial steps
//! and Armijo backtracking along the projection arc.

use num_complex::Complex64;

use super::{SolverParams, SubproblemReport, Termination};
use crate::error::Result;
use crate::linalg::{frob_norm_sq, real_inner, CMatrix};

/// A concave maximization over a closed convex set. Complex variables are
/// treated as pairs of reals; `gradient` returns `∂f/∂Re + j·∂f/∂Im`.
pub trait AscentProblem {
    fn value(&self, x: &CMatrix) -> f64;
    fn gradient(&self, x: &CMatrix) -> CMatrix;
    fn project(&self, x: &CMatrix) -> Result<CMatrix>;
    /// Typical magnitude of the variable, used to size the first step.
    fn scale(&self) -> f64;
}

/// Runs the ascent from `start` (projected first if needed) and returns the
/// best iterate. Objective values of `NaN` or `−∞` are treated as
/// rejections by the line search.
pub fn projected_ascent<P: AscentProblem>(
    problem: &P,
    start: &CMatrix,
    params: &SolverParams,
) -> Result<(CMatrix, SubproblemReport)> {
    let mut x = problem.project(start)?;
    let mut f = problem.value(&x);
    let mut report = SubproblemReport {
        objective: vec![f],
        residuals: Vec::new(),
        steps: 0,
        termination: Termination::MaxSteps,
    };
    let mut g = problem.gradient(&x);
    let g_norm = frob_norm_sq(&g).sqrt();
    if !(g_norm > 0.0) || !g_norm.is_finite() || !f.is_finite() {
        report.termination = Termination::Converged;
        return Ok((x, report));
    }
    let alpha0 = params.step_init * problem.scale().max(1e-300) / g_norm;
    let (alpha_min, alpha_max) = (alpha0 * 1e-10, alpha0 * 1e10);
    let mut alpha = alpha0;
    let mut quiet = 0;

    for _ in 0..params.max_inner_steps {
        let mut accepted = None;
        let mut trial = alpha;
        for _ in 0..params.max_backtracks {
            let candidate = problem.project(&(&x + &g * Complex64::from(trial)))?;
            let d = &candidate - &x;
            let value = problem.value(&candidate);
            if value.is_finite() && value >= f + params.armijo * real_inner(&g, &d) {
                accepted = Some((candidate, d, value));
                break;
            }
            trial *= params.backtrack;
        }
        let Some((x_new, s, f_new)) = accepted else {
            report.termination = Termination::Converged;
            break;
        };
        let g_new = problem.gradient(&x_new);
        let improvement = f_new - f;
        let s_sq = frob_norm_sq(&s);
        let curvature = -real_inner(&s, &(&g_new - &g));
        alpha = if curvature > 0.0 { (s_sq / curvature).clamp(alpha_min, alpha_max) } else { alpha_max };

        x = x_new;
        f = f_new;
        g = g_new;
        report.steps += 1;
        report.objective.push(f);

        if improvement <= params.tolerance * f.abs().max(1.0) {
            quiet += 1;
            if quiet >= 3 {
                report.termination = Termination::Converged;
                break;
            }
        } else {
            quiet = 0;
        }
        if s_sq == 0.0 {
            report.termination = Termination::Converged;
            break;
        }
    }
    Ok((x, report))
}

/// `τ·ln(e^{a/τ} + e^{b/τ})` and its weight on `a`. With `τ = 0` this is
/// `max(a, b)` with ties going to `a`.
pub fn soft_max(a: f64, b: f64, tau: f64) -> (f64, f64) {
    if tau > 0.0 {
        let weight = 1.0 / (1.0 + ((b - a) / tau).exp());
        (a.max(b) + tau * (-(a - b).abs() / tau).exp().ln_1p(), weight)
    } else if a >= b {
        (a, 1.0)
    } else {
        (b, 0.0)
    }
}

/// Ascent on `smooth` from `start`, then on `exact` from there. Falls back
/// to a plain ascent on `exact` when the two-pass result scores below the
/// start on `exact`. The report is in terms of `exact`.
///
/// A projected gradient step cannot leave a kink of `−max(·,·)` along a
/// single branch gradient; the smooth pass moves off such kinks.
pub fn smoothed_ascent<P: AscentProblem>(
    exact: &P,
    smooth: Option<&P>,
    start: &CMatrix,
    params: &SolverParams,
) -> Result<(CMatrix, SubproblemReport)> {
    let Some(smooth) = smooth else {
        return projected_ascent(exact, start, params);
    };
    let x0 = exact.project(start)?;
    let f0 = exact.value(&x0);
    let (warm, first) = projected_ascent(smooth, &x0, params)?;
    let (x, second) = projected_ascent(exact, &warm, params)?;
    if second.final_objective() >= f0 {
        let mut objective = vec![f0];
        objective.extend_from_slice(&second.objective);
        let report = SubproblemReport {
            objective,
            residuals: Vec::new(),
            steps: first.steps + second.steps,
            termination: second.termination,
        };
        return Ok((x, report));
    }
    projected_ascent(exact, &x0, params)
}
