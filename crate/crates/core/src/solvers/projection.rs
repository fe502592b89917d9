//! Euclidean projections onto the feasible sets of the subproblems.

use num_complex::Complex64;

use crate::channel::ChannelSet;
use crate::error::{Error, Result};
use crate::linalg::{frob_norm_sq, real_inner, row_apply_column, CMatrix, CVector};
use crate::surrogate::echo_row;

/// Scales `w` back onto `‖W‖²_F ≤ power` if it lies outside.
pub fn project_power_ball(w: &CMatrix, power: f64) -> CMatrix {
    let norm = frob_norm_sq(w).sqrt();
    let radius = power.max(0.0).sqrt();
    if norm <= radius {
        w.clone()
    } else {
        w * Complex64::from(radius / norm)
    }
}

/// Pulls every element into the closed unit disk.
pub fn project_unit_disks(phi: &CVector) -> CVector {
    phi.map(|z| z / z.norm().max(1.0))
}

/// `{X : Re⟨C, X⟩ ≥ b}` with `⟨C, X⟩ = Σ conj(C)·X`.
#[derive(Debug, Clone, PartialEq)]
pub struct Halfspace {
    pub normal: CMatrix,
    pub offset: f64,
}

impl Halfspace {
    /// `Re⟨C, X⟩ − b`; non-negative inside.
    pub fn residual(&self, x: &CMatrix) -> f64 {
        real_inner(&self.normal, x) - self.offset
    }

    pub fn contains(&self, x: &CMatrix) -> bool {
        self.residual(x) >= 0.0
    }

    /// The linearized echo constraint `Σ_i η_echo(w_i) ≥ γ·uᴴ(σ_s² I + P_e h hᴴ)u / ζ²`
    /// around `anchor`, written as a halfspace in `W`.
    pub fn sensing(ch: &ChannelSet, anchor: &CMatrix, u: &CVector) -> Self {
        let p = &ch.params;
        let v = echo_row(ch, u);
        let v_conj = v.map(|z| z.conj());
        let mut normal = CMatrix::zeros(anchor.nrows(), anchor.ncols());
        let mut anchored = 0.0;
        for i in 0..anchor.ncols() {
            let a0 = row_apply_column(&v, anchor, i);
            anchored += a0.norm_sqr();
            normal.set_column(i, &(&v_conj * (a0 * 2.0)));
        }
        let clutter = p.noise_sensing * u.norm_squared() + p.jam_power * u.dotc(&ch.h_bt).norm_sqr();
        Self { normal, offset: p.gamma_echo * clutter / p.rcs + anchored }
    }
}

/// Closed-form projection onto a halfspace.
pub fn project_halfspace(x: &CMatrix, h: &Halfspace) -> Result<CMatrix> {
    let r = h.residual(x);
    if r >= 0.0 {
        return Ok(x.clone());
    }
    let nn = frob_norm_sq(&h.normal);
    if !(nn > 0.0) {
        return Err(Error::Infeasible("constraint normal vanishes while the constraint is violated".into()));
    }
    Ok(x - &h.normal * Complex64::from(r / nn))
}

/// Projection of `w` onto the linearized sensing halfspace built at
/// `anchor` with receive beamformer `u`.
pub fn project_sensing_halfspace(ch: &ChannelSet, w: &CMatrix, anchor: &CMatrix, u: &CVector) -> Result<CMatrix> {
    project_halfspace(w, &Halfspace::sensing(ch, anchor, u))
}

/// Projection onto `{‖X‖²_F ≤ power} ∩ H`.
///
/// When neither single projection lands in the other set both constraints
/// are active, and the answer is the nearest point of the circle where the
/// sphere meets the hyperplane. That point is accepted when its KKT
/// multipliers are non-negative; otherwise Dykstra alternation takes over.
pub fn project_ball_halfspace(
    x: &CMatrix,
    power: f64,
    h: &Halfspace,
    max_iters: usize,
    tol: f64,
) -> Result<CMatrix> {
    let radius = power.max(0.0).sqrt();
    let normal_norm = frob_norm_sq(&h.normal).sqrt();
    // The halfspace misses the ball entirely.
    if h.offset > radius * normal_norm * (1.0 + 1e-12) {
        return Err(Error::Infeasible(format!(
            "sensing constraint needs Re<C,W> >= {:.6e} but the power ball reaches {:.6e}",
            h.offset,
            radius * normal_norm
        )));
    }
    let in_ball = |z: &CMatrix| frob_norm_sq(z) <= power * (1.0 + 1e-12);
    let on_h = project_halfspace(x, h)?;
    if in_ball(&on_h) {
        return Ok(on_h);
    }
    let on_b = project_power_ball(x, power);
    if h.contains(&on_b) {
        return Ok(on_b);
    }
    if let Some(y) = project_sphere_hyperplane(x, power, h) {
        return Ok(y);
    }
    dykstra_ball_halfspace(x, power, h, max_iters, tol)
}

/// Nearest point of `{‖X‖²_F = power, Re⟨C, X⟩ = b}` to `x`, returned only
/// if it is the projection onto the ball-halfspace intersection.
fn project_sphere_hyperplane(x: &CMatrix, power: f64, h: &Halfspace) -> Option<CMatrix> {
    let normal_norm = frob_norm_sq(&h.normal).sqrt();
    if !(normal_norm > 0.0) {
        return None;
    }
    let c_hat = &h.normal / Complex64::from(normal_norm);
    let t = h.offset / normal_norm;
    let along = real_inner(&c_hat, x);
    let perp = x - &c_hat * Complex64::from(along);
    let perp_norm = frob_norm_sq(&perp).sqrt();
    let s = (power - t * t).max(0.0).sqrt();
    if !(perp_norm > 0.0) {
        return None;
    }
    // y = (x + λC)/(1 + μ) with μ, λ ≥ 0.
    let one_plus_mu = perp_norm / s;
    let lambda_c = t * one_plus_mu - along;
    if !(one_plus_mu >= 1.0 && lambda_c >= 0.0) {
        return None;
    }
    Some(&c_hat * Complex64::from(t) + &perp * Complex64::from(s / perp_norm))
}

/// Dykstra alternation between the ball and the halfspace.
pub fn dykstra_ball_halfspace(x: &CMatrix, power: f64, h: &Halfspace, max_iters: usize, tol: f64) -> Result<CMatrix> {
    let scale = power.max(0.0).sqrt().max(1e-300);
    let mut y = x.clone();
    let mut p = CMatrix::zeros(x.nrows(), x.ncols());
    let mut q = CMatrix::zeros(x.nrows(), x.ncols());
    for _ in 0..max_iters {
        let b = project_power_ball(&(&y + &p), power);
        p = &y + &p - &b;
        let next = project_halfspace(&(&b + &q), h)?;
        q = &b + &q - &next;
        let moved = frob_norm_sq(&(&next - &y)).sqrt();
        y = next;
        if moved <= tol * scale {
            // Dykstra approaches from the halfspace side; finish in the
            // ball so the power constraint holds exactly.
            return Ok(project_power_ball(&y, power));
        }
    }
    Err(Error::Infeasible(format!("Dykstra projection did not converge in {max_iters} iterations")))
}
