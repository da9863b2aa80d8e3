//! Orbit-preserving steppers: DDB, its symmetric variant, and the forced
//! Moser–Veselov method.
//!
//! Each one ends with `M_{k+1} = Ad*_{w φd} M_k = (w φd)ᵀ M_k` for some
//! rotation `w φd`, so `‖M‖` is preserved up to rounding no matter how
//! accurately the implicit equations are solved.

use serde::{Deserialize, Serialize};

use crate::dynamics::{phi, DissipationMetric, InertiaModel};
use crate::retraction::RetractionKind;
use crate::so3::{coadjoint, GroupElement, Vec3};
use crate::solver::{
    discrete_momentum, newton3, solve_momentum_to_velocity, solve_mv_group, NewtonConfig,
    SolverError,
};

/// How the symmetric variant averages the dissipation over a step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Averaging {
    /// `φd = τ(h φ((ξ_k + ξ_{k+1})/2))`
    #[default]
    MidpointVelocity,
    /// `φd = τ(h (φ(ξ_k) + φ(ξ_{k+1}))/2)`
    AveragedPhi,
}

/// One DDB step. Returns `M_{k+1}` and the applied increment `w_k φd(w_k)`.
pub fn ddb_step(
    m: &Vec3,
    kind: RetractionKind,
    inertia: &InertiaModel,
    metric: &DissipationMetric,
    h: f64,
    cfg: &NewtonConfig,
) -> Result<(Vec3, GroupElement), SolverError> {
    let xi = solve_momentum_to_velocity(m, kind, inertia, h, cfg)?;
    let w = kind.tau(&(xi * h));
    let phi_d = kind.tau(&(phi(inertia, metric, &xi) * h));
    let increment = w * phi_d;
    Ok((coadjoint(&increment, m), increment))
}

/// Result of one symmetric update in velocity form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymmetricUpdate {
    pub velocity: Vec3,
    pub momentum: Vec3,
    pub increment: GroupElement,
}

fn averaged_phi(
    inertia: &InertiaModel,
    metric: &DissipationMetric,
    averaging: Averaging,
    xi_k: &Vec3,
    xi_next: &Vec3,
) -> Vec3 {
    match averaging {
        Averaging::MidpointVelocity => phi(inertia, metric, &((xi_k + xi_next) * 0.5)),
        Averaging::AveragedPhi => {
            (phi(inertia, metric, xi_k) + phi(inertia, metric, xi_next)) * 0.5
        }
    }
}

/// Symmetric update from a known velocity `ξ_k`.
///
/// Solves for `ξ_{k+1}` in
///
/// ```text
/// (dτ⁻¹_{hξ_{k+1}})* 𝕀ξ_{k+1} = Ad*_{τ(hξ_k) τ(h φ̄)} (dτ⁻¹_{hξ_k})* 𝕀ξ_k
/// ```
///
/// where `φ̄` averages the dissipation over `ξ_k, ξ_{k+1}`. The defining
/// equation is unchanged under `(ξ_k, ξ_{k+1}, h) → (ξ_{k+1}, ξ_k, −h)`, so
/// `h` may be negative here.
pub fn symmetric_velocity_update(
    xi_k: &Vec3,
    kind: RetractionKind,
    inertia: &InertiaModel,
    metric: &DissipationMetric,
    h: f64,
    averaging: Averaging,
    cfg: &NewtonConfig,
) -> Result<SymmetricUpdate, SolverError> {
    let m_k = discrete_momentum(kind, inertia, h, xi_k);
    symmetric_update_from(xi_k, &m_k, kind, inertia, metric, h, averaging, cfg)
}

#[allow(clippy::too_many_arguments)]
fn symmetric_update_from(
    xi_k: &Vec3,
    m_k: &Vec3,
    kind: RetractionKind,
    inertia: &InertiaModel,
    metric: &DissipationMetric,
    h: f64,
    averaging: Averaging,
    cfg: &NewtonConfig,
) -> Result<SymmetricUpdate, SolverError> {
    let w = kind.tau(&(xi_k * h));
    let increment_for = |xi_next: &Vec3| {
        let phi_bar = averaged_phi(inertia, metric, averaging, xi_k, xi_next);
        w * kind.tau(&(phi_bar * h))
    };
    let residual = |xi_next: &Vec3| {
        discrete_momentum(kind, inertia, h, xi_next) - coadjoint(&increment_for(xi_next), m_k)
    };
    let velocity = newton3(residual, *xi_k, cfg)?;
    let increment = increment_for(&velocity);
    Ok(SymmetricUpdate {
        velocity,
        momentum: coadjoint(&increment, m_k),
        increment,
    })
}

/// One step of the symmetric second-order DDB variant in momentum form.
///
/// `ξ_k` is recovered from `M_k` once, then a single 3×3 Newton system is
/// solved for `ξ_{k+1}`.
pub fn ddb_symmetric_step(
    m: &Vec3,
    kind: RetractionKind,
    inertia: &InertiaModel,
    metric: &DissipationMetric,
    h: f64,
    averaging: Averaging,
    cfg: &NewtonConfig,
) -> Result<(Vec3, GroupElement), SolverError> {
    let xi_k = solve_momentum_to_velocity(m, kind, inertia, h, cfg)?;
    let update = symmetric_update_from(&xi_k, m, kind, inertia, metric, h, averaging, cfg)?;
    Ok((update.momentum, update.increment))
}

/// One step of the forced Moser–Veselov method.
///
/// `w` solves `hM̂ = wJ − Jwᵀ`; the dissipation uses `Ω = 𝕀⁻¹M` and the
/// given retraction for `φd = τ(h φ(Ω))`.
pub fn mv_step(
    m: &Vec3,
    inertia: &InertiaModel,
    metric: &DissipationMetric,
    h: f64,
    phi_retraction: RetractionKind,
    cfg: &NewtonConfig,
) -> Result<(Vec3, GroupElement), SolverError> {
    let w = solve_mv_group(m, inertia, h, cfg)?;
    let omega = inertia.velocity_of(m);
    let phi_d = phi_retraction.tau(&(phi(inertia, metric, &omega) * h));
    let increment = w * phi_d;
    Ok((coadjoint(&increment, m), increment))
}
