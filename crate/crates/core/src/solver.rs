//! Small dense Newton solvers used by the implicit steps.

use nalgebra::{DMatrix, DVector, SMatrix, SVector};
use thiserror::Error;

use crate::dynamics::InertiaModel;
use crate::retraction::RetractionKind;
use crate::so3::{cay_so3, exp_so3, hat, vee_skew_part, GroupElement, Mat3, Vec3};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error(
        "Newton iteration did not converge after {iterations} iterations (residual {residual:e})"
    )]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("singular Jacobian at Newton iteration {iteration}")]
    SingularJacobian { iteration: usize },
    #[error("two group solutions are equally close to the identity (distance {distance})")]
    BranchAmbiguity { distance: f64 },
    #[error("the matrix J = tr(I)/2 - I is singular")]
    SingularMvMatrix,
    #[error("step size must be positive and finite, got {0}")]
    InvalidStep(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum JacobianMode {
    /// Use a hand-derived Jacobian where one exists, else fall back to
    /// central differences with the default step.
    Analytic,
    /// Central differences with step `step · max(1, ‖x‖)`.
    FiniteDifference { step: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonConfig {
    pub abs_tol: f64,
    pub max_iter: usize,
    pub jacobian: JacobianMode,
}

pub const DEFAULT_FD_STEP: f64 = 1e-7;

impl Default for NewtonConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-12,
            max_iter: 50,
            jacobian: JacobianMode::FiniteDifference {
                step: DEFAULT_FD_STEP,
            },
        }
    }
}

impl NewtonConfig {
    pub fn with_tolerance(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }

    pub fn with_analytic_jacobian(mut self) -> Self {
        self.jacobian = JacobianMode::Analytic;
        self
    }

    fn fd_step(&self) -> f64 {
        match self.jacobian {
            JacobianMode::FiniteDifference { step } => step,
            JacobianMode::Analytic => DEFAULT_FD_STEP,
        }
    }
}

/// Central-difference Jacobian of `f` at `x`.
pub fn fd_jacobian<const N: usize, F>(f: &F, x: &SVector<f64, N>, step: f64) -> SMatrix<f64, N, N>
where
    F: Fn(&SVector<f64, N>) -> SVector<f64, N>,
{
    let eps = step * x.norm().max(1.0);
    let mut jac = SMatrix::<f64, N, N>::zeros();
    for j in 0..N {
        let mut xp = *x;
        let mut xm = *x;
        xp[j] += eps;
        xm[j] -= eps;
        jac.set_column(j, &((f(&xp) - f(&xm)) / (2.0 * eps)));
    }
    jac
}

/// Newton's method with a caller-supplied Jacobian.
///
/// Stops as soon as `‖F(x)‖∞ ≤ abs_tol`.
pub fn newton_with_jacobian<const N: usize, F, J>(
    f: F,
    jac: J,
    x0: SVector<f64, N>,
    cfg: &NewtonConfig,
) -> Result<SVector<f64, N>, SolverError>
where
    F: Fn(&SVector<f64, N>) -> SVector<f64, N>,
    J: Fn(&SVector<f64, N>) -> SMatrix<f64, N, N>,
{
    let mut x = x0;
    let mut residual = f64::INFINITY;
    for iteration in 0..=cfg.max_iter {
        let r = f(&x);
        residual = r.amax();
        if !residual.is_finite() {
            break;
        }
        if residual <= cfg.abs_tol {
            return Ok(x);
        }
        if iteration == cfg.max_iter {
            break;
        }
        let dx = DMatrix::from_column_slice(N, N, jac(&x).as_slice())
            .lu()
            .solve(&DVector::from_column_slice(r.as_slice()))
            .ok_or(SolverError::SingularJacobian { iteration })?;
        x -= SVector::<f64, N>::from_column_slice(dx.as_slice());
    }
    Err(SolverError::NoConvergence {
        iterations: cfg.max_iter,
        residual,
    })
}

/// Newton's method with a central-difference Jacobian.
pub fn newton<const N: usize, F>(
    f: F,
    x0: SVector<f64, N>,
    cfg: &NewtonConfig,
) -> Result<SVector<f64, N>, SolverError>
where
    F: Fn(&SVector<f64, N>) -> SVector<f64, N>,
{
    let step = cfg.fd_step();
    newton_with_jacobian(&f, |x| fd_jacobian(&f, x, step), x0, cfg)
}

/// Newton's method on ℝ³.
pub fn newton3<F>(f: F, x0: Vec3, cfg: &NewtonConfig) -> Result<Vec3, SolverError>
where
    F: Fn(&Vec3) -> Vec3,
{
    newton(f, x0, cfg)
}

fn check_step(h: f64) -> Result<(), SolverError> {
    if h.is_finite() && h != 0.0 {
        Ok(())
    } else {
        Err(SolverError::InvalidStep(h))
    }
}

/// Discrete momentum `(dτ⁻¹_{hξ})* 𝕀ξ` of a velocity `ξ`.
pub fn discrete_momentum(kind: RetractionKind, inertia: &InertiaModel, h: f64, xi: &Vec3) -> Vec3 {
    kind.dtau_inv_dual(&(xi * h)) * inertia.momentum_of(xi)
}

/// Jacobian of [`discrete_momentum`] in `ξ` for the Cayley retraction.
///
/// With `p = 𝕀ξ` the map is `p + (h/2) ξ×p + (h²/4)(ξ·p) ξ`.
fn cayley_momentum_jacobian(inertia: &InertiaModel, h: f64, xi: &Vec3) -> Mat3 {
    let inertia_m = inertia.matrix();
    let p = inertia.momentum_of(xi);
    let cross = hat(xi) * inertia_m - hat(&p);
    let quad = Mat3::identity() * xi.dot(&p) + xi * (p.transpose() * 2.0);
    inertia_m + cross * (0.5 * h) + quad * (0.25 * h * h)
}

/// Finds `ξ` with `(dτ⁻¹_{hξ})* 𝕀ξ = M`, starting from `ξ⁰ = 𝕀⁻¹M`.
///
/// `h` may be negative; this is used by the time-reversed symmetric step.
pub fn solve_momentum_to_velocity(
    m: &Vec3,
    kind: RetractionKind,
    inertia: &InertiaModel,
    h: f64,
    cfg: &NewtonConfig,
) -> Result<Vec3, SolverError> {
    check_step(h)?;
    let residual = |xi: &Vec3| discrete_momentum(kind, inertia, h, xi) - m;
    let x0 = inertia.velocity_of(m);
    match (cfg.jacobian, kind) {
        (JacobianMode::Analytic, RetractionKind::Cayley) => newton_with_jacobian(
            residual,
            |xi| cayley_momentum_jacobian(inertia, h, xi),
            x0,
            cfg,
        ),
        _ => newton3(residual, x0, cfg),
    }
}

/// Moser–Veselov momentum `(wJ − Jwᵀ)/h` as a vector.
pub fn mv_momentum(w: &GroupElement, j: &Mat3, h: f64) -> Vec3 {
    let w = w.matrix();
    vee_skew_part(&(w * j - j * w.transpose())) / h
}

/// Distinct roots closer than this are treated as the same solution.
const ROOT_IDENTITY_TOL: f64 = 1e-6;
/// Roots whose distances to the identity differ by less than this are ambiguous.
const BRANCH_TIE_TOL: f64 = 1e-8;

/// Solves `hM̂ = wJ − Jwᵀ` for `w ∈ SO(3)` on the branch nearest the identity.
///
/// Newton runs in the chart `w = w⁰ cay(y)` with `w⁰ = exp(h 𝕀⁻¹M)`. To
/// detect ties between branches the same chart Newton is also seeded at
/// `w⁰` composed with half-turns about the principal axes, which is where
/// the remaining roots sit for small `h`.
pub fn solve_mv_group(
    m: &Vec3,
    inertia: &InertiaModel,
    h: f64,
    cfg: &NewtonConfig,
) -> Result<GroupElement, SolverError> {
    if !(h.is_finite() && h > 0.0) {
        return Err(SolverError::InvalidStep(h));
    }
    let j = inertia.mv_matrix();
    if j.diagonal().iter().any(|&d| d == 0.0) {
        return Err(SolverError::SingularMvMatrix);
    }
    // ‖·‖_F of a skew matrix is √2 ‖·‖₂ ≤ √6 ‖·‖∞
    let chart_cfg = cfg.with_tolerance(cfg.abs_tol / 6f64.sqrt());
    let w0 = exp_so3(&(inertia.velocity_of(m) * h));
    let solve_from = |seed: GroupElement| {
        let f = |y: &Vec3| mv_momentum(&(seed * cay_so3(y)), &j, h) - m;
        newton3(f, Vec3::zeros(), &chart_cfg).map(|y| seed * cay_so3(&y))
    };

    let primary = solve_from(w0)?;
    let mut roots = vec![primary];
    for axis in [Vec3::x(), Vec3::y(), Vec3::z()] {
        let seed = w0 * exp_so3(&(axis * std::f64::consts::PI));
        if let Ok(root) = solve_from(seed) {
            let fresh = roots
                .iter()
                .all(|r| (r.matrix() - root.matrix()).norm() > ROOT_IDENTITY_TOL);
            if fresh {
                roots.push(root);
            }
        }
    }
    roots.sort_by(|a, b| {
        a.distance_to_identity()
            .total_cmp(&b.distance_to_identity())
    });
    if let [first, second, ..] = roots.as_slice() {
        let (d1, d2) = (first.distance_to_identity(), second.distance_to_identity());
        if (d2 - d1).abs() <= BRANCH_TIE_TOL {
            return Err(SolverError::BranchAmbiguity { distance: d1 });
        }
    }
    Ok(roots[0])
}
