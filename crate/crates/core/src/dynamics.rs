//! Reduced rigid-body data: Lagrangian, Legendre transform, energy,
//! Casimir, the dissipation map and the continuous forced vector field.
//!
//! The dissipative rigid body is
//!
//! ```text
//! Ṁ = M × Ω + M × K (M × Ω),    Ω = 𝕀⁻¹ M
//! ```
//!
//! where `K` is the matrix of the positive-semidefinite metric used to build
//! the double-bracket term. With `K = α·Id` this is the classical
//! `Ṁ = M × Ω + α M × (M × Ω)`. The flow stays on the sphere `‖M‖ = const`
//! and dissipates energy at the rate `−(M×Ω)ᵀ K (M×Ω)`.

use nalgebra::SymmetricEigen;
use thiserror::Error;

use crate::so3::{ad_star, hat, Mat3, Vec3};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error("principal moments of inertia must be positive and finite, got ({0}, {1}, {2})")]
    NonPositiveInertia(f64, f64, f64),
    #[error("dissipation metric must be symmetric (asymmetry {0:e})")]
    AsymmetricMetric(f64),
    #[error("dissipation metric must be positive semidefinite (smallest eigenvalue {0:e})")]
    IndefiniteMetric(f64),
    #[error("dissipation coefficient must be non-negative and finite, got {0}")]
    NegativeAlpha(f64),
}

/// Principal moments of inertia of a rigid body in its body frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InertiaModel {
    moments: Vec3,
}

impl InertiaModel {
    pub fn new(i1: f64, i2: f64, i3: f64) -> Result<Self, DynamicsError> {
        let ok = [i1, i2, i3].iter().all(|i| i.is_finite() && *i > 0.0);
        if !ok {
            return Err(DynamicsError::NonPositiveInertia(i1, i2, i3));
        }
        Ok(Self {
            moments: Vec3::new(i1, i2, i3),
        })
    }

    pub fn moments(&self) -> Vec3 {
        self.moments
    }

    /// `𝕀 = diag(I₁, I₂, I₃)`.
    pub fn matrix(&self) -> Mat3 {
        Mat3::from_diagonal(&self.moments)
    }

    /// `J = ½ tr(𝕀) Id − 𝕀`, the matrix in `l(Ω) = ½ tr(Ω̂ J Ω̂ᵀ)`.
    pub fn mv_matrix(&self) -> Mat3 {
        let half_trace = 0.5 * self.moments.sum();
        Mat3::from_diagonal(&self.moments.map(|i| half_trace - i))
    }

    /// True when `J` has a negative entry, i.e. the moments violate the
    /// triangle inequality. Nothing downstream requires it; this is only a flag.
    pub fn has_negative_j(&self) -> bool {
        self.mv_matrix().diagonal().iter().any(|&j| j < 0.0)
    }

    pub fn momentum_of(&self, xi: &Vec3) -> Vec3 {
        self.moments.component_mul(xi)
    }

    pub fn velocity_of(&self, m: &Vec3) -> Vec3 {
        m.component_div(&self.moments)
    }
}

/// Matrix `K` of the metric on so(3)* used by the dissipation map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DissipationMetric {
    k: Mat3,
}

impl DissipationMetric {
    pub fn new(k: Mat3) -> Result<Self, DynamicsError> {
        let asym = (k - k.transpose()).amax();
        if asym.is_nan() || asym > 1e-12 {
            return Err(DynamicsError::AsymmetricMetric(asym));
        }
        let sym = (k + k.transpose()) * 0.5;
        let min_eig = SymmetricEigen::new(sym).eigenvalues.min();
        if min_eig.is_nan() || min_eig < -1e-12 {
            return Err(DynamicsError::IndefiniteMetric(min_eig));
        }
        Ok(Self { k: sym })
    }

    /// `K = α·Id`.
    pub fn isotropic(alpha: f64) -> Result<Self, DynamicsError> {
        if !(alpha.is_finite() && alpha >= 0.0) {
            return Err(DynamicsError::NegativeAlpha(alpha));
        }
        Ok(Self {
            k: Mat3::identity() * alpha,
        })
    }

    /// No dissipation.
    pub fn zero() -> Self {
        Self { k: Mat3::zeros() }
    }

    pub fn matrix(&self) -> &Mat3 {
        &self.k
    }

    /// `Some(α)` when `K = α·Id` exactly.
    pub fn as_isotropic(&self) -> Option<f64> {
        let alpha = self.k[(0, 0)];
        (self.k == Mat3::identity() * alpha).then_some(alpha)
    }

    pub fn is_zero(&self) -> bool {
        self.k == Mat3::zeros()
    }
}

/// `l(ξ) = ½ 𝕀ξ·ξ`.
pub fn lagrangian(inertia: &InertiaModel, xi: &Vec3) -> f64 {
    0.5 * inertia.momentum_of(xi).dot(xi)
}

/// Same value as [`lagrangian`] written as `½ tr(ξ̂ J ξ̂ᵀ)`.
pub fn lagrangian_trace_form(inertia: &InertiaModel, xi: &Vec3) -> f64 {
    let k = hat(xi);
    0.5 * (k * inertia.mv_matrix() * k.transpose()).trace()
}

pub fn momentum_of(inertia: &InertiaModel, xi: &Vec3) -> Vec3 {
    inertia.momentum_of(xi)
}

pub fn velocity_of(inertia: &InertiaModel, m: &Vec3) -> Vec3 {
    inertia.velocity_of(m)
}

/// Kinetic energy `½ M·𝕀⁻¹M`.
pub fn energy(inertia: &InertiaModel, m: &Vec3) -> f64 {
    0.5 * m.dot(&inertia.velocity_of(m))
}

/// Casimir `‖M‖²`.
pub fn casimir(m: &Vec3) -> f64 {
    m.norm_squared()
}

/// Dissipation map `φ(ξ) = K ad*_ξ(𝕀ξ) = K (𝕀ξ × ξ)`.
pub fn phi(inertia: &InertiaModel, metric: &DissipationMetric, xi: &Vec3) -> Vec3 {
    metric.matrix() * ad_star(xi, &inertia.momentum_of(xi))
}

/// Continuous vector field `M × Ω + M × K (M × Ω)`.
pub fn forced_field(inertia: &InertiaModel, metric: &DissipationMetric, m: &Vec3) -> Vec3 {
    let omega = inertia.velocity_of(m);
    let free = m.cross(&omega);
    free + m.cross(&(metric.matrix() * free))
}

/// Jacobian of [`forced_field`] with respect to `M`.
pub fn forced_field_jacobian(inertia: &InertiaModel, metric: &DissipationMetric, m: &Vec3) -> Mat3 {
    let omega = inertia.velocity_of(m);
    let k = metric.matrix();
    let free = m.cross(&omega);
    let d_free = hat(m) * Mat3::from_diagonal(&inertia.moments().map(|i| 1.0 / i)) - hat(&omega);
    d_free - hat(&(k * free)) + hat(m) * k * d_free
}

/// `dE/dt = −(M×Ω)ᵀ K (M×Ω)` along [`forced_field`].
pub fn energy_rate(inertia: &InertiaModel, metric: &DissipationMetric, m: &Vec3) -> f64 {
    let free = m.cross(&inertia.velocity_of(m));
    -free.dot(&(metric.matrix() * free))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{rngs::StdRng, Rng, SeedableRng};

    fn scenario_a() -> (InertiaModel, DissipationMetric) {
        (
            InertiaModel::new(1.0, 1.3, 0.5).unwrap(),
            DissipationMetric::isotropic(0.5).unwrap(),
        )
    }

    fn rand_vec(rng: &mut StdRng, s: f64) -> Vec3 {
        Vec3::new(
            rng.gen_range(-s..s),
            rng.gen_range(-s..s),
            rng.gen_range(-s..s),
        )
    }

    fn rand_inertia(rng: &mut StdRng) -> InertiaModel {
        InertiaModel::new(
            rng.gen_range(0.1..3.0),
            rng.gen_range(0.1..3.0),
            rng.gen_range(0.1..3.0),
        )
        .unwrap()
    }

    fn rand_psd(rng: &mut StdRng) -> DissipationMetric {
        let mut a = Mat3::zeros();
        a.iter_mut().for_each(|x| *x = rng.gen_range(-1.0..1.0));
        DissipationMetric::new(a * a.transpose()).unwrap()
    }

    #[test]
    fn inertia_validation_and_j() {
        assert!(InertiaModel::new(1.0, 0.0, 1.0).is_err());
        assert!(InertiaModel::new(1.0, f64::NAN, 1.0).is_err());
        let (inertia, _) = scenario_a();
        assert_abs_diff_eq!(
            inertia.mv_matrix().diagonal(),
            Vec3::new(0.4, 0.1, 0.9),
            epsilon = 1e-15
        );
        assert!(!inertia.has_negative_j());
        assert!(InertiaModel::new(1.0, 1.0, 3.0).unwrap().has_negative_j());
    }

    #[test]
    fn metric_validation() {
        assert!(DissipationMetric::isotropic(-0.1).is_err());
        let mut asym = Mat3::identity();
        asym[(0, 1)] = 0.1;
        assert!(matches!(
            DissipationMetric::new(asym),
            Err(DynamicsError::AsymmetricMetric(_))
        ));
        assert!(matches!(
            DissipationMetric::new(Mat3::from_diagonal(&Vec3::new(1.0, -0.5, 1.0))),
            Err(DynamicsError::IndefiniteMetric(_))
        ));
        assert_eq!(
            DissipationMetric::isotropic(0.5).unwrap().as_isotropic(),
            Some(0.5)
        );
    }

    #[test]
    fn lagrangian_examples() {
        let (inertia, _) = scenario_a();
        assert_eq!(lagrangian(&inertia, &Vec3::zeros()), 0.0);
        let xi = Vec3::new(0.0, 0.05, 1.0);
        assert_abs_diff_eq!(lagrangian(&inertia, &xi), 0.251625, epsilon = 1e-15);
        let mut rng = StdRng::seed_from_u64(1);
        for _ in 0..20 {
            let xi = rand_vec(&mut rng, 3.0);
            let inertia = rand_inertia(&mut rng);
            assert_abs_diff_eq!(
                lagrangian(&inertia, &xi),
                lagrangian_trace_form(&inertia, &xi),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn legendre_examples() {
        let (inertia, _) = scenario_a();
        assert_eq!(momentum_of(&inertia, &Vec3::zeros()), Vec3::zeros());
        assert_abs_diff_eq!(
            momentum_of(&inertia, &Vec3::new(0.0, 0.05, 1.0)),
            Vec3::new(0.0, 0.065, 0.5),
            epsilon = 1e-16
        );
        let mut rng = StdRng::seed_from_u64(2);
        for _ in 0..20 {
            let xi = rand_vec(&mut rng, 3.0);
            assert_abs_diff_eq!(
                velocity_of(&inertia, &momentum_of(&inertia, &xi)),
                xi,
                epsilon = 1e-14
            );
        }
    }

    #[test]
    fn energy_and_casimir_examples() {
        let (inertia, _) = scenario_a();
        let m0 = Vec3::new(0.0, 0.065, 0.5);
        assert_eq!(energy(&inertia, &Vec3::zeros()), 0.0);
        assert_abs_diff_eq!(energy(&inertia, &m0), 0.251625, epsilon = 1e-15);
        assert_eq!(casimir(&Vec3::zeros()), 0.0);
        assert_abs_diff_eq!(casimir(&m0), 0.254225, epsilon = 1e-15);
        let mut rng = StdRng::seed_from_u64(3);
        for _ in 0..20 {
            let inertia = rand_inertia(&mut rng);
            let xi = rand_vec(&mut rng, 3.0);
            assert_abs_diff_eq!(
                energy(&inertia, &momentum_of(&inertia, &xi)),
                lagrangian(&inertia, &xi),
                epsilon = 1e-12
            );
            let g = crate::so3::exp_so3(&rand_vec(&mut rng, 3.0));
            let m = rand_vec(&mut rng, 3.0);
            assert_abs_diff_eq!(
                casimir(&crate::so3::coadjoint(&g, &m)),
                casimir(&m),
                epsilon = 1e-13
            );
        }
    }

    #[test]
    fn phi_examples() {
        let (inertia, metric) = scenario_a();
        assert_eq!(phi(&inertia, &metric, &Vec3::y()), Vec3::zeros());
        assert_abs_diff_eq!(
            phi(&inertia, &metric, &Vec3::new(0.0, 0.05, 1.0)),
            Vec3::new(0.02, 0.0, 0.0),
            epsilon = 1e-16
        );
        let round = InertiaModel::new(2.0, 2.0, 2.0).unwrap();
        assert_eq!(
            phi(&round, &metric, &Vec3::new(0.3, -1.0, 0.7)),
            Vec3::zeros()
        );
    }

    #[test]
    fn forced_field_examples() {
        let (inertia, metric) = scenario_a();
        assert_eq!(
            forced_field(&inertia, &metric, &(Vec3::z() * 0.5)),
            Vec3::zeros()
        );
        let m0 = Vec3::new(0.0, 0.065, 0.5);
        assert_abs_diff_eq!(
            forced_field(&inertia, &metric, &m0),
            Vec3::new(0.04, 0.01, -0.0013),
            epsilon = 1e-16
        );
        assert_abs_diff_eq!(
            energy_rate(&inertia, &metric, &m0),
            -0.0008,
            epsilon = 1e-17
        );
        assert_eq!(energy_rate(&inertia, &metric, &Vec3::x()), 0.0);
    }

    #[test]
    fn zero_metric_is_free_rigid_body() {
        let (inertia, _) = scenario_a();
        let zero = DissipationMetric::zero();
        let m = Vec3::new(0.3, -0.2, 0.9);
        assert_eq!(
            forced_field(&inertia, &zero, &m),
            m.cross(&inertia.velocity_of(&m))
        );
        assert_eq!(energy_rate(&inertia, &zero, &m), 0.0);
    }

    #[test]
    fn random_field_properties() {
        let mut rng = StdRng::seed_from_u64(4);
        for _ in 0..1000 {
            let inertia = rand_inertia(&mut rng);
            let metric = rand_psd(&mut rng);
            let m = rand_vec(&mut rng, 2.0);
            let f = forced_field(&inertia, &metric, &m);
            // tangent to the Casimir sphere
            assert!(m.dot(&f).abs() <= 1e-12 * (1.0 + m.norm() * f.norm()));
            let rate = energy_rate(&inertia, &metric, &m);
            assert!(rate <= 1e-14);
            // chain rule: dE/dt = ∇E · Ṁ = Ω · Ṁ
            let chain = inertia.velocity_of(&m).dot(&f);
            assert!((rate - chain).abs() <= 1e-12 * (1.0 + rate.abs()));
        }
    }

    #[test]
    fn field_jacobian_matches_central_differences() {
        let mut rng = StdRng::seed_from_u64(5);
        for _ in 0..20 {
            let inertia = rand_inertia(&mut rng);
            let metric = rand_psd(&mut rng);
            let m = rand_vec(&mut rng, 1.0);
            let eps = 1e-6;
            let mut fd = Mat3::zeros();
            for j in 0..3 {
                let mut e = Vec3::zeros();
                e[j] = eps;
                let col = (forced_field(&inertia, &metric, &(m + e))
                    - forced_field(&inertia, &metric, &(m - e)))
                    / (2.0 * eps);
                fd.set_column(j, &col);
            }
            assert_abs_diff_eq!(
                forced_field_jacobian(&inertia, &metric, &m),
                fd,
                epsilon = 1e-7
            );
        }
    }

    #[test]
    fn phi_is_quadratic() {
        let (inertia, metric) = scenario_a();
        let xi = Vec3::new(0.7, -0.3, 0.2);
        for c in [-2.0, 0.5, 3.0] {
            assert_abs_diff_eq!(
                phi(&inertia, &metric, &(xi * c)),
                phi(&inertia, &metric, &xi) * (c * c),
                epsilon = 1e-14
            );
        }
    }
}
