//! Linear-algebra kernel for so(3) ≅ ℝ³ and SO(3).
//!
//! Vectors in ℝ³ stand for both the Lie algebra so(3) (body angular
//! velocities) and its dual so(3)* (body momenta); the pairing between the
//! two is the Euclidean dot product. Group elements are stored as rotation
//! matrices.

use std::ops::Mul;

use nalgebra::{Matrix3, Vector3};
use thiserror::Error;

/// Element of so(3) or so(3)* in the ℝ³ identification.
pub type Vec3 = Vector3<f64>;

/// Dense 3×3 matrix.
pub type Mat3 = Matrix3<f64>;

/// Absolute tolerance on the symmetric part accepted by [`vee`].
pub const SKEW_TOLERANCE: f64 = 1e-10;

/// Frobenius tolerance used when validating rotation matrices.
pub const GROUP_TOLERANCE: f64 = 1e-12;

const RODRIGUES_SERIES_THRESHOLD: f64 = 1e-4;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum So3Error {
    #[error("matrix is not skew-symmetric (symmetric part {0:e} exceeds {SKEW_TOLERANCE:e})")]
    NotSkew(f64),
    #[error("matrix is not a rotation (orthogonality defect {defect:e}, det {det})")]
    NotRotation { defect: f64, det: f64 },
}

/// Maps `v` to the skew matrix `v̂` with `v̂ u = v × u`.
#[inline]
pub fn hat(v: &Vec3) -> Mat3 {
    Mat3::new(0.0, -v.z, v.y, v.z, 0.0, -v.x, -v.y, v.x, 0.0)
}

/// Inverse of [`hat`]. Rejects matrices whose symmetric part is not negligible.
pub fn vee(m: &Mat3) -> Result<Vec3, So3Error> {
    let sym = (m + m.transpose()) * 0.5;
    let worst = sym.amax();
    if worst > SKEW_TOLERANCE {
        return Err(So3Error::NotSkew(worst));
    }
    Ok(vee_skew_part(m))
}

/// Vector of the skew part of `m`, without checking skewness.
#[inline]
pub fn vee_skew_part(m: &Mat3) -> Vec3 {
    Vec3::new(
        0.5 * (m[(2, 1)] - m[(1, 2)]),
        0.5 * (m[(0, 2)] - m[(2, 0)]),
        0.5 * (m[(1, 0)] - m[(0, 1)]),
    )
}

/// Infinitesimal coadjoint action `ad*_ξ μ = μ × ξ`.
///
/// With this sign the free rigid body reads `Ṁ = ad*_Ω M = M × Ω`.
#[inline]
pub fn ad_star(xi: &Vec3, mu: &Vec3) -> Vec3 {
    mu.cross(xi)
}

/// Coadjoint action `Ad*_g μ = gᵀ μ` (matrix form `gᵀ μ̂ g`).
#[inline]
pub fn coadjoint(g: &GroupElement, mu: &Vec3) -> Vec3 {
    g.matrix().tr_mul(mu)
}

/// A rotation matrix in SO(3).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupElement(Mat3);

impl GroupElement {
    pub fn identity() -> Self {
        Self(Mat3::identity())
    }

    /// Validates `RᵀR = Id` and `det R = 1` to [`GROUP_TOLERANCE`].
    pub fn new(m: Mat3) -> Result<Self, So3Error> {
        let g = Self(m);
        let defect = g.orthogonality_defect();
        let det = m.determinant();
        if !(defect <= GROUP_TOLERANCE && (det - 1.0).abs() <= GROUP_TOLERANCE) {
            return Err(So3Error::NotRotation { defect, det });
        }
        Ok(g)
    }

    /// Rotation by `angle` about the unit vector `axis`.
    pub fn from_axis_angle(axis: &Vec3, angle: f64) -> Self {
        exp_so3(&(axis.normalize() * angle))
    }

    #[inline]
    pub fn matrix(&self) -> &Mat3 {
        &self.0
    }

    pub fn inverse(&self) -> Self {
        Self(self.0.transpose())
    }

    /// Frobenius norm of `RᵀR − Id`.
    pub fn orthogonality_defect(&self) -> f64 {
        (self.0.tr_mul(&self.0) - Mat3::identity()).norm()
    }

    /// Frobenius distance to the identity.
    pub fn distance_to_identity(&self) -> f64 {
        (self.0 - Mat3::identity()).norm()
    }
}

impl Mul for GroupElement {
    type Output = GroupElement;

    fn mul(self, rhs: GroupElement) -> GroupElement {
        GroupElement(self.0 * rhs.0)
    }
}

impl Mul<&GroupElement> for &GroupElement {
    type Output = GroupElement;

    fn mul(self, rhs: &GroupElement) -> GroupElement {
        GroupElement(self.0 * rhs.0)
    }
}

/// Exponential map so(3) → SO(3) by the Rodrigues formula.
pub fn exp_so3(v: &Vec3) -> GroupElement {
    let theta_sq = v.norm_squared();
    let theta = theta_sq.sqrt();
    // sin(θ)/θ and (1 − cos θ)/θ² have removable singularities at 0
    let (a, b) = if theta < RODRIGUES_SERIES_THRESHOLD {
        (1.0 - theta_sq / 6.0, 0.5 - theta_sq / 24.0)
    } else {
        (theta.sin() / theta, (1.0 - theta.cos()) / theta_sq)
    };
    let k = hat(v);
    GroupElement(Mat3::identity() + k * a + k * k * b)
}

/// Cayley map `(I − v̂/2)⁻¹ (I + v̂/2)`, in the closed form
/// `I + (v̂ + v̂²/2) · 4 / (4 + ‖v‖²)`.
pub fn cay_so3(v: &Vec3) -> GroupElement {
    let k = hat(v);
    let scale = 4.0 / (4.0 + v.norm_squared());
    GroupElement(Mat3::identity() + (k + k * k * 0.5) * scale)
}
