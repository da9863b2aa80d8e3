//! Retraction maps `τ: so(3) → SO(3)` and the dual of their inverse
//! right-trivialized tangents, `(dτ⁻¹_v)*`.
//!
//! The discrete momentum of a DDB step is `(dτ⁻¹_{hξ})* 𝕀ξ`, so this dual
//! operator is the only derivative information the integrators need.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::so3::{cay_so3, exp_so3, hat, GroupElement, Mat3, Vec3};

/// Largest supported truncation order of the Bernoulli series.
pub const MAX_TRUNCATION_ORDER: u32 = 8;

/// Truncation order used when none is given.
pub const DEFAULT_TRUNCATION_ORDER: u32 = 2;

/// Bernoulli numbers `B₀..B₈` with the `B₁ = −1/2` convention.
pub const BERNOULLI: [f64; 9] = [
    1.0,
    -0.5,
    1.0 / 6.0,
    0.0,
    -1.0 / 30.0,
    0.0,
    1.0 / 42.0,
    0.0,
    -1.0 / 30.0,
];

const FACTORIAL: [f64; 9] = [1.0, 1.0, 2.0, 6.0, 24.0, 120.0, 720.0, 5040.0, 40320.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum RetractionKind {
    /// Exponential map; `truncation_order` only affects `(dτ⁻¹)*`.
    Exponential { truncation_order: u32 },
    #[default]
    Cayley,
}

impl RetractionKind {
    /// Exponential retraction with the default truncation order.
    pub const fn exponential() -> Self {
        Self::Exponential {
            truncation_order: DEFAULT_TRUNCATION_ORDER,
        }
    }

    /// Exponential retraction; the order is clamped into `1..=8`.
    pub fn exponential_with_order(order: u32) -> Self {
        Self::Exponential {
            truncation_order: order.clamp(1, MAX_TRUNCATION_ORDER),
        }
    }

    /// The group map itself. Always exact, so increments stay in SO(3).
    pub fn tau(&self, v: &Vec3) -> GroupElement {
        match self {
            Self::Exponential { .. } => exp_so3(v),
            Self::Cayley => cay_so3(v),
        }
    }

    /// Matrix of `(dτ⁻¹_v)*: so(3)* → so(3)*`.
    pub fn dtau_inv_dual(&self, v: &Vec3) -> Mat3 {
        match *self {
            Self::Cayley => Mat3::identity() + hat(v) * 0.5 + v * v.transpose() * 0.25,
            Self::Exponential { truncation_order } => {
                let order = truncation_order.clamp(1, MAX_TRUNCATION_ORDER) as usize;
                // transposing ad_v = v̂ flips the sign of odd powers
                let k = hat(v);
                let mut power = Mat3::identity();
                let mut sum = Mat3::identity();
                for j in 1..=order {
                    power *= k;
                    if BERNOULLI[j] != 0.0 {
                        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                        sum += power * (sign * BERNOULLI[j] / FACTORIAL[j]);
                    }
                }
                sum
            }
        }
    }

    /// Short label used in file names and tables.
    pub fn label(&self) -> &'static str {
        match self {
            Self::Exponential { .. } => "exp",
            Self::Cayley => "cay",
        }
    }
}

impl fmt::Display for RetractionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Exponential { truncation_order } => write!(f, "exp(order {truncation_order})"),
            Self::Cayley => f.write_str("cay"),
        }
    }
}

/// Free-function form of [`RetractionKind::tau`].
pub fn tau(kind: RetractionKind, v: &Vec3) -> GroupElement {
    kind.tau(v)
}

/// Free-function form of [`RetractionKind::dtau_inv_dual`].
pub fn dtau_inv_dual(kind: RetractionKind, v: &Vec3) -> Mat3 {
    kind.dtau_inv_dual(v)
}
