//! Coadjoint-orbit-preserving integrators for Lie–Poisson systems with
//! double-bracket dissipation, instantiated on the dissipative rigid body
//! on so(3)*.
//!
//! The main method (DDB) advances the body momentum by
//! `M_{k+1} = Ad*_{w_k φd(w_k)} M_k`, where `w_k = τ(hξ_k)` comes from a
//! retraction `τ` (exponential or Cayley) and `φd(w_k) = τ(hφ(ξ_k))` applies
//! the dissipation. Because the update is a coadjoint action, `‖M‖` is kept
//! exactly while energy decays.
//!
//! Modules, bottom-up:
//!
//! - [`so3`]: hat/vee, coadjoint action, exponential and Cayley maps
//! - [`retraction`]: retraction kinds and `(dτ⁻¹)*`
//! - [`dynamics`]: inertia, dissipation metric, energy, Casimir, vector field
//! - [`solver`]: Newton solvers for the implicit steps
//! - [`integrators`]: DDB, symmetric DDB, Moser–Veselov, RK4, Lobatto IIIC,
//!   an adaptive reference and the trajectory driver
//! - [`harness`]: benchmark scenarios, distance metrics, convergence studies

pub mod dynamics;
pub mod harness;
pub mod integrators;
pub mod retraction;
pub mod so3;
pub mod solver;

pub use dynamics::{DissipationMetric, InertiaModel};
pub use integrators::{integrate, StepperKind, TrajectoryRecord};
pub use retraction::RetractionKind;
pub use so3::{GroupElement, Mat3, Vec3};
pub use solver::NewtonConfig;
