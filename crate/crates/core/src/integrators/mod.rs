//! Steppers, the fixed-step trajectory driver and attitude reconstruction.

mod ddb;
mod reference;
mod runge_kutta;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::dynamics::{casimir, energy, DissipationMetric, InertiaModel};
use crate::retraction::RetractionKind;
use crate::so3::{GroupElement, Vec3};
use crate::solver::{solve_momentum_to_velocity, NewtonConfig, SolverError};

pub use ddb::{
    ddb_step, ddb_symmetric_step, mv_step, symmetric_velocity_update, Averaging, SymmetricUpdate,
};
pub use reference::{ReferenceSolution, ReferenceTolerances};
pub use runge_kutta::{lobatto3c_step, rk4_step};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IntegrationError {
    #[error("step {index} failed: {source}")]
    Step { index: usize, source: SolverError },
    #[error("step size underflow at t = {t} (h = {h:e})")]
    StepSizeUnderflow { t: f64, h: f64 },
    #[error("trajectory has no recorded group increments")]
    MissingIncrements,
    #[error("invalid time interval [{t0}, {t_end}]")]
    InvalidInterval { t0: f64, t_end: f64 },
    #[error("step size must be positive and finite, got {0}")]
    InvalidStep(f64),
    #[error("reference tolerances must be positive")]
    InvalidTolerance,
    #[error("{0} is not a fixed-step method")]
    NotFixedStep(StepperKind),
}

/// Every integrator the crate provides.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepperKind {
    Ddb(RetractionKind),
    DdbSymmetric {
        kind: RetractionKind,
        averaging: Averaging,
    },
    MoserVeselov {
        phi_retraction: RetractionKind,
    },
    Rk4,
    LobattoIIIC3,
    Reference(ReferenceTolerances),
}

impl StepperKind {
    pub const DDB_CAY: Self = Self::Ddb(RetractionKind::Cayley);
    pub const DDB_EXP: Self = Self::Ddb(RetractionKind::exponential());
    pub const DDB_SYM_CAY: Self = Self::DdbSymmetric {
        kind: RetractionKind::Cayley,
        averaging: Averaging::MidpointVelocity,
    };
    pub const DDB_SYM_EXP: Self = Self::DdbSymmetric {
        kind: RetractionKind::exponential(),
        averaging: Averaging::MidpointVelocity,
    };
    pub const MV: Self = Self::MoserVeselov {
        phi_retraction: RetractionKind::exponential(),
    };

    pub fn reference() -> Self {
        Self::Reference(ReferenceTolerances::default())
    }

    /// The fixed-step methods plus the reference, in the CLI's order.
    pub fn all() -> Vec<Self> {
        vec![
            Self::DDB_CAY,
            Self::DDB_EXP,
            Self::DDB_SYM_CAY,
            Self::DDB_SYM_EXP,
            Self::MV,
            Self::Rk4,
            Self::LobattoIIIC3,
            Self::reference(),
        ]
    }

    /// Command-line name, e.g. `ddb-cay`.
    pub fn name(&self) -> String {
        match self {
            Self::Ddb(kind) => format!("ddb-{}", kind.label()),
            Self::DdbSymmetric { kind, averaging } => match averaging {
                Averaging::MidpointVelocity => format!("ddb-sym-{}", kind.label()),
                Averaging::AveragedPhi => format!("ddb-sym-avg-{}", kind.label()),
            },
            Self::MoserVeselov { phi_retraction } => match phi_retraction {
                RetractionKind::Exponential { .. } => "mv".to_string(),
                RetractionKind::Cayley => "mv-cay".to_string(),
            },
            Self::Rk4 => "rk4".to_string(),
            Self::LobattoIIIC3 => "lobatto3c".to_string(),
            Self::Reference(_) => "reference".to_string(),
        }
    }

    /// Whether the method keeps `M` on its coadjoint orbit.
    pub fn preserves_orbits(&self) -> bool {
        matches!(
            self,
            Self::Ddb(_) | Self::DdbSymmetric { .. } | Self::MoserVeselov { .. }
        )
    }

    pub fn is_fixed_step(&self) -> bool {
        !matches!(self, Self::Reference(_))
    }

    /// Advances `m` by one step of size `h`.
    pub fn step(
        &self,
        m: &Vec3,
        inertia: &InertiaModel,
        metric: &DissipationMetric,
        h: f64,
        cfg: &NewtonConfig,
    ) -> Result<StepOutput, IntegrationError> {
        let with_increment = |(momentum, inc): (Vec3, GroupElement)| StepOutput {
            momentum,
            increment: Some(inc),
        };
        let solver_err = |source| IntegrationError::Step { index: 0, source };
        match *self {
            Self::Ddb(kind) => ddb_step(m, kind, inertia, metric, h, cfg)
                .map(with_increment)
                .map_err(solver_err),
            Self::DdbSymmetric { kind, averaging } => {
                ddb_symmetric_step(m, kind, inertia, metric, h, averaging, cfg)
                    .map(with_increment)
                    .map_err(solver_err)
            }
            Self::MoserVeselov { phi_retraction } => {
                mv_step(m, inertia, metric, h, phi_retraction, cfg)
                    .map(with_increment)
                    .map_err(solver_err)
            }
            Self::Rk4 => Ok(StepOutput {
                momentum: rk4_step(m, inertia, metric, h),
                increment: None,
            }),
            Self::LobattoIIIC3 => lobatto3c_step(m, inertia, metric, h, cfg)
                .map(|momentum| StepOutput {
                    momentum,
                    increment: None,
                })
                .map_err(solver_err),
            Self::Reference(_) => Err(IntegrationError::NotFixedStep(*self)),
        }
    }
}

impl fmt::Display for StepperKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("unknown stepper '{0}' (expected one of ddb-cay, ddb-exp, ddb-sym-cay, ddb-sym-exp, ddb-sym-avg-cay, ddb-sym-avg-exp, mv, mv-cay, rk4, lobatto3c, reference)")]
pub struct UnknownStepper(pub String);

impl FromStr for StepperKind {
    type Err = UnknownStepper;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let sym = |kind, averaging| Self::DdbSymmetric { kind, averaging };
        Ok(match s {
            "ddb-cay" => Self::DDB_CAY,
            "ddb-exp" => Self::DDB_EXP,
            "ddb-sym-cay" => Self::DDB_SYM_CAY,
            "ddb-sym-exp" => Self::DDB_SYM_EXP,
            "ddb-sym-avg-cay" => sym(RetractionKind::Cayley, Averaging::AveragedPhi),
            "ddb-sym-avg-exp" => sym(RetractionKind::exponential(), Averaging::AveragedPhi),
            "mv" => Self::MV,
            "mv-cay" => Self::MoserVeselov {
                phi_retraction: RetractionKind::Cayley,
            },
            "rk4" => Self::Rk4,
            "lobatto3c" => Self::LobattoIIIC3,
            "reference" => Self::reference(),
            other => return Err(UnknownStepper(other.to_string())),
        })
    }
}

/// Output of a single step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutput {
    pub momentum: Vec3,
    /// `w_k φd(w_k)` for the group-based methods.
    pub increment: Option<GroupElement>,
}

/// Parameters a trajectory was produced with.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSnapshot {
    pub inertia: InertiaModel,
    pub metric: DissipationMetric,
    pub t0: f64,
    pub t_end: f64,
    pub h: f64,
    pub steps: usize,
    pub newton: NewtonConfig,
}

/// Momenta and invariants on a uniform time grid.
#[derive(Debug, Clone)]
pub struct TrajectoryRecord {
    pub times: Vec<f64>,
    pub momenta: Vec<Vec3>,
    pub energies: Vec<f64>,
    pub casimirs: Vec<f64>,
    pub increments: Option<Vec<GroupElement>>,
    pub stepper: StepperKind,
    pub config: RunSnapshot,
}

impl TrajectoryRecord {
    fn new(stepper: StepperKind, config: RunSnapshot) -> Self {
        let n = config.steps + 1;
        Self {
            times: Vec::with_capacity(n),
            momenta: Vec::with_capacity(n),
            energies: Vec::with_capacity(n),
            casimirs: Vec::with_capacity(n),
            increments: None,
            stepper,
            config,
        }
    }

    fn push(&mut self, k: usize, m: Vec3) {
        self.times.push(grid_time(self.config.t0, self.config.h, k));
        self.energies.push(energy(&self.config.inertia, &m));
        self.casimirs.push(casimir(&m));
        self.momenta.push(m);
    }

    pub fn len(&self) -> usize {
        self.momenta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.momenta.is_empty()
    }

    pub fn final_momentum(&self) -> Vec3 {
        *self.momenta.last().expect("trajectory holds at least M0")
    }

    /// `max_k |C(M_k) − C(M_0)|`.
    pub fn max_casimir_drift(&self) -> f64 {
        let c0 = self.casimirs[0];
        self.casimirs
            .iter()
            .map(|c| (c - c0).abs())
            .fold(0.0, f64::max)
    }

    /// `max_k |E_k − E_0|`.
    pub fn max_energy_deviation(&self) -> f64 {
        let e0 = self.energies[0];
        self.energies
            .iter()
            .map(|e| (e - e0).abs())
            .fold(0.0, f64::max)
    }

    /// Largest one-step energy increase `max_k (E_{k+1} − E_k)⁺`.
    pub fn max_energy_increase(&self) -> f64 {
        self.energies
            .windows(2)
            .map(|w| (w[1] - w[0]).max(0.0))
            .fold(0.0, f64::max)
    }
}

/// `t_k = t0 + k·h`, by multiplication rather than accumulation.
pub fn grid_time(t0: f64, h: f64, k: usize) -> f64 {
    t0 + k as f64 * h
}

/// Number of steps and the exact step size covering `[t0, t_end]`.
///
/// `N = round((t_end − t0)/h)` and `h = (t_end − t0)/N`.
pub fn uniform_grid(t0: f64, t_end: f64, h: f64) -> Result<(usize, f64), IntegrationError> {
    if !(h.is_finite() && h > 0.0) {
        return Err(IntegrationError::InvalidStep(h));
    }
    if !(t0.is_finite() && t_end.is_finite() && t_end >= t0) {
        return Err(IntegrationError::InvalidInterval { t0, t_end });
    }
    let span = t_end - t0;
    if span == 0.0 {
        return Ok((0, h));
    }
    let steps = ((span / h).round() as usize).max(1);
    Ok((steps, span / steps as f64))
}

/// Runs `stepper` over `[t0, t_end]` with step `h` and records every node.
///
/// `Reference` is evaluated by dense output on the same grid.
#[allow(clippy::too_many_arguments)]
pub fn integrate(
    stepper: StepperKind,
    m0: &Vec3,
    inertia: &InertiaModel,
    metric: &DissipationMetric,
    t0: f64,
    t_end: f64,
    h: f64,
    cfg: &NewtonConfig,
) -> Result<TrajectoryRecord, IntegrationError> {
    let (steps, h) = uniform_grid(t0, t_end, h)?;
    let snapshot = RunSnapshot {
        inertia: *inertia,
        metric: *metric,
        t0,
        t_end,
        h,
        steps,
        newton: *cfg,
    };
    let mut record = TrajectoryRecord::new(stepper, snapshot);
    record.push(0, *m0);

    if let StepperKind::Reference(tol) = stepper {
        if steps > 0 {
            let solution = ReferenceSolution::solve(m0, inertia, metric, t0, t_end, tol)?;
            for k in 1..=steps {
                let t = if k == steps {
                    t_end
                } else {
                    grid_time(t0, h, k)
                };
                record.push(k, solution.eval(t));
            }
        }
        return Ok(record);
    }

    let mut increments = stepper
        .preserves_orbits()
        .then(|| Vec::with_capacity(steps));
    let mut m = *m0;
    for k in 0..steps {
        let out = stepper
            .step(&m, inertia, metric, h, cfg)
            .map_err(|err| match err {
                IntegrationError::Step { source, .. } => {
                    IntegrationError::Step { index: k, source }
                }
                other => other,
            })?;
        m = out.momentum;
        if let (Some(list), Some(inc)) = (increments.as_mut(), out.increment) {
            list.push(inc);
        }
        record.push(k + 1, m);
    }
    record.increments = increments;
    Ok(record)
}

/// Reference trajectory on the uniform grid of step `h`.
#[allow(clippy::too_many_arguments)]
pub fn reference_integrate(
    m0: &Vec3,
    inertia: &InertiaModel,
    metric: &DissipationMetric,
    t0: f64,
    t_end: f64,
    h: f64,
    tol: ReferenceTolerances,
) -> Result<TrajectoryRecord, IntegrationError> {
    if t_end <= t0 || t_end.is_nan() || t0.is_nan() {
        return Err(IntegrationError::InvalidInterval { t0, t_end });
    }
    integrate(
        StepperKind::Reference(tol),
        m0,
        inertia,
        metric,
        t0,
        t_end,
        h,
        &NewtonConfig::default(),
    )
}

/// Attitudes `R_{k+1} = R_k w̃_k` from the recorded increments.
pub fn reconstruct_attitude(
    record: &TrajectoryRecord,
    r0: &GroupElement,
) -> Result<Vec<GroupElement>, IntegrationError> {
    let increments = record
        .increments
        .as_ref()
        .ok_or(IntegrationError::MissingIncrements)?;
    let mut out = Vec::with_capacity(increments.len() + 1);
    out.push(*r0);
    let mut r = *r0;
    for inc in increments {
        r = r * *inc;
        out.push(r);
    }
    Ok(out)
}

/// `p_k = 𝕀ξ_k`, where `ξ_k` solves the discrete momentum equation for `M_k`.
///
/// Unlike `M_k` these are not confined to a coadjoint orbit.
pub fn continuous_momentum_diagnostic(
    record: &TrajectoryRecord,
    kind: RetractionKind,
    cfg: &NewtonConfig,
) -> Result<Vec<Vec3>, IntegrationError> {
    let inertia = record.config.inertia;
    record
        .momenta
        .iter()
        .enumerate()
        .map(|(index, m)| {
            solve_momentum_to_velocity(m, kind, &inertia, record.config.h, cfg)
                .map(|xi| inertia.momentum_of(&xi))
                .map_err(|source| IntegrationError::Step { index, source })
        })
        .collect()
}
