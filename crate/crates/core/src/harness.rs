//! Benchmark scenarios, limit-set distances, convergence studies and method
//! comparisons.

use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{DissipationMetric, DynamicsError, InertiaModel};
use crate::integrators::{
    integrate, uniform_grid, IntegrationError, ReferenceSolution, ReferenceTolerances, StepperKind,
    TrajectoryRecord,
};
use crate::so3::{Mat3, Vec3};
use crate::solver::NewtonConfig;

/// Moments closer than this count as equal when classifying limit sets.
pub const SPECTRUM_TOLERANCE: f64 = 1e-12;

/// Errors below `SATURATION_FACTOR ×` the reference tolerance are left out of slope fits.
pub const SATURATION_FACTOR: f64 = 100.0;

/// Horizon of the convergence study when none is given.
pub const DEFAULT_CONVERGENCE_T_END: f64 = 30.0;

/// Step sizes of the convergence study when none are given.
pub const DEFAULT_H_LIST: [f64; 10] = [1.0, 0.5, 0.2, 0.1, 0.05, 0.02, 0.01, 0.005, 0.002, 0.001];

pub const BUILTIN_NAMES: [&str; 3] = ["A", "B", "C"];

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("unknown scenario '{0}' (valid: A, B, C)")]
    UnknownScenario(String),
    #[error("the two largest moments of inertia coincide; limit set is not a pair of points")]
    DegenerateSpectrum,
    #[error(
        "the largest moment of inertia is not doubly degenerate; limit set is not a great circle"
    )]
    NotDegenerate,
    #[error("invalid scenario: {0}")]
    InvalidConfig(String),
    #[error("convergence study needs at least 3 step sizes, got {0}")]
    TooFewSteps(usize),
    #[error("step sizes must be strictly decreasing")]
    NotDescending,
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Integration(#[from] IntegrationError),
    #[error("scenario file: {0}")]
    Parse(#[from] serde_json::Error),
}

/// A fully validated benchmark problem.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub name: String,
    pub inertia: InertiaModel,
    pub metric: DissipationMetric,
    pub omega0: Vec3,
    pub t0: f64,
    pub t_end: f64,
    /// Step sizes; the first one is the default.
    pub h: Vec<f64>,
    pub steppers: Vec<StepperKind>,
}

/// One step size or several.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StepSizes {
    One(f64),
    Many(Vec<f64>),
}

/// On-disk JSON form of [`ScenarioConfig`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub name: String,
    pub inertia: [f64; 3],
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, alias = "K", skip_serializing_if = "Option::is_none")]
    pub dissipation_matrix: Option<[[f64; 3]; 3]>,
    pub omega0: [f64; 3],
    #[serde(default)]
    pub t0: f64,
    #[serde(alias = "tN")]
    pub t_end: f64,
    pub h: StepSizes,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub steppers: Option<Vec<String>>,
}

/// The orbit-preserving and baseline methods a scenario runs by default.
pub fn default_steppers() -> Vec<StepperKind> {
    StepperKind::all()
        .into_iter()
        .filter(StepperKind::is_fixed_step)
        .collect()
}

impl ScenarioConfig {
    /// Builds a config, checking `t_end > t0` and every `h > 0`.
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        name: impl Into<String>,
        inertia: InertiaModel,
        metric: DissipationMetric,
        omega0: Vec3,
        t0: f64,
        t_end: f64,
        h: Vec<f64>,
        steppers: Vec<StepperKind>,
    ) -> Result<Self, HarnessError> {
        if !(t0.is_finite() && t_end.is_finite() && t_end > t0) {
            return Err(HarnessError::InvalidConfig(format!(
                "need t_end > t0, got [{t0}, {t_end}]"
            )));
        }
        if h.is_empty() {
            return Err(HarnessError::InvalidConfig("no step size given".into()));
        }
        if let Some(bad) = h.iter().find(|h| !(h.is_finite() && **h > 0.0)) {
            return Err(HarnessError::InvalidConfig(format!(
                "step sizes must be positive, got {bad}"
            )));
        }
        if !omega0.iter().all(|x| x.is_finite()) {
            return Err(HarnessError::InvalidConfig("omega0 must be finite".into()));
        }
        Ok(Self {
            name: name.into(),
            inertia,
            metric,
            omega0,
            t0,
            t_end,
            h,
            steppers,
        })
    }

    /// `M₀ = 𝕀Ω₀`.
    pub fn m0(&self) -> Vec3 {
        self.inertia.momentum_of(&self.omega0)
    }

    pub fn default_h(&self) -> f64 {
        self.h[0]
    }

    pub fn with_t_end(mut self, t_end: f64) -> Result<Self, HarnessError> {
        if !(t_end.is_finite() && t_end > self.t0) {
            return Err(HarnessError::InvalidConfig(format!(
                "need t_end > t0, got [{}, {t_end}]",
                self.t0
            )));
        }
        self.t_end = t_end;
        Ok(self)
    }

    pub fn from_file(file: ScenarioFile) -> Result<Self, HarnessError> {
        let [i1, i2, i3] = file.inertia;
        let inertia = InertiaModel::new(i1, i2, i3)?;
        let metric = match (file.alpha, file.dissipation_matrix) {
            (Some(alpha), None) => DissipationMetric::isotropic(alpha)?,
            (None, Some(k)) => DissipationMetric::new(Mat3::from_fn(|r, c| k[r][c]))?,
            _ => {
                return Err(HarnessError::InvalidConfig(
                    "give exactly one of 'alpha' and 'dissipation_matrix'".into(),
                ))
            }
        };
        let h = match file.h {
            StepSizes::One(h) => vec![h],
            StepSizes::Many(hs) => hs,
        };
        let steppers = match file.steppers {
            None => default_steppers(),
            Some(names) => parse_steppers(&names)?,
        };
        Self::new(
            file.name,
            inertia,
            metric,
            Vec3::from(file.omega0),
            file.t0,
            file.t_end,
            h,
            steppers,
        )
    }

    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        Self::from_file(serde_json::from_str(text)?)
    }

    pub fn to_file(&self) -> ScenarioFile {
        let (alpha, dissipation_matrix) = match self.metric.as_isotropic() {
            Some(alpha) => (Some(alpha), None),
            None => {
                let k = self.metric.matrix();
                (None, Some([0, 1, 2].map(|r| [0, 1, 2].map(|c| k[(r, c)]))))
            }
        };
        ScenarioFile {
            name: self.name.clone(),
            inertia: self.inertia.moments().into(),
            alpha,
            dissipation_matrix,
            omega0: self.omega0.into(),
            t0: self.t0,
            t_end: self.t_end,
            h: if self.h.len() == 1 {
                StepSizes::One(self.h[0])
            } else {
                StepSizes::Many(self.h.clone())
            },
            steppers: Some(self.steppers.iter().map(StepperKind::name).collect()),
        }
    }

    /// The set the dissipative flow converges to.
    pub fn limit_set(&self) -> LimitSet {
        let moments = self.inertia.moments();
        let mut order = [0usize, 1, 2];
        order.sort_by(|&a, &b| moments[b].total_cmp(&moments[a]));
        let [largest, second, third] = order;
        let gap_top = moments[largest] - moments[second];
        let gap_low = moments[second] - moments[third];
        if gap_top > SPECTRUM_TOLERANCE {
            LimitSet::Points { axis: largest }
        } else if gap_low > SPECTRUM_TOLERANCE {
            LimitSet::GreatCircle { normal_axis: third }
        } else {
            LimitSet::Sphere
        }
    }
}

/// Accepts stepper names plus `all`.
pub fn parse_steppers(names: &[String]) -> Result<Vec<StepperKind>, HarnessError> {
    let mut out = Vec::new();
    for name in names {
        if name == "all" {
            out.extend(default_steppers());
        } else {
            let kind = name
                .parse::<StepperKind>()
                .map_err(|e| HarnessError::InvalidConfig(e.to_string()))?;
            out.push(kind);
        }
    }
    Ok(out)
}

/// The scenarios from the benchmark suite.
pub fn builtin_scenario(name: &str) -> Result<ScenarioConfig, HarnessError> {
    let (moments, t_end) = match name {
        "A" => ([1.0, 1.3, 0.5], 30.0),
        "B" => ([1.0, 1.3, 0.5], 250.0),
        "C" => ([1.0, 1.0, 0.5], 250.0),
        other => return Err(HarnessError::UnknownScenario(other.to_string())),
    };
    ScenarioConfig::new(
        name,
        InertiaModel::new(moments[0], moments[1], moments[2])?,
        DissipationMetric::isotropic(0.5)?,
        Vec3::new(0.0, 0.05, 1.0),
        0.0,
        t_end,
        vec![0.1],
        default_steppers(),
    )
}

/// Asymptotic set of the dissipative flow on the sphere `‖M‖ = ‖M₀‖`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LimitSet {
    /// `±‖M₀‖ e_axis` for the unique largest moment.
    Points { axis: usize },
    /// The circle orthogonal to the unique smallest moment.
    GreatCircle { normal_axis: usize },
    /// Isotropic body: every point is an equilibrium.
    Sphere,
}

/// `min ‖M ∓ ‖M₀‖ e_max‖`.
pub fn distance_to_limit_points(m: &Vec3, scenario: &ScenarioConfig) -> Result<f64, HarnessError> {
    let LimitSet::Points { axis } = scenario.limit_set() else {
        return Err(HarnessError::DegenerateSpectrum);
    };
    let mut p = Vec3::zeros();
    p[axis] = scenario.m0().norm();
    Ok((m - p).norm().min((m + p).norm()))
}

/// `(d_circle, d_plane)` for the great circle of a doubly degenerate body.
pub fn distance_to_great_circle(
    m: &Vec3,
    scenario: &ScenarioConfig,
) -> Result<(f64, f64), HarnessError> {
    let LimitSet::GreatCircle { normal_axis } = scenario.limit_set() else {
        return Err(HarnessError::NotDegenerate);
    };
    let radius = scenario.m0().norm();
    let d_plane = m[normal_axis].abs();
    let mut in_plane = *m;
    in_plane[normal_axis] = 0.0;
    let d_circle = d_plane.hypot(in_plane.norm() - radius);
    Ok((d_circle, d_plane))
}

/// Distance of every node to the scenario's limit set.
#[derive(Debug, Clone, PartialEq)]
pub enum LimitDistances {
    Points(Vec<f64>),
    GreatCircle {
        d_circle: Vec<f64>,
        d_plane: Vec<f64>,
    },
    NotApplicable,
}

pub fn limit_distances(momenta: &[Vec3], scenario: &ScenarioConfig) -> LimitDistances {
    match scenario.limit_set() {
        LimitSet::Points { .. } => LimitDistances::Points(
            momenta
                .iter()
                .map(|m| distance_to_limit_points(m, scenario).expect("non-degenerate"))
                .collect(),
        ),
        LimitSet::GreatCircle { .. } => {
            let (d_circle, d_plane) = momenta
                .iter()
                .map(|m| distance_to_great_circle(m, scenario).expect("degenerate"))
                .unzip();
            LimitDistances::GreatCircle { d_circle, d_plane }
        }
        LimitSet::Sphere => LimitDistances::NotApplicable,
    }
}

/// One row of a convergence table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergencePoint {
    /// Requested step size.
    pub h: f64,
    /// Step size after rounding to a whole number of steps.
    pub h_effective: f64,
    pub steps: usize,
    pub error: f64,
    /// False when the error is at the reference's noise floor.
    pub in_fit: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub stepper: StepperKind,
    pub t_end: f64,
    pub reference_final: Vec3,
    pub saturation_threshold: f64,
    pub points: Vec<ConvergencePoint>,
    /// Least-squares slope of `log error` against `log h`; `None` with fewer
    /// than two usable points.
    pub slope: Option<f64>,
}

/// Least-squares slope of `y` against `x`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Global error at `t_end` against the reference, for each `h`.
pub fn convergence_study(
    scenario: &ScenarioConfig,
    stepper: StepperKind,
    h_list: &[f64],
    t_end: f64,
    cfg: &NewtonConfig,
) -> Result<ConvergenceTable, HarnessError> {
    if h_list.len() < 3 {
        return Err(HarnessError::TooFewSteps(h_list.len()));
    }
    if h_list.windows(2).any(|w| w[1] >= w[0] || w[1].is_nan()) {
        return Err(HarnessError::NotDescending);
    }
    if !stepper.is_fixed_step() {
        return Err(IntegrationError::NotFixedStep(stepper).into());
    }
    let m0 = scenario.m0();
    let tol = ReferenceTolerances::default();
    let reference = ReferenceSolution::solve(
        &m0,
        &scenario.inertia,
        &scenario.metric,
        scenario.t0,
        t_end,
        tol,
    )?;
    let reference_final = reference.eval(t_end);
    let saturation_threshold =
        SATURATION_FACTOR * (tol.rel_tol * reference_final.norm() + tol.abs_tol);

    let mut points = Vec::with_capacity(h_list.len());
    for &h in h_list {
        let (steps, h_effective) = uniform_grid(scenario.t0, t_end, h)?;
        let record = integrate(
            stepper,
            &m0,
            &scenario.inertia,
            &scenario.metric,
            scenario.t0,
            t_end,
            h,
            cfg,
        )?;
        let error = (record.final_momentum() - reference_final).norm();
        points.push(ConvergencePoint {
            h,
            h_effective,
            steps,
            error,
            in_fit: error >= saturation_threshold,
        });
    }
    let (log_h, log_e): (Vec<f64>, Vec<f64>) = points
        .iter()
        .filter(|p| p.in_fit)
        .map(|p| (p.h_effective.ln(), p.error.ln()))
        .unzip();
    Ok(ConvergenceTable {
        stepper,
        t_end,
        reference_final,
        saturation_threshold,
        points,
        slope: fit_slope(&log_h, &log_e),
    })
}

/// Everything measured for one method in [`compare_methods`].
#[derive(Debug, Clone)]
pub struct MethodMetrics {
    pub record: TrajectoryRecord,
    /// `‖M_N − M_N^ref‖`.
    pub final_error: f64,
    /// `|C(M_k) − C(M₀)|` per node.
    pub casimir_drift: Vec<f64>,
    pub max_casimir_drift: f64,
    pub limit_distances: LimitDistances,
}

#[derive(Debug)]
pub struct MethodRun {
    pub stepper: StepperKind,
    pub runtime_seconds: f64,
    pub outcome: Result<MethodMetrics, IntegrationError>,
}

#[derive(Debug)]
pub struct MetricsReport {
    pub scenario: ScenarioConfig,
    pub h: f64,
    /// Configured methods in order, followed by the reference.
    pub methods: Vec<MethodRun>,
}

impl MetricsReport {
    pub fn get(&self, stepper: StepperKind) -> Option<&MethodRun> {
        self.methods.iter().find(|m| m.stepper == stepper)
    }
}

/// Runs every configured method and the reference on the same grid.
///
/// A failing method is recorded in its row and does not stop the others.
pub fn compare_methods(
    scenario: &ScenarioConfig,
    h: f64,
    cfg: &NewtonConfig,
) -> Result<MetricsReport, HarnessError> {
    let m0 = scenario.m0();
    let run = |stepper: StepperKind| {
        let start = Instant::now();
        let result = integrate(
            stepper,
            &m0,
            &scenario.inertia,
            &scenario.metric,
            scenario.t0,
            scenario.t_end,
            h,
            cfg,
        );
        (result, start.elapsed().as_secs_f64())
    };

    let reference_kind = StepperKind::reference();
    let (reference, reference_time) = run(reference_kind);
    let reference = reference?;
    let reference_final = reference.final_momentum();

    let metrics = |record: TrajectoryRecord| {
        let c0 = record.casimirs[0];
        let casimir_drift: Vec<f64> = record.casimirs.iter().map(|c| (c - c0).abs()).collect();
        MethodMetrics {
            final_error: (record.final_momentum() - reference_final).norm(),
            max_casimir_drift: casimir_drift.iter().copied().fold(0.0, f64::max),
            casimir_drift,
            limit_distances: limit_distances(&record.momenta, scenario),
            record,
        }
    };

    let mut methods = Vec::with_capacity(scenario.steppers.len() + 1);
    for &stepper in scenario.steppers.iter().filter(|s| s.is_fixed_step()) {
        let (result, runtime_seconds) = run(stepper);
        methods.push(MethodRun {
            stepper,
            runtime_seconds,
            outcome: result.map(&metrics),
        });
    }
    methods.push(MethodRun {
        stepper: reference_kind,
        runtime_seconds: reference_time,
        outcome: Ok(metrics(reference)),
    });
    Ok(MetricsReport {
        scenario: scenario.clone(),
        h,
        methods,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn scenario(name: &str) -> ScenarioConfig {
        builtin_scenario(name).unwrap()
    }

    #[test]
    fn builtin_values() {
        let a = scenario("A");
        assert_eq!(a.inertia.moments(), Vec3::new(1.0, 1.3, 0.5));
        assert_eq!(a.metric.as_isotropic(), Some(0.5));
        assert_eq!(a.omega0, Vec3::new(0.0, 0.05, 1.0));
        assert!((a.m0() - Vec3::new(0.0, 0.065, 0.5)).norm() < 1e-16);
        assert_eq!((a.t0, a.t_end, a.default_h()), (0.0, 30.0, 0.1));
        assert_eq!(scenario("B").t_end, 250.0);
        let c = scenario("C");
        assert_eq!(c.inertia.moments(), Vec3::new(1.0, 1.0, 0.5));
        assert_eq!(c.t_end, 250.0);
        assert!(matches!(
            builtin_scenario("X"),
            Err(HarnessError::UnknownScenario(_))
        ));
    }

    fn checksum(s: &ScenarioConfig) -> u64 {
        // FNV-1a over the bit patterns of every numeric field
        let mut values: Vec<f64> = s.inertia.moments().iter().copied().collect();
        values.extend(s.metric.matrix().iter());
        values.extend(s.omega0.iter());
        values.extend([s.t0, s.t_end]);
        values.extend(&s.h);
        let mut hash = 0xcbf29ce484222325u64;
        for byte in values.iter().flat_map(|v| v.to_bits().to_le_bytes()) {
            hash ^= u64::from(byte);
            hash = hash.wrapping_mul(0x100000001b3);
        }
        hash
    }

    #[test]
    fn builtin_checksums_are_frozen() {
        let sums: Vec<u64> = BUILTIN_NAMES
            .iter()
            .map(|n| checksum(&scenario(n)))
            .collect();
        assert_eq!(sums, FROZEN_CHECKSUMS, "{sums:#x?}");
    }

    const FROZEN_CHECKSUMS: [u64; 3] = [0x599d2c38fa5c120b, 0x33bb32593d16f00e, 0x2ca7dd128dbb8ec3];

    #[test]
    fn limit_sets() {
        assert_eq!(scenario("A").limit_set(), LimitSet::Points { axis: 1 });
        assert_eq!(
            scenario("C").limit_set(),
            LimitSet::GreatCircle { normal_axis: 2 }
        );
        let mut iso = scenario("A");
        iso.inertia = InertiaModel::new(2.0, 2.0, 2.0).unwrap();
        assert_eq!(iso.limit_set(), LimitSet::Sphere);
    }

    #[test]
    fn limit_point_distance() {
        let b = scenario("B");
        let r = b.m0().norm();
        assert!((r - 0.504207).abs() < 1e-6);
        assert_eq!(distance_to_limit_points(&(Vec3::y() * r), &b).unwrap(), 0.0);
        assert_eq!(
            distance_to_limit_points(&(Vec3::y() * -r), &b).unwrap(),
            0.0
        );
        let d = distance_to_limit_points(&b.m0(), &b).unwrap();
        // |M₀ − r e₂|² = 0.065² − 2·0.065 r + r² + 0.5²
        let oracle = (0.065f64.powi(2) - 2.0 * 0.065 * r + r * r + 0.25).sqrt();
        assert!((d - oracle).abs() < 1e-15);
        assert!((d - 0.6655096).abs() < 1e-7);
        assert!(matches!(
            distance_to_limit_points(&b.m0(), &scenario("C")),
            Err(HarnessError::DegenerateSpectrum)
        ));
    }

    #[test]
    fn great_circle_distance() {
        let c = scenario("C");
        let r = c.m0().norm();
        let on_circle = Vec3::new(r * 0.6, r * 0.8, 0.0);
        let (dc, dp) = distance_to_great_circle(&on_circle, &c).unwrap();
        assert!(dc < 1e-16 && dp == 0.0);
        let (dc, dp) = distance_to_great_circle(&(Vec3::z() * r), &c).unwrap();
        assert_eq!(dp, r);
        assert!((dc - 2f64.sqrt() * r).abs() < 1e-15);
        assert!(matches!(
            distance_to_great_circle(&on_circle, &scenario("A")),
            Err(HarnessError::NotDegenerate)
        ));
    }

    proptest! {
        #[test]
        fn great_circle_pythagoras(theta in 0.0..std::f64::consts::PI, psi in 0.0..std::f64::consts::TAU) {
            let c = scenario("C");
            let r = c.m0().norm();
            let m = Vec3::new(theta.sin() * psi.cos(), theta.sin() * psi.sin(), theta.cos()) * r;
            let (dc, dp) = distance_to_great_circle(&m, &c).unwrap();
            let expected = dp * dp + ((m.norm_squared() - dp * dp).sqrt() - r).powi(2);
            prop_assert!((dc * dc - expected).abs() <= 1e-14);
            prop_assert!(dc >= dp);
        }

        #[test]
        fn distances_are_lipschitz(
            a in prop::array::uniform3(-2.0..2.0f64),
            b in prop::array::uniform3(-2.0..2.0f64),
        ) {
            let (a, b) = (Vec3::from(a), Vec3::from(b));
            let gap = (a - b).norm();
            let s = scenario("B");
            let da = distance_to_limit_points(&a, &s).unwrap();
            let db = distance_to_limit_points(&b, &s).unwrap();
            prop_assert!(da >= 0.0 && (da - db).abs() <= gap + 1e-14);
            let c = scenario("C");
            let (ca, pa) = distance_to_great_circle(&a, &c).unwrap();
            let (cb, pb) = distance_to_great_circle(&b, &c).unwrap();
            prop_assert!(ca >= 0.0 && pa >= 0.0);
            prop_assert!((ca - cb).abs() <= gap + 1e-14);
            prop_assert!((pa - pb).abs() <= gap + 1e-14);
        }
    }

    #[test]
    fn scenario_file_round_trip() {
        for name in BUILTIN_NAMES {
            let s = scenario(name);
            let text = serde_json::to_string(&s.to_file()).unwrap();
            assert_eq!(ScenarioConfig::from_json(&text).unwrap(), s);
        }
    }

    #[test]
    fn scenario_file_validation() {
        let ok = r#"{"name":"custom","inertia":[1,2,3],"alpha":0.1,"omega0":[1,0,0],"tN":5,"h":[0.1,0.05]}"#;
        let s = ScenarioConfig::from_json(ok).unwrap();
        assert_eq!(s.h, vec![0.1, 0.05]);
        assert_eq!(s.t_end, 5.0);
        assert_eq!(s.steppers, default_steppers());

        let unknown = r#"{"name":"x","inertia":[1,2,3],"alpha":0.1,"omega0":[1,0,0],"t_end":5,"h":0.1,"beta":1}"#;
        assert!(matches!(
            ScenarioConfig::from_json(unknown),
            Err(HarnessError::Parse(_))
        ));
        let both = r#"{"name":"x","inertia":[1,2,3],"alpha":0.1,"K":[[1,0,0],[0,1,0],[0,0,1]],"omega0":[1,0,0],"t_end":5,"h":0.1}"#;
        assert!(matches!(
            ScenarioConfig::from_json(both),
            Err(HarnessError::InvalidConfig(_))
        ));
        let backwards = r#"{"name":"x","inertia":[1,2,3],"alpha":0.1,"omega0":[1,0,0],"t0":5,"t_end":1,"h":0.1}"#;
        assert!(matches!(
            ScenarioConfig::from_json(backwards),
            Err(HarnessError::InvalidConfig(_))
        ));
        let bad_h =
            r#"{"name":"x","inertia":[1,2,3],"alpha":0.1,"omega0":[1,0,0],"t_end":1,"h":-0.1}"#;
        assert!(matches!(
            ScenarioConfig::from_json(bad_h),
            Err(HarnessError::InvalidConfig(_))
        ));
        let bad_stepper = r#"{"name":"x","inertia":[1,2,3],"alpha":0.1,"omega0":[1,0,0],"t_end":1,"h":0.1,"steppers":["euler"]}"#;
        assert!(matches!(
            ScenarioConfig::from_json(bad_stepper),
            Err(HarnessError::InvalidConfig(_))
        ));
        let full_k = r#"{"name":"x","inertia":[1,2,3],"dissipation_matrix":[[1,0,0],[0,2,0],[0,0,1]],"omega0":[1,0,0],"t_end":1,"h":0.1,"steppers":["rk4","ddb-cay"]}"#;
        let s = ScenarioConfig::from_json(full_k).unwrap();
        assert_eq!(s.steppers, vec![StepperKind::Rk4, StepperKind::DDB_CAY]);
        assert_eq!(s.metric.as_isotropic(), None);
    }

    #[test]
    fn slope_fit() {
        let x: Vec<f64> = [0.1f64, 0.05, 0.025].iter().map(|h| h.ln()).collect();
        let y: Vec<f64> = [0.1f64, 0.05, 0.025]
            .iter()
            .map(|h| (3.0 * h.powi(2)).ln())
            .collect();
        assert!((fit_slope(&x, &y).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(fit_slope(&x[..1], &y[..1]), None);
    }

    #[test]
    fn convergence_preconditions() {
        let a = scenario("A");
        let cfg = NewtonConfig::default();
        assert!(matches!(
            convergence_study(&a, StepperKind::Rk4, &[0.1], 1.0, &cfg),
            Err(HarnessError::TooFewSteps(1))
        ));
        assert!(matches!(
            convergence_study(&a, StepperKind::Rk4, &[0.1, 0.2, 0.05], 1.0, &cfg),
            Err(HarnessError::NotDescending)
        ));
    }

    #[test]
    fn principal_axis_convergence_is_not_applicable() {
        let mut a = scenario("A");
        a.omega0 = Vec3::new(0.0, 0.0, 1.0);
        let table = convergence_study(
            &a,
            StepperKind::DDB_CAY,
            &[0.2, 0.1, 0.05],
            2.0,
            &NewtonConfig::default(),
        )
        .unwrap();
        assert!(table.points.iter().all(|p| p.error <= 1e-12 && !p.in_fit));
        assert_eq!(table.slope, None);
    }

    #[test]
    fn convergence_is_reproducible() {
        let a = scenario("A");
        let cfg = NewtonConfig::default();
        let hs = [0.2, 0.1, 0.05];
        let first = convergence_study(&a, StepperKind::DDB_CAY, &hs, 2.0, &cfg).unwrap();
        let second = convergence_study(&a, StepperKind::DDB_CAY, &hs, 2.0, &cfg).unwrap();
        assert_eq!(first, second);
    }

    #[test]
    fn comparison_on_short_horizon() {
        let a = scenario("A").with_t_end(3.0).unwrap();
        let report = compare_methods(&a, 0.1, &NewtonConfig::default()).unwrap();
        assert_eq!(report.methods.len(), a.steppers.len() + 1);
        assert_eq!(
            report.methods.last().unwrap().stepper,
            StepperKind::reference()
        );
        for run in &report.methods {
            assert!(run.runtime_seconds > 0.0);
            let m = run.outcome.as_ref().unwrap();
            assert_eq!(m.casimir_drift.len(), 31);
            match &m.limit_distances {
                LimitDistances::Points(d) => assert_eq!(d.len(), 31),
                other => panic!("{other:?}"),
            }
            if run.stepper.preserves_orbits() {
                assert!(m.max_casimir_drift <= 1e-10);
            }
        }
        let reference = report.get(StepperKind::reference()).unwrap();
        assert_eq!(reference.outcome.as_ref().unwrap().final_error, 0.0);
    }

    #[test]
    fn failing_method_is_recorded() {
        let a = scenario("A").with_t_end(1.0).unwrap();
        let cfg = NewtonConfig {
            max_iter: 0,
            ..NewtonConfig::default()
        };
        let report = compare_methods(&a, 0.1, &cfg).unwrap();
        assert!(report.get(StepperKind::DDB_CAY).unwrap().outcome.is_err());
        assert!(report.get(StepperKind::Rk4).unwrap().outcome.is_ok());
    }
}
