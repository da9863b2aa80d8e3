//! Serialization of trajectories, convergence tables and comparison reports.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use ddb_core::harness::{
    ConvergenceTable, LimitDistances, LimitSet, MetricsReport, ScenarioConfig, ScenarioFile,
};
use ddb_core::TrajectoryRecord;
use serde::Serialize;
use serde_json::{json, Value};

/// Version of the CSV/JSON layout written here. Readers reject anything else.
pub const SCHEMA_VERSION: &str = "1";

pub const TRAJECTORY_HEADER: &str = "t,M1,M2,M3,energy,casimir";

/// 17 significant digits, locale independent.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn trajectory_csv(record: &TrajectoryRecord) -> String {
    let mut out = String::with_capacity(120 * (record.len() + 1));
    out.push_str(TRAJECTORY_HEADER);
    out.push('\n');
    for k in 0..record.len() {
        let m = record.momenta[k];
        let fields = [
            record.times[k],
            m[0],
            m[1],
            m[2],
            record.energies[k],
            record.casimirs[k],
        ];
        let line: Vec<String> = fields.iter().map(|&x| fmt_float(x)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

#[derive(Serialize)]
struct TrajectoryJson<'a> {
    schema_version: &'static str,
    deterministic: bool,
    scenario: ScenarioFile,
    stepper: String,
    h: f64,
    steps: usize,
    t: &'a [f64],
    momentum: Vec<[f64; 3]>,
    energy: &'a [f64],
    casimir: &'a [f64],
}

pub fn trajectory_json(record: &TrajectoryRecord, scenario: &ScenarioConfig) -> String {
    let doc = TrajectoryJson {
        schema_version: SCHEMA_VERSION,
        deterministic: true,
        scenario: scenario.to_file(),
        stepper: record.stepper.name(),
        h: record.config.h,
        steps: record.config.steps,
        t: &record.times,
        momentum: record.momenta.iter().map(|m| (*m).into()).collect(),
        energy: &record.energies,
        casimir: &record.casimirs,
    };
    to_pretty(&doc)
}

pub fn convergence_csv(table: &ConvergenceTable) -> String {
    let mut out = String::from("h,error\n");
    for p in &table.points {
        let _ = writeln!(out, "{},{}", fmt_float(p.h_effective), fmt_float(p.error));
    }
    out
}

pub fn convergence_json(table: &ConvergenceTable, scenario: &ScenarioConfig) -> String {
    let points: Vec<Value> = table
        .points
        .iter()
        .map(|p| {
            json!({
                "h": p.h,
                "h_effective": p.h_effective,
                "steps": p.steps,
                "error": p.error,
                "in_fit": p.in_fit,
            })
        })
        .collect();
    let doc = json!({
        "schema_version": SCHEMA_VERSION,
        "deterministic": true,
        "scenario": scenario.to_file(),
        "stepper": table.stepper.name(),
        "t_end": table.t_end,
        "reference_final": <[f64; 3]>::from(table.reference_final),
        "saturation_threshold": table.saturation_threshold,
        "points": points,
        "slope": table.slope,
    });
    to_pretty(&doc)
}

fn last(v: &[f64]) -> Option<f64> {
    v.last().copied()
}

/// `metrics.json`: everything from the comparison except wall-clock times.
pub fn metrics_json(report: &MetricsReport) -> String {
    let methods: Vec<Value> = report
        .methods
        .iter()
        .map(|run| {
            let name = run.stepper.name();
            match &run.outcome {
                Err(err) => {
                    json!({ "integrator": name, "status": "failed", "message": err.to_string() })
                }
                Ok(m) => {
                    let mut entry = json!({
                        "integrator": name,
                        "status": "ok",
                        "steps": m.record.config.steps,
                        "final_momentum": <[f64; 3]>::from(m.record.final_momentum()),
                        "final_error": m.final_error,
                        "max_casimir_drift": m.max_casimir_drift,
                        "initial_energy": m.record.energies[0],
                        "final_energy": last(&m.record.energies),
                        "max_energy_increase": m.record.max_energy_increase(),
                    });
                    let extra = match &m.limit_distances {
                        LimitDistances::Points(d) => json!({
                            "distance_to_limit_points": {
                                "initial": d.first(),
                                "final": last(d),
                            }
                        }),
                        LimitDistances::GreatCircle { d_circle, d_plane } => json!({
                            "d_circle": { "initial": d_circle.first(), "final": last(d_circle) },
                            "d_plane": { "initial": d_plane.first(), "final": last(d_plane) },
                        }),
                        LimitDistances::NotApplicable => json!({}),
                    };
                    if let (Value::Object(base), Value::Object(more)) = (&mut entry, extra) {
                        base.extend(more);
                    }
                    entry
                }
            }
        })
        .collect();
    let limit_set = match report.scenario.limit_set() {
        LimitSet::Points { .. } => "points",
        LimitSet::GreatCircle { .. } => "great_circle",
        LimitSet::Sphere => "sphere",
    };
    let doc = json!({
        "schema_version": SCHEMA_VERSION,
        "deterministic": true,
        "scenario": report.scenario.to_file(),
        "h": report.h,
        "limit_set": limit_set,
        "methods": methods,
    });
    to_pretty(&doc)
}

pub fn timing_csv(report: &MetricsReport) -> String {
    let mut out = String::from("integrator,runtime_seconds\n");
    for run in &report.methods {
        let _ = writeln!(
            out,
            "{},{}",
            run.stepper.name(),
            fmt_float(run.runtime_seconds)
        );
    }
    out
}

fn to_pretty<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("in-memory JSON serialization");
    text.push('\n');
    text
}

/// Writes through a temporary file in the same directory, then renames.
pub fn write_atomic(path: &Path, contents: &str) -> std::io::Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir)?;
    tmp.write_all(contents.as_bytes())?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| e.error)?;
    Ok(())
}
