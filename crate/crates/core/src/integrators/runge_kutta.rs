//! Baseline Runge–Kutta steppers on the continuous vector field.

use nalgebra::{SMatrix, SVector};

use crate::dynamics::{forced_field, forced_field_jacobian, DissipationMetric, InertiaModel};
use crate::so3::Vec3;
use crate::solver::{newton, newton_with_jacobian, JacobianMode, NewtonConfig, SolverError};

/// Classical fourth-order Runge–Kutta step.
pub fn rk4_step(m: &Vec3, inertia: &InertiaModel, metric: &DissipationMetric, h: f64) -> Vec3 {
    let f = |y: &Vec3| forced_field(inertia, metric, y);
    let k1 = f(m);
    let k2 = f(&(m + k1 * (0.5 * h)));
    let k3 = f(&(m + k2 * (0.5 * h)));
    let k4 = f(&(m + k3 * h));
    m + (k1 + (k2 + k3) * 2.0 + k4) * (h / 6.0)
}

/// Three-stage Lobatto IIIC tableau (order 4, stiffly accurate).
const LOBATTO_A: [[f64; 3]; 3] = [
    [1.0 / 6.0, -1.0 / 3.0, 1.0 / 6.0],
    [1.0 / 6.0, 5.0 / 12.0, -1.0 / 12.0],
    [1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0],
];
const LOBATTO_B: [f64; 3] = [1.0 / 6.0, 2.0 / 3.0, 1.0 / 6.0];

type Stages = SVector<f64, 9>;

fn stage(z: &Stages, i: usize) -> Vec3 {
    Vec3::new(z[3 * i], z[3 * i + 1], z[3 * i + 2])
}

/// One step of the three-stage Lobatto IIIC method.
///
/// The stage values `Y_i = M + h Σ_j a_ij f(Y_j)` are solved together as a
/// 9-dimensional Newton system.
pub fn lobatto3c_step(
    m: &Vec3,
    inertia: &InertiaModel,
    metric: &DissipationMetric,
    h: f64,
    cfg: &NewtonConfig,
) -> Result<Vec3, SolverError> {
    if !(h.is_finite() && h > 0.0) {
        return Err(SolverError::InvalidStep(h));
    }
    let f = |y: &Vec3| forced_field(inertia, metric, y);
    let residual = |z: &Stages| {
        let slopes = [f(&stage(z, 0)), f(&stage(z, 1)), f(&stage(z, 2))];
        let mut r = Stages::zeros();
        for (i, row) in LOBATTO_A.iter().enumerate() {
            let combo = slopes[0] * row[0] + slopes[1] * row[1] + slopes[2] * row[2];
            let ri = stage(z, i) - m - combo * h;
            r.fixed_rows_mut::<3>(3 * i).copy_from(&ri);
        }
        r
    };
    let mut z0 = Stages::zeros();
    for i in 0..3 {
        z0.fixed_rows_mut::<3>(3 * i).copy_from(m);
    }
    let z = match cfg.jacobian {
        JacobianMode::Analytic => {
            let jac = |z: &Stages| {
                let mut jm = SMatrix::<f64, 9, 9>::identity();
                for j in 0..3 {
                    let df = forced_field_jacobian(inertia, metric, &stage(z, j));
                    for (i, row) in LOBATTO_A.iter().enumerate() {
                        let block = df * (-h * row[j]);
                        let mut view = jm.fixed_view_mut::<3, 3>(3 * i, 3 * j);
                        view += block;
                    }
                }
                jm
            };
            newton_with_jacobian(residual, jac, z0, cfg)?
        }
        JacobianMode::FiniteDifference { .. } => newton(residual, z0, cfg)?,
    };
    let mut out = *m;
    for (i, b) in LOBATTO_B.iter().enumerate() {
        out += f(&stage(&z, i)) * (h * b);
    }
    Ok(out)
}
