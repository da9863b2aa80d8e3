//! Adaptive Dormand–Prince 5(4) reference solver with dense output.
//!
//! Step control follows the usual PI controller for this pair; the
//! continuous extension is the fourth-order interpolant of Shampine, so the
//! solution can be evaluated anywhere in `[t0, tN]` after a single run.

use crate::dynamics::{forced_field, DissipationMetric, InertiaModel};
use crate::so3::Vec3;

use super::IntegrationError;

// nodes; the field is autonomous so only the tableau test reads them
#[cfg(test)]
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];

/// Fifth-order weights (equal to the last row of `A`, FSAL).
pub(crate) const B: [f64; 7] = [
    35.0 / 384.0,
    0.0,
    500.0 / 1113.0,
    125.0 / 192.0,
    -2187.0 / 6784.0,
    11.0 / 84.0,
    0.0,
];

/// Difference between the fifth- and fourth-order weights.
const E: [f64; 7] = [
    -71.0 / 57600.0,
    0.0,
    71.0 / 16695.0,
    -71.0 / 1920.0,
    17253.0 / 339200.0,
    -22.0 / 525.0,
    1.0 / 40.0,
];

/// Dense-output coefficients: `y(t + θh) = y + h Σ_i K_i Σ_j P[i][j] θ^{j+1}`.
pub(crate) const P: [[f64; 4]; 7] = [
    [
        1.0,
        -8048581381.0 / 2820520608.0,
        8663915743.0 / 2820520608.0,
        -12715105075.0 / 11282082432.0,
    ],
    [0.0; 4],
    [
        0.0,
        131558114200.0 / 32700410799.0,
        -68118460800.0 / 10900136933.0,
        87487479700.0 / 32700410799.0,
    ],
    [
        0.0,
        -1754552775.0 / 470086768.0,
        14199869525.0 / 1410260304.0,
        -10690763975.0 / 1880347072.0,
    ],
    [
        0.0,
        127303824393.0 / 49829197408.0,
        -318862633887.0 / 49829197408.0,
        701980252875.0 / 199316789632.0,
    ],
    [
        0.0,
        -282668133.0 / 205662961.0,
        2019193451.0 / 616988883.0,
        -1453857185.0 / 822651844.0,
    ],
    [
        0.0,
        40617522.0 / 29380423.0,
        -110615467.0 / 29380423.0,
        69997945.0 / 29380423.0,
    ],
];

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 10.0;
const BETA: f64 = 0.04;
const EXPONENT: f64 = 0.2 - BETA * 0.75;
const MAX_STEPS: usize = 50_000_000;

/// Tolerances of the reference solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceTolerances {
    pub rel_tol: f64,
    pub abs_tol: f64,
}

impl Default for ReferenceTolerances {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            abs_tol: 1e-14,
        }
    }
}

#[derive(Debug, Clone)]
struct DenseSegment {
    t: f64,
    h: f64,
    y: Vec3,
    /// `Q_j = Σ_i K_i P[i][j]`
    q: [Vec3; 4],
}

impl DenseSegment {
    fn eval(&self, t: f64) -> Vec3 {
        let theta = (t - self.t) / self.h;
        // Horner in θ: θ(q0 + θ(q1 + θ(q2 + θ q3)))
        let poly = self.q[0] + (self.q[1] + (self.q[2] + self.q[3] * theta) * theta) * theta;
        self.y + poly * (theta * self.h)
    }
}

/// A complete adaptive solution on `[t0, tN]` that can be sampled anywhere.
#[derive(Debug, Clone)]
pub struct ReferenceSolution {
    t0: f64,
    t_end: f64,
    y0: Vec3,
    y_end: Vec3,
    segments: Vec<DenseSegment>,
    rejected: usize,
}

fn scaled_norm(err: &Vec3, y0: &Vec3, y1: &Vec3, tol: &ReferenceTolerances) -> f64 {
    let mut acc = 0.0;
    for i in 0..3 {
        let sc = tol.abs_tol + tol.rel_tol * y0[i].abs().max(y1[i].abs());
        acc += (err[i] / sc).powi(2);
    }
    (acc / 3.0).sqrt()
}

impl ReferenceSolution {
    /// Integrates the forced rigid body from `t0` to `t_end`.
    pub fn solve(
        m0: &Vec3,
        inertia: &InertiaModel,
        metric: &DissipationMetric,
        t0: f64,
        t_end: f64,
        tol: ReferenceTolerances,
    ) -> Result<Self, IntegrationError> {
        if !(t0.is_finite() && t_end.is_finite()) || t_end <= t0 {
            return Err(IntegrationError::InvalidInterval { t0, t_end });
        }
        if !(tol.rel_tol > 0.0 && tol.abs_tol > 0.0) {
            return Err(IntegrationError::InvalidTolerance);
        }
        let f = |y: &Vec3| forced_field(inertia, metric, y);

        let mut t = t0;
        let mut y = *m0;
        let mut k0 = f(&y);
        let mut h = initial_step(&f, &y, &k0, t_end - t0, &tol);
        let mut fac_old: f64 = 1e-4;
        let mut segments = Vec::new();
        let mut rejected = 0usize;
        let mut last_rejected = false;

        while t < t_end {
            if segments.len() + rejected > MAX_STEPS {
                return Err(IntegrationError::StepSizeUnderflow { t, h });
            }
            let remaining = t_end - t;
            let last = h >= remaining;
            if last {
                h = remaining;
            }
            if h <= 16.0 * f64::EPSILON * t.abs().max(1.0) {
                return Err(IntegrationError::StepSizeUnderflow { t, h });
            }

            let mut k = [Vec3::zeros(); 7];
            k[0] = k0;
            for s in 1..7 {
                let mut ys = y;
                for (j, kj) in k.iter().enumerate().take(s) {
                    ys += kj * (h * A[s][j]);
                }
                k[s] = f(&ys);
            }
            // stage 6 evaluates at the fifth-order solution
            let mut y_new = y;
            for (kj, bj) in k.iter().zip(B.iter()).take(6) {
                y_new += kj * (h * bj);
            }
            let mut err = Vec3::zeros();
            for (kj, ej) in k.iter().zip(E.iter()) {
                err += kj * (h * ej);
            }
            let err_norm = scaled_norm(&err, &y, &y_new, &tol);

            if err_norm <= 1.0 {
                let mut q = [Vec3::zeros(); 4];
                for (j, qj) in q.iter_mut().enumerate() {
                    for (kj, row) in k.iter().zip(P.iter()) {
                        *qj += kj * row[j];
                    }
                }
                segments.push(DenseSegment { t, h, y, q });
                t = if last { t_end } else { t + h };
                y = y_new;
                k0 = k[6];

                let fac11 = err_norm.max(1e-300).powf(EXPONENT);
                let mut fac = fac11 / fac_old.powf(BETA);
                fac = (fac / SAFETY).clamp(1.0 / MAX_FACTOR, 1.0 / MIN_FACTOR);
                let mut h_new = h / fac;
                if last_rejected {
                    h_new = h_new.min(h);
                }
                fac_old = err_norm.max(1e-4);
                last_rejected = false;
                h = h_new;
            } else {
                let fac11 = err_norm.powf(EXPONENT);
                h /= (fac11 / SAFETY).min(1.0 / MIN_FACTOR);
                rejected += 1;
                last_rejected = true;
            }
        }

        Ok(Self {
            t0,
            t_end,
            y0: *m0,
            y_end: y,
            segments,
            rejected,
        })
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn t_end(&self) -> f64 {
        self.t_end
    }

    pub fn final_state(&self) -> Vec3 {
        self.y_end
    }

    pub fn accepted_steps(&self) -> usize {
        self.segments.len()
    }

    pub fn rejected_steps(&self) -> usize {
        self.rejected
    }

    /// Dense evaluation; `t` is clamped into `[t0, tN]`.
    pub fn eval(&self, t: f64) -> Vec3 {
        if t <= self.t0 {
            return self.y0;
        }
        if t >= self.t_end {
            return self.y_end;
        }
        let idx = self.segments.partition_point(|s| s.t <= t);
        self.segments[idx.saturating_sub(1)].eval(t)
    }
}

fn initial_step<F>(f: &F, y0: &Vec3, f0: &Vec3, span: f64, tol: &ReferenceTolerances) -> f64
where
    F: Fn(&Vec3) -> Vec3,
{
    let scale = y0.map(|v| tol.abs_tol + tol.rel_tol * v.abs());
    let rms = |v: &Vec3| (v.component_div(&scale).norm_squared() / 3.0).sqrt();
    let d0 = rms(y0);
    let d1 = rms(f0);
    let h0 = if d0 < 1e-5 || d1 < 1e-5 {
        1e-6
    } else {
        0.01 * d0 / d1
    };
    let y1 = y0 + f0 * h0;
    let d2 = rms(&(f(&y1) - f0)) / h0;
    let h1 = if d1 <= 1e-15 && d2 <= 1e-15 {
        (h0 * 1e-3).max(1e-6)
    } else {
        (0.01 / d1.max(d2)).powf(0.2)
    };
    (100.0 * h0).min(h1).min(span)
}
