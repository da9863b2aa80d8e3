//! Test-only oracles, written independently of the library's closed forms.

#![allow(dead_code)]

use ddb_core::so3::{hat, GroupElement};
use ddb_core::{Mat3, Vec3};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

pub fn random_vec(rng: &mut StdRng, scale: f64) -> Vec3 {
    Vec3::new(
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-1.0..1.0),
    ) * scale
}

/// Rotation by dense matrix power series, truncated once terms drop below 1e-18.
pub fn exp_series(v: &Vec3) -> Mat3 {
    let a = hat(v);
    let mut term = Mat3::identity();
    let mut sum = Mat3::identity();
    for k in 1..60 {
        term = term * a / k as f64;
        sum += term;
        if term.norm() < 1e-18 {
            break;
        }
    }
    sum
}

/// `(I − v̂/2)⁻¹(I + v̂/2)` by an LU solve.
pub fn cay_by_solve(v: &Vec3) -> Mat3 {
    let a = hat(v);
    (Mat3::identity() - a * 0.5)
        .lu()
        .solve(&(Mat3::identity() + a * 0.5))
        .expect("I − v̂/2 is always invertible")
}

fn vee_unchecked(m: &Mat3) -> Vec3 {
    Vec3::new(m[(2, 1)], m[(0, 2)], m[(1, 0)])
}

/// Directional derivative of `tau` at `v` along `eta` by central differences
/// with two Richardson levels.
fn directional_derivative(tau: &dyn Fn(&Vec3) -> Mat3, v: &Vec3, eta: &Vec3, eps: f64) -> Mat3 {
    let d = |e: f64| (tau(&(v + eta * e)) - tau(&(v - eta * e))) / (2.0 * e);
    let (d1, d2, d4) = (d(eps), d(eps / 2.0), d(eps / 4.0));
    let r1 = (d2 * 4.0 - d1) / 3.0;
    let r2 = (d4 * 4.0 - d2) / 3.0;
    (r2 * 16.0 - r1) / 15.0
}

/// Matrix of the right trivialized tangent: `η ↦ vee(Dτ(v)[η] τ(v)ᵀ)`.
pub fn fd_right_trivialized_tangent(tau: &dyn Fn(&Vec3) -> Mat3, v: &Vec3) -> Mat3 {
    let t = tau(v);
    let mut out = Mat3::zeros();
    for j in 0..3 {
        let mut eta = Vec3::zeros();
        eta[j] = 1.0;
        let dt = directional_derivative(tau, v, &eta, 1e-2);
        out.set_column(j, &vee_unchecked(&(dt * t.transpose())));
    }
    out
}

/// `(dτ_v⁻¹)*` from finite differences: invert the tangent, then transpose.
pub fn fd_dtau_inv_dual(tau: &dyn Fn(&Vec3) -> Mat3, v: &Vec3) -> Mat3 {
    fd_right_trivialized_tangent(tau, v)
        .try_inverse()
        .expect("trivialized tangent is invertible near 0")
        .transpose()
}

/// Discrete momentum for the Cayley retraction, expanded by hand:
/// `(I + v̂/2 + v vᵀ/4) p` with `v = hξ`, `p = 𝕀ξ`.
pub fn cayley_momentum(moments: &Vec3, h: f64, xi: &Vec3) -> Vec3 {
    let p = moments.component_mul(xi);
    let v = xi * h;
    p + v.cross(&p) * 0.5 + v * (v.dot(&p) / 4.0)
}

/// `(wJ − Jwᵀ)/h` as a matrix.
pub fn mv_momentum_matrix(w: &GroupElement, j: &Mat3, h: f64) -> Mat3 {
    (w.matrix() * j - j * w.matrix().transpose()) / h
}

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}
