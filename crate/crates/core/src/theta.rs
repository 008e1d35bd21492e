//! Closed-form Green's function through the Jacobi theta function
//! `theta_1`, used only to cross-check the mesh route.
//!
//! With `zh = sigma (z - 2a)` and `tau = omega2 / omega1`,
//!
//! ```text
//!   G(z) = -(f / 2pi) ln|theta_1(zh)| + (Im zh)^2 / (2 Im tau) + C0
//! ```
//!
//! The scale `sigma` and the log factor `f` are picked by [`calibrate`]
//! from a small candidate family; `C0` makes `G(0) = 0`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::TorusParams;

pub const DEFAULT_TRUNCATION: usize = 12;
/// A candidate map passes calibration below this residual.
pub const CALIBRATION_TOLERANCE: f64 = 1e-8;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThetaParams {
    pub tau: Complex64,
    pub truncation: usize,
    /// multiplies `z - 2a` to give the theta argument
    pub half_period_scale: Complex64,
    /// factor in front of the log term
    pub log_factor: f64,
    /// additive constant making `G(0) = 0`
    pub constant: f64,
    /// index of the selected candidate in [`candidates`]
    pub candidate: usize,
}

impl ThetaParams {
    /// Bare series parameters; `half_period_scale = 1`, no constant.
    pub fn new(tau: Complex64, truncation: usize) -> Result<ThetaParams> {
        if !(tau.im > 0.0) || truncation == 0 {
            return Err(Error::Theta(format!("need Im tau > 0 and a positive truncation, got tau = {tau}")));
        }
        Ok(ThetaParams {
            tau,
            truncation,
            half_period_scale: Complex64::new(1.0, 0.0),
            log_factor: 1.0,
            constant: 0.0,
            candidate: 0,
        })
    }
}

/// `-i sum_{n=-N}^{N} (-1)^n q^{(n+1/2)^2} e^{(2n+1) i pi z}`.
pub fn theta1(z: Complex64, tp: &ThetaParams) -> Result<Complex64> {
    Ok(theta1_and_derivative(z, tp)?.0)
}

/// `theta_1` and its derivative in `z`.
pub fn theta1_and_derivative(z: Complex64, tp: &ThetaParams) -> Result<(Complex64, Complex64)> {
    if !(tp.tau.im > 0.0) {
        return Err(Error::Theta(format!("Im tau = {} is not positive", tp.tau.im)));
    }
    let n = tp.truncation as i64;
    let ln_q = I * PI * tp.tau;
    let mut sum = Complex64::new(0.0, 0.0);
    let mut dsum = Complex64::new(0.0, 0.0);
    let mut tail: f64 = 0.0;
    for k in -n..=n {
        let h = k as f64 + 0.5;
        let sign = if k.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
        let w = (2 * k + 1) as f64;
        let term = sign * (ln_q * h * h + I * PI * w * z).exp();
        sum += term;
        dsum += term * I * PI * w;
        if k == -n || k == n {
            tail = tail.max(term.norm());
        }
    }
    let scale = sum.norm().max(dsum.norm() / (PI * (2 * n + 1) as f64));
    if tail > 1e-16 * scale && scale > 0.0 {
        return Err(Error::Theta(format!(
            "series tail {tail:e} not negligible at z = {z}; raise the truncation"
        )));
    }
    Ok((-I * sum, -I * dsum))
}

/// Theta argument for a unit-area point `w`.
pub fn theta_argument(w: Complex64, params: &TorusParams, tp: &ThetaParams) -> Complex64 {
    tp.half_period_scale * (w * params.k - params.source())
}

fn raw_green(w: Complex64, params: &TorusParams, tp: &ThetaParams) -> Result<f64> {
    let zh = theta_argument(w, params, tp);
    let t = theta1(zh, tp)?;
    Ok(-tp.log_factor / (2.0 * PI) * t.norm().ln() + zh.im * zh.im / (2.0 * tp.tau.im))
}

/// Theta-route G at a unit-area point; `+inf` at the source lattice.
pub fn green_theta(w: Complex64, params: &TorusParams, tp: &ThetaParams) -> Result<f64> {
    if params.reduce(w * params.k - params.source()).norm() < 1e-12 * params.k {
        return Ok(f64::INFINITY);
    }
    Ok(raw_green(w, params, tp)? + tp.constant)
}

/// Wirtinger derivative `dG/dz` in theta coordinates:
/// `-(f/4pi) theta_1'/theta_1 - i Im(zh) / (2 Im tau)`.
pub fn green_theta_dz(w: Complex64, params: &TorusParams, tp: &ThetaParams) -> Result<Complex64> {
    let zh = theta_argument(w, params, tp);
    let (t, dt) = theta1_and_derivative(zh, tp)?;
    Ok(-tp.log_factor / (4.0 * PI) * dt / t - I * zh.im / (2.0 * tp.tau.im))
}

/// `(scale, log factor)` pairs tried by [`calibrate`].
pub fn candidates(params: &TorusParams) -> Vec<(Complex64, f64)> {
    let w1 = params.omega1;
    let scales = [1.0 / (2.0 * w1), 1.0 / w1, 1.0 / (2.0 * w1 * params.k)];
    let mut out = Vec::new();
    for s in scales {
        for f in [1.0, 2.0] {
            out.push((s, f));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CandidateResidual {
    pub half_period_scale: Complex64,
    pub log_factor: f64,
    /// max over probes of the periodicity and evenness defects; `inf` when
    /// the candidate is singular at 0
    pub residual: f64,
}

/// Deterministic probe points inside the unit-area cell, away from 0 and the source.
fn probes(params: &TorusParams) -> Vec<Complex64> {
    let (a, b) = (params.a / params.k, params.b / params.k);
    [(0.31, 0.17), (0.53, -0.41), (-0.27, 0.62), (0.71, 0.05), (-0.66, -0.38), (0.12, -0.83), (1.37, 0.22), (0.9, 0.77)]
        .iter()
        .map(|&(x, y)| Complex64::new(x * a, y * b))
        .collect()
}

fn candidate_residual(params: &TorusParams, tp: &ThetaParams) -> f64 {
    // theta_1 must not vanish at 0: a zero there puts a second source on the minimum
    let at = |w: Complex64| theta1(theta_argument(w, params, tp), tp).map(|t| t.norm()).unwrap_or(0.0);
    let typical = probes(params).into_iter().map(at).fold(0.0, f64::max);
    if !(at(Complex64::new(0.0, 0.0)) > 1e-8 * typical) {
        return f64::INFINITY;
    }
    let s1 = 2.0 * params.omega1 / params.k;
    let s2 = 2.0 * params.omega2 / params.k;
    let mut worst: f64 = 0.0;
    for w in probes(params) {
        let g = |x: Complex64| raw_green(x, params, tp).unwrap_or(f64::NAN);
        let g0 = g(w);
        for d in [g(w + s1) - g0, g(w + s2) - g0, g(-w) - g0] {
            worst = worst.max(if d.is_finite() { d.abs() } else { f64::INFINITY });
        }
    }
    worst
}

/// Picks the unique candidate map whose G is doubly periodic, even and
/// finite at 0, then fixes `C0` so that `G(0) = 0`.
pub fn calibrate(params: &TorusParams) -> Result<(ThetaParams, Vec<CandidateResidual>)> {
    let base = ThetaParams::new(params.tau, DEFAULT_TRUNCATION)?;
    let mut report = Vec::new();
    let mut passing = Vec::new();
    for (i, (s, f)) in candidates(params).into_iter().enumerate() {
        let tp = ThetaParams {
            half_period_scale: s,
            log_factor: f,
            candidate: i,
            ..base
        };
        let r = candidate_residual(params, &tp);
        if r < CALIBRATION_TOLERANCE {
            passing.push(tp);
        }
        report.push(CandidateResidual {
            half_period_scale: s,
            log_factor: f,
            residual: r,
        });
    }
    if passing.len() != 1 {
        let detail: Vec<String> = report
            .iter()
            .map(|c| format!("scale {} factor {}: {:e}", c.half_period_scale, c.log_factor, c.residual))
            .collect();
        return Err(Error::Calibration(format!(
            "{} candidates pass (need exactly one): {}",
            passing.len(),
            detail.join("; ")
        )));
    }
    let mut tp = passing[0];
    tp.constant = -raw_green(Complex64::new(0.0, 0.0), params, &tp)?;
    Ok((tp, report))
}
