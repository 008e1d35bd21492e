//! Torus-level scalars derived from the shape parameter rho.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4};

use num_complex::Complex64;
use serde::Serialize;

use crate::elliptic::chart::Chart;
use crate::error::{Error, Result};
use crate::quadrature;

/// Panels for the two period integrals; both integrands are smooth, so this
/// puts the quadrature error at rounding level.
pub const PERIOD_PANELS: usize = 256;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TorusParams {
    pub rho: f64,
    pub alpha: f64,
    pub a: f64,
    pub b: f64,
    pub omega1: Complex64,
    pub omega2: Complex64,
    pub area: f64,
    pub k: f64,
    pub tau: Complex64,
}

impl TorusParams {
    fn from_ab(rho: f64, a: f64, b: f64) -> TorusParams {
        let omega1 = Complex64::new(a, -b);
        let omega2 = omega1.conj();
        let area = 8.0 * a * b;
        TorusParams {
            rho,
            alpha: FRAC_PI_4 + 0.5 * rho,
            a,
            b,
            omega1,
            omega2,
            area,
            k: area.sqrt(),
            tau: omega2 / omega1,
        }
    }

    /// Source of the Green's function, `omega1 + omega2 = 2a`.
    pub fn source(&self) -> Complex64 {
        Complex64::new(2.0 * self.a, 0.0)
    }

    /// Coordinates `(x, y)` with `z = 2 x omega1 + 2 y omega2`.
    pub fn lattice_coords(&self, z: Complex64) -> (f64, f64) {
        let s = z.re / (2.0 * self.a);
        let d = z.im / (2.0 * self.b);
        (0.5 * (s - d), 0.5 * (s + d))
    }

    /// Translate of `z` in the period parallelogram centred at 0.
    pub fn reduce(&self, z: Complex64) -> Complex64 {
        let (x, y) = self.lattice_coords(z);
        z - 2.0 * x.round() * self.omega1 - 2.0 * y.round() * self.omega2
    }

    /// Translate of `z` in the rectangle `[-2a, 2a] x [-b, b]`.
    pub fn reduce_to_rectangle(&self, z: Complex64) -> Complex64 {
        let mut w = z;
        let shift_y = ((w.im + self.b) / (2.0 * self.b)).floor();
        w -= 2.0 * shift_y * self.omega2;
        let shift_x = ((w.re + 2.0 * self.a) / (4.0 * self.a)).floor();
        w.re -= 4.0 * self.a * shift_x;
        w
    }
}

pub fn torus_from_rho(rho: f64) -> Result<TorusParams> {
    torus_from_rho_with(rho, PERIOD_PANELS)
}

/// a = kappa * int_{Z(0)}^{Z(st)} J dZ and  b = i kappa * int_0^{Z(0)} J dZ,
/// along straight segments of the desingularized chart.
pub fn torus_from_rho_with(rho: f64, panels: usize) -> Result<TorusParams> {
    if !(rho.abs() < FRAC_PI_2) {
        return Err(Error::Domain(rho));
    }
    if rho.abs() > FRAC_PI_3 {
        log::warn!("rho = {rho} is outside [-pi/3, pi/3]; accuracy is not validated there");
    }
    let chart = Chart::new(rho)?;
    let f = |z: Complex64| chart.jacobian(z);
    let z_bottom = chart.z_of_quadrant(Complex64::new(0.0, 0.0));
    let z_branch = chart.z_branch();
    let a = quadrature::integrate_segment(&f, z_bottom, z_branch, panels)?;
    let b = Complex64::i() * quadrature::integrate_segment(&f, Complex64::new(0.0, 0.0), z_bottom, panels)?;
    let tol = 1e-6 * (a.norm() + b.norm());
    if a.im.abs() > tol || b.im.abs() > tol || a.re <= 0.0 || b.re <= 0.0 {
        return Err(Error::Mesh(format!(
            "period integrals off the real axis: a = {a}, b = {b}"
        )));
    }
    Ok(TorusParams::from_ab(rho, a.re, b.re))
}

pub fn scale_to_unit_area(params: &TorusParams, z: Complex64) -> Complex64 {
    z / params.k
}
