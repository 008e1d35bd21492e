//! Conformal chart from the right half-disk of ℘-values to the quarter torus.
//!
//! The half-disk is first sent to the closed first quadrant by a Möbius map,
//! then to a `Z` plane where the integrand of the inverse of ℘ has no
//! singularities left on the closed half-disk image:
//!
//! ```text
//!   p  --mobius-->  zb = sc (1 - i p) / (p - i)
//!   zb = st - (s - Z^2)^2,          s = -sqrt(st - i sc)
//!   dz/dZ = kappa * 8 / ( sqrt(zb + i sc) sqrt(zb + st) sqrt(2 s - Z^2) )
//! ```
//!
//! with `st = sqrt(tan alpha)`, `sc = sqrt(cot alpha)`, `alpha = pi/4 + rho/2`.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadrature;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

/// Value on the Riemann sphere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Extended {
    Finite(Complex64),
    Infinity,
}

impl Extended {
    pub fn finite(self) -> Option<Complex64> {
        match self {
            Extended::Finite(z) => Some(z),
            Extended::Infinity => None,
        }
    }
}

/// Square root with its branch cut along the ray `arg w = cut`.
pub(crate) fn sqrt_cut(w: Complex64, cut: f64) -> Complex64 {
    let turn = PI - cut;
    (w * Complex64::from_polar(1.0, turn)).sqrt() * Complex64::from_polar(1.0, -0.5 * turn)
}

/// `sqrt(f1 f2 f3)` with cuts away from the sectors the factors occupy on
/// the chart (f1, f2 near the first quadrant, f3 near the second), so that
/// straight segments slightly outside the chart do not flip the sign.
fn root_product(f1: Complex64, f2: Complex64, f3: Complex64) -> Complex64 {
    const CUT12: f64 = -3.0 * FRAC_PI_4;
    const CUT3: f64 = -FRAC_PI_4;
    sqrt_cut(f1, CUT12) * sqrt_cut(f2, CUT12) * sqrt_cut(f3, CUT3)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Chart {
    pub rho: f64,
    pub alpha: f64,
    /// sqrt(tan alpha)
    pub st: f64,
    /// sqrt(cot alpha)
    pub sc: f64,
    /// -sqrt(st - i sc), second quadrant
    pub s: Complex64,
    /// Orientation of dz/dZ, +1 or -1.
    pub kappa: f64,
    z_cut: f64,
}

impl Chart {
    pub fn new(rho: f64) -> Result<Chart> {
        if !(rho.abs() < FRAC_PI_2) {
            return Err(Error::Domain(rho));
        }
        let alpha = FRAC_PI_4 + 0.5 * rho;
        let st = alpha.tan().sqrt();
        let sc = (1.0 / alpha.tan()).sqrt();
        let s = -Complex64::new(st, -sc).sqrt();
        let mut chart = Chart {
            rho,
            alpha,
            st,
            sc,
            s,
            kappa: 1.0,
            z_cut: PI - s.arg(),
        };
        // a = kappa * integral along [Z(0), Z(st)] must come out positive
        let from = chart.z_of_quadrant(Complex64::new(0.0, 0.0));
        let to = chart.z_branch();
        let probe = quadrature::integrate_segment(&|z| chart.jacobian(z), from, to, 4)?;
        if probe.re < 0.0 {
            chart.kappa = -1.0;
        }
        Ok(chart)
    }

    /// Möbius map from the half-disk to the first quadrant.
    pub fn mobius_to_quadrant(&self, p: Complex64) -> Extended {
        let den = p - I;
        if den.norm() == 0.0 {
            return Extended::Infinity;
        }
        Extended::Finite(self.sc * (Complex64::new(1.0, 0.0) - I * p) / den)
    }

    /// Inverse Möbius map, first quadrant to half-disk.
    pub fn quadrant_to_disk(&self, zb: Complex64) -> Complex64 {
        (self.sc + I * zb) / (zb + I * self.sc)
    }

    pub fn desingularizing_substitution(&self, z: Complex64) -> Complex64 {
        let t = self.s - z * z;
        self.st - t * t
    }

    /// Inverse of [`Chart::desingularizing_substitution`] on the branch that
    /// carries the closed first quadrant onto a region bounded away from
    /// every branch cut.
    pub fn z_of_quadrant(&self, zb: Complex64) -> Complex64 {
        let q = -sqrt_cut(Complex64::new(self.st, 0.0) - zb, FRAC_PI_2);
        sqrt_cut(self.s - q, self.z_cut)
    }

    /// Chart coordinate of `e^{i rho}`: `Z^2 = s`.
    pub fn z_branch(&self) -> Complex64 {
        sqrt_cut(self.s, self.z_cut)
    }

    /// Chart coordinate of a ℘-value; `p = i` has no finite image.
    pub fn z_of_wp(&self, p: Complex64) -> Extended {
        match self.mobius_to_quadrant(p) {
            Extended::Finite(zb) => Extended::Finite(self.z_of_quadrant(zb)),
            Extended::Infinity => Extended::Infinity,
        }
    }

    /// ℘-value at a chart coordinate.
    pub fn wp_of_z(&self, z: Complex64) -> Complex64 {
        self.quadrant_to_disk(self.desingularizing_substitution(z))
    }

    /// The bounded integrand (without orientation).
    pub fn integrand(&self, z: Complex64) -> Complex64 {
        let zb = self.desingularizing_substitution(z);
        let f1 = zb + I * self.sc;
        let f2 = zb + self.st;
        let f3 = 2.0 * self.s - z * z;
        8.0 / root_product(f1, f2, f3)
    }

    /// dz/dZ: torus coordinate per unit chart coordinate.
    pub fn jacobian(&self, z: Complex64) -> Complex64 {
        self.kappa * self.integrand(z)
    }

    /// ℘-value and dz/dZ at once (they share the substitution).
    pub fn wp_and_jacobian(&self, z: Complex64) -> (Complex64, Complex64) {
        let zb = self.desingularizing_substitution(z);
        let f1 = zb + I * self.sc;
        let f2 = zb + self.st;
        let f3 = 2.0 * self.s - z * z;
        let j = self.kappa * 8.0 / root_product(f1, f2, f3);
        let p = (self.sc + I * zb) / f1;
        (p, j)
    }
}
