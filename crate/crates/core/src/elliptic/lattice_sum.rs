//! Brute-force lattice sums over square shells `max(|m|,|n|) <= N`.
//!
//! These are oracles only. Partial sums over symmetric shells behave like
//! `S + a2 N^-2 + a3 N^-3 + a4 N^-4 + ...`, so the `*_extrapolated` variants
//! combine the partial sums at N/8, N/4, N/2, N by Richardson elimination.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::TorusParams;

/// Cutoff used by oracle evaluations that take none.
pub const ORACLE_CUTOFF: usize = 160;

const POLE_TOL: f64 = 1e-12;

fn lattice_point(p: &TorusParams, m: i64, n: i64) -> Complex64 {
    2.0 * (m as f64) * p.omega1 + 2.0 * (n as f64) * p.omega2
}

/// Calls `f(shell, lambda)` for every nonzero lattice point up to `cutoff`.
fn for_each_shell<F: FnMut(usize, Complex64)>(p: &TorusParams, cutoff: usize, mut f: F) {
    for shell in 1..=cutoff {
        let s = shell as i64;
        for i in -s..=s {
            f(shell, lattice_point(p, i, s));
            f(shell, lattice_point(p, i, -s));
        }
        for j in (-s + 1)..s {
            f(shell, lattice_point(p, s, j));
            f(shell, lattice_point(p, -s, j));
        }
    }
}

/// Partial sums at the four checkpoints N/8, N/4, N/2, N (N a multiple of 8).
fn checkpoints<F: Fn(Complex64) -> Complex64>(
    p: &TorusParams,
    cutoff: usize,
    centre: Complex64,
    term: F,
) -> [Complex64; 4] {
    let n = cutoff.max(8) / 8 * 8;
    let marks = [n / 8, n / 4, n / 2, n];
    let mut shell_sums = vec![Complex64::new(0.0, 0.0); n + 1];
    for_each_shell(p, n, |shell, lambda| shell_sums[shell] += term(lambda));
    let mut out = [centre; 4];
    let mut acc = centre;
    let mut k = 0;
    for (shell, s) in shell_sums.iter().enumerate().skip(1) {
        acc += s;
        if shell == marks[k] {
            out[k] = acc;
            k += 1;
            if k == 4 {
                break;
            }
        }
    }
    out
}

/// Eliminates N^-2, N^-3, N^-4 from partial sums at N/8, N/4, N/2, N.
fn richardson(s: [Complex64; 4]) -> Complex64 {
    let mut row = s.to_vec();
    for e in [2, 3, 4] {
        let f = (1u32 << e) as f64;
        row = row.windows(2).map(|w| (f * w[1] - w[0]) / (f - 1.0)).collect();
    }
    row[0]
}

fn check_pole(p: &TorusParams, z: Complex64) -> Result<()> {
    let r = p.reduce(z);
    if r.norm() < POLE_TOL {
        Err(Error::Pole(z))
    } else {
        Ok(())
    }
}

/// Truncated Weierstrass sum, exactly as defined.
pub fn wp_lattice_sum(z: Complex64, params: &TorusParams, cutoff: usize) -> Result<Complex64> {
    check_pole(params, z)?;
    let mut acc = (z * z).inv();
    for_each_shell(params, cutoff.max(1), |_, l| {
        acc += ((z - l) * (z - l)).inv() - (l * l).inv();
    });
    Ok(acc)
}

/// Richardson-accelerated classical ℘; `z` is first reduced to the
/// parallelogram around 0, where the shell expansion converges fastest.
pub fn wp_lattice_sum_extrapolated(z: Complex64, params: &TorusParams, cutoff: usize) -> Result<Complex64> {
    check_pole(params, z)?;
    let z = params.reduce(z);
    let s = checkpoints(params, cutoff, (z * z).inv(), |l| {
        ((z - l) * (z - l)).inv() - (l * l).inv()
    });
    Ok(richardson(s))
}

/// Classical (Weierstrass) zeta, Richardson-accelerated. Not reduced: zeta
/// is only quasi-periodic.
pub fn zeta_lattice_sum_extrapolated(z: Complex64, params: &TorusParams, cutoff: usize) -> Result<Complex64> {
    check_pole(params, z)?;
    let s = checkpoints(params, cutoff, z.inv(), |l| {
        (z - l).inv() + l.inv() + z / (l * l)
    });
    Ok(richardson(s))
}

/// `(g2, g3) = (60 sum lambda^-4, 140 sum lambda^-6)`.
pub fn eisenstein(params: &TorusParams, cutoff: usize) -> (Complex64, Complex64) {
    let zero = Complex64::new(0.0, 0.0);
    let g2 = checkpoints(params, cutoff, zero, |l| (l * l * l * l).inv());
    let g3 = checkpoints(params, cutoff, zero, |l| (l * l * l * l * l * l).inv());
    (60.0 * richardson(g2), 140.0 * richardson(g3))
}
