//! Complex path integration with closed 5-point Newton–Cotes panels.
//!
//! Every straight segment of a [`Path`] is cut into equal panels and each
//! panel is integrated by interpolating the integrand with a degree-4
//! polynomial through five equally spaced samples. The rule is exact for
//! polynomials of degree 4 (and, by symmetry, 5).

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

/// Panels per segment when neither the caller nor `RHG_PANELS` says otherwise.
pub const DEFAULT_PANELS: usize = 8;

/// Weights of the closed rule on a panel of unit length.
pub const WEIGHTS: [f64; 5] = [7.0 / 90.0, 32.0 / 90.0, 12.0 / 90.0, 32.0 / 90.0, 7.0 / 90.0];

/// `PARTIAL[k][i]`: integral over `[0, (k+1)/4]` of the i-th Lagrange basis
/// polynomial of the unit panel. Row 3 equals [`WEIGHTS`].
pub const PARTIAL: [[f64; 5]; 4] = [
    [
        251.0 / 2880.0,
        323.0 / 1440.0,
        -11.0 / 120.0,
        53.0 / 1440.0,
        -19.0 / 2880.0,
    ],
    [29.0 / 360.0, 31.0 / 90.0, 1.0 / 15.0, 1.0 / 90.0, -1.0 / 360.0],
    [27.0 / 320.0, 51.0 / 160.0, 9.0 / 40.0, 21.0 / 160.0, -3.0 / 320.0],
    WEIGHTS,
];

/// Panel count from `RHG_PANELS`, falling back to [`DEFAULT_PANELS`].
pub fn default_panels() -> usize {
    std::env::var("RHG_PANELS")
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or(DEFAULT_PANELS)
}

/// Polyline in the complex plane.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Path {
    nodes: Vec<Complex64>,
    panels: usize,
}

impl Path {
    pub fn new(nodes: Vec<Complex64>, panels: usize) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::InvalidPath("need at least two nodes"));
        }
        if panels == 0 {
            return Err(Error::InvalidPath("panel count must be positive"));
        }
        if nodes.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::InvalidPath("consecutive nodes coincide"));
        }
        if nodes.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidPath("non-finite node"));
        }
        Ok(Path { nodes, panels })
    }

    pub fn segment(from: Complex64, to: Complex64, panels: usize) -> Result<Self> {
        Path::new(vec![from, to], panels)
    }

    pub fn nodes(&self) -> &[Complex64] {
        &self.nodes
    }

    pub fn panels_per_segment(&self) -> usize {
        self.panels
    }

    pub fn reversed(&self) -> Path {
        let mut nodes = self.nodes.clone();
        nodes.reverse();
        Path {
            nodes,
            panels: self.panels,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QuadratureResult {
    pub value: Complex64,
    /// Integral from the first node up to each node.
    pub cumulative: Vec<Complex64>,
}

/// Sample positions `from + (to-from) * t` with `t = j / (4 panels)`.
pub fn panel_samples(from: Complex64, to: Complex64, panels: usize) -> Vec<Complex64> {
    let n = 4 * panels;
    let d = to - from;
    (0..=n)
        .map(|j| {
            if j == n {
                to
            } else {
                from + d * (j as f64 / n as f64)
            }
        })
        .collect()
}

/// Integrates `f` along the straight segment `from -> to`.
pub fn integrate_segment<F>(f: &F, from: Complex64, to: Complex64, panels: usize) -> Result<Complex64>
where
    F: Fn(Complex64) -> Complex64 + ?Sized,
{
    let samples = panel_samples(from, to, panels);
    let h = (to - from) / panels as f64;
    let mut total = Complex64::new(0.0, 0.0);
    let mut left = eval(f, samples[0], 0)?;
    for p in 0..panels {
        let mut acc = left * WEIGHTS[0];
        for i in 1..5 {
            let v = eval(f, samples[4 * p + i], 0)?;
            acc += v * WEIGHTS[i];
            if i == 4 {
                left = v;
            }
        }
        total += acc * h;
    }
    Ok(total)
}

pub fn integrate_path<F>(f: F, path: &Path) -> Result<QuadratureResult>
where
    F: Fn(Complex64) -> Complex64,
{
    let mut cumulative = Vec::with_capacity(path.nodes.len());
    let mut acc = Complex64::new(0.0, 0.0);
    cumulative.push(acc);
    for (seg, w) in path.nodes.windows(2).enumerate() {
        let piece = integrate_segment(&f, w[0], w[1], path.panels).map_err(|e| match e {
            Error::NonFinite { at, .. } => Error::NonFinite { at, segment: seg },
            other => other,
        })?;
        acc += piece;
        cumulative.push(acc);
    }
    Ok(QuadratureResult {
        value: acc,
        cumulative,
    })
}

pub fn integrate_segment_sequence<F>(f: F, paths: &[Path]) -> Result<Vec<QuadratureResult>>
where
    F: Fn(Complex64) -> Complex64,
{
    paths
        .iter()
        .enumerate()
        .map(|(index, p)| {
            integrate_path(&f, p).map_err(|e| Error::InPath {
                index,
                source: Box::new(e),
            })
        })
        .collect()
}

fn eval<F>(f: &F, z: Complex64, segment: usize) -> Result<Complex64>
where
    F: Fn(Complex64) -> Complex64 + ?Sized,
{
    let v = f(z);
    if v.re.is_finite() && v.im.is_finite() {
        Ok(v)
    } else {
        Err(Error::NonFinite { at: z, segment })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn constant_integrand() {
        let p = Path::segment(c(0.0, 0.0), c(1.0, 0.0), 3).unwrap();
        let r = integrate_path(|_| c(1.0, 0.0), &p).unwrap();
        assert!((r.value - c(1.0, 0.0)).norm() < 1e-15);
        assert_eq!(r.cumulative.len(), 2);
        assert_eq!(r.cumulative[0], c(0.0, 0.0));
    }

    #[test]
    fn quartic_single_panel() {
        let p = Path::segment(c(0.0, 0.0), c(1.0, 0.0), 1).unwrap();
        let r = integrate_path(|z| z.powi(4), &p).unwrap();
        assert!((r.value.re - 0.2).abs() < 1e-15);
    }

    #[test]
    fn residue_on_square() {
        let sq = vec![c(1.0, -1.0), c(1.0, 1.0), c(-1.0, 1.0), c(-1.0, -1.0), c(1.0, -1.0)];
        let p = Path::new(sq, 64).unwrap();
        let r = integrate_path(|z| z.inv(), &p).unwrap();
        assert!((r.value - c(0.0, 2.0 * std::f64::consts::PI)).norm() < 1e-10);
    }

    #[test]
    fn refinement_shrinks_change() {
        let sq = vec![c(1.0, -1.0), c(1.0, 1.0), c(-1.0, 1.0), c(-1.0, -1.0), c(1.0, -1.0)];
        let vals: Vec<Complex64> = [2, 4, 8, 16]
            .iter()
            .map(|&n| integrate_path(|z| z.inv(), &Path::new(sq.clone(), n).unwrap()).unwrap().value)
            .collect();
        for w in vals.windows(3) {
            assert!((w[2] - w[1]).norm() < (w[1] - w[0]).norm());
        }
    }

    #[test]
    fn nan_reports_location() {
        let p = Path::new(vec![c(-1.0, 0.0), c(-0.5, 0.0), c(0.5, 0.0)], 2).unwrap();
        let err = integrate_path(|z| z.inv(), &p).unwrap_err();
        match err {
            Error::NonFinite { at, segment } => {
                assert_eq!(segment, 1);
                assert!(at.norm() < 1e-15);
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn batch_matches_individual() {
        let a = Path::segment(c(0.0, 0.0), c(1.0, 0.0), 1).unwrap();
        let b = Path::new(vec![c(1.0, -1.0), c(1.0, 1.0), c(-1.0, 1.0), c(-1.0, -1.0), c(1.0, -1.0)], 32).unwrap();
        let f = |z: Complex64| z.powi(4) + (z - c(0.0, 0.5)).inv();
        let batch = integrate_segment_sequence(f, &[a.clone(), b.clone()]).unwrap();
        assert_eq!(batch[0], integrate_path(f, &a).unwrap());
        assert_eq!(batch[1], integrate_path(f, &b).unwrap());
        assert!(integrate_segment_sequence(f, &[]).unwrap().is_empty());
    }

    #[test]
    fn batch_error_names_path() {
        let good = Path::segment(c(1.0, 0.0), c(2.0, 0.0), 1).unwrap();
        let bad = Path::segment(c(-1.0, 0.0), c(1.0, 0.0), 2).unwrap();
        let err = integrate_segment_sequence(|z| z.inv(), &[good, bad]).unwrap_err();
        assert!(matches!(err, Error::InPath { index: 1, .. }));
    }

    #[test]
    fn partial_rows_integrate_quartics() {
        // integral of t^m over [0, x] for x = 1/4 .. 1, using the partial rows
        for (k, row) in PARTIAL.iter().enumerate() {
            let x = (k + 1) as f64 / 4.0;
            for m in 0..=4 {
                let q: f64 = (0..5).map(|i| row[i] * (i as f64 / 4.0).powi(m)).sum();
                let exact = x.powi(m + 1) / (m + 1) as f64;
                assert!((q - exact).abs() < 1e-15, "k={k} m={m}");
            }
        }
    }

    #[test]
    fn invalid_paths_rejected() {
        assert!(Path::new(vec![c(0.0, 0.0)], 1).is_err());
        assert!(Path::new(vec![c(0.0, 0.0), c(0.0, 0.0)], 1).is_err());
        assert!(Path::segment(c(0.0, 0.0), c(1.0, 0.0), 0).is_err());
    }
}
