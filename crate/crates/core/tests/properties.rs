use std::f64::consts::{FRAC_PI_3, PI};
use std::sync::OnceLock;

use proptest::prelude::*;

use rhg_core::elliptic::{invariants, wp_symmetric, Extended, INVARIANT_CUTOFF};
use rhg_core::lattice::torus_from_rho;
use rhg_core::pipeline::Pipeline;
use rhg_core::quadrature::{integrate_path, integrate_segment, Path};
use rhg_core::theta::{theta1, ThetaParams};
use rhg_core::{Complex64, MeshDims};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

fn half() -> &'static Pipeline {
    static P: OnceLock<Pipeline> = OnceLock::new();
    P.get_or_init(|| Pipeline::run(0.5, MeshDims::RH).unwrap())
}

fn complex(r: f64) -> impl Strategy<Value = Complex64> {
    (-r..r, -r..r).prop_map(|(x, y)| Complex64::new(x, y))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn quartics_integrate_exactly(
        coef in prop::array::uniform5(complex(2.0)),
        a in complex(2.0),
        b in complex(2.0),
        panels in 1usize..5,
    ) {
        prop_assume!((b - a).norm() > 1e-3);
        let f = |z: Complex64| coef[0] + z * (coef[1] + z * (coef[2] + z * (coef[3] + z * coef[4])));
        let prim = |z: Complex64| {
            z * (coef[0] + z * (coef[1] / 2.0 + z * (coef[2] / 3.0 + z * (coef[3] / 4.0 + z * coef[4] / 5.0))))
        };
        let got = integrate_segment(&f, a, b, panels).unwrap();
        let want = prim(b) - prim(a);
        prop_assert!((got - want).norm() <= 1e-12 * (1.0 + want.norm()), "{} vs {}", got, want);
    }

    #[test]
    fn reversed_path_negates(a in complex(1.0), b in complex(1.0), m in complex(1.0)) {
        prop_assume!((b - m).norm() > 1e-3 && (m - a).norm() > 1e-3);
        let path = Path::new(vec![a, m, b], 3).unwrap();
        let f = |z: Complex64| (z * 0.7).exp() + z.conj() * z;
        let fwd = integrate_path(f, &path).unwrap().value;
        let back = integrate_path(f, &path.reversed()).unwrap().value;
        prop_assert!((fwd + back).norm() < 1e-13 * (1.0 + fwd.norm()));
    }

    #[test]
    fn reflected_shape_swaps_axes(rho in -1.4f64..1.4) {
        let p = torus_from_rho(rho).unwrap();
        let q = torus_from_rho(-rho).unwrap();
        prop_assert!((p.a - q.b).abs() < 1e-12 * p.a.max(p.b));
        prop_assert!((p.b - q.a).abs() < 1e-12 * p.a.max(p.b));
        prop_assert!((p.area - 8.0 * p.a * p.b).abs() < 1e-12 * p.area);
    }

    #[test]
    fn theta1_quasi_periodicity(
        arg in 0.35f64..(PI - 0.35),
        z in complex(0.4),
    ) {
        let tau = Complex64::from_polar(1.0, arg);
        let tp = ThetaParams::new(tau, 14).unwrap();
        let t = theta1(z, &tp).unwrap();
        let scale = 1.0 + t.norm();
        prop_assert!((theta1(-z, &tp).unwrap() + t).norm() < 1e-13 * scale);
        prop_assert!((theta1(z + 1.0, &tp).unwrap() + t).norm() < 1e-12 * scale);
        let shifted = theta1(z + tau, &tp).unwrap();
        let factor = -(-I * PI * tau - 2.0 * I * PI * z).exp();
        prop_assert!((shifted - factor * t).norm() < 1e-11 * (scale + shifted.norm()));
    }

    #[test]
    fn green_even_and_doubly_periodic(x in -0.5f64..0.5, y in -0.5f64..0.5, m in -3i32..3, n in -3i32..3) {
        let p = half();
        let t = &p.params;
        let w = Complex64::new(x, y);
        let g = p.green.extend_periodic(w);
        prop_assume!(g.is_finite());
        let shift = (2.0 * m as f64 * t.omega1 + 2.0 * n as f64 * t.omega2) / t.k;
        prop_assert!((p.green.extend_periodic(-w) - g).abs() < 1e-12);
        prop_assert!((p.green.extend_periodic(w.conj()) - g).abs() < 1e-12);
        prop_assert!((p.green.extend_periodic(w + shift) - g).abs() < 1e-9);
        prop_assert!(g >= -1e-9);
    }

    #[test]
    fn symmetric_wp_involutions(rho in -FRAC_PI_3..FRAC_PI_3, x in 0.05f64..0.95, y in 0.05f64..0.95) {
        let t = torus_from_rho(rho).unwrap();
        let k = invariants(&t, INVARIANT_CUTOFF).unwrap();
        let z = Complex64::new(x * 2.0 * t.a, -y * t.b);
        let at = |z: Complex64| match wp_symmetric(z, &t, &k) {
            Extended::Finite(v) => v,
            Extended::Infinity => panic!("pole at {z}"),
        };
        let v = at(z);
        let s = 1.0 + v.norm();
        prop_assert!((at(-z) - v).norm() < 1e-8 * s);
        prop_assert!((at(z.conj()) + v.conj()).norm() < 1e-8 * s);
        // reflection across Re z = a exchanges the zero and the pole
        prop_assert!((at(2.0 * t.a - z.conj()) * v.conj() - 1.0).norm() < 1e-8 * s);
    }
}
