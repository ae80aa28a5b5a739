use std::f64::consts::PI;

use ecyl_core::energy::{extrapolate, QuadratureSpec, SeriesPoint};
use ecyl_core::mathieu::{angular, angular_negq, radial_modified, BasisIndex, MathieuExpansion, RadialKind, DEFAULT_TOL};
use ecyl_core::reference::{pfa_energy, PfaInput};
use ecyl_core::translation::kernel_matrix;
use num_complex::Complex64;
use proptest::prelude::*;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, failure_persistence: None, ..ProptestConfig::default() }
}

fn index() -> impl Strategy<Value = BasisIndex> {
    (any::<bool>(), 0u32..=10).prop_map(|(even, m)| {
        if even || m == 0 {
            BasisIndex::even(m)
        } else {
            BasisIndex::odd(m)
        }
    })
}

fn series(v: f64, a: f64, b: f64, ms: &[u32]) -> Vec<SeriesPoint> {
    ms.iter()
        .map(|&m| SeriesPoint {
            m_max: m,
            value: v + a * (-b * m as f64).exp(),
        })
        .collect()
}

proptest! {
    #![proptest_config(config(24))]

    #[test]
    fn angular_normalization_is_pi(idx in index(), q in 0.01f64..20.0) {
        let e = MathieuExpansion::build(idx, q, DEFAULT_TOL, 0).unwrap();
        // trapezoid rule is spectrally exact for trigonometric polynomials
        let n = 256;
        let h = 2.0 * PI / n as f64;
        let s: f64 = (0..n)
            .map(|j| angular(&e, Complex64::new(j as f64 * h, 0.0)).unwrap().re.powi(2))
            .sum();
        prop_assert!((s * h - PI).abs() < 1e-10, "{} q={} got {}", idx, q, s * h);
    }

    #[test]
    fn schwarz_reflection(idx in index(), q in 0.01f64..20.0, x in 0.0f64..6.3, y in -1.5f64..1.5) {
        let e = MathieuExpansion::build_with_cap(idx, q, DEFAULT_TOL, y.abs()).unwrap();
        let z = Complex64::new(x, y);
        let a = angular(&e, z).unwrap();
        let b = angular(&e, z.conj()).unwrap();
        prop_assert!((a - b.conj()).norm() <= 1e-13 * a.norm().max(1.0));
    }

    #[test]
    fn negative_q_matches_direct_build(idx in index(), s in 0.05f64..15.0, x in 0.05f64..1.5) {
        let direct = MathieuExpansion::build(idx, -s, DEFAULT_TOL, 0).unwrap();
        let probe = Complex64::new(0.3, 0.0);
        let d0 = angular(&direct, probe).unwrap().re;
        let n0 = angular_negq(idx, s, probe).unwrap().re;
        prop_assume!(d0.abs() > 1e-3);
        let sign = (d0 / n0).signum();
        let z = Complex64::new(x, 0.4);
        let a = angular(&direct, z).unwrap();
        let b = angular_negq(idx, s, z).unwrap() * sign;
        prop_assert!((a - b).norm() < 1e-12 * a.norm().max(1.0), "{} s={} {} vs {}", idx, s, a, b);
    }

    #[test]
    fn radial_wronskian_is_constant(idx in index(), s in 0.01f64..10.0, mus in prop::collection::vec(0.05f64..3.0, 10)) {
        let w: Vec<f64> = mus
            .iter()
            .map(|&mu| {
                let (i, di) = radial_modified(RadialKind::FirstKindModified, idx, s, mu).unwrap();
                let (k, dk) = radial_modified(RadialKind::OutgoingModified, idx, s, mu).unwrap();
                i * dk - di * k
            })
            .collect();
        let mean = w.iter().sum::<f64>() / w.len() as f64;
        let var = w.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / w.len() as f64;
        prop_assert!(var.sqrt() < 1e-10 * mean.abs(), "{} s={} {:?}", idx, s, w);
        prop_assert!((mean + 1.0).abs() < 1e-10);
    }

    #[test]
    fn pfa_is_symmetric_in_orientation(h in 1.05f64..10.0, phi in 0.0f64..1.5) {
        let e = |phi| pfa_energy(PfaInput { h, d: 1.0, phi }).unwrap();
        prop_assert!(e(phi) < 0.0 && e(PI - phi) < 0.0);
        prop_assert_eq!(e(phi), e(-phi));
        prop_assert!((e(phi) - e(PI - phi)).abs() <= 1e-14 * e(phi).abs());
    }

    #[test]
    fn extrapolation_recovers_exponential_tails(v in -1.0f64..1.0, a in -1.0f64..1.0, b in 0.1f64..1.5) {
        prop_assume!(a.abs() > 1e-3);
        let (got, err) = extrapolate(&series(v, a, b, &[4, 6, 8, 12, 16])).unwrap();
        prop_assert!((got - v).abs() < 1e-9, "{} vs {}", got, v);
        prop_assert!(err >= 0.0);
    }

    #[test]
    fn extrapolation_commutes_with_shift_and_scale(v in -1.0f64..1.0, a in 0.01f64..1.0, b in 0.1f64..1.0, c in -5.0f64..5.0, k in 0.5f64..4.0) {
        let base = series(v, a, b, &[6, 8, 12]);
        let moved: Vec<SeriesPoint> = base.iter().map(|p| SeriesPoint { m_max: p.m_max, value: k * p.value + c }).collect();
        let (x, ex) = extrapolate(&base).unwrap();
        let (y, ey) = extrapolate(&moved).unwrap();
        prop_assert!((y - (k * x + c)).abs() < 1e-9);
        prop_assert!((ey - k * ex).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(config(8))]

    #[test]
    fn kernel_is_symmetric(p in 0.05f64..3.0, h in 1.5f64..4.0, phi in 0.0f64..3.1, d in 0.5f64..1.0) {
        let k = kernel_matrix(p, h, phi, d, 5, &QuadratureSpec::default()).unwrap();
        for i in 0..k.dim() {
            prop_assert!(k.entry(i, i) > 0.0);
            for j in 0..i {
                let (a, b) = (k.entry(i, j), k.entry(j, i));
                prop_assert!((a - b).abs() <= 1e-14 * a.abs().max(b.abs()).max(k.entry(i, i).abs()));
            }
        }
    }

    #[test]
    fn parities_decouple_perpendicular_to_the_plane(p in 0.1f64..2.0, h in 1.5f64..3.0) {
        let k = kernel_matrix(p, h, PI / 2.0, 1.0, 4, &QuadratureSpec::default()).unwrap();
        let modes = k.modes().to_vec();
        for i in 0..modes.len() {
            for j in 0..modes.len() {
                if modes[i].parity != modes[j].parity {
                    prop_assert!(k.correlation(i, j).abs() < 1e-12);
                }
            }
        }
    }
}
