use std::f64::consts::{FRAC_PI_2, PI};

use ecyl_core::energy::{
    em_energy, logdet_integrand, logdet_sectors, Geometry, LengthScale, ModeSelection, QuadratureSpec, Solver,
};
use ecyl_core::reference::cylinder_plane_energy;
use ecyl_core::scattering::{BoundaryCondition, EllipticSurface};

fn quad() -> QuadratureSpec {
    QuadratureSpec::default()
}

#[test]
fn orientation_symmetry() {
    let surface = EllipticSurface::new(1.0, 0.5).unwrap();
    let e = |phi: f64| em_energy(&Geometry::new(surface, 2.5, phi).unwrap(), &[4], &quad()).unwrap().value;
    let base = e(0.6);
    for other in [e(-0.6), e(PI - 0.6)] {
        assert!((other / base - 1.0).abs() < 1e-7, "{other} vs {base}");
    }
}

#[test]
fn energy_is_negative_and_rises_with_separation() {
    let mut prev = f64::NEG_INFINITY;
    for h in [2.0, 3.0, 5.0] {
        let v = em_energy(&Geometry::strip(1.0, h, FRAC_PI_2).unwrap(), &[4], &quad()).unwrap().value;
        assert!(v < 0.0 && v > prev, "H={h} E={v}");
        prev = v;
    }
}

#[test]
fn more_modes_lower_every_channel_log_det() {
    let geoms = [
        Geometry::strip(1.0, 2.0, FRAC_PI_2).unwrap(),
        Geometry::strip(1.0, 1.6, 0.0).unwrap(),
        Geometry::new(EllipticSurface::new(0.8, 0.4).unwrap(), 2.0, 1.0).unwrap(),
    ];
    for g in &geoms {
        for bc in BoundaryCondition::BOTH {
            for p in [0.3, 1.0, 3.0] {
                let mut prev = 0.0;
                for m in [2, 4, 6, 8] {
                    let v = logdet_integrand(p, g, bc, m, &quad()).unwrap();
                    assert!(v <= prev + 1e-15 * v.abs(), "{bc} p={p} m={m}: {v} > {prev}");
                    prev = v;
                }
                assert!(prev < 0.0);
            }
        }
    }
}

#[test]
fn sectors_add_up_at_aligned_angles() {
    for surface in [EllipticSurface::strip(1.0).unwrap(), EllipticSurface::new(1.0, 0.3).unwrap()] {
        for phi in [0.0, FRAC_PI_2] {
            let g = Geometry::new(surface, 2.2, phi).unwrap();
            for bc in BoundaryCondition::BOTH {
                for p in [0.25, 1.0, 2.5] {
                    let (full, a, b) = logdet_sectors(p, &g, bc, 6, &quad()).unwrap();
                    assert!((full - a - b).abs() <= 1e-8 * full.abs(), "{bc} phi={phi} p={p}: {full} vs {}", a + b);
                }
            }
        }
    }
}

#[test]
fn sectors_need_an_aligned_angle() {
    let g = Geometry::strip(1.0, 2.0, 0.4).unwrap();
    let s = Solver::serial(quad());
    let sel = ModeSelection::Sector(ecyl_core::translation::Sector::First);
    assert!(s.logdets(1.0, &g, &BoundaryCondition::BOTH, &[4], sel).is_err());
}

#[test]
fn near_circle_matches_cylinder_oracle() {
    let surface = EllipticSurface::from_axis_eccentricity(1.0, 0.05).unwrap();
    let g = Geometry::new(surface, 6.0, 1.1).unwrap();
    let t = Solver::serial(quad())
        .energy_table(&g, &BoundaryCondition::BOTH, &[8], ModeSelection::Full, LengthScale::Separation)
        .unwrap();
    for (c, bc) in BoundaryCondition::BOTH.into_iter().enumerate() {
        let cyl = cylinder_plane_energy(1.0, 6.0, bc, 8, &quad()).unwrap();
        let rel = (t.values[c][0] / cyl - 1.0).abs();
        assert!(rel < 5e-3, "{bc}: {} vs {cyl}", t.values[c][0]);
    }
}

#[test]
fn parallel_strip_series_settles() {
    let r = em_energy(&Geometry::strip(1.0, 1.5, 0.0).unwrap(), &[8, 12, 16], &quad()).unwrap();
    let v: Vec<f64> = r.series.iter().map(|s| s.value).collect();
    assert!(v[1] <= v[0] && v[2] <= v[1], "{v:?}");
    assert!((v[2] - v[1]).abs() <= (v[1] - v[0]).abs(), "{v:?}");
    assert!((r.extrapolated - v[2]).abs() <= r.err_estimate);
}

#[test]
fn degenerate_and_touching_inputs_are_rejected() {
    assert!(EllipticSurface::new(0.0, 0.0).is_err());
    assert!(Geometry::strip(1.0, 0.5, FRAC_PI_2).is_err());
    assert!(Geometry::strip(1.0, 1.0, FRAC_PI_2).is_err());
    let below_focal_circle = Geometry::strip(1.0, 0.5, 0.0).unwrap();
    assert!(matches!(em_energy(&below_focal_circle, &[4], &quad()), Err(ecyl_core::Error::Range(_))));
}
