//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fails.

use std::f64::consts::FRAC_PI_2;
use std::process::{Command, ExitCode};
use std::time::Instant;

use ecyl::cache::ExpansionCache;
use ecyl::commands::{oracle_deviation, validate, Suite};
use ecyl::pool::RayonExecutor;
use ecyl_core::energy::{
    logdet_sectors, series_estimate, EnergyResult, Geometry, LengthScale, QuadratureSpec, Solver, DEFAULT_LADDER,
};
use ecyl_core::reference::{pfa_energy, PfaInput, HALF_PLANE_SINGLE, HALF_PLANE_SUPERPOSED};
use ecyl_core::scattering::{BoundaryCondition, EllipticSurface};

const HEADLINE: f64 = -0.00637;
const FIG3_H: [f64; 7] = [1.5, 2.0, 2.5, 3.0, 4.0, 5.0, 6.0];

struct Outcome {
    pass: bool,
    detail: String,
}

fn em(geom: &Geometry, ladder: &[u32]) -> EnergyResult {
    let cache = ExpansionCache::new();
    Solver::new(&RayonExecutor, &cache, QuadratureSpec::default())
        .em_energy_in(geom, ladder, LengthScale::FocalHalfWidth)
        .expect("energy")
}

fn strip(h: f64, phi: f64) -> Geometry {
    Geometry::strip(1.0, h, phi).expect("geometry")
}

fn at(r: &EnergyResult, m: u32) -> f64 {
    r.series.iter().find(|s| s.m_max == m).expect("rung").value
}

fn headline() -> Outcome {
    let t = Instant::now();
    let r = em(&strip(2.0, FRAC_PI_2), &[4, 6, 8]);
    let secs = t.elapsed().as_secs_f64();
    let e8 = at(&r, 8);
    let rel = (e8 / HEADLINE - 1.0).abs();
    Outcome {
        pass: rel < 0.01 && secs < 300.0,
        detail: format!("strip phi=90 H=2d m_max=8: E = {e8:.7} vs {HEADLINE} (rel {rel:.2e}), {secs:.1} s"),
    }
}

fn bracketing() -> Outcome {
    let r = em(&strip(2.0, FRAC_PI_2), &DEFAULT_LADDER);
    let v = r.extrapolated;
    Outcome {
        pass: HALF_PLANE_SINGLE < v && v < HALF_PLANE_SUPERPOSED,
        detail: format!("{HALF_PLANE_SINGLE} < {v:.7} (+- {:.1e}) < {HALF_PLANE_SUPERPOSED}", r.err_estimate),
    }
}

fn orientation() -> Outcome {
    let ladder = [4, 6, 8];
    let angles: Vec<f64> = (0..=6).map(|k| 15.0 * k as f64).collect();
    let values: Vec<f64> = angles.iter().map(|&deg| em(&strip(2.0, deg.to_radians()), &ladder).value).collect();
    let (imin, _) = values.iter().enumerate().fold((0, f64::INFINITY), |b, (i, &v)| if v < b.1 { (i, v) } else { b });
    let mut worst: f64 = 0.0;
    for (&deg, &v) in angles.iter().zip(&values).filter(|(&d, _)| d > 0.0 && d < 90.0) {
        let mirrored = em(&strip(2.0, (180.0 - deg).to_radians()), &ladder).value;
        worst = worst.max((mirrored / v - 1.0).abs());
    }
    let listing: Vec<String> = angles.iter().zip(&values).map(|(a, v)| format!("{a}:{v:.6}")).collect();
    Outcome {
        pass: angles[imin] == 90.0 && worst < 1e-6,
        detail: format!("minimum at {} deg, max |E(180-phi)/E(phi) - 1| = {worst:.1e}; {}", angles[imin], listing.join(" ")),
    }
}

fn fig3() -> Vec<(f64, EnergyResult)> {
    FIG3_H.iter().map(|&h| (h, em(&strip(h, 0.0), &DEFAULT_LADDER))).collect()
}

fn nonmonotonic_ratio(points: &[(f64, EnergyResult)]) -> Outcome {
    let ratios: Vec<f64> = points
        .iter()
        .map(|(h, r)| r.extrapolated / pfa_energy(PfaInput { h: *h, d: 1.0, phi: 0.0 }).expect("pfa"))
        .collect();
    let extremum = ratios.windows(3).any(|w| (w[1] - w[0]) * (w[2] - w[1]) < 0.0);
    let listing: Vec<String> = points.iter().zip(&ratios).map(|((h, _), q)| format!("{h}:{q:.5}")).collect();
    Outcome {
        pass: extremum,
        detail: format!("E/E_PFA at phi=0 over H/d: {}", listing.join(" ")),
    }
}

fn convergence(points: &[(f64, EnergyResult)]) -> Outcome {
    let mut pass = true;
    let mut worst_step: f64 = 0.0;
    let mut lines = Vec::new();
    for (h, r) in points {
        let (e12, e16) = (at(r, 12), at(r, 16));
        let step = (e16 - e12).abs();
        let rel = step / e16.abs();
        // estimate made before the m_max = 16 rung is seen
        let (_, predicted) = series_estimate(&r.series[..r.series.len() - 1]);
        let floor = 16.0 * f64::EPSILON * e16.abs();
        pass &= rel < 1e-3 && step <= predicted + floor;
        worst_step = worst_step.max(rel);
        lines.push(format!("{h}:{step:.1e}<={predicted:.1e}"));
    }
    Outcome {
        pass,
        detail: format!("max |E16-E12|/|E| = {worst_step:.1e}; step vs prior estimate {}", lines.join(" ")),
    }
}

fn oracle() -> Outcome {
    let quad = QuadratureSpec::default();
    let mut worst: f64 = 0.0;
    let mut lines = Vec::new();
    for h in [4.0, 8.0] {
        for bc in BoundaryCondition::BOTH {
            let dev = oracle_deviation(h, bc, 8, &quad).expect("oracle");
            worst = worst.max(dev);
            lines.push(format!("{bc} H/R={h}: {dev:.1e}"));
        }
    }
    Outcome {
        pass: worst < 5e-3,
        detail: format!("e=0.05 ellipse vs circular cylinder: {}", lines.join(", ")),
    }
}

fn identities() -> Outcome {
    let mathieu = validate(Suite::Mathieu, None).expect("suite");
    let ident = validate(Suite::Identities, None).expect("suite");
    let worst = |checks: &[ecyl::commands::Check], prefix: &str| {
        checks.iter().filter(|c| c.name.starts_with(prefix)).map(|c| c.value.unwrap_or(f64::INFINITY)).fold(0.0, f64::max)
    };
    let n = mathieu.checks.len() + ident.checks.len();
    Outcome {
        pass: mathieu.passed && ident.passed,
        detail: format!(
            "{n} checks; greens {:.1e}, plane wave {:.1e}, wronskian {:.1e}, normalization {:.1e}",
            worst(&ident.checks, "greens"),
            worst(&ident.checks, "plane wave"),
            worst(&mathieu.checks, "wronskian"),
            worst(&mathieu.checks, "normalization"),
        ),
    }
}

fn sectors() -> Outcome {
    let quad = QuadratureSpec::default();
    let shapes = [EllipticSurface::strip(1.0).expect("strip"), EllipticSurface::new(1.0, 0.6).expect("ellipse")];
    let mut worst: f64 = 0.0;
    let mut count = 0;
    for surface in shapes {
        for phi in [0.0, FRAC_PI_2] {
            let geom = Geometry::new(surface, 2.5, phi).expect("geometry");
            for p in [0.2, 0.8, 2.0] {
                for bc in BoundaryCondition::BOTH {
                    let (full, a, b) = logdet_sectors(p, &geom, bc, 8, &quad).expect("sectors");
                    worst = worst.max((full - (a + b)).abs() / full.abs());
                    count += 1;
                }
            }
        }
    }
    Outcome {
        pass: worst < 1e-8,
        detail: format!("{count} (shape, phi, p, channel) cases, max relative gap {worst:.1e}"),
    }
}

fn determinism() -> Outcome {
    let run = |threads: usize| {
        let out = Command::new(env!("CARGO_BIN_EXE_ecyl"))
            .args(["sweep", "--variable", "phi", "--values", "0,60", "--H", "2", "--mmax", "6"])
            .args(["--threads", &threads.to_string()])
            .output()
            .expect("spawn ecyl");
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        out.stdout
    };
    let n = std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1).max(4);
    let one = run(1);
    let same = [2, n].iter().all(|&t| run(t) == one);
    Outcome {
        pass: same && !one.is_empty(),
        detail: format!("sweep CSV with 1, 2 and {n} threads: {} bytes, identical = {same}", one.len()),
    }
}

fn report(n: u32, name: &str, o: &Outcome) {
    println!("criterion {n} [{}] {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
}

fn main() -> ExitCode {
    let mut all = true;
    let mut record = |n, name: &str, o: Outcome| {
        report(n, name, &o);
        all &= o.pass;
    };
    record(1, "headline value", headline());
    record(2, "half-plane bracketing", bracketing());
    record(3, "orientation dependence", orientation());
    let points = fig3();
    record(4, "nonmonotonic PFA ratio", nonmonotonic_ratio(&points));
    record(5, "circular cylinder oracle", oracle());
    record(6, "identity suites", identities());
    record(7, "sector decomposition", sectors());
    record(8, "truncation convergence", convergence(&points));
    record(9, "thread-count determinism", determinism());
    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
