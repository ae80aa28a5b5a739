use std::f64::consts::PI;
use std::fmt::Write as _;

use clap::ValueEnum;
use ecyl_core::energy::{EnergyResult, Geometry, LengthScale, QuadratureSpec, Solver};
use ecyl_core::mathieu::{
    angular, radial_modified, BasisIndex, ExpansionDump, MathieuExpansion, Parity, RadialKind, DEFAULT_TOL,
};
use num_complex::Complex64;
use ecyl_core::reference::{
    cylinder_plane_energy_with, greens_equivalence_residual, pfa_energy, planewave_expansion_residual, PfaInput,
    HALF_PLANE_SINGLE, HALF_PLANE_SUPERPOSED,
};
use ecyl_core::scattering::{BoundaryCondition, EllipticSurface};
use rayon::prelude::*;
use serde::Serialize;

use crate::cache::ExpansionCache;
use crate::config::{Format, RunConfig};
use crate::pool::{with_threads, RayonExecutor};
use crate::{CliError, CliResult};

#[derive(Debug, Clone, Serialize)]
pub struct GeometryInfo {
    pub semi_major: f64,
    pub semi_minor: f64,
    pub gap: f64,
    pub phi_rad: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EnergyReport {
    pub config: RunConfig,
    pub geometry: GeometryInfo,
    pub result: EnergyResult,
    /// Strip PFA in the same unit; absent for elliptic cross sections.
    pub pfa: Option<f64>,
    pub ratio_to_pfa: Option<f64>,
    pub notes: Vec<String>,
}

/// PFA of the strip in the run's unit.
pub fn pfa_in_unit(cfg: &RunConfig, geom: &Geometry) -> CliResult<Option<f64>> {
    if !cfg.is_strip() {
        return Ok(None);
    }
    let e = pfa_energy(PfaInput { h: cfg.h, d: cfg.d, phi: cfg.phi() })?;
    let l = cfg.unit.scale().length(geom);
    let v = e * (l / cfg.d).powi(2);
    Ok(Some(if v == 0.0 { 0.0 } else { v }))
}

fn ratio(e: f64, pfa: Option<f64>) -> Option<f64> {
    pfa.filter(|p| *p != 0.0).map(|p| e / p)
}

pub fn energy(cfg: &RunConfig) -> CliResult<EnergyReport> {
    cfg.validate()?;
    let geom = cfg.geometry()?;
    let cache = ExpansionCache::new();
    let result = with_threads(cfg.threads, || {
        Solver::new(&RayonExecutor, &cache, cfg.quadrature).energy(&geom, cfg.channel.conditions(), &cfg.ladder, cfg.unit.scale())
    })??;
    let pfa = pfa_in_unit(cfg, &geom)?;
    let mut notes = Vec::new();
    let half_plane_case = cfg.is_strip() && (cfg.phi_deg - 90.0).abs() < 1e-12 && (cfg.h - 2.0 * cfg.d).abs() < 1e-12 * cfg.d;
    if half_plane_case && result.unit == LengthScale::FocalHalfWidth {
        notes.push(format!(
            "half-plane estimates at the same edge distance: single {HALF_PLANE_SINGLE}, superposed {HALF_PLANE_SUPERPOSED}"
        ));
    }
    Ok(EnergyReport {
        config: cfg.clone(),
        geometry: GeometryInfo {
            semi_major: geom.surface.semi_major(),
            semi_minor: geom.surface.semi_minor(),
            gap: geom.gap(),
            phi_rad: geom.phi,
        },
        ratio_to_pfa: ratio(result.value, pfa),
        result,
        pfa,
        notes,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SweepVariable {
    /// Orientation angle in degrees.
    Phi,
    /// Center-to-plane distance.
    #[value(name = "H")]
    #[serde(rename = "H")]
    H,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub variable: f64,
    pub e_d: Option<f64>,
    pub e_n: Option<f64>,
    pub e_em: Option<f64>,
    pub e_pfa: Option<f64>,
    pub ratio: Option<f64>,
    pub err_estimate: Option<f64>,
    pub error: Option<String>,
}

/// `from, from + step, …` up to `to` inclusive.
pub fn grid(from: f64, to: f64, step: f64) -> CliResult<Vec<f64>> {
    if !(step > 0.0) || !(to >= from) || !from.is_finite() || !to.is_finite() {
        return Err(CliError::Input(format!("bad grid {from}..{to} step {step}")));
    }
    let n = ((to - from) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| from + i as f64 * step).collect())
}

fn sweep_point(cfg: &RunConfig, variable: SweepVariable, x: f64, cache: &ExpansionCache) -> SweepRow {
    let mut c = cfg.clone();
    match variable {
        SweepVariable::Phi => c.phi_deg = x,
        SweepVariable::H => c.h = x,
    }
    let run = || -> CliResult<SweepRow> {
        let geom = c.geometry()?;
        let pfa = pfa_in_unit(&c, &geom)?;
        let r = Solver::new(&RayonExecutor, cache, c.quadrature).em_energy_in(&geom, &c.ladder, c.unit.scale())?;
        Ok(SweepRow {
            variable: x,
            e_d: Some(r.channel_values[0].value),
            e_n: Some(r.channel_values[1].value),
            e_em: Some(r.value),
            e_pfa: pfa,
            ratio: ratio(r.value, pfa),
            err_estimate: Some(r.err_estimate),
            error: None,
        })
    };
    run().unwrap_or_else(|e| SweepRow {
        variable: x,
        e_d: None,
        e_n: None,
        e_em: None,
        e_pfa: None,
        ratio: None,
        err_estimate: None,
        error: Some(e.to_string()),
    })
}

/// Rows in grid order; failed points carry an error and no values.
pub fn sweep(cfg: &RunConfig, variable: SweepVariable, values: &[f64]) -> CliResult<Vec<SweepRow>> {
    cfg.quadrature.validate()?;
    if cfg.ladder.is_empty() {
        return Err(CliError::Input("empty m_max ladder".into()));
    }
    if values.is_empty() {
        return Err(CliError::Input("empty sweep grid".into()));
    }
    let cache = ExpansionCache::new();
    with_threads(cfg.threads, || values.par_iter().map(|&x| sweep_point(cfg, variable, x, &cache)).collect())
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

pub fn sweep_csv(cfg: &RunConfig, variable: SweepVariable, rows: &[SweepRow]) -> CliResult<String> {
    let name = match variable {
        SweepVariable::Phi => "phi_deg",
        SweepVariable::H => "H",
    };
    let mut out = String::new();
    writeln!(out, "# ecyl sweep over {name}").unwrap();
    writeln!(out, "# config: {}", cfg.to_json()).unwrap();
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Io(std::io::Error::other(e));
    w.write_record([name, "E_D", "E_N", "E_EM", "E_PFA", "ratio", "err_estimate"]).map_err(io)?;
    for r in rows {
        w.write_record([
            format!("{}", r.variable),
            cell(r.e_d),
            cell(r.e_n),
            cell(r.e_em),
            cell(r.e_pfa),
            cell(r.ratio),
            cell(r.err_estimate),
        ])
        .map_err(io)?;
    }
    let body = w.into_inner().map_err(|e| CliError::Io(std::io::Error::other(e.to_string())))?;
    out.push_str(&String::from_utf8(body).expect("csv is utf-8"));
    Ok(out)
}

#[derive(Serialize)]
struct SweepJson<'a> {
    config: &'a RunConfig,
    variable: SweepVariable,
    rows: &'a [SweepRow],
}

pub fn render_sweep(cfg: &RunConfig, variable: SweepVariable, rows: &[SweepRow]) -> CliResult<String> {
    match cfg.format {
        Format::Csv => sweep_csv(cfg, variable, rows),
        Format::Json => Ok(serde_json::to_string_pretty(&SweepJson { config: cfg, variable, rows })? + "\n"),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum MathieuFunction {
    /// Even angular function at `q`.
    #[value(name = "ce")]
    Ce,
    /// Odd angular function at `q`.
    #[value(name = "se")]
    Se,
    /// Even modified radial function of the first kind at `q = −s`.
    #[value(name = "Ie")]
    Ie,
    #[value(name = "Io")]
    Io,
    /// Even modified radial function, outgoing kind, at `q = −s`.
    #[value(name = "Ke")]
    Ke,
    #[value(name = "Ko")]
    Ko,
}

#[derive(Debug, Clone, Serialize)]
pub struct MathieuPoint {
    pub x: f64,
    pub value: f64,
    pub derivative: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct MathieuReport {
    pub function: MathieuFunction,
    pub m: u32,
    pub q: f64,
    pub char_value: f64,
    pub points: Vec<MathieuPoint>,
    pub expansion: Option<ExpansionDump>,
}

/// Evaluates one Mathieu function; `q` is the angular parameter, and for
/// the radial kinds it must be negative (`s = −q`).
pub fn mathieu(function: MathieuFunction, m: u32, q: f64, at: &[f64], dump: bool) -> CliResult<MathieuReport> {
    use MathieuFunction::*;
    let parity = match function {
        Ce | Ie | Ke => Parity::Even,
        Se | Io | Ko => Parity::Odd,
    };
    let index = BasisIndex::new(parity, m)?;
    let expansion = MathieuExpansion::build(index, q, DEFAULT_TOL, 0)?;
    let points = match function {
        Ce | Se => at
            .iter()
            .map(|&x| Ok(MathieuPoint { x, value: angular(&expansion, Complex64::new(x, 0.0))?.re, derivative: None }))
            .collect::<CliResult<_>>()?,
        _ => {
            if !(q < 0.0) {
                return Err(CliError::Input(format!("modified radial functions need q < 0, got {q}")));
            }
            let kind = if matches!(function, Ie | Io) { RadialKind::FirstKindModified } else { RadialKind::OutgoingModified };
            at.iter()
                .map(|&x| {
                    let (value, d) = radial_modified(kind, index, -q, x)?;
                    Ok(MathieuPoint { x, value, derivative: Some(d) })
                })
                .collect::<CliResult<_>>()?
        }
    };
    Ok(MathieuReport {
        function,
        m,
        q,
        char_value: expansion.char_value(),
        points,
        expansion: dump.then(|| expansion.dump()),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Mathieu,
    Identities,
    Oracle,
    All,
}

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub suite: &'static str,
    pub name: String,
    pub value: Option<f64>,
    pub threshold: f64,
    pub passed: bool,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationReport {
    pub suite: Suite,
    pub passed: bool,
    pub checks: Vec<Check>,
}

fn check(suite: &'static str, name: String, threshold: f64, value: ecyl_core::Result<f64>) -> Check {
    match value {
        Ok(v) => Check { suite, name, value: Some(v), threshold, passed: v.is_finite() && v < threshold, error: None },
        Err(e) => Check { suite, name, value: None, threshold, passed: false, error: Some(e.to_string()) },
    }
}

const CHAR_VALUES: [(Parity, u32, f64, f64); 6] = [
    (Parity::Even, 1, 1.0, 1.8591080725143634),
    (Parity::Odd, 1, 1.0, -0.11024881699209521),
    (Parity::Even, 0, 5.0, -5.800046020851508),
    (Parity::Odd, 2, 5.0, 2.0994604454866654),
    (Parity::Even, 3, 20.0, 15.395810912805139),
    (Parity::Odd, 6, 20.0, 40.58966405053631),
];

fn normalization_error(index: BasisIndex, q: f64) -> ecyl_core::Result<f64> {
    let e = MathieuExpansion::build(index, q, DEFAULT_TOL, 0)?;
    let n = 256;
    let h = 2.0 * PI / n as f64;
    let mut s = 0.0;
    for j in 0..n {
        s += angular(&e, Complex64::new(j as f64 * h, 0.0))?.re.powi(2);
    }
    Ok((s * h - PI).abs() / PI)
}

/// Largest relative deviation of `Ie·Ke' − Ie'·Ke` from `−1` over `mus`.
fn wronskian_spread(index: BasisIndex, s: f64, mus: &[f64]) -> ecyl_core::Result<f64> {
    let mut worst: f64 = 0.0;
    for &mu in mus {
        let (i, di) = radial_modified(RadialKind::FirstKindModified, index, s, mu)?;
        let (k, dk) = radial_modified(RadialKind::OutgoingModified, index, s, mu)?;
        worst = worst.max((i * dk - di * k + 1.0).abs());
    }
    Ok(worst)
}

fn mathieu_checks() -> Vec<Check> {
    let mut jobs: Vec<Box<dyn Fn() -> Check + Sync + Send>> = Vec::new();
    for (parity, m, q, want) in CHAR_VALUES {
        jobs.push(Box::new(move || {
            let index = BasisIndex::new(parity, m).expect("valid index");
            let got = MathieuExpansion::build(index, q, DEFAULT_TOL, 0).map(|e| (e.char_value() - want).abs() / want.abs().max(1.0));
            check("mathieu", format!("char_value {index} q={q}"), 1e-10, got)
        }));
    }
    for m in 0..=10u32 {
        for parity in [Parity::Even, Parity::Odd] {
            let Ok(index) = BasisIndex::new(parity, m) else { continue };
            for q in [0.01, 1.0, 5.0, 20.0] {
                jobs.push(Box::new(move || check("mathieu", format!("normalization {index} q={q}"), 1e-10, normalization_error(index, q))));
            }
        }
    }
    let mus: Vec<f64> = (0..10).map(|j| 0.1 + 0.3 * j as f64).collect();
    for index in [BasisIndex::even(0), BasisIndex::even(3), BasisIndex::even(8), BasisIndex::odd(1), BasisIndex::odd(4)] {
        for s in [0.05, 1.0, 6.0, 15.0] {
            let mus = mus.clone();
            jobs.push(Box::new(move || check("mathieu", format!("wronskian {index} s={s}"), 1e-10, wronskian_spread(index, s, &mus))));
        }
    }
    jobs.par_iter().map(|j| j()).collect()
}

fn identity_checks() -> Vec<Check> {
    let a = (0.05f64.cosh() * 0.7f64.cos(), 0.05f64.sinh() * 0.7f64.sin());
    let b = (a.0 + 3.0 * 0.6, a.1 + 3.0 * 0.8);
    let c = (0.1f64.cosh() * 2.0f64.cos(), 0.1f64.sinh() * 2.0f64.sin());
    let e = (c.0 - 3.0 * 0.8, c.1 + 3.0 * 0.6);
    let pw = (0.5f64.cosh() * 0.9f64.cos(), 0.5f64.sinh() * 0.9f64.sin());
    let jobs: Vec<Box<dyn Fn() -> Check + Sync + Send>> = vec![
        Box::new(move || check("identities", "greens p=1 near focal line".into(), 1e-8, greens_equivalence_residual(1.0, a, b, 1.0, 12))),
        Box::new(move || check("identities", "greens p=1 swapped".into(), 1e-8, greens_equivalence_residual(1.0, b, a, 1.0, 12))),
        Box::new(move || check("identities", "greens p=0.5 off axis".into(), 1e-8, greens_equivalence_residual(0.5, c, e, 1.0, 12))),
        Box::new(move || check("identities", "plane wave k_x=0".into(), 1e-8, planewave_expansion_residual(1.0, 0.0, 0.3, pw, 1.0, 10))),
        Box::new(move || check("identities", "plane wave k_x=0.7".into(), 1e-8, planewave_expansion_residual(1.0, 0.7, 0.3, pw, 1.0, 14))),
        Box::new(move || {
            check("identities", "plane wave k_x=-0.7 reflected".into(), 1e-8, planewave_expansion_residual(1.0, -0.7, 0.3, (pw.0, -pw.1), 1.0, 14))
        }),
    ];
    jobs.par_iter().map(|j| j()).collect()
}

/// Ellipse of eccentricity 0.05 and semi-major axis `R` against the
/// circular cylinder of radius `R`, per channel, in `E·H²/(ħcL)`.
pub fn oracle_deviation(h_over_r: f64, bc: BoundaryCondition, m_max: u32, quad: &QuadratureSpec) -> ecyl_core::Result<f64> {
    let surface = EllipticSurface::from_axis_eccentricity(1.0, 0.05)?;
    let geom = Geometry::new(surface, h_over_r, 0.3)?;
    let cache = ExpansionCache::new();
    let t = Solver::new(&RayonExecutor, &cache, *quad).energy(&geom, &[bc], &[m_max], LengthScale::Separation)?;
    let cyl = cylinder_plane_energy_with(&RayonExecutor, 1.0, h_over_r, bc, m_max, quad)?;
    Ok((t.value / cyl - 1.0).abs())
}

fn oracle_checks() -> Vec<Check> {
    let quad = QuadratureSpec::default();
    let mut out = Vec::new();
    for h in [4.0, 8.0] {
        for bc in BoundaryCondition::BOTH {
            out.push(check("oracle", format!("e=0.05 vs cylinder {bc} H/R={h}"), 5e-3, oracle_deviation(h, bc, 8, &quad)));
        }
    }
    out
}

pub fn validate(suite: Suite, threads: Option<usize>) -> CliResult<ValidationReport> {
    let checks = with_threads(threads, || {
        let mut checks = Vec::new();
        if matches!(suite, Suite::Mathieu | Suite::All) {
            checks.extend(mathieu_checks());
        }
        if matches!(suite, Suite::Identities | Suite::All) {
            checks.extend(identity_checks());
        }
        if matches!(suite, Suite::Oracle | Suite::All) {
            checks.extend(oracle_checks());
        }
        checks
    })?;
    Ok(ValidationReport { suite, passed: checks.iter().all(|c| c.passed), checks })
}
