//! Casimir energy per unit length from the log-determinant formula
//!
//! ```text
//! E/(ħcL) = (1/4π) ∫_0^∞ p dp  log det(1 − T·T^P·U(p))
//! ```
//!
//! summed over the Dirichlet and Neumann channels. One kernel at the top
//! truncation order serves every lower order through principal submatrices,
//! so a whole `m_max` ladder costs one `p` integration.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::exec::{Executor, Serial};
use crate::linalg::{log_det, SquareMatrix};
use crate::mathieu::{ExpansionSource, FreshExpansions, DEFAULT_TOL};
use crate::quadrature::{integrate_vector, AdaptiveOptions};
use crate::scattering::{t_elliptic_pair, t_plane, BoundaryCondition, EllipticSurface, LogAmplitude};
use crate::translation::{kernel_with_source, sector_of, Sector};
use crate::{Error, Result};

/// Default truncation ladder.
pub const DEFAULT_LADDER: [u32; 5] = [4, 6, 8, 12, 16];

/// Below this `p·gap` the integrand is dropped (its contribution is `O(p²)`).
const SMALL_P_GAP: f64 = 1e-7;

/// Elliptic cylinder above the plane `y = 0`: center at height `H`, major
/// axis tilted by `φ` from the plane.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Geometry {
    pub surface: EllipticSurface,
    pub h: f64,
    pub phi: f64,
}

impl Geometry {
    pub fn new(surface: EllipticSurface, h: f64, phi: f64) -> Result<Self> {
        let g = Self { surface, h, phi };
        if !(h > 0.0) || !h.is_finite() || !phi.is_finite() {
            return Err(Error::InvalidInput(format!("need finite H > 0 and finite angle, got H = {h}, phi = {phi}")));
        }
        if !(g.gap() > 0.0) {
            return Err(Error::InvalidInput(format!(
                "the cylinder reaches {:.6} from its center towards the plane, which is at H = {h}",
                g.reach()
            )));
        }
        Ok(g)
    }

    pub fn strip(d: f64, h: f64, phi: f64) -> Result<Self> {
        Self::new(EllipticSurface::strip(d)?, h, phi)
    }

    /// `max_θ` of the surface's extent towards the plane.
    pub fn reach(&self) -> f64 {
        let (a, b) = (self.surface.semi_major(), self.surface.semi_minor());
        let (s, c) = self.phi.sin_cos();
        (a * a * s * s + b * b * c * c).sqrt()
    }

    /// Closest distance between the cylinder and the plane.
    pub fn gap(&self) -> f64 {
        self.h - self.reach()
    }
}

/// Numerical knobs of the pipeline.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct QuadratureSpec {
    /// Relative tolerance of the `p` integral.
    pub p_rel_tol: f64,
    /// Max-norm change of the normalized kernel between node doublings.
    pub u_tol: f64,
    /// Integrand is dropped above `p·gap = p_max_factor`.
    pub p_max_factor: f64,
    pub u_nodes_min: usize,
    pub u_nodes_max: usize,
    pub p_intervals_initial: usize,
    pub p_intervals_max: usize,
    /// Characteristic-value tolerance of the Mathieu expansions.
    pub expansion_tol: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self {
            p_rel_tol: 1e-7,
            u_tol: 1e-11,
            p_max_factor: 350.0,
            u_nodes_min: 40,
            u_nodes_max: 640,
            p_intervals_initial: 4,
            p_intervals_max: 256,
            expansion_tol: DEFAULT_TOL,
        }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("p_rel_tol", self.p_rel_tol), ("u_tol", self.u_tol)] {
            if !(v > 0.0 && v <= 1e-4) {
                return Err(Error::InvalidInput(format!("{name} must lie in (0, 1e-4], got {v}")));
            }
        }
        if !(self.expansion_tol > 0.0 && self.expansion_tol <= 1e-6) {
            return Err(Error::InvalidInput(format!(
                "expansion_tol must lie in (0, 1e-6], got {}",
                self.expansion_tol
            )));
        }
        if !(self.p_max_factor > 1.0) {
            return Err(Error::InvalidInput("p_max_factor must exceed 1".into()));
        }
        if self.u_nodes_min < 2 || self.u_nodes_max < self.u_nodes_min {
            return Err(Error::InvalidInput("need 2 <= u_nodes_min <= u_nodes_max".into()));
        }
        if self.p_intervals_initial < 1 || self.p_intervals_max < self.p_intervals_initial {
            return Err(Error::InvalidInput("need 1 <= p_intervals_initial <= p_intervals_max".into()));
        }
        Ok(())
    }
}

/// Which modes enter the determinant.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModeSelection {
    Full,
    Sector(Sector),
}

/// Length that makes energies dimensionless: results are `E·ℓ²/(ħcL)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "snake_case"))]
pub enum LengthScale {
    /// Interfocal half-width `d`.
    FocalHalfWidth,
    /// Center-to-plane distance `H`.
    Separation,
}

impl LengthScale {
    pub fn length(self, geom: &Geometry) -> f64 {
        match self {
            LengthScale::FocalHalfWidth => geom.surface.d,
            LengthScale::Separation => geom.h,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct SeriesPoint {
    pub m_max: u32,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ChannelValue {
    pub bc: BoundaryCondition,
    pub value: f64,
    pub series: Vec<SeriesPoint>,
    pub extrapolated: f64,
    pub err_estimate: f64,
}

/// Energy with its truncation series and error estimate.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EnergyResult {
    /// Value at the largest `m_max` of the ladder.
    pub value: f64,
    pub unit: LengthScale,
    pub channel_values: Vec<ChannelValue>,
    pub series: Vec<SeriesPoint>,
    pub extrapolated: f64,
    /// `max(|extrapolated − last|, |last − previous|/2)`.
    pub err_estimate: f64,
    /// Largest estimated `p`-quadrature error over all entries.
    pub quadrature_error: f64,
    pub p_evaluations: usize,
}

/// Raw energies per `(channel, m_max)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyTable {
    pub channels: Vec<BoundaryCondition>,
    pub ladder: Vec<u32>,
    /// `values[c][r]` for channel `c` and ladder rung `r`, in `E·ℓ²/(ħcL)`.
    pub values: Vec<Vec<f64>>,
    pub errors: Vec<Vec<f64>>,
    pub unit: LengthScale,
    pub p_evaluations: usize,
}

/// Fits `v(m) = v∞ + A e^{−b m}` through the last three points.
///
/// Returns `(v∞, |v∞ − last|)`, or `(last, |last − previous|)` when the
/// differences are not of one sign with shrinking ratio.
pub fn extrapolate(series: &[SeriesPoint]) -> Result<(f64, f64)> {
    if series.len() < 3 {
        return Err(Error::InvalidInput(format!("need at least 3 points to extrapolate, got {}", series.len())));
    }
    if series.windows(2).any(|w| w[1].m_max <= w[0].m_max) {
        return Err(Error::InvalidInput("m_max must be strictly increasing".into()));
    }
    let n = series.len();
    let (p1, p2, p3) = (series[n - 3], series[n - 2], series[n - 1]);
    let d1 = p2.value - p1.value;
    let d2 = p3.value - p2.value;
    let h1 = (p2.m_max - p1.m_max) as f64;
    let h2 = (p3.m_max - p2.m_max) as f64;
    let fallback = Ok((p3.value, d2.abs()));
    if d1 * d2 <= 0.0 {
        return fallback;
    }
    let ratio = d2 / d1;
    if ratio >= h2 / h1 {
        return fallback;
    }
    // R(b) = e^{−b h1}(1 − e^{−b h2})/(1 − e^{−b h1}) falls from h2/h1 to 0
    let r_of = |b: f64| (-b * h1).exp() * (-(-b * h2).exp_m1()) / (-(-b * h1).exp_m1());
    let (mut lo, mut hi) = (0.0, 1.0);
    while r_of(hi) > ratio {
        hi *= 2.0;
        if hi > 1e3 {
            return Ok((p3.value, 0.0));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if r_of(mid) > ratio {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let b = 0.5 * (lo + hi);
    let v_inf = p3.value + d2 / (b * h2).exp_m1();
    Ok((v_inf, (v_inf - p3.value).abs()))
}

/// `(extrapolated, err_estimate)` for a ladder of any length.
pub fn series_estimate(series: &[SeriesPoint]) -> (f64, f64) {
    let n = series.len();
    let last = series.last().map_or(0.0, |s| s.value);
    let half_step = if n >= 2 { 0.5 * (series[n - 1].value - series[n - 2].value).abs() } else { 0.0 };
    match extrapolate(series) {
        Ok((v, e)) => (v, e.max(half_step)),
        Err(_) => (last, half_step),
    }
}

/// The energy pipeline with a pluggable executor and expansion source.
pub struct Solver<'a, E: Executor = Serial> {
    exec: &'a E,
    source: &'a dyn ExpansionSource,
    quad: QuadratureSpec,
}

impl Solver<'static, Serial> {
    pub fn serial(quad: QuadratureSpec) -> Self {
        Solver {
            exec: &Serial,
            source: &FreshExpansions,
            quad,
        }
    }
}

impl<'a, E: Executor> Solver<'a, E> {
    pub fn new(exec: &'a E, source: &'a dyn ExpansionSource, quad: QuadratureSpec) -> Self {
        Self { exec, source, quad }
    }

    pub fn quad(&self) -> &QuadratureSpec {
        &self.quad
    }

    /// `log det(1 − T T^P U)` at momentum `p` for every `(channel, rung)`,
    /// laid out channel-major.
    pub fn logdets(
        &self,
        p: f64,
        geom: &Geometry,
        channels: &[BoundaryCondition],
        ladder: &[u32],
        selection: ModeSelection,
    ) -> Result<Vec<f64>> {
        let gap = geom.gap();
        let m_top = *ladder.iter().max().ok_or_else(|| Error::InvalidInput("empty m_max ladder".into()))?;
        if m_top < 1 {
            return Err(Error::InvalidInput("m_max must be at least 1".into()));
        }
        if p * gap < SMALL_P_GAP || p * gap > self.quad.p_max_factor {
            return Ok(vec![0.0; channels.len() * ladder.len()]);
        }
        let surface = geom.surface;
        let (kernel, partners) = kernel_with_source(p, geom.h, geom.phi, surface.d, m_top, &self.quad, self.source)?;
        let modes = kernel.modes().to_vec();
        let amplitudes: Vec<[LogAmplitude; 2]> = modes
            .iter()
            .zip(&partners)
            .map(|(&idx, e)| t_elliptic_pair(idx, surface, e))
            .collect::<Result<_>>()?;
        let in_selection: Vec<bool> = modes
            .iter()
            .map(|&idx| match selection {
                ModeSelection::Full => Ok(true),
                ModeSelection::Sector(s) => sector_of(geom.phi, idx)
                    .map(|own| own == s)
                    .ok_or_else(|| Error::InvalidInput(format!("angle {} has no decoupled sectors", geom.phi))),
            })
            .collect::<Result<_>>()?;

        let mut out = Vec::with_capacity(channels.len() * ladder.len());
        for &bc in channels {
            let slot = match bc {
                BoundaryCondition::Dirichlet => 0,
                BoundaryCondition::Neumann => 1,
            };
            let tp = t_plane(bc);
            for &rung in ladder {
                let idx: Vec<usize> = (0..modes.len())
                    .filter(|&i| modes[i].m <= rung && in_selection[i] && amplitudes[i][slot].sign != 0.0)
                    .collect();
                let m = SquareMatrix::from_fn(idx.len(), |a, b| {
                    let (i, j) = (idx[a], idx[b]);
                    let (ti, tj) = (amplitudes[i][slot], amplitudes[j][slot]);
                    let (v, ln_f) = kernel.scaled_entry(i, j);
                    let coupling = ti.sign * tp * v * (0.5 * (ti.ln_abs + tj.ln_abs) + ln_f).exp();
                    if a == b {
                        1.0 - coupling
                    } else {
                        -coupling
                    }
                });
                let (sign, ld) = log_det(&m);
                if !(sign > 0.0) || !ld.is_finite() {
                    return Err(Error::Determinant {
                        p,
                        bc,
                        reason: format!(
                            "determinant sign {sign}, log|det| {ld} at m_max = {rung} for d = {}, mu0 = {}, H = {}, phi = {}",
                            surface.d, surface.mu0, geom.h, geom.phi
                        ),
                    });
                }
                out.push(ld);
            }
        }
        Ok(out)
    }

    /// Energies for every `(channel, rung)` from one `p` integration.
    pub fn energy_table(
        &self,
        geom: &Geometry,
        channels: &[BoundaryCondition],
        ladder: &[u32],
        selection: ModeSelection,
        unit: LengthScale,
    ) -> Result<EnergyTable> {
        self.quad.validate()?;
        if channels.is_empty() || ladder.is_empty() {
            return Err(Error::InvalidInput("need at least one channel and one m_max".into()));
        }
        if geom.h <= geom.surface.d {
            return Err(Error::Range(format!(
                "the plane-wave kernel converges only for H > d; got H = {}, d = {}",
                geom.h, geom.surface.d
            )));
        }
        let gap = geom.gap();
        let scale = unit.length(geom);
        let prefactor = scale * scale / (4.0 * PI);
        let dim = channels.len() * ladder.len();
        let opts = AdaptiveOptions {
            rel_tol: self.quad.p_rel_tol,
            abs_tol: 1e-14 * prefactor / (gap * gap),
            initial_intervals: self.quad.p_intervals_initial,
            max_intervals: self.quad.p_intervals_max,
        };
        // p = −ln t / (2 gap), dp = dt / (2 gap t)
        let f = |t: f64| -> Result<Vec<f64>> {
            let p = -t.ln() / (2.0 * gap);
            let jac = p / (2.0 * gap * t) * prefactor;
            let mut v = self.logdets(p, geom, channels, ladder, selection)?;
            for x in v.iter_mut() {
                *x *= jac;
            }
            Ok(v)
        };
        let r = integrate_vector(self.exec, f, 0.0, 1.0, dim, &opts)?;
        let split = |v: &[f64]| -> Vec<Vec<f64>> { v.chunks(ladder.len()).map(|c| c.to_vec()).collect() };
        Ok(EnergyTable {
            channels: channels.to_vec(),
            ladder: ladder.to_vec(),
            values: split(&r.values),
            errors: split(&r.errors),
            unit,
            p_evaluations: r.evaluations,
        })
    }

    /// Single-channel energy in `E·d²/(ħcL)`.
    pub fn casimir_energy(&self, geom: &Geometry, bc: BoundaryCondition, m_max: u32) -> Result<f64> {
        let t = self.energy_table(geom, &[bc], &[m_max], ModeSelection::Full, LengthScale::FocalHalfWidth)?;
        Ok(t.values[0][0])
    }

    /// Dirichlet + Neumann energy over an `m_max` ladder.
    pub fn em_energy(&self, geom: &Geometry, ladder: &[u32]) -> Result<EnergyResult> {
        self.em_energy_in(geom, ladder, LengthScale::FocalHalfWidth)
    }

    pub fn em_energy_in(&self, geom: &Geometry, ladder: &[u32], unit: LengthScale) -> Result<EnergyResult> {
        self.energy(geom, &BoundaryCondition::BOTH, ladder, unit)
    }

    /// Sum over `channels` with per-channel series; the ladder is sorted first.
    pub fn energy(&self, geom: &Geometry, channels: &[BoundaryCondition], ladder: &[u32], unit: LengthScale) -> Result<EnergyResult> {
        let mut ladder = ladder.to_vec();
        ladder.sort_unstable();
        ladder.dedup();
        let t = self.energy_table(geom, channels, &ladder, ModeSelection::Full, unit)?;
        Ok(assemble(&t))
    }
}

fn assemble(t: &EnergyTable) -> EnergyResult {
    let channel_values: Vec<ChannelValue> = t
        .channels
        .iter()
        .zip(&t.values)
        .map(|(&bc, vals)| {
            let series: Vec<SeriesPoint> = t
                .ladder
                .iter()
                .zip(vals)
                .map(|(&m_max, &value)| SeriesPoint { m_max, value })
                .collect();
            let (extrapolated, err_estimate) = series_estimate(&series);
            ChannelValue {
                bc,
                value: *vals.last().unwrap_or(&0.0),
                series,
                extrapolated,
                err_estimate,
            }
        })
        .collect();
    let series: Vec<SeriesPoint> = t
        .ladder
        .iter()
        .enumerate()
        .map(|(r, &m_max)| SeriesPoint {
            m_max,
            value: t.values.iter().map(|v| v[r]).sum(),
        })
        .collect();
    let (extrapolated, err_estimate) = series_estimate(&series);
    let quadrature_error = t.errors.iter().flatten().fold(0.0, |m: f64, e| m.max(*e));
    EnergyResult {
        value: series.last().map_or(0.0, |s| s.value),
        unit: t.unit,
        channel_values,
        series,
        extrapolated,
        err_estimate,
        quadrature_error,
        p_evaluations: t.p_evaluations,
    }
}

/// `log det(1 − T T^P U)` at momentum `p` for one channel.
pub fn logdet_integrand(p: f64, geom: &Geometry, bc: BoundaryCondition, m_max: u32, quad: &QuadratureSpec) -> Result<f64> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(Error::InvalidInput(format!("p must be positive, got {p}")));
    }
    Ok(Solver::serial(*quad).logdets(p, geom, &[bc], &[m_max], ModeSelection::Full)?[0])
}

/// `(full, first sector, second sector)` log-determinants at a decoupling angle.
pub fn logdet_sectors(
    p: f64,
    geom: &Geometry,
    bc: BoundaryCondition,
    m_max: u32,
    quad: &QuadratureSpec,
) -> Result<(f64, f64, f64)> {
    let solver = Solver::serial(*quad);
    let full = solver.logdets(p, geom, &[bc], &[m_max], ModeSelection::Full)?[0];
    let a = solver.logdets(p, geom, &[bc], &[m_max], ModeSelection::Sector(Sector::First))?[0];
    let b = solver.logdets(p, geom, &[bc], &[m_max], ModeSelection::Sector(Sector::Second))?[0];
    Ok((full, a, b))
}

/// Single-channel energy `E·d²/(ħcL)`.
pub fn casimir_energy(geom: &Geometry, bc: BoundaryCondition, m_max: u32, quad: &QuadratureSpec) -> Result<f64> {
    Solver::serial(*quad).casimir_energy(geom, bc, m_max)
}

/// Electromagnetic (Dirichlet + Neumann) energy over an `m_max` ladder.
pub fn em_energy(geom: &Geometry, ladder: &[u32], quad: &QuadratureSpec) -> Result<EnergyResult> {
    Solver::serial(*quad).em_energy(geom, ladder)
}

/// Human-readable channel label used in reports.
pub fn channel_label(bc: BoundaryCondition) -> String {
    match bc {
        BoundaryCondition::Dirichlet => "D".into(),
        BoundaryCondition::Neumann => "N".into(),
    }
}
