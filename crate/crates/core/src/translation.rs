//! Plane-mediated translation kernel in the Mathieu basis.
//!
//! At fixed momentum `p` the round trip cylinder → plane → cylinder reduces
//! to
//!
//! ```text
//! U_ij = 2 ∫_0^{u_max} du e^{−2pH cosh u} Re[S_i(π/2 + φ + iu) conj S_j(π/2 + φ + iu)]
//! ```
//!
//! with `S` the angular functions at `q = −d²p²/4`. Entries are stored as
//! `U_ij = V_ij · e^{σ_i + σ_j − 2pH}` so that neither the `K_{2m}(2pH)`
//! growth at small `pH` nor the `e^{−2pH}` decay at large `pH` leaves the
//! floating-point range.

use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::energy::QuadratureSpec;
use crate::linalg::SquareMatrix;
use crate::mathieu::{log_envelope, BasisIndex, ExpansionSource, FreshExpansions, MathieuExpansion, NegQAngular, Parity};
use crate::quadrature::gauss_legendre;
use crate::{Error, Result};

/// Tail threshold for the integrand envelope, `ln 1e15`.
const ENVELOPE_DROP: f64 = 34.538_776_394_910_684;
const ENVELOPE_STEP: f64 = 0.05;
const MAX_DEPTH: u32 = 12;

/// Even orders `0..=m_max` followed by odd orders `1..=m_max`.
pub fn basis(m_max: u32) -> Vec<BasisIndex> {
    (0..=m_max)
        .map(BasisIndex::even)
        .chain((1..=m_max).map(BasisIndex::odd))
        .collect()
}

/// Real symmetric kernel matrix at fixed `p`.
#[derive(Debug, Clone)]
pub struct KernelMatrix {
    pub p: f64,
    pub h: f64,
    pub phi: f64,
    pub d: f64,
    pub m_max: u32,
    modes: Vec<BasisIndex>,
    scaled: SquareMatrix,
    ln_row_scale: Vec<f64>,
    ln_weight: f64,
    u_max: f64,
    nodes: usize,
}

impl KernelMatrix {
    pub fn dim(&self) -> usize {
        self.modes.len()
    }

    pub fn modes(&self) -> &[BasisIndex] {
        &self.modes
    }

    pub fn position(&self, index: BasisIndex) -> Option<usize> {
        self.modes.iter().position(|&m| m == index)
    }

    /// `U_ij` in plain floating point (may under- or overflow at extreme `pH`).
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        self.scaled[(i, j)] * (self.ln_row_scale[i] + self.ln_row_scale[j] + self.ln_weight).exp()
    }

    /// `U_ij` as `V_ij` with `ln` of the factor that multiplies it.
    pub fn scaled_entry(&self, i: usize, j: usize) -> (f64, f64) {
        (
            self.scaled[(i, j)],
            self.ln_row_scale[i] + self.ln_row_scale[j] + self.ln_weight,
        )
    }

    pub fn to_dense(&self) -> SquareMatrix {
        SquareMatrix::from_fn(self.dim(), |i, j| self.entry(i, j))
    }

    /// `U_ij / sqrt(U_ii U_jj)`, scale-free.
    pub fn correlation(&self, i: usize, j: usize) -> f64 {
        self.scaled[(i, j)] / (self.scaled[(i, i)] * self.scaled[(j, j)]).sqrt()
    }

    pub fn u_max(&self) -> f64 {
        self.u_max
    }

    pub fn nodes(&self) -> usize {
        self.nodes
    }
}

/// `u_max` from the weight alone: `e^{−2pH(cosh u − 1)} < e^{−30}`, inflated by 20 %.
pub fn weight_cutoff(p: f64, h: f64) -> f64 {
    1.2 * (1.0 + 30.0 / (2.0 * p * h)).acosh()
}

/// Where the weighted envelope of one angular function has dropped far
/// enough below its peak that the rest of the `u`-integral is negligible.
fn envelope_cutoff(exp: &MathieuExpansion, ph: f64) -> f64 {
    let g = |u: f64| log_envelope(exp, u) - ph * (u.cosh() - 1.0);
    let mut peak = g(0.0);
    let mut u = 0.0;
    loop {
        u += ENVELOPE_STEP;
        let v = g(u);
        if v > peak {
            peak = v;
        } else if 2.0 * (v - peak) < -ENVELOPE_DROP {
            return u;
        }
        if u > 700.0 {
            return u;
        }
    }
}

/// Kernel matrix for orders up to `m_max`.
pub fn kernel_matrix(p: f64, h: f64, phi: f64, d: f64, m_max: u32, quad: &QuadratureSpec) -> Result<KernelMatrix> {
    kernel_with_source(p, h, phi, d, m_max, quad, &FreshExpansions).map(|(k, _)| k)
}

/// Kernel matrix plus the `q = +s` partner expansions it was built from
/// (one per mode, in [`basis`] order).
pub fn kernel_with_source(
    p: f64,
    h: f64,
    phi: f64,
    d: f64,
    m_max: u32,
    quad: &QuadratureSpec,
    source: &dyn ExpansionSource,
) -> Result<(KernelMatrix, Vec<Arc<MathieuExpansion>>)> {
    for (name, v) in [("p", p), ("H", h), ("d", d)] {
        if !(v > 0.0) || !v.is_finite() {
            return Err(Error::InvalidInput(format!("{name} must be positive and finite, got {v}")));
        }
    }
    if !phi.is_finite() {
        return Err(Error::InvalidInput(format!("angle must be finite, got {phi}")));
    }
    if m_max < 1 {
        return Err(Error::InvalidInput("m_max must be at least 1".into()));
    }
    let modes = basis(m_max);
    let s = 0.25 * d * d * p * p;
    let ph = p * h;

    let mut depth = alloc::vec![0u32; modes.len()];
    let mut partners: Vec<Arc<MathieuExpansion>> = modes
        .iter()
        .map(|idx| source.expansion(idx.negq_partner().0, s, quad.expansion_tol, 0))
        .collect::<Result<_>>()?;

    // grow coefficient tables until every cap covers the integration range
    let u_max = loop {
        let env = partners.iter().map(|e| envelope_cutoff(e, ph)).fold(0.0, f64::max);
        let u_max = weight_cutoff(p, h).max(env);
        let mut deepened = false;
        for (i, idx) in modes.iter().enumerate() {
            while partners[i].u_cap() < u_max {
                depth[i] += 1;
                if depth[i] > MAX_DEPTH {
                    return Err(Error::Range(format!(
                        "u_max = {u_max:.3} exceeds the reachable cap of {idx} at s = {s:e} (pH = {ph:e})"
                    )));
                }
                partners[i] = source.expansion(idx.negq_partner().0, s, quad.expansion_tol, depth[i])?;
                deepened = true;
            }
        }
        if !deepened {
            break u_max;
        }
    };

    let angular: Vec<NegQAngular> = modes
        .iter()
        .zip(&partners)
        .map(|(&idx, e)| NegQAngular::from_partner(idx, (**e).clone()))
        .collect::<Result<_>>()?;

    let mut prev: Option<(SquareMatrix, Vec<f64>)> = None;
    let mut n = quad.u_nodes_min;
    loop {
        let (scaled, ln_scale) = integrate(&angular, phi, ph, u_max, n)?;
        if let Some((old, old_scale)) = &prev {
            let dim = modes.len();
            let mut change: f64 = 0.0;
            for i in 0..dim {
                for j in 0..dim {
                    let a = scaled[(i, j)] / (scaled[(i, i)] * scaled[(j, j)]).sqrt();
                    let shift = (old_scale[i] + old_scale[j] - ln_scale[i] - ln_scale[j]).exp();
                    let b = old[(i, j)] * shift / (scaled[(i, i)] * scaled[(j, j)]).sqrt();
                    change = change.max((a - b).abs());
                }
            }
            if change < quad.u_tol {
                let kernel = KernelMatrix {
                    p,
                    h,
                    phi,
                    d,
                    m_max,
                    modes,
                    scaled,
                    ln_row_scale: ln_scale,
                    ln_weight: -2.0 * ph,
                    u_max,
                    nodes: n,
                };
                return Ok((kernel, partners));
            }
            if 2 * n > quad.u_nodes_max {
                return Err(Error::Integration(format!(
                    "kernel at p = {p}, H = {h}: change {change:.2e} after {n} nodes"
                )));
            }
        }
        prev = Some((scaled, ln_scale));
        n *= 2;
    }
}

/// Gauss–Legendre estimate with `n` nodes on `[0, u_max]`.
fn integrate(angular: &[NegQAngular], phi: f64, ph: f64, u_max: f64, n: usize) -> Result<(SquareMatrix, Vec<f64>)> {
    let (x, w) = gauss_legendre(n);
    let u: Vec<f64> = x.iter().map(|&x| 0.5 * u_max * (x + 1.0)).collect();
    let weights: Vec<f64> = w.iter().map(|&w| 0.5 * u_max * w).collect();
    let base: Vec<f64> = u.iter().map(|&u| ph * (u.cosh() - 1.0)).collect();
    let re_z = core::f64::consts::FRAC_PI_2 + phi;

    let mut rows: Vec<Vec<Complex64>> = Vec::with_capacity(angular.len());
    let mut ln_scale = Vec::with_capacity(angular.len());
    for a in angular {
        let sigma = u
            .iter()
            .zip(&base)
            .map(|(&u, &b)| log_envelope(a.partner(), u) - b)
            .fold(f64::NEG_INFINITY, f64::max);
        let shifted: Vec<f64> = base.iter().map(|b| b + sigma).collect();
        rows.push(a.eval_line(re_z, &u, &shifted)?);
        ln_scale.push(sigma);
    }

    let dim = angular.len();
    let mut out = SquareMatrix::zeros(dim);
    for i in 0..dim {
        for j in i..dim {
            let mut acc = 0.0;
            for k in 0..n {
                let (a, b) = (rows[i][k], rows[j][k]);
                acc += weights[k] * (a.re * b.re + a.im * b.im);
            }
            out[(i, j)] = 2.0 * acc;
            out[(j, i)] = 2.0 * acc;
        }
    }
    for (i, idx) in angular.iter().enumerate() {
        if !(out[(i, i)] > 0.0) {
            return Err(Error::Integration(format!(
                "non-positive diagonal kernel entry for {} (pH = {ph:e})",
                idx.index()
            )));
        }
    }
    Ok((out, ln_scale))
}

/// Mode subsets that decouple at the special tilt angles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Sector {
    First,
    Second,
}

/// Which decoupled sector `index` belongs to at angle `phi`, or `None` if
/// `phi` is neither `0` nor `π/2` (mod `π`).
///
/// At `φ = π/2` the sectors are the even and odd modes. At `φ = 0` they are
/// {even `m` even, odd `m` odd} and the rest.
pub fn sector_of(phi: f64, index: BasisIndex) -> Option<Sector> {
    let r = num_traits::Euclid::rem_euclid(&phi, &core::f64::consts::PI);
    let tol = 1e-12;
    let first = if (r - core::f64::consts::FRAC_PI_2).abs() < tol {
        index.parity == Parity::Even
    } else if r < tol || (core::f64::consts::PI - r) < tol {
        (index.parity == Parity::Even) == index.m.is_multiple_of(2)
    } else {
        return None;
    };
    Some(if first { Sector::First } else { Sector::Second })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bessel::bessel_k;

    fn quad() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn small_d_reduces_to_bessel_k0() {
        let k = kernel_matrix(1.0, 1.0, 0.3, 1e-4, 2, &quad()).unwrap();
        let want = bessel_k(0, 2.0).unwrap();
        assert!((k.entry(0, 0) / want - 1.0).abs() < 1e-8, "{} {}", k.entry(0, 0), want);
    }

    #[test]
    fn symmetric_with_positive_diagonal() {
        let k = kernel_matrix(0.7, 2.0, 0.4, 1.0, 5, &quad()).unwrap();
        for i in 0..k.dim() {
            assert!(k.entry(i, i) > 0.0);
            for j in 0..k.dim() {
                let (a, b) = (k.entry(i, j), k.entry(j, i));
                assert!((a - b).abs() <= 1e-12 * a.abs().max(b.abs()));
            }
        }
    }

    #[test]
    fn perpendicular_decouples_even_and_odd() {
        let k = kernel_matrix(0.9, 2.0, core::f64::consts::FRAC_PI_2, 1.0, 6, &quad()).unwrap();
        for (i, a) in k.modes().iter().enumerate() {
            for (j, b) in k.modes().iter().enumerate() {
                if a.parity != b.parity {
                    assert!(k.correlation(i, j).abs() < 1e-12, "{a} {b} {}", k.correlation(i, j));
                }
            }
        }
    }

    #[test]
    fn parallel_selection_rule() {
        let k = kernel_matrix(0.9, 2.0, 0.0, 1.0, 6, &quad()).unwrap();
        for (i, &a) in k.modes().iter().enumerate() {
            for (j, &b) in k.modes().iter().enumerate() {
                if sector_of(0.0, a) != sector_of(0.0, b) {
                    assert!(k.correlation(i, j).abs() < 1e-12, "{a} {b}");
                }
            }
        }
    }

    #[test]
    fn entries_fall_faster_than_weight() {
        let p = 0.8;
        let mut prev = f64::INFINITY;
        for h in [2.0, 4.0, 8.0, 16.0] {
            let k = kernel_matrix(p, h, 0.3, 1.0, 3, &quad()).unwrap();
            let worst = (0..k.dim()).map(|i| k.entry(i, i)).fold(0.0, f64::max);
            let relative = worst * (2.0 * p * h).exp();
            assert!(relative < prev, "H={h} {relative}");
            prev = relative;
        }
        // the excess over e^{-2pH} itself decays, like (pH)^{-1/2}
        let k = kernel_matrix(p, 64.0, 0.3, 1.0, 3, &quad()).unwrap();
        let worst = (0..k.dim()).map(|i| k.entry(i, i)).fold(0.0, f64::max);
        assert!(worst * (2.0 * p * 64.0).exp() < 0.5 * prev);
    }

    #[test]
    fn tiny_momentum_is_reachable() {
        let k = kernel_matrix(1e-6, 2.0, 0.7, 1.0, 8, &quad()).unwrap();
        assert!(k.u_max() >= weight_cutoff(1e-6, 2.0));
        for i in 0..k.dim() {
            assert!(k.scaled_entry(i, i).0 > 0.0);
        }
    }
}
