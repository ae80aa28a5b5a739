//! Angular and modified radial Mathieu functions.
//!
//! Angular functions use the normalization `∫_0^{2π} S(θ)^2 dθ = π`, so
//! `ce_0 → 1/√2` and `ce_m → cos mθ` as `q → 0`. Fourier coefficients are
//! held as `(ln|c_k|, sign)` pairs; this keeps the far tail exact, which
//! the complex-argument evaluation needs once `cosh(h·Im z)` gets large.
//!
//! Coefficients for `q > 0` come from a Sturm-bisection eigenvalue of the
//! three-term recurrence followed by a two-sided ratio sweep (forward where
//! the solution grows, backward where it decays). The negative-parameter
//! functions used by the translation kernel are mapped onto `q = +s`
//! partners with the quarter-period shift `z → π/2 − z`.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, LN_2};
use core::fmt;

use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::bessel::{ModifiedISeq, ModifiedKSeq};
use crate::linalg::SymTridiagonal;
use crate::{Error, Result};

/// Default eigenvalue tolerance used by the energy pipeline.
pub const DEFAULT_TOL: f64 = 1e-13;

/// Coefficients are generated until they fall this far (natural log) below
/// the largest one.
const BASE_DEPTH: f64 = 46.0;
const GUARD_TERMS: usize = 40;
/// `|Im z|` cap guaranteed by the depth-0 table.
const BASE_CAP: f64 = 1.0;
const MAX_TERMS: usize = 1 << 14;
const CAP_HEADROOM: f64 = 6.907_755_278_982_137; // ln 1e3
const CAP_LAST_TERM: f64 = 36.841_361_487_904_73; // ln 1e16

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "lowercase"))]
pub enum Parity {
    Even,
    Odd,
}

/// `(parity, m)` label of a Mathieu mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BasisIndex {
    pub parity: Parity,
    pub m: u32,
}

impl BasisIndex {
    pub fn new(parity: Parity, m: u32) -> Result<Self> {
        if parity == Parity::Odd && m == 0 {
            return Err(Error::InvalidInput("odd Mathieu functions start at m = 1".into()));
        }
        Ok(Self { parity, m })
    }

    pub const fn even(m: u32) -> Self {
        Self { parity: Parity::Even, m }
    }

    /// # Panics
    /// If `m == 0`.
    pub fn odd(m: u32) -> Self {
        assert!(m >= 1, "odd Mathieu functions start at m = 1");
        Self { parity: Parity::Odd, m }
    }

    /// Harmonic family of the `q > 0` function with this label.
    pub fn class(self) -> HarmonicClass {
        match (self.parity, self.m % 2) {
            (Parity::Even, 0) => HarmonicClass::CosEven,
            (Parity::Even, _) => HarmonicClass::CosOdd,
            (Parity::Odd, 1) => HarmonicClass::SinOdd,
            (Parity::Odd, _) => HarmonicClass::SinEven,
        }
    }

    /// Position of the leading harmonic `m` inside its class, which is also
    /// the rank of the characteristic value within the class.
    pub fn rank(self) -> usize {
        let m = self.m as usize;
        match self.class() {
            HarmonicClass::CosEven => m / 2,
            HarmonicClass::CosOdd | HarmonicClass::SinOdd => (m - 1) / 2,
            HarmonicClass::SinEven => m / 2 - 1,
        }
    }

    /// The `q = +s` function that carries `S(z, −s)` and the sign of the
    /// quarter-period identity: `S(z, −s) = sign · partner(π/2 − z, s)`.
    pub fn negq_partner(self) -> (BasisIndex, f64) {
        let m = self.m;
        let (parity, exponent) = match (self.parity, m % 2) {
            (Parity::Even, 0) => (Parity::Even, m / 2),
            (Parity::Even, _) => (Parity::Odd, (m - 1) / 2),
            (Parity::Odd, 0) => (Parity::Odd, m / 2 + 1),
            (Parity::Odd, _) => (Parity::Even, (m - 1) / 2),
        };
        let sign = if exponent % 2 == 0 { 1.0 } else { -1.0 };
        (BasisIndex { parity, m }, sign)
    }
}

impl fmt::Display for BasisIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.parity {
            Parity::Even => write!(f, "Se_{}", self.m),
            Parity::Odd => write!(f, "So_{}", self.m),
        }
    }
}

/// The four harmonic families: `ce_{2n}`, `ce_{2n+1}`, `se_{2n+1}`, `se_{2n+2}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HarmonicClass {
    CosEven,
    CosOdd,
    SinOdd,
    SinEven,
}

impl HarmonicClass {
    pub fn harmonic(self, k: usize) -> u32 {
        let offset = match self {
            HarmonicClass::CosEven => 0,
            HarmonicClass::CosOdd | HarmonicClass::SinOdd => 1,
            HarmonicClass::SinEven => 2,
        };
        2 * k as u32 + offset
    }

    pub fn is_cosine(self) -> bool {
        matches!(self, HarmonicClass::CosEven | HarmonicClass::CosOdd)
    }

    /// Symmetric recurrence matrix of size `n`. For `CosEven` the first
    /// unknown is `√2·A_0`.
    fn matrix(self, q: f64, n: usize) -> SymTridiagonal {
        let mut diag: Vec<f64> = (0..n)
            .map(|k| {
                let h = self.harmonic(k) as f64;
                h * h
            })
            .collect();
        let mut off = alloc::vec![q; n.saturating_sub(1)];
        match self {
            HarmonicClass::CosEven => {
                if n > 1 {
                    off[0] = core::f64::consts::SQRT_2 * q;
                }
            }
            HarmonicClass::CosOdd => diag[0] += q,
            HarmonicClass::SinOdd => diag[0] -= q,
            HarmonicClass::SinEven => {}
        }
        SymTridiagonal { diag, off }
    }
}

/// Characteristic value and Fourier coefficients of one angular function.
#[derive(Debug, Clone, PartialEq)]
pub struct MathieuExpansion {
    index: BasisIndex,
    q: f64,
    char_value: f64,
    ln_abs: Vec<f64>,
    negative: Vec<bool>,
    depth: u32,
    u_cap: f64,
}

/// JSON-friendly view of an expansion.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ExpansionDump {
    pub parity: Parity,
    pub m: u32,
    pub q: f64,
    pub char_value: f64,
    pub coeffs: Vec<f64>,
}

/// Builds the expansion of `ce_m` (even) or `se_m` (odd) at `q > 0`.
///
/// `tol` bounds the change of the characteristic value between successive
/// truncation sizes.
pub fn build_expansion(index: BasisIndex, q: f64, tol: f64) -> Result<MathieuExpansion> {
    if !(q > 0.0) || !q.is_finite() {
        return Err(Error::InvalidInput(format!("Mathieu parameter must be positive, got q = {q}")));
    }
    MathieuExpansion::build(index, q, tol, 0)
}

impl MathieuExpansion {
    /// Like [`build_expansion`], but any finite `q` is accepted and the
    /// coefficient table is extended `depth` times (each step doubles the
    /// number of retained terms).
    pub fn build(index: BasisIndex, q: f64, tol: f64, depth: u32) -> Result<Self> {
        BasisIndex::new(index.parity, index.m)?;
        if !(tol > 0.0 && tol <= 1e-6) {
            return Err(Error::InvalidInput(format!("tolerance must lie in (0, 1e-6], got {tol}")));
        }
        if !q.is_finite() {
            return Err(Error::InvalidInput(format!("Mathieu parameter must be finite, got {q}")));
        }
        let class = index.class();
        let rank = index.rank();
        let char_value = characteristic_value(index, q, tol)?;

        if q == 0.0 {
            let mut ln_abs = alloc::vec![f64::NEG_INFINITY; rank + 1];
            ln_abs[rank] = if class == HarmonicClass::CosEven && rank == 0 { -0.5 * LN_2 } else { 0.0 };
            return Ok(Self {
                index,
                q,
                char_value,
                negative: alloc::vec![false; rank + 1],
                ln_abs,
                depth,
                u_cap: f64::INFINITY,
            });
        }

        let base_end = |l: &[f64]| -> Option<usize> {
            let peak = l.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            (rank + 2..l.len()).find(|&k| {
                l[k] < peak - BASE_DEPTH && l[k] - l[k - 1] < -(2.0 * BASE_CAP + CAP_HEADROOM)
            })
        };
        let mut len = rank + 16;
        let (mut ln_abs, mut negative, end) = loop {
            let (l, s) = log_coefficients(class, q, char_value, rank, len + GUARD_TERMS);
            match base_end(&l) {
                Some(end) if end + 3 < len => break (l, s, end),
                _ => {}
            }
            len *= 2;
            if len > MAX_TERMS {
                return Err(Error::SeriesNoConvergence {
                    what: format!("Fourier coefficients of {index} at q = {q}"),
                });
            }
        };
        let mut keep = end + 4;
        if depth > 0 {
            keep = keep.checked_shl(depth).filter(|&k| k <= MAX_TERMS).ok_or_else(|| {
                Error::Range(format!("coefficient table for {index} at q = {q} exceeds {MAX_TERMS} terms"))
            })?;
            let (l, s) = log_coefficients(class, q, char_value, rank, keep + GUARD_TERMS);
            ln_abs = l;
            negative = s;
        }
        ln_abs.truncate(keep);
        negative.truncate(keep);
        let u_cap = imaginary_cap(class, &ln_abs);
        Ok(Self {
            index,
            q,
            char_value,
            ln_abs,
            negative,
            depth,
            u_cap,
        })
    }

    /// Smallest depth whose cap reaches `u_min`.
    pub fn build_with_cap(index: BasisIndex, q: f64, tol: f64, u_min: f64) -> Result<Self> {
        let mut depth = 0;
        loop {
            let exp = Self::build(index, q, tol, depth)?;
            if exp.u_cap >= u_min {
                return Ok(exp);
            }
            depth += 1;
        }
    }

    pub fn index(&self) -> BasisIndex {
        self.index
    }

    pub fn class(&self) -> HarmonicClass {
        self.index.class()
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn char_value(&self) -> f64 {
        self.char_value
    }

    pub fn n_terms(&self) -> usize {
        self.ln_abs.len()
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// Largest `|Im z|` at which the retained terms still resolve the series.
    pub fn u_cap(&self) -> f64 {
        self.u_cap
    }

    pub fn harmonic(&self, k: usize) -> u32 {
        self.class().harmonic(k)
    }

    pub fn ln_abs_coeff(&self, k: usize) -> f64 {
        self.ln_abs[k]
    }

    pub fn coeff_sign(&self, k: usize) -> f64 {
        if self.negative[k] {
            -1.0
        } else {
            1.0
        }
    }

    /// Fourier coefficients `A_h` or `B_h` in harmonic order (underflowing
    /// tail entries come out as zero).
    pub fn coeffs(&self) -> Vec<f64> {
        (0..self.n_terms()).map(|k| self.coeff_sign(k) * self.ln_abs[k].exp()).collect()
    }

    pub fn dump(&self) -> ExpansionDump {
        ExpansionDump {
            parity: self.index.parity,
            m: self.index.m,
            q: self.q,
            char_value: self.char_value,
            coeffs: self.coeffs(),
        }
    }

    fn check_cap(&self, y: f64) -> Result<()> {
        if y.abs() > self.u_cap {
            return Err(Error::Range(format!(
                "|Im z| = {} exceeds the certified cap {} of {} at q = {}",
                y.abs(),
                self.u_cap,
                self.index,
                self.q
            )));
        }
        Ok(())
    }
}

/// `a_m(q)` or `b_m(q)` by bisection, with the truncation-doubling ladder.
fn characteristic_value(index: BasisIndex, q: f64, tol: f64) -> Result<f64> {
    let class = index.class();
    let rank = index.rank();
    let mut n = (2 * index.m as usize + 20).max((2.0 * q.abs().sqrt()).ceil() as usize + 25);
    let mut prev = class.matrix(q, n).eigenvalue(rank);
    for _ in 0..3 {
        n *= 2;
        let next = class.matrix(q, n).eigenvalue(rank);
        if (next - prev).abs() <= tol * next.abs().max(1.0) {
            return Ok(next);
        }
        prev = next;
    }
    Err(Error::EigenNoConvergence { index, q })
}

/// Normalized `(ln|c_k|, c_k < 0)` for `k < len − GUARD_TERMS`, computed on
/// `len` unknowns. The sign is fixed so that `c_rank > 0`.
fn log_coefficients(class: HarmonicClass, q: f64, lambda: f64, rank: usize, len: usize) -> (Vec<f64>, Vec<bool>) {
    let t = class.matrix(q, len);
    let (d, e) = (&t.diag, &t.off);

    // backward ratios rho[k] = x_k / x_{k-1}
    let mut rho = alloc::vec![0.0; len + 1];
    for k in (1..len).rev() {
        let next = if k + 1 < len { e[k] * rho[k + 1] } else { 0.0 };
        rho[k] = -e[k - 1] / ((d[k] - lambda) + next);
    }
    let join = (1..len).rev().find(|&k| rho[k].abs() >= 1.0).unwrap_or(0);

    let mut lx = alloc::vec![0.0; len];
    let mut neg = alloc::vec![false; len];
    if join > 0 {
        let mut g = -(d[0] - lambda) / e[0];
        lx[1] = g.abs().ln();
        neg[1] = g < 0.0;
        for k in 1..join {
            g = -(e[k - 1] / g + d[k] - lambda) / e[k];
            lx[k + 1] = lx[k] + g.abs().ln();
            neg[k + 1] = neg[k] ^ (g < 0.0);
        }
    }
    for k in join + 1..len {
        lx[k] = lx[k - 1] + rho[k].abs().ln();
        neg[k] = neg[k - 1] ^ (rho[k] < 0.0);
    }

    let keep = len - GUARD_TERMS.min(len - rank - 1);
    lx.truncate(keep);
    neg.truncate(keep);
    if class == HarmonicClass::CosEven {
        lx[0] -= 0.5 * LN_2;
    }
    let peak = lx.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mut sum = 0.0;
    for (k, &l) in lx.iter().enumerate() {
        let w = (2.0 * (l - peak)).exp();
        sum += if k == 0 && class == HarmonicClass::CosEven { 2.0 * w } else { w };
    }
    let shift = peak + 0.5 * sum.ln();
    for l in lx.iter_mut() {
        *l -= shift;
    }
    if neg[rank] {
        for s in neg.iter_mut() {
            *s = !*s;
        }
    }
    (lx, neg)
}

/// Cap on `|Im z|`: the last ratio must still shrink terms by 10³ after the
/// `e^{2|y|}` growth, and the last term must stay 10^16 below the largest.
fn imaginary_cap(class: HarmonicClass, ln_abs: &[f64]) -> f64 {
    let n = ln_abs.len();
    if n < 2 {
        return f64::INFINITY;
    }
    let ratio = ln_abs[n - 1] - ln_abs[n - 2];
    let tail = 0.5 * (-ratio - CAP_HEADROOM);
    if !(tail > 0.0) {
        return 0.0;
    }
    let h_last = class.harmonic(n - 1) as f64;
    let excess = |u: f64| {
        let top = ln_abs
            .iter()
            .enumerate()
            .map(|(k, &l)| l + class.harmonic(k) as f64 * u)
            .fold(f64::NEG_INFINITY, f64::max);
        ln_abs[n - 1] + h_last * u - top + CAP_LAST_TERM
    };
    if excess(tail) <= 0.0 {
        return tail;
    }
    if excess(0.0) > 0.0 {
        return 0.0;
    }
    let (mut lo, mut hi) = (0.0, tail);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if excess(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    lo
}

/// Supplies expansions to the energy pipeline; the std crate plugs in a
/// shared cache here.
///
/// Implementations must return exactly what [`MathieuExpansion::build`]
/// returns for the same arguments.
pub trait ExpansionSource: Sync {
    fn expansion(&self, index: BasisIndex, q: f64, tol: f64, depth: u32) -> Result<Arc<MathieuExpansion>>;
}

/// Builds every expansion on request.
#[derive(Debug, Clone, Copy, Default)]
pub struct FreshExpansions;

impl ExpansionSource for FreshExpansions {
    fn expansion(&self, index: BasisIndex, q: f64, tol: f64, depth: u32) -> Result<Arc<MathieuExpansion>> {
        MathieuExpansion::build(index, q, tol, depth).map(Arc::new)
    }
}

/// `max_k (ln|c_k| + h_k·y)` for `y ≥ 0`: the log-size of the largest term of
/// the series at `|Im z| = y`.
pub fn log_envelope(exp: &MathieuExpansion, y: f64) -> f64 {
    let rank = exp.index.rank();
    let mut best = f64::NEG_INFINITY;
    let mut last = f64::NEG_INFINITY;
    for k in 0..exp.n_terms() {
        let v = exp.ln_abs[k] + exp.harmonic(k) as f64 * y;
        if k > rank && v < best - 45.0 && v < last {
            break;
        }
        best = best.max(v);
        last = v;
    }
    best
}

/// `S(z)` for complex `z`: `Σ c_k cos(h_k z)` or `Σ c_k sin(h_k z)`.
pub fn angular(exp: &MathieuExpansion, z: Complex64) -> Result<Complex64> {
    angular_weighted(exp, z, 0.0)
}

/// `e^{−w}·S(z)`, with the weight folded into every term so that large
/// `|Im z|` does not overflow.
pub fn angular_weighted(exp: &MathieuExpansion, z: Complex64, w: f64) -> Result<Complex64> {
    exp.check_cap(z.im)?;
    let (re, im) = weighted_sum(exp, z.im, w, |k| {
        let hx = exp.harmonic(k) as f64 * z.re;
        (hx.cos(), hx.sin())
    });
    Ok(Complex64::new(re, im))
}

fn weighted_sum(exp: &MathieuExpansion, y: f64, w: f64, trig: impl Fn(usize) -> (f64, f64)) -> (f64, f64) {
    let cosine = exp.class().is_cosine();
    let ay = y.abs();
    let sy = if y < 0.0 { -1.0 } else { 1.0 };
    let rank = exp.index.rank();
    let (mut re, mut im) = (0.0, 0.0);
    let mut peak = f64::NEG_INFINITY;
    let mut last = f64::NEG_INFINITY;
    for k in 0..exp.n_terms() {
        let h = exp.harmonic(k) as f64;
        let grow = exp.ln_abs[k] + h * ay;
        if k > rank && grow < peak - 45.0 && grow < last {
            break;
        }
        last = grow;
        peak = peak.max(grow);
        let e1 = (grow - w).exp();
        if e1 == 0.0 {
            continue;
        }
        let e2 = e1 * (-2.0 * h * ay).exp();
        let ch = 0.5 * (e1 + e2);
        let sh = sy * 0.5 * (e1 - e2);
        let (c, s) = trig(k);
        let sign = exp.coeff_sign(k);
        if cosine {
            re += sign * c * ch;
            im -= sign * s * sh;
        } else {
            re += sign * s * ch;
            im += sign * c * sh;
        }
    }
    (re, im)
}

/// `S_m(z, −s)` through its `q = +s` partner.
#[derive(Debug, Clone)]
pub struct NegQAngular {
    index: BasisIndex,
    sign: f64,
    partner: MathieuExpansion,
}

impl NegQAngular {
    pub fn new(index: BasisIndex, s: f64, tol: f64) -> Result<Self> {
        let (partner_index, _) = index.negq_partner();
        let partner = build_expansion(partner_index, s, tol)?;
        Self::from_partner(index, partner)
    }

    /// Wraps an existing `q = +s` expansion, which must be the partner of
    /// `index`.
    pub fn from_partner(index: BasisIndex, partner: MathieuExpansion) -> Result<Self> {
        let (partner_index, sign) = index.negq_partner();
        if partner.index() != partner_index {
            return Err(Error::InvalidInput(format!(
                "{} is not the positive-parameter partner of {index}",
                partner.index()
            )));
        }
        Ok(Self { index, sign, partner })
    }

    pub fn index(&self) -> BasisIndex {
        self.index
    }

    pub fn s(&self) -> f64 {
        self.partner.q
    }

    pub fn partner(&self) -> &MathieuExpansion {
        &self.partner
    }

    pub fn sign(&self) -> f64 {
        self.sign
    }

    pub fn eval(&self, z: Complex64) -> Result<Complex64> {
        self.eval_weighted(z, 0.0)
    }

    pub fn eval_weighted(&self, z: Complex64, w: f64) -> Result<Complex64> {
        let v = angular_weighted(&self.partner, Complex64::new(FRAC_PI_2, 0.0) - z, w)?;
        Ok(v * self.sign)
    }

    /// `e^{−w_j}·S(z_j)` on points sharing `Re z`, reusing `cos/sin(h·Re(π/2 − z))`.
    pub fn eval_line(&self, re_z: f64, im_z: &[f64], w: &[f64]) -> Result<Vec<Complex64>> {
        let x = FRAC_PI_2 - re_z;
        let trig: Vec<(f64, f64)> = (0..self.partner.n_terms())
            .map(|k| {
                let hx = self.partner.harmonic(k) as f64 * x;
                (hx.cos(), hx.sin())
            })
            .collect();
        im_z.iter()
            .zip(w)
            .map(|(&y, &wj)| {
                self.partner.check_cap(y)?;
                let (re, im) = weighted_sum(&self.partner, -y, wj, |k| trig[k]);
                Ok(Complex64::new(re, im) * self.sign)
            })
            .collect()
    }
}

/// `S_m(z, q = −s)` for `s > 0`.
pub fn angular_negq(index: BasisIndex, s: f64, z: Complex64) -> Result<Complex64> {
    NegQAngular::new(index, s, DEFAULT_TOL)?.eval(z)
}

/// Modified radial function kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum RadialKind {
    /// `Ie_m`, `Io_m`: regular at the focal line, growing like `I_m`.
    FirstKindModified,
    /// `Ke_m`, `Ko_m`: decaying like `K_m`.
    OutgoingModified,
}

/// Radial value and `μ`-derivative, both multiplied by `e^{−ln_scale}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RadialValue {
    pub value: f64,
    pub derivative: f64,
    pub ln_scale: f64,
}

impl RadialValue {
    pub fn unscaled(&self) -> (f64, f64) {
        let f = self.ln_scale.exp();
        (self.value * f, self.derivative * f)
    }
}

/// Evaluates `Ie/Ke` (even) or `Io/Ko` (odd) at parameter `q = −s` from the
/// Bessel-product series of the `q = +s` partner.
#[derive(Debug, Clone)]
pub struct RadialEvaluator<'a> {
    index: BasisIndex,
    partner: &'a MathieuExpansion,
    reference: usize,
    delta: i64,
    plus: bool,
}

impl<'a> RadialEvaluator<'a> {
    pub fn new(index: BasisIndex, partner: &'a MathieuExpansion) -> Result<Self> {
        let (partner_index, _) = index.negq_partner();
        if partner.index() != partner_index {
            return Err(Error::InvalidInput(format!(
                "{} is not the positive-parameter partner of {index}",
                partner.index()
            )));
        }
        if !(partner.q() > 0.0) {
            return Err(Error::InvalidInput("radial functions need s > 0".into()));
        }
        let class = partner.class();
        let (delta, plus) = match class {
            HarmonicClass::CosEven => (0, true),
            HarmonicClass::SinOdd => (1, true),
            HarmonicClass::CosOdd => (1, false),
            HarmonicClass::SinEven => (2, false),
        };
        let reference = (0..partner.n_terms())
            .max_by(|&a, &b| partner.ln_abs[a].total_cmp(&partner.ln_abs[b]))
            .unwrap_or(0);
        Ok(Self {
            index,
            partner,
            reference,
            delta,
            plus,
        })
    }

    pub fn index(&self) -> BasisIndex {
        self.index
    }

    pub fn eval(&self, kind: RadialKind, mu: f64) -> Result<RadialValue> {
        let s = self.partner.q();
        if !(mu >= 0.0) || !mu.is_finite() {
            return Err(Error::InvalidInput(format!("radial coordinate must be non-negative, got {mu}")));
        }
        let root = s.sqrt();
        let ln_v2 = root.ln() + mu;
        if ln_v2 > 690.0 {
            return Err(Error::Range(format!("√s·e^μ = e^{ln_v2} is beyond the representable range")));
        }
        let v1 = root * (-mu).exp();
        let v2 = ln_v2.exp();
        let r = self.reference as i64;
        let delta = self.delta;
        let n = self.partner.n_terms();
        let top = n + self.reference + 2;
        let iv1 = ModifiedISeq::new(v1, top)?;
        let (iv2, kv2) = match kind {
            RadialKind::FirstKindModified => (Some(ModifiedISeq::new(v2, top)?), None),
            RadialKind::OutgoingModified => (None, Some(ModifiedKSeq::new(v2, top)?)),
        };
        // ln|Z_j(v2)|, sign, dlog
        let z = |j: i64| -> (f64, f64, f64) {
            match (&iv2, &kv2) {
                (Some(i), _) => (i.ln(j), 1.0, i.dlog(j)),
                (_, Some(kk)) => {
                    let sign = if j.rem_euclid(2) == 1 { -1.0 } else { 1.0 };
                    (kk.ln(j), sign, kk.dlog(j))
                }
                _ => unreachable!(),
            }
        };

        // terms: (ln|t|, sign, d ln t / dμ)
        let mut terms: Vec<(f64, f64, f64)> = Vec::with_capacity(2 * n);
        let mut per_k: Vec<usize> = Vec::with_capacity(n);
        for k in 0..n as i64 {
            let c_sign = self.partner.coeff_sign(k as usize) * if k % 2 == 1 { -1.0 } else { 1.0 };
            let lc = self.partner.ln_abs[k as usize];
            let a = k - r;
            let b = k + r + delta;
            let (lz, zs, zd) = z(b);
            terms.push((lc + iv1.ln(a) + lz, c_sign * zs, -v1 * iv1.dlog(a) + v2 * zd));
            let (lz, zs, zd) = z(a);
            let second = if self.plus { 1.0 } else { -1.0 };
            terms.push((lc + iv1.ln(b) + lz, c_sign * zs * second, -v1 * iv1.dlog(b) + v2 * zd));
            per_k.push(terms.len());
        }
        let peak = terms.iter().map(|t| t.0).fold(f64::NEG_INFINITY, f64::max);
        if !peak.is_finite() {
            return Err(Error::SeriesNoConvergence {
                what: format!("radial series of {} at s = {s}, μ = {mu}", self.index),
            });
        }
        let (mut value, mut deriv) = (0.0, 0.0);
        let mut quiet = 0;
        let mut start = 0;
        let mut converged = false;
        for (k, &end) in per_k.iter().enumerate() {
            let mut biggest: f64 = 0.0;
            for &(l, sg, dl) in &terms[start..end] {
                let t = sg * (l - peak).exp();
                value += t;
                deriv += t * dl;
                biggest = biggest.max(t.abs()).max((t * dl).abs());
            }
            start = end;
            if k > self.reference && biggest < 1e-15 * value.abs().max(deriv.abs()) {
                quiet += 1;
                if quiet == 3 {
                    converged = true;
                    break;
                }
            } else {
                quiet = 0;
            }
        }
        if !converged {
            return Err(Error::SeriesNoConvergence {
                what: format!("radial series of {} at s = {s}, μ = {mu}", self.index),
            });
        }

        // normalization (−1)^r c_r (2 if δ = r = 0) ((−1)^δ for the K type)
        let mut norm_sign = self.partner.coeff_sign(self.reference) * if r % 2 == 1 { -1.0 } else { 1.0 };
        if kind == RadialKind::OutgoingModified && delta % 2 == 1 {
            norm_sign = -norm_sign;
        }
        let mut ln_norm = self.partner.ln_abs[self.reference];
        if delta == 0 && r == 0 {
            ln_norm += LN_2;
        }
        Ok(RadialValue {
            value: norm_sign * value,
            derivative: norm_sign * deriv,
            ln_scale: peak - ln_norm,
        })
    }
}

/// `(value, d/dμ)` of `Ie_m/Io_m` or `Ke_m/Ko_m` at `q = −s`.
pub fn radial_modified(kind: RadialKind, index: BasisIndex, s: f64, mu: f64) -> Result<(f64, f64)> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::InvalidInput(format!("radial functions need s > 0, got {s}")));
    }
    let (partner_index, _) = index.negq_partner();
    let partner = build_expansion(partner_index, s, DEFAULT_TOL)?;
    let v = RadialEvaluator::new(index, &partner)?.eval(kind, mu)?;
    Ok(v.unscaled())
}

/// Human-readable name of a radial function, e.g. `Ke_3`.
pub fn radial_name(kind: RadialKind, index: BasisIndex) -> String {
    let letter = match kind {
        RadialKind::FirstKindModified => 'I',
        RadialKind::OutgoingModified => 'K',
    };
    let p = match index.parity {
        Parity::Even => 'e',
        Parity::Odd => 'o',
    };
    format!("{letter}{p}_{}", index.m)
}
