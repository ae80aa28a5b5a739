//! Scattering amplitudes of the elliptic cylinder and the plane.
//!
//! On the imaginary frequency axis the perfect-conductor problem splits into
//! a Dirichlet and a Neumann scalar channel; both T-matrices are diagonal in
//! the Mathieu basis.

use alloc::format;
use core::fmt;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::mathieu::{BasisIndex, MathieuExpansion, Parity, RadialEvaluator, RadialKind, DEFAULT_TOL};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum BoundaryCondition {
    Dirichlet,
    Neumann,
}

impl BoundaryCondition {
    pub const BOTH: [BoundaryCondition; 2] = [BoundaryCondition::Dirichlet, BoundaryCondition::Neumann];
}

impl fmt::Display for BoundaryCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundaryCondition::Dirichlet => "Dirichlet",
            BoundaryCondition::Neumann => "Neumann",
        })
    }
}

/// Surface `μ = μ0` in elliptic coordinates with interfocal half-width `d`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EllipticSurface {
    pub d: f64,
    pub mu0: f64,
}

impl EllipticSurface {
    pub fn new(d: f64, mu0: f64) -> Result<Self> {
        if !(d > 0.0) || !d.is_finite() {
            return Err(Error::InvalidInput(format!("interfocal half-width must be positive, got d = {d}")));
        }
        if !(mu0 >= 0.0) || !mu0.is_finite() {
            return Err(Error::InvalidInput(format!("surface coordinate must be non-negative, got mu0 = {mu0}")));
        }
        Ok(Self { d, mu0 })
    }

    pub fn strip(d: f64) -> Result<Self> {
        Self::new(d, 0.0)
    }

    /// Ellipse with semi-major axis `a` and eccentricity `e`.
    pub fn from_axis_eccentricity(a: f64, e: f64) -> Result<Self> {
        if !(e > 0.0 && e <= 1.0) {
            return Err(Error::InvalidInput(format!("eccentricity must lie in (0, 1], got {e}")));
        }
        Self::new(a * e, (1.0 / e).acosh())
    }

    pub fn is_strip(&self) -> bool {
        self.mu0 == 0.0
    }

    pub fn semi_major(&self) -> f64 {
        self.d * self.mu0.cosh()
    }

    pub fn semi_minor(&self) -> f64 {
        self.d * self.mu0.sinh()
    }
}

/// Whether the amplitude vanishes identically on the strip.
pub fn vanishes_on_strip(bc: BoundaryCondition, parity: Parity) -> bool {
    matches!(
        (bc, parity),
        (BoundaryCondition::Dirichlet, Parity::Odd) | (BoundaryCondition::Neumann, Parity::Even)
    )
}

/// T-matrix element in log form: `T = sign · e^{ln_abs}`; `sign == 0` marks
/// an exact zero.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogAmplitude {
    pub sign: f64,
    pub ln_abs: f64,
}

impl LogAmplitude {
    pub const ZERO: LogAmplitude = LogAmplitude {
        sign: 0.0,
        ln_abs: f64::NEG_INFINITY,
    };

    pub fn value(&self) -> f64 {
        if self.sign == 0.0 {
            0.0
        } else {
            self.sign * self.ln_abs.exp()
        }
    }

    fn ratio(num: f64, ln_num: f64, den: f64, ln_den: f64) -> Self {
        let r = -num / den;
        if r == 0.0 {
            return Self::ZERO;
        }
        Self {
            sign: r.signum(),
            ln_abs: (num.abs().ln() + ln_num) - (den.abs().ln() + ln_den),
        }
    }
}

/// Dirichlet and Neumann amplitudes of one mode, sharing the radial values.
pub fn t_elliptic_pair(index: BasisIndex, surface: EllipticSurface, partner: &MathieuExpansion) -> Result<[LogAmplitude; 2]> {
    let eval = RadialEvaluator::new(index, partner)?;
    let i = eval.eval(RadialKind::FirstKindModified, surface.mu0)?;
    let k = eval.eval(RadialKind::OutgoingModified, surface.mu0)?;
    let mut out = [LogAmplitude::ZERO; 2];
    for (slot, bc) in out.iter_mut().zip(BoundaryCondition::BOTH) {
        if surface.is_strip() && vanishes_on_strip(bc, index.parity) {
            continue;
        }
        *slot = match bc {
            BoundaryCondition::Dirichlet => LogAmplitude::ratio(i.value, i.ln_scale, k.value, k.ln_scale),
            BoundaryCondition::Neumann => LogAmplitude::ratio(i.derivative, i.ln_scale, k.derivative, k.ln_scale),
        };
    }
    Ok(out)
}

/// T-matrix element of the elliptic cylinder at `q = −s`.
pub fn t_elliptic(bc: BoundaryCondition, index: BasisIndex, surface: EllipticSurface, s: f64) -> Result<f64> {
    if !(s > 0.0) || !s.is_finite() {
        return Err(Error::InvalidInput(format!("s must be positive, got {s}")));
    }
    if surface.is_strip() && vanishes_on_strip(bc, index.parity) {
        return Ok(0.0);
    }
    let (partner_index, _) = index.negq_partner();
    let partner = crate::mathieu::build_expansion(partner_index, s, DEFAULT_TOL)?;
    let [d, n] = t_elliptic_pair(index, surface, &partner)?;
    Ok(match bc {
        BoundaryCondition::Dirichlet => d.value(),
        BoundaryCondition::Neumann => n.value(),
    })
}

/// Specular amplitude of the perfectly conducting plane.
///
/// A constant per channel; a frequency- or `k_x`-dependent plane response
/// would enter here.
pub fn t_plane(bc: BoundaryCondition) -> f64 {
    match bc {
        BoundaryCondition::Dirichlet => -1.0,
        BoundaryCondition::Neumann => 1.0,
    }
}
