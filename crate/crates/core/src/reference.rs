//! Independent checks: proximity force approximation, the circular
//! cylinder built from ordinary Bessel functions, and residuals of the
//! Green's-function and plane-wave expansions in Mathieu functions.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};

use num_complex::Complex64;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::bessel::{ModifiedISeq, ModifiedKSeq};
use crate::energy::QuadratureSpec;
use crate::exec::{Executor, Serial};
use crate::linalg::{log_det, SquareMatrix};
use crate::mathieu::{build_expansion, BasisIndex, NegQAngular, Parity, RadialEvaluator, RadialKind, RadialValue, DEFAULT_TOL};
use crate::quadrature::{integrate_vector, AdaptiveOptions};
use crate::scattering::{t_plane, BoundaryCondition};
use crate::{Error, Result};

/// Single Dirichlet half-plane perpendicular to a plane, `E·d²/(ħcL)` with
/// `d` the edge distance (parabolic-cylinder result from the literature).
pub const HALF_PLANE_SINGLE: f64 = -0.00674;
/// Two superposed half-planes forming the strip, `−0.00674 · 8/9`.
pub const HALF_PLANE_SUPERPOSED: f64 = -0.00599;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PfaInput {
    pub h: f64,
    pub d: f64,
    pub phi: f64,
}

/// Proximity-force estimate for the strip, in `E·d²/(ħcL)`.
pub fn pfa_energy(inp: PfaInput) -> Result<f64> {
    let PfaInput { h, d, phi } = inp;
    let (s, c) = phi.sin_cos();
    let den = h * h - d * d * s * s;
    if !(den > 0.0) || !(d > 0.0) || !(h > 0.0) {
        return Err(Error::InvalidInput(format!(
            "PFA needs H > d |sin phi| > 0, got H = {h}, d = {d}, phi = {phi}"
        )));
    }
    // orientations φ and π − φ are mirror images
    let c = if c.abs() < 1e-15 { 0.0 } else { c.abs() };
    Ok(-(PI * PI / 360.0) * h * d * c / (den * den) * d * d)
}

/// `(ln|T|, sign)` of the circular cylinder amplitudes at `x = pR`,
/// orders `0..=m_max`.
fn cylinder_amplitudes(bc: BoundaryCondition, x: f64, m_max: u32) -> Result<Vec<(f64, f64)>> {
    let i = ModifiedISeq::new(x, m_max as usize + 1)?;
    let k = ModifiedKSeq::new(x, m_max as usize + 1)?;
    (0..=m_max as i64)
        .map(|m| {
            let (ln_t, sign) = match bc {
                BoundaryCondition::Dirichlet => (i.ln(m) - k.ln(m), -1.0),
                // I'/K' = (I/K)(dlog I / dlog K), dlog K < 0
                BoundaryCondition::Neumann => {
                    let r = i.dlog(m) / k.dlog(m);
                    (i.ln(m) - k.ln(m) + r.abs().ln(), -r.signum())
                }
            };
            Ok((ln_t, sign))
        })
        .collect()
}

/// `log det(1 − T T^P U)` for the circular cylinder at momentum `p`.
///
/// Modes are `cos mθ` (`m = 0..=m_max`, weight `1/√2` at `m = 0`) and
/// `sin mθ` (`m = 1..=m_max`); the kernel entries are the closed forms
/// `Σ ± cos/sin(·Φ) K_{m±m'}(2pH)` with `Φ = π/2 + φ`.
pub fn cylinder_logdet(p: f64, r: f64, h: f64, phi: f64, bc: BoundaryCondition, m_max: u32) -> Result<f64> {
    if !(r > 0.0 && r < h) {
        return Err(Error::InvalidInput(format!("need 0 < R < H, got R = {r}, H = {h}")));
    }
    let t = cylinder_amplitudes(bc, p * r, m_max)?;
    let kk = ModifiedKSeq::new(2.0 * p * h, 2 * m_max as usize)?;
    let big_phi = FRAC_PI_2 + phi;
    let modes: Vec<(Parity, i64)> = (0..=m_max as i64)
        .map(|m| (Parity::Even, m))
        .chain((1..=m_max as i64).map(|m| (Parity::Odd, m)))
        .collect();
    let tp = t_plane(bc);
    let n = modes.len();
    let m = SquareMatrix::from_fn(n, |a, b| {
        let (pa, ma) = modes[a];
        let (pb, mb) = modes[b];
        let c = |m: i64| if m == 0 { core::f64::consts::FRAC_1_SQRT_2 } else { 1.0 };
        let diff = (ma - mb) as f64;
        let sum = (ma + mb) as f64;
        // (coefficient, order) pairs
        let terms: [(f64, i64); 2] = match (pa, pb) {
            (Parity::Even, Parity::Even) => [
                (c(ma) * c(mb) * (diff * big_phi).cos(), ma + mb),
                (c(ma) * c(mb) * (sum * big_phi).cos(), ma - mb),
            ],
            (Parity::Odd, Parity::Odd) => [((diff * big_phi).cos(), ma + mb), (-(sum * big_phi).cos(), ma - mb)],
            (Parity::Even, Parity::Odd) => [(c(ma) * (sum * big_phi).sin(), ma - mb), (c(ma) * (-diff * big_phi).sin(), ma + mb)],
            (Parity::Odd, Parity::Even) => [(c(mb) * (sum * big_phi).sin(), mb - ma), (c(mb) * (diff * big_phi).sin(), ma + mb)],
        };
        let (ta, sa) = t[ma as usize];
        let (tb, _) = t[mb as usize];
        let half = 0.5 * (ta + tb);
        let coupling: f64 = terms
            .iter()
            .map(|&(coef, order)| if coef == 0.0 { 0.0 } else { coef * (half + kk.ln(order)).exp() })
            .sum::<f64>()
            * sa
            * tp;
        if a == b {
            1.0 - coupling
        } else {
            -coupling
        }
    });
    let (sign, ld) = log_det(&m);
    if !(sign > 0.0) {
        return Err(Error::Determinant {
            p,
            bc,
            reason: format!("circular oracle, R = {r}, H = {h}, m_max = {m_max}"),
        });
    }
    Ok(ld)
}

/// Circular cylinder (radius `R`, axis at height `H`) above the plane, one
/// channel, in `E·H²/(ħcL)`.
pub fn cylinder_plane_energy(r: f64, h: f64, bc: BoundaryCondition, m_max: u32, quad: &QuadratureSpec) -> Result<f64> {
    cylinder_plane_energy_with(&Serial, r, h, bc, m_max, quad)
}

pub fn cylinder_plane_energy_with<E: Executor>(
    exec: &E,
    r: f64,
    h: f64,
    bc: BoundaryCondition,
    m_max: u32,
    quad: &QuadratureSpec,
) -> Result<f64> {
    quad.validate()?;
    if !(r > 0.0 && r < h) || !h.is_finite() {
        return Err(Error::InvalidInput(format!("need 0 < R < H, got R = {r}, H = {h}")));
    }
    let gap = h - r;
    let prefactor = h * h / (4.0 * PI);
    let f = |t: f64| -> Result<Vec<f64>> {
        let p = -t.ln() / (2.0 * gap);
        if p * gap < 1e-7 || p * gap > quad.p_max_factor {
            return Ok(alloc::vec![0.0]);
        }
        let ld = cylinder_logdet(p, r, h, 0.0, bc, m_max)?;
        Ok(alloc::vec![ld * p / (2.0 * gap * t) * prefactor])
    };
    let opts = AdaptiveOptions {
        rel_tol: quad.p_rel_tol,
        abs_tol: 1e-14 * prefactor / (gap * gap),
        initial_intervals: quad.p_intervals_initial,
        max_intervals: quad.p_intervals_max,
    };
    Ok(integrate_vector(exec, f, 0.0, 1.0, 1, &opts)?.values[0])
}

/// Elliptic coordinates `(μ, θ)` of the Cartesian point `(x, y)`.
pub fn to_elliptic(x: f64, y: f64, d: f64) -> (f64, f64) {
    let w = Complex64::new(x / d, y / d).acosh();
    let (mut mu, mut theta) = (w.re, w.im);
    if mu < 0.0 {
        mu = -mu;
        theta = -theta;
    }
    (mu, theta.rem_euclid(2.0 * PI))
}

fn product(a: RadialValue, b: RadialValue) -> f64 {
    a.value * b.value * (a.ln_scale + b.ln_scale).exp()
}

/// Relative gap between the Mathieu expansion of the free Green's function
/// and `K_0(p|ρ1 − ρ2|)/2π`.
pub fn greens_equivalence_residual(p: f64, point1: (f64, f64), point2: (f64, f64), d: f64, m_sum_max: u32) -> Result<f64> {
    let sep = ((point1.0 - point2.0).powi(2) + (point1.1 - point2.1).powi(2)).sqrt();
    if !(sep > 0.0) || !(p > 0.0) || !(d > 0.0) {
        return Err(Error::InvalidInput("need distinct points, p > 0 and d > 0".into()));
    }
    let (mu1, th1) = to_elliptic(point1.0, point1.1, d);
    let (mu2, th2) = to_elliptic(point2.0, point2.1, d);
    let (lo, hi) = if mu1 <= mu2 { (mu1, mu2) } else { (mu2, mu1) };
    let s = 0.25 * d * d * p * p;
    let mut sum = 0.0;
    for m in 0..=m_sum_max {
        for parity in [Parity::Even, Parity::Odd] {
            let Ok(idx) = BasisIndex::new(parity, m) else { continue };
            let partner = build_expansion(idx.negq_partner().0, s, DEFAULT_TOL)?;
            let radial = RadialEvaluator::new(idx, &partner)?;
            let i = radial.eval(RadialKind::FirstKindModified, lo)?;
            let k = radial.eval(RadialKind::OutgoingModified, hi)?;
            let ang = NegQAngular::from_partner(idx, partner.clone())?;
            let a1 = ang.eval(Complex64::new(th1, 0.0))?.re;
            let a2 = ang.eval(Complex64::new(th2, 0.0))?.re;
            sum += a1 * a2 * product(i, k);
        }
    }
    let series = sum / PI;
    let exact = crate::bessel::bessel_k(0, p * sep)? / (2.0 * PI);
    Ok(((series - exact) / exact).abs())
}

/// Relative gap between the imaginary-frequency plane wave
/// `exp(i k_x x − √(p² + k_x²) y)`, `p² = κ² + k_z²`, and its expansion
/// `2 Σ (−1)^m [Se_m(φ) Se_m(θ) Ie_m(μ) + So_m(φ) So_m(θ) Io_m(μ)]` with the
/// complex angle `φ = π/2 + iu`, `sinh u = k_x/p`.
pub fn planewave_expansion_residual(kappa: f64, k_x: f64, k_z: f64, point: (f64, f64), d: f64, m_sum_max: u32) -> Result<f64> {
    if !(kappa > 0.0) || !(d > 0.0) {
        return Err(Error::InvalidInput("need kappa > 0 and d > 0".into()));
    }
    let p = (kappa * kappa + k_z * k_z).sqrt();
    let (x, y) = point;
    let lhs = Complex64::new(0.0, k_x * x).exp() * (-(p * p + k_x * k_x).sqrt() * y).exp();
    let u = (k_x / p).asinh();
    let angle = Complex64::new(FRAC_PI_2, u);
    let (mu, theta) = to_elliptic(x, y, d);
    let s = 0.25 * d * d * p * p;
    let mut sum = Complex64::new(0.0, 0.0);
    for m in 0..=m_sum_max {
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        for parity in [Parity::Even, Parity::Odd] {
            let Ok(idx) = BasisIndex::new(parity, m) else { continue };
            let partner = build_expansion(idx.negq_partner().0, s, DEFAULT_TOL)?;
            let radial = RadialEvaluator::new(idx, &partner)?.eval(RadialKind::FirstKindModified, mu)?;
            let ang = NegQAngular::from_partner(idx, partner)?;
            let a = ang.eval(angle)?;
            let b = ang.eval(Complex64::new(theta, 0.0))?.re;
            sum += a * b * (radial.value * radial.ln_scale.exp()) * sign;
        }
    }
    let rhs = sum * 2.0;
    Ok((rhs - lhs).norm() / lhs.norm())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pfa_closed_forms() {
        let at = |h: f64, phi: f64| pfa_energy(PfaInput { h, d: 1.0, phi }).unwrap();
        assert_eq!(at(2.0, FRAC_PI_2), 0.0);
        assert!((at(2.0, 0.0) + PI * PI / 2880.0).abs() < 1e-16);
        assert!((at(2.0, PI / 4.0) + 3.165e-3).abs() < 1e-6);
        for h in [1.5, 3.0, 6.0] {
            assert!((at(h, 0.0) + PI * PI / (360.0 * h * h * h)).abs() < 1e-16);
        }
        assert!(pfa_energy(PfaInput { h: 0.5, d: 1.0, phi: FRAC_PI_2 }).is_err());
    }

    #[test]
    fn half_plane_constants() {
        assert!((HALF_PLANE_SINGLE * 8.0 / 9.0 - HALF_PLANE_SUPERPOSED).abs() < 1e-5);
    }

    #[test]
    fn elliptic_chart_round_trip() {
        for (x, y) in [(0.3, 0.2), (-1.4, 0.9), (2.0, -3.0), (0.0, 1.5)] {
            let (mu, th) = to_elliptic(x, y, 1.0);
            assert!(mu >= 0.0);
            assert!((mu.cosh() * th.cos() - x).abs() < 1e-12);
            assert!((mu.sinh() * th.sin() - y).abs() < 1e-12);
        }
    }

    #[test]
    fn greens_function_expansion_converges() {
        let a = (0.05f64.cosh() * 0.7f64.cos(), 0.05f64.sinh() * 0.7f64.sin());
        let b = (a.0 + 3.0 * 0.6, a.1 + 3.0 * 0.8);
        let mut prev = f64::INFINITY;
        for m in [2, 4, 8, 12] {
            let r = greens_equivalence_residual(1.0, a, b, 1.0, m).unwrap();
            assert!(r < prev, "m={m} r={r}");
            prev = r;
        }
        assert!(prev < 1e-8, "{prev}");
        let swapped = greens_equivalence_residual(1.0, b, a, 1.0, 12).unwrap();
        assert!((swapped - prev).abs() < 1e-14);
    }

    #[test]
    fn plane_wave_expansion_converges() {
        let point = (0.5f64.cosh() * 0.9f64.cos(), 0.5f64.sinh() * 0.9f64.sin());
        let r = planewave_expansion_residual(1.0, 0.0, 0.3, point, 1.0, 10).unwrap();
        assert!(r < 1e-9, "{r}");
        let a = planewave_expansion_residual(1.0, 0.7, 0.3, point, 1.0, 14).unwrap();
        let b = planewave_expansion_residual(1.0, -0.7, 0.3, (point.0, -point.1), 1.0, 14).unwrap();
        assert!(a < 1e-8 && b < 1e-8, "{a} {b}");
    }

    #[test]
    fn cylinder_oracle_far_and_channels() {
        let q = QuadratureSpec::default();
        let d = cylinder_plane_energy(0.25, 1.0, BoundaryCondition::Dirichlet, 6, &q).unwrap();
        let n = cylinder_plane_energy(0.25, 1.0, BoundaryCondition::Neumann, 6, &q).unwrap();
        assert!(d < n && n < 0.0, "{d} {n}");
        let far = cylinder_plane_energy(0.25, 1e4, BoundaryCondition::Dirichlet, 6, &q).unwrap();
        // compare E/(ħcL) itself, not the H²-scaled value
        assert!(far.abs() / 1e8 < 1e-6 * d.abs());
    }

    #[test]
    fn cylinder_logdet_independent_of_angle() {
        let a = cylinder_logdet(0.8, 0.4, 1.0, 0.0, BoundaryCondition::Neumann, 6).unwrap();
        let b = cylinder_logdet(0.8, 0.4, 1.0, 0.9, BoundaryCondition::Neumann, 6).unwrap();
        assert!((a - b).abs() < 1e-13 * a.abs());
    }
}
