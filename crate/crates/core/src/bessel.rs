//! Modified cylindrical Bessel functions `I_n(x)` and `K_n(x)` of integer order.
//!
//! Sequences are held in log form together with the logarithmic derivative
//! `f'(x)/f(x)`, so products such as `I_j(v1) K_k(v2)` can be formed without
//! intermediate overflow for any order or argument that appears in the
//! Mathieu product series.
//!
//! `I_n` comes from backward continued-fraction ratios normalized with
//! `e^x = I_0 + 2 Σ I_k`; `K_0`, `K_1` come from the power series for
//! `x <= 2` and Steed's continued fraction above, followed by upward
//! recurrence.

use alloc::vec;
use alloc::vec::Vec;
#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::{Error, Result};

const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `ln I_n(x)` and `I_n'(x)/I_n(x)` for `n = 0..=n_max`.
#[derive(Debug, Clone)]
pub struct ModifiedISeq {
    x: f64,
    ln: Vec<f64>,
    dlog: Vec<f64>,
}

impl ModifiedISeq {
    pub fn new(x: f64, n_max: usize) -> Result<Self> {
        if !(x >= 0.0) || !x.is_finite() {
            return Err(Error::InvalidInput(alloc::format!(
                "Bessel I argument must be finite and non-negative, got {x}"
            )));
        }
        if x == 0.0 {
            let mut ln = vec![f64::NEG_INFINITY; n_max + 1];
            ln[0] = 0.0;
            let mut dlog = vec![f64::INFINITY; n_max + 1];
            dlog[0] = 0.0;
            return Ok(Self { x, ln, dlog });
        }

        // ratios[k] = I_{k+1}(x) / I_k(x), minimal solution of the recurrence
        let tail = (x + 12.0 * x.sqrt()).ceil() as usize;
        let top = n_max.max(tail) + 48;
        let mut ratios = vec![0.0; top + 1];
        let mut r = x / (2.0 * (top as f64 + 1.0) + x);
        for k in (0..=top).rev() {
            r = 1.0 / (2.0 * (k as f64 + 1.0) / x + r);
            ratios[k] = r;
        }

        // e^x = I_0 (1 + 2 Σ_{k>=1} I_k/I_0)
        let mut sum = 1.0;
        let mut prod = 1.0;
        for &rk in ratios.iter().take(top) {
            prod *= rk;
            sum += 2.0 * prod;
            if prod < 1e-18 * sum {
                break;
            }
        }
        let ln_i0 = x - sum.ln();

        let mut ln = Vec::with_capacity(n_max + 1);
        let mut dlog = Vec::with_capacity(n_max + 1);
        ln.push(ln_i0);
        dlog.push(ratios[0]);
        for k in 1..=n_max {
            ln.push(ln[k - 1] + ratios[k - 1].ln());
            dlog.push(1.0 / ratios[k - 1] - k as f64 / x);
        }
        Ok(Self { x, ln, dlog })
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn n_max(&self) -> usize {
        self.ln.len() - 1
    }

    /// `ln I_n(x)`; orders are taken in absolute value (`I_{-n} = I_n`).
    pub fn ln(&self, n: i64) -> f64 {
        self.ln[n.unsigned_abs() as usize]
    }

    /// `I_n'(x) / I_n(x)`.
    pub fn dlog(&self, n: i64) -> f64 {
        self.dlog[n.unsigned_abs() as usize]
    }

    pub fn value(&self, n: i64) -> f64 {
        self.ln(n).exp()
    }

    pub fn derivative(&self, n: i64) -> f64 {
        if n == 0 {
            return self.value(1);
        }
        self.value(n) * self.dlog(n)
    }
}

/// `ln K_n(x)` and `K_n'(x)/K_n(x)` for `n = 0..=n_max`.
#[derive(Debug, Clone)]
pub struct ModifiedKSeq {
    x: f64,
    ln: Vec<f64>,
    dlog: Vec<f64>,
}

impl ModifiedKSeq {
    pub fn new(x: f64, n_max: usize) -> Result<Self> {
        if !(x > 0.0) || !x.is_finite() {
            return Err(Error::InvalidInput(alloc::format!(
                "Bessel K argument must be finite and positive, got {x}"
            )));
        }
        let (ln_k0, ln_k1) = ln_k01(x);
        let mut ln = Vec::with_capacity(n_max + 2);
        let mut dlog = Vec::with_capacity(n_max + 1);
        ln.push(ln_k0);
        ln.push(ln_k1);
        // t = K_{k+1}/K_k, grows monotonically so upward recurrence is stable
        let mut t = (ln_k1 - ln_k0).exp();
        dlog.push(-t);
        for k in 1..=n_max {
            let prev = t;
            dlog.push(-1.0 / prev - k as f64 / x);
            t = 1.0 / prev + 2.0 * k as f64 / x;
            ln.push(ln[k] + t.ln());
        }
        ln.truncate(n_max + 1);
        Ok(Self { x, ln, dlog })
    }

    pub fn x(&self) -> f64 {
        self.x
    }

    pub fn n_max(&self) -> usize {
        self.ln.len() - 1
    }

    /// `ln K_n(x)`; `K_{-n} = K_n`.
    pub fn ln(&self, n: i64) -> f64 {
        self.ln[n.unsigned_abs() as usize]
    }

    pub fn dlog(&self, n: i64) -> f64 {
        self.dlog[n.unsigned_abs() as usize]
    }

    pub fn value(&self, n: i64) -> f64 {
        self.ln(n).exp()
    }

    pub fn derivative(&self, n: i64) -> f64 {
        self.value(n) * self.dlog(n)
    }
}

/// `(ln K_0(x), ln K_1(x))` for `x > 0`.
fn ln_k01(x: f64) -> (f64, f64) {
    if x <= 2.0 {
        let y = 0.25 * x * x;
        let mut term = 1.0;
        let mut harmonic = 0.0;
        let mut i0 = 1.0;
        let mut i1 = 1.0;
        let mut series = 0.0;
        let mut i1_term = 1.0;
        for k in 1..60 {
            let kf = k as f64;
            term *= y / (kf * kf);
            harmonic += 1.0 / kf;
            i0 += term;
            series += term * harmonic;
            i1_term *= y / (kf * (kf + 1.0));
            i1 += i1_term;
            if term < 1e-18 * i0 {
                break;
            }
        }
        let i1 = 0.5 * x * i1;
        let k0 = -((0.5 * x).ln() + EULER_GAMMA) * i0 + series;
        // Wronskian I_0 K_1 + I_1 K_0 = 1/x
        let k1 = (1.0 / x - i1 * k0) / i0;
        (k0.ln(), k1.ln())
    } else {
        // Steed's continued fraction CF2 for order zero
        let a1 = 0.25;
        let mut b = 2.0 * (1.0 + x);
        let mut d = 1.0 / b;
        let mut h = d;
        let mut delh = d;
        let mut q1 = 0.0;
        let mut q2 = 1.0;
        let mut q = a1;
        let mut c = a1;
        let mut a = -a1;
        let mut s = 1.0 + q * delh;
        for i in 2..10_000 {
            let fi = i as f64;
            a -= 2.0 * (fi - 1.0);
            c = -a * c / fi;
            let qnew = (q1 - b * q2) / a;
            q1 = q2;
            q2 = qnew;
            q += c * qnew;
            b += 2.0;
            d = 1.0 / (b + a * d);
            delh *= b * d - 1.0;
            h += delh;
            let dels = q * delh;
            s += dels;
            if (dels / s).abs() < 1e-17 {
                break;
            }
        }
        h *= a1;
        let ln_k0 = 0.5 * (core::f64::consts::PI / (2.0 * x)).ln() - x - s.ln();
        let ln_k1 = ln_k0 + ((x + 0.5 - h) / x).ln();
        (ln_k0, ln_k1)
    }
}

/// `I_n(x)` for a single order.
pub fn bessel_i(n: u32, x: f64) -> Result<f64> {
    Ok(ModifiedISeq::new(x, n as usize)?.value(n as i64))
}

/// `K_n(x)` for a single order.
pub fn bessel_k(n: u32, x: f64) -> Result<f64> {
    Ok(ModifiedKSeq::new(x, n as usize)?.value(n as i64))
}

/// `ln K_n(x)`, usable where `K_n` itself would overflow or underflow.
pub fn ln_bessel_k(n: u32, x: f64) -> Result<f64> {
    Ok(ModifiedKSeq::new(x, n as usize)?.ln(n as i64))
}
