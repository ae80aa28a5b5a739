//! Gauss–Legendre rules and adaptive Gauss–Kronrod integration of
//! vector-valued integrands.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

#[allow(unused_imports)] // shadowed by inherent methods when std is linked
use num_traits::Float;

use crate::exec::Executor;
use crate::{Error, Result};

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pn1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pn1) / (z * z - 1.0);
            let dz = pn / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

const XGK: [f64; 11] = [
    0.995_657_163_025_808_1,
    0.973_906_528_517_171_7,
    0.930_157_491_355_708_2,
    0.865_063_366_688_984_5,
    0.780_817_726_586_416_9,
    0.679_409_568_299_024_4,
    0.562_757_134_668_604_7,
    0.433_395_394_129_247_2,
    0.294_392_862_701_460_2,
    0.148_874_338_981_631_2,
    0.0,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874,
    0.032_558_162_307_964_73,
    0.054_755_896_574_352,
    0.075_039_674_810_919_95,
    0.093_125_454_583_697_6,
    0.109_387_158_802_297_64,
    0.123_491_976_262_065_85,
    0.134_709_217_311_473_33,
    0.142_775_938_577_060_08,
    0.147_739_104_901_338_5,
    0.149_445_554_002_916_9,
];
// 10-point Gauss weights at XGK[1], XGK[3], ..., XGK[9]
const WG: [f64; 5] = [
    0.066_671_344_308_688_14,
    0.149_451_349_150_580_6,
    0.219_086_362_515_982_04,
    0.269_266_719_309_996_36,
    0.295_524_224_714_752_87,
];

/// The 21 Kronrod abscissae of `[a, b]` in increasing order.
fn kronrod_nodes(a: f64, b: f64) -> [f64; 21] {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut out = [0.0; 21];
    for j in 0..10 {
        out[j] = c - h * XGK[j];
        out[20 - j] = c + h * XGK[j];
    }
    out[10] = c;
    out
}

fn kronrod_weights() -> ([f64; 21], [f64; 21]) {
    let mut wk = [0.0; 21];
    let mut wg = [0.0; 21];
    for j in 0..10 {
        wk[j] = WGK[j];
        wk[20 - j] = WGK[j];
        if j % 2 == 1 {
            wg[j] = WG[j / 2];
            wg[20 - j] = WG[j / 2];
        }
    }
    wk[10] = WGK[10];
    (wk, wg)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub initial_intervals: usize,
    pub max_intervals: usize,
}

impl Default for AdaptiveOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-7,
            abs_tol: 1e-15,
            initial_intervals: 4,
            max_intervals: 400,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VectorIntegral {
    pub values: Vec<f64>,
    pub errors: Vec<f64>,
    pub evaluations: usize,
    pub intervals: usize,
}

struct Piece {
    a: f64,
    b: f64,
    value: Vec<f64>,
    error: Vec<f64>,
}

/// Integrates `f: [a, b] → R^dim` with 21-point Gauss–Kronrod panels.
///
/// Each round evaluates every new panel's nodes through `exec`, then bisects
/// the worst panels that together carry half of the remaining error. All
/// decisions and sums depend only on the evaluated values and the panel
/// order, so the result does not depend on how `exec` schedules work.
pub fn integrate_vector<E, F>(exec: &E, f: F, a: f64, b: f64, dim: usize, opts: &AdaptiveOptions) -> Result<VectorIntegral>
where
    E: Executor,
    F: Fn(f64) -> Result<Vec<f64>> + Sync + Send,
{
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(Error::InvalidInput(format!("integration interval [{a}, {b}] is empty or infinite")));
    }
    let (wk, wg) = kronrod_weights();
    let n0 = opts.initial_intervals.max(1);
    let mut pending: Vec<(f64, f64)> = (0..n0)
        .map(|i| (a + (b - a) * i as f64 / n0 as f64, if i + 1 == n0 { b } else { a + (b - a) * (i + 1) as f64 / n0 as f64 }))
        .collect();
    let mut done: Vec<Piece> = Vec::new();
    let mut evaluations = 0;

    loop {
        let nodes: Vec<f64> = pending.iter().flat_map(|&(lo, hi)| kronrod_nodes(lo, hi)).collect();
        let samples = exec.map(nodes.len(), |i| f(nodes[i]));
        evaluations += nodes.len();
        let mut samples = samples.into_iter();
        for &(lo, hi) in &pending {
            let h = 0.5 * (hi - lo);
            let mut kr = vec![0.0; dim];
            let mut ga = vec![0.0; dim];
            for j in 0..21 {
                let v = samples.next().expect("one sample per node")?;
                if v.len() != dim {
                    return Err(Error::InvalidInput(format!("integrand returned {} components, expected {dim}", v.len())));
                }
                for c in 0..dim {
                    kr[c] += wk[j] * v[c];
                    ga[c] += wg[j] * v[c];
                }
            }
            let error = kr.iter().zip(&ga).map(|(k, g)| (h * (k - g)).abs()).collect();
            let value = kr.iter().map(|k| h * k).collect();
            let piece = Piece { a: lo, b: hi, value, error };
            let at = done.partition_point(|p| p.a < lo);
            done.insert(at, piece);
        }

        let mut total = vec![0.0; dim];
        let mut err = vec![0.0; dim];
        for p in &done {
            for c in 0..dim {
                total[c] += p.value[c];
                err[c] += p.error[c];
            }
        }
        let tol: Vec<f64> = total.iter().map(|v| (opts.rel_tol * v.abs()).max(opts.abs_tol)).collect();
        if err.iter().zip(&tol).all(|(e, t)| e <= t) {
            return Ok(VectorIntegral {
                values: total,
                errors: err,
                evaluations,
                intervals: done.len(),
            });
        }
        if done.len() >= opts.max_intervals {
            let worst = err.iter().zip(&tol).map(|(e, t)| e / t).fold(0.0, f64::max);
            return Err(Error::Integration(format!(
                "{} panels used, error is {worst:.3e} times the tolerance",
                done.len()
            )));
        }

        let badness: Vec<f64> = done
            .iter()
            .map(|p| p.error.iter().zip(&tol).map(|(e, t)| e / t).fold(0.0, f64::max))
            .collect();
        let sum: f64 = badness.iter().sum();
        let mut order: Vec<usize> = (0..done.len()).collect();
        order.sort_by(|&i, &j| badness[j].total_cmp(&badness[i]).then(i.cmp(&j)));
        let budget = opts.max_intervals - done.len();
        let mut split = Vec::new();
        let mut acc = 0.0;
        for &i in &order {
            if acc >= 0.5 * sum || split.len() >= budget {
                break;
            }
            acc += badness[i];
            split.push(i);
        }
        split.sort_unstable();
        pending.clear();
        for &i in split.iter().rev() {
            let p = done.remove(i);
            let mid = 0.5 * (p.a + p.b);
            pending.push((p.a, mid));
            pending.push((mid, p.b));
        }
        pending.sort_by(|x, y| x.0.total_cmp(&y.0));
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exec::Serial;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for n in [1, 2, 5, 40, 81] {
            let (x, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-13);
            for deg in (0..2 * n).step_by(2).take(8) {
                let got: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32)).sum();
                assert!((got - 2.0 / (deg as f64 + 1.0)).abs() < 1e-13, "n={n} deg={deg}");
            }
        }
    }

    #[test]
    fn kronrod_weights_sum_to_two() {
        let (wk, wg) = kronrod_weights();
        assert!((wk.iter().sum::<f64>() - 2.0).abs() < 1e-15);
        assert!((wg.iter().sum::<f64>() - 2.0).abs() < 1e-15);
    }

    #[test]
    fn adaptive_vector_integration() {
        let f = |x: f64| Ok(vec![x.sqrt(), (-x).exp() * x.ln().abs(), (10.0 * x).sin()]);
        let r = integrate_vector(&Serial, f, 0.0, 1.0, 3, &AdaptiveOptions { rel_tol: 1e-10, ..Default::default() }).unwrap();
        // ∫ e^{-x}|ln x| on (0, 1) = γ + E1(1) = 0.5772156649 + 0.2193839344
        let want = [2.0 / 3.0, 0.796_599_599_297_053, (1.0 - 10f64.cos()) / 10.0];
        for c in 0..3 {
            assert!((r.values[c] - want[c]).abs() < 1e-9, "{c}: {}", r.values[c]);
        }
    }

    #[test]
    fn errors_propagate() {
        let f = |x: f64| if x > 0.5 { Err(Error::Range("x".into())) } else { Ok(vec![x]) };
        assert!(integrate_vector(&Serial, f, 0.0, 1.0, 1, &AdaptiveOptions::default()).is_err());
    }
}
