//! Globally adaptive Gauss–Kronrod (7/15) quadrature for complex integrands.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};
use crate::Complex;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224,
    0.063_092_092_629_978_56,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_82,
];

// Gauss weights for XGK[1], XGK[3], XGK[5] and the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_64,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

pub const DEFAULT_MAX_INTERVALS: usize = 4000;

#[derive(Clone, Copy, Debug)]
pub struct QuadratureResult {
    pub value: Complex,
    pub error: f64,
    pub intervals: usize,
}

struct Segment {
    a: f64,
    b: f64,
    value: Complex,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn kronrod15<F: Fn(f64) -> Complex>(f: &F, a: f64, b: f64) -> Segment {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let pair = f(centre - half * x) + f(centre + half * x);
        kronrod += pair * w;
        if j % 2 == 1 {
            gauss += pair * WG[j / 2];
        }
    }
    Segment {
        a,
        b,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).norm(),
    }
}

/// Integrates `f` over `[a, b]` until the summed error estimate is at most `abs_tol`.
///
/// The interval with the largest error is bisected first; endpoint
/// singularities therefore attract refinement automatically.
pub fn integrate<F: Fn(f64) -> Complex>(
    f: F,
    a: f64,
    b: f64,
    abs_tol: f64,
    max_intervals: usize,
) -> Result<QuadratureResult> {
    let mut heap = BinaryHeap::new();
    let first = kronrod15(&f, a, b);
    let mut total_err = first.error;
    heap.push(first);
    while total_err > abs_tol {
        if heap.len() >= max_intervals {
            return Err(Error::QuadratureFailure {
                tolerance: abs_tol,
                estimate: total_err,
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            return Err(Error::QuadratureFailure {
                tolerance: abs_tol,
                estimate: total_err,
            });
        }
        let left = kronrod15(&f, worst.a, mid);
        let right = kronrod15(&f, mid, worst.b);
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        // Rebuild the sum occasionally so cancellation drift cannot stall the loop.
        if heap.len() % 64 == 0 {
            total_err = heap.iter().map(|s| s.error).sum();
        }
    }
    let intervals = heap.len();
    let mut segments = heap.into_vec();
    segments.sort_by(|x, y| x.a.total_cmp(&y.a));
    let value = segments.iter().map(|s| s.value).sum();
    Ok(QuadratureResult {
        value,
        error: total_err,
        intervals,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x| Complex::new(x.powi(5), -x * x), 0.0, 2.0, 1e-12, 100).unwrap();
        assert!((r.value - Complex::new(64.0 / 6.0, -8.0 / 3.0)).norm() < 1e-12);
        assert_eq!(r.intervals, 1);
    }

    #[test]
    fn inverse_sqrt_endpoint() {
        let r = integrate(|x| Complex::new(1.0 / x.sqrt(), 0.0), 0.0, 1.0, 1e-10, 4000).unwrap();
        assert!((r.value.re - 2.0).abs() < 1e-9, "{}", r.value.re);
    }

    #[test]
    fn log_endpoint() {
        // ∫₀¹ -ln x dx = 1
        let r = integrate(|x| Complex::new(-x.ln(), 0.0), 0.0, 1.0, 1e-11, 4000).unwrap();
        assert!((r.value.re - 1.0).abs() < 1e-10);
    }

    #[test]
    fn reports_failure_when_budget_is_too_small() {
        let r = integrate(|x| Complex::new(1.0 / x.sqrt(), 0.0), 0.0, 1.0, 1e-14, 4);
        assert!(matches!(r, Err(Error::QuadratureFailure { .. })));
    }
}
