//! Truncated power series over complex coefficients.
//!
//! A [`CoefficientSeries`] of order `N` holds `a_0..=a_N` and represents the
//! polynomial `Σ a_n z^n`. Arithmetic truncates to the common order.
//! Evaluation reports a tail estimate for the discarded terms so callers can
//! tell when a truncated sum is no longer trustworthy near the unit circle.

use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Complex;

/// `|a_0|` at or below this value is treated as zero by [`CoefficientSeries::reciprocal`].
pub const RECIPROCAL_FLOOR: f64 = 1e-9;

/// Evaluations whose tail estimate exceeds this are flagged unreliable.
pub const TAIL_TOLERANCE: f64 = 1e-6;

/// Upper guard on the fitted coefficient ratio used by the tail model.
const RATIO_CAP: f64 = 1.0 - 1e-12;

/// Truncated Taylor coefficients `a_0..=a_N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SeriesRepr", into = "SeriesRepr")]
pub struct CoefficientSeries {
    coeffs: Vec<Complex>,
}

#[derive(Serialize, Deserialize)]
struct SeriesRepr {
    order: usize,
    coeffs: Vec<[f64; 2]>,
}

impl TryFrom<SeriesRepr> for CoefficientSeries {
    type Error = Error;

    fn try_from(repr: SeriesRepr) -> Result<Self> {
        if repr.coeffs.len() != repr.order + 1 {
            return Err(Error::Parse(format!(
                "order {} requires {} coefficients, found {}",
                repr.order,
                repr.order + 1,
                repr.coeffs.len()
            )));
        }
        CoefficientSeries::new(
            repr.coeffs
                .into_iter()
                .map(|[re, im]| Complex::new(re, im))
                .collect(),
        )
    }
}

impl From<CoefficientSeries> for SeriesRepr {
    fn from(s: CoefficientSeries) -> Self {
        SeriesRepr {
            order: s.order(),
            coeffs: s.coeffs.iter().map(|c| [c.re, c.im]).collect(),
        }
    }
}

impl CoefficientSeries {
    /// Builds a series from `a_0..=a_N`; at least two coefficients are required.
    pub fn new(coeffs: Vec<Complex>) -> Result<Self> {
        if coeffs.len() < 2 {
            return Err(Error::InvalidParameter(
                "a series needs truncation order N >= 1".into(),
            ));
        }
        if coeffs.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidParameter(
                "series coefficients must be finite".into(),
            ));
        }
        Ok(Self { coeffs })
    }

    pub fn from_real(coeffs: &[f64]) -> Result<Self> {
        Self::new(coeffs.iter().map(|&x| Complex::new(x, 0.0)).collect())
    }

    pub fn zeros(order: usize) -> Self {
        Self {
            coeffs: vec![Complex::new(0.0, 0.0); order.max(1) + 1],
        }
    }

    /// `value · z^k` truncated at `order`.
    pub fn monomial(k: usize, value: Complex, order: usize) -> Self {
        let mut s = Self::zeros(order);
        if k <= s.order() {
            s.coeffs[k] = value;
        }
        s
    }

    pub fn constant(value: Complex, order: usize) -> Self {
        Self::monomial(0, value, order)
    }

    /// The identity function `z`.
    pub fn identity(order: usize) -> Self {
        Self::monomial(1, Complex::new(1.0, 0.0), order)
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Complex] {
        &self.coeffs
    }

    pub fn coeff(&self, n: usize) -> Complex {
        self.coeffs.get(n).copied().unwrap_or_default()
    }

    /// Class A normalization: `a_0 = 0` and `a_1 = 1` exactly.
    pub fn is_normalized(&self) -> bool {
        self.coeffs[0] == Complex::new(0.0, 0.0) && self.coeffs[1] == Complex::new(1.0, 0.0)
    }

    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Pads with zeros or truncates to the requested order.
    pub fn with_order(&self, order: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(order.max(1) + 1, Complex::new(0.0, 0.0));
        Self { coeffs }
    }

    /// Applies `n ↦ m(n)` coefficientwise.
    pub fn map_indexed(&self, mut m: impl FnMut(usize, Complex) -> Complex) -> Self {
        Self {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(n, &a)| m(n, a))
                .collect(),
        }
    }

    pub fn scale(&self, factor: Complex) -> Self {
        self.map_indexed(|_, a| a * factor)
    }

    /// Degree-`N` truncation of the product, `N` the larger of the two orders.
    pub fn cauchy_product(&self, other: &Self) -> Self {
        let order = self.order().max(other.order());
        let mut out = vec![Complex::new(0.0, 0.0); order + 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            if a == Complex::new(0.0, 0.0) {
                continue;
            }
            for (j, &b) in other.coeffs.iter().take(order + 1 - i).enumerate() {
                out[i + j] += a * b;
            }
        }
        Self { coeffs: out }
    }

    /// Multiplicative inverse up to the series order.
    pub fn reciprocal(&self) -> Result<Self> {
        let a0 = self.coeffs[0];
        if a0.norm() <= RECIPROCAL_FLOOR {
            return Err(Error::NearZeroConstantTerm(a0.norm()));
        }
        let inv0 = a0.inv();
        let mut out = Vec::with_capacity(self.coeffs.len());
        out.push(inv0);
        for k in 1..self.coeffs.len() {
            let acc: Complex = (1..=k).map(|i| self.coeffs[i] * out[k - i]).sum();
            out.push(-acc * inv0);
        }
        Ok(Self { coeffs: out })
    }

    /// The `z d/dz` operator: coefficient `n` becomes `n · a_n`.
    pub fn z_derivative(&self) -> Self {
        self.map_indexed(|n, a| a * n as f64)
    }

    /// Coefficients of the ordinary derivative `f'`, re-indexed from zero.
    /// The result has order `N - 1` (at least 1).
    pub fn derivative(&self) -> Self {
        let mut coeffs: Vec<Complex> = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(n, &a)| a * n as f64)
            .collect();
        if coeffs.len() < 2 {
            coeffs.push(Complex::new(0.0, 0.0));
        }
        Self { coeffs }
    }

    /// Horner evaluation of the truncated polynomial with a tail estimate.
    pub fn evaluate(&self, z: Complex) -> Result<Evaluation> {
        check_in_disk(z)?;
        let value = horner(&self.coeffs, z);
        let tail = self.tail_bound(z.norm());
        Ok(Evaluation {
            value,
            reliable: tail.bound <= TAIL_TOLERANCE,
            tail,
        })
    }

    pub fn tail_bound(&self, radius: f64) -> TailBound {
        TailBound {
            radius,
            bound: geometric_tail(&self.coeffs, radius),
        }
    }
}

/// Estimated magnitude of the discarded terms at `|z| = radius`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TailBound {
    pub radius: f64,
    pub bound: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Evaluation {
    pub value: Complex,
    pub tail: TailBound,
    pub reliable: bool,
}

pub(crate) fn check_in_disk(z: Complex) -> Result<()> {
    if z.norm() < 1.0 && z.re.is_finite() && z.im.is_finite() {
        Ok(())
    } else {
        Err(Error::OutsideDisk { re: z.re, im: z.im })
    }
}

pub(crate) fn horner(coeffs: &[Complex], z: Complex) -> Complex {
    coeffs
        .iter()
        .rev()
        .fold(Complex::new(0.0, 0.0), |acc, &a| acc * z + a)
}

/// Geometric tail model: `|a_N| ρ r^{N+1} / (1 - ρ r)` with `ρ = |a_N / a_{N-1}|`
/// guarded into `[0, 1)`. A vanishing leading coefficient gives a zero bound.
pub(crate) fn geometric_tail(coeffs: &[Complex], radius: f64) -> f64 {
    let n = coeffs.len() - 1;
    let top = coeffs[n].norm();
    if top == 0.0 || radius == 0.0 {
        return 0.0;
    }
    let prev = if n >= 1 { coeffs[n - 1].norm() } else { 0.0 };
    let ratio = if prev == 0.0 { RATIO_CAP } else { (top / prev).min(RATIO_CAP) };
    let q = ratio * radius;
    if q >= 1.0 {
        return f64::INFINITY;
    }
    top * ratio * radius.powi(n as i32 + 1) / (1.0 - q)
}

impl Add for &CoefficientSeries {
    type Output = CoefficientSeries;

    fn add(self, rhs: Self) -> CoefficientSeries {
        let order = self.order().max(rhs.order());
        CoefficientSeries {
            coeffs: (0..=order).map(|n| self.coeff(n) + rhs.coeff(n)).collect(),
        }
    }
}

impl Sub for &CoefficientSeries {
    type Output = CoefficientSeries;

    fn sub(self, rhs: Self) -> CoefficientSeries {
        let order = self.order().max(rhs.order());
        CoefficientSeries {
            coeffs: (0..=order).map(|n| self.coeff(n) - rhs.coeff(n)).collect(),
        }
    }
}

impl Neg for &CoefficientSeries {
    type Output = CoefficientSeries;

    fn neg(self) -> CoefficientSeries {
        self.map_indexed(|_, a| -a)
    }
}

impl Mul<Complex> for &CoefficientSeries {
    type Output = CoefficientSeries;

    fn mul(self, rhs: Complex) -> CoefficientSeries {
        self.scale(rhs)
    }
}

/// Largest coefficientwise distance between two series (padded to a common order).
pub fn max_coeff_distance(a: &CoefficientSeries, b: &CoefficientSeries) -> f64 {
    let order = a.order().max(b.order());
    (0..=order)
        .map(|n| (a.coeff(n) - b.coeff(n)).norm())
        .fold(0.0, f64::max)
}

/// Parses the JSON series format, reporting the failing line on error.
pub fn parse_series_json(text: &str) -> Result<CoefficientSeries> {
    serde_json::from_str(text)
        .map_err(|e| Error::Parse(format!("series file line {}: {}", e.line(), e)))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex {
        Complex::new(re, 0.0)
    }

    fn koebe(order: usize) -> CoefficientSeries {
        CoefficientSeries::from_real(&(0..=order).map(|n| n as f64).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn monomial_product() {
        let z = CoefficientSeries::identity(5);
        let zz = z.cauchy_product(&z);
        assert_eq!(zz, CoefficientSeries::monomial(2, c(1.0), 5));
    }

    #[test]
    fn constant_one_is_multiplicative_identity() {
        let f = CoefficientSeries::from_real(&[0.0, 1.0, -0.5, 0.25, 2.0]).unwrap();
        let one = CoefficientSeries::constant(c(1.0), 4);
        assert_eq!(one.cauchy_product(&f), f);
    }

    #[test]
    fn koebe_from_convolution() {
        // (1-z)^{-2} = Σ (k+1) z^k; brute-force convolution of two geometric series.
        let order = 5;
        let geo = CoefficientSeries::from_real(&vec![1.0; order + 1]).unwrap();
        let mut brute = vec![0.0; order + 1];
        for (i, b) in brute.iter_mut().enumerate() {
            *b = (0..=i).map(|_| 1.0).sum();
        }
        let sq = geo.cauchy_product(&geo);
        for (k, want) in brute.iter().enumerate() {
            assert_eq!(sq.coeff(k), c(*want));
        }
        let k = CoefficientSeries::identity(order).cauchy_product(&sq);
        assert_eq!(k, koebe(order));
    }

    #[test]
    fn reciprocal_cases() {
        let one = CoefficientSeries::constant(c(1.0), 4);
        assert_eq!(one.reciprocal().unwrap(), one);

        let one_minus_z = CoefficientSeries::from_real(&[1.0, -1.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        assert_eq!(
            one_minus_z.reciprocal().unwrap(),
            CoefficientSeries::from_real(&[1.0; 6]).unwrap()
        );

        // 1/(1+z+z²) = (1-z)/(1-z³): [1,-1,0,1,-1].
        let s = CoefficientSeries::from_real(&[1.0, 1.0, 1.0, 0.0, 0.0]).unwrap();
        assert_eq!(
            s.reciprocal().unwrap(),
            CoefficientSeries::from_real(&[1.0, -1.0, 0.0, 1.0, -1.0]).unwrap()
        );
    }

    #[test]
    fn reciprocal_rejects_small_constant_term() {
        let s = CoefficientSeries::from_real(&[1e-10, 1.0, 0.0]).unwrap();
        assert!(matches!(s.reciprocal(), Err(Error::NearZeroConstantTerm(_))));
        let s = CoefficientSeries::from_real(&[1e-9, 1.0, 0.0]).unwrap();
        assert!(s.reciprocal().is_err());
    }

    #[test]
    fn z_derivative_cases() {
        let z = CoefficientSeries::identity(3);
        assert_eq!(z.z_derivative(), z);
        let s = CoefficientSeries::from_real(&[0.0, 1.0, 1.0]).unwrap();
        assert_eq!(
            s.z_derivative(),
            CoefficientSeries::from_real(&[0.0, 1.0, 2.0]).unwrap()
        );
        let sq: Vec<f64> = (0..=6).map(|n| (n * n) as f64).collect();
        assert_eq!(
            koebe(6).z_derivative(),
            CoefficientSeries::from_real(&sq).unwrap()
        );
    }

    #[test]
    fn evaluate_identity_has_zero_tail() {
        let e = CoefficientSeries::identity(8).evaluate(c(0.5)).unwrap();
        assert_eq!(e.value, c(0.5));
        assert_eq!(e.tail.bound, 0.0);
        assert!(e.reliable);
    }

    #[test]
    fn evaluate_koebe_near_closed_form() {
        let e = koebe(64).evaluate(c(0.5)).unwrap();
        assert!((e.value - c(2.0)).norm() < 1e-8);
        assert!(e.reliable);
    }

    #[test]
    fn evaluate_flags_slow_geometric_tail() {
        let geo = CoefficientSeries::from_real(&[1.0; 65]).unwrap();
        let e = geo.evaluate(c(0.9)).unwrap();
        let expected = 0.9f64.powi(65) / (1.0 - 0.9);
        assert!((e.tail.bound - expected).abs() < 1e-9 * expected);
        assert!(e.tail.bound > TAIL_TOLERANCE);
        assert!(!e.reliable);
    }

    #[test]
    fn evaluate_rejects_boundary() {
        let s = CoefficientSeries::identity(3);
        assert!(matches!(s.evaluate(c(1.0)), Err(Error::OutsideDisk { .. })));
        assert!(s.evaluate(Complex::new(0.8, 0.8)).is_err());
    }

    #[test]
    fn tail_bound_monotone_in_radius() {
        let s = koebe(20);
        let mut last = 0.0;
        for k in 0..100 {
            let b = s.tail_bound(k as f64 / 100.0).bound;
            assert!(b >= last);
            last = b;
        }
    }

    #[test]
    fn json_format() {
        let s = CoefficientSeries::new(vec![Complex::new(0.0, 0.0), c(1.0), Complex::new(0.5, -0.25)])
            .unwrap();
        let text = serde_json::to_string(&s).unwrap();
        assert_eq!(text, r#"{"order":2,"coeffs":[[0.0,0.0],[1.0,0.0],[0.5,-0.25]]}"#);
        assert_eq!(parse_series_json(&text).unwrap(), s);
    }

    #[test]
    fn json_rejects_wrong_length_with_line() {
        let text = "{\n  \"order\": 3,\n  \"coeffs\": [[0,0],[1,0]]\n}";
        let err = parse_series_json(text).unwrap_err();
        assert!(err.to_string().contains("line"), "{err}");
    }
}
