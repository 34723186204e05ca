//! Analytic functions on the unit disk: values and the first two derivatives
//! from a truncated series, a closed form, or an operator applied to another
//! function.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::{apply_multiplier, OperatorSpec};
use crate::params::parse_params;
use crate::series::{check_in_disk, geometric_tail, horner, parse_series_json, CoefficientSeries, TAIL_TOLERANCE};
use crate::Complex;

/// Evaluations beyond `|z| = 1 - EVAL_GUARD` are flagged unreliable.
pub const EVAL_GUARD: f64 = 1e-3;

/// Truncation order used when a closed form has to be expanded, e.g. before
/// an operator is applied to it.
pub const DEFAULT_SERIES_ORDER: usize = 1024;

/// Closed-form test functions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "builtin", rename_all = "snake_case")]
pub enum Builtin {
    Identity,
    /// `z / (1 - xz)^{2(1-λ)}`, extremal for starlikeness of order `λ`.
    KoebeGeneral { lambda: f64, x: Complex },
    /// `z / (1 - z)`.
    HalfPlane,
    /// `z + Σ ε_n z^n`, given by its full coefficient list.
    Polynomial { coeffs: CoefficientSeries },
}

impl Builtin {
    /// The classical Koebe function `z / (1 - z)²`.
    pub fn koebe() -> Self {
        Builtin::KoebeGeneral {
            lambda: 0.0,
            x: Complex::new(1.0, 0.0),
        }
    }

    pub fn koebe_general(lambda: f64, x: Complex) -> Result<Self> {
        if !(0.0..1.0).contains(&lambda) {
            return Err(Error::InvalidParameter(format!(
                "koebe requires 0 <= lambda < 1, got {lambda}"
            )));
        }
        if (x.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!(
                "koebe requires |x| = 1, got |x| = {}",
                x.norm()
            )));
        }
        Ok(Builtin::KoebeGeneral { lambda, x })
    }

    /// `z + Σ_{n≥2} ε_n z^n`; `perturbation[k]` is the coefficient of `z^{k+2}`.
    pub fn polynomial_perturbation(perturbation: &[Complex]) -> Self {
        let mut coeffs = vec![Complex::new(0.0, 0.0), Complex::new(1.0, 0.0)];
        coeffs.extend_from_slice(perturbation);
        Builtin::Polynomial {
            coeffs: CoefficientSeries::new(coeffs).expect("at least two coefficients"),
        }
    }

    fn triple(&self, z: Complex) -> (Complex, Complex, Complex) {
        let one = Complex::new(1.0, 0.0);
        match self {
            Builtin::Identity => (z, one, Complex::new(0.0, 0.0)),
            Builtin::HalfPlane => {
                let w = one - z;
                let inv = w.inv();
                (z * inv, inv * inv, 2.0 * inv * inv * inv)
            }
            Builtin::KoebeGeneral { lambda, x } => {
                let alpha = 2.0 * (1.0 - lambda);
                let xz = x * z;
                let w = one - xz;
                let p = w.powf(-alpha);
                let winv = w.inv();
                let f = z * p;
                let f1 = p * winv * (one + (alpha - 1.0) * xz);
                let f2 = p * winv * winv * x * alpha * (2.0 + (alpha - 1.0) * xz);
                (f, f1, f2)
            }
            Builtin::Polynomial { coeffs } => {
                let d1 = coeffs.derivative();
                let d2 = d1.derivative();
                (
                    horner(coeffs.coeffs(), z),
                    horner(d1.coeffs(), z),
                    horner(d2.coeffs(), z),
                )
            }
        }
    }

    fn series(&self, order: usize) -> CoefficientSeries {
        let order = order.max(1);
        match self {
            Builtin::Identity => CoefficientSeries::identity(order),
            Builtin::HalfPlane => {
                let mut s = CoefficientSeries::from_real(&vec![1.0; order + 1]).expect("order >= 1");
                s = s.map_indexed(|n, a| if n == 0 { Complex::new(0.0, 0.0) } else { a });
                s
            }
            Builtin::KoebeGeneral { lambda, x } => {
                // a_1 = 1, a_{n+1} = a_n x (α + n - 1) / n
                let alpha = 2.0 * (1.0 - lambda);
                let mut coeffs = Vec::with_capacity(order + 1);
                coeffs.push(Complex::new(0.0, 0.0));
                let mut a = Complex::new(1.0, 0.0);
                coeffs.push(a);
                for n in 1..order {
                    a = a * x * ((alpha + n as f64 - 1.0) / n as f64);
                    coeffs.push(a);
                }
                CoefficientSeries::new(coeffs).expect("finite coefficients")
            }
            Builtin::Polynomial { coeffs } => coeffs.with_order(order),
        }
    }

    fn name(&self) -> String {
        match self {
            Builtin::Identity => "identity".into(),
            Builtin::HalfPlane => "half_plane".into(),
            Builtin::KoebeGeneral { lambda, x } => {
                if x.im == 0.0 {
                    format!("koebe:lambda={lambda},x={}", x.re)
                } else {
                    format!("koebe:lambda={lambda},theta={}", x.arg())
                }
            }
            Builtin::Polynomial { coeffs } => format!("poly(order={})", coeffs.order()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "backend", rename_all = "snake_case")]
pub enum Backend {
    Series { series: CoefficientSeries },
    ClosedForm { builtin: Builtin },
    OperatorApplied { op: OperatorSpec, inner: Box<AnalyticFunction> },
}

/// `(f(z), f'(z), f''(z))` plus a reliability flag.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Triple {
    pub value: Complex,
    pub first: Complex,
    pub second: Complex,
    pub reliable: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalyticFunction {
    pub label: String,
    pub backend: Backend,
}

impl AnalyticFunction {
    pub fn identity() -> Self {
        Self::builtin(Builtin::Identity)
    }

    pub fn builtin(builtin: Builtin) -> Self {
        Self {
            label: builtin.name(),
            backend: Backend::ClosedForm { builtin },
        }
    }

    pub fn from_series(series: CoefficientSeries, label: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            backend: Backend::Series { series },
        }
    }

    /// `op` applied to `inner`; evaluation goes through the multiplier form.
    pub fn apply(op: OperatorSpec, inner: AnalyticFunction) -> Result<Self> {
        op.validate()?;
        Ok(Self {
            label: format!("{}[{}]", op.symbol(), inner.label),
            backend: Backend::OperatorApplied {
                op,
                inner: Box::new(inner),
            },
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    /// Whether the function is known to satisfy `f(0) = 0`, `f'(0) = 1` exactly.
    pub fn is_normalized(&self) -> bool {
        match &self.backend {
            Backend::Series { series } => series.is_normalized(),
            Backend::ClosedForm { builtin: Builtin::Polynomial { coeffs } } => coeffs.is_normalized(),
            Backend::ClosedForm { .. } => true,
            Backend::OperatorApplied { inner, .. } => inner.is_normalized(),
        }
    }

    /// True when every backend underneath is a finite polynomial that the
    /// given order represents without truncation.
    pub fn is_polynomial_within(&self, order: usize) -> bool {
        match &self.backend {
            Backend::Series { series } => series.order() <= order,
            Backend::ClosedForm { builtin: Builtin::Polynomial { coeffs } } => coeffs.order() <= order,
            Backend::ClosedForm { builtin: Builtin::Identity } => true,
            Backend::ClosedForm { .. } => false,
            Backend::OperatorApplied { inner, .. } => inner.is_polynomial_within(order),
        }
    }

    pub fn eval_triple(&self, z: Complex) -> Result<Triple> {
        self.eval_triple_with_order(z, DEFAULT_SERIES_ORDER)
    }

    /// Like [`eval_triple`](Self::eval_triple), expanding operator-applied
    /// backends to `order` terms.
    pub fn eval_triple_with_order(&self, z: Complex, order: usize) -> Result<Triple> {
        check_in_disk(z)?;
        let guard_ok = z.norm() <= 1.0 - EVAL_GUARD;
        match &self.backend {
            Backend::ClosedForm { builtin } => {
                let (value, first, second) = builtin.triple(z);
                Ok(Triple {
                    value,
                    first,
                    second,
                    reliable: guard_ok && value.is_finite() && first.is_finite() && second.is_finite(),
                })
            }
            Backend::Series { series } => Ok(series_triple(series, z, guard_ok)),
            Backend::OperatorApplied { .. } => {
                let series = self.to_series(order)?;
                Ok(series_triple(&series, z, guard_ok))
            }
        }
    }

    pub fn value(&self, z: Complex) -> Result<Complex> {
        check_in_disk(z)?;
        match &self.backend {
            Backend::ClosedForm { builtin } => Ok(builtin.triple(z).0),
            Backend::Series { series } => Ok(horner(series.coeffs(), z)),
            Backend::OperatorApplied { .. } => Ok(horner(self.to_series(DEFAULT_SERIES_ORDER)?.coeffs(), z)),
        }
    }

    /// Degree-`order` Taylor coefficients.
    pub fn to_series(&self, order: usize) -> Result<CoefficientSeries> {
        match &self.backend {
            Backend::ClosedForm { builtin } => Ok(builtin.series(order)),
            Backend::Series { series } => Ok(series.with_order(order)),
            Backend::OperatorApplied { op, inner } => apply_multiplier(op, &inner.to_series(order)?),
        }
    }

    /// Loads a series file in the `{"order": N, "coeffs": [[re, im], ...]}` format.
    pub fn from_series_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Parse(format!("cannot read {}: {e}", path.display())))?;
        let series = parse_series_json(&text)?;
        Ok(Self::from_series(series, format!("series:path={}", path.display())))
    }
}

fn series_triple(series: &CoefficientSeries, z: Complex, guard_ok: bool) -> Triple {
    let d1 = series.derivative();
    let d2 = d1.derivative();
    let r = z.norm();
    let tail = geometric_tail(series.coeffs(), r)
        .max(geometric_tail(d1.coeffs(), r))
        .max(geometric_tail(d2.coeffs(), r));
    Triple {
        value: horner(series.coeffs(), z),
        first: horner(d1.coeffs(), z),
        second: horner(d2.coeffs(), z),
        reliable: guard_ok && tail <= TAIL_TOLERANCE,
    }
}

impl fmt::Display for AnalyticFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

impl FromStr for AnalyticFunction {
    type Err = Error;

    /// Parses builtin names such as `identity`, `koebe:lambda=0.25,x=1`,
    /// `koebe:theta=0.5`, `half_plane`, `poly:a2=0.1,a3=0.02-0.01i`,
    /// `perturbed:seed=3,order=12,amplitude=0.1` and `series:path=f.json`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, mut params) = parse_params(s)?;
        let f = match name.as_str() {
            "identity" | "z" => AnalyticFunction::identity(),
            "half_plane" | "halfplane" => AnalyticFunction::builtin(Builtin::HalfPlane),
            "koebe" => {
                let lambda = params.real_or("lambda", 0.0)?;
                let x = match params.take("theta") {
                    Some(t) => {
                        if params.remaining().iter().any(|(k, _)| k == "x") {
                            return Err(Error::Parse("give either x or theta, not both".into()));
                        }
                        Complex::from_polar(1.0, crate::params::parse_real(&t)?)
                    }
                    None => params.complex_or("x", Complex::new(1.0, 0.0))?,
                };
                AnalyticFunction::builtin(Builtin::koebe_general(lambda, x)?)
            }
            "poly" => {
                let mut eps: Vec<Complex> = Vec::new();
                for (key, value) in params.remaining() {
                    let n: usize = key
                        .strip_prefix('a')
                        .and_then(|k| k.parse().ok())
                        .filter(|&n| n >= 2)
                        .ok_or_else(|| Error::Parse(format!("poly keys are a2, a3, ...; got '{key}'")))?;
                    if eps.len() < n - 1 {
                        eps.resize(n - 1, Complex::new(0.0, 0.0));
                    }
                    eps[n - 2] = crate::params::parse_complex(&value)?;
                    params.take(&key);
                }
                if eps.is_empty() {
                    eps.push(Complex::new(0.0, 0.0));
                }
                AnalyticFunction::builtin(Builtin::polynomial_perturbation(&eps))
            }
            "perturbed" => {
                let seed = params.integer_or("seed", 0)?;
                let order = params.integer_or("order", 12)? as usize;
                let amplitude = params.real_or("amplitude", 0.1)?;
                generate_perturbed(seed, order, amplitude)?
            }
            "series" => {
                let path = params
                    .take("path")
                    .ok_or_else(|| Error::Parse("series requires path=<file>".into()))?;
                AnalyticFunction::from_series_file(Path::new(&path))?
            }
            other => return Err(Error::Parse(format!("unknown function '{other}'"))),
        };
        params.finish()?;
        Ok(f)
    }
}

/// Normalized polynomial `z + Σ_{n=2}^N ε_n z^n` with `|ε_n| ≤ amplitude / n²`,
/// fully determined by `seed`.
pub fn generate_perturbed(seed: u64, order: usize, amplitude: f64) -> Result<AnalyticFunction> {
    if !(amplitude >= 0.0 && amplitude.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "amplitude must be a nonnegative number, got {amplitude}"
        )));
    }
    let order = order.max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut coeffs = vec![Complex::new(0.0, 0.0); order + 1];
    coeffs[1] = Complex::new(1.0, 0.0);
    for (n, a) in coeffs.iter_mut().enumerate().skip(2) {
        let radius = amplitude / (n * n) as f64 * rng.gen::<f64>();
        let angle = 2.0 * PI * rng.gen::<f64>();
        *a = Complex::from_polar(radius, angle);
    }
    let series = CoefficientSeries::new(coeffs)?;
    Ok(AnalyticFunction::from_series(
        series,
        format!("perturbed:seed={seed},order={order},amplitude={amplitude}"),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex {
        Complex::new(re, 0.0)
    }

    fn close(a: Complex, b: Complex, tol: f64) -> bool {
        (a - b).norm() <= tol * (1.0 + b.norm())
    }

    #[test]
    fn identity_triple() {
        let t = AnalyticFunction::identity().eval_triple(c(0.3)).unwrap();
        assert_eq!((t.value, t.first, t.second), (c(0.3), c(1.0), c(0.0)));
        assert!(t.reliable);
    }

    #[test]
    fn koebe_triple() {
        let t = AnalyticFunction::builtin(Builtin::koebe())
            .eval_triple(c(0.5))
            .unwrap();
        assert!(close(t.value, c(2.0), 1e-14));
        assert!(close(t.first, c(12.0), 1e-14));
        assert!(close(t.second, c(80.0), 1e-14));
    }

    #[test]
    fn half_plane_at_origin() {
        let t = AnalyticFunction::builtin(Builtin::HalfPlane)
            .eval_triple(c(0.0))
            .unwrap();
        assert_eq!((t.value, t.first, t.second), (c(0.0), c(1.0), c(2.0)));
    }

    #[test]
    fn expansions() {
        let id = AnalyticFunction::identity().to_series(4).unwrap();
        assert_eq!(id, CoefficientSeries::from_real(&[0.0, 1.0, 0.0, 0.0, 0.0]).unwrap());
        let k = AnalyticFunction::builtin(Builtin::koebe()).to_series(4).unwrap();
        assert_eq!(k, CoefficientSeries::from_real(&[0.0, 1.0, 2.0, 3.0, 4.0]).unwrap());
        let half = AnalyticFunction::builtin(Builtin::koebe_general(0.5, c(1.0)).unwrap())
            .to_series(3)
            .unwrap();
        assert_eq!(half, CoefficientSeries::from_real(&[0.0, 1.0, 1.0, 1.0]).unwrap());
    }

    #[test]
    fn koebe_series_matches_binomial_coefficients() {
        // a_{n} = Γ(α + n - 1) / (Γ(α) (n-1)!) x^{n-1}, checked through the
        // generic binomial product (α)_k / k! built term by term.
        let lambda = 0.3;
        let alpha = 2.0 * (1.0 - lambda);
        let x = Complex::from_polar(1.0, 0.7);
        let s = AnalyticFunction::builtin(Builtin::koebe_general(lambda, x).unwrap())
            .to_series(10)
            .unwrap();
        for n in 1..=10usize {
            let k = n - 1;
            let rising: f64 = (0..k).map(|j| alpha + j as f64).product();
            let fact: f64 = (1..=k).map(|j| j as f64).product();
            let want = x.powu(k as u32) * (rising / fact);
            assert!(close(s.coeff(n), want, 1e-13), "n = {n}");
        }
    }

    #[test]
    fn rejects_invalid_koebe() {
        assert!(Builtin::koebe_general(1.0, c(1.0)).is_err());
        assert!(Builtin::koebe_general(-0.1, c(1.0)).is_err());
        assert!(Builtin::koebe_general(0.2, c(0.5)).is_err());
    }

    #[test]
    fn outside_disk_is_an_error() {
        let f = AnalyticFunction::identity();
        assert!(matches!(f.eval_triple(c(1.0)), Err(Error::OutsideDisk { .. })));
    }

    #[test]
    fn guard_band_is_unreliable() {
        let f = AnalyticFunction::builtin(Builtin::HalfPlane);
        assert!(!f.eval_triple(c(0.9995)).unwrap().reliable);
        assert!(f.eval_triple(c(0.998)).unwrap().reliable);
    }

    #[test]
    fn perturbed_is_deterministic_and_bounded() {
        let a = generate_perturbed(7, 20, 0.3).unwrap();
        let b = generate_perturbed(7, 20, 0.3).unwrap();
        assert_eq!(a, b);
        assert!(a.is_normalized());
        let s = a.to_series(20).unwrap();
        for n in 2..=20 {
            assert!(s.coeff(n).norm() <= 0.3 / (n * n) as f64);
        }
        let other = generate_perturbed(8, 20, 0.3).unwrap();
        assert_ne!(a, other);
    }

    #[test]
    fn zero_amplitude_is_identity() {
        let p = generate_perturbed(3, 10, 0.0).unwrap();
        assert_eq!(p.to_series(10).unwrap(), CoefficientSeries::identity(10));
    }

    #[test]
    fn operator_applied_delegates_to_multipliers() {
        let op = OperatorSpec::bernardi(1.0).unwrap();
        let f = AnalyticFunction::apply(op, AnalyticFunction::builtin(Builtin::koebe())).unwrap();
        let s = f.to_series(4).unwrap();
        assert!(close(s.coeff(2), c(4.0 / 3.0), 1e-15));
        let t = f.eval_triple(c(0.5)).unwrap();
        let direct = apply_multiplier(&op, &AnalyticFunction::builtin(Builtin::koebe()).to_series(1024).unwrap())
            .unwrap()
            .evaluate(c(0.5))
            .unwrap();
        assert!(close(t.value, direct.value, 1e-15));
        assert!(t.reliable);
    }

    #[test]
    fn parses_builtin_strings() {
        let f: AnalyticFunction = "koebe:lambda=0.25,x=1".parse().unwrap();
        assert_eq!(f.backend, Backend::ClosedForm { builtin: Builtin::KoebeGeneral { lambda: 0.25, x: c(1.0) } });
        let f: AnalyticFunction = "koebe:theta=0".parse().unwrap();
        assert_eq!(f.backend, Backend::ClosedForm { builtin: Builtin::koebe() });
        let f: AnalyticFunction = "poly:a3=0.1-0.2i".parse().unwrap();
        let s = f.to_series(3).unwrap();
        assert_eq!(s.coeff(2), c(0.0));
        assert_eq!(s.coeff(3), Complex::new(0.1, -0.2));
        assert!("poly:b2=1".parse::<AnalyticFunction>().is_err());
        assert!("koebe:lambda=0.2,x=1,theta=1".parse::<AnalyticFunction>().is_err());
        assert!("nope".parse::<AnalyticFunction>().is_err());
        let p: AnalyticFunction = "perturbed:seed=4,order=6,amplitude=0.2".parse().unwrap();
        assert_eq!(p, generate_perturbed(4, 6, 0.2).unwrap());
    }
}
