//! The Bernardi–Libera–Livingston operator `L_c` and the Jung–Kim–Srivastava
//! operator `I^σ`.
//!
//! Both act diagonally on Taylor coefficients, which gives the exact
//! multiplier backend. The quadrature backend evaluates the defining
//! integrals directly and exists as an independent cross-check.

pub mod gamma;
pub mod identities;
pub mod quadrature;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functions::AnalyticFunction;
use crate::params::parse_params;
use crate::series::{check_in_disk, CoefficientSeries};
use crate::Complex;

pub use identities::{check_identity, random_normalized_series, run_identity_suite, IdentityId, IdentityRow};

/// Absolute tolerance of the quadrature backend.
pub const QUADRATURE_TOLERANCE: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum OperatorSpec {
    /// `L_c f(z) = (c+1) z^{-c} ∫₀^z t^{c-1} f(t) dt`, `c > -1`.
    Bernardi { c: f64 },
    /// `I^σ f(z) = 2^σ / (z Γ(σ)) ∫₀^z (log(z/t))^{σ-1} f(t) dt`; any real `σ`
    /// through the multiplier form.
    Jks { sigma: f64 },
}

impl OperatorSpec {
    pub fn bernardi(c: f64) -> Result<Self> {
        let op = OperatorSpec::Bernardi { c };
        op.validate()?;
        Ok(op)
    }

    pub fn jks(sigma: f64) -> Result<Self> {
        let op = OperatorSpec::Jks { sigma };
        op.validate()?;
        Ok(op)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            OperatorSpec::Bernardi { c } if !(c.is_finite() && c > -1.0) => Err(
                Error::InvalidParameter(format!("Bernardi operator requires c > -1, got {c}")),
            ),
            OperatorSpec::Jks { sigma } if !sigma.is_finite() => Err(Error::InvalidParameter(
                format!("JKS operator requires finite sigma, got {sigma}"),
            )),
            _ => Ok(()),
        }
    }

    /// Diagonal multiplier on the coefficient of `z^n`. Exactly 1 at `n = 1`.
    pub fn multiplier(&self, n: usize) -> f64 {
        if n == 1 {
            return 1.0;
        }
        let n = n as f64;
        match *self {
            OperatorSpec::Bernardi { c } => (c + 1.0) / (n + c),
            OperatorSpec::Jks { sigma } => (2.0 / (n + 1.0)).powf(sigma),
        }
    }

    /// Short name used in labels, e.g. `L_1` or `I^0.5`.
    pub fn symbol(&self) -> String {
        match *self {
            OperatorSpec::Bernardi { c } => format!("L_{c}"),
            OperatorSpec::Jks { sigma } => format!("I^{sigma}"),
        }
    }
}

impl fmt::Display for OperatorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            OperatorSpec::Bernardi { c } => write!(f, "bernardi:c={c}"),
            OperatorSpec::Jks { sigma } => write!(f, "jks:sigma={sigma}"),
        }
    }
}

impl FromStr for OperatorSpec {
    type Err = Error;

    /// Parses `bernardi:c=1.0` or `jks:sigma=0.5`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, mut params) = parse_params(s)?;
        let op = match name.as_str() {
            "bernardi" | "libera" => OperatorSpec::bernardi(params.real("c")?)?,
            "jks" => OperatorSpec::jks(params.real("sigma")?)?,
            other => {
                return Err(Error::Parse(format!(
                    "unknown operator '{other}' (expected bernardi or jks)"
                )))
            }
        };
        params.finish()?;
        Ok(op)
    }
}

/// Exact coefficient form of the operator.
///
/// A nonzero constant term is only admissible for the Bernardi operator when
/// `c > 0`; normalized inputs never hit that case.
pub fn apply_multiplier(op: &OperatorSpec, a: &CoefficientSeries) -> Result<CoefficientSeries> {
    op.validate()?;
    let zero = Complex::new(0.0, 0.0);
    if let OperatorSpec::Bernardi { c } = *op {
        if a.coeff(0) != zero && c <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "Bernardi operator with c = {c} is undefined on a nonzero constant term"
            )));
        }
    }
    Ok(a.map_indexed(|n, an| if an == zero { zero } else { an * op.multiplier(n) }))
}

/// Inverse of [`apply_multiplier`] on normalized series: divides each
/// coefficient by the multiplier.
pub fn apply_inverse_multiplier(op: &OperatorSpec, a: &CoefficientSeries) -> Result<CoefficientSeries> {
    op.validate()?;
    let zero = Complex::new(0.0, 0.0);
    if a.coeff(0) != zero {
        return Err(Error::InvalidParameter("inverse operator needs f(0) = 0".into()));
    }
    Ok(a.map_indexed(|n, an| if an == zero { zero } else { an / op.multiplier(n) }))
}

/// Evaluates the operator at `z` from its integral definition.
///
/// Both integrals are taken along the ray `t = zu`. Writing
/// `f(t) = f(0) + t h(t)`, the Bernardi kernel is absorbed by
/// `u = v^{1/(c+1)}`, giving `z ∫₀¹ h(z v^{1/(c+1)}) dv`. The JKS kernel uses
/// `u = e^{-w}` and, for `σ < 1`, `w = s^{1/σ}` to remove the `w^{σ-1}`
/// singularity; the exponentially decaying tail is cut off where it is
/// below double precision.
pub fn apply_quadrature(op: &OperatorSpec, f: &AnalyticFunction, z: Complex) -> Result<Complex> {
    op.validate()?;
    check_in_disk(z)?;
    let zero = Complex::new(0.0, 0.0);
    let f0 = f.value(zero)?;

    let constant_part = match *op {
        OperatorSpec::Bernardi { c } => {
            if f0 == zero {
                zero
            } else if c > 0.0 {
                f0 * ((c + 1.0) / c)
            } else {
                return Err(Error::InvalidParameter(format!(
                    "Bernardi integral with c = {c} diverges on a nonzero constant term"
                )));
            }
        }
        OperatorSpec::Jks { sigma } => {
            if sigma <= 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "the JKS integral requires sigma > 0, got {sigma}"
                )));
            }
            f0 * 2f64.powf(sigma)
        }
    };
    if z == zero {
        return Ok(constant_part);
    }

    // h(t) = (f(t) - f(0)) / t; quadrature nodes never land on t = 0.
    let h = |t: Complex| -> Complex {
        match f.value(t) {
            Ok(v) => (v - f0) / t,
            Err(_) => Complex::new(f64::NAN, f64::NAN),
        }
    };

    let integral = match *op {
        OperatorSpec::Bernardi { c } => {
            let p = 1.0 / (c + 1.0);
            let tol = QUADRATURE_TOLERANCE / z.norm();
            let r = quadrature::integrate(
                |v| h(z * v.powf(p)),
                0.0,
                1.0,
                tol,
                quadrature::DEFAULT_MAX_INTERVALS,
            )?;
            z * r.value
        }
        OperatorSpec::Jks { sigma } => {
            let prefactor = 2f64.powf(sigma) / gamma::gamma(sigma);
            let tol = QUADRATURE_TOLERANCE / (prefactor * z.norm()).max(1.0);
            let cutoff = 25.0 + 5.0 * sigma;
            let r = if sigma < 1.0 {
                let q = 1.0 / sigma;
                quadrature::integrate(
                    |s| {
                        let w = s.powf(q);
                        h(z * (-w).exp()) * ((-2.0 * w).exp() / sigma)
                    },
                    0.0,
                    cutoff.powf(sigma),
                    tol,
                    quadrature::DEFAULT_MAX_INTERVALS,
                )?
            } else {
                quadrature::integrate(
                    |w| h(z * (-w).exp()) * (w.powf(sigma - 1.0) * (-2.0 * w).exp()),
                    0.0,
                    cutoff,
                    tol,
                    quadrature::DEFAULT_MAX_INTERVALS,
                )?
            };
            z * r.value * prefactor
        }
    };
    let value = constant_part + integral;
    if value.re.is_finite() && value.im.is_finite() {
        Ok(value)
    } else {
        Err(Error::QuadratureFailure {
            tolerance: QUADRATURE_TOLERANCE,
            estimate: f64::INFINITY,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::{AnalyticFunction, Builtin};
    use crate::series::max_coeff_distance;

    fn koebe_series(order: usize) -> CoefficientSeries {
        CoefficientSeries::from_real(&(0..=order).map(|n| n as f64).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn bernardi_fixes_identity() {
        for c in [-0.9, -0.5, 0.0, 0.3, 1.0, 7.5] {
            let op = OperatorSpec::bernardi(c).unwrap();
            let id = CoefficientSeries::identity(6);
            assert_eq!(apply_multiplier(&op, &id).unwrap(), id);
        }
    }

    #[test]
    fn inverse_undoes_multiplier() {
        let k = koebe_series(32);
        for op in [OperatorSpec::bernardi(-0.25).unwrap(), OperatorSpec::jks(2.0).unwrap()] {
            let back = apply_inverse_multiplier(&op, &apply_multiplier(&op, &k).unwrap()).unwrap();
            assert!(max_coeff_distance(&back, &k) <= 1e-13 * 32.0);
        }
        let shifted = CoefficientSeries::constant(Complex::new(1.0, 0.0), 3);
        assert!(apply_inverse_multiplier(&OperatorSpec::bernardi(1.0).unwrap(), &shifted).is_err());
    }

    #[test]
    fn libera_on_koebe() {
        let op = OperatorSpec::bernardi(1.0).unwrap();
        let out = apply_multiplier(&op, &koebe_series(5)).unwrap();
        let want = [0.0, 1.0, 4.0 / 3.0, 1.5, 8.0 / 5.0, 10.0 / 6.0];
        for (n, w) in want.iter().enumerate() {
            assert!((out.coeff(n).re - w).abs() < 1e-15, "n = {n}");
        }
    }

    #[test]
    fn jks_one_is_libera() {
        let a = koebe_series(40);
        let j = apply_multiplier(&OperatorSpec::jks(1.0).unwrap(), &a).unwrap();
        let l = apply_multiplier(&OperatorSpec::bernardi(1.0).unwrap(), &a).unwrap();
        assert_eq!(j, l);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(OperatorSpec::bernardi(-1.0).is_err());
        assert!(OperatorSpec::bernardi(f64::NAN).is_err());
        let op = OperatorSpec::Bernardi { c: -2.0 };
        assert!(apply_multiplier(&op, &koebe_series(3)).is_err());
        let f = AnalyticFunction::identity();
        let jks = OperatorSpec::jks(-0.5).unwrap();
        assert!(matches!(
            apply_quadrature(&jks, &f, Complex::new(0.3, 0.0)),
            Err(Error::InvalidParameter(_))
        ));
        // negative sigma is fine for the multiplier form
        assert!(apply_multiplier(&jks, &koebe_series(3)).is_ok());
    }

    #[test]
    fn constant_term_rules() {
        let s = CoefficientSeries::from_real(&[2.0, 1.0, 0.0]).unwrap();
        assert!(apply_multiplier(&OperatorSpec::bernardi(0.0).unwrap(), &s).is_err());
        let out = apply_multiplier(&OperatorSpec::bernardi(1.0).unwrap(), &s).unwrap();
        assert_eq!(out.coeff(0).re, 4.0);
    }

    #[test]
    fn quadrature_identity_fixed() {
        let op = OperatorSpec::bernardi(1.0).unwrap();
        let z = Complex::new(0.4, 0.0);
        let v = apply_quadrature(&op, &AnalyticFunction::identity(), z).unwrap();
        assert!((v - z).norm() < 1e-12);
    }

    #[test]
    fn quadrature_matches_multiplier_on_koebe() {
        let op = OperatorSpec::bernardi(1.0).unwrap();
        let koebe = AnalyticFunction::builtin(Builtin::koebe());
        let z = Complex::new(0.5, 0.0);
        let quad = apply_quadrature(&op, &koebe, z).unwrap();
        let series = apply_multiplier(&op, &koebe.to_series(256).unwrap()).unwrap();
        let mult = series.evaluate(z).unwrap().value;
        assert!((quad - mult).norm() < 1e-8, "{quad} vs {mult}");
    }

    #[test]
    fn jks_quadrature_on_monomial() {
        // I^2 z² = (2/3)² z², at z = 1/2 this is 1/9.
        let sq = CoefficientSeries::monomial(2, Complex::new(1.0, 0.0), 2);
        let f = AnalyticFunction::from_series(sq, "z^2");
        let op = OperatorSpec::jks(2.0).unwrap();
        let v = apply_quadrature(&op, &f, Complex::new(0.5, 0.0)).unwrap();
        assert!((v - Complex::new(1.0 / 9.0, 0.0)).norm() < 1e-10, "{v}");
    }

    #[test]
    fn parse_roundtrip() {
        let op: OperatorSpec = "bernardi:c=1.5".parse().unwrap();
        assert_eq!(op, OperatorSpec::Bernardi { c: 1.5 });
        assert_eq!(op.to_string().parse::<OperatorSpec>().unwrap(), op);
        let op: OperatorSpec = "jks:sigma=-0.5".parse().unwrap();
        assert_eq!(op, OperatorSpec::Jks { sigma: -0.5 });
        assert!("bernardi:c=-1".parse::<OperatorSpec>().is_err());
        assert!("bernardi:c=1,d=2".parse::<OperatorSpec>().is_err());
        assert!("mellin:s=1".parse::<OperatorSpec>().is_err());
    }
}
