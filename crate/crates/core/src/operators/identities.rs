//! Exact relations between the two operators, checked coefficientwise.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{apply_multiplier, OperatorSpec};
use crate::error::{Error, Result};
use crate::series::{max_coeff_distance, CoefficientSeries};
use crate::Complex;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IdentityId {
    /// `z(I^σ L_c f)' = (c+1) I^σ f - c I^σ L_c f`
    JksBernardiDerivative,
    /// `z(L_c I^σ f)' = (c+1) I^σ f - c L_c I^σ f`
    BernardiJksDerivative,
    /// `z(L_c f)' + c L_c f = (c+1) f`
    BernardiLogDerivative,
    /// `z(L_{c+1} f)' + (c+1) L_{c+1} f = (c+2) f`
    ShiftedLogDerivative,
    /// `z(L_c g)' + c L_c g = (c+1)/(c+2) [z(L_{c+1} g)' + (c+1) L_{c+1} g]` with `g = zf'`
    ShiftRelationDerivative,
    /// The same shift relation with `g = f`.
    ShiftRelation,
    /// `L_c I^σ = I^σ L_c`
    Commute,
}

impl IdentityId {
    pub const ALL: [IdentityId; 7] = [
        IdentityId::JksBernardiDerivative,
        IdentityId::BernardiJksDerivative,
        IdentityId::BernardiLogDerivative,
        IdentityId::ShiftedLogDerivative,
        IdentityId::ShiftRelationDerivative,
        IdentityId::ShiftRelation,
        IdentityId::Commute,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            IdentityId::JksBernardiDerivative => "jks_bernardi_derivative",
            IdentityId::BernardiJksDerivative => "bernardi_jks_derivative",
            IdentityId::BernardiLogDerivative => "bernardi_log_derivative",
            IdentityId::ShiftedLogDerivative => "shifted_log_derivative",
            IdentityId::ShiftRelationDerivative => "shift_relation_derivative",
            IdentityId::ShiftRelation => "shift_relation",
            IdentityId::Commute => "commute",
        }
    }
}

impl fmt::Display for IdentityId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for IdentityId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        IdentityId::ALL
            .into_iter()
            .find(|id| id.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown identity '{s}'")))
    }
}

fn real(x: f64) -> Complex {
    Complex::new(x, 0.0)
}

/// `z F' + k F` for a series `F`.
fn log_derivative_form(f: &CoefficientSeries, k: f64) -> CoefficientSeries {
    &f.z_derivative() + &f.scale(real(k))
}

/// Builds both sides of the identity and returns their largest coefficient gap.
pub fn check_identity(id: IdentityId, a: &CoefficientSeries, c: f64, sigma: f64) -> Result<f64> {
    let bern = OperatorSpec::bernardi(c)?;
    let bern_next = OperatorSpec::bernardi(c + 1.0)?;
    let jks = OperatorSpec::jks(sigma)?;

    let (lhs, rhs) = match id {
        IdentityId::JksBernardiDerivative => {
            let jl = apply_multiplier(&jks, &apply_multiplier(&bern, a)?)?;
            let lhs = jl.z_derivative();
            let rhs = &apply_multiplier(&jks, a)?.scale(real(c + 1.0)) - &jl.scale(real(c));
            (lhs, rhs)
        }
        IdentityId::BernardiJksDerivative => {
            let ij = apply_multiplier(&jks, a)?;
            let lj = apply_multiplier(&bern, &ij)?;
            let lhs = lj.z_derivative();
            let rhs = &ij.scale(real(c + 1.0)) - &lj.scale(real(c));
            (lhs, rhs)
        }
        IdentityId::BernardiLogDerivative => {
            let l = apply_multiplier(&bern, a)?;
            (log_derivative_form(&l, c), a.scale(real(c + 1.0)))
        }
        IdentityId::ShiftedLogDerivative => {
            let l = apply_multiplier(&bern_next, a)?;
            (log_derivative_form(&l, c + 1.0), a.scale(real(c + 2.0)))
        }
        IdentityId::ShiftRelationDerivative | IdentityId::ShiftRelation => {
            let g = if id == IdentityId::ShiftRelationDerivative {
                a.z_derivative()
            } else {
                a.clone()
            };
            let lhs = log_derivative_form(&apply_multiplier(&bern, &g)?, c);
            let rhs = log_derivative_form(&apply_multiplier(&bern_next, &g)?, c + 1.0)
                .scale(real((c + 1.0) / (c + 2.0)));
            (lhs, rhs)
        }
        IdentityId::Commute => {
            let lj = apply_multiplier(&bern, &apply_multiplier(&jks, a)?)?;
            let jl = apply_multiplier(&jks, &apply_multiplier(&bern, a)?)?;
            (lj, jl)
        }
    };
    Ok(max_coeff_distance(&lhs, &rhs))
}

/// Normalized series `z + Σ a_n z^n` with `a_n` uniform in the unit disk.
pub fn random_normalized_series(seed: u64, order: usize) -> CoefficientSeries {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let order = order.max(1);
    let mut coeffs = vec![Complex::new(0.0, 0.0); order + 1];
    coeffs[1] = Complex::new(1.0, 0.0);
    for a in coeffs.iter_mut().skip(2) {
        let r = rng.gen::<f64>().sqrt();
        let t = std::f64::consts::TAU * rng.gen::<f64>();
        *a = Complex::from_polar(r, t);
    }
    CoefficientSeries::new(coeffs).expect("finite coefficients")
}

/// Worst residual of one identity at one `(c, σ)` over a batch of series.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityRow {
    pub identity: String,
    pub c: f64,
    pub sigma: f64,
    pub trials: usize,
    pub max_residual: f64,
    /// Residual divided by `max |a_n|` of the series it came from.
    pub max_relative_residual: f64,
}

/// Checks `ids` on `trials` random series of the given order for every
/// `(c, σ)` combination.
pub fn run_identity_suite(
    ids: &[IdentityId],
    trials: usize,
    seed: u64,
    order: usize,
    cs: &[f64],
    sigmas: &[f64],
) -> Result<Vec<IdentityRow>> {
    let series: Vec<CoefficientSeries> = (0..trials as u64)
        .map(|t| random_normalized_series(seed.wrapping_add(t), order))
        .collect();
    let mut rows = Vec::new();
    for &id in ids {
        for &c in cs {
            for &sigma in sigmas {
                let mut row = IdentityRow {
                    identity: id.name().to_string(),
                    c,
                    sigma,
                    trials,
                    max_residual: 0.0,
                    max_relative_residual: 0.0,
                };
                for a in &series {
                    let r = check_identity(id, a, c, sigma)?;
                    row.max_residual = row.max_residual.max(r);
                    row.max_relative_residual = row.max_relative_residual.max(r / a.max_abs_coeff());
                }
                rows.push(row);
            }
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_function_has_zero_residual() {
        let id = CoefficientSeries::identity(16);
        for which in IdentityId::ALL {
            for c in [-0.5, 0.0, 1.0, 2.5] {
                for sigma in [-1.0, 0.5, 2.0] {
                    assert_eq!(check_identity(which, &id, c, sigma).unwrap(), 0.0, "{which}");
                }
            }
        }
    }

    #[test]
    fn koebe_residuals_are_rounding_sized() {
        let k = CoefficientSeries::from_real(&(0..=32).map(|n| n as f64).collect::<Vec<_>>())
            .unwrap();
        for which in IdentityId::ALL {
            let r = check_identity(which, &k, 0.5, 1.3).unwrap();
            assert!(r <= 1e-12 * 32.0, "{which}: {r}");
        }
    }

    #[test]
    fn rejects_c_at_or_below_minus_one() {
        let id = CoefficientSeries::identity(4);
        assert!(check_identity(IdentityId::Commute, &id, -1.0, 1.0).is_err());
    }

    #[test]
    fn names_round_trip() {
        for which in IdentityId::ALL {
            assert_eq!(which.name().parse::<IdentityId>().unwrap(), which);
        }
    }

    #[test]
    fn suite_covers_every_combination() {
        let rows = run_identity_suite(&IdentityId::ALL, 3, 1, 16, &[0.0, 1.0], &[0.5]).unwrap();
        assert_eq!(rows.len(), IdentityId::ALL.len() * 2);
        assert!(rows.iter().all(|r| r.max_relative_residual <= 1e-12));
    }

    #[test]
    fn random_series_are_normalized_and_seeded() {
        let a = random_normalized_series(5, 10);
        assert!(a.is_normalized());
        assert!(a.coeffs().iter().all(|x| x.norm() <= 1.0));
        assert_eq!(a, random_normalized_series(5, 10));
        assert_ne!(a, random_normalized_series(6, 10));
    }

    #[test]
    fn detects_a_wrong_relation() {
        // Perturbing the right-hand side must be visible in the residual.
        let k = CoefficientSeries::from_real(&[0.0, 1.0, 0.5, 0.25]).unwrap();
        let l = apply_multiplier(&OperatorSpec::bernardi(1.0).unwrap(), &k).unwrap();
        let wrong = max_coeff_distance(&log_derivative_form(&l, 1.0), &k.scale(real(3.0)));
        assert!(wrong > 0.1);
    }
}
