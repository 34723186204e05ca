//! Side conditions of the inclusion theorems, evaluated as grid margins.
//!
//! Each margin is positive exactly when the condition holds at every grid
//! point. The Re-difference and quotient conditions are analytic functions
//! vanishing at the origin, so on any grid they are at best small; the harness
//! reports how often they are met.

use serde::{Deserialize, Serialize};

use super::grid::{evaluate_series, sampling_series, DiskGrid, GridValues};
use super::{sample, PointValue, Scan, DEGENERACY_FLOOR, DIVISION_FLOOR};
use crate::error::{Error, Result};
use crate::functions::AnalyticFunction;
use crate::operators::{apply_multiplier, OperatorSpec};
use crate::Complex;

/// Which Bernardi operator a condition refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shift {
    /// `L_c`
    Same,
    /// `L_{c+1}`
    Next,
}

impl Shift {
    fn operator(self, c: f64) -> Result<OperatorSpec> {
        match self {
            Shift::Same => OperatorSpec::bernardi(c),
            Shift::Next => OperatorSpec::bernardi(c + 1.0),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", content = "shift", rename_all = "snake_case")]
pub enum HypothesisId {
    /// `Re{zf'/f - z(Lf)'/(Lf)} > 0`
    StarlikeGap(Shift),
    /// The same Re-difference with the companion `g` in place of `f`.
    CompanionStarlikeGap(Shift),
    /// `|arg(zf'/f - λ)| <= |arg(z(Lf)'/(Lf) - λ)|`
    ArgDominance(Shift),
    /// `Re{z (L zf'/Lg)' / (z(Lg)'/Lg + c)} > 0`
    CompanionQuotient(Shift),
    /// `Re{z ((L zf')'/(Lg)')' / (z(Lg)''/(Lg)' + c + 1)} > 0`
    QuasiCompanionQuotient(Shift),
    /// `z(L_c I^σ f)'/(L_c I^σ f) ≠ λ`
    NondegenerateStarlike,
    /// `(z(L_c I^σ f)')'/(L_c I^σ f)' ≠ λ`
    NondegenerateConvex,
}

impl HypothesisId {
    pub fn needs_companion(&self) -> bool {
        matches!(
            self,
            HypothesisId::CompanionStarlikeGap(_)
                | HypothesisId::CompanionQuotient(_)
                | HypothesisId::QuasiCompanionQuotient(_)
        )
    }

    pub fn name(&self) -> String {
        let shift = |s: &Shift| match s {
            Shift::Same => "c",
            Shift::Next => "c+1",
        };
        match self {
            HypothesisId::StarlikeGap(s) => format!("starlike_gap[{}]", shift(s)),
            HypothesisId::CompanionStarlikeGap(s) => format!("companion_starlike_gap[{}]", shift(s)),
            HypothesisId::ArgDominance(s) => format!("arg_dominance[{}]", shift(s)),
            HypothesisId::CompanionQuotient(s) => format!("companion_quotient[{}]", shift(s)),
            HypothesisId::QuasiCompanionQuotient(s) => {
                format!("quasi_companion_quotient[{}]", shift(s))
            }
            HypothesisId::NondegenerateStarlike => "nondegenerate_starlike".into(),
            HypothesisId::NondegenerateConvex => "nondegenerate_convex".into(),
        }
    }
}

/// Parameter values a condition may refer to.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct TheoremParams {
    pub lambda: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    pub c: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypothesisMargin {
    pub margin: f64,
    pub witness: Complex,
    pub reliable: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
}

fn small(w: Complex) -> bool {
    w.norm() < DIVISION_FLOOR
}

fn at(v: &GridValues, i: usize) -> (Complex, Complex, Complex) {
    (v.value[i], v.first[i], v.second[i])
}

/// `z F'/F` at one point.
fn log_ratio(z: Complex, (v, d1, _): (Complex, Complex, Complex)) -> Option<Complex> {
    (!small(v)).then(|| z * d1 / v)
}

fn re_difference(z: Complex, f: (Complex, Complex, Complex), lf: (Complex, Complex, Complex)) -> PointValue {
    match (log_ratio(z, f), log_ratio(z, lf)) {
        (Some(a), Some(b)) => PointValue::Value { margin: (a - b).re, gap: f64::INFINITY },
        _ => PointValue::Degenerate("zero denominator in Re-difference"),
    }
}

/// Evaluates a side condition on the grid. `order` is the series truncation
/// used for operator images.
pub fn hypothesis_margin(
    f: &AnalyticFunction,
    hyp: HypothesisId,
    params: &TheoremParams,
    grid: &DiskGrid,
    companion: Option<&AnalyticFunction>,
    order: usize,
) -> Result<HypothesisMargin> {
    let g = match (hyp.needs_companion(), companion) {
        (true, None) => return Err(Error::MissingCompanion(hyp.name())),
        (_, g) => g,
    };
    let c = params.c;
    let lambda = params.lambda;

    let (scan, reliable) = match hyp {
        HypothesisId::StarlikeGap(shift) | HypothesisId::CompanionStarlikeGap(shift) => {
            let h = if hyp.needs_companion() { g.expect("checked") } else { f };
            let op = shift.operator(c)?;
            let hv = sample(h, None, grid, order)?;
            let lv = sample(h, Some(&op), grid, order)?;
            let scan = Scan::run(grid, |i, z| re_difference(z, at(&hv, i), at(&lv, i)));
            (scan, hv.all_reliable() && lv.all_reliable())
        }
        HypothesisId::ArgDominance(shift) => {
            let op = shift.operator(c)?;
            let fv = sample(f, None, grid, order)?;
            let lv = sample(f, Some(&op), grid, order)?;
            let scan = Scan::run(grid, |i, z| {
                match (log_ratio(z, at(&fv, i)), log_ratio(z, at(&lv, i))) {
                    (Some(a), Some(b)) if !small(a - lambda) && !small(b - lambda) => {
                        PointValue::Value {
                            margin: (b - lambda).arg().abs() - (a - lambda).arg().abs(),
                            gap: f64::INFINITY,
                        }
                    }
                    _ => PointValue::Degenerate("argument undefined at zero"),
                }
            });
            (scan, fv.all_reliable() && lv.all_reliable())
        }
        HypothesisId::CompanionQuotient(shift) | HypothesisId::QuasiCompanionQuotient(shift) => {
            let op = shift.operator(c)?;
            let p = evaluate_series(
                &apply_multiplier(&op, &sampling_series(f, order)?.z_derivative())?,
                grid,
            );
            let q = sample(g.expect("checked"), Some(&op), grid, order)?;
            let quasi = matches!(hyp, HypothesisId::QuasiCompanionQuotient(_));
            let scan = Scan::run(grid, |i, z| {
                let (p0, p1, p2) = at(&p, i);
                let (q0, q1, q2) = at(&q, i);
                let (num, den) = if quasi {
                    (z * (p2 * q1 - p1 * q2), q1 * (z * q2 + (c + 1.0) * q1))
                } else {
                    (z * (p1 * q0 - p0 * q1), q0 * (z * q1 + c * q0))
                };
                if small(den) {
                    PointValue::Degenerate("zero denominator in companion quotient")
                } else {
                    PointValue::Value { margin: (num / den).re, gap: f64::INFINITY }
                }
            });
            (scan, p.all_reliable() && q.all_reliable())
        }
        HypothesisId::NondegenerateStarlike | HypothesisId::NondegenerateConvex => {
            let sigma = params
                .sigma
                .ok_or_else(|| Error::InvalidParameter("nondegeneracy needs sigma".into()))?;
            let jks = OperatorSpec::jks(sigma)?;
            let bern = OperatorSpec::bernardi(c)?;
            let series = apply_multiplier(&bern, &apply_multiplier(&jks, &sampling_series(f, order)?)?)?;
            let v = evaluate_series(&series, grid);
            let convex = hyp == HypothesisId::NondegenerateConvex;
            let scan = Scan::run(grid, |i, z| {
                let (v0, v1, v2) = at(&v, i);
                let w = if convex {
                    if small(v1) {
                        return PointValue::Degenerate("derivative vanishes");
                    }
                    1.0 + z * v2 / v1
                } else {
                    if small(v0) {
                        return PointValue::Degenerate("function vanishes");
                    }
                    z * v1 / v0
                };
                PointValue::Value { margin: (w - lambda).norm() - DEGENERACY_FLOOR, gap: f64::INFINITY }
            });
            (scan, v.all_reliable())
        }
    };

    let reason = if let Some((_, why)) = scan.degenerate {
        Some(why.to_string())
    } else if !reliable {
        Some("truncated series tail exceeds tolerance".to_string())
    } else {
        None
    };
    let (margin, witness) = match scan.degenerate {
        // A degenerate point never supports a strict inequality.
        Some((z, _)) => (scan.margin.min(0.0), z),
        None => (scan.margin, scan.witness),
    };
    Ok(HypothesisMargin { margin, witness, reliable, reason })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::functions::{Builtin, DEFAULT_SERIES_ORDER};

    fn params(c: f64) -> TheoremParams {
        TheoremParams { lambda: 0.0, c, sigma: Some(1.0), ..Default::default() }
    }

    #[test]
    fn identity_gives_exact_zero() {
        let id = AnalyticFunction::identity();
        let grid = DiskGrid::default();
        for c in [-0.25, 0.0, 1.0, 2.0] {
            for hyp in [
                HypothesisId::StarlikeGap(Shift::Same),
                HypothesisId::StarlikeGap(Shift::Next),
                HypothesisId::ArgDominance(Shift::Same),
                HypothesisId::CompanionStarlikeGap(Shift::Next),
                HypothesisId::CompanionQuotient(Shift::Same),
                HypothesisId::QuasiCompanionQuotient(Shift::Next),
            ] {
                let m = hypothesis_margin(&id, hyp, &params(c), &grid, Some(&id), 64).unwrap();
                assert_eq!(m.margin, 0.0, "{hyp:?} c={c}");
            }
        }
    }

    #[test]
    fn nondegeneracy_of_identity_is_one_minus_lambda() {
        let id = AnalyticFunction::identity();
        let p = TheoremParams { lambda: 0.25, c: 1.0, sigma: Some(2.0), ..Default::default() };
        let m = hypothesis_margin(&id, HypothesisId::NondegenerateStarlike, &p, &DiskGrid::default(), None, 64)
            .unwrap();
        assert!((m.margin - (0.75 - DEGENERACY_FLOOR)).abs() < 1e-15);
    }

    #[test]
    fn companion_forms_need_a_companion() {
        let id = AnalyticFunction::identity();
        let err = hypothesis_margin(
            &id,
            HypothesisId::CompanionQuotient(Shift::Same),
            &params(0.0),
            &DiskGrid::default(),
            None,
            64,
        );
        assert!(matches!(err, Err(Error::MissingCompanion(_))));
    }

    #[test]
    fn koebe_starlike_gap_matches_pointwise_quadrature() {
        // Brute-force oracle: evaluate L_1 f by quadrature and its derivative
        // from the identity z(L_c f)' = (c+1) f - c L_c f.
        let koebe = AnalyticFunction::builtin(Builtin::koebe());
        let grid = DiskGrid::new(vec![0.2, 0.5, 0.8], 32).unwrap();
        let c = 1.0;
        let m = hypothesis_margin(
            &koebe,
            HypothesisId::StarlikeGap(Shift::Same),
            &params(c),
            &grid,
            None,
            DEFAULT_SERIES_ORDER,
        )
        .unwrap();
        let op = OperatorSpec::bernardi(c).unwrap();
        let mut best = f64::INFINITY;
        for z in grid.points() {
            let f = z / ((1.0 - z) * (1.0 - z));
            let fp = (1.0 + z) / ((1.0 - z) * (1.0 - z) * (1.0 - z));
            let l = crate::operators::apply_quadrature(&op, &koebe, z).unwrap();
            let zlp = (c + 1.0) * f - c * l;
            best = best.min((z * fp / f - zlp / l).re);
        }
        assert!((m.margin - best).abs() < 1e-8, "{} vs {best}", m.margin);
        // Regression fixture: the condition fails for the Koebe function.
        assert!(m.margin < 0.0);
    }
}
