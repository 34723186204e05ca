//! Seeded accept–reject generation of class members.
//!
//! Candidates come from two families: dilated generalized Koebe functions
//! `ρ⁻¹ k(ρz)` with `k = z(1 - xz)^{-2(1-λ')}`, `λ' >= λ`, and random
//! polynomial perturbations of the identity. Convex-type classes use the
//! coefficient map `b_n = a_n / n` (so that `z b' = a`), companion classes
//! build `f` from the companion, and lifted classes invert the operator
//! multiplier. Every candidate is certified before it is accepted.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::classifiers::{certify_with, CertifyOptions, ClassKind, ClassSpec, DiskGrid, Status, MARGIN_FLOOR};
use crate::error::{Error, Result};
use crate::functions::{generate_perturbed, AnalyticFunction, Builtin, DEFAULT_SERIES_ORDER};
use crate::operators::{apply_inverse_multiplier, apply_multiplier};
use crate::series::CoefficientSeries;
use crate::Complex;

/// Rejections allowed per requested member.
pub const REJECTIONS_PER_MEMBER: usize = 1000;
/// Accepted members clear the class boundary by this much.
pub const ACCEPT_MARGIN: f64 = 10.0 * MARGIN_FLOOR;

const MAX_PERTURBATION_DEGREE: usize = 24;

/// SplitMix64 finalizer, used to derive independent stream seeds.
pub fn mix_seed(seed: u64, stream: u64) -> u64 {
    let mut z = seed ^ stream.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

struct Candidate {
    series: CoefficientSeries,
    label: String,
}

/// A normalized function expected to be starlike of order about `lambda`.
fn starlike_candidate(rng: &mut ChaCha8Rng, lambda: f64, order: usize, identity: bool) -> Result<Candidate> {
    if identity {
        return Ok(Candidate {
            series: CoefficientSeries::identity(1),
            label: "identity".into(),
        });
    }
    if rng.gen_bool(0.5) {
        let lam = lambda + (1.0 - lambda) * rng.gen::<f64>();
        let theta = 2.0 * PI * rng.gen::<f64>() - PI;
        let rho = 0.3 + 0.7 * rng.gen::<f64>();
        let k = Builtin::koebe_general(lam, Complex::from_polar(1.0, theta))?;
        let series = AnalyticFunction::builtin(k)
            .to_series(order)?
            .map_indexed(|n, a| if n == 0 { a } else { a * rho.powi(n as i32 - 1) });
        Ok(Candidate {
            series,
            label: format!("koebe:lambda={lam},theta={theta},dilation={rho}"),
        })
    } else {
        let degree = rng.gen_range(2..=MAX_PERTURBATION_DEGREE);
        let amplitude = 1.5 * rng.gen::<f64>();
        let f = generate_perturbed(rng.gen(), degree, amplitude)?;
        Ok(Candidate {
            series: f.to_series(degree)?,
            label: f.label,
        })
    }
}

fn divide_by_index(c: Candidate) -> Candidate {
    Candidate {
        series: c
            .series
            .map_indexed(|n, a| if n == 0 { a } else { a / n as f64 }),
        label: format!("div_n[{}]", c.label),
    }
}

/// Candidate for a base class without companion.
fn base_candidate(kind: &ClassKind, rng: &mut ChaCha8Rng, order: usize, identity: bool) -> Result<Candidate> {
    let c = starlike_candidate(rng, kind.lambda(), order, identity)?;
    match kind {
        ClassKind::Convex { .. } | ClassKind::StronglyConvex { .. } => Ok(divide_by_index(c)),
        _ => Ok(c),
    }
}

/// Undoes the lift so that the operator image is the candidate.
fn unlift(spec: &ClassSpec, c: Candidate) -> Result<AnalyticFunction> {
    match &spec.lift {
        None => Ok(AnalyticFunction::from_series(c.series, c.label)),
        Some(op) => Ok(AnalyticFunction::from_series(
            apply_inverse_multiplier(op, &c.series)?,
            format!("{}^-1[{}]", op.symbol(), c.label),
        )),
    }
}

fn accepted(f: &AnalyticFunction, spec: &ClassSpec, grid: &DiskGrid, g: Option<&AnalyticFunction>, opts: &CertifyOptions) -> Result<bool> {
    let v = certify_with(f, spec, grid, g, opts)?;
    Ok(v.status == Status::Member && v.margin > ACCEPT_MARGIN)
}

/// One member of `spec` (which must not need a companion). The first
/// candidate is the identity when `identity_first` is set.
pub fn generate_member(
    spec: &ClassSpec,
    seed: u64,
    grid: &DiskGrid,
    order: usize,
    identity_first: bool,
) -> Result<AnalyticFunction> {
    if spec.kind.needs_companion() {
        return Err(Error::MissingCompanion(spec.to_string()));
    }
    let opts = CertifyOptions { order, strict: false };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for attempt in 0..=REJECTIONS_PER_MEMBER {
        let c = base_candidate(&spec.kind, &mut rng, order, identity_first && attempt == 0)?;
        let f = unlift(spec, c)?;
        if accepted(&f, spec, grid, None, &opts)? {
            return Ok(f);
        }
    }
    Err(Error::GenerationExhausted {
        class: spec.to_string(),
        rejections: REJECTIONS_PER_MEMBER,
    })
}

/// `count` members of `spec`, deterministic under `seed`.
pub fn generate_members(spec: &ClassSpec, count: usize, seed: u64, grid: &DiskGrid) -> Result<Vec<AnalyticFunction>> {
    if count == 0 {
        return Err(Error::InvalidParameter("count must be at least 1".into()));
    }
    (0..count)
        .map(|i| generate_member(spec, mix_seed(seed, i as u64), grid, DEFAULT_SERIES_ORDER, i == 0))
        .collect()
}

/// A pair `(f, g)` with `f` in the companion class `spec` relative to `g`,
/// and `g` in `companion_spec`.
pub fn generate_pair(
    spec: &ClassSpec,
    companion_spec: &ClassSpec,
    seed: u64,
    grid: &DiskGrid,
    order: usize,
    identity_first: bool,
) -> Result<(AnalyticFunction, AnalyticFunction)> {
    let quasi = match spec.kind {
        ClassKind::CloseToConvex { .. } => false,
        ClassKind::QuasiConvex { .. } => true,
        _ => {
            return Err(Error::InvalidParameter(format!("{spec} takes no companion")));
        }
    };
    let opts = CertifyOptions { order, strict: false };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for attempt in 0..=REJECTIONS_PER_MEMBER {
        let first = identity_first && attempt == 0;
        let g = unlift(companion_spec, base_candidate(&companion_spec.kind, &mut rng, order, first)?)?;
        if !accepted(&g, companion_spec, grid, None, &opts)? {
            continue;
        }
        // Image of g under the lift of the f-class.
        let g_series = g.to_series(order.max(g_order(&g)))?;
        let big_g = match &spec.lift {
            Some(op) => apply_multiplier(op, &g_series)?,
            None => g_series,
        };
        // 1 + ε(z) = p(z)/z for a perturbation p of the identity.
        let (factor, factor_label) = if first {
            (CoefficientSeries::constant(Complex::new(1.0, 0.0), 1), "1".to_string())
        } else {
            let degree = rng.gen_range(2..=8);
            let p = generate_perturbed(rng.gen(), degree, 0.5 * rng.gen::<f64>())?;
            let coeffs = p.to_series(degree)?.coeffs()[1..].to_vec();
            (CoefficientSeries::new(coeffs)?, p.label)
        };
        let n_max = big_g.order();
        let big_f = if quasi {
            // (zF')' = G' (1 + ε)
            let q = big_g.derivative().cauchy_product(&factor.with_order(n_max));
            big_g.map_indexed(|n, _| if n == 0 { Complex::new(0.0, 0.0) } else { q.coeff(n - 1) / (n * n) as f64 })
        } else {
            // zF' = G (1 + ε)
            let q = big_g.cauchy_product(&factor.with_order(n_max));
            big_g.map_indexed(|n, _| if n == 0 { Complex::new(0.0, 0.0) } else { q.coeff(n) / n as f64 })
        };
        let label = format!("pair[{}; {}]", g.label, factor_label);
        let f = unlift(spec, Candidate { series: big_f, label })?;
        if accepted(&f, spec, grid, Some(&g), &opts)? {
            return Ok((f, g));
        }
    }
    Err(Error::GenerationExhausted {
        class: spec.to_string(),
        rejections: REJECTIONS_PER_MEMBER,
    })
}

fn g_order(g: &AnalyticFunction) -> usize {
    match &g.backend {
        crate::functions::Backend::Series { series } => series.order(),
        _ => 0,
    }
}
