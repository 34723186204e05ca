//! Generate–check–refine experiments for the inclusion theorems.
//!
//! For each parameter point a run draws members of the hypothesis class,
//! evaluates every hypothesis on the grid, and checks the conclusion only when
//! all of them hold. A conclusion failure is re-examined on refined grids
//! with longer series before it is reported as a counterexample.

pub mod catalog;
pub mod generate;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifiers::{
    certify_with, hypothesis_margin, CertifyOptions, DiskGrid, Status, TheoremParams, Verdict,
    MARGIN_FLOOR,
};
use crate::error::{Error, Result};
use crate::functions::{AnalyticFunction, DEFAULT_SERIES_ORDER};
use crate::Complex;

pub use catalog::{check_structure, CompanionChoice, Target, TheoremId, TheoremSpec};
pub use generate::{generate_member, generate_members, generate_pair, mix_seed};

/// Version of the report layout.
pub const SCHEMA_VERSION: u32 = 1;
pub const DEFAULT_SAMPLE_COUNT: usize = 50;
pub const DEFAULT_REFINEMENT_LEVELS: usize = 2;

/// Parameter values crossed to form the default experiment points.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParameterGrid {
    pub lambda: Vec<f64>,
    pub beta: Vec<f64>,
    pub eta: Vec<f64>,
    pub c: Vec<f64>,
    pub sigma: Vec<f64>,
}

impl Default for ParameterGrid {
    fn default() -> Self {
        Self {
            lambda: vec![0.0, 0.25, 0.5],
            beta: vec![0.0, 0.25],
            eta: vec![0.5, 1.0],
            c: vec![-0.25, 0.0, 1.0, 2.0],
            sigma: vec![0.5, 1.0, 2.0],
        }
    }
}

impl ParameterGrid {
    /// All combinations the theorem uses, restricted to its domain.
    pub fn points(&self, id: TheoremId) -> Vec<TheoremParams> {
        let opt = |used: bool, v: &[f64]| -> Vec<Option<f64>> {
            if used {
                v.iter().copied().map(Some).collect()
            } else {
                vec![None]
            }
        };
        let betas = opt(id.uses_beta(), &self.beta);
        let etas = opt(id.uses_eta(), &self.eta);
        let sigmas = opt(id.uses_sigma(), &self.sigma);
        let mut out = Vec::new();
        for &lambda in &self.lambda {
            for &beta in &betas {
                for &eta in &etas {
                    for &c in &self.c {
                        for &sigma in &sigmas {
                            let p = TheoremParams { lambda, beta, eta, c, sigma };
                            if id.in_domain(&p) {
                                out.push(p);
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub theorem: TheoremId,
    pub points: Vec<TheoremParams>,
    pub sample_count: usize,
    pub seed: u64,
    pub grid: DiskGrid,
    pub refinement_levels: usize,
    /// Series truncation order at refinement level 0.
    pub order: usize,
    pub companion: CompanionChoice,
}

impl ExperimentConfig {
    /// Default settings over the default parameter grid.
    pub fn new(theorem: TheoremId, seed: u64) -> Self {
        Self {
            theorem,
            points: ParameterGrid::default().points(theorem),
            sample_count: DEFAULT_SAMPLE_COUNT,
            seed,
            grid: DiskGrid::default(),
            refinement_levels: DEFAULT_REFINEMENT_LEVELS,
            order: DEFAULT_SERIES_ORDER,
            companion: CompanionChoice::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.sample_count == 0 {
            return Err(Error::Config("sample_count must be at least 1".into()));
        }
        if self.order < 8 {
            return Err(Error::Config(format!("series order {} is too small", self.order)));
        }
        for p in &self.points {
            self.theorem.check_domain(p)?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Confirmed,
    Vacuous,
    Inconclusive,
    CounterexampleFlagged,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HypothesisRecord {
    pub name: String,
    pub margin: f64,
    pub witness: Complex,
    pub reliable: bool,
    /// Present for class-membership hypotheses.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub status: Option<Status>,
}

impl HypothesisRecord {
    fn holds(&self) -> bool {
        self.margin > MARGIN_FLOOR && self.reliable && self.status.is_none_or(|s| s == Status::Member)
    }

    fn fails(&self) -> bool {
        self.margin <= MARGIN_FLOOR
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrailEntry {
    pub level: usize,
    pub angles_per_radius: usize,
    pub max_radius: f64,
    pub order: usize,
    pub min_hypothesis_margin: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conclusion_margin: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conclusion_status: Option<Status>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleRecord {
    pub index: usize,
    pub seed: u64,
    pub function: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub companion: Option<String>,
    pub hypotheses: Vec<HypothesisRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub conclusion: Option<Verdict>,
    pub outcome: Outcome,
    pub trail: Vec<TrailEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub confirmed: usize,
    pub vacuous: usize,
    pub inconclusive: usize,
    pub counterexample_flagged: usize,
}

impl Counts {
    fn add(&mut self, o: Outcome) {
        match o {
            Outcome::Confirmed => self.confirmed += 1,
            Outcome::Vacuous => self.vacuous += 1,
            Outcome::Inconclusive => self.inconclusive += 1,
            Outcome::CounterexampleFlagged => self.counterexample_flagged += 1,
        }
    }

    fn merge(&mut self, o: &Counts) {
        self.confirmed += o.confirmed;
        self.vacuous += o.vacuous;
        self.inconclusive += o.inconclusive;
        self.counterexample_flagged += o.counterexample_flagged;
    }

    pub fn total(&self) -> usize {
        self.confirmed + self.vacuous + self.inconclusive + self.counterexample_flagged
    }

    /// Fraction of samples whose hypotheses were all met.
    pub fn hypothesis_hit_rate(&self) -> f64 {
        let total = self.total();
        if total == 0 {
            0.0
        } else {
            (total - self.vacuous) as f64 / total as f64
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointReport {
    pub params: TheoremParams,
    pub hypothesis_class: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub companion_class: Option<String>,
    pub side_conditions: Vec<String>,
    pub conclusion_class: String,
    pub counts: Counts,
    pub hypothesis_hit_rate: f64,
    pub records: Vec<SampleRecord>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema: u32,
    pub theorem: TheoremId,
    pub config: ExperimentConfig,
    pub counts: Counts,
    pub hypothesis_hit_rate: f64,
    pub points: Vec<PointReport>,
}

impl ExperimentReport {
    pub fn flagged(&self) -> impl Iterator<Item = (&TheoremParams, &SampleRecord)> {
        self.points.iter().flat_map(|p| {
            p.records
                .iter()
                .filter(|r| r.outcome == Outcome::CounterexampleFlagged)
                .map(move |r| (&p.params, r))
        })
    }
}

/// One sample with everything needed to re-evaluate it at another resolution.
pub struct Sample<'a> {
    pub theorem: &'a TheoremSpec,
    pub params: &'a TheoremParams,
    pub f: AnalyticFunction,
    pub g: Option<AnalyticFunction>,
}

/// Hypotheses and (when they all hold) conclusion at one resolution.
pub struct Evaluation {
    pub hypotheses: Vec<HypothesisRecord>,
    pub conclusion: Option<Verdict>,
}

impl Evaluation {
    fn any_failed(&self) -> bool {
        self.hypotheses.iter().any(HypothesisRecord::fails)
    }

    fn all_hold(&self) -> bool {
        self.hypotheses.iter().all(HypothesisRecord::holds)
    }

    fn min_hypothesis_margin(&self) -> f64 {
        self.hypotheses.iter().map(|h| h.margin).fold(f64::INFINITY, f64::min)
    }
}

fn membership_record(v: Verdict) -> HypothesisRecord {
    HypothesisRecord {
        name: v.class,
        margin: v.margin,
        witness: v.witness,
        reliable: v.reliable,
        status: Some(v.status),
    }
}

impl Sample<'_> {
    fn evaluate(&self, grid: &DiskGrid, order: usize) -> Result<Evaluation> {
        let opts = CertifyOptions { order, strict: false };
        let g = self.g.as_ref();
        let mut hypotheses = vec![membership_record(certify_with(
            &self.f,
            &self.theorem.hypothesis_class,
            grid,
            g,
            &opts,
        )?)];
        if let (Some(cspec), Some(g)) = (&self.theorem.companion_class, g) {
            hypotheses.push(membership_record(certify_with(g, cspec, grid, None, &opts)?));
        }
        for hyp in &self.theorem.side_conditions {
            let m = hypothesis_margin(&self.f, *hyp, self.params, grid, g, order)?;
            hypotheses.push(HypothesisRecord {
                name: hyp.name(),
                margin: m.margin,
                witness: m.witness,
                reliable: m.reliable,
                status: None,
            });
        }
        let mut eval = Evaluation { hypotheses, conclusion: None };
        if eval.all_hold() {
            let target = match self.theorem.target {
                Target::F => self.f.clone(),
                Target::JksImage(op) => AnalyticFunction::apply(op, self.f.clone())?,
            };
            eval.conclusion = Some(certify_with(&target, &self.theorem.conclusion, grid, g, &opts)?);
        }
        Ok(eval)
    }
}

/// Re-evaluates a sample at refinement `level`: angles doubled and a radius
/// `0.99·r_max` added per level, series order doubled per level.
pub fn refine(sample: &Sample<'_>, grid: &DiskGrid, order: usize, level: usize) -> Result<Evaluation> {
    sample.evaluate(&grid.refined_to(level), order << level)
}

fn trail_entry(level: usize, grid: &DiskGrid, order: usize, e: &Evaluation) -> TrailEntry {
    TrailEntry {
        level,
        angles_per_radius: grid.angles_per_radius(),
        max_radius: grid.max_radius(),
        order,
        min_hypothesis_margin: e.min_hypothesis_margin(),
        conclusion_margin: e.conclusion.as_ref().map(|v| v.margin),
        conclusion_status: e.conclusion.as_ref().map(|v| v.status),
    }
}

fn classify(e: &Evaluation) -> Option<Outcome> {
    if e.any_failed() {
        return Some(Outcome::Vacuous);
    }
    match e.conclusion.as_ref().map(|v| v.status) {
        Some(Status::Member) => Some(Outcome::Confirmed),
        _ => None,
    }
}

fn run_sample(cfg: &ExperimentConfig, spec: &TheoremSpec, params: &TheoremParams, point: usize, index: usize) -> Result<SampleRecord> {
    let stream = ((cfg.theorem as u64) << 48) ^ ((point as u64) << 24) ^ index as u64;
    let seed = mix_seed(cfg.seed, stream);
    let first = index == 0;
    let drawn = match &spec.companion_class {
        Some(cspec) => generate_pair(&spec.hypothesis_class, cspec, seed, &cfg.grid, cfg.order, first)
            .map(|(f, g)| (f, Some(g))),
        None => generate_member(&spec.hypothesis_class, seed, &cfg.grid, cfg.order, first).map(|f| (f, None)),
    };
    let (f, g) = match drawn {
        Ok(pair) => pair,
        Err(e @ Error::GenerationExhausted { .. }) => {
            return Ok(SampleRecord {
                index,
                seed,
                function: String::new(),
                companion: None,
                hypotheses: vec![],
                conclusion: None,
                outcome: Outcome::Inconclusive,
                trail: vec![],
                note: Some(e.to_string()),
            })
        }
        Err(e) => return Err(e),
    };
    let sample = Sample { theorem: spec, params, f, g };

    let mut eval = sample.evaluate(&cfg.grid, cfg.order)?;
    let mut trail = vec![trail_entry(0, &cfg.grid, cfg.order, &eval)];
    let mut outcome = classify(&eval);
    let mut level = 0;
    while outcome.is_none() && level < cfg.refinement_levels {
        level += 1;
        eval = refine(&sample, &cfg.grid, cfg.order, level)?;
        trail.push(trail_entry(level, &cfg.grid.refined_to(level), cfg.order << level, &eval));
        outcome = classify(&eval);
    }
    let outcome = outcome.unwrap_or_else(|| match eval.conclusion.as_ref().map(|v| v.status) {
        Some(Status::NonMember) if eval.all_hold() => Outcome::CounterexampleFlagged,
        _ => Outcome::Inconclusive,
    });
    Ok(SampleRecord {
        index,
        seed,
        function: sample.f.label.clone(),
        companion: sample.g.as_ref().map(|g| g.label.clone()),
        hypotheses: eval.hypotheses,
        conclusion: eval.conclusion,
        outcome,
        trail,
        note: None,
    })
}

/// Runs one theorem over all configured parameter points.
pub fn run_theorem(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    cfg.validate()?;
    let mut points = Vec::with_capacity(cfg.points.len());
    let mut counts = Counts::default();
    for (pi, params) in cfg.points.iter().enumerate() {
        let spec = cfg.theorem.instantiate(params, cfg.companion)?;
        check_structure(cfg.theorem, &spec, params).map_err(Error::Config)?;
        let records = (0..cfg.sample_count)
            .into_par_iter()
            .map(|i| run_sample(cfg, &spec, params, pi, i))
            .collect::<Result<Vec<_>>>()?;
        let mut pc = Counts::default();
        for r in &records {
            pc.add(r.outcome);
        }
        counts.merge(&pc);
        points.push(PointReport {
            params: *params,
            hypothesis_class: spec.hypothesis_class.to_string(),
            companion_class: spec.companion_class.map(|c| c.to_string()),
            side_conditions: spec.side_conditions.iter().map(|h| h.name()).collect(),
            conclusion_class: spec.conclusion.to_string(),
            counts: pc,
            hypothesis_hit_rate: pc.hypothesis_hit_rate(),
            records,
        });
    }
    Ok(ExperimentReport {
        schema: SCHEMA_VERSION,
        theorem: cfg.theorem,
        config: cfg.clone(),
        counts,
        hypothesis_hit_rate: counts.hypothesis_hit_rate(),
        points,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub theorem: TheoremId,
    pub points: usize,
    pub counts: Counts,
    pub hypothesis_hit_rate: f64,
    /// Parameter points with no confirmed sample.
    pub points_without_confirmation: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CatalogReport {
    pub schema: u32,
    pub seed: u64,
    pub summary: Vec<SummaryRow>,
    pub experiments: Vec<ExperimentReport>,
}

impl CatalogReport {
    pub fn total_flagged(&self) -> usize {
        self.summary.iter().map(|r| r.counts.counterexample_flagged).sum()
    }
}

pub fn summarize(report: &ExperimentReport) -> SummaryRow {
    SummaryRow {
        theorem: report.theorem,
        points: report.points.len(),
        counts: report.counts,
        hypothesis_hit_rate: report.hypothesis_hit_rate,
        points_without_confirmation: report.points.iter().filter(|p| p.counts.confirmed == 0).count(),
    }
}

/// Runs every catalogued theorem with settings taken from `template`
/// (its theorem and points are replaced per theorem from `parameters`).
pub fn run_all(template: &ExperimentConfig, parameters: &ParameterGrid) -> Result<CatalogReport> {
    let experiments = TheoremId::ALL
        .iter()
        .map(|&id| {
            let cfg = ExperimentConfig {
                theorem: id,
                points: parameters.points(id),
                ..template.clone()
            };
            run_theorem(&cfg)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CatalogReport {
        schema: SCHEMA_VERSION,
        seed: template.seed,
        summary: experiments.iter().map(summarize).collect(),
        experiments,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(theorem: TheoremId, points: Vec<TheoremParams>, samples: usize) -> ExperimentConfig {
        ExperimentConfig {
            points,
            sample_count: samples,
            ..ExperimentConfig::new(theorem, 7)
        }
    }

    fn p(lambda: f64, c: f64) -> TheoremParams {
        TheoremParams { lambda, c, ..Default::default() }
    }

    #[test]
    fn default_points_respect_domains() {
        let grid = ParameterGrid::default();
        assert_eq!(grid.points(TheoremId::T2_3).len(), 11);
        assert_eq!(grid.points(TheoremId::C2_4).len(), 7);
        assert_eq!(grid.points(TheoremId::T2_10).len(), 18);
        assert_eq!(grid.points(TheoremId::C2_11).len(), 6);
        assert_eq!(grid.points(TheoremId::T2_8_i).len(), 24);
        for id in TheoremId::ALL {
            assert!(!grid.points(id).is_empty(), "{id}");
        }
    }

    #[test]
    fn t2_3_koebe_point_is_confirmed() {
        let report = run_theorem(&small(TheoremId::T2_3, vec![p(0.25, 0.25)], 6)).unwrap();
        assert_eq!(report.counts.confirmed, 6);
        assert_eq!(report.counts.counterexample_flagged, 0);
    }

    #[test]
    fn t2_7_identity_conclusion_margin() {
        let params = TheoremParams { lambda: 0.25, eta: Some(0.5), c: 1.0, ..Default::default() };
        let report = run_theorem(&small(TheoremId::T2_7, vec![params], 1)).unwrap();
        let rec = &report.points[0].records[0];
        assert_eq!(rec.function, "L_1^-1[div_n[identity]]");
        assert_eq!(rec.outcome, Outcome::Confirmed);
        let margin = rec.conclusion.as_ref().unwrap().margin;
        assert!((margin - 0.25 * std::f64::consts::PI).abs() < 1e-12);
    }

    #[test]
    fn conditional_re_difference_is_vacuous_and_sound() {
        let report = run_theorem(&small(TheoremId::T2_1_i, vec![p(0.0, 1.0)], 5)).unwrap();
        assert_eq!(report.counts.vacuous, 5);
        for r in &report.points[0].records {
            assert!(r.hypotheses.iter().any(|h| h.margin <= MARGIN_FLOOR));
            assert!(r.conclusion.is_none());
        }
    }

    #[test]
    fn reports_are_deterministic() {
        let cfg = small(TheoremId::T2_10, vec![TheoremParams { sigma: Some(2.0), ..p(0.25, 0.25) }], 4);
        let a = serde_json::to_string(&run_theorem(&cfg).unwrap()).unwrap();
        let b = serde_json::to_string(&run_theorem(&cfg).unwrap()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn out_of_domain_config_is_rejected() {
        let cfg = small(TheoremId::C2_4, vec![p(0.5, 0.0)], 1);
        assert!(matches!(run_theorem(&cfg), Err(Error::Config(_))));
    }
}
