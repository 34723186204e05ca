//! Sampled certification of class membership.
//!
//! Every class is an open condition on the disk. A certificate evaluates the
//! defining expression on a [`DiskGrid`] and reports the signed margin to the
//! boundary of the condition, minimized over the grid, together with the
//! grid point where the minimum occurs. `Member` therefore means that no
//! violation was found on the grid; `NonMember` means one was.

pub mod grid;
pub mod hypothesis;

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::functions::{AnalyticFunction, DEFAULT_SERIES_ORDER};
use crate::operators::{apply_multiplier, OperatorSpec};
use crate::params::parse_params;
use crate::Complex;

pub use grid::{evaluate_function, evaluate_series, sampling_series, DiskGrid, GridValues};
pub use hypothesis::{hypothesis_margin, HypothesisId, HypothesisMargin, Shift, TheoremParams};

/// Margins inside `(-MARGIN_FLOOR, MARGIN_FLOOR)` are inconclusive.
pub const MARGIN_FLOOR: f64 = 1e-7;
/// Required gap for the `≠ λ` side conditions of the strongly starlike/convex lifts.
pub const DEGENERACY_FLOOR: f64 = 1e-6;
/// Denominators (and arguments of `arg`) smaller than this are treated as zero.
pub const DIVISION_FLOOR: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum ClassKind {
    /// `Re(zf'/f) > λ`
    Starlike { lambda: f64 },
    /// `Re(1 + zf''/f') > λ`
    Convex { lambda: f64 },
    /// `Re(zf'/g) > β`, `g` starlike of order `λ`
    CloseToConvex { beta: f64, lambda: f64 },
    /// `Re((zf')'/g') > β`, `g` convex of order `λ`
    QuasiConvex { beta: f64, lambda: f64 },
    /// `|arg(zf'/f - λ)| < πη/2`
    StronglyStarlike { eta: f64, lambda: f64 },
    /// `|arg(1 + zf''/f' - λ)| < πη/2`
    StronglyConvex { eta: f64, lambda: f64 },
}

impl ClassKind {
    pub fn lambda(&self) -> f64 {
        match *self {
            ClassKind::Starlike { lambda }
            | ClassKind::Convex { lambda }
            | ClassKind::CloseToConvex { lambda, .. }
            | ClassKind::QuasiConvex { lambda, .. }
            | ClassKind::StronglyStarlike { lambda, .. }
            | ClassKind::StronglyConvex { lambda, .. } => lambda,
        }
    }

    pub fn needs_companion(&self) -> bool {
        matches!(self, ClassKind::CloseToConvex { .. } | ClassKind::QuasiConvex { .. })
    }

    fn is_strong(&self) -> bool {
        matches!(self, ClassKind::StronglyStarlike { .. } | ClassKind::StronglyConvex { .. })
    }

    /// The class a companion must belong to.
    pub fn companion_kind(&self) -> Option<ClassKind> {
        match *self {
            ClassKind::CloseToConvex { lambda, .. } => Some(ClassKind::Starlike { lambda }),
            ClassKind::QuasiConvex { lambda, .. } => Some(ClassKind::Convex { lambda }),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let lambda = self.lambda();
        if !(0.0..1.0).contains(&lambda) {
            return Err(Error::InvalidParameter(format!("need 0 <= lambda < 1, got {lambda}")));
        }
        match *self {
            ClassKind::CloseToConvex { beta, .. } | ClassKind::QuasiConvex { beta, .. }
                if !(0.0..1.0).contains(&beta) =>
            {
                Err(Error::InvalidParameter(format!("need 0 <= beta < 1, got {beta}")))
            }
            ClassKind::StronglyStarlike { eta, .. } | ClassKind::StronglyConvex { eta, .. }
                if !(eta > 0.0 && eta <= 1.0) =>
            {
                Err(Error::InvalidParameter(format!("need 0 < eta <= 1, got {eta}")))
            }
            _ => Ok(()),
        }
    }
}

/// A class, optionally lifted through an operator: `f` belongs to the lifted
/// class when the operator image of `f` belongs to the base class.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassSpec {
    #[serde(flatten)]
    pub kind: ClassKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lift: Option<OperatorSpec>,
}

impl ClassSpec {
    pub fn new(kind: ClassKind) -> Result<Self> {
        kind.validate()?;
        Ok(Self { kind, lift: None })
    }

    pub fn lifted(kind: ClassKind, op: OperatorSpec) -> Result<Self> {
        kind.validate()?;
        op.validate()?;
        Ok(Self { kind, lift: Some(op) })
    }

    pub fn starlike(lambda: f64) -> Result<Self> {
        Self::new(ClassKind::Starlike { lambda })
    }

    pub fn convex(lambda: f64) -> Result<Self> {
        Self::new(ClassKind::Convex { lambda })
    }

    pub fn with_lift(self, lift: Option<OperatorSpec>) -> Self {
        Self { lift, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        self.kind.validate()?;
        if let Some(op) = &self.lift {
            op.validate()?;
        }
        Ok(())
    }

    /// Class the companion must belong to, lifted the same way.
    pub fn companion_spec(&self) -> Option<ClassSpec> {
        self.kind.companion_kind().map(|kind| ClassSpec { kind, lift: self.lift })
    }
}

fn lift_suffix(lift: &Option<OperatorSpec>) -> String {
    match lift {
        None => String::new(),
        Some(OperatorSpec::Bernardi { c }) => format!("_{{c={c}}}"),
        Some(OperatorSpec::Jks { sigma }) => format!("_{{sigma={sigma}}}"),
    }
}

impl fmt::Display for ClassSpec {
    /// Conventional names: `S*(λ)`, `C_{c=1}(λ)`, `ST_{sigma=2}(η,λ)`, ...
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sfx = lift_suffix(&self.lift);
        let lifted = self.lift.is_some();
        match self.kind {
            ClassKind::Starlike { lambda } => write!(f, "S*{sfx}({lambda})"),
            ClassKind::Convex { lambda } => write!(f, "C{sfx}({lambda})"),
            ClassKind::CloseToConvex { beta, lambda } => write!(f, "K{sfx}({beta},{lambda})"),
            ClassKind::QuasiConvex { beta, lambda } => write!(f, "K*{sfx}({beta},{lambda})"),
            ClassKind::StronglyStarlike { eta, lambda } if lifted => {
                write!(f, "ST{sfx}({eta},{lambda})")
            }
            ClassKind::StronglyStarlike { eta, lambda } => write!(f, "S*({eta},{lambda})"),
            ClassKind::StronglyConvex { eta, lambda } if lifted => {
                write!(f, "CV{sfx}({eta},{lambda})")
            }
            ClassKind::StronglyConvex { eta, lambda } => write!(f, "C({eta},{lambda})"),
        }
    }
}

impl FromStr for ClassSpec {
    type Err = Error;

    /// `starlike:lambda=0.5`, `convex:lambda=0,c=1`, `close_to_convex:beta=0.25,lambda=0`,
    /// `quasi_convex:...`, `strongly_starlike:eta=0.5,lambda=0,sigma=2`,
    /// `strongly_convex:...`. A `c=` or `sigma=` key lifts the class.
    fn from_str(s: &str) -> Result<Self> {
        let (name, mut p) = parse_params(s)?;
        let lambda = p.real_or("lambda", 0.0)?;
        let kind = match name.as_str() {
            "starlike" => ClassKind::Starlike { lambda },
            "convex" => ClassKind::Convex { lambda },
            "close_to_convex" => ClassKind::CloseToConvex { beta: p.real_or("beta", 0.0)?, lambda },
            "quasi_convex" => ClassKind::QuasiConvex { beta: p.real_or("beta", 0.0)?, lambda },
            "strongly_starlike" => ClassKind::StronglyStarlike { eta: p.real_or("eta", 1.0)?, lambda },
            "strongly_convex" => ClassKind::StronglyConvex { eta: p.real_or("eta", 1.0)?, lambda },
            other => return Err(Error::Parse(format!("unknown class '{other}'"))),
        };
        let c = p.take("c");
        let sigma = p.take("sigma");
        let lift = match (c, sigma) {
            (Some(_), Some(_)) => {
                return Err(Error::Parse("a class takes at most one of c= or sigma=".into()))
            }
            (Some(c), None) => Some(OperatorSpec::bernardi(crate::params::parse_real(&c)?)?),
            (None, Some(s)) => Some(OperatorSpec::jks(crate::params::parse_real(&s)?)?),
            (None, None) => None,
        };
        p.finish()?;
        let spec = ClassSpec { kind, lift };
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Member,
    NonMember,
    Inconclusive,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub class: String,
    pub status: Status,
    pub margin: f64,
    pub witness: Complex,
    pub nondegeneracy_ok: bool,
    pub reliable: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reason: Option<String>,
    pub grid: DiskGrid,
}

impl Verdict {
    pub fn is_member(&self) -> bool {
        self.status == Status::Member
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CertifyOptions {
    /// Truncation order for series-sampled functions.
    pub order: usize,
    /// Also certify the companion in its required class.
    pub strict: bool,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self {
            order: DEFAULT_SERIES_ORDER,
            strict: false,
        }
    }
}

/// Samples `f`, or its operator image, on the grid.
pub(crate) fn sample(
    f: &AnalyticFunction,
    lift: Option<&OperatorSpec>,
    grid: &DiskGrid,
    order: usize,
) -> Result<GridValues> {
    match lift {
        None => evaluate_function(f, grid, order),
        Some(op) => Ok(evaluate_series(
            &apply_multiplier(op, &sampling_series(f, order)?)?,
            grid,
        )),
    }
}

pub(crate) enum PointValue {
    Value { margin: f64, gap: f64 },
    Degenerate(&'static str),
}

/// Running minimum over the grid; ties keep the earliest point in
/// radius-major order.
pub(crate) struct Scan {
    pub margin: f64,
    pub witness: Complex,
    pub min_gap: f64,
    pub degenerate: Option<(Complex, &'static str)>,
}

impl Scan {
    pub(crate) fn run(grid: &DiskGrid, mut at: impl FnMut(usize, Complex) -> PointValue) -> Self {
        let mut scan = Scan {
            margin: f64::INFINITY,
            witness: Complex::new(0.0, 0.0),
            min_gap: f64::INFINITY,
            degenerate: None,
        };
        for (idx, z) in grid.points().enumerate() {
            match at(idx, z) {
                PointValue::Value { margin, gap } if margin.is_finite() => {
                    if margin < scan.margin {
                        scan.margin = margin;
                        scan.witness = z;
                    }
                    scan.min_gap = scan.min_gap.min(gap);
                }
                PointValue::Value { .. } => {
                    scan.degenerate.get_or_insert((z, "non-finite value"));
                }
                PointValue::Degenerate(why) => {
                    scan.degenerate.get_or_insert((z, why));
                }
            }
        }
        if !scan.margin.is_finite() {
            scan.margin = 0.0;
        }
        scan
    }
}

fn small(w: Complex) -> bool {
    w.norm() < DIVISION_FLOOR
}

/// Margin of the class condition at one point, from samples of `f` and the companion.
fn point_margin(
    kind: &ClassKind,
    z: Complex,
    f: (Complex, Complex, Complex),
    g: Option<(Complex, Complex, Complex)>,
) -> PointValue {
    let (v, d1, d2) = f;
    let one = Complex::new(1.0, 0.0);
    match *kind {
        ClassKind::Starlike { lambda } => {
            if small(v) {
                return PointValue::Degenerate("f vanishes");
            }
            let w = z * d1 / v;
            PointValue::Value { margin: w.re - lambda, gap: (w - lambda).norm() }
        }
        ClassKind::Convex { lambda } => {
            if small(d1) {
                return PointValue::Degenerate("f' vanishes");
            }
            let w = one + z * d2 / d1;
            PointValue::Value { margin: w.re - lambda, gap: (w - lambda).norm() }
        }
        ClassKind::CloseToConvex { beta, .. } => {
            let (gv, _, _) = g.expect("companion sampled");
            if small(gv) {
                return PointValue::Degenerate("g vanishes");
            }
            let w = z * d1 / gv;
            PointValue::Value { margin: w.re - beta, gap: f64::INFINITY }
        }
        ClassKind::QuasiConvex { beta, .. } => {
            let (_, g1, _) = g.expect("companion sampled");
            if small(g1) {
                return PointValue::Degenerate("g' vanishes");
            }
            let w = (d1 + z * d2) / g1;
            PointValue::Value { margin: w.re - beta, gap: f64::INFINITY }
        }
        ClassKind::StronglyStarlike { eta, lambda } => {
            if small(v) {
                return PointValue::Degenerate("f vanishes");
            }
            arg_margin(z * d1 / v - lambda, eta)
        }
        ClassKind::StronglyConvex { eta, lambda } => {
            if small(d1) {
                return PointValue::Degenerate("f' vanishes");
            }
            arg_margin(one + z * d2 / d1 - lambda, eta)
        }
    }
}

fn arg_margin(w: Complex, eta: f64) -> PointValue {
    if small(w) {
        return PointValue::Degenerate("argument undefined at zero");
    }
    PointValue::Value {
        margin: eta * FRAC_PI_2 - w.arg().abs(),
        gap: w.norm(),
    }
}

/// Certifies membership with default options.
pub fn certify(
    f: &AnalyticFunction,
    spec: &ClassSpec,
    grid: &DiskGrid,
    companion: Option<&AnalyticFunction>,
) -> Result<Verdict> {
    certify_with(f, spec, grid, companion, &CertifyOptions::default())
}

pub fn certify_with(
    f: &AnalyticFunction,
    spec: &ClassSpec,
    grid: &DiskGrid,
    companion: Option<&AnalyticFunction>,
    options: &CertifyOptions,
) -> Result<Verdict> {
    spec.validate()?;
    let companion = match (spec.kind.needs_companion(), companion) {
        (true, None) => return Err(Error::MissingCompanion(spec.to_string())),
        (true, Some(g)) => Some(g),
        (false, _) => None,
    };
    if options.strict {
        if let (Some(g), Some(cspec)) = (companion, spec.companion_spec()) {
            let cv = certify_with(g, &cspec, grid, None, options)?;
            if !cv.is_member() {
                return Err(Error::CompanionNotMember(cspec.to_string()));
            }
        }
    }

    let fv = sample(f, spec.lift.as_ref(), grid, options.order)?;
    let gv = companion
        .map(|g| sample(g, spec.lift.as_ref(), grid, options.order))
        .transpose()?;
    let reliable = fv.all_reliable() && gv.as_ref().is_none_or(|g| g.all_reliable());

    let scan = Scan::run(grid, |idx, z| {
        point_margin(
            &spec.kind,
            z,
            (fv.value[idx], fv.first[idx], fv.second[idx]),
            gv.as_ref().map(|g| (g.value[idx], g.first[idx], g.second[idx])),
        )
    });

    let check_gap = spec.lift.is_some() && spec.kind.is_strong();
    let nondegeneracy_ok = !check_gap || scan.min_gap > DEGENERACY_FLOOR;
    Ok(finish_verdict(spec.to_string(), scan, reliable, nondegeneracy_ok, grid))
}

fn finish_verdict(
    class: String,
    scan: Scan,
    reliable: bool,
    nondegeneracy_ok: bool,
    grid: &DiskGrid,
) -> Verdict {
    let (status, witness, reason) = if let Some((z, why)) = scan.degenerate {
        (Status::Inconclusive, z, Some(why.to_string()))
    } else if !reliable {
        (Status::Inconclusive, scan.witness, Some("truncated series tail exceeds tolerance".into()))
    } else if scan.margin.abs() < MARGIN_FLOOR {
        (Status::Inconclusive, scan.witness, Some("margin within floor".into()))
    } else if scan.margin < 0.0 {
        (Status::NonMember, scan.witness, None)
    } else if !nondegeneracy_ok {
        (Status::Inconclusive, scan.witness, Some("nondegeneracy gap below floor".into()))
    } else {
        (Status::Member, scan.witness, None)
    };
    Verdict {
        class,
        status,
        margin: scan.margin,
        witness,
        nondegeneracy_ok,
        reliable,
        reason,
        grid: grid.clone(),
    }
}

/// Certifies membership in an operator-lifted class such as `S*_c(λ)`.
pub fn certify_lifted_pair(
    f: &AnalyticFunction,
    spec: &ClassSpec,
    grid: &DiskGrid,
    companion: Option<&AnalyticFunction>,
) -> Result<Verdict> {
    if spec.lift.is_none() {
        return Err(Error::InvalidParameter(format!(
            "{spec} is not an operator-lifted class"
        )));
    }
    certify(f, spec, grid, companion)
}

/// Replaces `f` by `z f'` as a series-backed function.
pub fn z_derivative_of(f: &AnalyticFunction, order: usize) -> Result<AnalyticFunction> {
    Ok(AnalyticFunction::from_series(
        sampling_series(f, order)?.z_derivative(),
        format!("z({})'", f.label),
    ))
}
