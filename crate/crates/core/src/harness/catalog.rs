//! The inclusion theorems as data: hypotheses, conclusion and parameter domain.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::classifiers::{ClassKind, ClassSpec, HypothesisId, Shift, TheoremParams};
use crate::error::{Error, Result};
use crate::operators::OperatorSpec;

#[allow(non_camel_case_types)]
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TheoremId {
    T2_1_i,
    T2_1_ii,
    T2_2_i,
    T2_2_ii,
    T2_3,
    C2_4,
    /// `C2_4` on the wider domain `c >= -λ` of `T2_3`.
    C2_4_wide,
    T2_5_i,
    T2_5_ii,
    C2_6_i,
    C2_6_ii,
    T2_7,
    T2_8_i,
    T2_8_ii,
    T2_9_i,
    T2_9_ii,
    T2_10,
    C2_11,
    T2_12,
    C2_13,
}

impl TheoremId {
    pub const ALL: [TheoremId; 20] = [
        TheoremId::T2_1_i,
        TheoremId::T2_1_ii,
        TheoremId::T2_2_i,
        TheoremId::T2_2_ii,
        TheoremId::T2_3,
        TheoremId::C2_4,
        TheoremId::C2_4_wide,
        TheoremId::T2_5_i,
        TheoremId::T2_5_ii,
        TheoremId::C2_6_i,
        TheoremId::C2_6_ii,
        TheoremId::T2_7,
        TheoremId::T2_8_i,
        TheoremId::T2_8_ii,
        TheoremId::T2_9_i,
        TheoremId::T2_9_ii,
        TheoremId::T2_10,
        TheoremId::C2_11,
        TheoremId::T2_12,
        TheoremId::C2_13,
    ];

    /// Inclusions whose only hypothesis is class membership (plus
    /// nondegeneracy), so every generated member exercises the conclusion.
    pub const UNCONDITIONAL: [TheoremId; 8] = [
        TheoremId::T2_3,
        TheoremId::C2_4,
        TheoremId::C2_4_wide,
        TheoremId::T2_7,
        TheoremId::T2_10,
        TheoremId::C2_11,
        TheoremId::T2_12,
        TheoremId::C2_13,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            TheoremId::T2_1_i => "T2_1_i",
            TheoremId::T2_1_ii => "T2_1_ii",
            TheoremId::T2_2_i => "T2_2_i",
            TheoremId::T2_2_ii => "T2_2_ii",
            TheoremId::T2_3 => "T2_3",
            TheoremId::C2_4 => "C2_4",
            TheoremId::C2_4_wide => "C2_4_wide",
            TheoremId::T2_5_i => "T2_5_i",
            TheoremId::T2_5_ii => "T2_5_ii",
            TheoremId::C2_6_i => "C2_6_i",
            TheoremId::C2_6_ii => "C2_6_ii",
            TheoremId::T2_7 => "T2_7",
            TheoremId::T2_8_i => "T2_8_i",
            TheoremId::T2_8_ii => "T2_8_ii",
            TheoremId::T2_9_i => "T2_9_i",
            TheoremId::T2_9_ii => "T2_9_ii",
            TheoremId::T2_10 => "T2_10",
            TheoremId::C2_11 => "C2_11",
            TheoremId::T2_12 => "T2_12",
            TheoremId::C2_13 => "C2_13",
        }
    }

    pub fn is_unconditional(&self) -> bool {
        TheoremId::UNCONDITIONAL.contains(self)
    }

    pub fn uses_beta(&self) -> bool {
        matches!(
            self,
            TheoremId::T2_8_i | TheoremId::T2_8_ii | TheoremId::T2_9_i | TheoremId::T2_9_ii
        )
    }

    pub fn uses_eta(&self) -> bool {
        matches!(
            self,
            TheoremId::T2_5_i
                | TheoremId::T2_5_ii
                | TheoremId::C2_6_i
                | TheoremId::C2_6_ii
                | TheoremId::T2_7
                | TheoremId::T2_12
                | TheoremId::C2_13
        )
    }

    pub fn uses_sigma(&self) -> bool {
        matches!(
            self,
            TheoremId::T2_10 | TheoremId::C2_11 | TheoremId::T2_12 | TheoremId::C2_13
        )
    }

    /// Whether `p` lies in the parameter domain stated with the result.
    pub fn in_domain(&self, p: &TheoremParams) -> bool {
        let (l, c) = (p.lambda, p.c);
        let base = (0.0..1.0).contains(&l)
            && c > -1.0
            && c.is_finite()
            && (!self.uses_beta() || p.beta.is_some_and(|b| (0.0..1.0).contains(&b)))
            && (!self.uses_eta() || p.eta.is_some_and(|e| e > 0.0 && e <= 1.0))
            && (!self.uses_sigma() || p.sigma.is_some_and(|s| s.is_finite()));
        base && match self {
            TheoremId::T2_3 | TheoremId::C2_4_wide | TheoremId::T2_12 => c >= -l,
            TheoremId::C2_4 | TheoremId::C2_13 => c >= l,
            TheoremId::T2_10 => -l <= c && c <= 1.0 - 2.0 * l,
            TheoremId::C2_11 => -l < c && c < 1.0 - 2.0 * l,
            _ => true,
        }
    }

    pub fn check_domain(&self, p: &TheoremParams) -> Result<()> {
        if self.in_domain(p) {
            Ok(())
        } else {
            Err(Error::Config(format!("{self}: parameters {p:?} outside the stated domain")))
        }
    }

    /// Binds the statement to concrete parameters.
    pub fn instantiate(&self, p: &TheoremParams, companion: CompanionChoice) -> Result<TheoremSpec> {
        self.check_domain(p)?;
        let l = p.lambda;
        let c = p.c;
        let beta = p.beta.unwrap_or(0.0);
        let eta = p.eta.unwrap_or(1.0);
        let bern = OperatorSpec::bernardi(c)?;
        let bern_next = OperatorSpec::bernardi(c + 1.0)?;
        let jks = p.sigma.map(OperatorSpec::jks).transpose()?;

        let starlike = ClassKind::Starlike { lambda: l };
        let convex = ClassKind::Convex { lambda: l };
        let strong_st = ClassKind::StronglyStarlike { eta, lambda: l };
        let strong_cv = ClassKind::StronglyConvex { eta, lambda: l };
        let ctc = ClassKind::CloseToConvex { beta, lambda: l };
        let quasi = ClassKind::QuasiConvex { beta, lambda: l };
        let lift = |k: ClassKind, op: OperatorSpec| ClassSpec::lifted(k, op);
        let plain = ClassSpec::new;

        use HypothesisId as H;
        let spec = match self {
            TheoremId::T2_1_i | TheoremId::T2_2_i | TheoremId::T2_1_ii | TheoremId::T2_2_ii => {
                let kind = if matches!(self, TheoremId::T2_1_i | TheoremId::T2_1_ii) { starlike } else { convex };
                let forward = matches!(self, TheoremId::T2_1_i | TheoremId::T2_2_i);
                let (from, to, shift) = if forward {
                    (bern, bern_next, Shift::Same)
                } else {
                    (bern_next, bern, Shift::Next)
                };
                TheoremSpec::new(lift(kind, from)?, vec![H::StarlikeGap(shift)], lift(kind, to)?)
            }
            TheoremId::T2_3 => TheoremSpec::new(plain(starlike)?, vec![], lift(starlike, bern)?),
            TheoremId::C2_4 | TheoremId::C2_4_wide => {
                TheoremSpec::new(plain(convex)?, vec![], lift(convex, bern)?)
            }
            TheoremId::T2_5_i | TheoremId::T2_5_ii | TheoremId::C2_6_i | TheoremId::C2_6_ii => {
                let kind = if matches!(self, TheoremId::T2_5_i | TheoremId::T2_5_ii) { strong_st } else { strong_cv };
                let forward = matches!(self, TheoremId::T2_5_i | TheoremId::C2_6_i);
                let (from, to, shift) = if forward {
                    (bern, bern_next, Shift::Same)
                } else {
                    (bern_next, bern, Shift::Next)
                };
                TheoremSpec::new(lift(kind, from)?, vec![H::ArgDominance(shift)], lift(kind, to)?)
            }
            TheoremId::T2_7 => TheoremSpec::new(lift(strong_cv, bern)?, vec![], lift(strong_st, bern)?),
            TheoremId::T2_8_i | TheoremId::T2_8_ii => {
                let forward = *self == TheoremId::T2_8_i;
                let (from, to, shift) = if forward {
                    (bern, bern_next, Shift::Same)
                } else {
                    (bern_next, bern, Shift::Next)
                };
                let g_class = if forward {
                    lift(starlike, bern)?
                } else {
                    match companion {
                        CompanionChoice::AsStated => plain(starlike)?,
                        CompanionChoice::Lifted => lift(starlike, bern_next)?,
                    }
                };
                let mut spec = TheoremSpec::new(
                    lift(ctc, from)?,
                    vec![H::CompanionQuotient(shift), H::CompanionStarlikeGap(shift)],
                    lift(ctc, to)?,
                );
                spec.companion_class = Some(g_class);
                spec
            }
            TheoremId::T2_9_i | TheoremId::T2_9_ii => {
                let forward = *self == TheoremId::T2_9_i;
                let (from, to, shift) = if forward {
                    (bern, bern_next, Shift::Same)
                } else {
                    (bern_next, bern, Shift::Next)
                };
                let mut spec = TheoremSpec::new(
                    lift(quasi, from)?,
                    vec![H::QuasiCompanionQuotient(shift), H::CompanionStarlikeGap(shift)],
                    lift(quasi, to)?,
                );
                spec.companion_class = Some(lift(convex, from)?);
                spec
            }
            TheoremId::T2_10 | TheoremId::C2_11 => {
                let kind = if *self == TheoremId::T2_10 { starlike } else { convex };
                let jks = jks.expect("domain check requires sigma");
                let mut spec = TheoremSpec::new(lift(kind, jks)?, vec![], lift(kind, bern)?);
                spec.target = Target::JksImage(jks);
                spec
            }
            TheoremId::T2_12 | TheoremId::C2_13 => {
                let (kind, side) = if *self == TheoremId::T2_12 {
                    (strong_st, H::NondegenerateStarlike)
                } else {
                    (strong_cv, H::NondegenerateConvex)
                };
                let jks = jks.expect("domain check requires sigma");
                let mut spec = TheoremSpec::new(lift(kind, jks)?, vec![side], lift(kind, bern)?);
                spec.target = Target::JksImage(jks);
                spec
            }
        };
        Ok(spec)
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TheoremId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        TheoremId::ALL
            .into_iter()
            .find(|t| t.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Parse(format!("unknown theorem id '{s}'")))
    }
}

/// Class required of the companion in the reverse close-to-convex inclusion.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CompanionChoice {
    /// `g ∈ S*(λ)`, as the statement reads.
    #[default]
    AsStated,
    /// `g ∈ S*_{c+1}(λ)`, mirroring the forward part.
    Lifted,
}

/// Function the conclusion is checked on.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Target {
    F,
    JksImage(OperatorSpec),
}

/// A theorem bound to concrete parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TheoremSpec {
    /// Class `f` is drawn from; membership is the first hypothesis.
    pub hypothesis_class: ClassSpec,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub companion_class: Option<ClassSpec>,
    pub side_conditions: Vec<HypothesisId>,
    pub conclusion: ClassSpec,
    pub target: Target,
}

impl TheoremSpec {
    fn new(hypothesis_class: ClassSpec, side_conditions: Vec<HypothesisId>, conclusion: ClassSpec) -> Self {
        Self {
            hypothesis_class,
            companion_class: None,
            side_conditions,
            conclusion,
            target: Target::F,
        }
    }
}

/// Structural consistency of a bound theorem: every conclusion is paired with
/// its own hypothesis set, and dual parts point in opposite directions.
pub fn check_structure(id: TheoremId, spec: &TheoremSpec, p: &TheoremParams) -> std::result::Result<(), String> {
    let lift_c = |s: &ClassSpec| match s.lift {
        Some(OperatorSpec::Bernardi { c }) => Some(c),
        _ => None,
    };
    let shifts: Vec<Shift> = spec
        .side_conditions
        .iter()
        .filter_map(|h| match h {
            HypothesisId::StarlikeGap(s)
            | HypothesisId::CompanionStarlikeGap(s)
            | HypothesisId::ArgDominance(s)
            | HypothesisId::CompanionQuotient(s)
            | HypothesisId::QuasiCompanionQuotient(s) => Some(*s),
            _ => None,
        })
        .collect();
    if spec.hypothesis_class.kind.needs_companion() != spec.companion_class.is_some() {
        return Err(format!("{id}: companion class does not match the hypothesis class"));
    }
    if spec.hypothesis_class.kind.lambda() != spec.conclusion.kind.lambda() {
        return Err(format!("{id}: λ differs between hypothesis and conclusion"));
    }
    if id.is_unconditional() {
        let only_nondegeneracy = spec.side_conditions.iter().all(|h| {
            matches!(h, HypothesisId::NondegenerateStarlike | HypothesisId::NondegenerateConvex)
        });
        return if only_nondegeneracy {
            Ok(())
        } else {
            Err(format!("{id}: unconditional inclusion carries side conditions"))
        };
    }
    if shifts.is_empty() {
        return Err(format!("{id}: conditional inclusion without side conditions"));
    }
    let from = lift_c(&spec.hypothesis_class);
    let to = lift_c(&spec.conclusion);
    let expected = if shifts.iter().all(|s| *s == Shift::Same) {
        (Some(p.c), Some(p.c + 1.0))
    } else if shifts.iter().all(|s| *s == Shift::Next) {
        (Some(p.c + 1.0), Some(p.c))
    } else {
        return Err(format!("{id}: side conditions mix L_c and L_(c+1)"));
    };
    if (from, to) != expected {
        return Err(format!("{id}: inclusion direction does not match its side conditions"));
    }
    Ok(())
}
