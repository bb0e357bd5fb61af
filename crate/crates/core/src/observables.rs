//! The four observables D̂₁, D̂₂, Û₁, Û₂ and the Hardy conditions they are
//! supposed to satisfy.
//!
//! D̂₁ projects Alice's pair (A,1) onto a Bell state and D̂₂ projects Bob's
//! pair (2,B). Û₁ and Û₂ are single-spin projectors whose meaning depends on
//! the [`Interpretation`]:
//!
//! * `FixedBasis`: Û₁ = |+⟩₁⟨+| and Û₂ = |+⟩₂⟨+| for every pair.
//! * `CollapsedState`: Û₂ projects onto the slot-2 state teleported by
//!   Alice's Bell outcome, and Û₁ onto the slot-1 state teleported by Bob's.
//!   These projectors are read off the Bell expansion at run time.

use crate::protocol::{self, BellIndex, BellPair, ProtocolError, Residual};
use crate::qstate::{self, ObservableOp, QStateError, Slot, StateVector};
use crate::Tolerance;
use serde::{Deserialize, Serialize};
use std::fmt;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ObservablesError {
    #[error(transparent)]
    State(#[from] QStateError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error("branch {0} of the {1} expansion is empty; no teleported state to project on")]
    EmptyBranch(BellIndex, BellPair),
    #[error("teleported state on slot {0} is not pure (purity {1})")]
    MixedResidual(Slot, f64),
    #[error("conditioning event has zero probability ({0:e})")]
    ZeroProbabilityCondition(f64),
}

/// How Û₁ and Û₂ are defined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Interpretation {
    #[serde(rename = "fixed")]
    FixedBasis,
    #[serde(rename = "collapsed")]
    CollapsedState,
}

impl Interpretation {
    pub const ALL: [Interpretation; 2] = [Interpretation::FixedBasis, Interpretation::CollapsedState];

    pub fn label(self) -> &'static str {
        match self {
            Interpretation::FixedBasis => "fixed",
            Interpretation::CollapsedState => "collapsed",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|i| i.label() == s)
    }

    /// Human-readable statement of what Û₁/Û₂ mean under this reading.
    pub fn note(self) -> &'static str {
        match self {
            Interpretation::FixedBasis => "U1 = |+><+| on slot 1, U2 = |+><+| on slot 2, independent of the Bell pair",
            Interpretation::CollapsedState => {
                "U2 projects on the slot-2 residual of the (A,1) branch selected by D1; U1 on the slot-1 residual \
                 of the (2,B) branch selected by D2 (derived reading for the generalized pairs)"
            }
        }
    }
}

impl fmt::Display for Interpretation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// Spin measured by a U observable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum USlot {
    One,
    Two,
}

impl USlot {
    pub fn slot(self) -> Slot {
        match self {
            USlot::One => Slot::One,
            USlot::Two => Slot::Two,
        }
    }
}

/// Projector onto `bell` on the pair, identity on the other two slots.
pub fn build_d(pair: BellPair, bell: BellIndex) -> ObservableOp {
    let name = match pair {
        BellPair::A1 => format!("D1[{bell}]"),
        BellPair::TwoB => format!("D2[{bell}]"),
    };
    ObservableOp::projector_onto(name, &protocol::bell_state(bell, pair), &Slot::CANONICAL)
        .expect("Bell projector is valid")
}

/// Builds Û on `slot`. `partner` is the Bell outcome on the opposite party's
/// pair (D̂₁'s index for Û₂, D̂₂'s index for Û₁); `FixedBasis` ignores it.
pub fn build_u(
    slot: USlot,
    interp: Interpretation,
    partner: BellIndex,
    tol: Tolerance,
) -> Result<ObservableOp, ObservablesError> {
    let target = slot.slot();
    let name = match slot {
        USlot::One => "U1",
        USlot::Two => "U2",
    };
    match interp {
        Interpretation::FixedBasis => Ok(ObservableOp::projector_onto(
            name,
            &StateVector::plus(target),
            &Slot::CANONICAL,
        )?),
        Interpretation::CollapsedState => {
            let pair = match slot {
                USlot::Two => BellPair::A1,
                USlot::One => BellPair::TwoB,
            };
            let expansion = protocol::expand_in_bell_basis(&protocol::make_total_state(), pair.slots(), tol)?;
            let Residual::State(residual) = &expansion.branch(partner).residual else {
                return Err(ObservablesError::EmptyBranch(partner, pair));
            };
            let rho = qstate::reduced_density(residual, target)?;
            let purity = (&rho * &rho).trace().re;
            if (purity - 1.0).abs() > tol.0 {
                return Err(ObservablesError::MixedResidual(target, purity));
            }
            // a pure reduced state is its own rank-one projector
            Ok(ObservableOp::embed(
                format!("{name}[{partner}]"),
                &rho,
                &[target],
                &Slot::CANONICAL,
                true,
            )?)
        }
    }
}

/// P(then = 1 | cond = 1) = ⟨s|C T C|s⟩ / ⟨s|C|s⟩ for commuting projectors.
pub fn conditional_probability(
    cond: &ObservableOp,
    then: &ObservableOp,
    s: &StateVector,
    tol: Tolerance,
) -> Result<f64, ObservablesError> {
    let p_cond = qstate::born_probability(cond, s)?.value;
    if p_cond <= tol.0 {
        return Err(ObservablesError::ZeroProbabilityCondition(p_cond));
    }
    // joint() refuses non-commuting pairs
    let both = cond.joint(then, tol)?;
    let p_both = qstate::born_probability(&both, s)?.value;
    Ok(p_both / p_cond)
}

/// The four Hardy quantities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HardyClaimSet {
    /// P(D₁=1 ∧ D₂=1)
    pub p_joint: f64,
    /// P(U₂=1 | D₁=1)
    pub c_d1u2: f64,
    /// P(U₁=1 | D₂=1)
    pub c_d2u1: f64,
    /// P(U₁=1 ∧ U₂=1)
    pub p_u1u2: f64,
}

impl HardyClaimSet {
    /// Values asserted for the construction: 1/16, 1, 1, 0.
    pub const CLAIMED: HardyClaimSet = HardyClaimSet {
        p_joint: 1.0 / 16.0,
        c_d1u2: 1.0,
        c_d2u1: 1.0,
        p_u1u2: 0.0,
    };
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClaimVerdict {
    pub claimed: f64,
    pub measured: f64,
    pub deviation: f64,
    pub pass: bool,
}

impl ClaimVerdict {
    fn new(claimed: f64, measured: f64, tol: Tolerance) -> Self {
        let deviation = (measured - claimed).abs();
        ClaimVerdict {
            claimed,
            measured,
            deviation,
            pass: deviation <= tol.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClaimVerdicts {
    pub p_joint: ClaimVerdict,
    pub c_d1u2: ClaimVerdict,
    pub c_d2u1: ClaimVerdict,
    pub p_u1u2: ClaimVerdict,
}

impl ClaimVerdicts {
    pub fn all_pass(&self) -> bool {
        self.p_joint.pass && self.c_d1u2.pass && self.c_d2u1.pass && self.p_u1u2.pass
    }

    pub fn pass_count(&self) -> usize {
        [self.p_joint, self.c_d1u2, self.c_d2u1, self.p_u1u2]
            .iter()
            .filter(|v| v.pass)
            .count()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub d1: BellIndex,
    pub d2: BellIndex,
    pub interpretation: Interpretation,
    pub interpretation_note: String,
    pub measured: HardyClaimSet,
    pub verdicts: ClaimVerdicts,
    pub all_pass: bool,
}

/// D̂₁, D̂₂, Û₁, Û₂ for one Bell pair and interpretation.
#[derive(Debug, Clone)]
pub struct ObservableSet {
    pub d1: ObservableOp,
    pub d2: ObservableOp,
    pub u1: ObservableOp,
    pub u2: ObservableOp,
}

/// Names one of the four observables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Observable {
    #[serde(rename = "d1")]
    D1,
    #[serde(rename = "d2")]
    D2,
    #[serde(rename = "u1")]
    U1,
    #[serde(rename = "u2")]
    U2,
}

impl Observable {
    pub fn label(self) -> &'static str {
        match self {
            Observable::D1 => "d1",
            Observable::D2 => "d2",
            Observable::U1 => "u1",
            Observable::U2 => "u2",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [Observable::D1, Observable::D2, Observable::U1, Observable::U2]
            .into_iter()
            .find(|o| o.label() == s)
    }
}

/// Measurement context: one Alice observable and one Bob observable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Context {
    #[serde(rename = "d1d2")]
    D1D2,
    #[serde(rename = "d1u2")]
    D1U2,
    #[serde(rename = "u1d2")]
    U1D2,
    #[serde(rename = "u1u2")]
    U1U2,
}

impl Context {
    pub const ALL: [Context; 4] = [Context::D1D2, Context::D1U2, Context::U1D2, Context::U1U2];

    pub fn alice(self) -> Observable {
        match self {
            Context::D1D2 | Context::D1U2 => Observable::D1,
            Context::U1D2 | Context::U1U2 => Observable::U1,
        }
    }

    pub fn bob(self) -> Observable {
        match self {
            Context::D1D2 | Context::U1D2 => Observable::D2,
            Context::D1U2 | Context::U1U2 => Observable::U2,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Context::D1D2 => "d1d2",
            Context::D1U2 => "d1u2",
            Context::U1D2 => "u1d2",
            Context::U1U2 => "u1u2",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.label() == s)
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl ObservableSet {
    pub fn new(d1: BellIndex, d2: BellIndex, interp: Interpretation, tol: Tolerance) -> Result<Self, ObservablesError> {
        Ok(ObservableSet {
            d1: build_d(BellPair::A1, d1),
            d2: build_d(BellPair::TwoB, d2),
            u1: build_u(USlot::One, interp, d2, tol)?,
            u2: build_u(USlot::Two, interp, d1, tol)?,
        })
    }

    pub fn get(&self, o: Observable) -> &ObservableOp {
        match o {
            Observable::D1 => &self.d1,
            Observable::D2 => &self.d2,
            Observable::U1 => &self.u1,
            Observable::U2 => &self.u2,
        }
    }

    /// Hardy quantities on `s`.
    pub fn measure(&self, s: &StateVector, tol: Tolerance) -> Result<HardyClaimSet, ObservablesError> {
        Ok(HardyClaimSet {
            p_joint: qstate::born_probability(&self.d1.joint(&self.d2, tol)?, s)?.value,
            c_d1u2: conditional_probability(&self.d1, &self.u2, s, tol)?,
            c_d2u1: conditional_probability(&self.d2, &self.u1, s, tol)?,
            p_u1u2: qstate::born_probability(&self.u1.joint(&self.u2, tol)?, s)?.value,
        })
    }
}

/// Evaluates the four Hardy quantities for D̂₁ = |i⟩⟨i|_{A1}, D̂₂ = |j⟩⟨j|_{2B}
/// and compares them with [`HardyClaimSet::CLAIMED`].
pub fn audit_pair(
    i: BellIndex,
    j: BellIndex,
    interp: Interpretation,
    tol: Tolerance,
) -> Result<AuditReport, ObservablesError> {
    let set = ObservableSet::new(i, j, interp, tol)?;
    let measured = set.measure(&protocol::make_total_state(), tol)?;
    let claimed = HardyClaimSet::CLAIMED;
    let verdicts = ClaimVerdicts {
        p_joint: ClaimVerdict::new(claimed.p_joint, measured.p_joint, tol),
        c_d1u2: ClaimVerdict::new(claimed.c_d1u2, measured.c_d1u2, tol),
        c_d2u1: ClaimVerdict::new(claimed.c_d2u1, measured.c_d2u1, tol),
        p_u1u2: ClaimVerdict::new(claimed.p_u1u2, measured.p_u1u2, tol),
    };
    Ok(AuditReport {
        d1: i,
        d2: j,
        interpretation: interp,
        interpretation_note: interp.note().to_string(),
        measured,
        all_pass: verdicts.all_pass(),
        verdicts,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnumerationSummary {
    pub pairs: usize,
    pub sum_p_joint: f64,
    pub pairs_passing_all: usize,
    pub pairs_passing_p_joint: usize,
    pub pairs_passing_c_d1u2: usize,
    pub pairs_passing_c_d2u1: usize,
    pub pairs_passing_p_u1u2: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairEnumeration {
    pub interpretation: Interpretation,
    pub reports: Vec<AuditReport>,
    pub summary: EnumerationSummary,
}

/// Audits all 16 (D̂₁, D̂₂) Bell-pair choices in report order.
pub fn enumerate_all_pairs(interp: Interpretation, tol: Tolerance) -> Result<PairEnumeration, ObservablesError> {
    let reports = BellIndex::ALL
        .iter()
        .flat_map(|&i| BellIndex::ALL.iter().map(move |&j| (i, j)))
        .map(|(i, j)| audit_pair(i, j, interp, tol))
        .collect::<Result<Vec<_>, _>>()?;
    let count = |f: fn(&AuditReport) -> bool| reports.iter().filter(|r| f(r)).count();
    let summary = EnumerationSummary {
        pairs: reports.len(),
        sum_p_joint: reports.iter().map(|r| r.measured.p_joint).sum(),
        pairs_passing_all: count(|r| r.all_pass),
        pairs_passing_p_joint: count(|r| r.verdicts.p_joint.pass),
        pairs_passing_c_d1u2: count(|r| r.verdicts.c_d1u2.pass),
        pairs_passing_c_d2u1: count(|r| r.verdicts.c_d2u1.pass),
        pairs_passing_p_u1u2: count(|r| r.verdicts.p_u1u2.pass),
    };
    Ok(PairEnumeration {
        interpretation: interp,
        reports,
        summary,
    })
}

/// Joint outcome distribution of one context, indexed `[alice][bob]` with
/// outcome 1 meaning the projector fired.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextTable {
    pub context: Context,
    pub probs: [[f64; 2]; 2],
}

impl ContextTable {
    pub fn total(&self) -> f64 {
        self.probs.iter().flatten().sum()
    }

    pub fn alice_marginal(&self) -> f64 {
        self.probs[1][0] + self.probs[1][1]
    }

    pub fn bob_marginal(&self) -> f64 {
        self.probs[0][1] + self.probs[1][1]
    }
}

/// Exact statistics of the four Hardy contexts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityTable {
    pub d1: BellIndex,
    pub d2: BellIndex,
    pub interpretation: Interpretation,
    /// In [`Context::ALL`] order.
    pub contexts: Vec<ContextTable>,
}

impl ProbabilityTable {
    pub fn context(&self, c: Context) -> &ContextTable {
        &self.contexts[c.index()]
    }

    /// P(o = 1) as seen from each context containing `o`.
    pub fn marginals(&self, o: Observable) -> Vec<f64> {
        self.contexts
            .iter()
            .filter_map(|t| {
                if t.context.alice() == o {
                    Some(t.alice_marginal())
                } else if t.context.bob() == o {
                    Some(t.bob_marginal())
                } else {
                    None
                }
            })
            .collect()
    }

    /// Largest disagreement between marginals of the same observable.
    pub fn max_marginal_inconsistency(&self) -> f64 {
        [Observable::D1, Observable::D2, Observable::U1, Observable::U2]
            .iter()
            .map(|&o| {
                let m = self.marginals(o);
                let hi = m.iter().copied().fold(f64::MIN, f64::max);
                let lo = m.iter().copied().fold(f64::MAX, f64::min);
                hi - lo
            })
            .fold(0.0, f64::max)
    }
}

/// Joint distribution of two commuting projectors on `s`, `[a][b]`.
pub fn joint_distribution(
    alice: &ObservableOp,
    bob: &ObservableOp,
    s: &StateVector,
    tol: Tolerance,
) -> Result<[[f64; 2]; 2], ObservablesError> {
    let a = [alice.complement()?, alice.clone()];
    let b = [bob.complement()?, bob.clone()];
    let mut probs = [[0.0; 2]; 2];
    for (x, pa) in a.iter().enumerate() {
        for (y, pb) in b.iter().enumerate() {
            probs[x][y] = qstate::born_probability(&pa.joint(pb, tol)?, s)?.value;
        }
    }
    Ok(probs)
}

/// Exact four-context table for one Bell pair on the total state.
pub fn quantum_probability_table(
    i: BellIndex,
    j: BellIndex,
    interp: Interpretation,
    tol: Tolerance,
) -> Result<ProbabilityTable, ObservablesError> {
    let set = ObservableSet::new(i, j, interp, tol)?;
    let s = protocol::make_total_state();
    let contexts = Context::ALL
        .iter()
        .map(|&c| {
            Ok(ContextTable {
                context: c,
                probs: joint_distribution(set.get(c.alice()), set.get(c.bob()), &s, tol)?,
            })
        })
        .collect::<Result<Vec<_>, ObservablesError>>()?;
    Ok(ProbabilityTable {
        d1: i,
        d2: j,
        interpretation: interp,
        contexts,
    })
}
