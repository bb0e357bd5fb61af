//! Rule-by-rule replay of the hidden-variable argument on a claim set.

use crate::observables::HardyClaimSet;
use crate::Tolerance;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Deduction {
    #[serde(rename = "deduction-1")]
    One,
    #[serde(rename = "deduction-2")]
    Two,
    #[serde(rename = "deduction-3")]
    Three,
    #[serde(rename = "deduction-4")]
    Four,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceStep {
    pub rule: Deduction,
    pub premise: String,
    pub fired: bool,
    pub conclusion: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum TraceOutcome {
    Contradiction { at: Deduction },
    NoContradiction { stopped_at: Deduction, reason: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeductionTrace {
    pub claims: HardyClaimSet,
    pub steps: Vec<TraceStep>,
    pub outcome: TraceOutcome,
}

impl DeductionTrace {
    pub fn contradiction(&self) -> bool {
        matches!(self.outcome, TraceOutcome::Contradiction { .. })
    }
}

/// Replays the four deductions. A rule fires only when its premise holds
/// with certainty (within `tol` of exactly 1 or exactly 0); the run with
/// D₁ = D₂ = 1 must have probability above `tol`.
pub fn replay_deductions(claims: &HardyClaimSet, tol: Tolerance) -> DeductionTrace {
    let mut steps = Vec::new();
    let stop = |steps: Vec<TraceStep>, rule, reason: String| DeductionTrace {
        claims: *claims,
        steps,
        outcome: TraceOutcome::NoContradiction {
            stopped_at: rule,
            reason,
        },
    };

    let run_exists = claims.p_joint > tol.0;
    let d1u2_certain = tol.eq(claims.c_d1u2, 1.0);
    let fired = run_exists && d1u2_certain;
    steps.push(TraceStep {
        rule: Deduction::One,
        premise: format!(
            "a run with D1=D2=1 exists (P = {}) and P(U2=1|D1=1) = {} is certain",
            claims.p_joint, claims.c_d1u2
        ),
        fired,
        conclusion: fired.then(|| "U2=1 is an element of reality of particle 2".to_string()),
    });
    if !run_exists {
        return stop(steps, Deduction::One, "run does not exist: P(D1=1,D2=1) = 0".into());
    }
    if !d1u2_certain {
        return stop(
            steps,
            Deduction::One,
            format!("P(U2=1|D1=1) = {} is not 1", claims.c_d1u2),
        );
    }

    steps.push(TraceStep {
        rule: Deduction::Two,
        premise: "Alice's choice of measurement cannot change Bob's outcome".into(),
        fired: true,
        conclusion: Some("U2=1 also holds had Alice measured U1 instead of D1".into()),
    });

    let d2u1_certain = tol.eq(claims.c_d2u1, 1.0);
    steps.push(TraceStep {
        rule: Deduction::Three,
        premise: format!("D2=1 and P(U1=1|D2=1) = {} is certain", claims.c_d2u1),
        fired: d2u1_certain,
        conclusion: d2u1_certain.then(|| "U1=1 is an element of reality of particle 1".to_string()),
    });
    if !d2u1_certain {
        return stop(
            steps,
            Deduction::Three,
            format!("premise not certain: P(U1=1|D2=1) = {}", claims.c_d2u1),
        );
    }

    let u1u2_impossible = tol.is_zero(claims.p_u1u2);
    steps.push(TraceStep {
        rule: Deduction::Four,
        premise: format!("this run has U1U2=1 while P(U1=1,U2=1) = {}", claims.p_u1u2),
        fired: u1u2_impossible,
        conclusion: u1u2_impossible.then(|| "contradiction: U1U2=1 in a run, yet U1U2=1 never occurs".to_string()),
    });
    if !u1u2_impossible {
        return stop(
            steps,
            Deduction::Four,
            format!("U1U2=1 is allowed: P(U1=1,U2=1) = {}", claims.p_u1u2),
        );
    }
    DeductionTrace {
        claims: *claims,
        steps,
        outcome: TraceOutcome::Contradiction { at: Deduction::Four },
    }
}
