//! Local hidden-variable side of the argument.
//!
//! A local deterministic model assigns a value to each of D₁, D₂, U₁, U₂ at
//! once; a general local model is a probability mixture of the 16 such
//! assignments (stochastic local models reduce to these). [`feasibility`]
//! decides exactly whether a table of context statistics is such a mixture
//! and returns a certificate that [`validate_certificate`] re-checks without
//! trusting the solver:
//!
//! * feasible: the mixture weights, which must reproduce every constrained
//!   cell exactly;
//! * infeasible: a linear functional over the constraints that is
//!   nonnegative on every deterministic assignment but negative on the table
//!   (a Farkas witness). When the table carries the four Hardy facts the
//!   witness is presented as the deduction chain, whose functional is
//!   `P(U₁=1,U₂=1) + P(D₁=1,U₂=0) + P(U₁=0,D₂=1) − P(D₁=1,D₂=1)`.

pub mod deduction;
pub mod rational;
pub mod simplex;
pub mod table;

pub use deduction::{replay_deductions, Deduction, DeductionTrace, TraceOutcome, TraceStep};
pub use rational::{rat, rationalize, Rational};
pub use table::{
    completed_claims_table, hardy_facts_table, CellRef, ClaimsCompletion, DeterministicAssignment, RationalTable,
    TableError,
};

use crate::observables::Context;
use num_traits::{One, Signed, Zero};
use rational::serde_rational;
use serde::{Deserialize, Serialize};
use simplex::LpOutcome;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum LhvError {
    #[error("malformed table: {0}")]
    Table(#[from] TableError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeightEntry {
    pub assignment: DeterministicAssignment,
    #[serde(with = "serde_rational")]
    pub weight: Rational,
}

/// Mixture of deterministic assignments; only nonzero weights are listed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LhvModel {
    pub weights: Vec<WeightEntry>,
}

impl LhvModel {
    pub fn total(&self) -> Rational {
        self.weights.iter().map(|w| w.weight.clone()).sum()
    }

    /// Probability the model gives to `cell`.
    pub fn probability(&self, cell: CellRef) -> Rational {
        self.weights
            .iter()
            .filter(|w| cell.contains(w.assignment))
            .map(|w| w.weight.clone())
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionalTerm {
    pub cell: CellRef,
    #[serde(with = "serde_rational")]
    pub coeff: Rational,
}

/// `normalization · Σλ wλ + Σ coeff · P(cell)` as a function on mixtures.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Functional {
    #[serde(with = "serde_rational")]
    pub normalization: Rational,
    pub terms: Vec<FunctionalTerm>,
}

impl Functional {
    /// Value on a single deterministic assignment.
    pub fn on_assignment(&self, lambda: DeterministicAssignment) -> Rational {
        self.normalization.clone()
            + self
                .terms
                .iter()
                .filter(|t| t.cell.contains(lambda))
                .map(|t| t.coeff.clone())
                .sum::<Rational>()
    }

    /// Value on the table; `None` if a term refers to an unconstrained cell.
    pub fn on_table(&self, table: &RationalTable) -> Option<Rational> {
        let mut acc = self.normalization.clone();
        for t in &self.terms {
            acc += &t.coeff * table.get(t.cell)?;
        }
        Some(acc)
    }

    /// The functional behind the deduction chain.
    pub fn hardy() -> Self {
        let term = |context, alice, bob, coeff: i64| FunctionalTerm {
            cell: CellRef::new(context, alice, bob),
            coeff: rat(coeff, 1),
        };
        Functional {
            normalization: Rational::zero(),
            terms: vec![
                term(Context::D1D2, 1, 1, -1),
                term(Context::D1U2, 1, 0, 1),
                term(Context::U1D2, 0, 1, 1),
                term(Context::U1U2, 1, 1, 1),
            ],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Requirement {
    Positive,
    Zero,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellPremise {
    pub cell: CellRef,
    pub requirement: Requirement,
    #[serde(with = "serde_rational")]
    pub value: Rational,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainStep {
    pub rule: Deduction,
    pub premises: Vec<CellPremise>,
    pub conclusion: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    DeductionChain {
        steps: Vec<ChainStep>,
        functional: Functional,
    },
    SeparatingFunctional {
        functional: Functional,
    },
}

impl Witness {
    pub fn functional(&self) -> &Functional {
        match self {
            Witness::DeductionChain { functional, .. } | Witness::SeparatingFunctional { functional } => functional,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Feasible,
    Infeasible,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LhvCertificate {
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub model: Option<LhvModel>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub witness: Option<Witness>,
}

fn hardy_chain(table: &RationalTable) -> Option<Witness> {
    let premise = |context, alice, bob, requirement| {
        let cell = CellRef::new(context, alice, bob);
        let value = table.get(cell)?.clone();
        let holds = match requirement {
            Requirement::Positive => value.is_positive(),
            Requirement::Zero => value.is_zero(),
        };
        holds.then_some(CellPremise {
            cell,
            requirement,
            value,
        })
    };
    let run = premise(Context::D1D2, 1, 1, Requirement::Positive)?;
    let d1u2 = premise(Context::D1U2, 1, 0, Requirement::Zero)?;
    let u1d2 = premise(Context::U1D2, 0, 1, Requirement::Zero)?;
    let u1u2 = premise(Context::U1U2, 1, 1, Requirement::Zero)?;
    let steps = vec![
        ChainStep {
            rule: Deduction::One,
            premises: vec![run, d1u2],
            conclusion: "in a run with D1=D2=1 the value U2=1 is fixed".into(),
        },
        ChainStep {
            rule: Deduction::Two,
            premises: Vec::new(),
            conclusion: "locality: U2=1 does not depend on Alice measuring D1 or U1".into(),
        },
        ChainStep {
            rule: Deduction::Three,
            premises: vec![u1d2],
            conclusion: "in the same run the value U1=1 is fixed".into(),
        },
        ChainStep {
            rule: Deduction::Four,
            premises: vec![u1u2],
            conclusion: "the run assigns U1=U2=1, an event of probability 0: contradiction".into(),
        },
    ];
    Some(Witness::DeductionChain {
        steps,
        functional: Functional::hardy(),
    })
}

/// Decides whether `table` is a mixture of deterministic assignments.
pub fn feasibility(table: &RationalTable) -> Result<LhvCertificate, LhvError> {
    table.validate()?;
    let cells: Vec<(CellRef, Rational)> = table.cells().map(|(c, p)| (c, p.clone())).collect();
    let assignments: Vec<DeterministicAssignment> = DeterministicAssignment::all().collect();
    let indicator = |hit: bool| if hit { Rational::one() } else { Rational::zero() };

    let mut a = vec![assignments.iter().map(|_| Rational::one()).collect::<Vec<_>>()];
    let mut b = vec![Rational::one()];
    for (cell, p) in &cells {
        a.push(assignments.iter().map(|&l| indicator(cell.contains(l))).collect());
        b.push(p.clone());
    }

    match simplex::feasibility(&a, &b) {
        LpOutcome::Feasible(x) => Ok(LhvCertificate {
            verdict: Verdict::Feasible,
            model: Some(LhvModel {
                weights: assignments
                    .iter()
                    .zip(x)
                    .filter(|(_, w)| !w.is_zero())
                    .map(|(&assignment, weight)| WeightEntry { assignment, weight })
                    .collect(),
            }),
            witness: None,
        }),
        LpOutcome::Infeasible(y) => {
            let witness = hardy_chain(table).unwrap_or_else(|| Witness::SeparatingFunctional {
                functional: Functional {
                    normalization: y[0].clone(),
                    terms: cells
                        .iter()
                        .zip(&y[1..])
                        .filter(|(_, c)| !c.is_zero())
                        .map(|((cell, _), coeff)| FunctionalTerm {
                            cell: *cell,
                            coeff: coeff.clone(),
                        })
                        .collect(),
                },
            });
            Ok(LhvCertificate {
                verdict: Verdict::Infeasible,
                model: None,
                witness: Some(witness),
            })
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CertificateError {
    #[error("certificate must carry exactly the part matching its verdict")]
    Shape,
    #[error("model weight for {0} is negative")]
    NegativeWeight(String),
    #[error("model weights sum to {0}, not 1")]
    WeightSum(String),
    #[error("model gives {cell} = {model}, table has {table}")]
    CellMismatch { cell: String, model: String, table: String },
    #[error("witness refers to unconstrained cell {0}")]
    UnconstrainedCell(String),
    #[error("witness is negative ({value}) on deterministic assignment {assignment}")]
    NegativeOnAssignment { assignment: String, value: String },
    #[error("witness value on the table is {0}, not strictly negative")]
    NoViolation(String),
    #[error("deduction chain premise {0} does not hold in the table")]
    BrokenPremise(String),
}

/// Re-checks a certificate against a table using exact arithmetic only.
pub fn validate_certificate(table: &RationalTable, cert: &LhvCertificate) -> Result<(), CertificateError> {
    match (cert.verdict, &cert.model, &cert.witness) {
        (Verdict::Feasible, Some(model), None) => validate_model(table, model),
        (Verdict::Infeasible, None, Some(witness)) => validate_witness(table, witness),
        _ => Err(CertificateError::Shape),
    }
}

fn validate_model(table: &RationalTable, model: &LhvModel) -> Result<(), CertificateError> {
    if let Some(w) = model.weights.iter().find(|w| w.weight.is_negative()) {
        return Err(CertificateError::NegativeWeight(w.assignment.to_string()));
    }
    let total = model.total();
    if !total.is_one() {
        return Err(CertificateError::WeightSum(total.to_string()));
    }
    for (cell, p) in table.cells() {
        let q = model.probability(cell);
        if &q != p {
            return Err(CertificateError::CellMismatch {
                cell: cell.to_string(),
                model: q.to_string(),
                table: p.to_string(),
            });
        }
    }
    Ok(())
}

fn validate_witness(table: &RationalTable, witness: &Witness) -> Result<(), CertificateError> {
    if let Witness::DeductionChain { steps, .. } = witness {
        for premise in steps.iter().flat_map(|s| &s.premises) {
            let holds = table.get(premise.cell).is_some_and(|v| {
                *v == premise.value
                    && match premise.requirement {
                        Requirement::Positive => v.is_positive(),
                        Requirement::Zero => v.is_zero(),
                    }
            });
            if !holds {
                return Err(CertificateError::BrokenPremise(premise.cell.to_string()));
            }
        }
    }
    let f = witness.functional();
    if let Some(t) = f.terms.iter().find(|t| table.get(t.cell).is_none()) {
        return Err(CertificateError::UnconstrainedCell(t.cell.to_string()));
    }
    for lambda in DeterministicAssignment::all() {
        let v = f.on_assignment(lambda);
        if v.is_negative() {
            return Err(CertificateError::NegativeOnAssignment {
                assignment: lambda.to_string(),
                value: v.to_string(),
            });
        }
    }
    let on_table = f.on_table(table).expect("all cells checked above");
    if !on_table.is_negative() {
        return Err(CertificateError::NoViolation(on_table.to_string()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hardy_functional_is_local() {
        let f = Functional::hardy();
        assert!(DeterministicAssignment::all().all(|l| !f.on_assignment(l).is_negative()));
    }

    #[test]
    fn claimed_completion_is_infeasible_with_chain() {
        let t = completed_claims_table(&ClaimsCompletion::paper()).unwrap();
        let cert = feasibility(&t).unwrap();
        assert_eq!(cert.verdict, Verdict::Infeasible);
        assert!(matches!(cert.witness, Some(Witness::DeductionChain { .. })));
        validate_certificate(&t, &cert).unwrap();
        assert_eq!(Functional::hardy().on_table(&t), Some(rat(-1, 16)));
    }

    #[test]
    fn deterministic_table_is_feasible() {
        // always d1=0, d2=1, u1=1, u2=0
        let lambda = DeterministicAssignment {
            d1: 0,
            d2: 1,
            u1: 1,
            u2: 0,
        };
        let mut t = RationalTable::new();
        for cell in CellRef::all() {
            t.set(cell, if cell.contains(lambda) { rat(1, 1) } else { rat(0, 1) });
        }
        let cert = feasibility(&t).unwrap();
        let model = cert.model.as_ref().unwrap();
        assert_eq!(model.weights.len(), 1);
        assert_eq!(model.weights[0].assignment, lambda);
        validate_certificate(&t, &cert).unwrap();
    }

    #[test]
    fn pr_box_gets_separating_functional() {
        // anticorrelation in d1d2, perfect correlation in the other three
        let h = rat(1, 2);
        let z = rat(0, 1);
        let mut t = RationalTable::new();
        for c in [Context::D1U2, Context::U1D2, Context::U1U2] {
            t.set_context(c, [[h.clone(), z.clone()], [z.clone(), h.clone()]]);
        }
        t.set_context(Context::D1D2, [[z.clone(), h.clone()], [h.clone(), z.clone()]]);
        let cert = feasibility(&t).unwrap();
        assert_eq!(cert.verdict, Verdict::Infeasible);
        assert!(matches!(cert.witness, Some(Witness::SeparatingFunctional { .. })));
        validate_certificate(&t, &cert).unwrap();
    }

    #[test]
    fn tampered_certificates_fail() {
        let t = completed_claims_table(&ClaimsCompletion::paper()).unwrap();
        let mut cert = feasibility(&t).unwrap();
        let zero = LhvCertificate {
            verdict: Verdict::Infeasible,
            model: None,
            witness: Some(Witness::SeparatingFunctional {
                functional: Functional {
                    normalization: Rational::zero(),
                    terms: Vec::new(),
                },
            }),
        };
        assert!(matches!(
            validate_certificate(&t, &zero),
            Err(CertificateError::NoViolation(_))
        ));
        cert.model = Some(LhvModel { weights: Vec::new() });
        assert_eq!(validate_certificate(&t, &cert), Err(CertificateError::Shape));

        // chain premise that does not hold
        let mut other = t.clone();
        other.set(CellRef::new(Context::U1U2, 1, 1), rat(1, 4));
        let chain = feasibility(&t).unwrap();
        assert!(validate_certificate(&other, &chain).is_err());
    }

    #[test]
    fn malformed_table_is_an_error() {
        let mut t = RationalTable::new();
        t.set(CellRef::new(Context::D1D2, 0, 0), rat(3, 2));
        assert!(matches!(feasibility(&t), Err(LhvError::Table(_))));
    }
}
