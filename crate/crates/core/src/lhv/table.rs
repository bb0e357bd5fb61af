use super::rational::{rat, rationalize, serde_opt_rational, Rational, RationalizeError, MAX_DENOMINATOR};
use crate::observables::{Context, Observable, ProbabilityTable};
use crate::Tolerance;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;

/// Deterministic values of D₁, D₂, U₁, U₂.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DeterministicAssignment {
    pub d1: u8,
    pub d2: u8,
    pub u1: u8,
    pub u2: u8,
}

impl DeterministicAssignment {
    /// All 16 assignments, `d1` most significant.
    pub fn all() -> impl Iterator<Item = DeterministicAssignment> {
        (0u8..16).map(|i| DeterministicAssignment {
            d1: (i >> 3) & 1,
            d2: (i >> 2) & 1,
            u1: (i >> 1) & 1,
            u2: i & 1,
        })
    }

    pub fn index(self) -> usize {
        ((self.d1 << 3) | (self.d2 << 2) | (self.u1 << 1) | self.u2) as usize
    }

    pub fn value(self, o: Observable) -> u8 {
        match o {
            Observable::D1 => self.d1,
            Observable::D2 => self.d2,
            Observable::U1 => self.u1,
            Observable::U2 => self.u2,
        }
    }

    /// Outcome this assignment produces in context `c`.
    pub fn outcome(self, c: Context) -> (u8, u8) {
        (self.value(c.alice()), self.value(c.bob()))
    }
}

impl fmt::Display for DeterministicAssignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "d1={} d2={} u1={} u2={}", self.d1, self.d2, self.u1, self.u2)
    }
}

/// One cell of a context table: P(alice = a, bob = b).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CellRef {
    pub context: Context,
    pub alice: u8,
    pub bob: u8,
}

impl CellRef {
    pub fn new(context: Context, alice: u8, bob: u8) -> Self {
        CellRef { context, alice, bob }
    }

    pub fn contains(self, lambda: DeterministicAssignment) -> bool {
        lambda.outcome(self.context) == (self.alice, self.bob)
    }

    pub fn all() -> impl Iterator<Item = CellRef> {
        Context::ALL
            .into_iter()
            .flat_map(|c| (0..4u8).map(move |k| CellRef::new(c, k >> 1, k & 1)))
    }
}

impl fmt::Display for CellRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = self.context;
        write!(
            f,
            "P({}={}, {}={})",
            c.alice().label().to_uppercase(),
            self.alice,
            c.bob().label().to_uppercase(),
            self.bob
        )
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TableError {
    #[error("{cell} = {value} is outside [0, 1]")]
    OutOfRange { cell: String, value: String },
    #[error("context {context} sums to {sum}, expected 1")]
    ContextSum { context: &'static str, sum: String },
    #[error("constrained cells of context {context} sum to {sum} > 1")]
    PartialSum { context: &'static str, sum: String },
    #[error(transparent)]
    Rationalize(#[from] RationalizeError),
}

#[derive(Serialize, Deserialize)]
struct ContextCells(
    #[serde(with = "serde_opt_rational")] Option<Rational>,
    #[serde(with = "serde_opt_rational")] Option<Rational>,
);

/// Exact (possibly partial) four-context table. `None` leaves a cell
/// unconstrained.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RationalTable {
    cells: BTreeMap<CellRef, Rational>,
}

impl RationalTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn set(&mut self, cell: CellRef, p: Rational) -> &mut Self {
        self.cells.insert(cell, p);
        self
    }

    /// Sets a whole context from `[alice][bob]` entries.
    pub fn set_context(&mut self, c: Context, probs: [[Rational; 2]; 2]) -> &mut Self {
        for (a, row) in probs.into_iter().enumerate() {
            for (b, p) in row.into_iter().enumerate() {
                self.cells.insert(CellRef::new(c, a as u8, b as u8), p);
            }
        }
        self
    }

    pub fn get(&self, cell: CellRef) -> Option<&Rational> {
        self.cells.get(&cell)
    }

    /// Constrained cells in (context, alice, bob) order.
    pub fn cells(&self) -> impl Iterator<Item = (CellRef, &Rational)> {
        self.cells.iter().map(|(c, p)| (*c, p))
    }

    pub fn is_complete(&self) -> bool {
        self.cells.len() == 16
    }

    /// Every cell in [0,1]; complete contexts sum to exactly 1, partial
    /// ones to at most 1.
    pub fn validate(&self) -> Result<(), TableError> {
        for (cell, p) in &self.cells {
            if outside_unit_interval(p) {
                return Err(TableError::OutOfRange {
                    cell: cell.to_string(),
                    value: p.to_string(),
                });
            }
        }
        for c in Context::ALL {
            let present: Vec<&Rational> = (0..4u8)
                .filter_map(|k| self.cells.get(&CellRef::new(c, k >> 1, k & 1)))
                .collect();
            let sum: Rational = present.iter().copied().sum();
            if present.len() == 4 && !sum.is_one() {
                return Err(TableError::ContextSum {
                    context: c.label(),
                    sum: sum.to_string(),
                });
            }
            if sum > Rational::one() {
                return Err(TableError::PartialSum {
                    context: c.label(),
                    sum: sum.to_string(),
                });
            }
        }
        Ok(())
    }

    /// Exact table from float probabilities. Each entry must lie within
    /// `tol` of a fraction with denominator ≤ 2^20.
    pub fn from_probabilities(table: &ProbabilityTable, tol: Tolerance) -> Result<Self, TableError> {
        let mut out = Self::new();
        for ct in &table.contexts {
            for a in 0..2 {
                for b in 0..2 {
                    let p = rationalize(ct.probs[a][b], tol.0, MAX_DENOMINATOR)?;
                    out.set(CellRef::new(ct.context, a as u8, b as u8), p);
                }
            }
        }
        out.validate()?;
        Ok(out)
    }

    /// Same statistics with the outcomes of `o` swapped in every context.
    pub fn relabel(&self, o: Observable) -> Self {
        let cells = self
            .cells
            .iter()
            .map(|(cell, p)| {
                let mut cell = *cell;
                if cell.context.alice() == o {
                    cell.alice ^= 1;
                }
                if cell.context.bob() == o {
                    cell.bob ^= 1;
                }
                (cell, p.clone())
            })
            .collect();
        Self { cells }
    }
}

fn outside_unit_interval(p: &Rational) -> bool {
    *p < Rational::zero() || *p > Rational::one()
}

impl Serialize for RationalTable {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let map: BTreeMap<&'static str, [ContextCells; 2]> = Context::ALL
            .iter()
            .filter(|c| (0..4u8).any(|k| self.cells.contains_key(&CellRef::new(**c, k >> 1, k & 1))))
            .map(|&c| {
                let get = |a, b| self.cells.get(&CellRef::new(c, a, b)).cloned();
                (
                    c.label(),
                    [ContextCells(get(0, 0), get(0, 1)), ContextCells(get(1, 0), get(1, 1))],
                )
            })
            .collect();
        map.serialize(s)
    }
}

impl<'de> Deserialize<'de> for RationalTable {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let map = BTreeMap::<String, [ContextCells; 2]>::deserialize(d)?;
        let mut out = RationalTable::new();
        for (label, rows) in map {
            let c =
                Context::parse(&label).ok_or_else(|| serde::de::Error::custom(format!("unknown context `{label}`")))?;
            for (a, ContextCells(p0, p1)) in rows.into_iter().enumerate() {
                for (b, p) in [p0, p1].into_iter().enumerate() {
                    if let Some(p) = p {
                        out.set(CellRef::new(c, a as u8, b as u8), p);
                    }
                }
            }
        }
        Ok(out)
    }
}

/// Partial table holding only the four Hardy facts: P(D₁=1,D₂=1) = p and
/// the three zero cells implied by the two certain conditionals and
/// U₁U₂ = 0.
pub fn hardy_facts_table(p_joint: Rational) -> RationalTable {
    let mut t = RationalTable::new();
    t.set(CellRef::new(Context::D1D2, 1, 1), p_joint)
        .set(CellRef::new(Context::D1U2, 1, 0), Rational::zero())
        .set(CellRef::new(Context::U1D2, 0, 1), Rational::zero())
        .set(CellRef::new(Context::U1U2, 1, 1), Rational::zero());
    t
}

/// Parameters of a completed claims table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimsCompletion {
    #[serde(with = "super::rational::serde_rational")]
    pub p_joint: Rational,
    /// P(D₁=1) = P(D₂=1), derived from the uniform Bell-branch weights.
    #[serde(with = "super::rational::serde_rational")]
    pub d_marginal: Rational,
    /// P(U₁=1) = P(U₂=1), the maximum-entropy choice 1/2.
    #[serde(with = "super::rational::serde_rational")]
    pub u_marginal: Rational,
}

impl ClaimsCompletion {
    /// p = 1/16, P(D=1) = 1/4, P(U=1) = 1/2.
    pub fn paper() -> Self {
        ClaimsCompletion {
            p_joint: rat(1, 16),
            d_marginal: rat(1, 4),
            u_marginal: rat(1, 2),
        }
    }
}

/// Full four-context table consistent with the Hardy facts and the given
/// marginals:
///
/// * (D₁,D₂): P(1,1) = p and marginals m_D,
/// * (D₁,U₂): P(D₁=1,U₂=0) = 0, marginals m_D and m_U,
/// * (U₁,D₂): P(U₁=0,D₂=1) = 0, marginals m_U and m_D,
/// * (U₁,U₂): P(1,1) = 0, marginals m_U.
///
/// Each context is then fully determined. Fails if a cell would leave [0,1].
pub fn completed_claims_table(c: &ClaimsCompletion) -> Result<RationalTable, TableError> {
    let one = Rational::one();
    let zero = Rational::zero();
    let (p, d, u) = (&c.p_joint, &c.d_marginal, &c.u_marginal);
    let mut t = RationalTable::new();
    t.set_context(Context::D1D2, [[&one - d - d + p, d - p], [d - p, p.clone()]])
        .set_context(Context::D1U2, [[&one - u, u - d], [zero.clone(), d.clone()]])
        .set_context(Context::U1D2, [[&one - u, zero.clone()], [u - d, d.clone()]])
        .set_context(Context::U1U2, [[&one - u - u, u.clone()], [u.clone(), zero]]);
    t.validate()?;
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn assignments_are_distinct() {
        let all: Vec<_> = DeterministicAssignment::all().collect();
        assert_eq!(all.len(), 16);
        for (i, a) in all.iter().enumerate() {
            assert_eq!(a.index(), i);
        }
    }

    #[test]
    fn claimed_completion() {
        let t = completed_claims_table(&ClaimsCompletion::paper()).unwrap();
        assert!(t.is_complete());
        assert_eq!(t.get(CellRef::new(Context::D1D2, 0, 0)), Some(&rat(9, 16)));
        assert_eq!(t.get(CellRef::new(Context::D1U2, 0, 0)), Some(&rat(1, 2)));
        assert_eq!(t.get(CellRef::new(Context::U1D2, 1, 0)), Some(&rat(1, 4)));
        assert_eq!(t.get(CellRef::new(Context::U1U2, 0, 0)), Some(&rat(0, 1)));
    }

    #[test]
    fn malformed_tables() {
        let mut t = RationalTable::new();
        t.set_context(Context::D1D2, [[rat(1, 2), rat(1, 2)], [rat(1, 2), rat(0, 1)]]);
        assert!(matches!(t.validate(), Err(TableError::ContextSum { .. })));
        let mut t = RationalTable::new();
        t.set(CellRef::new(Context::U1U2, 0, 0), rat(-1, 2));
        assert!(matches!(t.validate(), Err(TableError::OutOfRange { .. })));
        let mut t = RationalTable::new();
        t.set(CellRef::new(Context::U1U2, 0, 0), rat(2, 3))
            .set(CellRef::new(Context::U1U2, 0, 1), rat(2, 3));
        assert!(matches!(t.validate(), Err(TableError::PartialSum { .. })));
        // completion impossible for large p
        let c = ClaimsCompletion {
            p_joint: rat(3, 4),
            d_marginal: rat(3, 4),
            u_marginal: rat(1, 2),
        };
        assert!(completed_claims_table(&c).is_err());
    }

    #[test]
    fn json_round_trip_keeps_unconstrained_cells() {
        let t = hardy_facts_table(rat(1, 16));
        let json = serde_json::to_string(&t).unwrap();
        let back: RationalTable = serde_json::from_str(&json).unwrap();
        assert_eq!(back, t);
        assert!(json.contains("null"));
        assert!(serde_json::from_str::<RationalTable>(r#"{"xy": [[null,null],[null,null]]}"#).is_err());
    }

    #[test]
    fn relabel_is_an_involution() {
        let t = completed_claims_table(&ClaimsCompletion::paper()).unwrap();
        let r = t.relabel(Observable::U1);
        assert_ne!(r, t);
        assert_eq!(r.relabel(Observable::U1), t);
        assert_eq!(r.get(CellRef::new(Context::U1U2, 0, 1)), Some(&rat(0, 1)));
    }
}
