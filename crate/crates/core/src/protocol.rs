//! The four-particle state and its Bell-basis expansions.
//!
//! Particles 1 and 2 share a singlet; Alice holds ancilla A in |+⟩ and Bob
//! holds ancilla B in (|+⟩+|−⟩)/√2. The total state is `|A⟩|Ψ⁻⟩₁₂|B⟩` in the
//! canonical order (A, 1, 2, B). Expanding it over Alice's pair (A,1) or
//! Bob's pair (2,B) gives the teleportation branches.

use crate::expansion_table::{ExpansionTable, TableError, TableExpansion};
use crate::qstate::{self, Amplitude, QStateError, RawVector, Slot, StateVector};
use crate::{ComplexValue, Tolerance};
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

/// Bell basis element. The declaration order is the report order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum BellIndex {
    #[serde(rename = "psi-")]
    PsiMinus,
    #[serde(rename = "psi+")]
    PsiPlus,
    #[serde(rename = "phi-")]
    PhiMinus,
    #[serde(rename = "phi+")]
    PhiPlus,
}

impl BellIndex {
    pub const ALL: [BellIndex; 4] = [
        BellIndex::PsiMinus,
        BellIndex::PsiPlus,
        BellIndex::PhiMinus,
        BellIndex::PhiPlus,
    ];

    pub fn label(self) -> &'static str {
        match self {
            BellIndex::PsiMinus => "psi-",
            BellIndex::PsiPlus => "psi+",
            BellIndex::PhiMinus => "phi-",
            BellIndex::PhiPlus => "phi+",
        }
    }

    pub fn parse(s: &str) -> Option<BellIndex> {
        BellIndex::ALL.into_iter().find(|b| b.label() == s)
    }

    pub fn is_psi(self) -> bool {
        matches!(self, BellIndex::PsiMinus | BellIndex::PsiPlus)
    }
}

impl fmt::Display for BellIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// The two measured pairs of the protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum BellPair {
    #[serde(rename = "A1")]
    A1,
    #[serde(rename = "2B")]
    TwoB,
}

impl BellPair {
    pub fn label(self) -> &'static str {
        match self {
            BellPair::A1 => "A1",
            BellPair::TwoB => "2B",
        }
    }

    pub fn parse(s: &str) -> Option<BellPair> {
        match s {
            "A1" => Some(BellPair::A1),
            "2B" => Some(BellPair::TwoB),
            _ => None,
        }
    }

    pub fn slots(self) -> [Slot; 2] {
        match self {
            BellPair::A1 => [Slot::A, Slot::One],
            BellPair::TwoB => [Slot::Two, Slot::B],
        }
    }

    pub fn remaining(self) -> [Slot; 2] {
        match self {
            BellPair::A1 => [Slot::Two, Slot::B],
            BellPair::TwoB => [Slot::A, Slot::One],
        }
    }
}

impl fmt::Display for BellPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProtocolError {
    #[error(transparent)]
    State(#[from] QStateError),
    #[error(transparent)]
    Table(#[from] TableError),
    #[error("measured slots must be two distinct slots of the state")]
    BadPair,
}

fn r(x: f64) -> Amplitude {
    Amplitude::new(x, 0.0)
}

/// (|+−⟩ − |−+⟩)/√2 on slots (1, 2).
pub fn make_singlet() -> StateVector {
    bell_state_on(BellIndex::PsiMinus, [Slot::One, Slot::Two])
}

/// |A⟩ = |+⟩ (σz eigenstate) and |B⟩ = (|+⟩+|−⟩)/√2 (σx eigenstate).
pub fn make_ancillas() -> (StateVector, StateVector) {
    let a = StateVector::plus(Slot::A);
    let b = StateVector::new(vec![Slot::B], vec![r(FRAC_1_SQRT_2), r(FRAC_1_SQRT_2)]).expect("normalized");
    (a, b)
}

/// |A⟩ ⊗ |Ψ⁻⟩₁₂ ⊗ |B⟩ on (A, 1, 2, B).
pub fn make_total_state() -> StateVector {
    let (a, b) = make_ancillas();
    let left = qstate::tensor(&a, &make_singlet()).expect("disjoint slots");
    qstate::tensor(&left, &b).expect("disjoint slots")
}

/// Bell state on a generic two-slot layout, first slot most significant.
pub fn bell_state_on(i: BellIndex, slots: [Slot; 2]) -> StateVector {
    let h = FRAC_1_SQRT_2;
    // amplitudes over |++>, |+->, |-+>, |-->
    let amps = match i {
        BellIndex::PsiMinus => [0.0, h, -h, 0.0],
        BellIndex::PsiPlus => [0.0, h, h, 0.0],
        BellIndex::PhiMinus => [h, 0.0, 0.0, -h],
        BellIndex::PhiPlus => [h, 0.0, 0.0, h],
    };
    StateVector::new(slots.to_vec(), amps.into_iter().map(r).collect()).expect("normalized")
}

/// Bell state on the measured pair `pair`.
pub fn bell_state(i: BellIndex, pair: BellPair) -> StateVector {
    bell_state_on(i, pair.slots())
}

/// Residual of one branch; zero-weight branches carry no vector.
#[derive(Debug, Clone, PartialEq)]
pub enum Residual {
    State(StateVector),
    Empty,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Branch {
    pub bell: BellIndex,
    pub coefficient: Amplitude,
    pub residual: Residual,
}

impl Branch {
    /// coefficient · residual, or `None` for an empty branch.
    pub fn vector(&self) -> Option<RawVector> {
        match &self.residual {
            Residual::State(s) => Some(s.scaled(self.coefficient)),
            Residual::Empty => None,
        }
    }
}

/// `s = Σ coefficient · |bell⟩ ⊗ |residual⟩` over a measured slot pair.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchExpansion {
    pub measured_slots: [Slot; 2],
    pub original_slots: Vec<Slot>,
    pub branches: Vec<Branch>,
}

impl BranchExpansion {
    pub fn branch(&self, bell: BellIndex) -> &Branch {
        self.branches
            .iter()
            .find(|b| b.bell == bell)
            .expect("every Bell index has a branch")
    }

    pub fn total_weight(&self) -> f64 {
        self.branches.iter().map(|b| b.coefficient.norm_sqr()).sum()
    }

    /// Sums the branches back into a vector on the original slot order.
    pub fn reconstruct(&self) -> Result<RawVector, QStateError> {
        let mut acc = RawVector::zeros(self.original_slots.clone())?;
        for branch in &self.branches {
            if let Residual::State(res) = &branch.residual {
                let bell = bell_state_on(branch.bell, self.measured_slots).scaled(branch.coefficient);
                let term = qstate::tensor_raw(&bell, res)?;
                acc = acc.add(&term)?;
            }
        }
        Ok(acc)
    }
}

/// Index of the largest-magnitude amplitude, lowest index among near ties.
fn phase_reference(amps: &[Amplitude], tol: Tolerance) -> usize {
    let max = amps.iter().map(|a| a.norm()).fold(0.0, f64::max);
    amps.iter()
        .position(|a| a.norm() >= max - tol.0.max(max * 1e-9))
        .unwrap_or(0)
}

/// Expands `s` in the Bell basis of `slots`. Coefficients are the partial
/// inner products `⟨bell|s⟩`, with the phase fixed so that the residual's
/// reference amplitude (largest magnitude, first on ties) is real and
/// positive. Branches of weight ≤ `tol` are [`Residual::Empty`].
pub fn expand_in_bell_basis(
    s: &StateVector,
    slots: [Slot; 2],
    tol: Tolerance,
) -> Result<BranchExpansion, ProtocolError> {
    if slots[0] == slots[1] || !slots.iter().all(|x| s.slots().contains(x)) || s.n_qubits() < 3 {
        return Err(ProtocolError::BadPair);
    }
    let branches = BellIndex::ALL
        .iter()
        .map(|&bell| {
            let v = qstate::partial_inner(&bell_state_on(bell, slots), s)?;
            let weight = v.norm_sqr();
            if weight <= tol.0 {
                return Ok(Branch {
                    bell,
                    coefficient: Amplitude::new(0.0, 0.0),
                    residual: Residual::Empty,
                });
            }
            let norm = weight.sqrt();
            let reference = v.amps()[phase_reference(v.amps(), tol)];
            let phase = reference / reference.norm();
            let coefficient = phase * norm;
            let residual = StateVector::new(v.slots().to_vec(), v.amps().iter().map(|a| a / coefficient).collect())?;
            Ok(Branch {
                bell,
                coefficient,
                residual: Residual::State(residual),
            })
        })
        .collect::<Result<Vec<_>, QStateError>>()?;
    Ok(BranchExpansion {
        measured_slots: slots,
        original_slots: s.slots().to_vec(),
        branches,
    })
}

/// Comparison of one derived branch against its printed counterpart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchVerdict {
    pub bell: BellIndex,
    pub empty: bool,
    pub coefficient: ComplexValue,
    pub weight: f64,
    /// Derived residual in amplitude form (normalized), on `residual_slots`.
    pub residual: Vec<ComplexValue>,
    /// Derived branch vector equals the printed one amplitude-wise.
    pub exact_match: bool,
    pub exact_deviation: f64,
    /// Equal after multiplying the printed vector by `phase`.
    pub phase_match: bool,
    pub phase_deviation: f64,
    /// Unit-modulus factor with derived = phase · printed. Absent when either
    /// side is zero.
    pub phase: Option<ComplexValue>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionReport {
    pub pair: BellPair,
    pub residual_slots: Vec<Slot>,
    pub printed_overall: String,
    pub branches: Vec<BranchVerdict>,
    pub all_exact: bool,
    pub all_up_to_phase: bool,
    pub reconstruction_deviation: f64,
}

/// Compares the expansion of `s` over `expected.pair` with a printed table.
pub fn verify_expansion(
    s: &StateVector,
    expected: &TableExpansion,
    tol: Tolerance,
) -> Result<ExpansionReport, ProtocolError> {
    let expansion = expand_in_bell_basis(s, expected.pair.slots(), tol)?;
    let residual_slots = expected.residual_slots.clone();
    let mut branches = Vec::with_capacity(4);
    for branch in &expansion.branches {
        let printed = expected.branch_vector(branch.bell)?;
        let printed_zero = printed.norm_sqr() <= tol.0;
        let derived = match branch.vector() {
            Some(v) => v.reorder(&residual_slots)?,
            None => RawVector::zeros(residual_slots.clone())?,
        };
        let exact_deviation = derived.max_deviation(&printed)?;
        let (phase, phase_deviation) = match (branch.vector().is_some(), printed_zero) {
            (false, true) => (None, 0.0),
            (true, false) => {
                let overlap: Amplitude = printed
                    .amps()
                    .iter()
                    .zip(derived.amps())
                    .map(|(p, d)| p.conj() * d)
                    .sum();
                if overlap.norm() <= tol.0 {
                    (None, f64::INFINITY)
                } else {
                    let phase = overlap / overlap.norm();
                    let dev = derived
                        .amps()
                        .iter()
                        .zip(printed.amps())
                        .map(|(d, p)| (d - phase * p).norm())
                        .fold(0.0, f64::max);
                    (Some(phase), dev)
                }
            }
            _ => (None, f64::INFINITY),
        };
        let residual = match &branch.residual {
            Residual::State(st) => st.reorder(&residual_slots)?.amps().iter().map(|&a| a.into()).collect(),
            Residual::Empty => Vec::new(),
        };
        branches.push(BranchVerdict {
            bell: branch.bell,
            empty: matches!(branch.residual, Residual::Empty),
            coefficient: branch.coefficient.into(),
            weight: branch.coefficient.norm_sqr(),
            residual,
            exact_match: exact_deviation <= tol.0,
            exact_deviation,
            phase_match: phase_deviation <= tol.0,
            phase_deviation,
            phase: phase.map(Into::into),
        });
    }
    let reconstruction_deviation = expansion.reconstruct()?.max_deviation(&s.to_raw())?;
    Ok(ExpansionReport {
        pair: expected.pair,
        residual_slots,
        printed_overall: expected.overall.to_string(),
        all_exact: branches.iter().all(|b| b.exact_match),
        all_up_to_phase: branches.iter().all(|b| b.phase_match),
        branches,
        reconstruction_deviation,
    })
}

/// Compares the total state's expansion over `pair` with the bundled table.
pub fn verify_expansion_against_paper(pair: BellPair, tol: Tolerance) -> Result<ExpansionReport, ProtocolError> {
    let table = ExpansionTable::bundled();
    verify_expansion(&make_total_state(), table.get(pair)?, tol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qstate::{born_probability, reduced_projector_fidelity, ObservableOp};

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    #[test]
    fn singlet_amplitudes() {
        let s = make_singlet();
        let h = FRAC_1_SQRT_2;
        assert_eq!(s.amps(), &[r(0.), r(h), r(-h), r(0.)]);
        assert!((s.norm_sqr() - 1.0).abs() < 1e-12);
        let both_plus = ObservableOp::projector_onto(
            "++",
            &StateVector::basis(vec![Slot::One, Slot::Two], &[false, false]).unwrap(),
            s.slots(),
        )
        .unwrap();
        assert_eq!(born_probability(&both_plus, &s).unwrap().value, 0.0);
    }

    #[test]
    fn ancilla_expectations() {
        let (a, b) = make_ancillas();
        assert!((a.norm_sqr() - 1.0).abs() < 1e-12);
        assert!((b.norm_sqr() - 1.0).abs() < 1e-12);
        let z = ObservableOp::pauli_z(Slot::A, &[Slot::A]).unwrap();
        let x = ObservableOp::pauli_x(Slot::B, &[Slot::B]).unwrap();
        assert!((qstate::expectation(&z, &a).unwrap().re - 1.0).abs() < 1e-12);
        assert!((qstate::expectation(&x, &b).unwrap().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn total_state_shape() {
        let s = make_total_state();
        assert_eq!(s.slots(), &Slot::CANONICAL);
        let nonzero: Vec<_> = s.amps().iter().filter(|a| a.norm() > 1e-15).collect();
        assert_eq!(nonzero.len(), 4);
        assert!(nonzero.iter().all(|a| (a.norm() - 0.5).abs() < 1e-12));
        let f = reduced_projector_fidelity(&s, Slot::A, &StateVector::plus(Slot::A)).unwrap();
        assert!((f - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bell_states_orthonormal() {
        for i in BellIndex::ALL {
            for j in BellIndex::ALL {
                let ip = bell_state(i, BellPair::A1).inner(&bell_state(j, BellPair::A1)).unwrap();
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((ip - r(expected)).norm() < 1e-12, "{i} {j}");
            }
        }
        let h = FRAC_1_SQRT_2;
        assert_eq!(
            bell_state(BellIndex::PhiPlus, BellPair::TwoB).amps(),
            &[r(h), r(0.), r(0.), r(h)]
        );
    }

    #[test]
    fn alice_expansion_branches() {
        let e = expand_in_bell_basis(&make_total_state(), BellPair::A1.slots(), tol()).unwrap();
        let b = e.branch(BellIndex::PsiMinus);
        assert!((b.coefficient.norm() - 0.5).abs() < 1e-12);
        let Residual::State(res) = &b.residual else {
            panic!("empty")
        };
        assert_eq!(res.slots(), &[Slot::Two, Slot::B]);
        let f2 = reduced_projector_fidelity(res, Slot::Two, &StateVector::plus(Slot::Two)).unwrap();
        let (_, anc_b) = make_ancillas();
        let fb = reduced_projector_fidelity(res, Slot::B, &anc_b).unwrap();
        assert!((f2 - 1.0).abs() < 1e-12 && (fb - 1.0).abs() < 1e-12);
        assert!((e.total_weight() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bob_expansion_branches() {
        let e = expand_in_bell_basis(&make_total_state(), BellPair::TwoB.slots(), tol()).unwrap();
        let b = e.branch(BellIndex::PsiMinus);
        assert!((b.coefficient.norm() - 0.5).abs() < 1e-12);
        let Residual::State(res) = &b.residual else {
            panic!("empty")
        };
        let plus_x = StateVector::spin_up_along(Slot::One, std::f64::consts::FRAC_PI_2, 0.0);
        let f1 = reduced_projector_fidelity(res, Slot::One, &plus_x).unwrap();
        assert!((f1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bell_state_expands_to_single_branch() {
        let s = qstate::tensor(
            &bell_state(BellIndex::PhiMinus, BellPair::A1),
            &StateVector::plus(Slot::Two),
        )
        .unwrap();
        let e = expand_in_bell_basis(&s, [Slot::A, Slot::One], tol()).unwrap();
        let present: Vec<_> = e.branches.iter().filter(|b| b.residual != Residual::Empty).collect();
        assert_eq!(present.len(), 1);
        assert_eq!(present[0].bell, BellIndex::PhiMinus);
        assert!((present[0].coefficient.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bad_pairs_rejected() {
        let s = make_total_state();
        assert_eq!(
            expand_in_bell_basis(&s, [Slot::A, Slot::A], tol()),
            Err(ProtocolError::BadPair)
        );
        assert_eq!(
            expand_in_bell_basis(&make_singlet(), [Slot::One, Slot::Two], tol()),
            Err(ProtocolError::BadPair)
        );
    }

    #[test]
    fn product_state_report_is_well_defined() {
        // |+>_A |+>_1 |->_2 |->_B has no entanglement across any cut
        let s = StateVector::basis(Slot::CANONICAL.to_vec(), &[false, false, true, true]).unwrap();
        let table = ExpansionTable::bundled();
        let report = verify_expansion(&s, table.get(BellPair::A1).unwrap(), tol()).unwrap();
        assert_eq!(report.branches.len(), 4);
        let empty = report.branches.iter().filter(|b| b.empty).count();
        assert_eq!(empty, 2);
        assert!(report.reconstruction_deviation < 1e-12);
        for b in report.branches.iter().filter(|b| b.empty) {
            assert!(b.phase.is_none() && b.residual.is_empty());
        }
    }
}
