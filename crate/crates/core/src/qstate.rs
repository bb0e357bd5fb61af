//! Labelled qubit states and observables on at most four qubits.
//!
//! Qubits are addressed by [`Slot`] rather than by position. A state keeps its
//! slot list, which fixes the tensor ordering: the first slot is the most
//! significant bit of the amplitude index, and within a qubit `+` is bit 0
//! and `−` is bit 1. The canonical four-qubit order is `(A, 1, 2, B)`.

use crate::matrix::CMatrix;
use crate::Tolerance;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Complex amplitude.
pub type Amplitude = Complex64;

/// Tolerance every public [`StateVector`] satisfies on its squared norm.
pub const NORM_TOLERANCE: f64 = 1e-12;

pub const MAX_QUBITS: usize = 4;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum QStateError {
    #[error("slot {0} appears on both sides of a tensor product")]
    SlotCollision(Slot),
    #[error("slot {0} listed more than once")]
    DuplicateSlot(Slot),
    #[error("slot {0} is not part of this state")]
    MissingSlot(Slot),
    #[error("expected {expected} amplitudes, got {got}")]
    Length { expected: usize, got: usize },
    #[error("between 1 and {MAX_QUBITS} qubits supported, got {0}")]
    QubitCount(usize),
    #[error("non-finite amplitude or matrix entry")]
    NonFinite,
    #[error("state is not normalized: squared norm {0}")]
    NotNormalized(f64),
    #[error("cannot normalize a zero vector")]
    ZeroVector,
    #[error("slot layouts differ: {left} vs {right}")]
    SlotMismatch { left: String, right: String },
    #[error("operator `{name}` is not Hermitian (deviation {deviation:e})")]
    NotHermitian { name: String, deviation: f64 },
    #[error("operator `{name}` is not a projector (deviation {deviation:e})")]
    NotProjector { name: String, deviation: f64 },
    #[error("projection has zero probability ({0:e}); no post-measurement state exists")]
    ZeroProbabilityBranch(f64),
    #[error("operators `{a}` and `{b}` do not commute (commutator norm {norm:e})")]
    NonCommuting { a: String, b: String, norm: f64 },
}

/// Name of a qubit in the four-particle setup.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Slot {
    #[serde(rename = "A")]
    A,
    #[serde(rename = "1")]
    One,
    #[serde(rename = "2")]
    Two,
    #[serde(rename = "B")]
    B,
}

impl Slot {
    pub const CANONICAL: [Slot; 4] = [Slot::A, Slot::One, Slot::Two, Slot::B];

    pub fn parse(s: &str) -> Option<Slot> {
        match s {
            "A" => Some(Slot::A),
            "1" => Some(Slot::One),
            "2" => Some(Slot::Two),
            "B" => Some(Slot::B),
            _ => None,
        }
    }
}

impl fmt::Display for Slot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Slot::A => "A",
            Slot::One => "1",
            Slot::Two => "2",
            Slot::B => "B",
        })
    }
}

fn slot_list(slots: &[Slot]) -> String {
    slots.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(",")
}

fn check_slots(slots: &[Slot]) -> Result<(), QStateError> {
    if slots.is_empty() || slots.len() > MAX_QUBITS {
        return Err(QStateError::QubitCount(slots.len()));
    }
    for (i, s) in slots.iter().enumerate() {
        if slots[..i].contains(s) {
            return Err(QStateError::DuplicateSlot(*s));
        }
    }
    Ok(())
}

fn position(slots: &[Slot], slot: Slot) -> Result<usize, QStateError> {
    slots
        .iter()
        .position(|s| *s == slot)
        .ok_or(QStateError::MissingSlot(slot))
}

/// Bit of qubit `pos` (0 = most significant) in a basis index over `n` qubits.
#[inline]
fn bit(index: usize, pos: usize, n: usize) -> usize {
    (index >> (n - 1 - pos)) & 1
}

fn norm_sqr(amps: &[Amplitude]) -> f64 {
    amps.iter().map(|a| a.norm_sqr()).sum()
}

/// Normalized pure state over an ordered list of slots.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    slots: Vec<Slot>,
    amps: Vec<Amplitude>,
}

impl StateVector {
    pub fn new(slots: Vec<Slot>, amps: Vec<Amplitude>) -> Result<Self, QStateError> {
        RawVector::new(slots, amps)?.into_state()
    }

    /// Computational basis state; `minus[k]` selects `−` on `slots[k]`.
    pub fn basis(slots: Vec<Slot>, minus: &[bool]) -> Result<Self, QStateError> {
        check_slots(&slots)?;
        if minus.len() != slots.len() {
            return Err(QStateError::Length {
                expected: slots.len(),
                got: minus.len(),
            });
        }
        let n = slots.len();
        let index = minus
            .iter()
            .enumerate()
            .filter(|(_, m)| **m)
            .fold(0, |acc, (k, _)| acc | 1 << (n - 1 - k));
        let mut amps = vec![Amplitude::new(0.0, 0.0); 1 << n];
        amps[index] = Amplitude::new(1.0, 0.0);
        Ok(Self { slots, amps })
    }

    /// |+⟩ on one slot.
    pub fn plus(slot: Slot) -> Self {
        Self::basis(vec![slot], &[false]).expect("single slot")
    }

    /// |−⟩ on one slot.
    pub fn minus(slot: Slot) -> Self {
        Self::basis(vec![slot], &[true]).expect("single slot")
    }

    /// Spin-up state along the unit direction given by polar angle `theta`
    /// and azimuth `phi`.
    pub fn spin_up_along(slot: Slot, theta: f64, phi: f64) -> Self {
        let amps = vec![
            Amplitude::new((theta / 2.0).cos(), 0.0),
            Amplitude::from_polar((theta / 2.0).sin(), phi),
        ];
        Self::new(vec![slot], amps).expect("unit spinor")
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn amps(&self) -> &[Amplitude] {
        &self.amps
    }

    pub fn n_qubits(&self) -> usize {
        self.slots.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.amps)
    }

    /// ⟨self|other⟩; both states must share the same slot layout.
    pub fn inner(&self, other: &StateVector) -> Result<Amplitude, QStateError> {
        same_layout(&self.slots, &other.slots)?;
        Ok(self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum())
    }

    /// Same state with its qubits permuted into `order`.
    pub fn reorder(&self, order: &[Slot]) -> Result<Self, QStateError> {
        let raw = RawVector {
            slots: self.slots.clone(),
            amps: self.amps.clone(),
        }
        .reorder(order)?;
        Ok(Self {
            slots: raw.slots,
            amps: raw.amps,
        })
    }

    pub fn to_raw(&self) -> RawVector {
        RawVector {
            slots: self.slots.clone(),
            amps: self.amps.clone(),
        }
    }

    pub fn scaled(&self, k: Amplitude) -> RawVector {
        let mut raw = self.to_raw();
        raw.amps.iter_mut().for_each(|a| *a *= k);
        raw
    }
}

/// Possibly unnormalized vector, e.g. the residue of a projection.
#[derive(Clone, Debug, PartialEq)]
pub struct RawVector {
    slots: Vec<Slot>,
    amps: Vec<Amplitude>,
}

impl RawVector {
    pub fn new(slots: Vec<Slot>, amps: Vec<Amplitude>) -> Result<Self, QStateError> {
        check_slots(&slots)?;
        let expected = 1 << slots.len();
        if amps.len() != expected {
            return Err(QStateError::Length {
                expected,
                got: amps.len(),
            });
        }
        if amps.iter().any(|a| !a.re.is_finite() || !a.im.is_finite()) {
            return Err(QStateError::NonFinite);
        }
        Ok(Self { slots, amps })
    }

    pub fn zeros(slots: Vec<Slot>) -> Result<Self, QStateError> {
        let n = slots.len();
        Self::new(slots, vec![Amplitude::new(0.0, 0.0); 1 << n.min(MAX_QUBITS + 1)])
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn amps(&self) -> &[Amplitude] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr(&self.amps)
    }

    /// Accepts the vector as a state if it is already normalized.
    pub fn into_state(self) -> Result<StateVector, QStateError> {
        let n2 = self.norm_sqr();
        if (n2 - 1.0).abs() > NORM_TOLERANCE {
            return Err(QStateError::NotNormalized(n2));
        }
        Ok(StateVector {
            slots: self.slots,
            amps: self.amps,
        })
    }

    /// Rescales to unit norm. Vectors with squared norm at or below `tol`
    /// count as zero.
    pub fn normalize(&self, tol: Tolerance) -> Result<StateVector, QStateError> {
        let n2 = self.norm_sqr();
        if n2 <= tol.0 {
            return Err(QStateError::ZeroVector);
        }
        let k = 1.0 / n2.sqrt();
        Ok(StateVector {
            slots: self.slots.clone(),
            amps: self.amps.iter().map(|a| a * k).collect(),
        })
    }

    pub fn reorder(&self, order: &[Slot]) -> Result<Self, QStateError> {
        check_slots(order)?;
        if order.len() != self.slots.len() {
            return Err(QStateError::SlotMismatch {
                left: slot_list(&self.slots),
                right: slot_list(order),
            });
        }
        let n = order.len();
        // perm[k] = position in self of the slot that lands at position k
        let perm = order
            .iter()
            .map(|s| position(&self.slots, *s))
            .collect::<Result<Vec<_>, _>>()?;
        let amps = (0..1usize << n)
            .map(|new_index| {
                let old_index = perm
                    .iter()
                    .enumerate()
                    .fold(0, |acc, (k, &old_pos)| acc | bit(new_index, k, n) << (n - 1 - old_pos));
                self.amps[old_index]
            })
            .collect();
        Ok(Self {
            slots: order.to_vec(),
            amps,
        })
    }

    /// Largest per-amplitude difference to `other`, after aligning `other`
    /// to this vector's slot order.
    pub fn max_deviation(&self, other: &RawVector) -> Result<f64, QStateError> {
        let other = other.reorder(&self.slots)?;
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    pub fn add(&self, other: &RawVector) -> Result<RawVector, QStateError> {
        let other = other.reorder(&self.slots)?;
        Ok(RawVector {
            slots: self.slots.clone(),
            amps: self.amps.iter().zip(&other.amps).map(|(a, b)| a + b).collect(),
        })
    }
}

fn same_layout(a: &[Slot], b: &[Slot]) -> Result<(), QStateError> {
    if a == b {
        Ok(())
    } else {
        Err(QStateError::SlotMismatch {
            left: slot_list(a),
            right: slot_list(b),
        })
    }
}

fn kron(a_slots: &[Slot], a: &[Amplitude], b_slots: &[Slot], b: &[Amplitude]) -> Result<RawVector, QStateError> {
    if let Some(s) = a_slots.iter().find(|s| b_slots.contains(s)) {
        return Err(QStateError::SlotCollision(*s));
    }
    let slots: Vec<Slot> = a_slots.iter().chain(b_slots).copied().collect();
    check_slots(&slots)?;
    let amps = a.iter().flat_map(|x| b.iter().map(move |y| x * y)).collect();
    Ok(RawVector { slots, amps })
}

/// Tensor product `a ⊗ b`; slots of `b` follow those of `a`.
pub fn tensor(a: &StateVector, b: &StateVector) -> Result<StateVector, QStateError> {
    let raw = kron(&a.slots, &a.amps, &b.slots, &b.amps)?;
    Ok(StateVector {
        slots: raw.slots,
        amps: raw.amps,
    })
}

/// Tensor product where the left factor may be unnormalized.
pub fn tensor_raw(a: &RawVector, b: &StateVector) -> Result<RawVector, QStateError> {
    kron(&a.slots, &a.amps, &b.slots, &b.amps)
}

/// Contracts `bra` against its slots of `state`, leaving a vector on the
/// remaining slots (in `state`'s order).
pub fn partial_inner(bra: &StateVector, state: &StateVector) -> Result<RawVector, QStateError> {
    let n = state.n_qubits();
    let bra_pos = bra
        .slots
        .iter()
        .map(|s| position(&state.slots, *s))
        .collect::<Result<Vec<_>, _>>()?;
    let rest_pos: Vec<usize> = (0..n).filter(|p| !bra_pos.contains(p)).collect();
    let rest_slots: Vec<Slot> = rest_pos.iter().map(|&p| state.slots[p]).collect();
    if rest_slots.is_empty() {
        return Err(QStateError::QubitCount(0));
    }
    let k = bra_pos.len();
    let m = rest_pos.len();
    let mut amps = vec![Amplitude::new(0.0, 0.0); 1 << m];
    for (index, amp) in state.amps.iter().enumerate() {
        let bra_index = bra_pos
            .iter()
            .enumerate()
            .fold(0, |acc, (j, &p)| acc | bit(index, p, n) << (k - 1 - j));
        let rest_index = rest_pos
            .iter()
            .enumerate()
            .fold(0, |acc, (j, &p)| acc | bit(index, p, n) << (m - 1 - j));
        amps[rest_index] += bra.amps[bra_index].conj() * amp;
    }
    Ok(RawVector {
        slots: rest_slots,
        amps,
    })
}

/// 2×2 reduced density matrix of one slot.
pub fn reduced_density(s: &StateVector, slot: Slot) -> Result<CMatrix, QStateError> {
    let n = s.n_qubits();
    let p = position(&s.slots, slot)?;
    let mut entries = [[Amplitude::new(0.0, 0.0); 2]; 2];
    for (i, ai) in s.amps.iter().enumerate() {
        // pair i with the index differing only in the slot bit
        for b in 0..2 {
            let j = (i & !(1 << (n - 1 - p))) | b << (n - 1 - p);
            entries[bit(i, p, n)][b] += ai * s.amps[j].conj();
        }
    }
    Ok(CMatrix::from_fn(2, |r, c| entries[r][c]))
}

/// ⟨target|ρ_slot|target⟩ for a single-qubit `target`.
pub fn reduced_projector_fidelity(s: &StateVector, slot: Slot, target: &StateVector) -> Result<f64, QStateError> {
    if target.n_qubits() != 1 {
        return Err(QStateError::QubitCount(target.n_qubits()));
    }
    let rho = reduced_density(s, slot)?;
    let t = target.amps();
    let rt = rho.apply(t);
    Ok(t.iter().zip(&rt).map(|(a, b)| a.conj() * b).sum::<Amplitude>().re)
}

/// Hermitian operator on a slot layout, optionally flagged as a projector.
#[derive(Clone, Debug, PartialEq)]
pub struct ObservableOp {
    name: String,
    slots: Vec<Slot>,
    acts_on: Vec<Slot>,
    matrix: CMatrix,
    projector: bool,
}

impl ObservableOp {
    /// Embeds `local` (acting on `acts_on`, in that order) into the layout
    /// `slots`, as identity on every other slot.
    pub fn embed(
        name: impl Into<String>,
        local: &CMatrix,
        acts_on: &[Slot],
        slots: &[Slot],
        projector: bool,
    ) -> Result<Self, QStateError> {
        check_slots(slots)?;
        check_slots(acts_on)?;
        let expected = 1 << acts_on.len();
        if local.dim() != expected {
            return Err(QStateError::Length {
                expected,
                got: local.dim(),
            });
        }
        let n = slots.len();
        let k = acts_on.len();
        let pos = acts_on
            .iter()
            .map(|s| position(slots, *s))
            .collect::<Result<Vec<_>, _>>()?;
        let outside_mask = (0..n)
            .filter(|p| !pos.contains(p))
            .fold(0usize, |acc, p| acc | 1 << (n - 1 - p));
        let sub = |index: usize| {
            pos.iter()
                .enumerate()
                .fold(0, |acc, (j, &p)| acc | bit(index, p, n) << (k - 1 - j))
        };
        let matrix = CMatrix::from_fn(1 << n, |r, c| {
            if r & outside_mask == c & outside_mask {
                local.get(sub(r), sub(c))
            } else {
                Amplitude::new(0.0, 0.0)
            }
        });
        Self::from_matrix(name, slots.to_vec(), acts_on.to_vec(), matrix, projector)
    }

    /// Checks the Hermitian (and, if flagged, idempotent) invariants.
    pub fn from_matrix(
        name: impl Into<String>,
        slots: Vec<Slot>,
        acts_on: Vec<Slot>,
        matrix: CMatrix,
        projector: bool,
    ) -> Result<Self, QStateError> {
        let name = name.into();
        check_slots(&slots)?;
        if matrix.dim() != 1 << slots.len() {
            return Err(QStateError::Length {
                expected: 1 << slots.len(),
                got: matrix.dim(),
            });
        }
        if !matrix.is_finite() {
            return Err(QStateError::NonFinite);
        }
        let herm = (&matrix - &matrix.adjoint()).max_abs();
        if herm > NORM_TOLERANCE {
            return Err(QStateError::NotHermitian { name, deviation: herm });
        }
        if projector {
            let idem = (&(&matrix * &matrix) - &matrix).max_abs();
            if idem > NORM_TOLERANCE {
                return Err(QStateError::NotProjector { name, deviation: idem });
            }
        }
        Ok(Self {
            name,
            slots,
            acts_on,
            matrix,
            projector,
        })
    }

    /// |s⟩⟨s| on the slots of `s`, embedded into `slots`.
    pub fn projector_onto(name: impl Into<String>, s: &StateVector, slots: &[Slot]) -> Result<Self, QStateError> {
        Self::embed(name, &CMatrix::outer(s.amps()), s.slots(), slots, true)
    }

    pub fn identity(slots: &[Slot]) -> Result<Self, QStateError> {
        check_slots(slots)?;
        Self::from_matrix(
            "I",
            slots.to_vec(),
            Vec::new(),
            CMatrix::identity(1 << slots.len()),
            true,
        )
    }

    /// Pauli X on one slot.
    pub fn pauli_x(slot: Slot, slots: &[Slot]) -> Result<Self, QStateError> {
        let one = Amplitude::new(1.0, 0.0);
        let zero = Amplitude::new(0.0, 0.0);
        let local = CMatrix::from_rows(vec![zero, one, one, zero]).expect("2x2");
        Self::embed(format!("X_{slot}"), &local, &[slot], slots, false)
    }

    /// Pauli Z on one slot.
    pub fn pauli_z(slot: Slot, slots: &[Slot]) -> Result<Self, QStateError> {
        let one = Amplitude::new(1.0, 0.0);
        let zero = Amplitude::new(0.0, 0.0);
        let local = CMatrix::from_rows(vec![one, zero, zero, -one]).expect("2x2");
        Self::embed(format!("Z_{slot}"), &local, &[slot], slots, false)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn acts_on(&self) -> &[Slot] {
        &self.acts_on
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn is_projector(&self) -> bool {
        self.projector
    }

    /// I − P.
    pub fn complement(&self) -> Result<Self, QStateError> {
        if !self.projector {
            return Err(QStateError::NotProjector {
                name: self.name.clone(),
                deviation: f64::NAN,
            });
        }
        let m = &CMatrix::identity(self.matrix.dim()) - &self.matrix;
        Self::from_matrix(
            format!("(I-{})", self.name),
            self.slots.clone(),
            self.acts_on.clone(),
            m,
            true,
        )
    }

    /// Product of two commuting operators; of two projectors it is again a
    /// projector.
    pub fn joint(&self, other: &ObservableOp, tol: Tolerance) -> Result<Self, QStateError> {
        let norm = commutator_norm(self, other)?;
        if norm > tol.0 {
            return Err(QStateError::NonCommuting {
                a: self.name.clone(),
                b: other.name.clone(),
                norm,
            });
        }
        let mut acts_on = self.acts_on.clone();
        acts_on.extend(other.acts_on.iter().filter(|s| !self.acts_on.contains(s)));
        Self::from_matrix(
            format!("{}·{}", self.name, other.name),
            self.slots.clone(),
            acts_on,
            &self.matrix * &other.matrix,
            self.projector && other.projector,
        )
    }

    /// Whether the matrix factors as (something on `acts_on`) ⊗ identity.
    pub fn is_identity_outside(&self, tol: Tolerance) -> bool {
        let n = self.slots.len();
        let outside_mask = self
            .slots
            .iter()
            .enumerate()
            .filter(|(_, s)| !self.acts_on.contains(s))
            .fold(0usize, |acc, (p, _)| acc | 1 << (n - 1 - p));
        let dim = 1 << n;
        for r in 0..dim {
            for c in 0..dim {
                let v = self.matrix.get(r, c);
                if r & outside_mask != c & outside_mask {
                    if v.norm() > tol.0 {
                        return false;
                    }
                } else {
                    // block must equal the block with outside bits cleared
                    let reference = self.matrix.get(r & !outside_mask, c & !outside_mask);
                    if (v - reference).norm() > tol.0 {
                        return false;
                    }
                }
            }
        }
        true
    }
}

/// Matrix-vector product. The result is generally unnormalized.
pub fn apply(op: &ObservableOp, s: &StateVector) -> Result<RawVector, QStateError> {
    same_layout(&op.slots, &s.slots)?;
    Ok(RawVector {
        slots: s.slots.clone(),
        amps: op.matrix.apply(&s.amps),
    })
}

/// Born-rule probability together with the imaginary part of ⟨s|P|s⟩.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BornProbability {
    pub value: f64,
    pub imag_residual: f64,
}

/// ⟨s|P|s⟩ for a projector `P`.
pub fn born_probability(op: &ObservableOp, s: &StateVector) -> Result<BornProbability, QStateError> {
    if !op.projector {
        return Err(QStateError::NotProjector {
            name: op.name.clone(),
            deviation: f64::NAN,
        });
    }
    let ev = expectation(op, s)?;
    Ok(BornProbability {
        value: ev.re.clamp(0.0, 1.0),
        imag_residual: ev.im,
    })
}

/// ⟨s|M|s⟩ for any operator on the same layout.
pub fn expectation(op: &ObservableOp, s: &StateVector) -> Result<Amplitude, QStateError> {
    let applied = apply(op, s)?;
    Ok(s.amps.iter().zip(&applied.amps).map(|(a, b)| a.conj() * b).sum())
}

/// Projects and renormalizes. Probabilities at or below `tol` are reported as
/// a zero branch.
pub fn collapse(op: &ObservableOp, s: &StateVector, tol: Tolerance) -> Result<(f64, StateVector), QStateError> {
    let p = born_probability(op, s)?.value;
    if p <= tol.0 {
        return Err(QStateError::ZeroProbabilityBranch(p));
    }
    let post = apply(op, s)?.normalize(tol)?;
    Ok((p, post))
}

/// Largest entry magnitude of AB − BA.
pub fn commutator_norm(a: &ObservableOp, b: &ObservableOp) -> Result<f64, QStateError> {
    same_layout(&a.slots, &b.slots)?;
    let ab = &a.matrix * &b.matrix;
    let ba = &b.matrix * &a.matrix;
    Ok((&ab - &ba).max_abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64) -> Amplitude {
        Amplitude::new(re, 0.0)
    }

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn singlet() -> StateVector {
        StateVector::new(
            vec![Slot::One, Slot::Two],
            vec![c(0.), c(FRAC_1_SQRT_2), c(-FRAC_1_SQRT_2), c(0.)],
        )
        .unwrap()
    }

    #[test]
    fn tensor_of_basis_states() {
        let s = tensor(&StateVector::plus(Slot::One), &StateVector::minus(Slot::Two)).unwrap();
        assert_eq!(s.slots(), &[Slot::One, Slot::Two]);
        assert_eq!(s.amps()[1], c(1.));
        assert_eq!(s.amps().iter().filter(|a| a.norm() > 0.0).count(), 1);
    }

    #[test]
    fn tensor_rejects_shared_slot() {
        let err = tensor(&StateVector::plus(Slot::One), &singlet()).unwrap_err();
        assert_eq!(err, QStateError::SlotCollision(Slot::One));
    }

    #[test]
    fn zero_vector_is_not_a_state() {
        let err = StateVector::new(vec![Slot::A], vec![c(0.), c(0.)]).unwrap_err();
        assert!(matches!(err, QStateError::NotNormalized(_)));
        let raw = RawVector::zeros(vec![Slot::A]).unwrap();
        assert_eq!(raw.normalize(tol()).unwrap_err(), QStateError::ZeroVector);
    }

    #[test]
    fn constructor_checks() {
        assert!(matches!(
            StateVector::new(vec![Slot::A], vec![c(1.)]),
            Err(QStateError::Length { .. })
        ));
        assert!(matches!(
            StateVector::new(vec![Slot::A, Slot::A], vec![c(1.), c(0.), c(0.), c(0.)]),
            Err(QStateError::DuplicateSlot(Slot::A))
        ));
        assert!(matches!(
            StateVector::new(vec![Slot::A], vec![c(f64::NAN), c(0.)]),
            Err(QStateError::NonFinite)
        ));
    }

    #[test]
    fn identity_apply_is_exact() {
        let s = singlet();
        let id = ObservableOp::identity(s.slots()).unwrap();
        assert_eq!(apply(&id, &s).unwrap().amps(), s.amps());
        let p = born_probability(&id, &s).unwrap();
        assert!((p.value - 1.0).abs() < 1e-12);
        let (prob, post) = collapse(&id, &s, tol()).unwrap();
        assert!((prob - 1.0).abs() < 1e-12);
        assert!(post.to_raw().max_deviation(&s.to_raw()).unwrap() < 1e-12);
    }

    #[test]
    fn orthogonal_projection_vanishes() {
        let p = ObservableOp::projector_onto("plus", &StateVector::plus(Slot::A), &[Slot::A]).unwrap();
        let out = apply(&p, &StateVector::minus(Slot::A)).unwrap();
        assert_eq!(out.norm_sqr(), 0.0);
        assert!(matches!(
            collapse(&p, &StateVector::minus(Slot::A), tol()),
            Err(QStateError::ZeroProbabilityBranch(_))
        ));
    }

    #[test]
    fn pauli_commutator() {
        let slots = [Slot::One];
        let x = ObservableOp::pauli_x(Slot::One, &slots).unwrap();
        let z = ObservableOp::pauli_z(Slot::One, &slots).unwrap();
        assert!((commutator_norm(&x, &z).unwrap() - 2.0).abs() < 1e-15);
        let id = ObservableOp::identity(&slots).unwrap();
        assert_eq!(commutator_norm(&x, &id).unwrap(), 0.0);
        assert!(matches!(
            born_probability(&x, &StateVector::plus(Slot::One)),
            Err(QStateError::NotProjector { .. })
        ));
    }

    #[test]
    fn commutator_requires_same_layout() {
        let a = ObservableOp::identity(&[Slot::One]).unwrap();
        let b = ObservableOp::identity(&[Slot::Two]).unwrap();
        assert!(matches!(commutator_norm(&a, &b), Err(QStateError::SlotMismatch { .. })));
    }

    #[test]
    fn non_projector_rejected_at_construction() {
        let two = CMatrix::identity(2).scale(c(2.));
        assert!(matches!(
            ObservableOp::embed("2I", &two, &[Slot::A], &[Slot::A], true),
            Err(QStateError::NotProjector { .. })
        ));
        let skew = CMatrix::from_rows(vec![c(0.), c(1.), c(-1.), c(0.)]).unwrap();
        assert!(matches!(
            ObservableOp::embed("skew", &skew, &[Slot::A], &[Slot::A], false),
            Err(QStateError::NotHermitian { .. })
        ));
    }

    #[test]
    fn reduced_fidelities() {
        let s = singlet();
        let f = reduced_projector_fidelity(&s, Slot::One, &StateVector::plus(Slot::One)).unwrap();
        assert!((f - 0.5).abs() < 1e-12);
        let pm = tensor(&StateVector::plus(Slot::One), &StateVector::minus(Slot::Two)).unwrap();
        let f = reduced_projector_fidelity(&pm, Slot::Two, &StateVector::minus(Slot::Two)).unwrap();
        assert!((f - 1.0).abs() < 1e-12);
        assert_eq!(
            reduced_projector_fidelity(&pm, Slot::B, &StateVector::minus(Slot::B)).unwrap_err(),
            QStateError::MissingSlot(Slot::B)
        );
    }

    #[test]
    fn reorder_round_trip_and_embedding() {
        let s = tensor(&StateVector::minus(Slot::Two), &StateVector::plus(Slot::One)).unwrap();
        let r = s.reorder(&[Slot::One, Slot::Two]).unwrap();
        assert_eq!(r.amps()[1], c(1.));
        assert_eq!(r.reorder(&[Slot::Two, Slot::One]).unwrap(), s);

        let z2 = ObservableOp::pauli_z(Slot::Two, &Slot::CANONICAL).unwrap();
        assert!(z2.is_identity_outside(tol()));
        assert!((z2.matrix().trace().re).abs() < 1e-15);
    }

    #[test]
    fn partial_inner_extracts_residual() {
        let s = tensor(&singlet(), &StateVector::plus(Slot::B)).unwrap();
        let r = partial_inner(&StateVector::plus(Slot::One), &s).unwrap();
        assert_eq!(r.slots(), &[Slot::Two, Slot::B]);
        // ⟨+|_1 singlet = |−⟩_2 / √2
        assert!((r.amps()[2] - c(FRAC_1_SQRT_2)).norm() < 1e-15);
        assert!((r.norm_sqr() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn spin_directions_are_normalized() {
        let s = StateVector::spin_up_along(Slot::A, 1.1, -0.3);
        assert!((s.norm_sqr() - 1.0).abs() < 1e-15);
    }
}
