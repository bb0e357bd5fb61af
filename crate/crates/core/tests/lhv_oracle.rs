//! Local-hidden-variable feasibility against an independent oracle.
//!
//! For two parties with two binary observables each, a complete table has a
//! local model iff it is no-signalling and satisfies the eight CHSH
//! inequalities (Fine's theorem). That check uses no linear programming, so
//! it independently cross-examines the simplex verdicts.

use hardylab_core::lhv::{
    self, completed_claims_table, feasibility, hardy_facts_table, rat, replay_deductions, validate_certificate,
    CellRef, ClaimsCompletion, DeterministicAssignment, LhvCertificate, Rational, RationalTable, Verdict, Witness,
};
use hardylab_core::observables::{Context, HardyClaimSet, Interpretation, Observable};
use hardylab_core::protocol::BellIndex;
use hardylab_core::Tolerance;
use num_traits::{One, Signed, Zero};
use proptest::prelude::*;

fn cell(t: &RationalTable, c: Context, a: u8, b: u8) -> Rational {
    t.get(CellRef::new(c, a, b)).cloned().expect("complete table")
}

/// Fine's theorem: no-signalling + |CHSH| ≤ 2 for all four sign placements.
fn fine_local(t: &RationalTable) -> bool {
    let marginal = |c: Context, alice_side: bool, v: u8| -> Rational {
        (0..2u8)
            .map(|k| if alice_side { cell(t, c, v, k) } else { cell(t, c, k, v) })
            .sum()
    };
    let same = |c1: Context, c2: Context, alice_side: bool| marginal(c1, alice_side, 1) == marginal(c2, alice_side, 1);
    let no_signalling = same(Context::D1D2, Context::D1U2, true)
        && same(Context::U1D2, Context::U1U2, true)
        && same(Context::D1D2, Context::U1D2, false)
        && same(Context::D1U2, Context::U1U2, false);
    if !no_signalling {
        return false;
    }
    let corr: Vec<Rational> = Context::ALL
        .iter()
        .map(|&c| cell(t, c, 0, 0) + cell(t, c, 1, 1) - cell(t, c, 0, 1) - cell(t, c, 1, 0))
        .collect();
    let total: Rational = corr.iter().cloned().sum();
    let two = rat(2, 1);
    corr.iter().all(|e| {
        let s = &total - e * rat(2, 1);
        s.abs() <= two
    })
}

/// Alice's setting bit (0 = D₁, 1 = U₁) and Bob's (0 = D₂, 1 = U₂).
fn settings(c: Context) -> (u8, u8) {
    match c {
        Context::D1D2 => (0, 0),
        Context::D1U2 => (0, 1),
        Context::U1D2 => (1, 0),
        Context::U1U2 => (1, 1),
    }
}

/// a ⊕ b = xy ⊕ αx ⊕ βy ⊕ γ, uniformly over the two allowed outcomes.
fn pr_box(alpha: u8, beta: u8, gamma: u8) -> impl Fn(Context, u8, u8) -> Rational {
    move |c, a, b| {
        let (x, y) = settings(c);
        if a ^ b == (x & y) ^ (alpha & x) ^ (beta & y) ^ gamma {
            rat(1, 2)
        } else {
            Rational::zero()
        }
    }
}

/// Table mixing deterministic assignments and PR boxes with integer weights.
fn mixture(det: &[u32], boxes: &[u32]) -> RationalTable {
    let total: u32 = det.iter().chain(boxes).sum();
    let mut t = RationalTable::new();
    for cref in CellRef::all() {
        let mut p = Rational::zero();
        for (lambda, &w) in DeterministicAssignment::all().zip(det) {
            if cref.contains(lambda) {
                p += rat(w as i64, 1);
            }
        }
        for (k, &w) in boxes.iter().enumerate() {
            let k = k as u8;
            p += pr_box(k >> 2 & 1, k >> 1 & 1, k & 1)(cref.context, cref.alice, cref.bob) * rat(w as i64, 1);
        }
        t.set(cref, p / rat(total as i64, 1));
    }
    t
}

fn verdict(t: &RationalTable) -> LhvCertificate {
    let cert = feasibility(t).expect("valid table");
    validate_certificate(t, &cert).expect("certificate validates");
    cert
}

#[test]
fn oracle_sanity() {
    assert!(!fine_local(&mixture(&[0; 16], &[1, 0, 0, 0, 0, 0, 0, 0])));
    let mut det = [0; 16];
    det[5] = 1;
    assert!(fine_local(&mixture(&det, &[0; 8])));
    // PR box at weight 1/2 with white noise sits exactly on the CHSH bound
    assert!(fine_local(&mixture(&[1; 16], &[16, 0, 0, 0, 0, 0, 0, 0])));
    assert!(!fine_local(&mixture(&[1; 16], &[17, 0, 0, 0, 0, 0, 0, 0])));
}

#[test]
fn quantum_tables_agree_with_oracle() {
    let tol = Tolerance::default();
    for interp in Interpretation::ALL {
        for i in BellIndex::ALL {
            for j in BellIndex::ALL {
                let q = hardylab_core::observables::quantum_probability_table(i, j, interp, tol).unwrap();
                let t = RationalTable::from_probabilities(&q, tol).unwrap();
                let cert = verdict(&t);
                assert_eq!(cert.verdict == Verdict::Feasible, fine_local(&t), "{i} {j} {interp}");
            }
        }
    }
}

#[test]
fn claimed_completion_is_nonlocal() {
    let t = completed_claims_table(&ClaimsCompletion::paper()).unwrap();
    assert!(!fine_local(&t));
    let cert = verdict(&t);
    assert_eq!(cert.verdict, Verdict::Infeasible);
    let Some(Witness::DeductionChain { steps, functional }) = &cert.witness else {
        panic!("expected deduction chain, got {:?}", cert.witness)
    };
    assert_eq!(steps.len(), 4);
    assert_eq!(functional.on_table(&t), Some(rat(-1, 16)));
}

fn arb_det() -> impl Strategy<Value = Vec<u32>> {
    prop::collection::vec(0u32..12, 16).prop_filter("nonzero", |w| w.iter().any(|&x| x > 0))
}

proptest! {
    #![proptest_config(ProptestConfig { failure_persistence: None, ..ProptestConfig::with_cases(64) })]

    #[test]
    fn simplex_agrees_with_fine(det in arb_det(), boxes in prop::collection::vec(0u32..6, 8)) {
        let t = mixture(&det, &boxes);
        let cert = verdict(&t);
        prop_assert_eq!(cert.verdict == Verdict::Feasible, fine_local(&t));
    }

    #[test]
    fn deterministic_mixtures_are_feasible_and_exact(det in arb_det()) {
        let t = mixture(&det, &[0; 8]);
        let cert = verdict(&t);
        prop_assert_eq!(cert.verdict, Verdict::Feasible);
        let model = cert.model.clone().unwrap();
        prop_assert_eq!(model.total(), Rational::one());
        for cref in CellRef::all() {
            prop_assert_eq!(&model.probability(cref), t.get(cref).unwrap());
        }
        // move half of one weight onto a different assignment
        let mut bad = cert.clone();
        let m = bad.model.as_mut().unwrap();
        let half = &m.weights[0].weight / rat(2, 1);
        m.weights[0].weight -= &half;
        let donor = m.weights[0].assignment;
        let target = DeterministicAssignment::all().find(|a| *a != donor).unwrap();
        match m.weights.iter_mut().find(|w| w.assignment == target) {
            Some(w) => w.weight += half,
            None => m.weights.push(lhv::WeightEntry { assignment: target, weight: half }),
        }
        prop_assert!(validate_certificate(&t, &bad).is_err());
    }

    #[test]
    fn relabelling_preserves_verdict(det in arb_det(), boxes in prop::collection::vec(0u32..6, 8), o in 0usize..4) {
        let o = [Observable::D1, Observable::D2, Observable::U1, Observable::U2][o];
        let t = mixture(&det, &boxes);
        let r = t.relabel(o);
        prop_assert_eq!(verdict(&t).verdict, verdict(&r).verdict);
        prop_assert_eq!(r.relabel(o), t);
    }

    #[test]
    fn hardy_facts_infeasible_for_every_positive_p(num in 1i64..1000, extra in 0i64..1000) {
        let p = rat(num, num + extra);
        let t = hardy_facts_table(p);
        let cert = verdict(&t);
        prop_assert_eq!(cert.verdict, Verdict::Infeasible);
        let is_chain = matches!(cert.witness, Some(Witness::DeductionChain { .. }));
        prop_assert!(is_chain);
    }

    #[test]
    fn claimed_pattern_replays_to_contradiction(num in 1u32..1000, den in 1u32..1000) {
        let p = num.min(den) as f64 / num.max(den) as f64;
        let claims = HardyClaimSet { p_joint: p, c_d1u2: 1.0, c_d2u1: 1.0, p_u1u2: 0.0 };
        prop_assert!(replay_deductions(&claims, Tolerance::default()).contradiction());
    }
}

#[test]
fn product_statistics_have_product_model() {
    // independent local coins: P(a, b) = P(a) P(b) in every context
    let marg = |o: Observable| match o {
        Observable::D1 => rat(1, 4),
        Observable::D2 => rat(1, 3),
        Observable::U1 => rat(1, 2),
        Observable::U2 => rat(5, 7),
    };
    let p = |o: Observable, v: u8| if v == 1 { marg(o) } else { Rational::one() - marg(o) };
    let mut t = RationalTable::new();
    for c in CellRef::all() {
        t.set(c, p(c.context.alice(), c.alice) * p(c.context.bob(), c.bob));
    }
    assert!(fine_local(&t));
    let cert = verdict(&t);
    assert_eq!(cert.verdict, Verdict::Feasible);
    let model = cert.model.unwrap();
    for c in CellRef::all() {
        assert_eq!(&model.probability(c), t.get(c).unwrap());
    }
}
