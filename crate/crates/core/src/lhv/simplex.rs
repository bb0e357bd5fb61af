//! Exact feasibility of `A x = b, x ≥ 0` by phase-one simplex over the
//! rationals, with Bland's rule.

use super::rational::Rational;
use num_traits::{Signed, Zero};

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    /// A nonnegative solution of `A x = b`.
    Feasible(Vec<Rational>),
    /// `y` with `Aᵀ y ≥ 0` componentwise and `bᵀ y < 0`.
    Infeasible(Vec<Rational>),
}

/// Decides `A x = b, x ≥ 0`. `a` is row-major with one row per equation.
pub fn feasibility(a: &[Vec<Rational>], b: &[Rational]) -> LpOutcome {
    let m = a.len();
    assert_eq!(m, b.len(), "one right-hand side per row");
    let n = a.first().map_or(0, Vec::len);

    // flip rows so the artificial basis starts feasible
    let signs: Vec<bool> = b.iter().map(|v| v.is_negative()).collect();
    let mut rhs: Vec<Rational> = b.iter().map(|v| v.abs()).collect();
    let mut tab: Vec<Vec<Rational>> = a
        .iter()
        .zip(&signs)
        .enumerate()
        .map(|(i, (row, &neg))| {
            assert_eq!(row.len(), n, "ragged constraint matrix");
            let mut t: Vec<Rational> = row.iter().map(|v| if neg { -v } else { v.clone() }).collect();
            t.extend((0..m).map(|k| {
                if k == i {
                    Rational::from_integer(1.into())
                } else {
                    Rational::zero()
                }
            }));
            t
        })
        .collect();
    let mut basis: Vec<usize> = (n..n + m).collect();
    let cost = |j: usize| -> Rational {
        if j >= n {
            Rational::from_integer(1.into())
        } else {
            Rational::zero()
        }
    };

    loop {
        // reduced costs r_j = c_j − c_Bᵀ T_j
        let entering = (0..n + m).find(|&j| {
            let z: Rational = basis
                .iter()
                .enumerate()
                .filter(|(_, &bj)| bj >= n)
                .map(|(i, _)| tab[i][j].clone())
                .sum();
            (cost(j) - z).is_negative()
        });
        let Some(j) = entering else { break };

        let mut leave: Option<(usize, Rational)> = None;
        for i in 0..m {
            if tab[i][j].is_positive() {
                let ratio = &rhs[i] / &tab[i][j];
                let better = match &leave {
                    None => true,
                    Some((li, best)) => ratio < *best || (ratio == *best && basis[i] < basis[*li]),
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
        }
        // phase one is bounded below, so some row always limits the step
        let (r, _) = leave.expect("phase-one objective is bounded");

        let pivot = tab[r][j].clone();
        for v in tab[r].iter_mut() {
            *v /= &pivot;
        }
        rhs[r] /= &pivot;
        let pivot_row = tab[r].clone();
        let pivot_rhs = rhs[r].clone();
        for i in 0..m {
            if i == r || tab[i][j].is_zero() {
                continue;
            }
            let factor = tab[i][j].clone();
            for (v, p) in tab[i].iter_mut().zip(&pivot_row) {
                *v -= &factor * p;
            }
            rhs[i] -= &factor * &pivot_rhs;
        }
        basis[r] = j;
    }

    let objective: Rational = basis
        .iter()
        .zip(&rhs)
        .filter(|(&bj, _)| bj >= n)
        .map(|(_, v)| v.clone())
        .sum();
    if objective.is_zero() {
        let mut x = vec![Rational::zero(); n];
        for (i, &bj) in basis.iter().enumerate() {
            if bj < n {
                x[bj] = rhs[i].clone();
            }
        }
        LpOutcome::Feasible(x)
    } else {
        // y = c_Bᵀ B⁻¹, read from the artificial columns; the witness is −y
        // mapped back through the row flips
        let y: Vec<Rational> = (0..m)
            .map(|k| {
                let yk: Rational = basis
                    .iter()
                    .enumerate()
                    .filter(|(_, &bj)| bj >= n)
                    .map(|(i, _)| tab[i][n + k].clone())
                    .sum();
                if signs[k] {
                    yk
                } else {
                    -yk
                }
            })
            .collect();
        LpOutcome::Infeasible(y)
    }
}
