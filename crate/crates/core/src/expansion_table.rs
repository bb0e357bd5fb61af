//! Parser for hand-entered Bell-basis branch tables.
//!
//! The grammar is described at the top of `data/bell_expansions.txt`, which
//! is also the bundled table ([`BUNDLED`]).

use crate::protocol::{BellIndex, BellPair};
use crate::qstate::{Amplitude, QStateError, RawVector, Slot};
use std::collections::BTreeMap;
use std::fmt;

/// Branch lists of the printed expansions, compiled into the crate.
pub const BUNDLED: &str = include_str!("../data/bell_expansions.txt");

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TableError {
    #[error("line {line}: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("no expansion block for pair {0}")]
    MissingPair(String),
    #[error(transparent)]
    State(#[from] QStateError),
}

/// Number of the form `±num / (den · √2^k)`, k ∈ {0, 1}.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TableScalar {
    pub num: i64,
    pub den: i64,
    pub over_sqrt2: bool,
}

impl TableScalar {
    pub fn value(self) -> f64 {
        let v = self.num as f64 / self.den as f64;
        if self.over_sqrt2 {
            v * std::f64::consts::FRAC_1_SQRT_2
        } else {
            v
        }
    }

    pub fn parse(s: &str) -> Option<TableScalar> {
        let (neg, body) = match s.as_bytes().first()? {
            b'-' => (true, &s[1..]),
            b'+' => (false, &s[1..]),
            _ => (false, s),
        };
        let (num_str, rest) = match body.split_once('/') {
            Some((n, d)) => (n, Some(d)),
            None => (body, None),
        };
        let num: i64 = num_str.parse().ok()?;
        let (den, over_sqrt2) = match rest {
            None => (1, false),
            Some("sqrt2") => (1, true),
            Some(d) => match d.strip_suffix("sqrt2") {
                Some(d) => (d.parse().ok()?, true),
                None => (d.parse().ok()?, false),
            },
        };
        if den <= 0 {
            return None;
        }
        Some(TableScalar {
            num: if neg { -num } else { num },
            den,
            over_sqrt2,
        })
    }
}

impl fmt::Display for TableScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.num)?;
        match (self.den, self.over_sqrt2) {
            (1, false) => Ok(()),
            (1, true) => write!(f, "/sqrt2"),
            (d, true) => write!(f, "/{d}sqrt2"),
            (d, false) => write!(f, "/{d}"),
        }
    }
}

/// One printed bracket line.
#[derive(Debug, Clone, PartialEq)]
pub struct TableBranch {
    pub bell: BellIndex,
    pub negative: bool,
    /// (coefficient, `−` flags per residual slot)
    pub terms: Vec<(TableScalar, Vec<bool>)>,
}

/// Printed expansion over one measured pair.
#[derive(Debug, Clone, PartialEq)]
pub struct TableExpansion {
    pub pair: BellPair,
    pub residual_slots: Vec<Slot>,
    pub overall: TableScalar,
    pub branches: BTreeMap<BellIndex, TableBranch>,
}

impl TableExpansion {
    /// The printed vector `overall · sign · Σ terms` on the residual slots;
    /// a branch absent from the table is the zero vector.
    pub fn branch_vector(&self, bell: BellIndex) -> Result<RawVector, QStateError> {
        let n = self.residual_slots.len();
        let mut amps = vec![Amplitude::new(0.0, 0.0); 1 << n];
        if let Some(branch) = self.branches.get(&bell) {
            let sign = if branch.negative { -1.0 } else { 1.0 };
            for (scalar, ket) in &branch.terms {
                let index = ket
                    .iter()
                    .enumerate()
                    .filter(|(_, m)| **m)
                    .fold(0, |acc, (k, _)| acc | 1 << (n - 1 - k));
                amps[index] += Amplitude::new(sign * self.overall.value() * scalar.value(), 0.0);
            }
        }
        RawVector::new(self.residual_slots.clone(), amps)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionTable {
    pub expansions: Vec<TableExpansion>,
}

impl ExpansionTable {
    pub fn bundled() -> Self {
        Self::parse(BUNDLED).expect("bundled expansion table parses")
    }

    pub fn get(&self, pair: BellPair) -> Result<&TableExpansion, TableError> {
        self.expansions
            .iter()
            .find(|e| e.pair == pair)
            .ok_or_else(|| TableError::MissingPair(pair.label().to_string()))
    }

    pub fn parse(text: &str) -> Result<Self, TableError> {
        let mut expansions: Vec<TableExpansion> = Vec::new();
        for (i, raw_line) in text.lines().enumerate() {
            let line_no = i + 1;
            let err = |msg: String| TableError::Syntax { line: line_no, msg };
            let line = raw_line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut words = line.split_whitespace();
            let directive = words.next().unwrap_or_default();
            let args: Vec<&str> = words.collect();
            if directive == "expansion" {
                let [label] = args[..] else {
                    return Err(err("expected `expansion <pair>`".into()));
                };
                let pair = BellPair::parse(label).ok_or_else(|| err(format!("unknown pair `{label}`")))?;
                expansions.push(TableExpansion {
                    pair,
                    residual_slots: pair.remaining().to_vec(),
                    overall: TableScalar {
                        num: 1,
                        den: 1,
                        over_sqrt2: false,
                    },
                    branches: BTreeMap::new(),
                });
                continue;
            }
            let current = expansions
                .last_mut()
                .ok_or_else(|| err(format!("`{directive}` before any `expansion`")))?;
            match directive {
                "residual-slots" => {
                    let slots = args
                        .iter()
                        .map(|a| Slot::parse(a).ok_or_else(|| err(format!("unknown slot `{a}`"))))
                        .collect::<Result<Vec<_>, _>>()?;
                    let mut sorted = slots.clone();
                    sorted.sort();
                    let mut expected = current.pair.remaining().to_vec();
                    expected.sort();
                    if sorted != expected {
                        return Err(err("residual slots must be the two unmeasured slots".into()));
                    }
                    current.residual_slots = slots;
                }
                "overall" => {
                    let [s] = args[..] else {
                        return Err(err("expected `overall <scalar>`".into()));
                    };
                    current.overall = TableScalar::parse(s).ok_or_else(|| err(format!("bad scalar `{s}`")))?;
                }
                "branch" => {
                    if args.len() < 3 {
                        return Err(err("expected `branch <bell> <sign> <term>...`".into()));
                    }
                    let bell =
                        BellIndex::parse(args[0]).ok_or_else(|| err(format!("unknown Bell label `{}`", args[0])))?;
                    let negative = match args[1] {
                        "+" => false,
                        "-" => true,
                        other => return Err(err(format!("sign must be + or -, got `{other}`"))),
                    };
                    let n = current.residual_slots.len();
                    let terms = args[2..]
                        .iter()
                        .map(|t| parse_term(t, n).ok_or_else(|| err(format!("bad term `{t}`"))))
                        .collect::<Result<Vec<_>, _>>()?;
                    if current.branches.contains_key(&bell) {
                        return Err(err(format!("duplicate branch `{}`", args[0])));
                    }
                    current.branches.insert(bell, TableBranch { bell, negative, terms });
                }
                other => return Err(err(format!("unknown directive `{other}`"))),
            }
        }
        Ok(Self { expansions })
    }
}

fn parse_term(t: &str, n: usize) -> Option<(TableScalar, Vec<bool>)> {
    let (scalar, ket) = t.split_once('|')?;
    let ket = ket.strip_suffix('>')?;
    let flags = ket
        .chars()
        .map(|c| match c {
            '+' => Some(false),
            '-' => Some(true),
            _ => None,
        })
        .collect::<Option<Vec<_>>>()?;
    (flags.len() == n).then_some((TableScalar::parse(scalar)?, flags))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalars() {
        let cases = [
            ("1", 1.0),
            ("-1/2", -0.5),
            ("1/sqrt2", std::f64::consts::FRAC_1_SQRT_2),
            ("-1/2sqrt2", -0.5 * std::f64::consts::FRAC_1_SQRT_2),
            ("+3/4", 0.75),
        ];
        for (s, v) in cases {
            let parsed = TableScalar::parse(s).unwrap();
            assert!((parsed.value() - v).abs() < 1e-15, "{s}");
            assert_eq!(TableScalar::parse(&parsed.to_string()), Some(parsed));
        }
        for bad in ["", "x", "1/0", "1/2sqrt3", "1//2"] {
            assert_eq!(TableScalar::parse(bad), None, "{bad}");
        }
    }

    #[test]
    fn bundled_table_parses() {
        let t = ExpansionTable::bundled();
        assert_eq!(t.expansions.len(), 2);
        let a1 = t.get(BellPair::A1).unwrap();
        assert_eq!(a1.residual_slots, vec![Slot::Two, Slot::B]);
        assert_eq!(a1.branches.len(), 4);
        let v = a1.branch_vector(BellIndex::PsiMinus).unwrap();
        // -1/2 |+>_2 |B>
        assert!((v.norm_sqr() - 0.25).abs() < 1e-15);
        assert!((v.amps()[0].re + 0.5 * std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn syntax_errors_carry_line_numbers() {
        let text = "expansion A1\nbranch psi- * 1|++>\n";
        assert!(matches!(
            ExpansionTable::parse(text),
            Err(TableError::Syntax { line: 2, .. })
        ));
        let text = "overall 1\n";
        assert!(matches!(
            ExpansionTable::parse(text),
            Err(TableError::Syntax { line: 1, .. })
        ));
        let text = "expansion A1\nbranch psi- + 1|+++>\n";
        assert!(ExpansionTable::parse(text).is_err());
        let text = "expansion A1\nresidual-slots A B\n";
        assert!(ExpansionTable::parse(text).is_err());
        let text = "expansion XY\n";
        assert!(ExpansionTable::parse(text).is_err());
    }

    #[test]
    fn missing_branch_is_zero_vector() {
        let t = ExpansionTable::parse("expansion 2B\noverall 1\nbranch psi- + 1|++>\n").unwrap();
        let e = t.get(BellPair::TwoB).unwrap();
        assert_eq!(e.branch_vector(BellIndex::PhiPlus).unwrap().norm_sqr(), 0.0);
        assert!(matches!(t.get(BellPair::A1), Err(TableError::MissingPair(_))));
    }
}
