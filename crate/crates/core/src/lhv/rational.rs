//! Exact rationals, their `{num, den}` JSON form, and float rationalization.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

pub type Rational = BigRational;

/// Largest denominator accepted when converting floats.
pub const MAX_DENOMINATOR: i64 = 1 << 20;

pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum IntRepr {
    Small(i64),
    Big(String),
}

impl IntRepr {
    fn from_big(x: &BigInt) -> Self {
        match x.to_i64() {
            Some(v) => IntRepr::Small(v),
            None => IntRepr::Big(x.to_string()),
        }
    }

    fn into_big<E: serde::de::Error>(self) -> Result<BigInt, E> {
        match self {
            IntRepr::Small(v) => Ok(BigInt::from(v)),
            IntRepr::Big(s) => s.parse().map_err(|_| E::custom(format!("bad integer `{s}`"))),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct RationalRepr {
    num: IntRepr,
    den: IntRepr,
}

/// `#[serde(with = "...")]` adaptor: `{num, den}` in lowest terms. Integers
/// beyond 64 bits are written as decimal strings.
pub mod serde_rational {
    use super::*;

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        RationalRepr {
            num: IntRepr::from_big(r.numer()),
            den: IntRepr::from_big(r.denom()),
        }
        .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let repr = RationalRepr::deserialize(d)?;
        let num = repr.num.into_big()?;
        let den: BigInt = repr.den.into_big()?;
        if den.is_zero() {
            return Err(D::Error::custom("zero denominator"));
        }
        Ok(Rational::new(num, den))
    }
}

/// Same as [`serde_rational`] for `Option<Rational>`, `null` for `None`.
pub mod serde_opt_rational {
    use super::*;

    #[derive(Serialize)]
    struct Wrap<'a>(#[serde(with = "serde_rational")] &'a Rational);

    #[derive(Deserialize)]
    struct Own(#[serde(with = "serde_rational")] Rational);

    pub fn serialize<S: Serializer>(r: &Option<Rational>, s: S) -> Result<S::Ok, S::Error> {
        r.as_ref().map(Wrap).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Rational>, D::Error> {
        Ok(Option::<Own>::deserialize(d)?.map(|o| o.0))
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{value} has no rational within {tolerance:e} with denominator at most {max_den}")]
pub struct RationalizeError {
    pub value: f64,
    pub tolerance: f64,
    pub max_den: i64,
}

/// Closest fraction with denominator ≤ `max_den`, by continued fractions.
/// Fails unless that fraction is within `tol` of `x`.
pub fn rationalize(x: f64, tol: f64, max_den: i64) -> Result<Rational, RationalizeError> {
    let fail = || RationalizeError {
        value: x,
        tolerance: tol,
        max_den,
    };
    if !x.is_finite() {
        return Err(fail());
    }
    let exact = Rational::from_float(x).ok_or_else(fail)?;
    let bound = BigInt::from(max_den);
    // convergents h/k of the exact binary value
    let (mut h_prev, mut h) = (BigInt::zero(), BigInt::one());
    let (mut k_prev, mut k) = (BigInt::one(), BigInt::zero());
    let mut rest = exact.clone();
    let mut best = Rational::from_integer(exact.floor().to_integer());
    loop {
        let a = rest.floor().to_integer();
        let h_next = &a * &h + &h_prev;
        let k_next = &a * &k + &k_prev;
        if k_next > bound {
            // best semiconvergent with k ≤ bound
            let m = (&bound - &k_prev) / &k;
            if m.is_positive() {
                let semi = Rational::new(&m * &h + &h_prev, &m * &k + &k_prev);
                if (&semi - &exact).abs() < (&best - &exact).abs() {
                    best = semi;
                }
            }
            break;
        }
        h_prev = std::mem::replace(&mut h, h_next);
        k_prev = std::mem::replace(&mut k, k_next);
        best = Rational::new(h.clone(), k.clone());
        let frac = &rest - Rational::from_integer(a);
        if frac.is_zero() {
            break;
        }
        rest = frac.recip();
    }
    let err = (&best - &exact).abs().to_f64().unwrap_or(f64::INFINITY);
    if err <= tol {
        Ok(best)
    } else {
        Err(fail())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_simple_fractions() {
        for (num, den) in [(1, 16), (3, 8), (0, 1), (1, 1), (-5, 7), (9, 16), (1, 3)] {
            let x = num as f64 / den as f64;
            assert_eq!(
                rationalize(x, 1e-12, MAX_DENOMINATOR).unwrap(),
                rat(num, den),
                "{num}/{den}"
            );
        }
        // float noise from a state-vector computation
        assert_eq!(rationalize(0.0625 + 3e-17, 1e-12, MAX_DENOMINATOR).unwrap(), rat(1, 16));
        assert_eq!(
            rationalize(0.49999999999999994, 1e-12, MAX_DENOMINATOR).unwrap(),
            rat(1, 2)
        );
    }

    #[test]
    fn rejects_values_without_small_denominator() {
        // 470832/665857 is within 1e-12 of 1/√2, but not within 1e-14
        assert!(rationalize(std::f64::consts::FRAC_1_SQRT_2, 1e-12, MAX_DENOMINATOR).is_ok());
        assert!(rationalize(std::f64::consts::FRAC_1_SQRT_2, 1e-14, MAX_DENOMINATOR).is_err());
        assert!(rationalize(f64::NAN, 1e-12, MAX_DENOMINATOR).is_err());
        // exactly representable but denominator too large
        assert!(rationalize(1.0 / (1u64 << 30) as f64, 1e-12, MAX_DENOMINATOR).is_err());
    }

    #[test]
    fn json_form() {
        #[derive(Serialize, Deserialize, PartialEq, Debug)]
        struct W(#[serde(with = "serde_rational")] Rational);
        let json = serde_json::to_string(&W(rat(-3, 12))).unwrap();
        assert_eq!(json, r#"{"num":-1,"den":4}"#);
        assert_eq!(serde_json::from_str::<W>(&json).unwrap(), W(rat(-1, 4)));
        let big = Rational::new(BigInt::from(1u8) << 80usize, BigInt::from(3));
        let json = serde_json::to_string(&W(big.clone())).unwrap();
        assert_eq!(serde_json::from_str::<W>(&json).unwrap(), W(big));
        assert!(serde_json::from_str::<W>(r#"{"num":1,"den":0}"#).is_err());
    }
}
