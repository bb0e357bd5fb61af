//! Exact state-vector laboratory for a teleportation-based Hardy argument on
//! two maximally entangled spins with two uncorrelated ancillas.
//!
//! The crate rebuilds the four-qubit state, re-derives its Bell-basis
//! expansions, evaluates the Hardy conditions for every Bell-pair choice and
//! decides, with exact rational certificates, whether a table of measured
//! statistics admits a local hidden-variable model.

pub mod expansion_table;
pub mod lhv;
pub mod matrix;
pub mod observables;
pub mod protocol;
pub mod qstate;
pub mod sampler;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// Default threshold for every floating comparison in the crate.
pub const DEFAULT_TOLERANCE: f64 = 1e-12;

/// Absolute tolerance used for verdicts and zero tests.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance(pub f64);

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance(DEFAULT_TOLERANCE)
    }
}

impl Tolerance {
    pub fn is_zero(self, x: f64) -> bool {
        x.abs() <= self.0
    }

    pub fn eq(self, a: f64, b: f64) -> bool {
        (a - b).abs() <= self.0
    }
}

/// Complex number in report form, `{re, im}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComplexValue {
    pub re: f64,
    pub im: f64,
}

impl From<Complex64> for ComplexValue {
    fn from(z: Complex64) -> Self {
        ComplexValue { re: z.re, im: z.im }
    }
}

impl From<ComplexValue> for Complex64 {
    fn from(z: ComplexValue) -> Self {
        Complex64::new(z.re, z.im)
    }
}
