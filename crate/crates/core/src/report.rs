//! Named numerical checks with both sides recorded.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// The outcome of comparing two computed quantities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckReport {
    pub check: String,
    pub params: BTreeMap<String, String>,
    pub lhs: f64,
    pub rhs: f64,
    pub ratio: f64,
    pub pass: bool,
    /// False for bounds that are only reported, never enforced.
    #[serde(default = "enforced")]
    pub asserted: bool,
}

fn enforced() -> bool {
    true
}

fn ratio(lhs: f64, rhs: f64) -> f64 {
    if rhs != 0.0 {
        lhs / rhs
    } else if lhs == 0.0 {
        1.0
    } else {
        f64::INFINITY
    }
}

impl CheckReport {
    /// Passes when lhs <= rhs + tol.
    pub fn at_most(check: &str, params: BTreeMap<String, String>, lhs: f64, rhs: f64, tol: f64) -> Self {
        CheckReport {
            check: check.to_string(),
            params,
            lhs,
            rhs,
            ratio: ratio(lhs, rhs),
            pass: lhs <= rhs + tol,
            asserted: true,
        }
    }

    /// Passes when |lhs - rhs| <= tol.
    pub fn equal(check: &str, params: BTreeMap<String, String>, lhs: f64, rhs: f64, tol: f64) -> Self {
        CheckReport {
            check: check.to_string(),
            params,
            lhs,
            rhs,
            ratio: ratio(lhs, rhs),
            pass: (lhs - rhs).abs() <= tol,
            asserted: true,
        }
    }

    /// A bound reported for information only.
    pub fn informational(mut self) -> Self {
        self.asserted = false;
        self
    }

    /// False only for an enforced check that did not hold.
    pub fn ok(&self) -> bool {
        self.pass || !self.asserted
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("reports always serialize")
    }
}

/// Builds a parameter map from key/value pairs.
pub fn params<K: ToString, V: ToString>(pairs: impl IntoIterator<Item = (K, V)>) -> BTreeMap<String, String> {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
}
