//! Hypothesis ledgers and JSON building blocks for structured reports.
//!
//! Every higher-level procedure returns, alongside its mathematical payload,
//! a ledger recording which preconditions were verified by computation,
//! which were accepted on assertion, and which failed. The JSON helpers
//! render big integers exactly (as arbitrary-precision numbers, never
//! floats) so reports round-trip without loss.

use crate::lattice::LatticeBasis;
use crate::matrix::IntMatrix;
use num_bigint::BigInt;
use serde::Serialize;
use serde_json::{json, Value};
use std::fmt;
use std::str::FromStr;

/// How a hypothesis was discharged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    /// Established by computation in this run.
    Verified,
    /// Accepted from a caller-supplied assertion.
    Asserted,
    /// Checked and found to be false.
    Failed,
}

impl fmt::Display for CheckStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            CheckStatus::Verified => "verified",
            CheckStatus::Asserted => "asserted",
            CheckStatus::Failed => "failed",
        };
        f.write_str(s)
    }
}

/// One named hypothesis with its status and optional detail.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LedgerEntry {
    pub name: String,
    pub status: CheckStatus,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl LedgerEntry {
    /// A hypothesis established by computation.
    pub fn verified(name: impl Into<String>) -> Self {
        LedgerEntry { name: name.into(), status: CheckStatus::Verified, detail: None }
    }

    /// A hypothesis accepted on assertion.
    pub fn asserted(name: impl Into<String>) -> Self {
        LedgerEntry { name: name.into(), status: CheckStatus::Asserted, detail: None }
    }

    /// A hypothesis that was checked and failed.
    pub fn failed(name: impl Into<String>, detail: impl Into<String>) -> Self {
        LedgerEntry {
            name: name.into(),
            status: CheckStatus::Failed,
            detail: Some(detail.into()),
        }
    }

    /// Attaches explanatory detail.
    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }
}

/// An ordered list of hypothesis checks.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Ledger {
    entries: Vec<LedgerEntry>,
}

impl Ledger {
    /// An empty ledger.
    pub fn new() -> Self {
        Ledger::default()
    }

    /// Appends an entry.
    pub fn push(&mut self, entry: LedgerEntry) {
        self.entries.push(entry);
    }

    /// The recorded entries in order.
    pub fn entries(&self) -> &[LedgerEntry] {
        &self.entries
    }

    /// Whether no entry failed.
    pub fn all_ok(&self) -> bool {
        self.entries.iter().all(|e| e.status != CheckStatus::Failed)
    }

    /// The first failed entry, if any.
    pub fn first_failure(&self) -> Option<&LedgerEntry> {
        self.entries.iter().find(|e| e.status == CheckStatus::Failed)
    }
}

/// Renders a big integer as an exact JSON number.
pub fn bigint_json(n: &BigInt) -> Value {
    let num = serde_json::Number::from_str(&n.to_string())
        .expect("integer strings are valid JSON numbers");
    Value::Number(num)
}

/// Renders an integer vector as a JSON array of exact numbers.
pub fn vec_json(v: &[BigInt]) -> Value {
    Value::Array(v.iter().map(bigint_json).collect())
}

/// Renders an integer matrix as row-major nested JSON arrays.
pub fn matrix_json(m: &IntMatrix) -> Value {
    Value::Array(m.to_rows().iter().map(|row| vec_json(row)).collect())
}

/// Renders a lattice as its ambient rank plus a row basis.
pub fn lattice_json(l: &LatticeBasis) -> Value {
    json!({
        "ambient_rank": l.ambient_rank(),
        "rank": l.rank(),
        "basis": matrix_json(l.basis_matrix()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ledger_tracks_failures() {
        let mut ledger = Ledger::new();
        ledger.push(LedgerEntry::verified("matrix_unimodular"));
        ledger.push(LedgerEntry::asserted("transcendence_degree_one"));
        assert!(ledger.all_ok());
        assert!(ledger.first_failure().is_none());
        ledger.push(LedgerEntry::failed("units_land_in_base", "nonzero exponent"));
        assert!(!ledger.all_ok());
        assert_eq!(ledger.first_failure().unwrap().name, "units_land_in_base");
    }

    #[test]
    fn big_integers_serialize_exactly() {
        let huge = BigInt::from_str("123456789012345678901234567890123456789").unwrap();
        let value = bigint_json(&huge);
        assert_eq!(value.to_string(), "123456789012345678901234567890123456789");
    }

    #[test]
    fn matrices_and_lattices_serialize_as_nested_arrays() {
        let m = IntMatrix::from_i64(&[&[1, 2], &[0, -3]]);
        assert_eq!(matrix_json(&m).to_string(), "[[1,2],[0,-3]]");
        let l = LatticeBasis::from_rows(2, vec![vec![BigInt::from(1), BigInt::from(-1)]]);
        let v = lattice_json(&l);
        assert_eq!(v["ambient_rank"], 2);
        assert_eq!(v["rank"], 1);
        assert_eq!(v["basis"].to_string(), "[[1,-1]]");
    }

    #[test]
    fn ledger_serializes_transparently() {
        let mut ledger = Ledger::new();
        ledger.push(LedgerEntry::verified("one").with_detail("ok"));
        let v = serde_json::to_value(&ledger).unwrap();
        assert_eq!(v[0]["name"], "one");
        assert_eq!(v[0]["status"], "verified");
        assert_eq!(v[0]["detail"], "ok");
    }
}
