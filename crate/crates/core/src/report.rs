//! Serializable result records shared by the norm, symbol and CLI layers.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

/// A computed norm together with how it was obtained.
///
/// `certified_lower <= value <= certified_upper` whenever both bounds are present.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certified_lower: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub certified_upper: Option<f64>,
    pub method: String,
    /// `"exact"` or `"float"`.
    pub mode: String,
    /// Exact rational companion value (e.g. the squared or p-th power norm).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<String>,
    /// Relative tolerance of the float value when it is not exact.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    pub truncation: BTreeMap<String, serde_json::Value>,
}

impl NormReport {
    pub fn new(value: f64, method: impl Into<String>, exact_mode: bool) -> Self {
        Self {
            value,
            certified_lower: None,
            certified_upper: None,
            method: method.into(),
            mode: if exact_mode { "exact" } else { "float" }.to_string(),
            exact: None,
            tolerance: None,
            truncation: BTreeMap::new(),
        }
    }

    pub fn with_param(mut self, key: &str, value: impl Into<serde_json::Value>) -> Self {
        self.truncation.insert(key.to_string(), value.into());
        self
    }

    pub fn with_exact(mut self, exact: impl Into<String>) -> Self {
        self.exact = Some(exact.into());
        self
    }

    pub fn with_tolerance(mut self, tol: f64) -> Self {
        self.tolerance = Some(tol);
        self
    }

    pub fn with_bounds(mut self, lower: Option<f64>, upper: Option<f64>) -> Self {
        self.certified_lower = lower;
        self.certified_upper = upper;
        self
    }

    /// True when the recorded bounds bracket the value.
    pub fn is_consistent(&self) -> bool {
        let lo = self.certified_lower.is_none_or(|l| l <= self.value);
        let hi = self.certified_upper.is_none_or(|u| self.value <= u);
        lo && hi
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounds_consistency() {
        let r = NormReport::new(1.0, "test", true).with_bounds(Some(0.5), Some(2.0));
        assert!(r.is_consistent());
        let r = NormReport::new(3.0, "test", true).with_bounds(Some(0.5), Some(2.0));
        assert!(!r.is_consistent());
    }

    #[test]
    fn serializes_metadata() {
        let r = NormReport::new(1.5, "direct", false).with_param("level", 4);
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"method\":\"direct\""));
        assert!(json.contains("\"level\":4"));
        assert!(!json.contains("certified_lower"));
    }
}
