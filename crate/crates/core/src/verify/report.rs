use serde::{Deserialize, Serialize};

use crate::error::Result;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    /// Too many capped or censored replicates to trust the statistic.
    Aborted,
}

impl Verdict {
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Pass => 0,
            Verdict::Fail => 2,
            Verdict::Aborted => 3,
        }
    }

    pub fn from_bool(pass: bool) -> Self {
        if pass {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub test: String,
    pub params: serde_json::Value,
    #[serde(rename = "N")]
    pub n: u64,
    pub ks: Option<f64>,
    /// DKW half-width at 99%.
    pub bound: Option<f64>,
    pub tolerance: f64,
    pub verdict: Verdict,
    pub seed: u64,
    /// Fraction of replicates that were capped or censored.
    pub cap_fraction: f64,
    /// Wall time; left empty unless the caller asks for it, so that reports
    /// stay byte-identical across runs.
    pub runtime_ms: Option<u64>,
    pub details: serde_json::Value,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_field_names() {
        let r = VerificationReport {
            test: "x".into(),
            params: serde_json::json!({}),
            n: 3,
            ks: Some(0.1),
            bound: None,
            tolerance: 0.2,
            verdict: Verdict::Aborted,
            seed: 9,
            cap_fraction: 0.0,
            runtime_ms: None,
            details: serde_json::Value::Null,
        };
        let v: serde_json::Value = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        assert_eq!(v["N"], 3);
        assert_eq!(v["verdict"], "aborted");
        assert!(v["runtime_ms"].is_null());
        assert_eq!(Verdict::Aborted.exit_code(), 3);
    }
}
