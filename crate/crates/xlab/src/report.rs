//! Pass/fail records shared by the experiment reports.

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Comparison {
    AtMost,
    AtLeast,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    /// Non-finite values serialize as `null` and read back as NaN.
    #[serde(deserialize_with = "nullable_f64")]
    pub value: f64,
    pub threshold: f64,
    pub comparison: Comparison,
    pub passed: bool,
}

fn nullable_f64<'de, D: serde::Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
    Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self { name: name.into(), value, threshold, comparison: Comparison::AtMost, passed: value <= threshold }
    }

    pub fn at_least(name: impl Into<String>, value: f64, threshold: f64) -> Self {
        Self { name: name.into(), value, threshold, comparison: Comparison::AtLeast, passed: value >= threshold }
    }

    pub fn line(&self) -> String {
        let op = match self.comparison {
            Comparison::AtMost => "<=",
            Comparison::AtLeast => ">=",
        };
        let tag = if self.passed { "ok" } else { "FAILED" };
        format!("{tag}: {} = {:.6e} ({op} {:.6e})", self.name, self.value, self.threshold)
    }
}

pub fn all_passed(checks: &[Check]) -> bool {
    checks.iter().all(|c| c.passed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nan_never_passes() {
        assert!(!Check::at_most("x", f64::NAN, 1.0).passed);
        assert!(!Check::at_least("x", f64::NAN, 1.0).passed);
        assert!(Check::at_most("x", 1.0, 1.0).passed);
        assert!(Check::at_least("x", 2.0, 1.0).line().starts_with("ok"));
        let back: Check = serde_json::from_str(&serde_json::to_string(&Check::at_least("x", f64::NAN, 1.0)).unwrap()).unwrap();
        assert!(back.value.is_nan() && !back.passed);
    }
}
