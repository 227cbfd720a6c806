//! The declarative study design: what to estimate, to what precision, and how
//! the sample is split.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::rational::Rational;
use crate::sizing::MetricTarget;
use crate::split::SplitSpec;
use crate::stats::ConfidenceSpec;
use crate::Result;

/// Free-text identification carried through to reports.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct StudyMetadata {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub title: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub notes: Option<String>,
}

/// Full declarative input for a sizing run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudyDesign {
    pub metrics: Vec<MetricTarget>,
    pub confidence: ConfidenceSpec,
    pub split: SplitSpec,
    /// Expected attrition; the final total is inflated by 1/(1-dropout).
    pub dropout: Rational,
    #[serde(default)]
    pub metadata: StudyMetadata,
}

impl StudyDesign {
    /// Check every design invariant, reporting the first violation with its
    /// field path (e.g. `metrics[0].prevalence`).
    pub fn validate(&self) -> Result<()> {
        if self.metrics.is_empty() {
            return Err(Error::config("metrics", "at least one metric is required"));
        }
        for (i, m) in self.metrics.iter().enumerate() {
            if let Err(reason) = m.check() {
                let field = if reason.contains("prevalence") {
                    format!("metrics[{i}].prevalence")
                } else if reason.contains("precision") {
                    format!("metrics[{i}].precision")
                } else {
                    format!("metrics[{i}].anticipated")
                };
                return Err(Error::config(field, reason));
            }
        }
        if let Err(reason) = self.split.check() {
            return Err(Error::config("split", reason));
        }
        if self.dropout < Rational::zero() || self.dropout >= Rational::one() {
            return Err(Error::config(
                "dropout",
                format!("dropout must lie in [0,1), got {}", self.dropout),
            ));
        }
        Ok(())
    }
}
