//! Study-design config files.
//!
//! The schema is a small TOML document; proportions may be written as
//! decimals, percents, or fractions and are parsed exactly:
//!
//! ```toml
//! confidence = 0.95
//! dropout = "10%"          # optional, default 0
//!
//! [metadata]               # optional
//! title = "pilot study"
//!
//! [[metrics]]
//! kind = "sensitivity"     # sensitivity | specificity | overall_proportion
//!                          # | class_recall | mean_outcome
//! anticipated = "85%"
//! prevalence = "0.20"      # required for sensitivity/specificity/class_recall
//! precision = 0.05
//! label = "sensitivity"    # optional
//!
//! [split]
//! ratio = "3"              # or: test_fraction = "1/4"
//! validation_fraction = "1/3"   # optional
//! ```
//!
//! Invariant violations are reported with the offending field path, e.g.
//! `metrics[0].prevalence`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::design::{StudyDesign, StudyMetadata};
use crate::error::Error;
use crate::rational::Rational;
use crate::sizing::{MetricKind, MetricTarget};
use crate::split::SplitSpec;
use crate::stats::ConfidenceSpec;
use crate::Result;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    metrics: Vec<RawMetric>,
    confidence: f64,
    split: RawSplit,
    dropout: Option<Rational>,
    metadata: Option<StudyMetadata>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMetric {
    kind: String,
    anticipated: Rational,
    prevalence: Option<Rational>,
    precision: Rational,
    label: Option<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSplit {
    ratio: Option<Rational>,
    test_fraction: Option<Rational>,
    validation_fraction: Option<Rational>,
}

fn parse_kind(s: &str, path: &str) -> Result<MetricKind> {
    match s {
        "sensitivity" => Ok(MetricKind::Sensitivity),
        "specificity" => Ok(MetricKind::Specificity),
        "overall_proportion" => Ok(MetricKind::OverallProportion),
        "class_recall" => Ok(MetricKind::ClassRecall),
        "mean_outcome" => Ok(MetricKind::MeanOutcome),
        other => Err(Error::config(
            path,
            format!(
                "unknown metric kind '{other}' (expected sensitivity, specificity, \
                 overall_proportion, class_recall, or mean_outcome)"
            ),
        )),
    }
}

/// Parse a config document into a validated [`StudyDesign`].
pub fn parse_config(text: &str) -> Result<StudyDesign> {
    let raw: RawConfig =
        toml::from_str(text).map_err(|e| Error::config("<config>", e.to_string()))?;

    let mut metrics = Vec::with_capacity(raw.metrics.len());
    for (i, m) in raw.metrics.into_iter().enumerate() {
        let kind = parse_kind(&m.kind, &format!("metrics[{i}].kind"))?;
        let label = match m.label {
            Some(l) if !l.is_empty() => l,
            _ => kind.default_label().to_string(),
        };
        metrics.push(MetricTarget {
            kind,
            anticipated_value: m.anticipated.to_f64(),
            prevalence: m.prevalence,
            precision: m.precision.to_f64(),
            label,
        });
    }

    let confidence = ConfidenceSpec::new(raw.confidence)
        .map_err(|e| Error::config("confidence", e.to_string()))?;

    let mut split = match (raw.split.ratio, raw.split.test_fraction) {
        (Some(r), None) => {
            SplitSpec::from_ratio(r).map_err(|e| Error::config("split.ratio", e.to_string()))?
        }
        (None, Some(p)) => SplitSpec::from_test_fraction(p)
            .map_err(|e| Error::config("split.test_fraction", e.to_string()))?,
        (Some(_), Some(_)) => {
            return Err(Error::config(
                "split",
                "give either ratio or test_fraction, not both",
            ))
        }
        (None, None) => {
            return Err(Error::config(
                "split",
                "one of ratio or test_fraction is required",
            ))
        }
    };
    if let Some(vf) = raw.split.validation_fraction {
        split = split
            .with_validation_fraction(vf)
            .map_err(|e| Error::config("split.validation_fraction", e.to_string()))?;
    }

    let design = StudyDesign {
        metrics,
        confidence,
        split,
        dropout: raw.dropout.unwrap_or_else(Rational::zero),
        metadata: raw.metadata.unwrap_or_default(),
    };
    design.validate()?;
    Ok(design)
}

/// Read and parse a config file.
pub fn parse_config_file(path: &Path) -> Result<StudyDesign> {
    let text = std::fs::read_to_string(path)?;
    parse_config(&text)
}

#[derive(Serialize)]
struct OutMetric<'a> {
    kind: &'static str,
    anticipated: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    prevalence: Option<Rational>,
    precision: f64,
    label: &'a str,
}

#[derive(Serialize)]
struct OutSplit {
    #[serde(skip_serializing_if = "Option::is_none")]
    ratio: Option<Rational>,
    #[serde(skip_serializing_if = "Option::is_none")]
    test_fraction: Option<Rational>,
    #[serde(skip_serializing_if = "Option::is_none")]
    validation_fraction: Option<Rational>,
}

/// Scalars first: TOML requires values before tables.
#[derive(Serialize)]
struct OutConfig<'a> {
    confidence: f64,
    dropout: Rational,
    #[serde(skip_serializing_if = "Option::is_none")]
    metadata: Option<&'a StudyMetadata>,
    metrics: Vec<OutMetric<'a>>,
    split: OutSplit,
}

fn kind_name(kind: MetricKind) -> &'static str {
    kind.default_label()
}

/// Render a design back into the config schema; `parse_config` of the output
/// reproduces the design.
pub fn render_config(design: &StudyDesign) -> String {
    let has_metadata = design.metadata.title.is_some() || design.metadata.notes.is_some();
    let out = OutConfig {
        confidence: design.confidence.level(),
        dropout: design.dropout,
        metadata: has_metadata.then_some(&design.metadata),
        metrics: design
            .metrics
            .iter()
            .map(|m| OutMetric {
                kind: kind_name(m.kind),
                anticipated: m.anticipated_value,
                prevalence: m.prevalence,
                precision: m.precision,
                label: &m.label,
            })
            .collect(),
        split: OutSplit {
            ratio: (!design.split.is_test_fraction_form()).then(|| design.split.ratio()),
            test_fraction: design
                .split
                .is_test_fraction_form()
                .then(|| design.split.test_fraction()),
            validation_fraction: design.split.validation_fraction(),
        },
    };
    toml::to_string(&out).expect("config model serializes")
}

/// The worked-example design used throughout the docs and tests: a binary
/// diagnostic with sensitivity 0.85, specificity 0.75, prevalence 20%,
/// precision 0.05, 95% confidence, and a 75:25 split.
pub fn example_config() -> &'static str {
    r#"confidence = 0.95
dropout = "0"

[metadata]
title = "binary diagnostic worked example"

[[metrics]]
kind = "sensitivity"
anticipated = "85%"
prevalence = "20%"
precision = 0.05

[[metrics]]
kind = "specificity"
anticipated = "75%"
prevalence = "20%"
precision = 0.05

[split]
ratio = "3"
"#
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_the_worked_example() {
        let design = parse_config(example_config()).unwrap();
        assert_eq!(design.metrics.len(), 2);
        assert_eq!(design.confidence.level(), 0.95);
        assert_eq!(design.split.ratio(), "3".parse().unwrap());
        assert_eq!(design.metrics[0].kind, MetricKind::Sensitivity);
        assert_eq!(design.metrics[0].anticipated_value, 0.85);
        assert_eq!(design.metrics[0].prevalence, Some("1/5".parse().unwrap()));
        assert_eq!(design.metrics[0].label, "sensitivity");
    }

    #[test]
    fn reports_field_path_on_invariant_violation() {
        let bad = example_config().replace("prevalence = \"20%\"", "prevalence = \"1.2\"");
        let err = parse_config(&bad).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("metrics[0].prevalence"), "{msg}");
        assert!(err.is_validation());
    }

    #[test]
    fn split_forms_are_interchangeable() {
        let by_ratio = parse_config(example_config()).unwrap();
        let cfg = example_config().replace("ratio = \"3\"", "test_fraction = \"0.25\"");
        let by_fraction = parse_config(&cfg).unwrap();
        assert_eq!(by_ratio.split.ratio(), by_fraction.split.ratio());
        assert_eq!(
            by_ratio.split.test_fraction(),
            by_fraction.split.test_fraction()
        );
    }

    #[test]
    fn rejects_malformed_documents() {
        assert!(parse_config("not toml [").is_err());
        assert!(
            parse_config("confidence = 0.95").is_err(),
            "missing sections"
        );
        let unknown_kind = example_config().replace("\"sensitivity\"", "\"sensetivity\"");
        let err = parse_config(&unknown_kind).unwrap_err();
        assert!(err.to_string().contains("metrics[0].kind"), "{err}");
        let both =
            example_config().replace("ratio = \"3\"", "ratio = \"3\"\ntest_fraction = \"1/4\"");
        assert!(parse_config(&both).is_err());
        let typo = example_config().replace("confidence", "confidnce");
        assert!(parse_config(&typo).is_err());
    }

    #[test]
    fn render_parse_round_trip() {
        let design = parse_config(example_config()).unwrap();
        let rendered = render_config(&design);
        let back = parse_config(&rendered).unwrap();
        assert_eq!(back, design);

        // fraction form with validation carve-out and dropout
        let cfg = r#"confidence = 0.9
dropout = "1/8"

[[metrics]]
kind = "overall_proportion"
anticipated = 0.5
precision = "2%"
label = "accuracy"

[split]
test_fraction = "3/10"
validation_fraction = "1/5"
"#;
        let design = parse_config(cfg).unwrap();
        let back = parse_config(&render_config(&design)).unwrap();
        assert_eq!(back, design);
    }

    #[test]
    fn dropout_and_metadata_are_optional() {
        let cfg = r#"confidence = 0.95

[[metrics]]
kind = "overall_proportion"
anticipated = 0.5
precision = 0.05

[split]
ratio = 1
"#;
        let design = parse_config(cfg).unwrap();
        assert!(design.dropout.is_zero());
        assert_eq!(design.metadata, StudyMetadata::default());
    }
}
