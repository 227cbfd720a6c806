//! Train/test split planning: converts the required testing-set size into
//! training, validation, and total sample sizes, then inflates for dropout.
//!
//! All split fractions are exact rationals; ceilings happen once per derived
//! count, never through intermediate floating point. `n_train` is ceilinged
//! (never undersizing the training set) and the total is the exact sum
//! n_test + n_train + n_val rather than an independently rounded quantity.

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::rational::{div_int_ceil, mul_int_ceil, Rational};
use crate::sizing::MetricRequirement;
use crate::Result;

/// Train:test split, given either as the ratio r_tt (train:test) or as the
/// testing fraction p_test of the total; the forms are interconvertible via
/// p_test = 1/(1 + r_tt). Optionally reserves a share of the training
/// allocation for hyperparameter tuning.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSplit", into = "RawSplit")]
pub struct SplitSpec {
    form: SplitForm,
    validation_fraction: Option<Rational>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum SplitForm {
    Ratio(Rational),
    TestFraction(Rational),
}

/// Wire form: exactly one of `ratio` / `test_fraction`.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawSplit {
    #[serde(skip_serializing_if = "Option::is_none")]
    ratio: Option<Rational>,
    #[serde(skip_serializing_if = "Option::is_none")]
    test_fraction: Option<Rational>,
    #[serde(skip_serializing_if = "Option::is_none")]
    validation_fraction: Option<Rational>,
}

impl TryFrom<RawSplit> for SplitSpec {
    type Error = Error;

    fn try_from(raw: RawSplit) -> Result<Self> {
        let mut spec = match (raw.ratio, raw.test_fraction) {
            (Some(r), None) => SplitSpec::from_ratio(r)?,
            (None, Some(p)) => SplitSpec::from_test_fraction(p)?,
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
        if let Some(vf) = raw.validation_fraction {
            spec = spec.with_validation_fraction(vf)?;
        }
        Ok(spec)
    }
}

impl From<SplitSpec> for RawSplit {
    fn from(spec: SplitSpec) -> RawSplit {
        let (ratio, test_fraction) = match spec.form {
            SplitForm::Ratio(r) => (Some(r), None),
            SplitForm::TestFraction(p) => (None, Some(p)),
        };
        RawSplit {
            ratio,
            test_fraction,
            validation_fraction: spec.validation_fraction,
        }
    }
}

impl SplitSpec {
    /// Ratio form; requires r_tt > 0 (a model must be trained).
    pub fn from_ratio(r_tt: Rational) -> Result<Self> {
        if !r_tt.is_positive() {
            return Err(Error::invalid(format!(
                "train:test ratio must be positive, got {r_tt}"
            )));
        }
        Ok(SplitSpec {
            form: SplitForm::Ratio(r_tt),
            validation_fraction: None,
        })
    }

    /// Test-fraction form; requires 0 < p_test < 1 (p_test = 1 would leave no
    /// training data).
    pub fn from_test_fraction(p_test: Rational) -> Result<Self> {
        if !(p_test.is_positive() && p_test < Rational::one()) {
            return Err(Error::invalid(format!(
                "test fraction must lie strictly in (0,1), got {p_test}"
            )));
        }
        Ok(SplitSpec {
            form: SplitForm::TestFraction(p_test),
            validation_fraction: None,
        })
    }

    /// Reserve a share of the training allocation for validation; [0,1).
    pub fn with_validation_fraction(mut self, vf: Rational) -> Result<Self> {
        if vf < Rational::zero() || vf >= Rational::one() {
            return Err(Error::invalid(format!(
                "validation fraction must lie in [0,1), got {vf}"
            )));
        }
        self.validation_fraction = if vf.is_zero() { None } else { Some(vf) };
        Ok(self)
    }

    /// The effective train:test ratio, whichever form was given.
    pub fn ratio(&self) -> Rational {
        match self.form {
            SplitForm::Ratio(r) => r,
            SplitForm::TestFraction(p) => (Rational::one() - p) / p,
        }
    }

    /// The effective testing fraction p_test = 1/(1+r_tt).
    pub fn test_fraction(&self) -> Rational {
        match self.form {
            SplitForm::Ratio(r) => Rational::one() / (Rational::one() + r),
            SplitForm::TestFraction(p) => p,
        }
    }

    pub fn validation_fraction(&self) -> Option<Rational> {
        self.validation_fraction
    }

    pub fn is_test_fraction_form(&self) -> bool {
        matches!(self.form, SplitForm::TestFraction(_))
    }

    pub(crate) fn check(&self) -> std::result::Result<(), String> {
        match self.form {
            SplitForm::Ratio(r) if !r.is_positive() => {
                return Err(format!("ratio must be positive, got {r}"))
            }
            SplitForm::TestFraction(p) if !(p.is_positive() && p < Rational::one()) => {
                return Err(format!("test_fraction must lie in (0,1), got {p}"))
            }
            _ => {}
        }
        if let Some(vf) = self.validation_fraction {
            if vf < Rational::zero() || vf >= Rational::one() {
                return Err(format!("validation_fraction must lie in [0,1), got {vf}"));
            }
        }
        Ok(())
    }
}

/// One applied formula with its inputs and pre-rounding value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditStep {
    pub step: String,
    pub inputs: String,
    pub pre_rounding: String,
    pub result: String,
}

/// The complete sizing outcome: counts, per-metric requirements, and the
/// ordered audit trail of every formula applied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SizingResult {
    pub n_test: u64,
    pub n_train: u64,
    pub n_val: u64,
    pub n_total: u64,
    pub n_total_adjusted: u64,
    pub per_metric: Vec<MetricRequirement>,
    /// Index of the binding metric in `per_metric` (first argmax), when any.
    pub binding: Option<usize>,
    pub audit: Vec<AuditStep>,
}

/// r_tt from train/test fractions that must sum exactly to 1.
pub fn ratio_from_fractions(train_fraction: Rational, test_fraction: Rational) -> Result<Rational> {
    if !train_fraction.is_positive() || !test_fraction.is_positive() {
        return Err(Error::invalid(format!(
            "split fractions must be positive, got {train_fraction} and {test_fraction}"
        )));
    }
    if train_fraction + test_fraction != Rational::one() {
        return Err(Error::invalid(format!(
            "split fractions must sum to 1, got {train_fraction} + {test_fraction}"
        )));
    }
    Ok(train_fraction / test_fraction)
}

/// n_train = ceil(n_test * r_tt), exact before the ceiling.
pub fn n_train_from_ratio(n_test: u64, r_tt: Rational) -> Result<u64> {
    if n_test == 0 {
        return Err(Error::invalid("n_test must be at least 1"));
    }
    if !r_tt.is_positive() {
        return Err(Error::invalid(format!(
            "train:test ratio must be positive, got {r_tt}"
        )));
    }
    mul_int_ceil(n_test, r_tt)
}

/// n = n_test + n_train when sizing through the ratio.
pub fn total_from_ratio(n_test: u64, r_tt: Rational) -> Result<u64> {
    let n_train = n_train_from_ratio(n_test, r_tt)?;
    n_test
        .checked_add(n_train)
        .ok_or_else(|| Error::invalid("total sample size exceeds the supported range"))
}

/// n = ceil(n_test / p_test) when sizing through the testing fraction.
pub fn total_from_test_fraction(n_test: u64, p_test: Rational) -> Result<u64> {
    if n_test == 0 {
        return Err(Error::invalid("n_test must be at least 1"));
    }
    if !(p_test.is_positive() && p_test < Rational::one()) {
        return Err(Error::invalid(format!(
            "test fraction must lie strictly in (0,1), got {p_test}"
        )));
    }
    div_int_ceil(n_test, p_test)
}

/// Inflate a total for expected attrition: ceil(n / (1 - dropout)).
pub fn apply_dropout(n: u64, dropout: Rational) -> Result<u64> {
    if n == 0 {
        return Err(Error::invalid("sample size must be at least 1"));
    }
    if dropout < Rational::zero() || dropout >= Rational::one() {
        return Err(Error::invalid(format!(
            "dropout must lie in [0,1), got {dropout}"
        )));
    }
    div_int_ceil(n, Rational::one() - dropout)
}

fn fmt_rational_pre(r: Rational) -> String {
    if r.is_integer() {
        r.to_string()
    } else {
        format!("{} (~{:.4})", r, r.to_f64())
    }
}

/// Compose the split plan: training allocation from the effective ratio,
/// optional validation carve-out (reported separately, never changing the
/// total), the exact-sum total, and dropout inflation. Populates the audit
/// trail with every intermediate value, including the per-metric formulas
/// that produced `per_metric`.
pub fn plan_split(
    n_test: u64,
    split: &SplitSpec,
    per_metric: Vec<MetricRequirement>,
    dropout: Rational,
) -> Result<SizingResult> {
    if n_test == 0 {
        return Err(Error::invalid("n_test must be at least 1"));
    }
    split.check().map_err(Error::InvalidArgument)?;

    let mut audit = Vec::new();

    for req in &per_metric {
        let label = &req.target.label;
        let inter = &req.intermediates;
        if req.target.kind.is_proportion() {
            audit.push(AuditStep {
                step: format!("n_events[{label}] = ceil(z^2 * p(1-p) / d^2)"),
                inputs: format!(
                    "z={:.6}, p={}, d={}",
                    inter.z, req.target.anticipated_value, req.target.precision
                ),
                pre_rounding: format!("{:.6}", inter.raw_n_events),
                result: req.n_events.to_string(),
            });
        } else {
            audit.push(AuditStep {
                step: format!("n[{label}] = ceil((z * sd / d)^2)"),
                inputs: format!(
                    "z={:.6}, sd={}, d={}",
                    inter.z, req.target.anticipated_value, req.target.precision
                ),
                pre_rounding: format!("{:.6}", inter.raw_n_events),
                result: req.n_events.to_string(),
            });
        }
        if let (Some(share), Some(raw_n_test)) = (inter.effective_prevalence, inter.raw_n_test) {
            audit.push(AuditStep {
                step: format!("n_test[{label}] = ceil(n_events / share)"),
                inputs: format!("n_events={}, share={share}", req.n_events),
                pre_rounding: fmt_rational_pre(raw_n_test),
                result: req.n_test_required.to_string(),
            });
            if let Some(alt) = inter.single_ceiling_alt {
                audit.push(AuditStep {
                    step: format!(
                        "single-ceiling alternative[{label}] = ceil(z^2 * p(1-p) / (d^2 * share))"
                    ),
                    inputs: format!("raw_n_events={:.6}, share={share}", inter.raw_n_events),
                    pre_rounding: format!("{:.6}", inter.raw_n_events / share.to_f64()),
                    result: format!(
                        "{alt} (not used; two-stage rule gives {})",
                        req.n_test_required
                    ),
                });
            }
        }
    }

    let binding = per_metric
        .iter()
        .enumerate()
        .max_by(|(ia, a), (ib, b)| a.n_test_required.cmp(&b.n_test_required).then(ib.cmp(ia)))
        .map(|(i, _)| i);
    if let Some(b) = binding {
        let listing = per_metric
            .iter()
            .map(|r| format!("{}: {}", r.target.label, r.n_test_required))
            .collect::<Vec<_>>()
            .join(", ");
        audit.push(AuditStep {
            step: "n_test = max over metric requirements".to_string(),
            inputs: listing,
            pre_rounding: per_metric[b].n_test_required.to_string(),
            result: format!("{n_test} (binding: {})", per_metric[b].target.label),
        });
    }

    let r_tt = split.ratio();
    if split.is_test_fraction_form() {
        audit.push(AuditStep {
            step: "r_tt = (1 - p_test) / p_test".to_string(),
            inputs: format!("p_test={}", split.test_fraction()),
            pre_rounding: fmt_rational_pre(r_tt),
            result: r_tt.to_string(),
        });
    }

    let n_train_total = n_train_from_ratio(n_test, r_tt)?;
    audit.push(AuditStep {
        step: "n_train = ceil(n_test * r_tt)".to_string(),
        inputs: format!("n_test={n_test}, r_tt={r_tt}"),
        pre_rounding: fmt_rational_pre(Rational::from_integer(n_test as i128) * r_tt),
        result: n_train_total.to_string(),
    });

    let (n_train, n_val) = match split.validation_fraction() {
        Some(vf) => {
            let n_val = mul_int_ceil(n_train_total, vf)?;
            let n_train = n_train_total - n_val;
            audit.push(AuditStep {
                step: "n_val = ceil(n_train * validation_fraction)".to_string(),
                inputs: format!("n_train={n_train_total}, validation_fraction={vf}"),
                pre_rounding: fmt_rational_pre(Rational::from_integer(n_train_total as i128) * vf),
                result: n_val.to_string(),
            });
            audit.push(AuditStep {
                step: "n_train = n_train - n_val".to_string(),
                inputs: format!("n_train={n_train_total}, n_val={n_val}"),
                pre_rounding: n_train.to_string(),
                result: n_train.to_string(),
            });
            (n_train, n_val)
        }
        None => (n_train_total, 0),
    };

    let n_total = n_test
        .checked_add(n_train_total)
        .ok_or_else(|| Error::invalid("total sample size exceeds the supported range"))?;
    audit.push(AuditStep {
        step: "n_total = n_test + n_train + n_val".to_string(),
        inputs: format!("n_test={n_test}, n_train={n_train}, n_val={n_val}"),
        pre_rounding: n_total.to_string(),
        result: n_total.to_string(),
    });

    let n_total_adjusted = apply_dropout(n_total, dropout)?;
    audit.push(AuditStep {
        step: "n_total_adjusted = ceil(n_total / (1 - dropout))".to_string(),
        inputs: format!("n_total={n_total}, dropout={dropout}"),
        pre_rounding: fmt_rational_pre(
            Rational::from_integer(n_total as i128) / (Rational::one() - dropout),
        ),
        result: n_total_adjusted.to_string(),
    });

    Ok(SizingResult {
        n_test,
        n_train,
        n_val,
        n_total,
        n_total_adjusted,
        per_metric,
        binding,
        audit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(s: &str) -> Rational {
        s.parse().unwrap()
    }

    #[test]
    fn ratio_from_fractions_worked_values() {
        assert_eq!(ratio_from_fractions(r("3/4"), r("1/4")).unwrap(), r("3"));
        assert_eq!(ratio_from_fractions(r("1/2"), r("1/2")).unwrap(), r("1"));
        assert_eq!(ratio_from_fractions(r("2/3"), r("1/3")).unwrap(), r("2"));
    }

    #[test]
    fn ratio_from_fractions_rejects_bad_input() {
        assert!(ratio_from_fractions(r("3/4"), r("1/3")).is_err());
        assert!(ratio_from_fractions(r("1"), r("0")).is_err());
        assert!(ratio_from_fractions(r("5/4"), r("-1/4")).is_err());
    }

    #[test]
    fn n_train_worked_values() {
        assert_eq!(n_train_from_ratio(980, r("3")).unwrap(), 2940);
        for n in [1u64, 17, 980, 1_000_000] {
            assert_eq!(n_train_from_ratio(n, r("1")).unwrap(), n);
        }
        // 700/3 = 233.33..., ceilinged
        assert_eq!(n_train_from_ratio(100, r("7/3")).unwrap(), 234);
        assert!(n_train_from_ratio(0, r("3")).is_err());
        assert!(n_train_from_ratio(10, r("0")).is_err());
    }

    #[test]
    fn totals_worked_values() {
        assert_eq!(total_from_ratio(980, r("3")).unwrap(), 3920);
        assert_eq!(total_from_ratio(100, r("1")).unwrap(), 200);
        assert_eq!(total_from_ratio(100, r("7/3")).unwrap(), 334);

        assert_eq!(total_from_test_fraction(980, r("1/4")).unwrap(), 3920);
        assert_eq!(total_from_test_fraction(100, r("1/2")).unwrap(), 200);
        assert_eq!(total_from_test_fraction(100, r("3/10")).unwrap(), 334);
        assert!(total_from_test_fraction(100, r("1")).is_err());
        assert!(total_from_test_fraction(100, r("0")).is_err());
    }

    #[test]
    fn dropout_worked_values() {
        assert_eq!(apply_dropout(3920, Rational::zero()).unwrap(), 3920);
        assert_eq!(apply_dropout(3920, r("1/10")).unwrap(), 4356);
        assert_eq!(apply_dropout(1, r("1/2")).unwrap(), 2);
        assert!(apply_dropout(10, r("1")).is_err());
        assert!(apply_dropout(10, r("3/2")).is_err());
        assert!(apply_dropout(0, r("1/10")).is_err());
    }

    #[test]
    fn plan_split_worked_example() {
        let split = SplitSpec::from_ratio(r("3")).unwrap();
        let out = plan_split(980, &split, Vec::new(), Rational::zero()).unwrap();
        assert_eq!(out.n_train, 2940);
        assert_eq!(out.n_val, 0);
        assert_eq!(out.n_total, 3920);
        assert_eq!(out.n_total_adjusted, 3920);
        assert_eq!(out.n_total, out.n_test + out.n_train + out.n_val);
    }

    #[test]
    fn plan_split_forms_are_equivalent() {
        let by_ratio = SplitSpec::from_ratio(r("3")).unwrap();
        let by_fraction = SplitSpec::from_test_fraction(r("1/4")).unwrap();
        let a = plan_split(980, &by_ratio, Vec::new(), Rational::zero()).unwrap();
        let b = plan_split(980, &by_fraction, Vec::new(), Rational::zero()).unwrap();
        assert_eq!(a.n_train, b.n_train);
        assert_eq!(a.n_total, b.n_total);
    }

    #[test]
    fn plan_split_validation_carve_out() {
        let split = SplitSpec::from_ratio(r("3"))
            .unwrap()
            .with_validation_fraction(r("1/3"))
            .unwrap();
        let out = plan_split(980, &split, Vec::new(), Rational::zero()).unwrap();
        assert_eq!(out.n_val, 980);
        assert_eq!(out.n_train, 1960);
        assert_eq!(out.n_total, 3920);
    }

    #[test]
    fn plan_split_applies_dropout_last() {
        let split = SplitSpec::from_ratio(r("3")).unwrap();
        let out = plan_split(980, &split, Vec::new(), r("1/10")).unwrap();
        assert_eq!(out.n_total, 3920);
        assert_eq!(out.n_total_adjusted, 4356);
    }

    #[test]
    fn split_spec_serde_round_trip() {
        let spec = SplitSpec::from_test_fraction(r("1/4"))
            .unwrap()
            .with_validation_fraction(r("1/3"))
            .unwrap();
        let json = serde_json::to_string(&spec).unwrap();
        let back: SplitSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(back, spec);
        assert!(
            serde_json::from_str::<SplitSpec>("{\"ratio\":\"3\",\"test_fraction\":\"1/4\"}")
                .is_err()
        );
        assert!(serde_json::from_str::<SplitSpec>("{}").is_err());
    }

    #[test]
    fn split_spec_rejects_degenerate_forms() {
        assert!(SplitSpec::from_ratio(r("0")).is_err());
        assert!(SplitSpec::from_ratio(r("-2")).is_err());
        assert!(SplitSpec::from_test_fraction(r("1")).is_err());
        assert!(SplitSpec::from_test_fraction(r("0")).is_err());
        assert!(SplitSpec::from_ratio(r("3"))
            .unwrap()
            .with_validation_fraction(r("1"))
            .is_err());
    }
}
