//! Testing-set size requirements per performance metric.
//!
//! Each proportion-like metric needs `ceil(z^2 p(1-p) / d^2)` in-scope
//! subjects (events) for a Wald half-width of at most `d`; a prevalence
//! adjustment then converts events into a total testing-set size. Rounding is
//! two-stage: the event count is ceilinged first, then the prevalence-adjusted
//! total, which guarantees an integer event requirement and is never
//! anti-conservative. The single-ceiling alternative is recorded in the audit
//! trail whenever it differs.

use serde::{Deserialize, Serialize};

use crate::design::StudyDesign;
use crate::error::Error;
use crate::rational::{div_int_ceil, Rational};
use crate::stats::{symmetric_variance, wald_half_width, ConfidenceSpec};
use crate::Result;

/// The closed set of metric kinds this planner can size.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MetricKind {
    /// P(model positive | condition positive); events are the diseased.
    Sensitivity,
    /// P(model negative | condition negative); events are the non-diseased.
    Specificity,
    /// A proportion estimated over the whole testing set (e.g. accuracy).
    OverallProportion,
    /// Recall of one class in a multi-category outcome; `prevalence` is that
    /// class's share of the testing population.
    ClassRecall,
    /// Mean of a continuous outcome; `anticipated_value` is the outcome
    /// standard deviation and `precision` is in outcome units.
    MeanOutcome,
}

impl MetricKind {
    pub fn is_proportion(self) -> bool {
        !matches!(self, MetricKind::MeanOutcome)
    }

    /// Kinds whose event count is scaled up by a population share.
    pub fn needs_prevalence(self) -> bool {
        matches!(
            self,
            MetricKind::Sensitivity | MetricKind::Specificity | MetricKind::ClassRecall
        )
    }

    pub fn default_label(self) -> &'static str {
        match self {
            MetricKind::Sensitivity => "sensitivity",
            MetricKind::Specificity => "specificity",
            MetricKind::OverallProportion => "overall_proportion",
            MetricKind::ClassRecall => "class_recall",
            MetricKind::MeanOutcome => "mean_outcome",
        }
    }
}

/// One performance metric to be estimated on the testing set.
///
/// For `Sensitivity` and `Specificity`, `prevalence` is the share of
/// condition-positive subjects in the testing population; specificity's
/// in-scope share is `1 - prevalence`, taken care of by the sizing ops. For
/// `ClassRecall` it is the class's own share.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricTarget {
    pub kind: MetricKind,
    /// Anticipated proportion for proportion-like kinds, or the outcome
    /// standard deviation for `MeanOutcome`.
    pub anticipated_value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prevalence: Option<Rational>,
    /// Target CI half-width (proportion units, or outcome units for
    /// `MeanOutcome`).
    pub precision: f64,
    pub label: String,
}

impl MetricTarget {
    pub fn new(
        kind: MetricKind,
        anticipated_value: f64,
        prevalence: Option<Rational>,
        precision: f64,
        label: impl Into<String>,
    ) -> Result<Self> {
        let mut label = label.into();
        if label.is_empty() {
            label = kind.default_label().to_string();
        }
        let target = MetricTarget {
            kind,
            anticipated_value,
            prevalence,
            precision,
            label,
        };
        if let Err(reason) = target.check() {
            return Err(Error::invalid(reason).for_metric(&target.label));
        }
        Ok(target)
    }

    /// Invariant check; returns the violation reason for the caller to attach
    /// context (field path or metric label).
    pub fn check(&self) -> std::result::Result<(), String> {
        if self.kind.is_proportion() {
            if !(self.anticipated_value > 0.0 && self.anticipated_value < 1.0) {
                return Err(format!(
                    "anticipated value must lie strictly in (0,1), got {}",
                    self.anticipated_value
                ));
            }
            if !(self.precision > 0.0 && self.precision < 1.0) {
                return Err(format!(
                    "precision must lie in (0,1) for a proportion metric, got {}",
                    self.precision
                ));
            }
        } else {
            if !(self.anticipated_value > 0.0 && self.anticipated_value.is_finite()) {
                return Err(format!(
                    "standard deviation must be positive, got {}",
                    self.anticipated_value
                ));
            }
            if !(self.precision > 0.0 && self.precision.is_finite()) {
                return Err(format!(
                    "precision must be positive, got {}",
                    self.precision
                ));
            }
        }
        match (&self.prevalence, self.kind.needs_prevalence()) {
            (None, true) => {
                return Err(format!(
                    "{} requires a prevalence",
                    self.kind.default_label()
                ))
            }
            (Some(_), false) => {
                return Err(format!(
                    "{} does not take a prevalence",
                    self.kind.default_label()
                ))
            }
            (Some(p), true) => {
                if !(p.is_positive() && *p < Rational::one()) {
                    return Err(format!("prevalence must lie strictly in (0,1), got {p}"));
                }
            }
            (None, false) => {}
        }
        Ok(())
    }

    /// The share of testing-set subjects that are in scope for this metric
    /// (the divisor of the prevalence adjustment). 1 when all subjects count.
    pub fn in_scope_share(&self) -> Rational {
        match self.kind {
            MetricKind::Sensitivity | MetricKind::ClassRecall => {
                self.prevalence.expect("validated")
            }
            MetricKind::Specificity => Rational::one() - self.prevalence.expect("validated"),
            MetricKind::OverallProportion | MetricKind::MeanOutcome => Rational::one(),
        }
    }
}

/// Per-class breakdown of a multiclass recall requirement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassRequirement {
    pub recall: f64,
    pub class_prevalence: Rational,
    pub n_events: u64,
    pub n_test_required: u64,
}

/// Audit-trail intermediates recorded alongside every requirement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Intermediates {
    /// Standard-normal multiplier used by the formula.
    pub z: f64,
    /// p(1-p) for proportion metrics; sd^2 for the mean metric.
    pub variance_term: f64,
    /// z^2 * variance / d^2 before any ceiling.
    pub raw_n_events: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub effective_prevalence: Option<Rational>,
    /// n_events / effective_prevalence as an exact rational, before the
    /// second ceiling.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub raw_n_test: Option<Rational>,
    /// ceil(z^2 p(1-p) / (d^2 * prevalence)), recorded when it differs from
    /// the two-stage result.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub single_ceiling_alt: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub per_class: Option<Vec<ClassRequirement>>,
}

/// Testing-set requirement for one metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRequirement {
    pub target: MetricTarget,
    /// In-scope subjects needed (e.g. diseased cases for sensitivity).
    pub n_events: u64,
    /// Total testing-set size after the prevalence adjustment.
    pub n_test_required: u64,
    pub intermediates: Intermediates,
}

/// Requirements for every metric of a design plus the binding overall size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RequiredTestSize {
    pub per_metric: Vec<MetricRequirement>,
    /// max over per-metric `n_test_required`.
    pub n_test: u64,
    /// Index of the binding metric (first argmax).
    pub binding: usize,
}

fn check_proportion(name: &str, p: f64) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::invalid(format!(
            "{name} must lie strictly in (0,1), got {p}"
        )));
    }
    Ok(())
}

fn check_share(name: &str, share: &Rational) -> Result<()> {
    if !(share.is_positive() && *share < Rational::one()) {
        return Err(Error::invalid(format!(
            "{name} must lie strictly in (0,1), got {share}"
        )));
    }
    Ok(())
}

/// Smallest n with Wald half-width at `p` of at most `d`, with the raw
/// pre-ceiling value.
fn n_events_with_raw(p: f64, d: f64, conf: ConfidenceSpec) -> Result<(u64, f64)> {
    check_proportion("anticipated proportion", p)?;
    check_proportion("precision", d)?;
    let z = conf.z_score().value();
    let raw = z * z * symmetric_variance(p) / (d * d);
    if !raw.is_finite() || raw > 1e18 {
        return Err(Error::invalid(format!(
            "event requirement out of range (raw {raw})"
        )));
    }
    let mut n = (raw.ceil() as u64).max(1);
    // ceil(raw) and scan minimality agree up to floating-point rounding of
    // raw; settle any boundary case against wald_half_width itself, which is
    // the defining inequality.
    while wald_half_width(p, n, conf)? > d {
        n += 1;
    }
    while n > 1 && wald_half_width(p, n - 1, conf)? <= d {
        n -= 1;
    }
    Ok((n, raw))
}

/// Smallest integer event count n with `wald_half_width(p, n, conf) <= d`,
/// i.e. ceil(z^2 p(1-p) / d^2).
pub fn n_events_for_proportion(p: f64, d: f64, conf: ConfidenceSpec) -> Result<u64> {
    n_events_with_raw(p, d, conf).map(|(n, _)| n)
}

/// Shared prevalence-adjusted requirement: `n_events` at the anticipated
/// proportion, then ceil(n_events / share).
fn proportion_requirement(
    target: MetricTarget,
    conf: ConfidenceSpec,
    share: Rational,
) -> Result<MetricRequirement> {
    let p = target.anticipated_value;
    let (n_events, raw) = n_events_with_raw(p, target.precision, conf)?;
    let raw_n_test = Rational::from_integer(n_events as i128) / share;
    let n_test_required = div_int_ceil(n_events, share)?;

    let single = (raw / share.to_f64()).ceil() as u64;
    let single_ceiling_alt = (single != n_test_required).then_some(single);

    Ok(MetricRequirement {
        intermediates: Intermediates {
            z: conf.z_score().value(),
            variance_term: symmetric_variance(p),
            raw_n_events: raw,
            effective_prevalence: Some(share),
            raw_n_test: Some(raw_n_test),
            single_ceiling_alt,
            per_class: None,
        },
        target,
        n_events,
        n_test_required,
    })
}

/// Testing-set size for estimating sensitivity: events are the diseased,
/// whose share of the testing population is `prevalence`.
pub fn n_test_for_sensitivity(
    sens: f64,
    prevalence: Rational,
    d: f64,
    conf: ConfidenceSpec,
) -> Result<MetricRequirement> {
    check_share("prevalence", &prevalence)?;
    let target = MetricTarget::new(MetricKind::Sensitivity, sens, Some(prevalence), d, "")?;
    proportion_requirement(target, conf, prevalence)
}

/// Testing-set size for estimating specificity: events are the non-diseased,
/// share `1 - prevalence`.
pub fn n_test_for_specificity(
    spec: f64,
    prevalence: Rational,
    d: f64,
    conf: ConfidenceSpec,
) -> Result<MetricRequirement> {
    check_share("prevalence", &prevalence)?;
    let target = MetricTarget::new(MetricKind::Specificity, spec, Some(prevalence), d, "")?;
    let share = Rational::one() - prevalence;
    proportion_requirement(target, conf, share)
}

/// Testing-set size for estimating a mean to half-width `d`:
/// ceil((z * sd / d)^2).
pub fn n_test_for_mean(sd: f64, d: f64, conf: ConfidenceSpec) -> Result<MetricRequirement> {
    let target = MetricTarget::new(MetricKind::MeanOutcome, sd, None, d, "")?;
    let z = conf.z_score().value();
    let raw = (z * sd / d).powi(2);
    if !raw.is_finite() || raw > 1e18 {
        return Err(Error::invalid(format!(
            "sample size out of range (raw {raw})"
        )));
    }
    let n = (raw.ceil() as u64).max(1);
    Ok(MetricRequirement {
        target,
        n_events: n,
        n_test_required: n,
        intermediates: Intermediates {
            z,
            variance_term: sd * sd,
            raw_n_events: raw,
            effective_prevalence: None,
            raw_n_test: None,
            single_ceiling_alt: None,
            per_class: None,
        },
    })
}

/// Testing-set size for estimating every class recall of a multi-category
/// outcome to half-width `d`: each class is sized like sensitivity with its
/// own share, and the overall requirement is the max over classes.
pub fn n_test_for_multiclass(
    classes: &[(f64, Rational)],
    d: f64,
    conf: ConfidenceSpec,
) -> Result<MetricRequirement> {
    if classes.len() < 2 {
        return Err(Error::invalid(format!(
            "multiclass sizing requires at least 2 classes, got {}",
            classes.len()
        )));
    }
    let mut share_sum = Rational::zero();
    for (i, (recall, share)) in classes.iter().enumerate() {
        check_proportion(&format!("class {i} recall"), *recall)?;
        check_share(&format!("class {i} prevalence"), share)?;
        share_sum = share_sum + *share;
    }
    if (share_sum.to_f64() - 1.0).abs() > 1e-9 {
        return Err(Error::invalid(format!(
            "class prevalences must sum to 1, got {share_sum}"
        )));
    }

    let mut per_class = Vec::with_capacity(classes.len());
    for (recall, share) in classes {
        let (n_events, _) = n_events_with_raw(*recall, d, conf)?;
        per_class.push(ClassRequirement {
            recall: *recall,
            class_prevalence: *share,
            n_events,
            n_test_required: div_int_ceil(n_events, *share)?,
        });
    }
    let binding = per_class
        .iter()
        .enumerate()
        .max_by(|(ia, a), (ib, b)| {
            a.n_test_required.cmp(&b.n_test_required).then(ib.cmp(ia)) // first argmax wins
        })
        .map(|(i, _)| i)
        .expect("at least 2 classes");

    let bound = per_class[binding].clone();
    let (n_events, raw) = n_events_with_raw(bound.recall, d, conf)?;
    let target = MetricTarget::new(
        MetricKind::ClassRecall,
        bound.recall,
        Some(bound.class_prevalence),
        d,
        "multiclass_recall",
    )?;
    Ok(MetricRequirement {
        target,
        n_events,
        n_test_required: bound.n_test_required,
        intermediates: Intermediates {
            z: conf.z_score().value(),
            variance_term: symmetric_variance(bound.recall),
            raw_n_events: raw,
            effective_prevalence: Some(bound.class_prevalence),
            raw_n_test: Some(Rational::from_integer(n_events as i128) / bound.class_prevalence),
            single_ceiling_alt: None,
            per_class: Some(per_class),
        },
    })
}

/// Requirement for one metric of a validated design.
fn requirement_for(target: &MetricTarget, conf: ConfidenceSpec) -> Result<MetricRequirement> {
    if let Err(reason) = target.check() {
        return Err(Error::invalid(reason));
    }
    match target.kind {
        MetricKind::MeanOutcome => {
            let mut req = n_test_for_mean(target.anticipated_value, target.precision, conf)?;
            req.target = target.clone();
            Ok(req)
        }
        _ => {
            if let Some(prev) = &target.prevalence {
                check_share("prevalence", prev)?;
            }
            let share = target.in_scope_share();
            proportion_requirement(target.clone(), conf, share)
        }
    }
}

/// Per-metric requirements and the binding overall testing-set size
/// (the maximum: every metric must individually meet its precision).
pub fn required_test_size(design: &StudyDesign) -> Result<RequiredTestSize> {
    if design.metrics.is_empty() {
        return Err(Error::invalid("a design needs at least one metric"));
    }
    let mut per_metric = Vec::with_capacity(design.metrics.len());
    for target in &design.metrics {
        let req =
            requirement_for(target, design.confidence).map_err(|e| e.for_metric(&target.label))?;
        per_metric.push(req);
    }
    let binding = per_metric
        .iter()
        .enumerate()
        .max_by(|(ia, a), (ib, b)| a.n_test_required.cmp(&b.n_test_required).then(ib.cmp(ia)))
        .map(|(i, _)| i)
        .expect("nonempty");
    let n_test = per_metric[binding].n_test_required;
    Ok(RequiredTestSize {
        per_metric,
        n_test,
        binding,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::design::StudyMetadata;
    use crate::split::SplitSpec;

    fn conf95() -> ConfidenceSpec {
        ConfidenceSpec::new(0.95).unwrap()
    }

    fn r(s: &str) -> Rational {
        s.parse().unwrap()
    }

    /// Linear-scan oracle: smallest n with wald_half_width(p, n, conf) <= d.
    fn min_n_by_scan(p: f64, d: f64, conf: ConfidenceSpec) -> u64 {
        let mut n = 1;
        while wald_half_width(p, n, conf).unwrap() > d {
            n += 1;
        }
        n
    }

    #[test]
    fn n_events_worked_values() {
        let c = conf95();
        assert_eq!(n_events_for_proportion(0.85, 0.05, c).unwrap(), 196);
        assert_eq!(n_events_for_proportion(0.15, 0.05, c).unwrap(), 196);
        assert_eq!(n_events_for_proportion(0.75, 0.05, c).unwrap(), 289);
        assert_eq!(n_events_for_proportion(0.5, 0.5, c).unwrap(), 4);
    }

    #[test]
    fn n_events_matches_scan_oracle_spot_checks() {
        let c = conf95();
        for (p, d) in [
            (0.85, 0.05),
            (0.75, 0.05),
            (0.5, 0.5),
            (0.05, 0.01),
            (0.95, 0.2),
        ] {
            assert_eq!(
                n_events_for_proportion(p, d, c).unwrap(),
                min_n_by_scan(p, d, c),
                "p={p}, d={d}"
            );
        }
    }

    #[test]
    fn n_events_rejects_degenerate_inputs() {
        let c = conf95();
        for p in [0.0, 1.0, -0.2, 1.3] {
            assert!(n_events_for_proportion(p, 0.05, c).is_err(), "p={p}");
        }
        for d in [0.0, 1.0, 1.5, -0.05] {
            assert!(n_events_for_proportion(0.85, d, c).is_err(), "d={d}");
        }
    }

    #[test]
    fn sensitivity_reproduces_worked_example() {
        let req = n_test_for_sensitivity(0.85, r("1/5"), 0.05, conf95()).unwrap();
        assert_eq!(req.n_events, 196);
        assert_eq!(req.n_test_required, 980);
        // both rounding rules agree here, so no alternative is recorded
        assert_eq!(req.intermediates.single_ceiling_alt, None);
        assert_eq!(req.intermediates.raw_n_test, Some(r("980")));
    }

    #[test]
    fn sensitivity_prevalence_scaling() {
        let req = n_test_for_sensitivity(0.85, r("1/10"), 0.05, conf95()).unwrap();
        assert_eq!(req.n_test_required, 1960);
        // As prevalence -> 1 the adjustment approaches the event count from
        // above; the infimum 196 is attained only in the excluded limit.
        let req = n_test_for_sensitivity(0.85, r("999999999/1000000000"), 0.05, conf95()).unwrap();
        assert_eq!(req.n_test_required, 197);
        assert!(req.n_test_required >= req.n_events);
    }

    #[test]
    fn sensitivity_rejects_degenerate_prevalence() {
        for p in ["0", "1", "-1/5", "3/2"] {
            assert!(
                n_test_for_sensitivity(0.85, r(p), 0.05, conf95()).is_err(),
                "prevalence {p}"
            );
        }
    }

    #[test]
    fn specificity_worked_values() {
        let c = conf95();
        let req = n_test_for_specificity(0.75, r("1/5"), 0.05, c).unwrap();
        assert_eq!(req.n_events, 289);
        assert_eq!(req.n_test_required, 362);
        // two-stage 362 vs single-ceiling 361: the alternative is recorded
        assert_eq!(req.intermediates.single_ceiling_alt, Some(361));

        assert_eq!(
            n_test_for_specificity(0.75, r("1/2"), 0.05, c)
                .unwrap()
                .n_test_required,
            578
        );
        // prevalence -> 0: nearly all subjects are non-diseased
        let req = n_test_for_specificity(0.75, r("1/1000000000"), 0.05, c).unwrap();
        assert_eq!(req.n_test_required, 290);
    }

    #[test]
    fn mean_outcome_worked_values() {
        let c = conf95();
        assert_eq!(n_test_for_mean(10.0, 2.0, c).unwrap().n_test_required, 97);
        assert_eq!(n_test_for_mean(10.0, 1.0, c).unwrap().n_test_required, 385);
        // d = z * sd forces the ratio to exactly 1
        let z = c.z_score().value();
        for sd in [0.5, 1.0, 10.0, 123.0] {
            assert_eq!(n_test_for_mean(sd, z * sd, c).unwrap().n_test_required, 1);
        }
        assert!(n_test_for_mean(0.0, 1.0, c).is_err());
        assert!(n_test_for_mean(1.0, 0.0, c).is_err());
        assert!(n_test_for_mean(-1.0, 1.0, c).is_err());
    }

    #[test]
    fn multiclass_two_class_reduction() {
        let c = conf95();
        let multi = n_test_for_multiclass(&[(0.85, r("1/5")), (0.75, r("4/5"))], 0.05, c).unwrap();
        let sens = n_test_for_sensitivity(0.85, r("1/5"), 0.05, c).unwrap();
        let spec = n_test_for_specificity(0.75, r("1/5"), 0.05, c).unwrap();
        assert_eq!(
            multi.n_test_required,
            sens.n_test_required.max(spec.n_test_required)
        );
        assert_eq!(multi.n_test_required, 980);
        let classes = multi.intermediates.per_class.as_ref().unwrap();
        assert_eq!(classes[0].n_test_required, 980);
        assert_eq!(classes[1].n_test_required, 362);
    }

    #[test]
    fn multiclass_three_class_example() {
        let req = n_test_for_multiclass(
            &[(0.80, r("1/2")), (0.90, r("3/10")), (0.70, r("1/5"))],
            0.05,
            conf95(),
        )
        .unwrap();
        let classes = req.intermediates.per_class.as_ref().unwrap();
        let sizes: Vec<u64> = classes.iter().map(|c| c.n_test_required).collect();
        assert_eq!(sizes, vec![492, 464, 1615]);
        assert_eq!(req.n_test_required, 1615);
    }

    #[test]
    fn multiclass_equal_split() {
        // ceil(385 / (1/2)) = 770 by the two-stage rule
        let req =
            n_test_for_multiclass(&[(0.5, r("1/2")), (0.5, r("1/2"))], 0.05, conf95()).unwrap();
        assert_eq!(req.n_test_required, 770);
    }

    #[test]
    fn multiclass_rejects_invalid_shares() {
        let c = conf95();
        assert!(n_test_for_multiclass(&[(0.8, r("1"))], 0.05, c).is_err());
        assert!(
            n_test_for_multiclass(&[(0.8, r("1/2")), (0.9, r("1/4"))], 0.05, c).is_err(),
            "shares must sum to 1"
        );
        assert!(n_test_for_multiclass(&[], 0.05, c).is_err());
    }

    fn worked_design() -> StudyDesign {
        StudyDesign {
            metrics: vec![
                MetricTarget::new(MetricKind::Sensitivity, 0.85, Some(r("1/5")), 0.05, "").unwrap(),
                MetricTarget::new(MetricKind::Specificity, 0.75, Some(r("1/5")), 0.05, "").unwrap(),
            ],
            confidence: conf95(),
            split: SplitSpec::from_ratio(r("3")).unwrap(),
            dropout: Rational::zero(),
            metadata: StudyMetadata::default(),
        }
    }

    #[test]
    fn required_test_size_worked_example() {
        let out = required_test_size(&worked_design()).unwrap();
        assert_eq!(out.n_test, 980);
        assert_eq!(out.binding, 0);
        assert_eq!(out.per_metric[0].n_test_required, 980);
        assert_eq!(out.per_metric[1].n_test_required, 362);
    }

    #[test]
    fn required_test_size_single_overall_proportion() {
        let mut design = worked_design();
        design.metrics =
            vec![
                MetricTarget::new(MetricKind::OverallProportion, 0.5, None, 0.05, "accuracy")
                    .unwrap(),
            ];
        let out = required_test_size(&design).unwrap();
        assert_eq!(out.n_test, 385);
    }

    #[test]
    fn required_test_size_max_is_idempotent() {
        let mut design = worked_design();
        design.metrics = vec![design.metrics[0].clone(), design.metrics[0].clone()];
        let out = required_test_size(&design).unwrap();
        assert_eq!(out.n_test, 980);
        assert_eq!(out.binding, 0);
    }

    #[test]
    fn errors_carry_the_metric_label() {
        let mut design = worked_design();
        design.metrics[1].anticipated_value = 1.0;
        let err = required_test_size(&design).unwrap_err();
        assert!(err.to_string().contains("specificity"), "{err}");
    }
}
