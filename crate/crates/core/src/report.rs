//! Runs sizing, sweeps, and verification over a design, and renders results
//! as a human-readable table, a structured JSON document with a fixed key
//! order, or CSV.
//!
//! Structured output is byte-stable: identical inputs produce identical
//! bytes. Every number shown in the table formats also appears in the
//! structured document. The binding metric is named explicitly everywhere.

use serde::Serialize;

use crate::config::render_config;
use crate::design::StudyDesign;
use crate::error::Error;
use crate::rational::Rational;
use crate::simulate::{simulate_study, SimulationConfig, SimulationReport};
use crate::sizing::{required_test_size, Intermediates, MetricKind};
use crate::split::{plan_split, SizingResult, SplitSpec};
use crate::stats::ConfidenceSpec;
use crate::Result;

/// Output formats for every command.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Table,
    Structured,
    Csv,
}

impl std::str::FromStr for OutputFormat {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "table" => Ok(OutputFormat::Table),
            "structured" => Ok(OutputFormat::Structured),
            "csv" => Ok(OutputFormat::Csv),
            other => Err(Error::invalid(format!(
                "unknown format '{other}' (expected table, structured, or csv)"
            ))),
        }
    }
}

/// Compute the full sizing plan for a validated design.
pub fn run_size(design: &StudyDesign) -> Result<SizingResult> {
    design.validate()?;
    let required = required_test_size(design)?;
    plan_split(
        required.n_test,
        &design.split,
        required.per_metric,
        design.dropout,
    )
}

/// Sizing plus Monte Carlo verification at the computed n_test, or at an
/// explicit override.
pub fn run_verify(
    design: &StudyDesign,
    n_test_override: Option<u64>,
    sim: &SimulationConfig,
) -> Result<(SizingResult, SimulationReport)> {
    design.validate()?;
    let required = required_test_size(design)?;
    let n_test = n_test_override.unwrap_or(required.n_test);
    let result = plan_split(n_test, &design.split, required.per_metric, design.dropout)?;
    let report = simulate_study(design, n_test, sim)?;
    Ok((result, report))
}

/// The design field a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    /// Precision target d of every metric.
    Precision,
    /// Prevalence of every prevalence-bearing metric.
    Prevalence,
    /// Confidence level.
    Confidence,
    /// Anticipated value of every metric.
    Anticipated,
    /// Train:test ratio (validation carve-out preserved).
    Ratio,
}

impl std::str::FromStr for SweepAxis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "precision" => Ok(SweepAxis::Precision),
            "prevalence" => Ok(SweepAxis::Prevalence),
            "confidence" => Ok(SweepAxis::Confidence),
            "anticipated" => Ok(SweepAxis::Anticipated),
            "ratio" => Ok(SweepAxis::Ratio),
            other => Err(Error::invalid(format!(
                "unknown sweep axis '{other}' (expected precision, prevalence, confidence, \
                 anticipated, or ratio)"
            ))),
        }
    }
}

/// A what-if grid: one axis, explicit values.
#[derive(Debug, Clone)]
pub struct SweepGrid {
    pub axis: SweepAxis,
    pub values: Vec<String>,
}

impl SweepGrid {
    pub fn new(axis: SweepAxis, values: Vec<String>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("sweep values must be nonempty"));
        }
        Ok(SweepGrid { axis, values })
    }
}

/// One sweep row; `error` is set (and the counts empty) when the substituted
/// design fails, without aborting the rest of the sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub value: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_test: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_train: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_val: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_total: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_total_adjusted: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub binding_metric: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepTable {
    pub axis: SweepAxis,
    pub rows: Vec<SweepRow>,
}

fn substitute(design: &StudyDesign, axis: SweepAxis, value: &str) -> Result<StudyDesign> {
    let mut d = design.clone();
    let rational: Rational = value.parse()?;
    match axis {
        SweepAxis::Precision => {
            for m in &mut d.metrics {
                m.precision = rational.to_f64();
            }
        }
        SweepAxis::Prevalence => {
            if !d.metrics.iter().any(|m| m.kind.needs_prevalence()) {
                return Err(Error::invalid(
                    "design has no prevalence-bearing metric to vary",
                ));
            }
            for m in &mut d.metrics {
                if m.kind.needs_prevalence() {
                    m.prevalence = Some(rational);
                }
            }
        }
        SweepAxis::Confidence => {
            d.confidence = ConfidenceSpec::new(rational.to_f64())?;
        }
        SweepAxis::Anticipated => {
            for m in &mut d.metrics {
                m.anticipated_value = rational.to_f64();
            }
        }
        SweepAxis::Ratio => {
            let mut split = SplitSpec::from_ratio(rational)?;
            if let Some(vf) = d.split.validation_fraction() {
                split = split.with_validation_fraction(vf)?;
            }
            d.split = split;
        }
    }
    d.validate()?;
    Ok(d)
}

/// One row per grid value, in the given order; each successful row equals
/// `run_size` of the substituted design.
pub fn run_sweep(design: &StudyDesign, grid: &SweepGrid) -> Result<SweepTable> {
    design.validate()?;
    if grid.values.is_empty() {
        return Err(Error::invalid("sweep values must be nonempty"));
    }
    let rows = grid
        .values
        .iter()
        .map(|value| {
            let outcome = substitute(design, grid.axis, value).and_then(|d| run_size(&d));
            match outcome {
                Ok(result) => SweepRow {
                    value: value.clone(),
                    n_test: Some(result.n_test),
                    n_train: Some(result.n_train),
                    n_val: Some(result.n_val),
                    n_total: Some(result.n_total),
                    n_total_adjusted: Some(result.n_total_adjusted),
                    binding_metric: result
                        .binding
                        .map(|b| result.per_metric[b].target.label.clone()),
                    error: None,
                },
                Err(e) => SweepRow {
                    value: value.clone(),
                    n_test: None,
                    n_train: None,
                    n_val: None,
                    n_total: None,
                    n_total_adjusted: None,
                    binding_metric: None,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    Ok(SweepTable {
        axis: grid.axis,
        rows,
    })
}

/// A renderable result.
#[derive(Debug, Clone)]
pub enum Report {
    Sizing {
        design: StudyDesign,
        result: SizingResult,
    },
    Verification {
        design: StudyDesign,
        result: SizingResult,
        simulation: SimulationReport,
    },
    Sweep {
        design: StudyDesign,
        table: SweepTable,
    },
}

// ---------------------------------------------------------------------------
// structured output (fixed key order, byte-stable)
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct PerMetricOut<'a> {
    label: &'a str,
    kind: MetricKind,
    anticipated: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    prevalence: Option<Rational>,
    precision: f64,
    n_events: u64,
    n_test_required: u64,
    binding: bool,
    intermediates: &'a Intermediates,
}

#[derive(Serialize)]
struct SizingDocument<'a> {
    design: &'a StudyDesign,
    per_metric: Vec<PerMetricOut<'a>>,
    n_test: u64,
    n_train: u64,
    n_val: u64,
    n_total: u64,
    n_total_adjusted: u64,
    audit: &'a [crate::split::AuditStep],
    #[serde(skip_serializing_if = "Option::is_none")]
    simulation: Option<&'a SimulationReport>,
}

#[derive(Serialize)]
struct SweepDocument<'a> {
    design: &'a StudyDesign,
    axis: SweepAxis,
    rows: &'a [SweepRow],
}

fn sizing_document<'a>(
    design: &'a StudyDesign,
    result: &'a SizingResult,
    simulation: Option<&'a SimulationReport>,
) -> SizingDocument<'a> {
    let max = result
        .per_metric
        .iter()
        .map(|r| r.n_test_required)
        .max()
        .unwrap_or(0);
    SizingDocument {
        design,
        per_metric: result
            .per_metric
            .iter()
            .map(|r| PerMetricOut {
                label: &r.target.label,
                kind: r.target.kind,
                anticipated: r.target.anticipated_value,
                prevalence: r.target.prevalence,
                precision: r.target.precision,
                n_events: r.n_events,
                n_test_required: r.n_test_required,
                binding: r.n_test_required == max,
                intermediates: &r.intermediates,
            })
            .collect(),
        n_test: result.n_test,
        n_train: result.n_train,
        n_val: result.n_val,
        n_total: result.n_total,
        n_total_adjusted: result.n_total_adjusted,
        audit: &result.audit,
        simulation,
    }
}

// ---------------------------------------------------------------------------
// csv
// ---------------------------------------------------------------------------

fn csv_escape(field: &str) -> String {
    if field.contains([',', '"', '\n']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

fn csv_line(fields: &[String]) -> String {
    fields
        .iter()
        .map(|f| csv_escape(f))
        .collect::<Vec<_>>()
        .join(",")
}

fn opt_str<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map(|x| x.to_string()).unwrap_or_default()
}

const SIZING_CSV_HEADER: &str = "label,kind,anticipated,prevalence,precision,n_events,\
n_test_required,single_ceiling_alt,binding,n_test,n_train,n_val,n_total,n_total_adjusted";

fn sizing_csv(result: &SizingResult) -> String {
    let max = result
        .per_metric
        .iter()
        .map(|r| r.n_test_required)
        .max()
        .unwrap_or(0);
    let mut out = String::from(SIZING_CSV_HEADER);
    out.push('\n');
    for r in &result.per_metric {
        let fields = vec![
            r.target.label.clone(),
            r.target.kind.default_label().to_string(),
            r.target.anticipated_value.to_string(),
            opt_str(&r.target.prevalence),
            r.target.precision.to_string(),
            r.n_events.to_string(),
            r.n_test_required.to_string(),
            opt_str(&r.intermediates.single_ceiling_alt),
            (r.n_test_required == max).to_string(),
            result.n_test.to_string(),
            result.n_train.to_string(),
            result.n_val.to_string(),
            result.n_total.to_string(),
            result.n_total_adjusted.to_string(),
        ];
        out.push_str(&csv_line(&fields));
        out.push('\n');
    }
    out
}

const SWEEP_CSV_HEADER: &str =
    "axis,value,n_test,n_train,n_val,n_total,n_total_adjusted,binding_metric,error";

fn sweep_csv(table: &SweepTable) -> String {
    let axis = format!("{:?}", table.axis).to_lowercase();
    let mut out = String::from(SWEEP_CSV_HEADER);
    out.push('\n');
    for row in &table.rows {
        let fields = vec![
            axis.clone(),
            row.value.clone(),
            opt_str(&row.n_test),
            opt_str(&row.n_train),
            opt_str(&row.n_val),
            opt_str(&row.n_total),
            opt_str(&row.n_total_adjusted),
            opt_str(&row.binding_metric),
            opt_str(&row.error),
        ];
        out.push_str(&csv_line(&fields));
        out.push('\n');
    }
    out
}

const SIMULATION_CSV_HEADER: &str = "label,kind,ci_method,prevalence_mode,seed,replications,\
n_test,mean_half_width,sd_half_width,p5,p50,p95,attainment_fraction,coverage,\
zero_event_fraction,fixed_event_count,half_width_at_anticipated";

fn simulation_csv(sim: &SimulationReport) -> String {
    let mut out = String::from(SIMULATION_CSV_HEADER);
    out.push('\n');
    for m in &sim.per_metric {
        let fields = vec![
            m.label.clone(),
            m.kind.default_label().to_string(),
            format!("{:?}", sim.ci_method).to_lowercase(),
            format!("{:?}", sim.prevalence_mode).to_lowercase(),
            sim.rng_metadata.seed.to_string(),
            sim.rng_metadata.replications.to_string(),
            sim.n_test.to_string(),
            opt_str(&m.mean_half_width),
            opt_str(&m.sd_half_width),
            opt_str(&m.half_width_percentiles.map(|p| p.p5)),
            opt_str(&m.half_width_percentiles.map(|p| p.p50)),
            opt_str(&m.half_width_percentiles.map(|p| p.p95)),
            m.attainment_fraction.to_string(),
            m.coverage.to_string(),
            m.zero_event_fraction.to_string(),
            opt_str(&m.fixed_event_count),
            opt_str(&m.half_width_at_anticipated),
        ];
        out.push_str(&csv_line(&fields));
        out.push('\n');
    }
    out
}

// ---------------------------------------------------------------------------
// table
// ---------------------------------------------------------------------------

fn fmt6(v: f64) -> String {
    format!("{v:.6}")
}

fn sizing_table(design: &StudyDesign, result: &SizingResult) -> String {
    let mut out = String::new();
    out.push_str("Sample size plan\n");
    out.push_str("================\n");
    if let Some(title) = &design.metadata.title {
        out.push_str(&format!("title            : {title}\n"));
    }
    out.push_str(&format!(
        "confidence level : {}\n",
        design.confidence.level()
    ));
    if design.split.is_test_fraction_form() {
        out.push_str(&format!(
            "split            : test fraction {}\n",
            design.split.test_fraction()
        ));
    } else {
        out.push_str(&format!(
            "split            : train:test ratio {}\n",
            design.split.ratio()
        ));
    }
    if let Some(vf) = design.split.validation_fraction() {
        out.push_str(&format!(
            "validation share : {vf} of the training allocation\n"
        ));
    }
    out.push_str(&format!("dropout          : {}\n", design.dropout));
    out.push('\n');

    out.push_str("Per-metric testing-set requirements\n");
    out.push_str(&format!(
        "{:<20} {:<20} {:>12} {:>11} {:>10} {:>9} {:>8}  {}\n",
        "label", "kind", "anticipated", "prevalence", "precision", "n_events", "n_test", "binding"
    ));
    let max = result
        .per_metric
        .iter()
        .map(|r| r.n_test_required)
        .max()
        .unwrap_or(0);
    for r in &result.per_metric {
        out.push_str(&format!(
            "{:<20} {:<20} {:>12} {:>11} {:>10} {:>9} {:>8}  {}\n",
            r.target.label,
            r.target.kind.default_label(),
            r.target.anticipated_value,
            opt_str(&r.target.prevalence),
            r.target.precision,
            r.n_events,
            r.n_test_required,
            if r.n_test_required == max { "*" } else { "" }
        ));
    }
    if let Some(b) = result.binding {
        out.push_str(&format!(
            "binding metric   : {}\n",
            result.per_metric[b].target.label
        ));
    }
    out.push('\n');

    out.push_str("Sizing\n");
    out.push_str(&format!("  n_test           : {:>10}\n", result.n_test));
    out.push_str(&format!("  n_train          : {:>10}\n", result.n_train));
    out.push_str(&format!("  n_val            : {:>10}\n", result.n_val));
    out.push_str(&format!("  n_total          : {:>10}\n", result.n_total));
    out.push_str(&format!(
        "  n_total_adjusted : {:>10}\n",
        result.n_total_adjusted
    ));
    out.push('\n');

    out.push_str("Audit trail\n");
    for (i, step) in result.audit.iter().enumerate() {
        out.push_str(&format!("  {:>2}. {}\n", i + 1, step.step));
        out.push_str(&format!(
            "      inputs: {} | pre-rounding: {} | result: {}\n",
            step.inputs, step.pre_rounding, step.result
        ));
    }
    out
}

fn simulation_table(sim: &SimulationReport) -> String {
    let mut out = String::new();
    out.push_str("Monte Carlo verification\n");
    out.push_str("========================\n");
    out.push_str(&format!("  n_test       : {}\n", sim.n_test));
    out.push_str(&format!(
        "  ci method    : {}\n",
        format!("{:?}", sim.ci_method).to_lowercase()
    ));
    out.push_str(&format!(
        "  mode         : {}\n",
        format!("{:?}", sim.prevalence_mode).to_lowercase()
    ));
    out.push_str(&format!("  seed         : {}\n", sim.rng_metadata.seed));
    out.push_str(&format!(
        "  replications : {}\n",
        sim.rng_metadata.replications
    ));
    out.push_str(&format!(
        "  generator    : {}\n",
        sim.rng_metadata.generator
    ));
    out.push('\n');
    out.push_str(&format!(
        "{:<20} {:>10} {:>10} {:>10} {:>10} {:>10} {:>8} {:>9} {:>9}\n",
        "metric", "mean_hw", "sd_hw", "p5", "p50", "p95", "attain", "coverage", "zero_ev"
    ));
    for m in &sim.per_metric {
        out.push_str(&format!(
            "{:<20} {:>10} {:>10} {:>10} {:>10} {:>10} {:>8} {:>9} {:>9}\n",
            m.label,
            m.mean_half_width.map(fmt6).unwrap_or_default(),
            m.sd_half_width.map(fmt6).unwrap_or_default(),
            m.half_width_percentiles
                .map(|p| fmt6(p.p5))
                .unwrap_or_default(),
            m.half_width_percentiles
                .map(|p| fmt6(p.p50))
                .unwrap_or_default(),
            m.half_width_percentiles
                .map(|p| fmt6(p.p95))
                .unwrap_or_default(),
            format!("{:.4}", m.attainment_fraction),
            format!("{:.4}", m.coverage),
            format!("{:.4}", m.zero_event_fraction),
        ));
    }
    for m in &sim.per_metric {
        if let (Some(count), Some(hw), Some(ok)) = (
            m.fixed_event_count,
            m.half_width_at_anticipated,
            m.anticipated_attains,
        ) {
            out.push_str(&format!(
                "fixed-mode check [{}]: events {}, half-width at anticipated value {} ({} target {})\n",
                m.label,
                count,
                fmt6(hw),
                if ok { "meets" } else { "misses" },
                m.precision_target,
            ));
        }
    }
    out
}

fn sweep_table_text(table: &SweepTable) -> String {
    let axis = format!("{:?}", table.axis).to_lowercase();
    let mut out = String::new();
    out.push_str(&format!("Sweep over {axis}\n"));
    out.push_str(&format!(
        "{:<14} {:>9} {:>9} {:>7} {:>9} {:>11} {:<18} {}\n",
        "value", "n_test", "n_train", "n_val", "n_total", "adjusted", "binding", "error"
    ));
    for row in &table.rows {
        out.push_str(&format!(
            "{:<14} {:>9} {:>9} {:>7} {:>9} {:>11} {:<18} {}\n",
            row.value,
            opt_str(&row.n_test),
            opt_str(&row.n_train),
            opt_str(&row.n_val),
            opt_str(&row.n_total),
            opt_str(&row.n_total_adjusted),
            opt_str(&row.binding_metric),
            opt_str(&row.error),
        ));
    }
    out
}

impl Report {
    /// Render to the requested format. Structured output is a single JSON
    /// document; CSV has one row per metric (size/verify) or per sweep row.
    pub fn render(&self, format: OutputFormat) -> String {
        match (self, format) {
            (Report::Sizing { design, result }, OutputFormat::Table) => {
                sizing_table(design, result)
            }
            (Report::Sizing { design, result }, OutputFormat::Structured) => {
                let doc = sizing_document(design, result, None);
                let mut s = serde_json::to_string_pretty(&doc).expect("document serializes");
                s.push('\n');
                s
            }
            (Report::Sizing { result, .. }, OutputFormat::Csv) => sizing_csv(result),

            (
                Report::Verification {
                    design,
                    result,
                    simulation,
                },
                OutputFormat::Table,
            ) => {
                let mut s = sizing_table(design, result);
                s.push('\n');
                s.push_str(&simulation_table(simulation));
                s
            }
            (
                Report::Verification {
                    design,
                    result,
                    simulation,
                },
                OutputFormat::Structured,
            ) => {
                let doc = sizing_document(design, result, Some(simulation));
                let mut s = serde_json::to_string_pretty(&doc).expect("document serializes");
                s.push('\n');
                s
            }
            (Report::Verification { simulation, .. }, OutputFormat::Csv) => {
                simulation_csv(simulation)
            }

            (Report::Sweep { table, .. }, OutputFormat::Table) => sweep_table_text(table),
            (Report::Sweep { design, table }, OutputFormat::Structured) => {
                let doc = SweepDocument {
                    design,
                    axis: table.axis,
                    rows: &table.rows,
                };
                let mut s = serde_json::to_string_pretty(&doc).expect("document serializes");
                s.push('\n');
                s
            }
            (Report::Sweep { table, .. }, OutputFormat::Csv) => sweep_csv(table),
        }
    }
}

/// The config/output schemas, printed by the `schema` CLI command.
pub fn schema_text() -> String {
    let mut out = String::new();
    out.push_str("CONFIG SCHEMA (TOML)\n");
    out.push_str("====================\n");
    out.push_str(
        "Top-level keys: metrics (array of tables), confidence (number in (0,1)),\n\
         split (table), dropout (optional rational, default 0), metadata (optional table).\n\n\
         Rational values (prevalence, dropout, split fractions) accept decimal strings\n\
         (\"0.25\"), fractions (\"1/4\"), percents (\"25%\"), or plain numbers, parsed exactly.\n\n\
         [[metrics]]\n\
         kind        = one of: sensitivity | specificity | overall_proportion |\n\
         \x20              class_recall | mean_outcome\n\
         anticipated = anticipated proportion (or outcome standard deviation for\n\
         \x20              mean_outcome)\n\
         prevalence  = condition prevalence; required for sensitivity/specificity\n\
         \x20              (share of the class for class_recall), absent otherwise\n\
         precision   = target CI half-width\n\
         label       = optional free text\n\n\
         [split]\n\
         ratio = train:test ratio, or: test_fraction = testing share of the total\n\
         validation_fraction = optional share of the training allocation\n\n\
         [metadata]\n\
         title = optional, notes = optional\n\n",
    );
    out.push_str("EXAMPLE CONFIG\n");
    out.push_str("==============\n");
    out.push_str(crate::config::example_config());
    out.push('\n');
    out.push_str("STRUCTURED OUTPUT SCHEMA (JSON, fixed key order)\n");
    out.push_str("================================================\n");
    out.push_str(
        "{\n\
         \x20 \"design\":            echo of the parsed design,\n\
         \x20 \"per_metric\":        [{label, kind, anticipated, prevalence?, precision,\n\
         \x20                       n_events, n_test_required, binding, intermediates}],\n\
         \x20 \"n_test\":            overall testing-set size (max over metrics),\n\
         \x20 \"n_train\":           training-set size (after validation carve-out),\n\
         \x20 \"n_val\":             validation carve-out (0 when none),\n\
         \x20 \"n_total\":           n_test + n_train + n_val,\n\
         \x20 \"n_total_adjusted\":  after dropout inflation,\n\
         \x20 \"audit\":             ordered [{step, inputs, pre_rounding, result}],\n\
         \x20 \"simulation\":        (verify only) per-metric half-width distribution,\n\
         \x20                       attainment_fraction, coverage, zero_event_fraction,\n\
         \x20                       and rng_metadata {seed, generator, replications}\n\
         }\n\n\
         CSV columns (size):  ",
    );
    out.push_str(SIZING_CSV_HEADER);
    out.push_str("\nCSV columns (verify): ");
    out.push_str(SIMULATION_CSV_HEADER);
    out.push_str("\nCSV columns (sweep): ");
    out.push_str(SWEEP_CSV_HEADER);
    out.push('\n');
    out
}

/// Echo a design in the config schema (used for round-trip checks and
/// `schema --example`).
pub fn design_to_config(design: &StudyDesign) -> String {
    render_config(design)
}
