//! samplan: testing-set-first sample size planning for ML studies.
//!
//! Exit codes: 0 success, 1 computation error, 2 input/validation error.

use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use samplan_core::config::{parse_config_file, render_config};
use samplan_core::design::{StudyDesign, StudyMetadata};
use samplan_core::rational::Rational;
use samplan_core::report::{
    run_size, run_sweep, run_verify, schema_text, OutputFormat, Report, SweepAxis, SweepGrid,
};
use samplan_core::simulate::{CiMethod, PrevalenceMode, SimulationConfig};
use samplan_core::sizing::{MetricKind, MetricTarget};
use samplan_core::split::SplitSpec;
use samplan_core::stats::ConfidenceSpec;
use samplan_core::Error;

#[derive(Parser)]
#[command(
    name = "samplan",
    version,
    about = "Plan testing, training, and total sample sizes for ML performance studies",
    after_help = "Example:\n  samplan size --sens 0.85 --spec 0.75 --prev 0.20 \\\n      --precision 0.05 --conf 0.95 --split 75:25"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the sizing plan for a design.
    Size(SizeArgs),
    /// Size the design, then verify it by seeded Monte Carlo simulation.
    Verify(VerifyArgs),
    /// Recompute the plan over a grid of values for one design field.
    Sweep(SweepArgs),
    /// Print the config and output schemas.
    Schema(SchemaArgs),
}

/// Design inputs shared by size/verify/sweep: either a config file, or the
/// binary-diagnostic shorthand flags, with flags overriding config scalars.
#[derive(Args)]
struct DesignArgs {
    /// Study design config file (TOML).
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,

    /// Anticipated sensitivity (shorthand for a sensitivity metric).
    #[arg(long, value_name = "P")]
    sens: Option<String>,

    /// Anticipated specificity (shorthand for a specificity metric).
    #[arg(long, value_name = "P")]
    spec: Option<String>,

    /// Condition prevalence for the shorthand metrics.
    #[arg(long, value_name = "P")]
    prev: Option<String>,

    /// Target CI half-width for the shorthand metrics.
    #[arg(long, value_name = "D")]
    precision: Option<String>,

    /// Two-sided confidence level (default 0.95).
    #[arg(long, value_name = "LEVEL")]
    conf: Option<String>,

    /// Train:test split as TRAIN:TEST (e.g. 75:25 or 3:1).
    #[arg(long, value_name = "TRAIN:TEST")]
    split: Option<String>,

    /// Testing fraction of the total (alternative to --split).
    #[arg(long, value_name = "P")]
    test_fraction: Option<String>,

    /// Share of the training allocation reserved for validation.
    #[arg(long, value_name = "P")]
    val_fraction: Option<String>,

    /// Expected attrition in [0,1); the total is inflated by 1/(1-dropout).
    #[arg(long, value_name = "P")]
    dropout: Option<String>,
}

#[derive(Args)]
struct OutputArgs {
    /// Output format.
    #[arg(long, value_name = "FORMAT", default_value = "table")]
    format: String,

    /// Write the report to a file instead of stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SizeArgs {
    #[command(flatten)]
    design: DesignArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct VerifyArgs {
    #[command(flatten)]
    design: DesignArgs,
    #[command(flatten)]
    output: OutputArgs,

    /// RNG seed.
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Number of Monte Carlo replications.
    #[arg(long, default_value_t = 10_000)]
    replications: u64,

    /// Confidence interval method: wald | wilson.
    #[arg(long, value_name = "METHOD", default_value = "wald")]
    ci: String,

    /// Event-count mode: random (binomial draw) | fixed (round(n*share)).
    #[arg(long, value_name = "MODE", default_value = "random")]
    prevalence_mode: String,

    /// Simulate this testing-set size instead of the computed one.
    #[arg(long, value_name = "N")]
    n_test: Option<u64>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    design: DesignArgs,
    #[command(flatten)]
    output: OutputArgs,

    /// Design field to vary: precision | prevalence | confidence |
    /// anticipated | ratio.
    #[arg(long, value_name = "AXIS")]
    axis: String,

    /// Comma-separated values for the axis.
    #[arg(long, value_name = "V1,V2,...")]
    values: String,
}

#[derive(Args)]
struct SchemaArgs {
    /// Print the current design echoed in the config schema instead.
    #[arg(long)]
    example: bool,
}

fn parse_rational(what: &str, s: &str) -> Result<Rational, Error> {
    s.parse::<Rational>().map_err(|e| Error::Config {
        path: what.to_string(),
        reason: e.to_string(),
    })
}

fn parse_split_flag(s: &str) -> Result<SplitSpec, Error> {
    let (train, test) = s.split_once(':').ok_or_else(|| Error::Config {
        path: "--split".to_string(),
        reason: format!("expected TRAIN:TEST, got '{s}'"),
    })?;
    let train = parse_rational("--split", train)?;
    let test = parse_rational("--split", test)?;
    if !train.is_positive() || !test.is_positive() {
        return Err(Error::Config {
            path: "--split".to_string(),
            reason: "both split parts must be positive".to_string(),
        });
    }
    SplitSpec::from_ratio(train / test).map_err(|e| Error::Config {
        path: "--split".to_string(),
        reason: e.to_string(),
    })
}

/// Assemble the design: config file as the base when given, shorthand metric
/// flags otherwise; scalar flags override config values.
fn build_design(args: &DesignArgs) -> Result<StudyDesign, Error> {
    let mut design = match &args.config {
        Some(path) => Some(parse_config_file(path).map_err(|e| match e {
            Error::Io(io) => Error::Config {
                path: "--config".to_string(),
                reason: format!("cannot read {}: {io}", path.display()),
            },
            other => other,
        })?),
        None => None,
    };

    let shorthand = args.sens.is_some() || args.spec.is_some();
    if shorthand {
        if design.is_some() {
            return Err(Error::Config {
                path: "--sens/--spec".to_string(),
                reason: "metric shorthand flags cannot be combined with --config".to_string(),
            });
        }
        let precision = match &args.precision {
            Some(p) => parse_rational("--precision", p)?.to_f64(),
            None => {
                return Err(Error::Config {
                    path: "--precision".to_string(),
                    reason: "required with --sens/--spec".to_string(),
                })
            }
        };
        let prev = match &args.prev {
            Some(p) => parse_rational("--prev", p)?,
            None => {
                return Err(Error::Config {
                    path: "--prev".to_string(),
                    reason: "required with --sens/--spec".to_string(),
                })
            }
        };
        let mut metrics = Vec::new();
        if let Some(sens) = &args.sens {
            let sens = parse_rational("--sens", sens)?.to_f64();
            metrics.push(
                MetricTarget::new(MetricKind::Sensitivity, sens, Some(prev), precision, "")
                    .map_err(|e| Error::Config {
                        path: "--sens".to_string(),
                        reason: e.to_string(),
                    })?,
            );
        }
        if let Some(spec) = &args.spec {
            let spec = parse_rational("--spec", spec)?.to_f64();
            metrics.push(
                MetricTarget::new(MetricKind::Specificity, spec, Some(prev), precision, "")
                    .map_err(|e| Error::Config {
                        path: "--spec".to_string(),
                        reason: e.to_string(),
                    })?,
            );
        }
        design = Some(StudyDesign {
            metrics,
            confidence: ConfidenceSpec::new(0.95).expect("0.95 is valid"),
            split: SplitSpec::from_ratio(Rational::from_integer(3)).expect("3 is valid"),
            dropout: Rational::zero(),
            metadata: StudyMetadata::default(),
        });
    }

    let mut design = design.ok_or_else(|| Error::Config {
        path: "design".to_string(),
        reason: "give --config, or --sens/--spec shorthand flags".to_string(),
    })?;

    if let Some(conf) = &args.conf {
        let level = parse_rational("--conf", conf)?.to_f64();
        design.confidence = ConfidenceSpec::new(level).map_err(|e| Error::Config {
            path: "--conf".to_string(),
            reason: e.to_string(),
        })?;
    }
    match (&args.split, &args.test_fraction) {
        (Some(_), Some(_)) => {
            return Err(Error::Config {
                path: "--split".to_string(),
                reason: "give either --split or --test-fraction, not both".to_string(),
            })
        }
        (Some(s), None) => design.split = parse_split_flag(s)?,
        (None, Some(p)) => {
            let p = parse_rational("--test-fraction", p)?;
            design.split = SplitSpec::from_test_fraction(p).map_err(|e| Error::Config {
                path: "--test-fraction".to_string(),
                reason: e.to_string(),
            })?;
        }
        (None, None) => {}
    }
    if let Some(vf) = &args.val_fraction {
        let vf = parse_rational("--val-fraction", vf)?;
        design.split = design
            .split
            .with_validation_fraction(vf)
            .map_err(|e| Error::Config {
                path: "--val-fraction".to_string(),
                reason: e.to_string(),
            })?;
    }
    if let Some(dropout) = &args.dropout {
        design.dropout = parse_rational("--dropout", dropout)?;
    }

    design.validate()?;
    Ok(design)
}

fn emit(output: &OutputArgs, text: &str) -> anyhow::Result<()> {
    match &output.out {
        Some(path) => std::fs::write(path, text)
            .with_context(|| format!("writing report to {}", path.display()))?,
        None => print!("{text}"),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), AppError> {
    match cli.command {
        Command::Size(args) => {
            let design = build_design(&args.design)?;
            let format = OutputFormat::from_str(&args.output.format).map_err(validation)?;
            let result = run_size(&design).map_err(computation)?;
            let text = Report::Sizing { design, result }.render(format);
            emit(&args.output, &text)?;
        }
        Command::Verify(args) => {
            let design = build_design(&args.design)?;
            let format = OutputFormat::from_str(&args.output.format).map_err(validation)?;
            let ci_method = match args.ci.as_str() {
                "wald" => CiMethod::Wald,
                "wilson" => CiMethod::Wilson,
                other => {
                    return Err(validation(Error::Config {
                        path: "--ci".to_string(),
                        reason: format!("unknown method '{other}' (expected wald or wilson)"),
                    }))
                }
            };
            let prevalence_mode = match args.prevalence_mode.as_str() {
                "random" => PrevalenceMode::Random,
                "fixed" => PrevalenceMode::Fixed,
                other => {
                    return Err(validation(Error::Config {
                        path: "--prevalence-mode".to_string(),
                        reason: format!("unknown mode '{other}' (expected random or fixed)"),
                    }))
                }
            };
            if args.replications == 0 {
                return Err(validation(Error::Config {
                    path: "--replications".to_string(),
                    reason: "must be at least 1".to_string(),
                }));
            }
            if args.n_test == Some(0) {
                return Err(validation(Error::Config {
                    path: "--n-test".to_string(),
                    reason: "must be at least 1".to_string(),
                }));
            }
            let sim = SimulationConfig {
                seed: args.seed,
                replications: args.replications,
                ci_method,
                prevalence_mode,
            };
            let (result, simulation) =
                run_verify(&design, args.n_test, &sim).map_err(computation)?;
            let text = Report::Verification {
                design,
                result,
                simulation,
            }
            .render(format);
            emit(&args.output, &text)?;
        }
        Command::Sweep(args) => {
            let design = build_design(&args.design)?;
            let format = OutputFormat::from_str(&args.output.format).map_err(validation)?;
            let axis = SweepAxis::from_str(&args.axis).map_err(validation)?;
            let values: Vec<String> = args
                .values
                .split(',')
                .map(|v| v.trim().to_string())
                .filter(|v| !v.is_empty())
                .collect();
            let grid = SweepGrid::new(axis, values).map_err(validation)?;
            let table = run_sweep(&design, &grid).map_err(computation)?;
            let text = Report::Sweep { design, table }.render(format);
            emit(&args.output, &text)?;
        }
        Command::Schema(args) => {
            if args.example {
                let design =
                    samplan_core::config::parse_config(samplan_core::config::example_config())
                        .map_err(computation)?;
                print!("{}", render_config(&design));
            } else {
                print!("{}", schema_text());
            }
        }
    }
    Ok(())
}

/// Error with its exit code already decided.
struct AppError {
    message: String,
    code: u8,
}

impl From<Error> for AppError {
    fn from(e: Error) -> Self {
        let code = if e.is_validation() { 2 } else { 1 };
        AppError {
            message: e.to_string(),
            code,
        }
    }
}

impl From<anyhow::Error> for AppError {
    fn from(e: anyhow::Error) -> Self {
        AppError {
            message: format!("{e:#}"),
            code: 1,
        }
    }
}

fn validation(e: Error) -> AppError {
    AppError {
        message: e.to_string(),
        code: 2,
    }
}

fn computation(e: Error) -> AppError {
    AppError {
        message: e.to_string(),
        code: if e.is_validation() { 2 } else { 1 },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
