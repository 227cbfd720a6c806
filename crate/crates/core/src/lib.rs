//! Sample size planning for machine learning studies that are evaluated on a
//! held-out testing set.
//!
//! The planning flow sizes the testing set first: each performance metric
//! (sensitivity, specificity, a class recall, an overall proportion, or a
//! continuous mean) gets the smallest testing-set size that estimates it to a
//! target confidence-interval half-width, the binding metric determines the
//! overall `n_test`, and the train:test split specification then yields
//! `n_train` and the total recruitment target. A seeded Monte Carlo verifier
//! reports what the plan actually delivers: the distribution of attained
//! half-widths, the probability of meeting the precision target, and CI
//! coverage.
//!
//! Modules:
//! - [`stats`]: normal distribution primitives and binomial interval half-widths
//! - [`rational`]: exact rational arithmetic for split fractions and shares
//! - [`sizing`]: per-metric testing-set requirements
//! - [`split`]: train/test/validation split planning and dropout inflation
//! - [`design`]: the declarative study design
//! - [`simulate`]: seeded Monte Carlo verification
//! - [`config`]: study design config parsing and rendering
//! - [`report`]: sizing/sweep execution and table / structured / CSV output
//! - [`reference`]: slow independent implementations backing the test suites

pub mod config;
pub mod design;
pub mod error;
pub mod rational;
pub mod reference;
pub mod report;
pub mod simulate;
pub mod sizing;
pub mod split;
pub mod stats;

pub use design::{StudyDesign, StudyMetadata};
pub use error::Error;
pub use rational::Rational;
pub use report::{OutputFormat, Report, SweepAxis, SweepGrid};
pub use simulate::{CiMethod, PrevalenceMode, SimulationConfig, SimulationReport};
pub use sizing::{MetricKind, MetricRequirement, MetricTarget};
pub use split::{SizingResult, SplitSpec};
pub use stats::ConfidenceSpec;

/// Crate result alias.
pub type Result<T> = std::result::Result<T, Error>;
