//! Multi-distribution learning toolkit.
//!
//! The crate covers the whole pipeline for learning one classifier that is
//! simultaneously good on `k` label distributions over a finite domain:
//!
//! * [`domain`] holds the value types (families, hypotheses, classifiers).
//! * [`metrics`] computes exact errors, the min-max benchmark `OPT`, biases
//!   and shattering facts by enumeration.
//! * [`learner`] is a Hedge-over-distributions randomized learner with an
//!   exhaustive ERM oracle.
//! * [`derand`] turns the learner's mixture into a single deterministic
//!   classifier: majority labels on strongly biased points, independent
//!   rounding everywhere else.
//! * [`hash`] replaces the per-point rounding table by an `r`-wise
//!   independent polynomial hash.
//! * [`discrepancy`] builds the matrix-to-distributions reduction that makes
//!   derandomization hard when conditional labels differ across members.
//! * [`gen`] produces reproducible instances; [`harness`] runs trials and
//!   campaigns; [`io`] reads and writes the file formats.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod derand;
pub mod discrepancy;
pub mod domain;
pub mod error;
pub mod gen;
pub mod harness;
pub mod hash;
pub mod io;
pub mod learner;
pub mod metrics;
pub mod rng;

pub use derand::{derandomize, BiasTable, DerandConfig, DerandMode, DerandOutcome, RoundingKind};
pub use discrepancy::{BinaryMatrix, Coloring, ReductionFamily};
pub use domain::{
    DeterministicClassifier, DistributionFamily, Domain, Hypothesis, HypothesisClass, Label,
    LabeledDistribution, Labeling, RandomizedClassifier,
};
pub use error::{Error, Result};
pub use hash::{CompactClassifier, PolyHash};
pub use learner::{hedge_learn, HedgeConfig, SampleOracle};
pub use metrics::ErrorReport;
