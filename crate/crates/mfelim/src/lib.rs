//! Backward feature elimination for kernel SVMs.
//!
//! The crate trains soft-margin kernel SVMs, then strips features one at a
//! time using a family of elimination criteria: margin-preserving scans
//! (`basic-mfe`, `mfe-slack`, `mfe-hybrid`), light-retraining criteria built
//! on an exact 1-d SVM (`mfe-qp-emb`) or a two-parameter hard-margin rescale
//! (`mfe-lo-emb`), radius-weighted variants driven by a VC-style risk bound
//! (`bmfe-qp-emb`, `bme-qp-emb`, `bmfe-slack`), and weight-based `rfe`. Any
//! criterion can be paired with full SVM retraining after each removal
//! (`-frsub`). The [`experiment`] module runs seeded trials over a dataset
//! and aggregates test-error-versus-retained-features curves.

pub mod dataset;
pub mod elim;
pub mod experiment;
pub mod kernel;
pub mod oned;
pub mod svm;

pub use dataset::{make_folds, make_trial, Dataset, TrialSplit};
pub use elim::{run_elimination, BoundaryState, EliminationTrace, Method, StepDecision};
pub use experiment::{run_experiment, CurveTable, ExperimentConfig};
pub use kernel::{radius_sq, KernelConfig, KernelKind, PairQuery, PairStats};
pub use oned::{solve_1d, solve_1d_oracle, solve_lo, LoOutcome, OneDSolution, ProjectedData};
pub use svm::{cv_select, test_error, train, SmoSettings, SvmModel};

/// A training point counts as separating the data only if its functional
/// margin exceeds this tolerance.
pub const SEPARABILITY_TOL: f64 = 1e-9;

/// Multipliers above `SV_THRESHOLD_FACTOR * C` count as support vectors.
pub const SV_THRESHOLD_FACTOR: f64 = 1e-8;

/// Confidence parameter of the expected-risk bound.
pub const RISK_BOUND_ETA: f64 = 0.05;

/// Crate-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("solver did not converge after {iterations} iterations (kkt gap {gap:.3e})")]
    NonConvergence { iterations: u64, gap: f64 },
    #[error("no candidate elimination preserves separability")]
    SeparabilityExhausted,
    #[error("no candidate elimination yields separable projections")]
    LoInapplicable,
    #[error("no admissible elimination candidate")]
    NoAdmissibleCandidate,
    #[error("elimination step {step} (retained {retained}): {source}")]
    StepFailed {
        step: usize,
        retained: usize,
        #[source]
        source: Box<Error>,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Errors that end an elimination trace early instead of failing the run.
    pub fn halts_trace(&self) -> bool {
        matches!(
            self,
            Error::SeparabilityExhausted | Error::LoInapplicable | Error::NoAdmissibleCandidate
        )
    }
}
