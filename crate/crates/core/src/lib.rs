//! Ensemble combination of per-class classifier confidences.
//!
//! The central rule, [`combiner::combine_negation`], scores each class by the
//! largest accuracy-weighted probability that the ensemble rules the class
//! *out*, and picks the class that is least ruled out. Averaging, a literal
//! product rule and a best-single-model baseline sit alongside it so the
//! rules can be compared on the same data with [`evaluation`].

pub mod combiner;
pub mod error;
pub mod evaluation;
pub mod io;
pub mod synthetic;
pub mod types;

pub use combiner::{
    combine, combine_average, combine_negation, combine_product, combine_top_model, rank_classes,
    top_model_select, weighted_confidence, Decision, Method, TiePolicy,
};
pub use error::{Error, Result};
pub use evaluation::{compare_methods, evaluate_method, AccuracyReport, ComparisonTable, Labels};
pub use types::{ClassId, EnsembleFrame, ModelRecord, PredictionVector};
