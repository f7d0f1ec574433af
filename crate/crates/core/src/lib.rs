//! Field-of-study labeling and research-trend analytics for bibliographic corpora.
//!
//! The crate is organised as a small pipeline:
//!
//! - [`taxonomy`]: the multi-parent field-of-study DAG and its keywords.
//! - [`corpus`]: record parsing, title normalisation, deduplication and filtering.
//! - [`labeler`]: keyword and fuzzy-match weak labeling, ancestor propagation,
//!   import of externally produced predictions.
//! - [`eval`]: micro-averaged precision/recall/F1 for multi-label predictions.
//! - [`trends`]: annual series, the growth-share matrix (with a Yeo-Johnson
//!   transform per axis) and innovation life-cycle positions.
//! - [`plot`]: deterministic SVG rendering of the matrix and the life-cycle curve.

pub mod corpus;
pub mod error;
pub mod eval;
pub mod labeler;
pub mod plot;
pub mod taxonomy;
pub mod trends;

pub use corpus::{CorpusStats, FilterConfig, LabelSet, PaperRecord, Provenance};
pub use error::{Error, Result};
pub use eval::{LabelMap, Prf};
pub use labeler::{MatchReport, MatcherConfig};
pub use taxonomy::{FieldOfStudy, Taxonomy, Violation};
pub use trends::{
    AnnualSeries, LifecycleComponents, LifecyclePoint, MatrixPoint, Quadrant, WindowSpec,
    YjParams,
};
