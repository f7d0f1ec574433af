use std::fmt;

use crate::taxonomy::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invalid UTF-8 at byte offset {offset}")]
    Encoding { offset: usize },

    #[error("taxonomy validation failed:\n{}", ViolationList(.0))]
    Validation(Vec<Violation>),

    #[error("unknown field of study: {0}")]
    UnknownField(String),

    #[error("conflicting duplicate predictions for ids: {}", .0.join(", "))]
    ConflictingPredictions(Vec<String>),

    #[error("record id sets differ; only in gold: [{}]; only in pred: [{}]", .only_gold.join(", "), .only_pred.join(", "))]
    IdMismatch {
        only_gold: Vec<String>,
        only_pred: Vec<String>,
    },

    #[error("degenerate data: {0}")]
    Degenerate(String),

    #[error("non-finite input value at index {0}")]
    NonFinite(usize),

    #[error("normalization undefined: {0}")]
    NormalizationUndefined(String),

    #[error("empty window: {0}")]
    EmptyWindow(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

struct ViolationList<'a>(&'a [Violation]);

impl fmt::Display for ViolationList<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "  - {v}")?;
        }
        Ok(())
    }
}

/// Converts a byte offset into a 1-based (line, column) pair.
pub(crate) fn line_col(src: &str, offset: usize) -> (usize, usize) {
    let mut offset = offset.min(src.len());
    while !src.is_char_boundary(offset) {
        offset -= 1;
    }
    let before = &src[..offset];
    let line = before.matches('\n').count() + 1;
    let column = before.rsplit('\n').next().map_or(0, |s| s.chars().count()) + 1;
    (line, column)
}
