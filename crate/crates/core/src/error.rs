use std::path::PathBuf;

use crate::model::ChartType;
use crate::qa::QaKind;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("not found: {0}")]
    NotFound(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("style space exhausted: requested {requested} specs but at most {bound} distinct specs exist")]
    Capacity { requested: usize, bound: usize },

    #[error("data too sparse for QA kinds {0:?}")]
    QaShortfall(Vec<QaKind>),

    #[error("pool too small for {chart_type}: need {needed} distinct charts, have {available}")]
    PoolShortfall {
        chart_type: ChartType,
        needed: usize,
        available: usize,
    },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("manifest checksum mismatch: expected {expected}, computed {computed}")]
    Checksum { expected: String, computed: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
