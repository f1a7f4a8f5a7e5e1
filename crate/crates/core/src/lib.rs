//! Synthetic chart question-answering data: raw chart data from shared
//! templates, styled renders, computed QA records, filtering, benchmark
//! packaging and evaluation metrics.

pub mod bench;
pub mod datagen;
pub mod error;
pub mod filter;
pub mod model;
pub mod numfmt;
mod par;
pub mod metrics;
pub mod pipeline;
pub mod qa;
pub mod render;
pub mod review;
pub mod rng;
pub mod stylegen;

pub use error::{Error, Result};
pub use model::{ChartData, ChartType, StyleSpec};
