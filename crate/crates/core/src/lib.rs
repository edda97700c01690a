//! Scoring linear attribute orders on binary data.
//!
//! An order is good when dependent attributes sit close to each other. This
//! crate measures that by fitting, for a given order, the best order-sensitive
//! segment model under BIC ([`segmodel::optimal_cover`]), induces candidate
//! orders with spectral and greedy methods ([`induce`]), and compares orders
//! against uniformly random ones ([`significance`]).

pub mod dataset;
pub mod entropy;
pub mod error;
pub mod experiment;
pub mod induce;
pub mod order;
pub mod segmodel;
pub mod significance;

pub use dataset::{BinaryDataset, SyntheticKind};
pub use entropy::EntropyCache;
pub use error::{Error, Result};
pub use order::Order;
pub use segmodel::{CoverScore, Segment, SegmentCover};
