//! Cloud service brokerage pipeline: QoS ingestion, clustering-derived
//! decision labels, fuzzy-rough all-reducts search-space reduction,
//! two-level weighting, weighted-Euclidean ranking and a broker simulator.

pub mod casestudy;
pub mod clustering;
pub mod discernibility;
pub mod error;
pub mod model;
pub mod pipeline;
pub mod ranking;
pub mod reduct;
pub mod registry;
pub mod sim;

pub use error::{Error, Result};
