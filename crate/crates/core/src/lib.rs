//! Multiple-query retrieval by Pareto-front depth.
//!
//! Each query is ranked independently with efficient manifold ranking
//! ([`emr`]); every database item then becomes a point of per-query
//! dissimilarities, the points are peeled into Pareto fronts ([`pareto`]),
//! and items are returned front by front, starting from the most balanced
//! member of each front ([`engine`]). [`eval`] holds the multiple-query
//! relevance metrics and experiment protocol, and [`asymptotics`] measures
//! the large-sample behaviour of Pareto depth.

pub mod asymptotics;
pub mod cli;
pub mod data;
pub mod emr;
pub mod engine;
pub mod error;
pub mod eval;
pub mod pareto;
pub mod service;

pub use error::{Error, Result};
