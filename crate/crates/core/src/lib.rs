//! Analysis of time series of signed networks.
//!
//! The crate ingests one signed graph per episode and computes:
//!
//! - topology per snapshot: degree, betweenness, assortativity, and the
//!   correlation structure of those metrics across entities and episodes
//!   ([`metrics`], [`cluster`]);
//! - triad census and structural balance ([`triads`]);
//! - episode-to-episode dynamics: edge changes, triad transitions, imbalance
//!   attribution and the unpredictability score ([`dynamics`]);
//! - a sign-shuffle null model for per-entity imbalance ([`nullmodel`]);
//! - partial rank correlation of network properties against per-episode
//!   viewer responses ([`responses`]);
//! - plot-ready report files for all of the above ([`report`]).
//!
//! Numeric routines are generic over [`Scalar`] (field arithmetic, including
//! exact rationals) or [`Real`] (floating point). The aliases below fix the
//! common instantiations.

pub mod cluster;
pub mod dynamics;
pub mod error;
pub mod graph;
pub mod ingest;
pub mod metrics;
pub mod nullmodel;
pub mod report;
pub mod responses;
pub mod scalar;
pub mod stats;
pub mod synthetic;
pub mod triads;

pub use error::{Error, ErrorKind, Result};
pub use graph::{
    presence_matrix, EntityId, EpisodeKey, EpisodeSeries, Pair, PresenceMatrix, Sign, SignedEdge,
    SignedGraph,
};
pub use ingest::{parse_edge_list, write_edge_list, EdgeListFormat, Ingested};
pub use scalar::{Real, Scalar};

/// Exact rational scalar for counting-based measures.
pub type Exact = num_rational::Ratio<i64>;

pub type MetricTable = metrics::MetricTable<f64>;
pub type MetricTable32 = metrics::MetricTable<f32>;
pub type ExactMetricTable = metrics::MetricTable<Exact>;
pub type CorrelationResult = metrics::CorrelationResult<f64>;
pub type CorrelationResult32 = metrics::CorrelationResult<f32>;
pub type NullDistribution = nullmodel::NullDistribution<f64>;
pub type ResponseSeries = responses::ResponseSeries<f64>;
pub type PartialCorrelation = responses::PartialCorrelation<f64>;
pub type PropertyVector = responses::PropertyVector<f64>;
