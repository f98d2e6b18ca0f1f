//! Core algorithms for analysing how a user's graph centrality relates to
//! whether their friends share their home location.
//!
//! The pipeline is:
//!
//! 1. [`geo`]: assign each user a home city by locating geo-tagged posts in
//!    region polygons and taking the modal city, subject to a minimum count.
//! 2. [`graph`]: build a simple directed follow graph over located users.
//! 3. [`centrality`]: in/out-degree, PageRank and HITS authority/hub scores.
//! 4. [`estimator`]: predict each user's city as the modal city of their
//!    mutual followers (leave-one-out) and split users into easy, hard and
//!    unknown groups.
//! 5. [`analysis`]: log-binned score distributions per group and the per-bin
//!    bias `log10(b / a)` of a group against the overall population.
//!
//! [`synth`] provides seeded generators with known ground truth.
//!
//! The crate is `no_std` and only needs `alloc`. File formats, the command
//! line and pipeline orchestration live in the `geoloc` crate.
#![no_std]
#![deny(unsafe_code)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod centrality;
pub mod estimator;
pub mod geo;
pub mod graph;
pub mod synth;

mod ids;

pub use analysis::{BiasSeries, BiasValue, BinSpec, ScoreDistribution};
pub use centrality::{CentralityKind, CentralityScores, IterationParams};
pub use estimator::{EstimationOutcome, EstimationResult, GroupPartition};
pub use geo::{GeoPost, HomeLocationTable, Region, RegionSet};
pub use graph::{GraphStats, SocialGraph};
pub use ids::{CityId, UserId};
