//! Deterministic simulator of hierarchical federated learning with
//! validator vetting.
//!
//! Nodes train local linear models on private shards and ship encrypted
//! updates through a content-addressed vault to their validator. Each
//! validator aggregates its federation, vets the other validators'
//! proposals with from-scratch Local Outlier Factor novelty detection,
//! and votes in Snowball consensus, one instance per proposal. Opinions
//! land on a hash-chained ledger; the coordinator then builds the global
//! model either by averaging the accepted proposals or, when fewer than
//! ζ were accepted, by a trust-derived influence weighting over all of
//! them. A label-flipping attack model and an undefended FedAvg baseline
//! round out the experiment harness.
//!
//! Everything is seeded: a master seed pins datasets, partitions, key
//! generation, consensus polling, and therefore every report byte.

pub mod cli;
pub mod config;
pub mod data;
pub mod fedavg;
pub mod ledger;
pub mod lof;
pub mod model;
pub mod orchestrator;
pub mod output;
pub mod seed;
pub mod snowball;
pub mod trust;
pub mod vault;

pub use data::{AttackConfig, Dataset, SyntheticSpec};
pub use model::{Metrics, ModelKind, TrainConfig, WeightVector};
pub use orchestrator::{ExperimentConfig, RoundReport, Topology};
pub use snowball::ConsensusParams;
pub use trust::{GenerationPath, InfluenceBreakdown, OpinionMatrix};
