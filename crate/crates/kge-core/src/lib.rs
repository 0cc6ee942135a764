//! Knowledge graph embedding toolkit.
//!
//! The pipeline runs from raw inputs to analysis artifacts: ingest triples
//! and social user records, score user credibility per domain and drop
//! spammers' facts, split the graph deterministically, train one of five
//! embedding models from scratch, evaluate it under the filtered ranking
//! protocol, calibrate scores for triple classification, and export
//! clustering / projection files.
//!
//! The `kge` binary wires these modules into subcommands; see the crate
//! README for the end-to-end walkthrough.

pub mod analytics;
pub mod cli;
pub mod credibility;
pub mod error;
pub mod evaluation;
pub mod fixture;
pub mod ingest;
pub mod kg;
pub mod matrix;
pub mod models;
pub mod training;

pub use error::{Error, Result};
