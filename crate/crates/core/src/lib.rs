//! Psychometric evaluation of language models on multiple-choice benchmarks.
//!
//! The pipeline runs in four stages, each a module here:
//!
//! - [`benchmark`]: ingest question pools, label topics, draw a stratified set.
//! - [`harness`]: query chat-completion providers under a fixed protocol,
//!   score answers strictly and journal every response.
//! - [`irt`]: fit one 2PL model per topic and score abilities.
//! - [`analysis`]: rankings, efficiency ratios, the Pareto frontier and item audits.
//!
//! [`bundle::ResultBundle`] serializes the results for reports and the explorer.

pub mod analysis;
pub mod benchmark;
pub mod bundle;
pub mod cli;
pub mod config;
pub mod harness;
pub mod irt;
pub mod pipeline;
pub mod report;
pub mod serve;
pub mod topic;

pub use topic::Topic;
