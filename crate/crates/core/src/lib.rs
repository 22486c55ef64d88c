//! Affective-response signals for feed ranking.
//!
//! Posts are weakly labeled from their comments ([`care`]) and from viewer
//! engagement ([`dataset`]), a two-tower multi-label model learns to predict
//! those labels ([`model`]), and the content tower's embedding feeds a staged
//! ranking pipeline ([`ranker`]). [`analysis`] holds the evaluation metrics.

pub mod analysis;
pub mod care;
pub mod cli;
pub mod corpus;
pub mod dataset;
pub mod io;
pub mod model;
pub mod ranker;
pub mod text;
