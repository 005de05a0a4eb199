//! Alteration analysis for TEI-encoded manuscripts: ingestion, rule-based
//! alteration classification, the alterLDA topic model, evaluation splits
//! and synthetic validation.

pub mod classify;
pub mod config;
pub mod corpus;
pub mod eval;
pub mod model;
pub mod report;
pub mod synth;
