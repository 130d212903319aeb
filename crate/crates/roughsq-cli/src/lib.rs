//! Batch front end for the roughsq experiments: configuration, the
//! experiment catalogue and artifact writing.

pub mod config;
pub mod experiments;
pub mod runner;
