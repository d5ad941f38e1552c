//! File formats, run configuration and experiment harness around
//! [`adr_core`].

pub mod commands;
pub mod config;
pub mod csvio;
pub mod experiments;
