//! Command-line harness for the two-product inventory library:
//! scenario configuration, capacity sweeps, CSV reports and the full
//! numerical validation suite.

pub mod config;
pub mod report;
pub mod sweep;
pub mod validate;
