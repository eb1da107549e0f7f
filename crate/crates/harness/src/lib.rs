//! Verification harness: seeded trial generation, the experiment suites,
//! reports and the `setval` command line.

pub mod cli;
pub mod config;
pub mod report;
pub mod suites;
pub mod trials;
