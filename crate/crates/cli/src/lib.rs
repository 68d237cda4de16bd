//! Library side of the verification driver: suite configuration, check
//! records, and the seeded suites themselves. The `invlab` binary is a thin
//! wrapper over [`suites::run_suite`].

pub mod config;
pub mod report;
pub mod suites;
