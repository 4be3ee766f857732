//! Command-line front end and file formats for `qop-core`.
//!
//! Exit codes: 0 success (including NOT_REALIZABLE and REALIZED), 2 invalid
//! input, 3 INCONCLUSIVE certificate, 4 LIKELY_NOT_REALIZABLE, 5 UNDECIDED.

pub mod args;
pub mod commands;
pub mod files;

pub use args::Cli;
pub use commands::{run, EXIT_INCONCLUSIVE, EXIT_INVALID, EXIT_LIKELY_NOT_REALIZABLE, EXIT_OK, EXIT_UNDECIDED};
