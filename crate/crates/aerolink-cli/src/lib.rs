//! Library side of the `aerolink` binary: configuration schema, error
//! classification and file emitters. Exposed so integration tests can parse
//! `--dump-config` output into the typed configuration.

pub mod config;
pub mod error;
pub mod output;

pub use error::CliError;
