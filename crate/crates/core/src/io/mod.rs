//! File formats: CSV histories, TOML run configuration and JSON reports.

pub mod config;
pub mod csv;
pub mod report;

pub use self::config::{load_axiom_config, RunConfig};
pub use self::csv::{export_history, load_history, CsvPaths, LoadedHistory, SourceMap};
