//! Configuration, trace export and the invariant-suite runner.

mod check;
mod config;
mod trace;

pub use check::{run_check, CheckItem, CheckReport, Suite};
pub use config::{apply_override, config_to_json, load_config, parse_config, parse_config_with, split_override};
pub use trace::{
    parse_csv_trace, parse_json_trace, trace_header, trace_to_csv, trace_to_json, write_trace, TraceFormat,
};
