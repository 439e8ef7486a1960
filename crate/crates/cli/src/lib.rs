//! Config files, report emission and command dispatch for the `unitroot` tool.

pub mod config;
pub mod report;
pub mod run;

pub use config::{emit_config, parse_config, Caps, Command, InstanceConfig, KappaSpec};
pub use report::{format_padic, RunReport};
pub use run::run;

use unitroot_core::Error;

/// Process exit status for a module error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config { .. } => 2,
        Error::Precision(_) | Error::Truncation(_) | Error::UnitRoot(_) | Error::Recovery(_) => 3,
        _ => 1,
    }
}
