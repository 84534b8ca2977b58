//! Process exit codes, one per error class.

pub const OK: i32 = 0;
/// Configuration problems: unreadable/invalid config, schema mismatches,
/// inconsistent settings.
pub const CONFIG_ERROR: i32 = 2;
/// Data problems: missing or malformed input files, bad bundles.
pub const DATA_ERROR: i32 = 3;
/// The simulation ran but one or more timesteps failed to solve; the
/// bundle is still written.
pub const TIMESTEP_FAILURES: i32 = 4;
/// Report cross-consistency failure: the bundle disagrees with itself.
/// Signals a bug, not user error.
pub const INCONSISTENT_BUNDLE: i32 = 5;

/// An error that already knows its exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> Self {
        CliError {
            code: CONFIG_ERROR,
            message: message.into(),
        }
    }

    pub fn data(message: impl Into<String>) -> Self {
        CliError {
            code: DATA_ERROR,
            message: message.into(),
        }
    }

    pub fn inconsistent(message: impl Into<String>) -> Self {
        CliError {
            code: INCONSISTENT_BUNDLE,
            message: message.into(),
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.message)
    }
}

impl std::error::Error for CliError {}
