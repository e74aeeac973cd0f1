//! Error category to exit-code mapping.
//!
//! 0 success, 2 usage/config, 3 io/format, 4 precondition, 5 divergence,
//! 1 anything else. Failures print `error[category]: message` on stderr.

use asad_data::DataError;

pub struct CliError {
    pub category: &'static str,
    pub exit_code: i32,
    pub message: String,
}

pub type Result<T> = std::result::Result<T, CliError>;

impl CliError {
    pub fn usage(message: impl Into<String>) -> Self {
        CliError {
            category: "config",
            exit_code: 2,
            message: message.into(),
        }
    }

    pub fn io(message: impl Into<String>) -> Self {
        CliError {
            category: "io",
            exit_code: 3,
            message: message.into(),
        }
    }

    pub fn check(message: impl Into<String>) -> Self {
        CliError {
            category: "check",
            exit_code: 1,
            message: message.into(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::io(e.to_string())
    }
}

impl From<DataError> for CliError {
    fn from(e: DataError) -> Self {
        let (category, exit_code) = match &e {
            DataError::Diverged { .. } => ("divergence", 5),
            DataError::Io(_)
            | DataError::BadMagic(_)
            | DataError::BadVersion(_)
            | DataError::Truncated { .. }
            | DataError::Csv { .. }
            | DataError::BadLabel { .. }
            | DataError::NonFiniteSample { .. } => ("format", 3),
            DataError::WrongRate { .. }
            | DataError::TooFewWindows { .. }
            | DataError::EmptyEval
            | DataError::InconsistentTrials { .. } => ("precondition", 4),
            DataError::Dsp(_) => ("precondition", 4),
            DataError::Topo(_) => ("precondition", 4),
            DataError::Model(_) => ("precondition", 4),
            DataError::Nn(_) => ("internal", 1),
        };
        CliError {
            category,
            exit_code,
            message: e.to_string(),
        }
    }
}

impl From<asad_dsp::DspError> for CliError {
    fn from(e: asad_dsp::DspError) -> Self {
        CliError {
            category: "precondition",
            exit_code: 4,
            message: e.to_string(),
        }
    }
}

impl From<asad_topo::TopoError> for CliError {
    fn from(e: asad_topo::TopoError) -> Self {
        CliError {
            category: "precondition",
            exit_code: 4,
            message: e.to_string(),
        }
    }
}

impl From<asad_models::ModelError> for CliError {
    fn from(e: asad_models::ModelError) -> Self {
        let code = match &e {
            asad_models::ModelError::Io(_)
            | asad_models::ModelError::BadMagic(_)
            | asad_models::ModelError::BadVersion(_)
            | asad_models::ModelError::Truncated { .. } => 3,
            _ => 4,
        };
        CliError {
            category: if code == 3 { "format" } else { "precondition" },
            exit_code: code,
            message: e.to_string(),
        }
    }
}
