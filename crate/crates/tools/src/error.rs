use std::path::Path;

/// Failure classes of the tool, each with its own exit code.
#[derive(Debug, thiserror::Error)]
pub enum ToolError {
    #[error("config error: {0}")]
    Config(String),
    #[error("data error: {0}")]
    Data(String),
    #[error("criterion not met: {0}")]
    CriterionNotMet(String),
}

impl ToolError {
    pub fn exit_code(&self) -> i32 {
        match self {
            ToolError::Config(_) => 2,
            ToolError::Data(_) => 3,
            ToolError::CriterionNotMet(_) => 4,
        }
    }

    pub(crate) fn io(path: &Path, err: impl std::fmt::Display) -> Self {
        ToolError::Data(format!("{}: {err}", path.display()))
    }
}

impl From<mcc_core::Error> for ToolError {
    fn from(e: mcc_core::Error) -> Self {
        use mcc_core::Error as E;
        match e {
            E::InvalidParameter(_) | E::InfeasibleBand { .. } | E::UnknownChannel(_) => ToolError::Config(e.to_string()),
            _ => ToolError::Data(e.to_string()),
        }
    }
}

pub type Result<T, E = ToolError> = std::result::Result<T, E>;
