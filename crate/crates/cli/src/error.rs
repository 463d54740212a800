use std::fmt;

use modelsets::dgp::DgpError;
use modelsets::exploratory::ExploratoryError;
use modelsets::harness::StudyError;
use modelsets::io::IoError;
use modelsets::reduction::ReductionError;
use modelsets::select::SelectError;
use thiserror::Error;

/// What went wrong, coarsely; each kind has its own exit code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Unreadable file, failed bind, and anything else environmental.
    Io,
    /// The configuration or the command line is invalid.
    Config,
    /// The dataset, an artifact or the recorded answers are unusable.
    Data,
    /// The statistics cannot proceed: too few rows, nothing retained, a
    /// model that cannot be fitted.
    Degenerate,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Io => 1,
            ErrorKind::Config => 3,
            ErrorKind::Data => 4,
            ErrorKind::Degenerate => 5,
        }
    }
}

impl fmt::Display for ErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ErrorKind::Io => "i/o error",
            ErrorKind::Config => "config error",
            ErrorKind::Data => "data error",
            ErrorKind::Degenerate => "statistical degeneracy",
        })
    }
}

#[derive(Debug, Error)]
#[error("{stage}: {kind}: {message}")]
pub struct CliError {
    pub stage: &'static str,
    pub kind: ErrorKind,
    pub message: String,
}

impl CliError {
    pub fn new(stage: &'static str, kind: ErrorKind, message: impl fmt::Display) -> Self {
        Self { stage, kind, message: message.to_string() }
    }

    pub fn config(stage: &'static str, message: impl fmt::Display) -> Self {
        Self::new(stage, ErrorKind::Config, message)
    }

    pub fn data(stage: &'static str, message: impl fmt::Display) -> Self {
        Self::new(stage, ErrorKind::Data, message)
    }

    pub fn io(stage: &'static str, message: impl fmt::Display) -> Self {
        Self::new(stage, ErrorKind::Io, message)
    }

    /// A dataset read failure: missing files are i/o, bad contents are data.
    pub fn dataset(stage: &'static str, e: IoError) -> Self {
        match e {
            IoError::Io(_) => Self::io(stage, e),
            _ => Self::data(stage, e),
        }
    }

    pub fn reduction(e: ReductionError) -> Self {
        use ReductionError::*;
        let kind = match e {
            SampleTooSmall { .. } | EmptyRetention { .. } => ErrorKind::Degenerate,
            TooFewIndices(_) | InvalidDimension(_) | InvalidRule(_) | RuleCount { .. } | FamilyMismatch { .. } => {
                ErrorKind::Config
            }
        };
        Self::new("reduce", kind, e)
    }

    pub fn exploratory(e: ExploratoryError) -> Self {
        use ExploratoryError::*;
        let kind = match e {
            SampleTooSmall { .. } => ErrorKind::Degenerate,
            FamilyMismatch { .. } => ErrorKind::Config,
            ColumnMissing(_) | DecisionSourceClosed { .. } => ErrorKind::Data,
        };
        Self::new("explore", kind, e)
    }

    pub fn select(e: SelectError) -> Self {
        use SelectError::*;
        let kind = match e {
            SampleTooSmall { .. } | EmptyModel | ComprehensiveFit(_) => ErrorKind::Degenerate,
            InvalidModelSize | InvalidSignif(_) => ErrorKind::Config,
            ColumnMissing(_) => ErrorKind::Data,
        };
        Self::new("select", kind, e)
    }

    pub fn dgp(e: DgpError) -> Self {
        Self::config("dgp", e)
    }

    pub fn study(e: StudyError) -> Self {
        Self::config("simulate", e)
    }
}
