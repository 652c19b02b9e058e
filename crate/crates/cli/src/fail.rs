use std::fmt;
use std::io;

use hopdb::bitparallel::BpError;
use hopdb::extmem::{ExtmemError, FormatError};
use hopdb::labeling::BuildError;
use hopdb::query::QueryError;
use hopdb::report::ReportError;
use hopdb::GraphError;

pub const VALIDATION: u8 = 1;
pub const IO: u8 = 2;
pub const VERIFICATION: u8 = 3;

/// A failed command, classified by exit code.
#[derive(Debug)]
pub enum Fail {
    Validation(String),
    Io(String),
    Verification(String),
}

impl Fail {
    pub fn code(&self) -> u8 {
        match self {
            Fail::Validation(_) => VALIDATION,
            Fail::Io(_) => IO,
            Fail::Verification(_) => VERIFICATION,
        }
    }

    /// Prefixes the message with what was being done.
    pub fn context(self, what: impl fmt::Display) -> Fail {
        match self {
            Fail::Validation(m) => Fail::Validation(format!("{what}: {m}")),
            Fail::Io(m) => Fail::Io(format!("{what}: {m}")),
            Fail::Verification(m) => Fail::Verification(format!("{what}: {m}")),
        }
    }
}

impl fmt::Display for Fail {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Fail::Validation(m) | Fail::Io(m) | Fail::Verification(m) => f.write_str(m),
        }
    }
}

impl From<io::Error> for Fail {
    fn from(e: io::Error) -> Self {
        Fail::Io(e.to_string())
    }
}

impl From<GraphError> for Fail {
    fn from(e: GraphError) -> Self {
        match e {
            GraphError::Parse { .. } | GraphError::Validation(_) => Fail::Validation(e.to_string()),
            GraphError::Format(_) | GraphError::Io(_) => Fail::Io(e.to_string()),
        }
    }
}

impl From<BuildError> for Fail {
    fn from(e: BuildError) -> Self {
        Fail::Validation(e.to_string())
    }
}

impl From<FormatError> for Fail {
    fn from(e: FormatError) -> Self {
        match e {
            FormatError::DistTooWide { .. } => Fail::Validation(e.to_string()),
            _ => Fail::Io(e.to_string()),
        }
    }
}

impl From<ExtmemError> for Fail {
    fn from(e: ExtmemError) -> Self {
        match e {
            ExtmemError::Budget(_) | ExtmemError::GroupExceedsBudget { .. } => Fail::Validation(e.to_string()),
            ExtmemError::Build(b) => b.into(),
            ExtmemError::Format(f) => f.into(),
            ExtmemError::Locked(_) | ExtmemError::Io(_) => Fail::Io(e.to_string()),
        }
    }
}

impl From<BpError> for Fail {
    fn from(e: BpError) -> Self {
        match e {
            BpError::Verification { .. } => Fail::Verification(e.to_string()),
            _ => Fail::Validation(e.to_string()),
        }
    }
}

impl From<QueryError> for Fail {
    fn from(e: QueryError) -> Self {
        match e {
            QueryError::OutOfRange { .. } => Fail::Validation(e.to_string()),
            QueryError::Io(_) => Fail::Io(e.to_string()),
        }
    }
}

impl From<ReportError> for Fail {
    fn from(e: ReportError) -> Self {
        Fail::Io(e.to_string())
    }
}
