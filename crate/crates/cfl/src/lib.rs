//! Front end of the toolkit: the system-definition language, the analyses
//! behind each `cfl` command and their reports.
//!
//! ```
//! use cfl::{run, Command, Options, SystemFile};
//!
//! let file = SystemFile::parse(
//!     "system double_integrator\nstates x1, x2\ncontrols u\node x1 = x2\node x2 = u\n",
//! )
//! .unwrap();
//! let report = run(Command::Flags, &file, &Options::default()).unwrap();
//! assert_eq!(report.get("rdt"), Some("[[2,0],[3,1,1],[4,4]]"));
//! assert_eq!(report.get("status"), Some("decided"));
//! ```

pub mod dsl;
pub mod report;
pub mod run;

use std::path::Path;

use thiserror::Error;

pub use dsl::{DslError, Spanned, SubConnectionDecl, SystemFile, SystemKind};
pub use report::{Entry, Report};
pub use run::{run, Command, Options};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CliError {
    #[error("{path}: {msg}")]
    Io { path: String, msg: String },
    #[error("{path}: {err}")]
    Load { path: String, err: DslError },
    #[error(transparent)]
    Dsl(#[from] DslError),
    #[error(transparent)]
    Geom(#[from] geomcore::GeomError),
    #[error(transparent)]
    Flag(#[from] flags::FlagError),
    #[error(transparent)]
    Goursat(#[from] goursat::GoursatError),
    #[error(transparent)]
    Symmetry(#[from] symmetry::SymmetryError),
    #[error(transparent)]
    Cascade(#[from] cascade::CascadeError),
    #[error("unknown command `{0}` (expected one of: {commands})", commands = Command::NAMES.join(", "))]
    UnknownCommand(String),
    #[error("missing data: {0}")]
    Missing(String),
    #[error("invalid option: {0}")]
    Option(String),
    #[error("malformed report at line {line}: {msg}")]
    Report { line: usize, msg: String },
}

impl CliError {
    /// Errors that mean "could not decide" rather than "invalid".
    pub fn is_undecided(&self) -> bool {
        matches!(
            self,
            CliError::Symmetry(symmetry::SymmetryError::Undecided(_)) | CliError::Cascade(cascade::CascadeError::Undecided(_))
        )
    }

    /// Process exit code: 2 for undecided, 1 for every other error.
    pub fn exit_code(&self) -> i32 {
        if self.is_undecided() {
            2
        } else {
            1
        }
    }
}

/// Read and validate a system file.
pub fn load(path: impl AsRef<Path>) -> Result<SystemFile, CliError> {
    let path = path.as_ref();
    let shown = path.display().to_string();
    let src = std::fs::read_to_string(path).map_err(|e| CliError::Io {
        path: shown.clone(),
        msg: e.to_string(),
    })?;
    SystemFile::parse(&src).map_err(|err| CliError::Load { path: shown, err })
}
