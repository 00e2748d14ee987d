use std::fmt;
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Validation,
    Runtime,
}

impl ErrorKind {
    pub fn exit_code(self) -> i32 {
        match self {
            ErrorKind::Validation => 1,
            ErrorKind::Runtime => 2,
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            ErrorKind::Validation => "validation",
            ErrorKind::Runtime => "runtime",
        }
    }
}

/// Failure of a subcommand. Rendered as one line:
/// `error kind=<validation|runtime> code=<CODE> file=<path|-> message="..."`.
#[derive(Debug, Clone, PartialEq)]
pub struct CliError {
    pub kind: ErrorKind,
    pub code: &'static str,
    pub file: Option<PathBuf>,
    pub message: String,
}

impl CliError {
    pub fn validation(code: &'static str, message: impl fmt::Display) -> Self {
        Self {
            kind: ErrorKind::Validation,
            code,
            file: None,
            message: message.to_string(),
        }
    }

    pub fn runtime(code: &'static str, message: impl fmt::Display) -> Self {
        Self {
            kind: ErrorKind::Runtime,
            code,
            file: None,
            message: message.to_string(),
        }
    }

    pub fn at(mut self, file: &Path) -> Self {
        self.file = Some(file.to_path_buf());
        self
    }

    pub fn exit_code(&self) -> i32 {
        self.kind.exit_code()
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let file = match &self.file {
            Some(p) => format!("{:?}", p.display().to_string()),
            None => "-".to_string(),
        };
        write!(
            f,
            "error kind={} code={} file={} message={:?}",
            self.kind.as_str(),
            self.code,
            file,
            self.message
        )
    }
}

impl std::error::Error for CliError {}

pub type CliResult<T> = Result<T, CliError>;

pub fn read_file(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path).map_err(|e| {
        CliError::validation("Unreadable", format!("cannot read {}: {e}", path.display())).at(path)
    })
}

pub fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent).map_err(|e| {
            CliError::runtime("Unwritable", format!("cannot create {}: {e}", parent.display()))
                .at(parent)
        })?;
    }
    std::fs::write(path, contents).map_err(|e| {
        CliError::runtime("Unwritable", format!("cannot write {}: {e}", path.display())).at(path)
    })
}
