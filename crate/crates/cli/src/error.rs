use std::path::PathBuf;

use thiserror::Error;

use crate::format::FormatError;
use crate::series::SeriesError;

pub const EXIT_USAGE: i32 = 64;
pub const EXIT_DATAERR: i32 = 65;
pub const EXIT_SOFTWARE: i32 = 70;
pub const EXIT_CANTCREAT: i32 = 73;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),

    #[error(transparent)]
    Format(#[from] FormatError),

    #[error("{0}")]
    Input(String),

    #[error(transparent)]
    Analysis(#[from] qmarkov::Error),

    #[error(transparent)]
    Series(#[from] SeriesError),

    #[error("cannot write {path}: {source}")]
    Write { path: PathBuf, source: std::io::Error },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use qmarkov::Error as E;
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Format(_) | CliError::Input(_) => EXIT_DATAERR,
            CliError::Analysis(e) => match e {
                E::InvalidArgument(_) => EXIT_USAGE,
                E::EigenFailure(_) | E::EmptyNullSpace | E::Integration { .. } | E::ImaginaryExpectation(_) => {
                    EXIT_SOFTWARE
                }
                _ => EXIT_DATAERR,
            },
            CliError::Series(SeriesError::Write { .. }) | CliError::Write { .. } => EXIT_CANTCREAT,
            CliError::Series(_) => EXIT_SOFTWARE,
        }
    }
}
