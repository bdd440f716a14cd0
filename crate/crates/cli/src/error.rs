use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("validation error: {0}")]
    Validation(String),
    #[error("{0} check(s) failed")]
    CheckFailed(usize),
    #[error("numeric error: {0}")]
    Numeric(String),
}

impl CliError {
    pub fn parse(path: &Path, e: &serde_json::Error) -> Self {
        CliError::Parse(format!("{}:{}:{}: {e}", path.display(), e.line(), e.column()))
    }

    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Parse(_) => 1,
            CliError::Validation(_) => 2,
            CliError::CheckFailed(_) => 3,
            CliError::Numeric(_) => 4,
        }
    }
}

macro_rules! numeric_from {
    ($($t:ty),*) => {$(
        impl From<$t> for CliError {
            fn from(e: $t) -> Self {
                CliError::Numeric(e.to_string())
            }
        }
    )*};
}

numeric_from!(
    sectorange::numkernel::NumError,
    sectorange::range::RangeError,
    sectorange::field::FieldError,
    sectorange::fem::FemError,
    sectorange::calculus::CalcError,
    sectorange::pform::PformError
);
