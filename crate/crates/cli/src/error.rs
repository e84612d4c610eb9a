use std::path::PathBuf;

use diracep::{AnalysisError, LinalgError, ModelError};
use thiserror::Error;

pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_UNRESOLVED: i32 = 4;
pub const EXIT_PRECONDITION: i32 = 5;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot write {path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("serialisation failed: {0}")]
    Serialize(String),
}

fn linalg_code(e: &LinalgError) -> i32 {
    match e {
        LinalgError::InvalidTolerance(_) | LinalgError::LengthMismatch(..) => EXIT_CONFIG,
        LinalgError::NotAnEigenvalue(_) => EXIT_PRECONDITION,
        _ => EXIT_NUMERICAL,
    }
}

fn model_code(e: &ModelError) -> i32 {
    match e {
        ModelError::InvalidParameter { .. } | ModelError::InvalidShifts => EXIT_CONFIG,
        ModelError::Linalg(l) => linalg_code(l),
        _ => EXIT_NUMERICAL,
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Read { .. } | CliError::Write { .. } => EXIT_CONFIG,
            CliError::Serialize(_) => EXIT_NUMERICAL,
            CliError::Model(e) => model_code(e),
            CliError::Analysis(e) => match e {
                AnalysisError::NotDegenerate { .. } | AnalysisError::WrongMultiplicity(_) => {
                    EXIT_PRECONDITION
                }
                AnalysisError::InvalidInput(_)
                | AnalysisError::TooFewRadii { .. }
                | AnalysisError::DimensionMismatch(..)
                | AnalysisError::TauNotOne(_) => EXIT_CONFIG,
                AnalysisError::Linalg(l) => linalg_code(l),
                AnalysisError::Model(m) => model_code(m),
            },
        }
    }
}
