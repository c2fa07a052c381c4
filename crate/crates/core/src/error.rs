use thiserror::Error;

use crate::model::Violation;

pub type Result<T> = std::result::Result<T, CascadiaError>;

#[derive(Debug, Error)]
pub enum CascadiaError {
    #[error("instance failed validation: {}", format_violations(.0))]
    Validation(Vec<Violation>),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("unknown attribute id {0}")]
    UnknownAttribute(i64),

    #[error("unknown question id {0}")]
    UnknownQuestion(i64),

    #[error("variant `{variant}` requires {what}")]
    MissingData { variant: &'static str, what: &'static str },

    #[error("question {0} is already in the conditioning set")]
    QuestionInSet(usize),

    #[error("exact enumeration over {size} items exceeds the limit of {limit}")]
    ExactLimit { size: usize, limit: usize },

    #[error("exact optimum refused: estimated {estimated:.3e} steps exceeds cap {cap:.3e}")]
    ComputeCap { estimated: f64, cap: f64 },

    #[error("rho must lie in (0, 1], got {0}")]
    InvalidRho(f64),

    #[error("kappa must lie in [-1, 1], got {0}")]
    InvalidKappa(f64),

    #[error("infeasible cell: p_answer + p_pna = {0} > 1")]
    InfeasibleCell(f64),

    #[error("sequence is invalid: {0}")]
    InvalidSequence(String),

    #[error("in cell {cell}: {source}")]
    InCell {
        cell: String,
        #[source]
        source: Box<CascadiaError>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn format_violations(v: &[Violation]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join("; ")
}

impl CascadiaError {
    /// Process exit status: 3 for compute refusals, 1 for I/O, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CascadiaError::ComputeCap { .. } | CascadiaError::ExactLimit { .. } => 3,
            CascadiaError::InCell { source, .. } => source.exit_code(),
            CascadiaError::Io(_) => 1,
            _ => 2,
        }
    }
}
