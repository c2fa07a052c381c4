//! Question selection and sequencing under the cascade browse model.
//!
//! A customer scans an ordered list of questions and, at each slot, answers,
//! skips with "prefer not to answer" (PNA), or leaves. [`evaluator`] computes
//! the expected utility `f(Q)` of a sequence, [`policies`] builds sequences,
//! and [`harness`] runs seeded experiment suites on generated instances.

pub mod assortment;
pub mod error;
pub mod evaluator;
pub mod harness;
pub mod model;
pub mod policies;
pub mod solvers;
pub mod utility;

pub use error::{CascadiaError, Result};
pub use model::{Instance, Question, QuestionId, Sequence, UtilityKind};
pub use utility::UtilityFunction;
