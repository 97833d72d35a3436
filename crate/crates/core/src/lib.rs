//! Proof checking, evidence-term synthesis and finite-model evaluation for
//! the multi-agent justification logic of common knowledge.

use thiserror::Error;

pub mod acceptance;
pub mod cli;
pub mod deduction;
pub mod gen;
pub mod modal;
pub mod oracle;
pub mod semantics;
pub mod synthesis;
pub mod syntax;

/// A configured bound was hit; the answer is unknown rather than false.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum ResourceError {
    #[error("tautology check needs {atoms} atoms, the cap is {cap}")]
    TooManyAtoms { atoms: usize, cap: usize },
    #[error("saturation universe reached {size} entries, the cap is {cap}")]
    UniverseTooLarge { size: usize, cap: usize },
}
