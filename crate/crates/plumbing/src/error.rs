use thiserror::Error;

use crate::graph::VertexId;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("duplicate vertex id `{0}`")]
    DuplicateId(VertexId),
    #[error("reference to unknown vertex `{0}`")]
    DanglingReference(VertexId),
    #[error("edge `{0}`-`{0}` would be a loop")]
    SelfLoop(VertexId),
    #[error("edge `{0}`-`{1}` already present")]
    MultiEdge(VertexId, VertexId),
    #[error("vertex `{0}` has nonzero genus")]
    NonzeroGenus(VertexId),
    #[error("graph is not connected")]
    Disconnected,
    #[error("graph is not a tree")]
    NotATree,
    #[error("intersection form is not negative definite")]
    NotNegativeDefinite,
    #[error("linear system has no solution")]
    SingularInconsistent,
    #[error("blowup locus missing: {0}")]
    MissingLocus(String),
    #[error("vertex `{0}` cannot be blown down: {1}")]
    NotBlowdownable(VertexId, &'static str),
    #[error("invalid move sequence: {0}")]
    InvalidSequence(String),
    #[error("embedding does not match the graph: {0}")]
    DimensionMismatch(String),
    #[error("embedding fails verification: {0}")]
    UnverifiedEmbedding(String),
    #[error("search budget exhausted: {0}")]
    BudgetExceeded(String),
    #[error("divisor pairs positively with `{0}`")]
    NotInLipmanCone(VertexId),
    #[error("divisor is not integral: {0}")]
    NonIntegral(String),
    #[error("divisor has non-positive coefficient at `{0}`")]
    NonPositive(VertexId),
    #[error("arrows inconsistent with divisor: {0}")]
    InconsistentArrows(String),
    #[error("{0} and {1} are not coprime")]
    NotCoprime(u64, u64),
    #[error("no arrow of multiplicity {1} at `{0}`")]
    MissingArrow(VertexId, u64),
    #[error("factorization is not admissible: {0}")]
    Inadmissible(String),
    #[error("classes come from different factorizations")]
    MixedContexts,
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("internal consistency check failed: {0}")]
    Internal(String),
}
