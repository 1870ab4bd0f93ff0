use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModelError {
    #[error("invalid site type `{0}`")]
    InvalidSiteType(String),
    #[error("invalid site reference `{0}` (expected <monomer>.<slot>)")]
    InvalidSiteRef(String),
    #[error("monomer {0} has no sites")]
    EmptyMonomer(usize),
    #[error("monomer id {id} out of range for a TBN with {len} monomers")]
    InvalidMonomer { id: usize, len: usize },
    #[error("no monomer with label or index `{0}`")]
    UnknownMonomer(String),
    #[error("label `{0}` names several monomers; select by index instead")]
    AmbiguousLabel(String),
    #[error("monomer {0} carries complementary sites (rejected in strict mode)")]
    SelfComplementary(usize),
    #[error("monomer ordering is not a permutation")]
    InvalidOrdering,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    #[error("malformed token `{0}`")]
    MalformedToken(String),
    #[error("repeat count must be positive, got `{0}`")]
    BadCount(String),
    #[error("monomer has no sites")]
    EmptyMonomer,
    #[error("label `{0}` already used on line {1}")]
    DuplicateLabel(String, usize),
    #[error("malformed DIMACS: {0}")]
    Dimacs(String),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EncodeError {
    #[error("polymer bound must be at least 1, got {0}")]
    InvalidBound(usize),
    #[error("monomer id {0} out of range")]
    InvalidMonomer(usize),
    #[error("decoded configuration is not {0}; the encoding is inconsistent")]
    Decode(&'static str),
    #[error("model does not assign variable {0}")]
    ShortModel(usize),
}

#[derive(Debug, Error)]
pub enum SatError {
    #[error("solver returned a model that falsifies clause {clause}")]
    ModelVerification { clause: usize, output: String },
    #[error("external solver command is empty or lacks a `{{file}}` placeholder: `{0}`")]
    BadCommand(String),
    #[error("failed to run external solver: {0}")]
    Spawn(#[from] std::io::Error),
    #[error("external solver exited with status {status}: {output}")]
    ExitStatus { status: String, output: String },
    #[error("unparseable solver output: {reason}\n{output}")]
    Protocol { reason: String, output: String },
}

#[derive(Debug, Error)]
pub enum QueryError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error(transparent)]
    Sat(#[from] SatError),
    #[error("solver budget exhausted before reaching a verdict")]
    Unknown,
    #[error("internal consistency check failed: {0}")]
    Internal(String),
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("enumeration refused: estimated {estimate:.3e} matchings exceeds the bound {bound}")]
    BoundExceeded { estimate: f64, bound: u64 },
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ReductionError {
    #[error("exact-cover instance has no sets")]
    EmptyInstance,
    #[error("copy count j must be at least 2, got {0}")]
    BadCopyCount(usize),
    #[error("graph has no edges")]
    Edgeless,
    #[error("self-loop on vertex `{0}`")]
    SelfLoop(String),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("tree depth must be at least 1")]
    BadDepth,
    #[error("malformed generator parameter: {0}")]
    Syntax(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}
