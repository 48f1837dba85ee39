use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SyntaxError {
    #[error("invalid atom name {0:?}")]
    InvalidAtom(String),
    #[error("reserved name {0:?} used as an atom")]
    ReservedName(String),
    #[error("empty disjunction")]
    EmptyDisjunction,
    #[error("syntax error at byte {offset}: expected one of [{}], found {found}", expected.join(", "))]
    Unexpected {
        offset: usize,
        expected: Vec<String>,
        found: String,
    },
    #[error("reserved name {name:?} cannot appear as {sign}{name} (byte {offset})")]
    ReservedSigned { offset: usize, sign: char, name: String },
}

impl SyntaxError {
    /// Byte offset of a parse failure, when the error came from the parser.
    pub fn offset(&self) -> Option<usize> {
        match self {
            SyntaxError::Unexpected { offset, .. } | SyntaxError::ReservedSigned { offset, .. } => {
                Some(*offset)
            }
            _ => None,
        }
    }
}

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("trace of length {len} exceeds the naive evaluator limit of {limit}")]
    TooLong { len: usize, limit: usize },
    #[error("atom \"end\" appears at instant {index} but the trace ends at {last}")]
    EndNotFinal { index: usize, last: usize },
    #[error("line {line}: {source}")]
    Json {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("enumeration bounds exceeded: {atoms} atoms (max {max_atoms}), length {max_len} (max {max_len_limit})")]
pub struct SizeGuardError {
    pub atoms: usize,
    pub max_len: usize,
    pub max_atoms: usize,
    pub max_len_limit: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SmError {
    #[error("symbolic module stepped after the episode finished")]
    StateDone,
}
