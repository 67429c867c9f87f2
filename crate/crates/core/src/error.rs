use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("antisymmetry violated: {0} <= {1} and {1} <= {0}")]
    AntisymmetryViolation(String, String),

    #[error("unknown element `{0}`")]
    UnknownAtom(String),

    #[error("duplicate element `{0}`")]
    DuplicateAtom(String),

    #[error("value is not down-closed: {0}")]
    NotDownClosed(String),

    #[error("relation violates closure invariants: {0}")]
    ClosureViolation(String),

    #[error("mapping is not monotone: {0}")]
    NotMonotone(String),

    #[error("carrier too large for enumeration: {what} has {size} elements (bound {bound})")]
    CarrierTooLarge {
        what: String,
        size: u128,
        bound: u128,
    },

    #[error("backend mismatch: {0}")]
    BackendMismatch(String),

    #[error("carrier mismatch: {0}")]
    CarrierMismatch(String),

    #[error("square does not commute at {0}")]
    NotCommuting(String),

    #[error("supplies and demands do not balance: {0}")]
    InfeasibleMass(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("dangling reference to {kind} `{name}`")]
    DanglingReference { kind: &'static str, name: String },

    #[error(
        "failure semantics with upgrades is not supported: refusal observations are order reversing, \
         so alpha(k, x) need not be a downward closed set"
    )]
    FailureWithUpgrades,

    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },

    #[error("line {line}: {source}")]
    AtLine {
        line: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn at_line(self, line: usize) -> Error {
        match self {
            e @ (Error::Syntax { .. } | Error::AtLine { .. }) => e,
            e => Error::AtLine {
                line,
                source: Box::new(e),
            },
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
