use std::fmt;

/// One failed parameter constraint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub key: &'static str,
    pub constraint: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.key, self.constraint)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid parameters: {}", join_violations(.0))]
    Validation(Vec<Violation>),

    #[error("config key `{key}`: {message}")]
    Config { key: String, message: String },

    #[error("config document is malformed: {0}")]
    Parse(String),

    #[error("no buyer-seller pairs to price")]
    EmptyMarket,

    #[error("grid point {index} ({label}): {source}")]
    GridPoint {
        index: usize,
        label: String,
        #[source]
        source: Box<Error>,
    },
}

fn join_violations(v: &[Violation]) -> String {
    v.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
