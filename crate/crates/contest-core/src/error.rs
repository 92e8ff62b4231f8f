use alloc::string::String;
use core::fmt;

/// Errors surfaced by the core library.
///
/// The variants follow the failure taxonomy used by the CLI: structural
/// errors (mismatched or malformed inputs), domain errors (parameters
/// outside their admissible range), resource errors (enumeration caps),
/// and infeasibility.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// Inputs that do not fit together: domain mismatches, wrong lengths,
    /// indices outside the grid.
    Structural(String),
    /// A parameter outside its admissible range (budget not in (0,1),
    /// negative masses, non-convex costs, ...).
    Domain(String),
    /// An enumeration cap was exceeded.
    Resource {
        what: String,
        limit: usize,
        requested: usize,
    },
    /// The constraint system admits no solution.
    Infeasible(String),
    /// The operation is not defined for this input class.
    Unsupported(String),
}

pub type Result<T> = core::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Structural(msg) => write!(f, "structural error: {msg}"),
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::Resource {
                what,
                limit,
                requested,
            } => write!(f, "resource cap exceeded: {what} (limit {limit}, requested {requested})"),
            Error::Infeasible(msg) => write!(f, "infeasible: {msg}"),
            Error::Unsupported(msg) => write!(f, "unsupported: {msg}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for Error {}
