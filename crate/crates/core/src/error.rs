//! Crate-wide error type.

use thiserror::Error;

/// Classification of a plane conic by its quadratic part.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConicClass {
    Ellipse,
    Parabola,
    Hyperbola,
    Degenerate,
}

impl std::fmt::Display for ConicClass {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ConicClass::Ellipse => "ellipse",
            ConicClass::Parabola => "parabola",
            ConicClass::Hyperbola => "hyperbola",
            ConicClass::Degenerate => "degenerate",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on an operation's arguments was violated.
    #[error("domain error: {0}")]
    Domain(String),

    /// An input exceeds a resource guard (pair counts, grid sizes, ...).
    #[error("size limit exceeded: {0}")]
    SizeLimit(String),

    /// Variable elimination could not express the dependent coordinates
    /// in the designated free pair.
    #[error("degenerate elimination: {0}")]
    DegenerateElimination(String),

    /// The eliminated curve is not an ellipse.
    #[error("intersection is not an ellipse (got {0})")]
    NonElliptic(ConicClass),

    /// gcd(c1,c2,c3) > 1 after normalization, so the reduced equation has
    /// no integer solutions.
    #[error("no integer solutions: gcd of quadratic coefficients exceeds 1")]
    NoIntegerSolutions,

    /// Malformed artifact input.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn size_limit(msg: impl Into<String>) -> Self {
        Error::SizeLimit(msg.into())
    }

    pub fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
