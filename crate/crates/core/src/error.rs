use thiserror::Error;

/// Errors raised by the covering machinery.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    /// An argument lies outside the domain where a function family is defined.
    #[error("domain error: {0}")]
    Domain(String),

    /// Malformed textual input (rationals, function specs, ...).
    #[error("parse error: {0}")]
    Parse(String),

    /// A structurally invalid argument, e.g. a zero leading coefficient.
    #[error("invalid input: {0}")]
    Invalid(String),

    /// A requested level exceeds the configured resource cap.
    #[error("level {level} exceeds the configured cap {cap}")]
    ResourceCap { level: u32, cap: u32 },

    /// A search ran past its cap without finding what it looked for.
    #[error("not found below cap {cap}: {what}")]
    NotFound { what: String, cap: u32 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
