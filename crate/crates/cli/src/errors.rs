//! Exit-code policy and the machine-readable error object printed on stderr.
//!
//! Codes: 0 success; 2 invalid input (usage, parse, schema or invariant
//! violations); 3 incompatible or degenerate data; 4 context not
//! trigonometric without `--allow-hyperbolic`; 5 I/O failure.

use qlstat_core::contextual::Violation;
use qlstat_core::Error as CoreError;

pub const EXIT_INVALID: i32 = 2;
pub const EXIT_DEGENERATE: i32 = 3;
pub const EXIT_NOT_TRIGONOMETRIC: i32 = 4;
pub const EXIT_IO: i32 = 5;

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub kind: &'static str,
    pub message: String,
    pub violations: Vec<Violation>,
}

impl CliError {
    pub fn new(code: i32, kind: &'static str, message: impl Into<String>) -> Self {
        Self {
            code,
            kind,
            message: message.into(),
            violations: Vec::new(),
        }
    }

    pub fn invalid(message: impl Into<String>) -> Self {
        Self::new(EXIT_INVALID, "invalid", message)
    }

    pub fn schema(message: impl Into<String>, violations: Vec<Violation>) -> Self {
        Self {
            code: EXIT_INVALID,
            kind: "schema",
            message: message.into(),
            violations,
        }
    }

    pub fn degenerate(message: impl Into<String>) -> Self {
        Self::new(EXIT_DEGENERATE, "degenerate", message)
    }

    pub fn not_trigonometric(message: impl Into<String>) -> Self {
        Self::new(EXIT_NOT_TRIGONOMETRIC, "not-trigonometric", message)
    }

    pub fn io(path: &std::path::Path, err: &std::io::Error) -> Self {
        Self::new(EXIT_IO, "io", format!("{}: {err}", path.display()))
    }

    pub fn parse(path: &std::path::Path, err: impl std::fmt::Display) -> Self {
        Self::new(EXIT_INVALID, "parse", format!("{}: {err}", path.display()))
    }

    /// Human-readable line plus a machine-readable JSON object, both on
    /// stderr.
    pub fn emit(&self) {
        eprintln!("error: {}", self.message);
        let object = serde_json::json!({
            "error": {
                "code": self.code,
                "kind": self.kind,
                "message": self.message,
                "violations": self.violations,
            }
        });
        eprintln!("{object}");
    }
}

impl From<CoreError> for CliError {
    fn from(err: CoreError) -> Self {
        let message = err.to_string();
        match err {
            CoreError::DegenerateDenominator { .. } | CoreError::EmptyFiltration { .. } => {
                Self::degenerate(message)
            }
            CoreError::NotTrigonometric { .. } | CoreError::NotHyperbolic { .. } => {
                Self::not_trigonometric(message)
            }
            CoreError::Invalid(violations) => Self::schema(message, violations),
            _ => Self::invalid(message),
        }
    }
}
