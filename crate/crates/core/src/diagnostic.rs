use std::fmt;
use std::ops::Range;

use serde::{Deserialize, Serialize};

/// Half-open byte range into a source string.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub const fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }

    /// Smallest span covering both.
    pub fn to(self, other: Span) -> Span {
        Span::new(self.start.min(other.start), self.end.max(other.end))
    }

    pub fn contains(&self, other: Span) -> bool {
        self.start <= other.start && other.end <= self.end
    }

    pub fn range(&self) -> Range<usize> {
        self.start..self.end
    }

    /// One-based line and column (in characters) of the start in `source`.
    pub fn line_col(&self, source: &str) -> (usize, usize) {
        let before = &source[..self.start.min(source.len())];
        let line = before.matches('\n').count() + 1;
        let col = before.rsplit('\n').next().unwrap_or("").chars().count() + 1;
        (line, col)
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

/// Stable diagnostic identifiers. Fixtures and clients match on the string
/// form, so existing names must never change.
pub mod codes {
    pub const UNTERMINATED_STRING: &str = "unterminated-string";
    pub const UNKNOWN_PRIMITIVE: &str = "unknown-primitive";
    pub const UNKNOWN_IDENTIFIER: &str = "unknown-identifier";
    pub const MISSING_ARGUMENT: &str = "missing-argument";
    pub const UNBALANCED_BLOCK: &str = "unbalanced-block";
    pub const EXPECTED_COMMAND: &str = "expected-command";
    pub const UNEXPECTED_TOKEN: &str = "unexpected-token";
    pub const TYPE_MISMATCH: &str = "type-mismatch";
    pub const NOT_SETTABLE: &str = "not-settable";
    pub const UNSUPPORTED_PRIMITIVE: &str = "unsupported-primitive";
    pub const WRONG_CONTEXT: &str = "wrong-context";

    pub const DIVISION_BY_ZERO: &str = "division-by-zero";
    pub const NEGATIVE_RANDOM: &str = "negative-random";
    pub const NOBODY: &str = "nobody";
    pub const NUMBER_TOO_LARGE: &str = "number-too-large";
    pub const RUNTIME_CONTEXT: &str = "runtime-context";
    pub const RUNTIME_TYPE: &str = "runtime-type";
    pub const STEP_LIMIT: &str = "step-limit";
    pub const TOO_MANY_TURTLES: &str = "too-many-turtles";
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: String,
    pub message: String,
    pub span: Span,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub related: Vec<String>,
}

impl Diagnostic {
    pub fn error(code: &str, message: impl Into<String>, span: Span) -> Self {
        let message = message.into();
        debug_assert!(!message.is_empty());
        Diagnostic {
            severity: Severity::Error,
            code: code.to_owned(),
            message,
            span,
            related: Vec::new(),
        }
    }

    pub fn with_related(mut self, name: impl Into<String>) -> Self {
        self.related.push(name.into());
        self
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{sev}[{}] at {}: {}", self.code, self.span, self.message)
    }
}

#[cfg(test)]
mod tests {
    use super::Span;

    #[test]
    fn line_col_counts_from_one() {
        let src = "fd 1\nask turtle [\n  rt 2 ]";
        assert_eq!(Span::new(0, 2).line_col(src), (1, 1));
        assert_eq!(Span::new(9, 15).line_col(src), (2, 5));
        assert_eq!(Span::new(src.len(), src.len()).line_col(src), (3, 9));
    }
}
