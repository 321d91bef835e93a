//! Diagnostics shared by every pass. Codes are stable identifiers; renaming one
//! is a breaking change.

use std::fmt;

use serde::Serialize;

use crate::span::{SourceMap, Span};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

macro_rules! codes {
    ($($(#[$doc:meta])* $name:ident,)*) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        #[allow(non_camel_case_types)]
        pub enum Code {
            $($(#[$doc])* $name,)*
        }

        impl Code {
            pub const ALL: &'static [Code] = &[$(Code::$name,)*];

            pub fn as_str(self) -> &'static str {
                match self {
                    $(Code::$name => stringify!($name),)*
                }
            }
        }
    };
}

codes! {
    /// Input is not valid UTF-8.
    E_ENCODING,
    /// Unbalanced parenthesis or bracket.
    E_UNBALANCED,
    E_SYNTAX,
    E_UNKNOWN_SECTION,
    E_DUPLICATE_SECTION,
    E_MISSING_SECTION,
    E_DUPLICATE_ACTION,
    E_BAD_DEPTH,
    E_EMPTY_GROUP,
    E_DOMAIN_MISMATCH,
    E_EFFECT_SHAPE,
    E_UNDECLARED_PREDICATE,
    E_DUPLICATE_PREDICATE,
    E_ARITY,
    E_UNBOUND_VARIABLE,
    E_UNKNOWN_AGENT,
    E_DUPLICATE_AGENT,
    E_UNKNOWN_TYPE,
    E_MISSING_MEP,
    E_UNREPRESENTABLE,
    E_UNSUPPORTED_GOAL,
    E_UNSUPPORTED_FORMULA,
    E_NOT_CONSTRUCTIBLE,
    E_INCONSISTENT_INIT,
    E_PRECONDITION_FAILED,
    E_UNKNOWN_FLUENT,
    /// A search or construction limit was hit.
    E_RESOURCE_EXHAUSTED,
    W_NOT_FINITARY_S5,
    W_DEPTH_EXCEEDED,
    W_ONTIC_PARTIAL_OBSERVERS,
    W_EXECUTOR_NOT_OBSERVANT,
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for Code {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub code: Code,
    pub message: String,
    pub span: Span,
}

impl Diagnostic {
    pub fn error(code: Code, span: Span, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Error,
            code,
            message: message.into(),
            span,
        }
    }

    pub fn warning(code: Code, span: Span, message: impl Into<String>) -> Self {
        Diagnostic {
            severity: Severity::Warning,
            code,
            message: message.into(),
            span,
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }

    /// `severity CODE file:line:col message`
    pub fn render_line(&self, files: &SourceMap) -> String {
        format!(
            "{} {} {}:{}:{} {}",
            self.severity,
            self.code,
            files.name(self.span.file),
            self.span.start.line,
            self.span.start.col,
            self.message
        )
    }

    pub fn to_record(&self, files: &SourceMap) -> DiagnosticRecord {
        DiagnosticRecord {
            kind: "diagnostic",
            severity: self.severity,
            code: self.code,
            file: files.name(self.span.file).to_owned(),
            line: self.span.start.line,
            col: self.span.start.col,
            end_line: self.span.end.line,
            end_col: self.span.end.col,
            message: self.message.clone(),
        }
    }
}

/// One machine-readable diagnostic, serialized as a single JSON object.
#[derive(Debug, Clone, Serialize)]
pub struct DiagnosticRecord {
    pub kind: &'static str,
    pub severity: Severity,
    pub code: Code,
    pub file: String,
    pub line: u32,
    pub col: u32,
    pub end_line: u32,
    pub end_col: u32,
    pub message: String,
}

pub fn has_errors(diags: &[Diagnostic]) -> bool {
    diags.iter().any(Diagnostic::is_error)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::span::{FileId, Pos};

    #[test]
    fn line_format() {
        let mut files = SourceMap::new();
        let id = files.add("coin.epddl");
        let span = Span::new(
            id,
            Pos {
                offset: 10,
                line: 3,
                col: 7,
            },
            Pos {
                offset: 12,
                line: 3,
                col: 9,
            },
        );
        let d = Diagnostic::error(Code::E_EFFECT_SHAPE, span, "bad effect");
        assert_eq!(
            d.render_line(&files),
            "error E_EFFECT_SHAPE coin.epddl:3:7 bad effect"
        );
        let json = serde_json::to_value(d.to_record(&files)).unwrap();
        assert_eq!(json["code"], "E_EFFECT_SHAPE");
        assert_eq!(json["severity"], "error");
        assert_eq!(json["line"], 3);
        let _ = FileId(0);
    }

    #[test]
    fn codes_are_unique() {
        let mut names: Vec<_> = Code::ALL.iter().map(|c| c.as_str()).collect();
        names.sort();
        names.dedup();
        assert_eq!(names.len(), Code::ALL.len());
    }
}
