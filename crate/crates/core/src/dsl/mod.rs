//! The `.sol` text format.
//!
//! ```text
//! structure coin {
//!   level 1 {
//!     entity E_c [in];
//!     rel R;
//!   }
//!   level 2 {
//!     entity E_h of R [out];
//!     entity E_t of R [out];
//!     rel R_h of R [opaque, alt=sides, p=1/2];
//!     rel R_t of R [opaque, alt=sides, p=1/2];
//!   }
//!   denote E_h => R_h;
//!   denote E_t => R_t;
//! }
//! ```
//!
//! `#` starts a comment. `of X` names the parent one level up, `alt=G` puts a
//! relationship in alternative group `G`, `p=` takes a decimal or a fraction.
//! [`serialize`] writes the canonical form: two-space indentation, entities
//! before relationships within a level, insertion order otherwise, exact
//! fractions.

mod lexer;
mod parser;

use std::fmt;
use std::fmt::Write as _;

pub use parser::{parse_with_warnings, ParseOutput};

use crate::algebra::{Role, StructureOfLevels};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SourceSpan {
    /// 1-based.
    pub line: usize,
    /// 1-based, counted in characters.
    pub column: usize,
    pub length: usize,
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseDiagnostic {
    pub span: SourceSpan,
    pub message: String,
    pub severity: Severity,
}

impl ParseDiagnostic {
    pub fn error(span: SourceSpan, message: impl Into<String>) -> Self {
        Self {
            span,
            message: message.into(),
            severity: Severity::Error,
        }
    }

    pub fn warning(span: SourceSpan, message: impl Into<String>) -> Self {
        Self {
            span,
            message: message.into(),
            severity: Severity::Warning,
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for ParseDiagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{}: {tag}: {}", self.span, self.message)
    }
}

/// Parses every structure in `source`. Fails with the full diagnostic list
/// (warnings included) when any error is found.
pub fn parse(source: &str) -> std::result::Result<Vec<StructureOfLevels>, Vec<ParseDiagnostic>> {
    let output = parse_with_warnings(source);
    if output.has_errors() {
        Err(output.diagnostics)
    } else {
        Ok(output.structures)
    }
}

/// Like [`parse_with_warnings`] for raw bytes; invalid UTF-8 is reported as a
/// diagnostic at the first bad byte.
pub fn parse_bytes(bytes: &[u8]) -> ParseOutput {
    match std::str::from_utf8(bytes) {
        Ok(source) => parse_with_warnings(source),
        Err(err) => {
            let valid = std::str::from_utf8(&bytes[..err.valid_up_to()]).unwrap_or_default();
            let line = valid.matches('\n').count() + 1;
            let column = valid.rsplit('\n').next().map_or(0, |l| l.chars().count()) + 1;
            ParseOutput {
                structures: Vec::new(),
                diagnostics: vec![ParseDiagnostic::error(
                    SourceSpan {
                        line,
                        column,
                        length: 1,
                    },
                    "source is not valid UTF-8",
                )],
            }
        }
    }
}

/// Canonical text of one structure.
pub fn serialize(s: &StructureOfLevels) -> Result<String> {
    let violations = s.validate();
    if !violations.is_empty() {
        return Err(Error::InvalidStructure(violations));
    }
    let mut out = String::new();
    writeln!(out, "structure {} {{", s.name()).unwrap();
    for (index, level) in s.levels().iter().enumerate() {
        writeln!(out, "  level {} {{", index + 1).unwrap();
        for e in &level.entities {
            write!(out, "    entity {}", e.id).unwrap();
            if let Some(parent) = &e.parent {
                write!(out, " of {parent}").unwrap();
            }
            match e.role {
                Role::Plain => {}
                Role::Input => out.push_str(" [in]"),
                Role::Output => out.push_str(" [out]"),
            }
            out.push_str(";\n");
        }
        for r in &level.relationships {
            write!(out, "    rel {}", r.id).unwrap();
            if let Some(parent) = &r.parent {
                write!(out, " of {parent}").unwrap();
            }
            let mut attrs = Vec::new();
            if r.opaque {
                attrs.push("opaque".to_string());
            }
            if let Some(tag) = &r.alt_group {
                attrs.push(format!("alt={tag}"));
            }
            if let Some(p) = &r.probability {
                attrs.push(format!("p={p}"));
            }
            if !attrs.is_empty() {
                write!(out, " [{}]", attrs.join(", ")).unwrap();
            }
            out.push_str(";\n");
        }
        out.push_str("  }\n");
    }
    for d in s.denotations() {
        writeln!(out, "  denote {} => {};", d.outcome, d.relation).unwrap();
    }
    out.push_str("}\n");
    Ok(out)
}

/// Canonical text of a whole file: structures separated by one blank line.
pub fn serialize_all(structures: &[StructureOfLevels]) -> Result<String> {
    let parts = structures
        .iter()
        .map(serialize)
        .collect::<Result<Vec<_>>>()?;
    Ok(parts.join("\n"))
}
