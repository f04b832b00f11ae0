//! Findings produced by parsing and validation, and their text rendering.

use std::fmt;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "Error",
            Severity::Warning => "Warning",
        })
    }
}

/// Where a finding points.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Location {
    /// A source line. `diagram_line` counts from the `@startuml` line (1-based),
    /// `file_line` from the start of the file (1-based).
    Line {
        diagram_line: usize,
        file_line: usize,
        text: String,
    },
    /// A node of an already-built tree.
    Node(String),
    /// The document as a whole.
    Document,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    /// Short kebab-case rule name, e.g. `gate-arity`.
    pub rule: String,
    pub message: String,
    pub location: Location,
}

impl Diagnostic {
    pub fn new(
        severity: Severity,
        rule: impl Into<String>,
        message: impl Into<String>,
        location: Location,
    ) -> Self {
        Diagnostic {
            severity,
            rule: rule.into(),
            message: message.into(),
            location,
        }
    }

    pub fn error(rule: impl Into<String>, message: impl Into<String>, location: Location) -> Self {
        Self::new(Severity::Error, rule, message, location)
    }

    pub fn warning(rule: impl Into<String>, message: impl Into<String>, location: Location) -> Self {
        Self::new(Severity::Warning, rule, message, location)
    }

    pub fn at_node(severity: Severity, rule: &str, node: &str, message: impl Into<String>) -> Self {
        Self::new(severity, rule, message, Location::Node(node.to_string()))
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }

    pub fn diagram_line(&self) -> Option<usize> {
        match &self.location {
            Location::Line { diagram_line, .. } => Some(*diagram_line),
            _ => None,
        }
    }

    pub fn file_line(&self) -> Option<usize> {
        match &self.location {
            Location::Line { file_line, .. } => Some(*file_line),
            _ => None,
        }
    }

    pub fn offending_text(&self) -> Option<&str> {
        match &self.location {
            Location::Line { text, .. } => Some(text),
            _ => None,
        }
    }

    pub fn node(&self) -> Option<&str> {
        match &self.location {
            Location::Node(id) => Some(id),
            _ => None,
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render_diagnostic(self))
    }
}

/// Renders the three-line block used by the PlantUML previewer:
///
/// ```text
/// Syntax Error? (@ Diagram Line 26, File Line 27)
/// "HardwareOR -- rectangle "Detector malfunction""
/// (Error)
/// ```
///
/// Findings without a source line use the same shape, naming the node (or
/// the document) in the header and quoting the message instead of a line.
pub fn render_diagnostic(d: &Diagnostic) -> String {
    let (header, quoted) = match &d.location {
        Location::Line {
            diagram_line,
            file_line,
            text,
        } => (
            format!("Syntax Error? (@ Diagram Line {diagram_line}, File Line {file_line})"),
            text.trim_end_matches(['\r', '\n']).to_string(),
        ),
        Location::Node(id) => (format!("Validation Error? (@ Node {id})"), d.message.clone()),
        Location::Document => ("Syntax Error? (@ Document)".to_string(), d.message.clone()),
    };
    format!("{header}\n\"{quoted}\"\n({})\n", d.severity)
}

/// Renders every diagnostic back to back.
pub fn render_all(diagnostics: &[Diagnostic]) -> String {
    diagnostics.iter().map(render_diagnostic).collect()
}

pub fn has_errors(diagnostics: &[Diagnostic]) -> bool {
    diagnostics.iter().any(Diagnostic::is_error)
}
