//! PlantUML codec: the subset of the language LLMs use for fault trees.
//!
//! Parsing runs in two passes. [`parse_document`] checks line syntax and
//! yields statements; the build pass turns statements into a [`FaultTree`]
//! and reports structural problems against the lines that caused them.

mod build;
mod document;
mod emit;
mod extract;

pub use build::id_from_label;
pub use document::{parse_document, DeclKeyword, Edge, Endpoint, NodeDecl, NotePosition, PumlDocument, Statement};
pub use emit::{emit_plantuml, EmitStyle};
pub use extract::extract_uml_block;

use crate::diagnostic::{has_errors, Diagnostic};
use crate::model::{FaultTree, GateKind};

/// Tree plus any warnings found on the way.
#[derive(Debug, Clone, PartialEq)]
pub struct ParseOutcome {
    pub tree: FaultTree,
    pub warnings: Vec<Diagnostic>,
}

/// Parses PlantUML source into a tree. Connections without a gate circle or
/// label use `default_gate`. Any error-severity finding returns the full
/// diagnostic list instead; syntax errors suppress the structural pass.
pub fn parse_plantuml(source: &str, default_gate: GateKind) -> Result<FaultTree, Vec<Diagnostic>> {
    parse_plantuml_with_warnings(source, default_gate).map(|o| o.tree)
}

pub fn parse_plantuml_with_warnings(source: &str, default_gate: GateKind) -> Result<ParseOutcome, Vec<Diagnostic>> {
    let (doc, diagnostics) = parse_document(source);
    if has_errors(&diagnostics) {
        return Err(diagnostics);
    }
    let (tree, mut warnings) = build::build_tree(&doc, default_gate)?;
    let mut all = diagnostics;
    all.append(&mut warnings);
    Ok(ParseOutcome { tree, warnings: all })
}
