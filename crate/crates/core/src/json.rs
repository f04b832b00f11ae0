//! Canonical JSON persistence of a [`FaultTree`].
//!
//! ```json
//! {"title": "...", "top": "TopEvent", "default_gate": "or",
//!  "nodes": [{"id": "TopEvent", "label": "...", "kind": "top_event",
//!             "gate": {"kind": "or", "children": ["A", "B"]}, "gate_alias": "MainOR"}]}
//! ```
//!
//! Unknown fields are rejected. Nodes are written top first, breadth-first.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::diagnostic::{Diagnostic, Location};
use crate::model::{EventKind, EventNode, FaultTree, GateKind, GateSpec};

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TreeDoc {
    title: String,
    top: String,
    #[serde(default = "default_gate")]
    default_gate: GateKind,
    nodes: Vec<NodeDoc>,
}

fn default_gate() -> GateKind {
    GateKind::Or
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NodeDoc {
    id: String,
    label: String,
    kind: EventKind,
    #[serde(default)]
    gate: Option<GateSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    gate_alias: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    probability: Option<f64>,
}

pub fn to_json(tree: &FaultTree) -> String {
    let mut order: Vec<&str> = tree.bfs_order();
    let listed: BTreeSet<&str> = order.iter().copied().collect();
    order.extend(tree.nodes.keys().map(String::as_str).filter(|id| !listed.contains(id)));
    let doc = TreeDoc {
        title: tree.title.clone(),
        top: tree.top.clone(),
        default_gate: tree.default_gate,
        nodes: order
            .into_iter()
            .map(|id| {
                let n = &tree.nodes[id];
                NodeDoc {
                    id: n.id.clone(),
                    label: n.label.clone(),
                    kind: n.kind.clone(),
                    gate: n.gate.clone(),
                    gate_alias: n.gate_alias.clone(),
                    probability: n.probability,
                }
            })
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("tree documents always serialize");
    text.push('\n');
    text
}

/// Reads a tree document. Syntax and schema problems come back as
/// diagnostics pointing at the offending line; the tree itself is not
/// validated here.
pub fn from_json(text: &str) -> Result<FaultTree, Vec<Diagnostic>> {
    let doc: TreeDoc = serde_json::from_str(text).map_err(|e| {
        let line = e.line().max(1);
        let source = text.lines().nth(line - 1).unwrap_or("").to_string();
        vec![Diagnostic::error(
            "json-schema",
            e.to_string(),
            Location::Line {
                diagram_line: line,
                file_line: line,
                text: source,
            },
        )]
    })?;
    let mut tree = FaultTree::new(doc.title, doc.top);
    tree.default_gate = doc.default_gate;
    let mut diagnostics = Vec::new();
    for n in doc.nodes {
        let id = n.id.clone();
        let node = EventNode {
            id: n.id,
            label: n.label,
            kind: n.kind,
            gate: n.gate,
            gate_alias: n.gate_alias,
            probability: n.probability,
        };
        if tree.insert(node).is_some() {
            diagnostics.push(Diagnostic::error(
                "duplicate-id",
                format!("node id `{id}` appears more than once"),
                Location::Node(id),
            ));
        }
    }
    if diagnostics.is_empty() {
        Ok(tree)
    } else {
        Err(diagnostics)
    }
}
