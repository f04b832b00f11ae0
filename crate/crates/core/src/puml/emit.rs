//! Tree to PlantUML text, in the two layouts seen in practice.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::Write;

use crate::error::Result;
use crate::model::{EventKind, EventNode, FaultTree, GateKind};
use crate::validate::ensure_valid;

use super::build::id_from_label;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EmitStyle {
    /// Plain `--` connections; gate kinds other than the default are written
    /// as edge labels.
    Flat,
    /// Every gate is a `circle` between the event and its inputs.
    #[default]
    Gated,
}

/// Writes `tree` as PlantUML. The output parses back to a structurally equal
/// tree when read with the tree's own default gate.
pub fn emit_plantuml(tree: &FaultTree, style: EmitStyle) -> Result<String> {
    ensure_valid(tree)?;
    Ok(match style {
        EmitStyle::Flat => emit_flat(tree),
        EmitStyle::Gated => emit_gated(tree),
    })
}

fn header(out: &mut String, tree: &FaultTree) {
    if tree.title.is_empty() {
        out.push_str("@startuml\n\n");
    } else {
        let _ = writeln!(out, "@startuml {}\n", tree.title);
    }
}

fn declaration(node: &EventNode) -> String {
    let keyword = match node.kind {
        EventKind::Basic | EventKind::Intermediate | EventKind::TopEvent => "rectangle",
        EventKind::Conditioning => "usecase",
        EventKind::External => "cloud",
        EventKind::Undeveloped => "card",
        EventKind::TransferIn(_) | EventKind::TransferOut => "file",
    };
    match &node.kind {
        EventKind::TransferIn(target) => format!("{keyword} \"{}\" as {} [[{target}]]", node.label, node.id),
        _ => format!("{keyword} \"{}\" as {}", node.label, node.id),
    }
}

/// Node ids in emission order: reachable nodes breadth-first, then the rest.
fn ordered(tree: &FaultTree) -> Vec<&str> {
    let mut order = tree.bfs_order();
    let seen: HashSet<&str> = order.iter().copied().collect();
    order.extend(tree.nodes.keys().map(String::as_str).filter(|id| !seen.contains(id)));
    order
}

fn emit_flat(tree: &FaultTree) -> String {
    let mut out = String::new();
    header(&mut out, tree);
    out.push_str("skinparam packageStyle rectangle\nskinparam linetype ortho\n\n");
    let order = ordered(tree);
    for id in &order {
        let _ = writeln!(out, "{}", declaration(&tree.nodes[*id]));
    }
    out.push('\n');

    let mut kinds = BTreeSet::new();
    for id in &order {
        let Some(gate) = &tree.nodes[*id].gate else { continue };
        kinds.insert(gate.kind);
        let label = if gate.kind == tree.default_gate {
            String::new()
        } else {
            format!(" : {}", gate.kind.token())
        };
        for child in gate.operands() {
            let _ = writeln!(out, "{id} -- {child}{label}");
        }
        out.push('\n');
    }

    if !kinds.is_empty() {
        let _ = writeln!(out, "note bottom of {}", tree.top);
        if tree.default_gate == GateKind::Or && kinds.iter().all(|k| *k == GateKind::Or) {
            out.push_str("  All connections represent OR gates\n");
            out.push_str("  Any lower-level event can cause\n");
            out.push_str("  the higher-level failure\n");
        } else {
            let _ = writeln!(out, "  Unlabeled connections represent {} gates", tree.default_gate.token());
        }
        out.push_str("end note\n\n");
    }
    out.push_str("@enduml\n");
    out
}

/// Leaves written inline as `(label)` read back with the same id.
fn inline_leaves(tree: &FaultTree) -> HashSet<&str> {
    let mut label_counts: BTreeMap<&str, usize> = BTreeMap::new();
    for n in tree.nodes.values() {
        *label_counts.entry(n.label.as_str()).or_default() += 1;
    }
    tree.nodes
        .values()
        .filter(|n| {
            n.kind == EventKind::Basic
                && n.id != tree.top
                && n.label == n.label.trim()
                && !n.label.contains(['(', ')', '"'])
                && id_from_label(&n.label) == n.id
                && label_counts[n.label.as_str()] == 1
        })
        .map(|n| n.id.as_str())
        .collect()
}

fn gate_names(tree: &FaultTree, order: &[&str]) -> BTreeMap<String, String> {
    let mut taken: HashSet<String> = tree.nodes.keys().cloned().collect();
    let mut names = BTreeMap::new();
    // Keep usable aliases first so generated names never steal them.
    for id in order {
        let node = &tree.nodes[*id];
        if let (Some(_), Some(alias)) = (&node.gate, &node.gate_alias) {
            if !taken.contains(alias) {
                taken.insert(alias.clone());
                names.insert(id.to_string(), alias.clone());
            }
        }
    }
    for id in order {
        let node = &tree.nodes[*id];
        let Some(gate) = &node.gate else { continue };
        if names.contains_key(*id) {
            continue;
        }
        let base = format!("{id}{}", gate.kind.token());
        let mut candidate = base.clone();
        let mut n = 2;
        while taken.contains(&candidate) {
            candidate = format!("{base}{n}");
            n += 1;
        }
        taken.insert(candidate.clone());
        names.insert(id.to_string(), candidate);
    }
    names
}

fn emit_gated(tree: &FaultTree) -> String {
    let mut out = String::new();
    header(&mut out, tree);
    out.push_str("skinparam rectangle {\n    roundCorner 25\n}\n\n");
    let order = ordered(tree);
    let inline = inline_leaves(tree);
    let names = gate_names(tree, &order);

    let _ = writeln!(out, "{}\n", declaration(&tree.nodes[&tree.top]));
    let gated: Vec<&str> = order.iter().copied().filter(|id| tree.nodes[*id].gate.is_some()).collect();
    if !gated.is_empty() {
        for id in &gated {
            let _ = writeln!(out, "circle {}", names[*id]);
        }
        out.push('\n');
    }
    let others: Vec<&str> = order
        .iter()
        .copied()
        .filter(|id| *id != tree.top && !inline.contains(id))
        .collect();
    if !others.is_empty() {
        for id in &others {
            let _ = writeln!(out, "{}", declaration(&tree.nodes[*id]));
        }
        out.push('\n');
    }

    let mut kinds = BTreeSet::new();
    for id in &gated {
        let gate = tree.nodes[*id].gate.as_ref().expect("filtered on gate");
        kinds.insert(gate.kind);
        let name = &names[*id];
        let _ = writeln!(out, "{id} -down-> {name} : {}", gate.kind.token());
        for child in gate.operands() {
            if inline.contains(child) {
                let _ = writeln!(out, "{name} -down-> ({})", tree.nodes[child].label);
            } else {
                let _ = writeln!(out, "{name} -down-> {child}");
            }
        }
        out.push('\n');
    }

    if !kinds.is_empty() {
        let _ = writeln!(out, "note right of {}", tree.top);
        let listed = [GateKind::Or, GateKind::And, GateKind::Xor, GateKind::PriorityAnd, GateKind::Inhibit];
        for kind in listed.into_iter().filter(|k| kinds.contains(k)) {
            let t = kind.token();
            let _ = writeln!(out, "  Circles labeled '{t}' represent {t} gates");
        }
        out.push_str("end note\n\n");
    }
    out.push_str("@enduml\n");
    out
}
