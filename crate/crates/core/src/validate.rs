//! Structural checks over a [`FaultTree`].

use std::collections::{BTreeMap, BTreeSet, HashMap};

use crate::diagnostic::{Diagnostic, Location, Severity};
use crate::error::{FtaError, Result};
use crate::model::{is_valid_id, EventKind, FaultTree, GateKind};

fn err(rule: &str, node: &str, message: String) -> Diagnostic {
    Diagnostic::at_node(Severity::Error, rule, node, message)
}

/// Checks every tree, node and gate invariant. One diagnostic per violation,
/// in a deterministic order; an empty result means the tree is valid.
///
/// Gates with a single regular input are reported as warnings: they are
/// legal pass-throughs in practice (a category with one sub-event) but break
/// the arity rule of the standard symbols.
pub fn validate_tree(tree: &FaultTree) -> Vec<Diagnostic> {
    let mut out = Vec::new();

    if tree.title.contains(['\n', '\r']) || tree.title != tree.title.trim() {
        out.push(Diagnostic::error(
            "invalid-title",
            format!("title {:?} must be a single trimmed line", tree.title),
            Location::Document,
        ));
    }
    if tree.default_gate == GateKind::Inhibit {
        out.push(Diagnostic::error(
            "default-gate",
            "INHIBIT cannot be the default gate: it needs an explicit condition",
            Location::Document,
        ));
    }

    let mut condition_refs: HashMap<&str, usize> = HashMap::new();
    let mut regular_refs: HashMap<&str, usize> = HashMap::new();
    for node in tree.nodes.values() {
        if let Some(gate) = &node.gate {
            for c in &gate.children {
                *regular_refs.entry(c).or_default() += 1;
            }
            if let Some(c) = &gate.condition {
                *condition_refs.entry(c).or_default() += 1;
            }
        }
    }

    let mut aliases: BTreeMap<&str, &str> = BTreeMap::new();
    for (key, node) in &tree.nodes {
        let id = key.as_str();
        if *key != node.id {
            out.push(err("id-mismatch", id, format!("node stored under `{key}` has id `{}`", node.id)));
        }
        if !is_valid_id(id) {
            out.push(err(
                "invalid-id",
                id,
                format!("id `{id}` must be non-empty and use only ASCII letters, digits and `_`"),
            ));
        }
        if node.label.trim().is_empty() {
            out.push(err("empty-label", id, format!("`{id}` has an empty label")));
        } else if node.label.chars().any(|c| c == '"' || c.is_control()) {
            out.push(err(
                "invalid-label",
                id,
                format!("label of `{id}` contains a quote or control character"),
            ));
        }
        if let Some(p) = node.probability {
            if !(0.0..=1.0).contains(&p) {
                out.push(err("probability-range", id, format!("probability {p} of `{id}` is outside [0, 1]")));
            }
        }
        if let Some(alias) = &node.gate_alias {
            if !is_valid_id(alias) {
                out.push(err("invalid-gate-alias", id, format!("gate alias `{alias}` is not a valid identifier")));
            } else if tree.nodes.contains_key(alias) {
                out.push(err("gate-alias-conflict", id, format!("gate alias `{alias}` is also a node id")));
            } else if let Some(other) = aliases.insert(alias, id) {
                out.push(err(
                    "gate-alias-conflict",
                    id,
                    format!("gate alias `{alias}` is already used by the gate of `{other}`"),
                ));
            }
        }

        match &node.kind {
            EventKind::TransferIn(target) => {
                if target.trim().is_empty() {
                    out.push(err("empty-transfer-target", id, format!("transfer `{id}` names no target tree")));
                } else if target.contains([']', '\n', '\r']) || *target != target.trim() {
                    out.push(err(
                        "invalid-transfer-target",
                        id,
                        format!("transfer target {target:?} must be a trimmed single line without `]`"),
                    ));
                }
            }
            EventKind::TopEvent if *key != tree.top => {
                out.push(err(
                    "extra-top-event",
                    id,
                    format!("`{id}` is a top event but the tree's top is `{}`", tree.top),
                ));
            }
            EventKind::Conditioning => {
                if regular_refs.contains_key(id) {
                    out.push(err(
                        "misplaced-conditioning",
                        id,
                        format!("conditioning event `{id}` is used as a regular gate input"),
                    ));
                } else if !condition_refs.contains_key(id) {
                    out.push(err(
                        "misplaced-conditioning",
                        id,
                        format!("conditioning event `{id}` is not the condition of any INHIBIT gate"),
                    ));
                }
            }
            _ => {}
        }

        let Some(gate) = &node.gate else {
            if matches!(node.kind, EventKind::Intermediate | EventKind::TransferOut) {
                out.push(err("missing-gate", id, format!("{} event `{id}` has no inputs", node.kind.name())));
            }
            continue;
        };
        if node.kind.is_leaf_kind() {
            out.push(err(
                "leaf-with-gate",
                id,
                format!("{} event `{id}` cannot have inputs", node.kind.name()),
            ));
        }
        if gate.children.is_empty() {
            out.push(err("empty-gate", id, format!("gate of `{id}` has no inputs")));
        }
        let mut seen = BTreeSet::new();
        for child in &gate.children {
            if !seen.insert(child.as_str()) {
                out.push(err("duplicate-child", id, format!("`{child}` appears twice among the inputs of `{id}`")));
            }
            if !tree.nodes.contains_key(child) {
                out.push(err("unknown-child", id, format!("input `{child}` of `{id}` does not exist")));
            }
        }
        match gate.kind {
            GateKind::Inhibit => {
                if gate.children.len() != 1 {
                    out.push(err(
                        "inhibit-arity",
                        id,
                        format!("INHIBIT gate of `{id}` needs exactly 1 input, found {}", gate.children.len()),
                    ));
                }
                match &gate.condition {
                    None => out.push(err(
                        "inhibit-condition-missing",
                        id,
                        format!("INHIBIT gate of `{id}` has no condition"),
                    )),
                    Some(c) => match tree.nodes.get(c) {
                        None => out.push(err(
                            "unknown-condition",
                            id,
                            format!("condition `{c}` of `{id}` does not exist"),
                        )),
                        Some(cn) if cn.kind != EventKind::Conditioning => out.push(err(
                            "condition-kind",
                            id,
                            format!("condition `{c}` of `{id}` is a {} event, not conditioning", cn.kind.name()),
                        )),
                        Some(_) => {}
                    },
                }
            }
            kind => {
                if gate.condition.is_some() {
                    out.push(err(
                        "unexpected-condition",
                        id,
                        format!("only INHIBIT gates take a condition; `{id}` has a {kind} gate"),
                    ));
                }
                if gate.children.len() == 1 {
                    out.push(Diagnostic::at_node(
                        Severity::Warning,
                        "gate-arity",
                        id,
                        format!("{kind} gate of `{id}` has a single input; at least {} expected", kind.min_inputs()),
                    ));
                }
            }
        }
    }

    match tree.nodes.get(&tree.top) {
        None => out.push(Diagnostic::error(
            "missing-top",
            format!("top event `{}` does not exist", tree.top),
            Location::Document,
        )),
        Some(top) if top.kind != EventKind::TopEvent => out.push(err(
            "top-kind",
            &tree.top,
            format!("top `{}` is a {} event", tree.top, top.kind.name()),
        )),
        Some(_) => {}
    }

    out.extend(cycle_diagnostics(tree));

    if tree.nodes.contains_key(&tree.top) {
        let reachable: BTreeSet<&str> = tree.bfs_order().into_iter().collect();
        for id in tree.nodes.keys() {
            if !reachable.contains(id.as_str()) {
                out.push(err("orphan", id, format!("`{id}` is not reachable from the top event")));
            }
        }
    }
    out
}

/// One diagnostic per back edge found by a depth-first walk from every node.
fn cycle_diagnostics(tree: &FaultTree) -> Vec<Diagnostic> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Active,
        Done,
    }
    let mut marks: HashMap<&str, Mark> = HashMap::new();
    let mut out = Vec::new();
    let roots = std::iter::once(tree.top.as_str()).chain(tree.nodes.keys().map(String::as_str));
    for root in roots {
        if !tree.nodes.contains_key(root) || marks.contains_key(root) {
            continue;
        }
        // (node, next operand index)
        let mut stack: Vec<(&str, usize)> = vec![(root, 0)];
        marks.insert(root, Mark::Active);
        while let Some((id, idx)) = stack.last_mut() {
            let operands: Vec<&str> = tree.nodes[*id]
                .gate
                .as_ref()
                .map(|g| g.operands().collect())
                .unwrap_or_default();
            if *idx >= operands.len() {
                marks.insert(id, Mark::Done);
                stack.pop();
                continue;
            }
            let child = operands[*idx];
            *idx += 1;
            let parent = *id;
            let Some((child, _)) = tree.nodes.get_key_value(child) else {
                continue;
            };
            match marks.get(child.as_str()) {
                Some(Mark::Active) => out.push(err(
                    "cycle",
                    parent,
                    format!("input `{child}` of `{parent}` closes a cycle"),
                )),
                Some(Mark::Done) => {}
                None => {
                    marks.insert(child, Mark::Active);
                    stack.push((child, 0));
                }
            }
        }
    }
    out
}

/// Errors-only gate used by the analysis and emission entry points.
pub(crate) fn ensure_valid(tree: &FaultTree) -> Result<()> {
    let errors: Vec<Diagnostic> = validate_tree(tree).into_iter().filter(Diagnostic::is_error).collect();
    if errors.is_empty() {
        Ok(())
    } else {
        Err(FtaError::InvalidTree(errors))
    }
}

/// Validity plus resolved transfers: the precondition of every analysis.
pub(crate) fn ensure_analyzable(tree: &FaultTree) -> Result<()> {
    ensure_valid(tree)?;
    for id in tree.bfs_order() {
        if let EventKind::TransferIn(target) = &tree.nodes[id].kind {
            return Err(FtaError::UnresolvedTransfer(target.clone()));
        }
    }
    Ok(())
}
