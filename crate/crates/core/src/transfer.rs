//! Inlining of transfer-in events across a collection of trees.

use std::collections::{BTreeMap, HashMap};

use crate::error::{FtaError, Result};
use crate::model::{EventKind, EventNode, FaultTree};

/// Returns the tree titled `root` with every transfer-in event replaced by a
/// deep copy of the referenced tree's top subtree.
///
/// The copied top keeps the transfer event's id, so its parents need no
/// rewiring; every other copied node is renamed `{id}__{transfer id}`.
/// Referenced trees are resolved first, so chains inline completely.
pub fn resolve_transfers(trees: &[FaultTree], root: &str) -> Result<FaultTree> {
    let mut by_title: HashMap<&str, &FaultTree> = HashMap::new();
    for tree in trees {
        if by_title.insert(tree.title.as_str(), tree).is_some() {
            return Err(FtaError::DuplicateTreeTitle(tree.title.clone()));
        }
    }
    let mut resolved: HashMap<String, FaultTree> = HashMap::new();
    resolve(root, &by_title, &mut Vec::new(), &mut resolved)
}

fn resolve(
    title: &str,
    by_title: &HashMap<&str, &FaultTree>,
    chain: &mut Vec<String>,
    done: &mut HashMap<String, FaultTree>,
) -> Result<FaultTree> {
    if let Some(tree) = done.get(title) {
        return Ok(tree.clone());
    }
    let tree = *by_title
        .get(title)
        .ok_or_else(|| FtaError::UnknownTransferTarget(title.to_string()))?;
    chain.push(title.to_string());

    let mut out = tree.clone();
    let transfers: Vec<(String, String)> = tree
        .nodes
        .values()
        .filter_map(|n| match &n.kind {
            EventKind::TransferIn(target) => Some((n.id.clone(), target.clone())),
            _ => None,
        })
        .collect();
    for (node_id, target) in transfers {
        if chain.contains(&target) {
            let mut cycle = chain.clone();
            cycle.push(target);
            return Err(FtaError::TransferCycle(cycle));
        }
        let sub = resolve(&target, by_title, chain, done)?;
        inline(&mut out, &node_id, &sub);
    }

    chain.pop();
    done.insert(title.to_string(), out.clone());
    Ok(out)
}

fn inline(into: &mut FaultTree, at: &str, sub: &FaultTree) {
    let order: Vec<&str> = sub.bfs_order();
    let mut rename: BTreeMap<&str, String> = BTreeMap::new();
    for &id in &order {
        let new_id = if id == sub.top {
            at.to_string()
        } else {
            let base = format!("{id}__{at}");
            let mut candidate = base.clone();
            let mut n = 2;
            while into.nodes.contains_key(&candidate) || rename.values().any(|v| *v == candidate) {
                candidate = format!("{base}_{n}");
                n += 1;
            }
            candidate
        };
        rename.insert(id, new_id);
    }
    for &id in &order {
        let src = &sub.nodes[id];
        let mut node = EventNode {
            id: rename[id].clone(),
            label: src.label.clone(),
            kind: src.kind.clone(),
            gate: src.gate.clone(),
            gate_alias: None,
            probability: src.probability,
        };
        if let Some(gate) = node.gate.as_mut() {
            for c in gate.children.iter_mut() {
                *c = rename[c.as_str()].clone();
            }
            if let Some(c) = gate.condition.as_mut() {
                *c = rename[c.as_str()].clone();
            }
        }
        if id == sub.top {
            node.kind = if node.gate.is_some() {
                EventKind::Intermediate
            } else {
                EventKind::Basic
            };
        }
        into.insert(node);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{GateKind, GateSpec};
    use crate::validate::validate_tree;

    fn root_with_transfer(target: &str) -> FaultTree {
        FaultTree::new("Root", "top")
            .with_node(
                EventNode::new("top", "Top", EventKind::TopEvent).with_gate(GateSpec::new(GateKind::Or, ["a", "x"])),
            )
            .with_node(EventNode::basic("a", "A"))
            .with_node(EventNode::new("x", "See T", EventKind::TransferIn(target.into())))
    }

    #[test]
    fn single_event_subtree_is_inlined() {
        let sub = FaultTree::new("T", "t").with_node(EventNode::new("t", "Pump fails", EventKind::TopEvent));
        let out = resolve_transfers(&[root_with_transfer("T"), sub], "Root").unwrap();
        let expected = FaultTree::new("Root", "top")
            .with_node(
                EventNode::new("top", "Top", EventKind::TopEvent).with_gate(GateSpec::new(GateKind::Or, ["a", "x"])),
            )
            .with_node(EventNode::basic("a", "A"))
            .with_node(EventNode::basic("x", "Pump fails"));
        assert_eq!(out, expected);
    }

    #[test]
    fn self_reference_is_a_cycle() {
        let err = resolve_transfers(&[root_with_transfer("Root")], "Root").unwrap_err();
        assert_eq!(err, FtaError::TransferCycle(vec!["Root".into(), "Root".into()]));
    }

    #[test]
    fn unknown_target() {
        let err = resolve_transfers(&[root_with_transfer("Nowhere")], "Root").unwrap_err();
        assert_eq!(err, FtaError::UnknownTransferTarget("Nowhere".into()));
        assert_eq!(
            resolve_transfers(&[], "Root").unwrap_err(),
            FtaError::UnknownTransferTarget("Root".into())
        );
    }

    #[test]
    fn two_level_chain_inlines_both() {
        let a = FaultTree::new("A", "atop")
            .with_node(
                EventNode::new("atop", "A top", EventKind::TopEvent)
                    .with_gate(GateSpec::new(GateKind::And, ["p", "y"])),
            )
            .with_node(EventNode::basic("p", "P"))
            .with_node(EventNode::new("y", "See B", EventKind::TransferIn("B".into())));
        let b = FaultTree::new("B", "btop")
            .with_node(
                EventNode::new("btop", "B top", EventKind::TopEvent)
                    .with_gate(GateSpec::new(GateKind::Or, ["q", "r"])),
            )
            .with_node(EventNode::basic("q", "Q"))
            .with_node(EventNode::basic("r", "R").with_probability(0.25));
        let out = resolve_transfers(&[root_with_transfer("A"), a, b], "Root").unwrap();

        let expected = FaultTree::new("Root", "top")
            .with_node(
                EventNode::new("top", "Top", EventKind::TopEvent).with_gate(GateSpec::new(GateKind::Or, ["a", "x"])),
            )
            .with_node(EventNode::basic("a", "A"))
            .with_node(
                EventNode::new("x", "A top", EventKind::Intermediate)
                    .with_gate(GateSpec::new(GateKind::And, ["p__x", "y__x"])),
            )
            .with_node(EventNode::basic("p__x", "P"))
            .with_node(
                EventNode::new("y__x", "B top", EventKind::Intermediate)
                    .with_gate(GateSpec::new(GateKind::Or, ["q__y__x", "r__y__x"])),
            )
            .with_node(EventNode::basic("q__y__x", "Q"))
            .with_node(EventNode::basic("r__y__x", "R").with_probability(0.25));
        assert_eq!(out, expected);
        assert!(validate_tree(&out).is_empty());
    }

    #[test]
    fn indirect_cycle() {
        let a = FaultTree::new("A", "atop")
            .with_node(
                EventNode::new("atop", "A top", EventKind::TopEvent)
                    .with_gate(GateSpec::new(GateKind::Or, ["p", "y"])),
            )
            .with_node(EventNode::basic("p", "P"))
            .with_node(EventNode::new("y", "back", EventKind::TransferIn("Root".into())));
        let err = resolve_transfers(&[root_with_transfer("A"), a], "Root").unwrap_err();
        assert_eq!(err, FtaError::TransferCycle(vec!["Root".into(), "A".into(), "Root".into()]));
    }
}
