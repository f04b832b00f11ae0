use std::collections::{BTreeMap, HashMap};

use crate::error::{FtaError, Result};
use crate::model::FaultTree;
use crate::validate::ensure_analyzable;

/// Evaluates the top event for a truth assignment over the analysis leaves.
///
/// OR fires on any input, AND and PAND on all, XOR on exactly one, INHIBIT
/// when its input and its condition both hold.
pub fn evaluate_boolean(tree: &FaultTree, assignment: &BTreeMap<String, bool>) -> Result<bool> {
    ensure_analyzable(tree)?;
    for leaf in tree.leaves() {
        if !assignment.contains_key(leaf) {
            return Err(FtaError::MissingAssignment(leaf.to_string()));
        }
    }
    let mut memo = HashMap::new();
    Ok(eval_node(tree, &tree.top, assignment, &mut memo))
}

fn eval_node<'t>(
    tree: &'t FaultTree,
    id: &'t str,
    assignment: &BTreeMap<String, bool>,
    memo: &mut HashMap<&'t str, bool>,
) -> bool {
    if let Some(&v) = memo.get(id) {
        return v;
    }
    let node = &tree.nodes[id];
    let value = match &node.gate {
        None => assignment[id],
        Some(gate) => {
            let inputs: Vec<bool> = gate
                .children
                .iter()
                .map(|c| eval_node(tree, c, assignment, memo))
                .collect();
            let condition = gate.condition.as_deref().map(|c| eval_node(tree, c, assignment, memo));
            gate.kind.combine_bool(&inputs, condition)
        }
    };
    memo.insert(id, value);
    value
}
