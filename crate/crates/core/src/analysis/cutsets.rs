use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use crate::diagnostic::{Diagnostic, Location};
use crate::error::Result;
use crate::model::{CutSet, FaultTree, GateKind};
use crate::validate::ensure_analyzable;

use super::priority_and_warnings;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutSetReport {
    /// Minimal cut sets in lexicographic order of their sorted members.
    pub cut_sets: Vec<CutSet>,
    /// XOR gates were expanded to positive literals only (negations dropped).
    pub xor_approximated: bool,
    pub warnings: Vec<Diagnostic>,
}

/// Top-down (MOCUS-style) expansion of the top event into minimal cut sets.
///
/// Each row is a conjunction of node ids. Rows are expanded one gate at a
/// time: OR and XOR split the row into alternatives, AND, PAND and INHIBIT
/// replace the gate by all of its operands. Rows without gates are collected
/// and reduced by subset absorption.
pub fn minimal_cut_sets(tree: &FaultTree) -> Result<CutSetReport> {
    ensure_analyzable(tree)?;

    let mut finished: HashSet<BTreeSet<&str>> = HashSet::new();
    let mut seen: HashSet<BTreeSet<&str>> = HashSet::new();
    let mut pending: Vec<BTreeSet<&str>> = vec![BTreeSet::from([tree.top.as_str()])];

    while let Some(row) = pending.pop() {
        if !seen.insert(row.clone()) {
            continue;
        }
        let Some(gate_id) = row.iter().copied().find(|id| tree.nodes[*id].gate.is_some()) else {
            finished.insert(row);
            continue;
        };
        let gate = tree.nodes[gate_id].gate.as_ref().expect("checked above");
        let mut rest = row;
        rest.remove(gate_id);
        match gate.kind {
            GateKind::Or | GateKind::Xor => {
                for child in gate.children.iter().rev() {
                    let mut alt = rest.clone();
                    alt.insert(child.as_str());
                    pending.push(alt);
                }
            }
            GateKind::And | GateKind::PriorityAnd | GateKind::Inhibit => {
                rest.extend(gate.operands());
                pending.push(rest);
            }
        }
    }

    let cut_sets = minimize(finished);
    let xor_approximated = tree.contains_kind(GateKind::Xor);
    let mut warnings = priority_and_warnings(tree);
    if xor_approximated {
        warnings.push(Diagnostic::warning(
            "xor-positive-literals",
            "XOR gates expanded to positive literals; negated inputs are dropped",
            Location::Document,
        ));
    }
    Ok(CutSetReport {
        cut_sets,
        xor_approximated,
        warnings,
    })
}

/// Drops every row that contains another row, then sorts.
fn minimize(rows: HashSet<BTreeSet<&str>>) -> Vec<CutSet> {
    let mut rows: Vec<BTreeSet<&str>> = rows.into_iter().collect();
    rows.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
    let mut kept: Vec<BTreeSet<&str>> = Vec::new();
    for row in rows {
        if !kept.iter().any(|k| k.is_subset(&row)) {
            kept.push(row);
        }
    }
    let mut out: Vec<CutSet> = kept.into_iter().map(CutSet::new).collect();
    out.sort();
    out
}
