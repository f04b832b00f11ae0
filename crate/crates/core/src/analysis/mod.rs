//! Boolean evaluation, minimal cut sets and top-event probability.
//!
//! All three operate on valid trees with resolved transfers. Shared
//! sub-events (a node reachable along several paths) are supported.

mod cutsets;
mod eval;
mod probability;

pub use cutsets::{minimal_cut_sets, CutSetReport};
pub use eval::evaluate_boolean;
pub use probability::{top_probability, ProbabilityMethod, ProbabilityReport, MAX_EXACT_SHARED_LEAVES};

use crate::diagnostic::{Diagnostic, Severity};
use crate::model::{FaultTree, GateKind};

/// One warning per Priority-AND gate: analysed as plain AND.
pub(crate) fn priority_and_warnings(tree: &FaultTree) -> Vec<Diagnostic> {
    tree.bfs_order()
        .into_iter()
        .filter(|id| {
            tree.nodes[*id]
                .gate
                .as_ref()
                .is_some_and(|g| g.kind == GateKind::PriorityAnd)
        })
        .map(|id| {
            Diagnostic::at_node(
                Severity::Warning,
                "priority-and-as-and",
                id,
                format!("PAND gate of `{id}` has no timing model and is analysed as AND"),
            )
        })
        .collect()
}
