use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::diagnostic::{Diagnostic, Location};
use crate::error::{FtaError, Result};
use crate::model::FaultTree;
use crate::validate::ensure_analyzable;

use super::priority_and_warnings;

/// Above this many shared leaves the factorized formula is used as an
/// approximation instead of conditioning on every shared leaf.
pub const MAX_EXACT_SHARED_LEAVES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProbabilityMethod {
    /// Every leaf reaches the top along one path; the gate formulas are exact.
    Factorized,
    /// Exact: enumerated all assignments of the shared leaves and propagated
    /// the rest through the gate formulas.
    SharedEnumeration { shared_leaves: usize },
    /// Too many shared leaves; factorized formula applied as if independent.
    Approximate { shared_leaves: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbabilityReport {
    pub value: f64,
    pub method: ProbabilityMethod,
    pub warnings: Vec<Diagnostic>,
}

impl ProbabilityReport {
    pub fn is_approximate(&self) -> bool {
        matches!(self.method, ProbabilityMethod::Approximate { .. })
    }
}

/// Probability of the top event given independent leaf probabilities.
///
/// Gate formulas: AND and PAND multiply, OR is `1 - prod(1 - p)`, XOR sums
/// `p_i * prod_{j != i}(1 - p_j)`, INHIBIT multiplies input and condition.
/// These assume each gate's inputs are independent, which fails when a leaf
/// is reachable along more than one path; such leaves are conditioned on
/// (enumerated) so the result stays exact up to [`MAX_EXACT_SHARED_LEAVES`].
pub fn top_probability(tree: &FaultTree, probs: &BTreeMap<String, f64>) -> Result<ProbabilityReport> {
    ensure_analyzable(tree)?;
    let leaves = tree.leaves();
    for &leaf in &leaves {
        match probs.get(leaf) {
            None => return Err(FtaError::MissingProbability(leaf.to_string())),
            Some(&p) if !(0.0..=1.0).contains(&p) => {
                return Err(FtaError::ProbabilityOutOfRange {
                    id: leaf.to_string(),
                    value: p,
                })
            }
            Some(_) => {}
        }
    }

    let shared = shared_leaves(tree);
    let mut warnings = priority_and_warnings(tree);
    let base: HashMap<&str, f64> = leaves.iter().map(|&l| (l, probs[l])).collect();

    let (value, method) = if shared.is_empty() {
        (propagate(tree, &base), ProbabilityMethod::Factorized)
    } else if shared.len() <= MAX_EXACT_SHARED_LEAVES {
        let mut fixed = base.clone();
        let mut total = 0.0;
        for mask in 0u64..(1u64 << shared.len()) {
            let mut weight = 1.0;
            for (bit, &leaf) in shared.iter().enumerate() {
                let on = mask >> bit & 1 == 1;
                let p = base[leaf];
                weight *= if on { p } else { 1.0 - p };
                fixed.insert(leaf, if on { 1.0 } else { 0.0 });
            }
            if weight > 0.0 {
                total += weight * propagate(tree, &fixed);
            }
        }
        (
            total.clamp(0.0, 1.0),
            ProbabilityMethod::SharedEnumeration {
                shared_leaves: shared.len(),
            },
        )
    } else {
        warnings.push(Diagnostic::warning(
            "approximate-probability",
            format!(
                "{} shared leaves exceed the exact limit of {MAX_EXACT_SHARED_LEAVES}; \
                 result assumes independent gate inputs",
                shared.len()
            ),
            Location::Document,
        ));
        (
            propagate(tree, &base),
            ProbabilityMethod::Approximate {
                shared_leaves: shared.len(),
            },
        )
    };
    Ok(ProbabilityReport { value, method, warnings })
}

/// Leaves reachable from the top along more than one path, sorted by id.
fn shared_leaves(tree: &FaultTree) -> Vec<&str> {
    let order = topological_order(tree);
    let mut paths: HashMap<&str, u64> = HashMap::from([(tree.top.as_str(), 1)]);
    for id in order {
        let count = paths.get(id).copied().unwrap_or(0);
        if let Some(gate) = &tree.nodes[id].gate {
            for child in gate.operands() {
                let entry = paths.entry(tree.nodes.get_key_value(child).unwrap().0.as_str()).or_insert(0);
                *entry = entry.saturating_add(count);
            }
        }
    }
    let mut shared: Vec<&str> = tree
        .leaves()
        .into_iter()
        .filter(|l| paths.get(l).copied().unwrap_or(0) > 1)
        .collect();
    shared.sort_unstable();
    shared
}

/// Parents before children (Kahn's algorithm over reachable nodes).
fn topological_order(tree: &FaultTree) -> Vec<&str> {
    let reachable = tree.bfs_order();
    let mut indegree: HashMap<&str, usize> = reachable.iter().map(|&id| (id, 0)).collect();
    for &id in &reachable {
        if let Some(gate) = &tree.nodes[id].gate {
            for child in gate.operands() {
                *indegree.get_mut(child).unwrap() += 1;
            }
        }
    }
    let mut ready: Vec<&str> = vec![tree.top.as_str()];
    let mut order = Vec::with_capacity(reachable.len());
    while let Some(id) = ready.pop() {
        order.push(id);
        if let Some(gate) = &tree.nodes[id].gate {
            for child in gate.operands() {
                let (key, _) = tree.nodes.get_key_value(child).unwrap();
                let d = indegree.get_mut(key.as_str()).unwrap();
                *d -= 1;
                if *d == 0 {
                    ready.push(key.as_str());
                }
            }
        }
    }
    order
}

fn propagate(tree: &FaultTree, leaf_probs: &HashMap<&str, f64>) -> f64 {
    fn node_p<'t>(
        tree: &'t FaultTree,
        id: &'t str,
        leaf_probs: &HashMap<&str, f64>,
        memo: &mut HashMap<&'t str, f64>,
    ) -> f64 {
        if let Some(&p) = memo.get(id) {
            return p;
        }
        let p = match &tree.nodes[id].gate {
            None => leaf_probs[id],
            Some(gate) => {
                let inputs: Vec<f64> = gate
                    .children
                    .iter()
                    .map(|c| node_p(tree, c, leaf_probs, memo))
                    .collect();
                let condition = gate.condition.as_deref().map(|c| node_p(tree, c, leaf_probs, memo));
                gate.kind.combine_probability(&inputs, condition)
            }
        };
        memo.insert(id, p);
        p
    }
    node_p(tree, &tree.top, leaf_probs, &mut HashMap::new())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{EventKind, EventNode, GateKind, GateSpec};

    fn probs(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    fn shared_tree() -> FaultTree {
        // top = AND(OR(a, b), OR(a, c))
        FaultTree::new("t", "top")
            .with_node(
                EventNode::new("top", "T", EventKind::TopEvent).with_gate(GateSpec::new(GateKind::And, ["g1", "g2"])),
            )
            .with_node(EventNode::new("g1", "G1", EventKind::Intermediate).with_gate(GateSpec::new(GateKind::Or, ["a", "b"])))
            .with_node(EventNode::new("g2", "G2", EventKind::Intermediate).with_gate(GateSpec::new(GateKind::Or, ["a", "c"])))
            .with_node(EventNode::basic("a", "A"))
            .with_node(EventNode::basic("b", "B"))
            .with_node(EventNode::basic("c", "C"))
    }

    #[test]
    fn shared_leaf_is_conditioned() {
        let tree = shared_tree();
        let report = top_probability(&tree, &probs(&[("a", 0.5), ("b", 0.5), ("c", 0.5)])).unwrap();
        // P = P(a) + P(!a) P(b) P(c) = 0.5 + 0.125
        assert!((report.value - 0.625).abs() < 1e-15);
        assert_eq!(report.method, ProbabilityMethod::SharedEnumeration { shared_leaves: 1 });
    }

    #[test]
    fn input_errors() {
        let tree = shared_tree();
        assert_eq!(
            top_probability(&tree, &probs(&[("a", 0.5), ("b", 0.5)])),
            Err(FtaError::MissingProbability("c".into()))
        );
        assert!(matches!(
            top_probability(&tree, &probs(&[("a", 0.5), ("b", -0.1), ("c", 0.5)])),
            Err(FtaError::ProbabilityOutOfRange { .. })
        ));
        assert!(matches!(
            top_probability(&tree, &probs(&[("a", f64::NAN), ("b", 0.1), ("c", 0.5)])),
            Err(FtaError::ProbabilityOutOfRange { .. })
        ));
    }

    #[test]
    fn inhibit_multiplies_condition() {
        let tree = FaultTree::new("t", "top")
            .with_node(EventNode::new("top", "T", EventKind::TopEvent).with_gate(GateSpec::inhibit("a", "c")))
            .with_node(EventNode::basic("a", "A"))
            .with_node(EventNode::new("c", "C", EventKind::Conditioning));
        let report = top_probability(&tree, &probs(&[("a", 0.2), ("c", 0.5)])).unwrap();
        assert!((report.value - 0.1).abs() < 1e-15);
        assert_eq!(report.method, ProbabilityMethod::Factorized);
    }

    #[test]
    fn too_many_shared_leaves_is_approximate() {
        // top = AND(OR(l0..l21), OR(l0..l21)): every leaf shared.
        let leaves: Vec<String> = (0..22).map(|i| format!("l{i}")).collect();
        let mut tree = FaultTree::new("t", "top")
            .with_node(
                EventNode::new("top", "T", EventKind::TopEvent).with_gate(GateSpec::new(GateKind::And, ["g1", "g2"])),
            )
            .with_node(
                EventNode::new("g1", "G1", EventKind::Intermediate)
                    .with_gate(GateSpec::new(GateKind::Or, leaves.clone())),
            )
            .with_node(
                EventNode::new("g2", "G2", EventKind::Intermediate)
                    .with_gate(GateSpec::new(GateKind::Or, leaves.clone())),
            );
        for l in &leaves {
            tree.insert(EventNode::basic(l.clone(), l.clone()));
        }
        let p: BTreeMap<String, f64> = leaves.iter().map(|l| (l.clone(), 0.01)).collect();
        let report = top_probability(&tree, &p).unwrap();
        assert!(report.is_approximate());
        assert_eq!(report.warnings.last().unwrap().rule, "approximate-probability");
        let or = 1.0 - 0.99f64.powi(22);
        assert!((report.value - or * or).abs() < 1e-15);
    }
}
