//! Fault-tree data model.
//!
//! A [`FaultTree`] is a single-top, acyclic composition of [`EventNode`]s.
//! Intermediate events carry a [`GateSpec`] listing their inputs in
//! declaration order. Values are plain data: construction never fails, and
//! [`crate::validate_tree`] reports every invariant violation.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Kind of an event in the standard FTA symbol taxonomy.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    Basic,
    External,
    Undeveloped,
    Conditioning,
    Intermediate,
    TopEvent,
    /// Placeholder for the top event of another tree, named by its title.
    TransferIn(String),
    /// Marks a subtree that other trees refer to.
    TransferOut,
}

impl EventKind {
    /// Kinds that can never have inputs.
    pub fn is_leaf_kind(&self) -> bool {
        matches!(
            self,
            EventKind::Basic
                | EventKind::External
                | EventKind::Undeveloped
                | EventKind::Conditioning
                | EventKind::TransferIn(_)
        )
    }

    pub fn name(&self) -> &'static str {
        match self {
            EventKind::Basic => "basic",
            EventKind::External => "external",
            EventKind::Undeveloped => "undeveloped",
            EventKind::Conditioning => "conditioning",
            EventKind::Intermediate => "intermediate",
            EventKind::TopEvent => "top_event",
            EventKind::TransferIn(_) => "transfer_in",
            EventKind::TransferOut => "transfer_out",
        }
    }
}

/// Logic gate combining the inputs of an event.
///
/// Priority-AND inputs are ordered by their position in [`GateSpec::children`];
/// no timing model exists, so analysis treats the gate as AND.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GateKind {
    And,
    Or,
    Xor,
    PriorityAnd,
    Inhibit,
}

impl GateKind {
    pub const ALL: [GateKind; 5] = [
        GateKind::Or,
        GateKind::And,
        GateKind::Xor,
        GateKind::PriorityAnd,
        GateKind::Inhibit,
    ];

    /// Upper-case token used in diagram edge labels and gate aliases.
    pub fn token(self) -> &'static str {
        match self {
            GateKind::And => "AND",
            GateKind::Or => "OR",
            GateKind::Xor => "XOR",
            GateKind::PriorityAnd => "PAND",
            GateKind::Inhibit => "INHIBIT",
        }
    }

    /// Minimum number of regular inputs. Inhibit takes exactly one.
    pub fn min_inputs(self) -> usize {
        match self {
            GateKind::Inhibit => 1,
            _ => 2,
        }
    }

    pub fn combine_bool(self, inputs: &[bool], condition: Option<bool>) -> bool {
        match self {
            GateKind::Or => inputs.iter().any(|&b| b),
            GateKind::And | GateKind::PriorityAnd => inputs.iter().all(|&b| b),
            GateKind::Xor => inputs.iter().filter(|&&b| b).count() == 1,
            GateKind::Inhibit => inputs.iter().all(|&b| b) && condition.unwrap_or(false),
        }
    }

    /// Probability of the gate output for independent inputs.
    pub fn combine_probability(self, inputs: &[f64], condition: Option<f64>) -> f64 {
        let p = match self {
            GateKind::And | GateKind::PriorityAnd => inputs.iter().product(),
            GateKind::Or => 1.0 - inputs.iter().map(|p| 1.0 - p).product::<f64>(),
            GateKind::Xor => (0..inputs.len())
                .map(|i| {
                    inputs
                        .iter()
                        .enumerate()
                        .map(|(j, &p)| if i == j { p } else { 1.0 - p })
                        .product::<f64>()
                })
                .sum(),
            GateKind::Inhibit => inputs.iter().product::<f64>() * condition.unwrap_or(0.0),
        };
        p.clamp(0.0, 1.0)
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown gate kind `{0}`")]
pub struct UnknownGateKind(pub String);

impl FromStr for GateKind {
    type Err = UnknownGateKind;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "AND" => Ok(GateKind::And),
            "OR" => Ok(GateKind::Or),
            "XOR" => Ok(GateKind::Xor),
            "PAND" | "PRIORITY_AND" | "PRIORITYAND" => Ok(GateKind::PriorityAnd),
            "INHIBIT" => Ok(GateKind::Inhibit),
            _ => Err(UnknownGateKind(s.to_string())),
        }
    }
}

/// The gate feeding an event: its kind, its ordered inputs and, for Inhibit,
/// the enabling condition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateSpec {
    pub kind: GateKind,
    pub children: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub condition: Option<String>,
}

impl GateSpec {
    pub fn new<I, S>(kind: GateKind, children: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        GateSpec {
            kind,
            children: children.into_iter().map(Into::into).collect(),
            condition: None,
        }
    }

    pub fn inhibit(input: impl Into<String>, condition: impl Into<String>) -> Self {
        GateSpec {
            kind: GateKind::Inhibit,
            children: vec![input.into()],
            condition: Some(condition.into()),
        }
    }

    /// Inputs followed by the condition, if any.
    pub fn operands(&self) -> impl Iterator<Item = &str> {
        self.children
            .iter()
            .map(String::as_str)
            .chain(self.condition.as_deref())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventNode {
    pub id: String,
    pub label: String,
    pub kind: EventKind,
    pub gate: Option<GateSpec>,
    /// Name of the gate's own diagram node (e.g. `MainOR`), kept for round trips.
    pub gate_alias: Option<String>,
    pub probability: Option<f64>,
}

impl EventNode {
    pub fn new(id: impl Into<String>, label: impl Into<String>, kind: EventKind) -> Self {
        EventNode {
            id: id.into(),
            label: label.into(),
            kind,
            gate: None,
            gate_alias: None,
            probability: None,
        }
    }

    pub fn basic(id: impl Into<String>, label: impl Into<String>) -> Self {
        Self::new(id, label, EventKind::Basic)
    }

    pub fn with_gate(mut self, gate: GateSpec) -> Self {
        self.gate = Some(gate);
        self
    }

    pub fn with_alias(mut self, alias: impl Into<String>) -> Self {
        self.gate_alias = Some(alias.into());
        self
    }

    pub fn with_probability(mut self, p: f64) -> Self {
        self.probability = Some(p);
        self
    }

    pub fn children(&self) -> &[String] {
        self.gate.as_ref().map_or(&[], |g| g.children.as_slice())
    }

    /// Analysis leaf: anything without a gate that is not a pending transfer.
    pub fn is_analysis_leaf(&self) -> bool {
        self.gate.is_none() && !matches!(self.kind, EventKind::TransferIn(_))
    }

    fn same_structure(&self, other: &EventNode) -> bool {
        self.id == other.id
            && self.label == other.label
            && self.kind == other.kind
            && self.gate == other.gate
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FaultTree {
    pub title: String,
    pub top: String,
    /// Gate given to connections that do not name one.
    pub default_gate: GateKind,
    pub nodes: BTreeMap<String, EventNode>,
}

impl FaultTree {
    pub fn new(title: impl Into<String>, top: impl Into<String>) -> Self {
        FaultTree {
            title: title.into(),
            top: top.into(),
            default_gate: GateKind::Or,
            nodes: BTreeMap::new(),
        }
    }

    pub fn with_node(mut self, node: EventNode) -> Self {
        self.insert(node);
        self
    }

    pub fn insert(&mut self, node: EventNode) -> Option<EventNode> {
        self.nodes.insert(node.id.clone(), node)
    }

    pub fn node(&self, id: &str) -> Option<&EventNode> {
        self.nodes.get(id)
    }

    pub fn top_node(&self) -> Option<&EventNode> {
        self.nodes.get(&self.top)
    }

    /// Node ids in breadth-first order from the top, inputs before conditions,
    /// each id once. Unreachable nodes are not included.
    pub fn bfs_order(&self) -> Vec<&str> {
        let mut order = Vec::new();
        let Some(top) = self.nodes.get_key_value(&self.top).map(|(k, _)| k.as_str()) else {
            return order;
        };
        let mut seen = BTreeSet::from([top]);
        let mut queue = VecDeque::from([top]);
        while let Some(id) = queue.pop_front() {
            order.push(id);
            let Some(gate) = self.nodes.get(id).and_then(|n| n.gate.as_ref()) else {
                continue;
            };
            for child in gate.operands() {
                if let Some((key, _)) = self.nodes.get_key_value(child) {
                    if seen.insert(key.as_str()) {
                        queue.push_back(key.as_str());
                    }
                }
            }
        }
        order
    }

    /// Reachable analysis leaves, sorted by id.
    pub fn leaves(&self) -> Vec<&str> {
        let mut leaves: Vec<&str> = self
            .bfs_order()
            .into_iter()
            .filter(|id| self.nodes[*id].is_analysis_leaf())
            .collect();
        leaves.sort_unstable();
        leaves
    }

    /// Parents of every reachable node, in breadth-first discovery order.
    pub fn parents(&self) -> HashMap<&str, Vec<&str>> {
        let mut parents: HashMap<&str, Vec<&str>> = HashMap::new();
        for id in self.bfs_order() {
            if let Some(gate) = &self.nodes[id].gate {
                for child in gate.operands() {
                    if let Some((key, _)) = self.nodes.get_key_value(child) {
                        parents.entry(key.as_str()).or_default().push(id);
                    }
                }
            }
        }
        parents
    }

    pub fn contains_kind(&self, kind: GateKind) -> bool {
        self.nodes
            .values()
            .any(|n| n.gate.as_ref().is_some_and(|g| g.kind == kind))
    }

    pub fn gate_count(&self) -> usize {
        self.nodes.values().filter(|n| n.gate.is_some()).count()
    }

    /// Equality on everything a diagram can express: title, top, default gate,
    /// node ids, labels, kinds and gates. Gate aliases and probabilities are
    /// presentation or analysis inputs and are ignored.
    pub fn structurally_eq(&self, other: &FaultTree) -> bool {
        self.title == other.title
            && self.top == other.top
            && self.default_gate == other.default_gate
            && self.nodes.len() == other.nodes.len()
            && self
                .nodes
                .iter()
                .zip(other.nodes.iter())
                .all(|((ka, a), (kb, b))| ka == kb && a.same_structure(b))
    }

    /// Probabilities stored on the nodes themselves.
    pub fn embedded_probabilities(&self) -> BTreeMap<String, f64> {
        self.nodes
            .values()
            .filter_map(|n| n.probability.map(|p| (n.id.clone(), p)))
            .collect()
    }
}

/// A set of leaf events whose joint occurrence causes the top event.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CutSet {
    pub members: BTreeSet<String>,
}

impl CutSet {
    pub fn new<I, S>(members: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        CutSet {
            members: members.into_iter().map(Into::into).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, id: &str) -> bool {
        self.members.contains(id)
    }
}

impl fmt::Display for CutSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, m) in self.members.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            f.write_str(m)?;
        }
        f.write_str("}")
    }
}

/// True when `id` is a usable node identifier: ASCII letters, digits and `_`.
pub fn is_valid_id(id: &str) -> bool {
    !id.is_empty() && id.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_')
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gate_tokens_parse_back() {
        for kind in GateKind::ALL {
            assert_eq!(kind.token().parse::<GateKind>().unwrap(), kind);
            assert_eq!(kind.token().to_lowercase().parse::<GateKind>().unwrap(), kind);
        }
        assert!("NOR".parse::<GateKind>().is_err());
    }

    #[test]
    fn xor_probability_is_exactly_one() {
        let p = GateKind::Xor.combine_probability(&[0.5, 0.5], None);
        assert!((p - 0.5).abs() < 1e-15);
        let p = GateKind::Xor.combine_probability(&[0.1, 0.2, 0.3], None);
        let expected = 0.1 * 0.8 * 0.7 + 0.9 * 0.2 * 0.7 + 0.9 * 0.8 * 0.3;
        assert!((p - expected).abs() < 1e-15);
    }

    #[test]
    fn bfs_visits_condition_after_inputs() {
        let tree = FaultTree::new("t", "top")
            .with_node(
                EventNode::new("top", "Top", EventKind::TopEvent)
                    .with_gate(GateSpec::inhibit("a", "c")),
            )
            .with_node(EventNode::basic("a", "A"))
            .with_node(EventNode::new("c", "C", EventKind::Conditioning));
        assert_eq!(tree.bfs_order(), vec!["top", "a", "c"]);
        assert_eq!(tree.leaves(), vec!["a", "c"]);
    }

    #[test]
    fn structural_equality_ignores_alias_and_probability() {
        let a = FaultTree::new("t", "top")
            .with_node(
                EventNode::new("top", "Top", EventKind::TopEvent)
                    .with_gate(GateSpec::new(GateKind::Or, ["x", "y"]))
                    .with_alias("MainOR"),
            )
            .with_node(EventNode::basic("x", "X").with_probability(0.3))
            .with_node(EventNode::basic("y", "Y"));
        let mut b = a.clone();
        b.nodes.get_mut("top").unwrap().gate_alias = None;
        b.nodes.get_mut("x").unwrap().probability = None;
        assert!(a.structurally_eq(&b));
        assert_ne!(a, b);
        b.nodes.get_mut("y").unwrap().label = "Other".into();
        assert!(!a.structurally_eq(&b));
    }

    #[test]
    fn cut_sets_order_lexicographically() {
        let mut sets = [
            CutSet::new(["b"]),
            CutSet::new(["a", "c"]),
            CutSet::new(["a", "b"]),
        ];
        sets.sort();
        assert_eq!(sets[0].to_string(), "{a, b}");
        assert_eq!(sets[1].to_string(), "{a, c}");
        assert_eq!(sets[2].to_string(), "{b}");
    }
}
