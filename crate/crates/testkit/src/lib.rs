//! Test support for the fault-tree crates: brute-force oracles written
//! without reference to the library's analysis code, and a seeded generator
//! of random valid trees.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use fta_core::{EventKind, EventNode, FaultTree, GateKind, GateSpec};
use rand::prelude::*;

/// Leaves reachable from the top: nodes without a gate, sorted by id.
pub fn reachable_leaves(tree: &FaultTree) -> Vec<String> {
    let mut seen = HashSet::new();
    let mut stack = vec![tree.top.clone()];
    let mut leaves = BTreeSet::new();
    while let Some(id) = stack.pop() {
        if !seen.insert(id.clone()) {
            continue;
        }
        let node = &tree.nodes[&id];
        match &node.gate {
            None => {
                leaves.insert(id);
            }
            Some(g) => {
                stack.extend(g.children.iter().cloned());
                stack.extend(g.condition.iter().cloned());
            }
        }
    }
    leaves.into_iter().collect()
}

/// Direct recursive evaluation from the gate truth tables.
pub fn naive_eval(tree: &FaultTree, true_leaves: &BTreeSet<String>) -> bool {
    fn eval(tree: &FaultTree, id: &str, t: &BTreeSet<String>) -> bool {
        let node = &tree.nodes[id];
        let Some(g) = &node.gate else {
            return t.contains(id);
        };
        let values: Vec<bool> = g.children.iter().map(|c| eval(tree, c, t)).collect();
        match g.kind {
            GateKind::Or => values.iter().any(|v| *v),
            GateKind::And | GateKind::PriorityAnd => values.iter().all(|v| *v),
            GateKind::Xor => values.iter().filter(|v| **v).count() == 1,
            GateKind::Inhibit => {
                values.iter().all(|v| *v) && eval(tree, g.condition.as_deref().expect("inhibit condition"), t)
            }
        }
    }
    eval(tree, &tree.top, true_leaves)
}

fn subset(mask: u64, leaves: &[String]) -> BTreeSet<String> {
    leaves
        .iter()
        .enumerate()
        .filter(|(i, _)| mask >> i & 1 == 1)
        .map(|(_, l)| l.clone())
        .collect()
}

/// Every set of leaves that makes the top true while no proper subset does,
/// found by enumerating all assignments. Sorted like the library's output.
pub fn brute_force_cut_sets(tree: &FaultTree) -> Vec<BTreeSet<String>> {
    let leaves = reachable_leaves(tree);
    assert!(leaves.len() <= 20, "oracle is exponential in the leaf count");
    let mut masks: Vec<u64> = (0..1u64 << leaves.len()).collect();
    masks.sort_by_key(|m| m.count_ones());
    let mut minimal: Vec<u64> = Vec::new();
    for m in masks {
        if minimal.iter().any(|k| k & m == *k) {
            continue;
        }
        if naive_eval(tree, &subset(m, &leaves)) {
            minimal.push(m);
        }
    }
    let mut sets: Vec<BTreeSet<String>> = minimal.into_iter().map(|m| subset(m, &leaves)).collect();
    sets.sort();
    sets
}

/// The same tree with every XOR gate turned into OR.
pub fn coherent_version(tree: &FaultTree) -> FaultTree {
    let mut out = tree.clone();
    for node in out.nodes.values_mut() {
        if let Some(g) = node.gate.as_mut() {
            if g.kind == GateKind::Xor {
                g.kind = GateKind::Or;
            }
        }
    }
    out
}

/// Top-event probability by summing the weight of every true assignment.
pub fn brute_force_probability(tree: &FaultTree, probs: &BTreeMap<String, f64>) -> f64 {
    let leaves = reachable_leaves(tree);
    assert!(leaves.len() <= 20, "oracle is exponential in the leaf count");
    let mut total = 0.0;
    for m in 0..1u64 << leaves.len() {
        let mut w = 1.0;
        for (i, l) in leaves.iter().enumerate() {
            let p = probs[l];
            w *= if m >> i & 1 == 1 { p } else { 1.0 - p };
        }
        if w > 0.0 && naive_eval(tree, &subset(m, &leaves)) {
            total += w;
        }
    }
    total
}

/// Random probability for every reachable leaf; about one in ten is exactly
/// 0 or 1.
pub fn random_probabilities(tree: &FaultTree, rng: &mut impl Rng) -> BTreeMap<String, f64> {
    reachable_leaves(tree)
        .into_iter()
        .map(|l| {
            let p = match rng.random_range(0..20) {
                0 => 0.0,
                1 => 1.0,
                _ => rng.random::<f64>(),
            };
            (l, p)
        })
        .collect()
}

#[derive(Debug, Clone, Copy)]
pub struct TreeConfig {
    pub max_leaves: usize,
    /// Allow XOR gates. Trees that get XOR gates get no shared nodes.
    pub allow_xor: bool,
    /// Allow nodes with several parents.
    pub allow_sharing: bool,
}

impl Default for TreeConfig {
    fn default() -> Self {
        TreeConfig {
            max_leaves: 12,
            allow_xor: true,
            allow_sharing: true,
        }
    }
}

const WORDS: &[&str] = &[
    "Pump", "Valve", "Sensor", "Power", "Relay", "Fuse", "Motor", "Cable", "Lidar", "Radar", "Brake",
    "Clock", "Memory", "Cooling", "Firmware",
];
const FAULTS: &[&str] = &["fails", "stuck", "degraded", "open", "short", "drift", "lost", "overheats"];

fn random_label(rng: &mut impl Rng, n: usize) -> String {
    let word = WORDS[rng.random_range(0..WORDS.len())];
    let fault = FAULTS[rng.random_range(0..FAULTS.len())];
    match rng.random_range(0..4) {
        0 => format!("{word} {n} {fault}"),
        1 => format!("{word} ({n}) {fault}"),
        2 => format!("{word}/{n}: {fault}"),
        _ => format!("{word}-{n} {fault}"),
    }
}

fn label_id(label: &str) -> String {
    let mut id = String::new();
    for c in label.chars() {
        if c.is_ascii_alphanumeric() {
            id.push(c);
        } else if !id.ends_with('_') {
            id.push('_');
        }
    }
    id.trim_matches('_').to_string()
}

/// A random valid tree with between 1 and `config.max_leaves` leaves.
///
/// Built bottom-up: leaves are grouped under fresh gates until one node is
/// left, which becomes the top. Sharing adds extra edges from gates to nodes
/// that are not their ancestors, so the result stays acyclic.
pub fn random_tree(rng: &mut impl Rng, config: TreeConfig) -> FaultTree {
    let use_xor = config.allow_xor && (!config.allow_sharing || rng.random_bool(0.5));
    let use_sharing = config.allow_sharing && !use_xor;
    let leaf_budget = rng.random_range(1..=config.max_leaves.max(1));

    let mut nodes: Vec<EventNode> = Vec::new();
    let mut pool: Vec<String> = Vec::new();
    let mut leaves_made = 0usize;
    for i in 0..leaf_budget {
        let label = random_label(rng, i);
        let id = if rng.random_bool(0.5) { label_id(&label) } else { format!("e{i}") };
        let kind = match rng.random_range(0..10) {
            0 => EventKind::External,
            1 => EventKind::Undeveloped,
            _ => EventKind::Basic,
        };
        nodes.push(EventNode::new(id.clone(), label, kind));
        pool.push(id);
        leaves_made += 1;
    }

    let mut kinds = vec![GateKind::Or, GateKind::And, GateKind::PriorityAnd];
    if use_xor {
        kinds.push(GateKind::Xor);
    }
    let mut gate_n = 0;
    while pool.len() > 1 || (pool.len() == 1 && rng.random_bool(0.3) && gate_n < 3) {
        pool.shuffle(rng);
        let gate_id = format!("g{gate_n}");
        gate_n += 1;
        let inhibit = leaves_made < config.max_leaves && rng.random_range(0..8) == 0;
        let mut node = EventNode::new(gate_id.clone(), format!("Subsystem {gate_n} failure"), EventKind::Intermediate);
        if inhibit {
            let input = pool.pop().unwrap();
            let cond_id = format!("c{gate_n}");
            nodes.push(EventNode::new(cond_id.clone(), format!("Condition {gate_n} holds"), EventKind::Conditioning));
            leaves_made += 1;
            node = node.with_gate(GateSpec::inhibit(input, cond_id));
        } else {
            let k = if pool.len() == 1 || rng.random_range(0..10) == 0 {
                1
            } else {
                rng.random_range(2..=pool.len().min(4))
            };
            let children: Vec<String> = pool.split_off(pool.len() - k);
            let kind = kinds[rng.random_range(0..kinds.len())];
            node = node.with_gate(GateSpec::new(kind, children));
        }
        if rng.random_bool(0.3) {
            node = node.with_alias(format!("{gate_id}Gate"));
        }
        nodes.push(node);
        pool.push(gate_id);
    }

    let top = pool.pop().unwrap();
    let mut tree = FaultTree::new(format!("Random tree {}", rng.random_range(0..10_000)), top.clone());
    tree.default_gate = [GateKind::Or, GateKind::Or, GateKind::And, GateKind::Xor][rng.random_range(0..4)];
    for n in nodes {
        tree.insert(n);
    }
    tree.nodes.get_mut(&top).unwrap().kind = EventKind::TopEvent;

    if use_sharing {
        for _ in 0..rng.random_range(0..=3) {
            add_shared_edge(&mut tree, rng);
        }
    }
    tree
}

fn add_shared_edge(tree: &mut FaultTree, rng: &mut impl Rng) {
    let gates: Vec<String> = tree
        .nodes
        .values()
        .filter(|n| n.gate.as_ref().is_some_and(|g| g.kind != GateKind::Inhibit))
        .map(|n| n.id.clone())
        .collect();
    if gates.is_empty() {
        return;
    }
    let g = gates[rng.random_range(0..gates.len())].clone();
    let ancestors = ancestors_of(tree, &g);
    let existing: HashSet<String> = tree.nodes[&g].children().iter().cloned().collect();
    let candidates: Vec<String> = tree
        .nodes
        .values()
        .filter(|n| {
            n.id != g
                && n.id != tree.top
                && n.kind != EventKind::Conditioning
                && !ancestors.contains(&n.id)
                && !existing.contains(&n.id)
        })
        .map(|n| n.id.clone())
        .collect();
    if let Some(x) = candidates.choose(rng) {
        tree.nodes.get_mut(&g).unwrap().gate.as_mut().unwrap().children.push(x.clone());
    }
}

fn ancestors_of(tree: &FaultTree, id: &str) -> HashSet<String> {
    let mut out = HashSet::new();
    let mut stack = vec![id.to_string()];
    while let Some(cur) = stack.pop() {
        for n in tree.nodes.values() {
            if let Some(g) = &n.gate {
                if g.operands().any(|c| c == cur) && out.insert(n.id.clone()) {
                    stack.push(n.id.clone());
                }
            }
        }
    }
    out
}

/// Whether any node is reachable along more than one edge.
pub fn has_shared_nodes(tree: &FaultTree) -> bool {
    let mut refs: BTreeMap<&str, usize> = BTreeMap::new();
    for n in tree.nodes.values() {
        if let Some(g) = &n.gate {
            for c in g.operands() {
                *refs.entry(c).or_default() += 1;
            }
        }
    }
    refs.values().any(|&r| r > 1)
}

/// `count` trees from a fixed seed.
pub fn corpus(seed: u64, count: usize, config: TreeConfig) -> Vec<FaultTree> {
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    (0..count).map(|_| random_tree(&mut rng, config)).collect()
}
