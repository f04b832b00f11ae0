//! Reconstruction of a [`FaultTree`] from a parsed document.
//!
//! Edges point from parent to child. A `circle` is a gate: it must have
//! exactly one parent event, whose gate it becomes, and its own children are
//! that gate's inputs. Events connected directly to their children get the
//! gate named by the edge labels, or the default gate.

use std::collections::{BTreeMap, HashMap, HashSet};

use crate::diagnostic::{has_errors, Diagnostic, Location};
use crate::model::{is_valid_id, EventKind, EventNode, FaultTree, GateKind, GateSpec};
use crate::validate::validate_tree;

use super::document::{DeclKeyword, Endpoint, PumlDocument, Statement};

#[derive(Debug, Clone, PartialEq)]
enum Class {
    Event,
    Gate,
    External,
    Undeveloped,
    Conditioning,
    TransferIn(String),
    TransferOut,
}

impl Class {
    fn from_decl(keyword: DeclKeyword, link: Option<&str>) -> Class {
        match keyword {
            DeclKeyword::Rectangle => Class::Event,
            DeclKeyword::Circle => Class::Gate,
            DeclKeyword::Usecase => Class::Conditioning,
            DeclKeyword::Cloud => Class::External,
            DeclKeyword::Card => Class::Undeveloped,
            DeclKeyword::File => match link {
                Some(target) => Class::TransferIn(target.to_string()),
                None => Class::TransferOut,
            },
        }
    }
}

struct Node {
    class: Class,
    label: String,
    alias: Option<String>,
    line: usize,
    id: String,
}

struct Link {
    from: usize,
    to: usize,
    label: Option<GateKind>,
    line: usize,
}

/// Derives a node id from a free-text label: runs of characters other than
/// ASCII letters and digits become `_`.
pub fn id_from_label(label: &str) -> String {
    let mut id = String::with_capacity(label.len());
    for c in label.chars() {
        if c.is_ascii_alphanumeric() {
            id.push(c);
        } else if !id.ends_with('_') {
            id.push('_');
        }
    }
    let id = id.trim_matches('_');
    if id.is_empty() {
        "node".to_string()
    } else {
        id.to_string()
    }
}

/// Gate kind suggested by a gate node's alias suffix (`MainOR`, `HardwareAND`).
fn kind_from_alias(alias: &str) -> Option<GateKind> {
    let upper = alias.to_ascii_uppercase();
    [
        ("INHIBIT", GateKind::Inhibit),
        ("PAND", GateKind::PriorityAnd),
        ("XOR", GateKind::Xor),
        ("AND", GateKind::And),
        ("OR", GateKind::Or),
    ]
    .into_iter()
    .find_map(|(suffix, kind)| upper.ends_with(suffix).then_some(kind))
}

struct Builder<'d> {
    doc: &'d PumlDocument,
    nodes: Vec<Node>,
    by_alias: HashMap<String, usize>,
    by_label: HashMap<String, usize>,
    links: Vec<Link>,
    diagnostics: Vec<Diagnostic>,
}

impl<'d> Builder<'d> {
    fn error(&mut self, line: usize, rule: &str, message: impl Into<String>) {
        self.diagnostics.push(Diagnostic::error(rule, message, self.doc.location(line)));
    }

    fn declare(&mut self, class: Class, label: &str, alias: Option<&str>, line: usize) {
        let alias = alias
            .map(str::to_string)
            .or_else(|| is_valid_id(label).then(|| label.to_string()));
        match &alias {
            Some(a) if self.by_alias.contains_key(a) => {
                self.error(line, "duplicate-alias", format!("`{a}` is declared more than once"));
                return;
            }
            None if self.by_label.contains_key(label) => {
                self.error(line, "duplicate-declaration", format!("\"{label}\" is declared more than once"));
                return;
            }
            _ => {}
        }
        let idx = self.nodes.len();
        match &alias {
            Some(a) => {
                self.by_alias.insert(a.clone(), idx);
                if a == label {
                    self.by_label.entry(label.to_string()).or_insert(idx);
                }
            }
            None => {
                self.by_label.insert(label.to_string(), idx);
            }
        }
        self.nodes.push(Node {
            class,
            label: label.to_string(),
            alias,
            line,
            id: String::new(),
        });
    }

    fn collect_declarations(&mut self, statements: &'d [Statement]) {
        for s in statements {
            match s {
                Statement::NodeDecl(d) => {
                    let class = Class::from_decl(d.keyword, d.link.as_deref());
                    self.declare(class, &d.label, d.alias.as_deref(), d.line);
                }
                Statement::PackageBlock {
                    line,
                    label,
                    alias,
                    statements,
                } => {
                    self.declare(Class::Event, label, alias.as_deref(), *line);
                    self.collect_declarations(statements);
                }
                _ => {}
            }
        }
    }

    fn resolve(&mut self, endpoint: &Endpoint, line: usize) -> Option<usize> {
        match endpoint {
            Endpoint::Alias(a) => match self.by_alias.get(a) {
                Some(&i) => Some(i),
                None => {
                    self.error(line, "unknown-alias", format!("`{a}` is not declared"));
                    None
                }
            },
            Endpoint::Quoted(label) | Endpoint::Paren(label) => {
                if let Some(&i) = self.by_label.get(label) {
                    return Some(i);
                }
                let idx = self.nodes.len();
                self.by_label.insert(label.clone(), idx);
                self.nodes.push(Node {
                    class: Class::Event,
                    label: label.clone(),
                    alias: None,
                    line,
                    id: String::new(),
                });
                Some(idx)
            }
        }
    }

    fn collect_edges(&mut self, statements: &'d [Statement]) {
        for s in statements {
            match s {
                Statement::Edge(e) => {
                    let from = self.resolve(&e.from, e.line);
                    let to = self.resolve(&e.to, e.line);
                    let (Some(from), Some(to)) = (from, to) else { continue };
                    if from == to {
                        self.error(e.line, "self-loop", "an edge cannot connect a node to itself");
                        continue;
                    }
                    if self.links.iter().any(|l| l.from == from && l.to == to) {
                        self.error(e.line, "duplicate-edge", "this connection is already declared");
                        continue;
                    }
                    let label = e.label.as_deref().and_then(|l| l.parse().ok());
                    self.links.push(Link {
                        from,
                        to,
                        label,
                        line: e.line,
                    });
                }
                Statement::PackageBlock { statements, .. } => self.collect_edges(statements),
                _ => {}
            }
        }
    }

    fn assign_ids(&mut self) {
        let mut taken: HashSet<String> = self.nodes.iter().filter_map(|n| n.alias.clone()).collect();
        for node in &mut self.nodes {
            node.id = match &node.alias {
                Some(a) => a.clone(),
                None => {
                    let base = id_from_label(&node.label);
                    let mut candidate = base.clone();
                    let mut n = 2;
                    while taken.contains(&candidate) {
                        candidate = format!("{base}_{n}");
                        n += 1;
                    }
                    taken.insert(candidate.clone());
                    candidate
                }
            };
        }
    }
}

struct GateInfo {
    kind: GateKind,
    alias: Option<String>,
    /// Child node indices, in edge order.
    children: Vec<usize>,
    line: usize,
}

/// Builds and validates the tree. Any error-severity finding, syntactic or
/// structural, is returned instead of the tree. Warnings accompany the tree.
pub fn build_tree(
    doc: &PumlDocument,
    default_gate: GateKind,
) -> Result<(FaultTree, Vec<Diagnostic>), Vec<Diagnostic>> {
    let mut b = Builder {
        doc,
        nodes: Vec::new(),
        by_alias: HashMap::new(),
        by_label: HashMap::new(),
        links: Vec::new(),
        diagnostics: Vec::new(),
    };
    b.collect_declarations(&doc.statements);
    b.collect_edges(&doc.statements);
    if has_errors(&b.diagnostics) {
        return Err(b.diagnostics);
    }
    b.assign_ids();

    let n = b.nodes.len();
    let mut out_links: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut in_links: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, l) in b.links.iter().enumerate() {
        out_links[l.from].push(i);
        in_links[l.to].push(i);
    }
    let gate_flags: Vec<bool> = b.nodes.iter().map(|n| n.class == Class::Gate).collect();
    let is_gate = |i: usize| gate_flags[i];

    // Gate nodes: one parent event, at least one input.
    let mut gate_owner: BTreeMap<usize, usize> = BTreeMap::new();
    let mut errors: Vec<(usize, &str, String)> = Vec::new();
    for g in (0..n).filter(|&i| is_gate(i)) {
        let name = &b.nodes[g].id;
        match in_links[g].as_slice() {
            [] => errors.push((b.nodes[g].line, "gate-without-parent", format!("gate `{name}` has no parent event"))),
            [only] => {
                let parent = b.links[*only].from;
                if is_gate(parent) {
                    errors.push((
                        b.links[*only].line,
                        "gate-feeds-gate",
                        format!("gate `{}` connects directly to gate `{name}`; put an event between them", b.nodes[parent].id),
                    ));
                } else {
                    gate_owner.insert(g, parent);
                }
            }
            [_, second, ..] => errors.push((
                b.links[*second].line,
                "gate-multiple-parents",
                format!("gate `{name}` has more than one parent event"),
            )),
        }
        if out_links[g].is_empty() {
            errors.push((b.nodes[g].line, "gate-without-inputs", format!("gate `{name}` has no inputs")));
        }
        for &li in &out_links[g] {
            if b.links[li].label.is_some() {
                errors.push((
                    b.links[li].line,
                    "label-after-gate",
                    "gate names belong on the edge into the gate, not out of it".into(),
                ));
            }
        }
    }

    let mut gates: BTreeMap<usize, GateInfo> = BTreeMap::new();
    for e in (0..n).filter(|&i| !is_gate(i)) {
        let outs = &out_links[e];
        if outs.is_empty() {
            continue;
        }
        let gate_links: Vec<usize> = outs.iter().copied().filter(|&li| is_gate(b.links[li].to)).collect();
        let event_links: Vec<usize> = outs.iter().copied().filter(|&li| !is_gate(b.links[li].to)).collect();
        if gate_links.len() > 1 {
            errors.push((
                b.links[gate_links[1]].line,
                "multiple-gates",
                format!("`{}` already has a gate", b.nodes[e].id),
            ));
            continue;
        }
        if let Some(&gl) = gate_links.first() {
            if let Some(&first_event) = event_links.first() {
                errors.push((
                    b.links[first_event].line,
                    "mixed-gate-children",
                    format!("`{}` has a gate, so its inputs must hang off the gate", b.nodes[e].id),
                ));
                continue;
            }
            let g = b.links[gl].to;
            let alias = b.nodes[g].id.clone();
            let kind = b.links[gl]
                .label
                .or_else(|| kind_from_alias(&alias))
                .unwrap_or(default_gate);
            gates.insert(
                e,
                GateInfo {
                    kind,
                    alias: Some(alias),
                    children: out_links[g].iter().map(|&li| b.links[li].to).collect(),
                    line: b.nodes[g].line,
                },
            );
        } else {
            let mut kind = None;
            for &li in &event_links {
                if let Some(k) = b.links[li].label {
                    match kind {
                        Some(prev) if prev != k => errors.push((
                            b.links[li].line,
                            "conflicting-edge-labels",
                            format!("`{}` is already connected through a {prev} gate", b.nodes[e].id),
                        )),
                        _ => kind = Some(k),
                    }
                }
            }
            gates.insert(
                e,
                GateInfo {
                    kind: kind.unwrap_or(default_gate),
                    alias: None,
                    children: event_links.iter().map(|&li| b.links[li].to).collect(),
                    line: b.links[event_links[0]].line,
                },
            );
        }
    }
    for (line, rule, msg) in errors {
        b.error(line, rule, msg);
    }
    if has_errors(&b.diagnostics) {
        b.diagnostics.sort_by_key(|d| d.file_line().unwrap_or(0));
        return Err(b.diagnostics);
    }

    // Parents at event level, gates collapsed.
    let mut has_parent = vec![false; n];
    for info in gates.values() {
        for &c in &info.children {
            has_parent[c] = true;
        }
    }
    let events: Vec<usize> = (0..n).filter(|&i| !is_gate(i)).collect();
    let roots: Vec<usize> = events.iter().copied().filter(|&i| !has_parent[i]).collect();
    let Some(&top) = roots.first() else {
        let loc = match events.first() {
            Some(&i) => doc.location(b.nodes[i].line),
            None => doc.location(doc.start_index.unwrap_or(0)),
        };
        let (rule, msg) = if events.is_empty() {
            ("empty-diagram", "the diagram declares no events")
        } else {
            ("no-top-event", "every event has a parent; the connections form a cycle")
        };
        return Err(vec![Diagnostic::error(rule, msg, loc)]);
    };
    for &extra in &roots[1..] {
        let node = &b.nodes[extra];
        let msg = format!(
            "`{}` has no parent; only the top event `{}` may be parentless",
            node.id, b.nodes[top].id
        );
        b.error(node.line, "multiple-top-events", msg);
    }
    if has_errors(&b.diagnostics) {
        return Err(b.diagnostics);
    }

    let mut tree = FaultTree::new(doc.title.clone(), b.nodes[top].id.clone());
    tree.default_gate = default_gate;
    let mut node_lines: HashMap<String, usize> = HashMap::new();
    for &e in &events {
        let src = &b.nodes[e];
        let info = gates.get(&e);
        let kind = match &src.class {
            Class::Event if e == top => EventKind::TopEvent,
            Class::Event if info.is_some() => EventKind::Intermediate,
            Class::Event => EventKind::Basic,
            Class::External => EventKind::External,
            Class::Undeveloped => EventKind::Undeveloped,
            Class::Conditioning => EventKind::Conditioning,
            Class::TransferIn(t) => EventKind::TransferIn(t.clone()),
            Class::TransferOut => EventKind::TransferOut,
            Class::Gate => unreachable!("gates are not events"),
        };
        let mut node = EventNode::new(src.id.clone(), src.label.clone(), kind);
        node_lines.insert(src.id.clone(), info.map_or(src.line, |g| g.line));
        if let Some(info) = info {
            let mut spec = GateSpec::new(info.kind, Vec::<String>::new());
            for &c in &info.children {
                let child = &b.nodes[c];
                if info.kind == GateKind::Inhibit && child.class == Class::Conditioning && spec.condition.is_none() {
                    spec.condition = Some(child.id.clone());
                } else {
                    spec.children.push(child.id.clone());
                }
            }
            node.gate = Some(spec);
            node.gate_alias = info.alias.clone();
        }
        tree.insert(node);
    }

    let located: Vec<Diagnostic> = validate_tree(&tree)
        .into_iter()
        .map(|mut d| {
            if let Location::Node(id) = &d.location {
                if let Some(&line) = node_lines.get(id) {
                    d.location = doc.location(line);
                }
            }
            d
        })
        .collect();
    if has_errors(&located) {
        Err(located)
    } else {
        Ok((tree, located))
    }
}
