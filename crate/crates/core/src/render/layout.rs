use std::collections::{BTreeMap, HashMap};

use serde::Serialize;

use crate::error::Result;
use crate::model::FaultTree;
use crate::validate::ensure_valid;

pub const NODE_WIDTH: f64 = 160.0;
pub const NODE_HEIGHT: f64 = 40.0;
pub const GATE_WIDTH: f64 = 48.0;
pub const GATE_HEIGHT: f64 = 40.0;
pub const GAP: f64 = 24.0;
/// Room under the last row for labels drawn below their glyph.
const LABEL_ROOM: f64 = 28.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Rect {
    pub x: f64,
    pub y: f64,
    pub width: f64,
    pub height: f64,
}

impl Rect {
    pub fn center_x(&self) -> f64 {
        self.x + self.width / 2.0
    }

    pub fn bottom(&self) -> f64 {
        self.y + self.height
    }

    pub fn right(&self) -> f64 {
        self.x + self.width
    }

    pub fn overlaps(&self, other: &Rect) -> bool {
        self.x < other.right() && other.x < self.right() && self.y < other.bottom() && other.y < self.bottom()
    }

    /// True when `(px, py)` lies on the rectangle's border.
    pub fn touches(&self, px: f64, py: f64) -> bool {
        const EPS: f64 = 1e-9;
        let inside_x = px >= self.x - EPS && px <= self.right() + EPS;
        let inside_y = py >= self.y - EPS && py <= self.bottom() + EPS;
        let on_x = (px - self.x).abs() < EPS || (px - self.right()).abs() < EPS;
        let on_y = (py - self.y).abs() < EPS || (py - self.bottom()).abs() < EPS;
        (inside_x && on_y) || (inside_y && on_x)
    }
}

/// Positions in abstract units. Event depth `d` sits on row `2d`; the gate
/// of an event at depth `d` sits on row `2d + 1`, between it and its inputs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Layout {
    pub nodes: BTreeMap<String, Rect>,
    /// Gate glyph boxes keyed by the id of the event that owns the gate.
    pub gates: BTreeMap<String, Rect>,
    /// Event depth: longest path from the top, so parents are always above.
    pub levels: BTreeMap<String, usize>,
    pub width: f64,
    pub height: f64,
}

impl Layout {
    /// Number of distinct event depths.
    pub fn depth_count(&self) -> usize {
        self.levels.values().max().map_or(0, |m| m + 1)
    }

    /// Event ids at depth `d`, left to right.
    pub fn at_level(&self, d: usize) -> Vec<&str> {
        let mut ids: Vec<&str> = self
            .levels
            .iter()
            .filter(|(_, &l)| l == d)
            .map(|(id, _)| id.as_str())
            .collect();
        ids.sort_by(|a, b| self.nodes[*a].x.total_cmp(&self.nodes[*b].x));
        ids
    }
}

fn row_y(row: usize) -> f64 {
    GAP + row as f64 * (NODE_HEIGHT + GAP)
}

/// Lays the tree out top-down. Siblings keep gate input order; each subtree
/// gets a horizontal band as wide as its widest row, so boxes never overlap.
pub fn layout_tree(tree: &FaultTree) -> Result<Layout> {
    ensure_valid(tree)?;
    let order = tree.bfs_order();

    // Longest-path depth, by relaxation in breadth-first order until stable.
    let mut level: HashMap<&str, usize> = HashMap::from([(tree.top.as_str(), 0)]);
    let mut changed = true;
    while changed {
        changed = false;
        for &id in &order {
            let d = level[id];
            if let Some(gate) = &tree.nodes[id].gate {
                for child in gate.operands() {
                    let entry = level.entry(tree.nodes.get_key_value(child).unwrap().0.as_str()).or_insert(0);
                    if *entry < d + 1 {
                        *entry = d + 1;
                        changed = true;
                    }
                }
            }
        }
    }

    // Spanning tree: each node hangs under its first parent one level up.
    let parents = tree.parents();
    let mut kids: HashMap<&str, Vec<&str>> = HashMap::new();
    for &id in &order {
        let Some(gate) = &tree.nodes[id].gate else { continue };
        for child in gate.operands() {
            let child = tree.nodes.get_key_value(child).unwrap().0.as_str();
            let owner = parents[child].iter().copied().find(|p| level[p] + 1 == level[child]);
            if owner == Some(id) && !kids.get(id).is_some_and(|k| k.contains(&child)) {
                kids.entry(id).or_default().push(child);
            }
        }
    }

    fn width_of<'t>(id: &'t str, kids: &HashMap<&'t str, Vec<&'t str>>, memo: &mut HashMap<&'t str, f64>) -> f64 {
        if let Some(&w) = memo.get(id) {
            return w;
        }
        let children = kids.get(id).map(Vec::as_slice).unwrap_or(&[]);
        let sum: f64 = children.iter().map(|c| width_of(c, kids, memo)).sum::<f64>()
            + GAP * children.len().saturating_sub(1) as f64;
        let w = sum.max(NODE_WIDTH);
        memo.insert(id, w);
        w
    }

    fn place<'t>(
        id: &'t str,
        left: f64,
        kids: &HashMap<&'t str, Vec<&'t str>>,
        widths: &mut HashMap<&'t str, f64>,
        centers: &mut HashMap<&'t str, f64>,
    ) {
        let width = width_of(id, kids, widths);
        let children = kids.get(id).map(Vec::as_slice).unwrap_or(&[]);
        let center = if children.is_empty() {
            left + width / 2.0
        } else {
            let total: f64 = children.iter().map(|c| width_of(c, kids, widths)).sum::<f64>()
                + GAP * (children.len() - 1) as f64;
            let mut x = left + (width - total) / 2.0;
            for c in children {
                place(c, x, kids, widths, centers);
                x += width_of(c, kids, widths) + GAP;
            }
            (centers[children[0]] + centers[children[children.len() - 1]]) / 2.0
        };
        centers.insert(id, center);
    }

    let mut widths = HashMap::new();
    let mut centers = HashMap::new();
    place(&tree.top, GAP, &kids, &mut widths, &mut centers);

    let mut layout = Layout {
        nodes: BTreeMap::new(),
        gates: BTreeMap::new(),
        levels: BTreeMap::new(),
        width: width_of(&tree.top, &kids, &mut widths) + 2.0 * GAP,
        height: 0.0,
    };
    let mut max_row = 0;
    for &id in &order {
        let d = level[id];
        let cx = centers[id];
        layout.nodes.insert(
            id.to_string(),
            Rect {
                x: cx - NODE_WIDTH / 2.0,
                y: row_y(2 * d),
                width: NODE_WIDTH,
                height: NODE_HEIGHT,
            },
        );
        layout.levels.insert(id.to_string(), d);
        max_row = max_row.max(2 * d);
        if tree.nodes[id].gate.is_some() {
            layout.gates.insert(
                id.to_string(),
                Rect {
                    x: cx - GATE_WIDTH / 2.0,
                    y: row_y(2 * d + 1),
                    width: GATE_WIDTH,
                    height: GATE_HEIGHT,
                },
            );
            max_row = max_row.max(2 * d + 1);
        }
    }
    layout.height = row_y(max_row) + NODE_HEIGHT + GAP + LABEL_ROOM;
    Ok(layout)
}
