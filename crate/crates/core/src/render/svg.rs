use std::fmt::Write;

use crate::error::{FtaError, Result};
use crate::model::{EventKind, EventNode, FaultTree, GateKind};
use crate::validate::ensure_valid;

use super::layout::{Layout, Rect};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenderOptions {
    /// Multiplier from layout units to output pixels.
    pub scale: f64,
}

impl Default for RenderOptions {
    fn default() -> Self {
        RenderOptions { scale: 1.0 }
    }
}

/// The symbol drawn for an event or gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Glyph {
    Rectangle,
    Circle,
    Diamond,
    House,
    Oval,
    Triangle,
    And,
    Or,
    Xor,
    PriorityAnd,
    Inhibit,
}

impl Glyph {
    pub fn for_event(kind: &EventKind) -> Glyph {
        match kind {
            EventKind::TopEvent | EventKind::Intermediate => Glyph::Rectangle,
            EventKind::Basic => Glyph::Circle,
            EventKind::Undeveloped => Glyph::Diamond,
            EventKind::External => Glyph::House,
            EventKind::Conditioning => Glyph::Oval,
            EventKind::TransferIn(_) | EventKind::TransferOut => Glyph::Triangle,
        }
    }

    pub fn for_gate(kind: GateKind) -> Glyph {
        match kind {
            GateKind::And => Glyph::And,
            GateKind::Or => Glyph::Or,
            GateKind::Xor => Glyph::Xor,
            GateKind::PriorityAnd => Glyph::PriorityAnd,
            GateKind::Inhibit => Glyph::Inhibit,
        }
    }
}

/// CSS class carried by every element drawing `glyph`, besides `glyph`.
pub fn glyph_class(glyph: Glyph) -> &'static str {
    match glyph {
        Glyph::Rectangle => "glyph-rectangle",
        Glyph::Circle => "glyph-circle",
        Glyph::Diamond => "glyph-diamond",
        Glyph::House => "glyph-house",
        Glyph::Oval => "glyph-oval",
        Glyph::Triangle => "glyph-triangle",
        Glyph::And => "glyph-and",
        Glyph::Or => "glyph-or",
        Glyph::Xor => "glyph-xor",
        Glyph::PriorityAnd => "glyph-pand",
        Glyph::Inhibit => "glyph-inhibit",
    }
}

fn num(v: f64) -> String {
    let s = format!("{v:.2}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// Splits a label at literal `\n` markers, then wraps words to `max` chars.
fn wrap(label: &str, max: usize) -> Vec<String> {
    let mut lines = Vec::new();
    for part in label.split("\\n") {
        let mut line = String::new();
        for word in part.split_whitespace() {
            if !line.is_empty() && line.chars().count() + 1 + word.chars().count() > max {
                lines.push(std::mem::take(&mut line));
            }
            if !line.is_empty() {
                line.push(' ');
            }
            line.push_str(word);
        }
        if !line.is_empty() {
            lines.push(line);
        }
    }
    if lines.is_empty() {
        lines.push(label.trim().to_string());
    }
    lines
}

const FONT_SIZE: f64 = 11.0;
const LINE_HEIGHT: f64 = 13.0;
const WRAP_CHARS: usize = 26;

fn text_block(out: &mut String, lines: &[String], cx: f64, first_baseline: f64) {
    let _ = write!(out, "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">", num(cx), num(first_baseline));
    for (i, line) in lines.iter().enumerate() {
        if i == 0 {
            let _ = write!(out, "<tspan x=\"{}\">{}</tspan>", num(cx), escape(line));
        } else {
            let _ = write!(out, "<tspan x=\"{}\" dy=\"{}\">{}</tspan>", num(cx), num(LINE_HEIGHT), escape(line));
        }
    }
    out.push_str("</text>\n");
}

fn event_glyph(out: &mut String, node: &EventNode, r: &Rect) {
    let glyph = Glyph::for_event(&node.kind);
    let class = format!("glyph {}", glyph_class(glyph));
    let (x, y, w, h) = (r.x, r.y, r.width, r.height);
    let cx = r.center_x();
    let cy = y + h / 2.0;
    let lines = wrap(&node.label, WRAP_CHARS);
    let inside = y + h / 2.0 - (lines.len() as f64 - 1.0) * LINE_HEIGHT / 2.0 + FONT_SIZE * 0.35;
    match glyph {
        Glyph::Rectangle => {
            let _ = writeln!(
                out,
                "<rect class=\"{class}\" x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" rx=\"6\"/>",
                num(x),
                num(y),
                num(w),
                num(h)
            );
            text_block(out, &lines, cx, inside);
        }
        Glyph::Circle => {
            let _ = writeln!(
                out,
                "<circle class=\"{class}\" cx=\"{}\" cy=\"{}\" r=\"{}\"/>",
                num(cx),
                num(cy),
                num(h / 2.0)
            );
            text_block(out, &lines, cx, y + h + FONT_SIZE + 2.0);
        }
        Glyph::Diamond => {
            let _ = writeln!(
                out,
                "<polygon class=\"{class}\" points=\"{},{} {},{} {},{} {},{}\"/>",
                num(cx),
                num(y),
                num(x + w),
                num(cy),
                num(cx),
                num(y + h),
                num(x),
                num(cy)
            );
            text_block(out, &lines, cx, inside);
        }
        Glyph::House => {
            let eave = y + h * 0.3;
            let _ = writeln!(
                out,
                "<polygon class=\"{class}\" points=\"{},{} {},{} {},{} {},{} {},{}\"/>",
                num(x),
                num(eave),
                num(cx),
                num(y),
                num(x + w),
                num(eave),
                num(x + w),
                num(y + h),
                num(x),
                num(y + h)
            );
            text_block(out, &lines, cx, inside + h * 0.1);
        }
        Glyph::Oval => {
            let _ = writeln!(
                out,
                "<ellipse class=\"{class}\" cx=\"{}\" cy=\"{}\" rx=\"{}\" ry=\"{}\"/>",
                num(cx),
                num(cy),
                num(w / 2.0),
                num(h / 2.0)
            );
            text_block(out, &lines, cx, inside);
        }
        Glyph::Triangle => {
            let half = h * 0.6;
            let _ = writeln!(
                out,
                "<polygon class=\"{class}\" points=\"{},{} {},{} {},{}\"/>",
                num(x + half),
                num(y),
                num(x + 2.0 * half),
                num(y + h),
                num(x),
                num(y + h)
            );
            let _ = write!(out, "<text x=\"{}\" y=\"{}\" text-anchor=\"start\">", num(x + 2.0 * half + 6.0), num(inside));
            for (i, line) in lines.iter().enumerate() {
                let dy = if i == 0 { String::new() } else { format!(" dy=\"{}\"", num(LINE_HEIGHT)) };
                let _ = write!(out, "<tspan x=\"{}\"{dy}>{}</tspan>", num(x + 2.0 * half + 6.0), escape(line));
            }
            out.push_str("</text>\n");
        }
        _ => unreachable!("events never use gate glyphs"),
    }
}

fn gate_glyph(out: &mut String, kind: GateKind, r: &Rect) {
    let glyph = Glyph::for_gate(kind);
    let class = format!("glyph {}", glyph_class(glyph));
    let (x, y, w, h) = (r.x, r.y, r.width, r.height);
    let cx = r.center_x();
    let and_path = |top: f64, bottom: f64| {
        let mid = top + (bottom - top) / 2.0;
        format!(
            "M {x0},{b} L {x0},{m} A {rx},{ry} 0 0 1 {x1},{m} L {x1},{b} Z",
            x0 = num(x),
            x1 = num(x + w),
            b = num(bottom),
            m = num(mid),
            rx = num(w / 2.0),
            ry = num(mid - top)
        )
    };
    let or_path = |top: f64, bottom: f64| {
        let hh = bottom - top;
        format!(
            "M {x0},{b} Q {c},{dip} {x1},{b} Q {x1c},{shoulder} {c},{t} Q {x0c},{shoulder} {x0},{b} Z",
            x0 = num(x),
            x1 = num(x + w),
            x0c = num(x + w * 0.1),
            x1c = num(x + w * 0.9),
            c = num(cx),
            b = num(bottom),
            t = num(top),
            dip = num(bottom - hh * 0.3),
            shoulder = num(top + hh * 0.3)
        )
    };
    let d = match kind {
        GateKind::And => and_path(y, y + h),
        GateKind::Or => or_path(y, y + h),
        GateKind::Xor => {
            let body = y + h * 0.85;
            format!(
                "{} M {},{} Q {},{} {},{}",
                or_path(y, body),
                num(x),
                num(y + h),
                num(cx),
                num(y + h - h * 0.3),
                num(x + w),
                num(y + h)
            )
        }
        GateKind::PriorityAnd => format!(
            "{} M {},{} L {},{}",
            and_path(y, y + h),
            num(x + w * 0.2),
            num(y + h),
            num(x + w * 0.8),
            num(y + h * 0.35)
        ),
        GateKind::Inhibit => {
            let q = w * 0.25;
            format!(
                "M {},{} L {},{} L {},{} L {},{} L {},{} L {},{} Z",
                num(x + q),
                num(y),
                num(x + w - q),
                num(y),
                num(x + w),
                num(y + h / 2.0),
                num(x + w - q),
                num(y + h),
                num(x + q),
                num(y + h),
                num(x),
                num(y + h / 2.0)
            )
        }
    };
    let _ = writeln!(out, "<path class=\"{class}\" d=\"{d}\"/>");
}

fn connector(out: &mut String, from: &str, to: &str, points: &[(f64, f64)]) {
    let pts: Vec<String> = points.iter().map(|(x, y)| format!("{},{}", num(*x), num(*y))).collect();
    let _ = writeln!(
        out,
        "<polyline class=\"connector\" data-from=\"{from}\" data-to=\"{to}\" points=\"{}\"/>",
        pts.join(" ")
    );
}

/// Draws `tree` at the positions in `layout` as a standalone SVG document.
///
/// Connectors are orthogonal polylines from the bottom edge of a box to the
/// top edge of the next. Each carries `data-from` and `data-to` naming the
/// boxes it joins; a gate box is named `{owner}#gate`.
pub fn render_svg(tree: &FaultTree, layout: &Layout, options: &RenderOptions) -> Result<String> {
    ensure_valid(tree)?;
    for id in layout.nodes.keys().chain(layout.gates.keys()) {
        if !tree.nodes.contains_key(id) {
            return Err(FtaError::LayoutMismatch(format!("layout places unknown node `{id}`")));
        }
    }
    for id in tree.bfs_order() {
        if !layout.nodes.contains_key(id) {
            return Err(FtaError::LayoutMismatch(format!("node `{id}` has no position")));
        }
        if tree.nodes[id].gate.is_some() != layout.gates.contains_key(id) {
            return Err(FtaError::LayoutMismatch(format!("gate box of `{id}` does not match the tree")));
        }
    }

    let scale = options.scale;
    let mut out = String::new();
    out.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    let _ = writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\" \
         font-family=\"sans-serif\" font-size=\"{}\">",
        num(layout.width * scale),
        num(layout.height * scale),
        num(layout.width),
        num(layout.height),
        num(FONT_SIZE)
    );
    let _ = writeln!(out, "<title>{}</title>", escape(&tree.title));

    out.push_str("<g class=\"connectors\" fill=\"none\" stroke=\"#333\" stroke-width=\"1.2\">\n");
    for (owner, gate_box) in &layout.gates {
        let node_box = &layout.nodes[owner];
        connector(
            &mut out,
            owner,
            &format!("{owner}#gate"),
            &[(node_box.center_x(), node_box.bottom()), (gate_box.center_x(), gate_box.y)],
        );
        let gate = tree.nodes[owner].gate.as_ref().expect("gate boxes belong to gated nodes");
        for child in gate.operands() {
            let child_box = &layout.nodes[child];
            let (sx, sy) = (gate_box.center_x(), gate_box.bottom());
            let (ex, ey) = (child_box.center_x(), child_box.y);
            let bend = sy + crate::render::GAP / 2.0;
            let points = if (sx - ex).abs() < 1e-9 {
                vec![(sx, sy), (ex, ey)]
            } else {
                vec![(sx, sy), (sx, bend), (ex, bend), (ex, ey)]
            };
            connector(&mut out, &format!("{owner}#gate"), child, &points);
        }
    }
    out.push_str("</g>\n");

    out.push_str("<g class=\"nodes\" fill=\"#fff\" stroke=\"#222\" stroke-width=\"1.5\">\n");
    for (id, r) in &layout.nodes {
        let _ = writeln!(out, "<g class=\"event\" data-id=\"{id}\">");
        event_glyph(&mut out, &tree.nodes[id], r);
        out.push_str("</g>\n");
    }
    for (owner, r) in &layout.gates {
        let kind = tree.nodes[owner].gate.as_ref().expect("gated").kind;
        let _ = writeln!(out, "<g class=\"gate\" data-owner=\"{owner}\">");
        let _ = writeln!(out, "<title>{}</title>", kind.token());
        gate_glyph(&mut out, kind, r);
        out.push_str("</g>\n");
    }
    out.push_str("</g>\n</svg>\n");
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_are_compact_and_fixed() {
        assert_eq!(num(12.0), "12");
        assert_eq!(num(12.5), "12.5");
        assert_eq!(num(1.0 / 3.0), "0.33");
        assert_eq!(num(-0.001), "0");
    }

    #[test]
    fn labels_wrap_and_escape() {
        assert_eq!(wrap("a\\nb c", 26), vec!["a", "b c"]);
        assert_eq!(wrap("alpha beta gamma", 10), vec!["alpha beta", "gamma"]);
        assert_eq!(escape("a<b & \"c\""), "a&lt;b &amp; &quot;c&quot;");
    }
}
