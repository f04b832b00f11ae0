//! Layered layout and SVG output using the standard FTA symbols.

mod layout;
mod svg;

pub use layout::{layout_tree, Layout, Rect, GAP, GATE_HEIGHT, GATE_WIDTH, NODE_HEIGHT, NODE_WIDTH};
pub use svg::{glyph_class, render_svg, Glyph, RenderOptions};
