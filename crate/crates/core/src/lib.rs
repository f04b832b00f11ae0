//! Fault-tree analysis: data model, validation, PlantUML codec, minimal cut
//! sets, top-event probability and SVG rendering.

pub mod analysis;
pub mod bundled;
pub mod diagnostic;
pub mod error;
pub mod json;
pub mod model;
pub mod puml;
pub mod render;
pub mod transfer;
pub mod validate;

pub use analysis::{
    evaluate_boolean, minimal_cut_sets, top_probability, CutSetReport, ProbabilityMethod, ProbabilityReport,
};
pub use bundled::Example;
pub use diagnostic::{has_errors, render_all, render_diagnostic, Diagnostic, Location, Severity};
pub use error::{FtaError, Result};
pub use json::{from_json, to_json};
pub use model::{CutSet, EventKind, EventNode, FaultTree, GateKind, GateSpec};
pub use puml::{emit_plantuml, extract_uml_block, parse_plantuml, EmitStyle};
pub use render::{layout_tree, render_svg, Layout, Rect, RenderOptions};
pub use transfer::resolve_transfers;
pub use validate::validate_tree;
