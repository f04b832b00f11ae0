//! Python module `fta`: parse, check, analyse and render fault trees.

use std::collections::{BTreeMap, BTreeSet};

use fta_copilot::{run_repair_loop, ChatProvider, ScriptedProvider, Transcript};
use fta_core::puml::parse_plantuml_with_warnings;
use fta_core::{
    emit_plantuml, evaluate_boolean, extract_uml_block, from_json, layout_tree, minimal_cut_sets, render_all,
    render_svg, to_json, top_probability, validate_tree, Diagnostic, EmitStyle, Example, FtaError, GateKind,
    RenderOptions,
};
use pyo3::create_exception;
use pyo3::exceptions::{PyException, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;

create_exception!(fta, TreeError, PyException, "Invalid input or failed analysis.");

fn core_err(e: FtaError) -> PyErr {
    match e {
        FtaError::InvalidTree(d) => TreeError::new_err(render_all(&d)),
        other => TreeError::new_err(other.to_string()),
    }
}

fn diag_err(d: Vec<Diagnostic>) -> PyErr {
    TreeError::new_err(render_all(&d))
}

fn gate(name: &str) -> PyResult<GateKind> {
    name.parse().map_err(|e: fta_core::model::UnknownGateKind| PyValueError::new_err(e.to_string()))
}

fn style(name: &str) -> PyResult<EmitStyle> {
    match name {
        "flat" => Ok(EmitStyle::Flat),
        "gated" => Ok(EmitStyle::Gated),
        other => Err(PyValueError::new_err(format!("unknown style `{other}`; use `flat` or `gated`"))),
    }
}

fn diagnostic_dict<'py>(py: Python<'py>, d: &Diagnostic) -> PyResult<Bound<'py, PyDict>> {
    let dict = PyDict::new(py);
    dict.set_item("severity", d.severity.to_string())?;
    dict.set_item("rule", &d.rule)?;
    dict.set_item("message", &d.message)?;
    dict.set_item("diagram_line", d.diagram_line())?;
    dict.set_item("file_line", d.file_line())?;
    dict.set_item("node", d.node())?;
    dict.set_item("rendered", fta_core::render_diagnostic(d))?;
    Ok(dict)
}

/// A validated fault tree.
#[pyclass(name = "FaultTree", module = "fta", skip_from_py_object)]
#[derive(Clone)]
struct PyFaultTree {
    inner: fta_core::FaultTree,
}

#[pymethods]
impl PyFaultTree {
    /// Parses PlantUML text. Raises `TreeError` with the rendered
    /// diagnostics when the text has errors.
    #[staticmethod]
    #[pyo3(signature = (text, default_gate = "OR"))]
    fn from_plantuml(text: &str, default_gate: &str) -> PyResult<Self> {
        let parsed = parse_plantuml_with_warnings(text, gate(default_gate)?).map_err(diag_err)?;
        Ok(PyFaultTree { inner: parsed.tree })
    }

    #[staticmethod]
    fn from_json(text: &str) -> PyResult<Self> {
        Ok(PyFaultTree {
            inner: from_json(text).map_err(diag_err)?,
        })
    }

    /// One of `lidar-initial`, `lidar-final`, `lidar-performance`.
    #[staticmethod]
    fn example(name: &str) -> PyResult<Self> {
        let example = Example::from_name(name).ok_or_else(|| PyValueError::new_err(format!("no example `{name}`")))?;
        Ok(PyFaultTree { inner: example.tree() })
    }

    #[getter]
    fn title(&self) -> &str {
        &self.inner.title
    }

    #[getter]
    fn top(&self) -> &str {
        &self.inner.top
    }

    #[getter]
    fn default_gate(&self) -> &'static str {
        self.inner.default_gate.token()
    }

    /// Leaf ids reachable from the top, sorted.
    fn leaves(&self) -> Vec<String> {
        self.inner.leaves().into_iter().map(str::to_string).collect()
    }

    fn node_ids(&self) -> Vec<String> {
        self.inner.nodes.keys().cloned().collect()
    }

    /// `{"id", "label", "kind", "gate", "children"}` for one node.
    fn node<'py>(&self, py: Python<'py>, id: &str) -> PyResult<Bound<'py, PyDict>> {
        let n = self
            .inner
            .node(id)
            .ok_or_else(|| PyValueError::new_err(format!("no node `{id}`")))?;
        let dict = PyDict::new(py);
        dict.set_item("id", &n.id)?;
        dict.set_item("label", &n.label)?;
        dict.set_item("kind", n.kind.name())?;
        dict.set_item("gate", n.gate.as_ref().map(|g| g.kind.token()))?;
        dict.set_item("children", n.children().to_vec())?;
        Ok(dict)
    }

    fn gate_count(&self) -> usize {
        self.inner.gate_count()
    }

    /// Validation findings as dictionaries, warnings included.
    fn validate<'py>(&self, py: Python<'py>) -> PyResult<Vec<Bound<'py, PyDict>>> {
        validate_tree(&self.inner).iter().map(|d| diagnostic_dict(py, d)).collect()
    }

    fn structurally_eq(&self, other: &PyFaultTree) -> bool {
        self.inner.structurally_eq(&other.inner)
    }

    fn __eq__(&self, other: &PyFaultTree) -> bool {
        self.inner == other.inner
    }

    #[pyo3(signature = (style = "gated"))]
    fn to_plantuml(&self, style: &str) -> PyResult<String> {
        emit_plantuml(&self.inner, self::style(style)?).map_err(core_err)
    }

    fn to_json(&self) -> String {
        to_json(&self.inner)
    }

    fn to_svg(&self) -> PyResult<String> {
        let layout = layout_tree(&self.inner).map_err(core_err)?;
        render_svg(&self.inner, &layout, &RenderOptions::default()).map_err(core_err)
    }

    /// Minimal cut sets, each a sorted list of leaf ids.
    fn cut_sets(&self) -> PyResult<Vec<Vec<String>>> {
        let report = minimal_cut_sets(&self.inner).map_err(core_err)?;
        Ok(report.cut_sets.into_iter().map(|c| c.members.into_iter().collect()).collect())
    }

    /// Top-event probability. `probs` overrides values stored in the tree.
    #[pyo3(signature = (probs = None))]
    fn probability(&self, probs: Option<BTreeMap<String, f64>>) -> PyResult<f64> {
        let mut all = self.inner.embedded_probabilities();
        all.extend(probs.unwrap_or_default());
        Ok(top_probability(&self.inner, &all).map_err(core_err)?.value)
    }

    /// Whether the top event occurs when exactly the given leaves fail.
    fn evaluate(&self, failed: BTreeSet<String>) -> PyResult<bool> {
        let assignment: BTreeMap<String, bool> = self
            .inner
            .leaves()
            .into_iter()
            .map(|l| (l.to_string(), failed.contains(l)))
            .collect();
        evaluate_boolean(&self.inner, &assignment).map_err(core_err)
    }

    fn __repr__(&self) -> String {
        format!(
            "FaultTree(title={:?}, top={:?}, nodes={})",
            self.inner.title,
            self.inner.top,
            self.inner.nodes.len()
        )
    }
}

/// Diagnostics for PlantUML text, empty when it parses cleanly.
#[pyfunction]
#[pyo3(signature = (text, default_gate = "OR"))]
fn check_plantuml<'py>(py: Python<'py>, text: &str, default_gate: &str) -> PyResult<Vec<Bound<'py, PyDict>>> {
    let diags = match parse_plantuml_with_warnings(text, gate(default_gate)?) {
        Ok(parsed) => parsed.warnings,
        Err(d) => d,
    };
    diags.iter().map(|d| diagnostic_dict(py, d)).collect()
}

/// The `@startuml` ... `@enduml` block inside free text such as a chat reply.
#[pyfunction]
fn extract_uml(text: &str) -> PyResult<String> {
    extract_uml_block(text).map_err(core_err)
}

fn session_dict<'py>(py: Python<'py>, session: &fta_copilot::RepairSession) -> PyResult<Bound<'py, PyDict>> {
    let dict = PyDict::new(py);
    dict.set_item("outcome", session.outcome.name())?;
    let rounds = session
        .rounds
        .iter()
        .map(|r| {
            let round = PyDict::new(py);
            round.set_item("prompt", &r.prompt)?;
            round.set_item("response", &r.response)?;
            let diags: PyResult<Vec<_>> = r.diagnostics.iter().map(|d| diagnostic_dict(py, d)).collect();
            round.set_item("diagnostics", diags?)?;
            Ok(round)
        })
        .collect::<PyResult<Vec<_>>>()?;
    dict.set_item("rounds", rounds)?;
    let tree = session.outcome.tree().map(|t| PyFaultTree { inner: t.clone() });
    dict.set_item("tree", tree)?;
    Ok(dict)
}

fn run_scripted<'py>(
    py: Python<'py>,
    provider: &ScriptedProvider,
    component: &str,
    max_repairs: usize,
) -> PyResult<Bound<'py, PyDict>> {
    let session = run_repair_loop(provider as &dyn ChatProvider, component, max_repairs)
        .map_err(|e| TreeError::new_err(e.to_string()))?;
    let dict = session_dict(py, &session)?;
    dict.set_item("calls", provider.calls())?;
    Ok(dict)
}

/// Runs the repair loop against fixed replies, offline.
#[pyfunction]
#[pyo3(signature = (responses, component, max_repairs = fta_copilot::DEFAULT_MAX_REPAIRS))]
fn repair_with_responses<'py>(
    py: Python<'py>,
    responses: Vec<String>,
    component: &str,
    max_repairs: usize,
) -> PyResult<Bound<'py, PyDict>> {
    run_scripted(py, &ScriptedProvider::new(responses), component, max_repairs)
}

/// Replays a recorded transcript (JSON text) through the repair loop.
#[pyfunction]
fn replay_transcript<'py>(py: Python<'py>, transcript: &str) -> PyResult<Bound<'py, PyDict>> {
    let t = Transcript::from_json(transcript).map_err(|e| TreeError::new_err(e.to_string()))?;
    run_scripted(py, &t.provider(), &t.component, t.max_repairs)
}

/// The bundled eight-round LiDAR repair transcript as JSON text.
#[pyfunction]
fn lidar_transcript() -> &'static str {
    fta_copilot::LIDAR_TRANSCRIPT
}

#[pymodule]
fn fta(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyFaultTree>()?;
    m.add("TreeError", m.py().get_type::<TreeError>())?;
    m.add_function(wrap_pyfunction!(check_plantuml, m)?)?;
    m.add_function(wrap_pyfunction!(extract_uml, m)?)?;
    m.add_function(wrap_pyfunction!(repair_with_responses, m)?)?;
    m.add_function(wrap_pyfunction!(replay_transcript, m)?)?;
    m.add_function(wrap_pyfunction!(lidar_transcript, m)?)?;
    Ok(())
}
