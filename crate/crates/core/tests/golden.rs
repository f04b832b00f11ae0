use std::collections::BTreeMap;

use fta_core::diagnostic::render_diagnostic;
use fta_core::puml::parse_plantuml_with_warnings;
use fta_core::{
    emit_plantuml, evaluate_boolean, minimal_cut_sets, parse_plantuml, top_probability, validate_tree, CutSet,
    EmitStyle, EventKind, Example, FaultTree, GateKind,
};
use fta_testkit::{brute_force_cut_sets, brute_force_probability, naive_eval};

fn count_kind(tree: &FaultTree, kind: &EventKind) -> usize {
    tree.nodes.values().filter(|n| &n.kind == kind).count()
}

fn depth_of(tree: &FaultTree, id: &str) -> usize {
    let parents = tree.parents();
    let mut d = 0;
    let mut cur = id;
    while let Some(p) = parents.get(cur) {
        cur = p[0];
        d += 1;
    }
    d
}

#[test]
fn initial_listing_structure() {
    let tree = Example::LidarInitial.tree();
    assert_eq!(tree.title, "LIDAR Sensor Failure FTA");
    assert_eq!(tree.top_node().unwrap().label, "LIDAR Sensor Failure");
    assert_eq!(count_kind(&tree, &EventKind::TopEvent), 1);
    let intermediates: Vec<&str> = tree
        .nodes
        .values()
        .filter(|n| n.kind == EventKind::Intermediate)
        .map(|n| n.id.as_str())
        .collect();
    let categories: Vec<&str> = intermediates.iter().copied().filter(|id| depth_of(&tree, id) == 1).collect();
    let subsystems: Vec<&str> = intermediates.iter().copied().filter(|id| depth_of(&tree, id) == 2).collect();
    assert_eq!(categories, ["Environmental", "Hardware", "Software"]);
    assert_eq!(
        subsystems,
        ["Detector", "Emitter", "Interference", "Obstruction", "Processing", "Scanner"]
    );
    assert_eq!(count_kind(&tree, &EventKind::Basic), 17);
    let basic_ids: Vec<&str> = tree.leaves();
    let letters: Vec<String> = ('A'..='Q').map(|c| c.to_string()).collect();
    assert_eq!(basic_ids, letters);
    assert_eq!(tree.gate_count(), 10);
    assert!(tree.nodes.values().filter_map(|n| n.gate.as_ref()).all(|g| g.kind == GateKind::Or));
    assert_eq!(tree.nodes.len(), 27);
}

#[test]
fn initial_listing_single_input_gate_is_only_a_warning() {
    let outcome = parse_plantuml_with_warnings(Example::LidarInitial.source(), GateKind::Or).unwrap();
    let rules: Vec<&str> = outcome.warnings.iter().map(|d| d.rule.as_str()).collect();
    assert_eq!(rules, ["gate-arity"]);
    assert_eq!(outcome.warnings[0].offending_text(), Some("Software -- Processing"));
    assert_eq!(outcome.warnings[0].file_line(), Some(31));
}

#[test]
fn final_listing_structure() {
    let tree = Example::LidarFinal.tree();
    let gates: BTreeMap<&str, (GateKind, &str)> = tree
        .nodes
        .values()
        .filter_map(|n| n.gate.as_ref().map(|g| (n.gate_alias.as_deref().unwrap(), (g.kind, n.id.as_str()))))
        .collect();
    let expected: BTreeMap<&str, (GateKind, &str)> = BTreeMap::from([
        ("MainOR", (GateKind::Or, "TopEvent")),
        ("HardwareAND", (GateKind::And, "HardwareFailure")),
        ("SoftwareOR", (GateKind::Or, "SoftwareFailure")),
        ("EnvironmentalAND", (GateKind::And, "EnvironmentalFactors")),
    ]);
    assert_eq!(gates, expected);
    assert_eq!(count_kind(&tree, &EventKind::Basic), 6);
    assert_eq!(
        tree.leaves(),
        [
            "Adverse_weather",
            "Algorithm_bugs",
            "Direct_sunlight_glare",
            "Insufficient_processing_power",
            "Laser_emitter_degradation",
            "Power_supply_issues"
        ]
    );
    assert_eq!(tree.nodes["Adverse_weather"].label, "Adverse weather");
    assert!(validate_tree(&tree).is_empty());
    // Children keep declaration order.
    assert_eq!(
        tree.nodes["TopEvent"].children(),
        ["HardwareFailure", "SoftwareFailure", "EnvironmentalFactors"]
    );
}

#[test]
fn performance_listing_structure() {
    let tree = Example::LidarPerformance.tree();
    let categories = tree.nodes["TopEvent"].children().to_vec();
    assert_eq!(
        categories,
        [
            "HardwareFailure",
            "SoftwareFailure",
            "EnvironmentalFactors",
            "IntegrationIssues",
            "PerformanceDegradation"
        ]
    );
    for c in &categories {
        let kids = tree.nodes[c].children();
        assert_eq!(kids.len(), 4, "{c}");
        assert!(kids.iter().all(|k| tree.nodes[k].kind == EventKind::Basic));
    }
    assert_eq!(count_kind(&tree, &EventKind::Basic), 20);
    assert_eq!(tree.nodes["Adverse_weather_rain_snow_fog"].label, "Adverse weather (rain, snow, fog)");
    assert_eq!(tree.nodes["Range_reduction"].label, "Range reduction");
    assert_eq!(tree.nodes["Sensor_fusion_errors"].label, "Sensor fusion errors");
}

fn final_leaf_assignment(on: &[&str]) -> BTreeMap<String, bool> {
    Example::LidarFinal
        .tree()
        .leaves()
        .into_iter()
        .map(|l| (l.to_string(), on.contains(&l)))
        .collect()
}

#[test]
fn final_tree_boolean_examples() {
    let tree = Example::LidarFinal.tree();
    assert!(!evaluate_boolean(&tree, &final_leaf_assignment(&[])).unwrap());
    assert!(evaluate_boolean(&tree, &final_leaf_assignment(&["Algorithm_bugs"])).unwrap());
    assert!(!evaluate_boolean(&tree, &final_leaf_assignment(&["Adverse_weather"])).unwrap());
    // Cross-check every assignment with the independent evaluator.
    let leaves = tree.leaves();
    for mask in 0u32..64 {
        let on: Vec<&str> = leaves.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, l)| *l).collect();
        let set = on.iter().map(|s| s.to_string()).collect();
        assert_eq!(evaluate_boolean(&tree, &final_leaf_assignment(&on)).unwrap(), naive_eval(&tree, &set));
    }
}

#[test]
fn final_tree_cut_sets() {
    let tree = Example::LidarFinal.tree();
    let report = minimal_cut_sets(&tree).unwrap();
    let expected = vec![
        CutSet::new(["Adverse_weather", "Direct_sunlight_glare"]),
        CutSet::new(["Algorithm_bugs"]),
        CutSet::new(["Insufficient_processing_power"]),
        CutSet::new(["Laser_emitter_degradation", "Power_supply_issues"]),
    ];
    assert_eq!(report.cut_sets, expected);
    let oracle: Vec<CutSet> = brute_force_cut_sets(&tree).into_iter().map(|s| CutSet { members: s }).collect();
    assert_eq!(report.cut_sets, oracle);
    assert!(!report.xor_approximated);
}

#[test]
fn final_tree_probability() {
    let tree = Example::LidarFinal.tree();
    let probs: BTreeMap<String, f64> = tree.leaves().into_iter().map(|l| (l.to_string(), 0.1)).collect();
    let report = top_probability(&tree, &probs).unwrap();
    assert!((report.value - 0.206119).abs() < 1e-6, "{}", report.value);
    assert!((report.value - brute_force_probability(&tree, &probs)).abs() < 1e-12);
    assert!((report.value - (1.0 - 0.99 * 0.81 * 0.99)).abs() < 1e-12);
}

#[test]
fn small_documented_cases() {
    let tree = parse_plantuml("@startuml\nrectangle \"T\" as T\n@enduml", GateKind::Or).unwrap();
    assert_eq!(tree.nodes.len(), 1);
    assert_eq!(tree.top_node().unwrap().kind, EventKind::TopEvent);
    assert!(tree.top_node().unwrap().gate.is_none());
    assert_eq!(minimal_cut_sets(&tree).unwrap().cut_sets, vec![CutSet::new(["T"])]);

    let and3 = parse_plantuml(
        "@startuml\nrectangle \"Top\" as T\nT --> \"a\" : AND\nT --> \"b\" : AND\nT --> \"c\" : AND\n@enduml",
        GateKind::Or,
    )
    .unwrap();
    assert_eq!(minimal_cut_sets(&and3).unwrap().cut_sets, vec![CutSet::new(["a", "b", "c"])]);
}

fn mutate(source: &str, from: &str, to: &str) -> String {
    assert!(source.contains(from));
    source.replacen(from, to, 1)
}

#[test]
fn inline_keyword_fault_in_initial_listing() {
    let src = mutate(Example::LidarInitial.source(), "Detector -- D\n", "Detector -- rectangle \"D2\"\n");
    let diags = parse_plantuml(&src, GateKind::Or).unwrap_err();
    assert_eq!(diags.len(), 1, "{diags:?}");
    let line = src.lines().position(|l| l.starts_with("Detector -- rectangle")).unwrap() + 1;
    assert_eq!(
        render_diagnostic(&diags[0]),
        format!("Syntax Error? (@ Diagram Line {line}, File Line {line})\n\"Detector -- rectangle \\\"D2\\\"\"\n(Error)\n")
            .replace("\\\"", "\"")
    );

    // One line ahead of @startuml shifts the file line only.
    let shifted = format!("' generated\n{src}");
    let diags = parse_plantuml(&shifted, GateKind::Or).unwrap_err();
    assert_eq!(diags[0].diagram_line(), Some(line));
    assert_eq!(diags[0].file_line(), Some(line + 1));
}

#[test]
fn detector_malfunction_error_block_verbatim() {
    let src = Example::LidarFinal.source();
    let mut lines: Vec<&str> = src.lines().collect();
    lines[25] = "HardwareOR -- rectangle \"Detector malfunction\"";
    let text = format!("\n{}\n", lines.join("\n"));
    let diags = parse_plantuml(&text, GateKind::Or).unwrap_err();
    assert_eq!(
        render_diagnostic(&diags[0]),
        "Syntax Error? (@ Diagram Line 26, File Line 27)\n\"HardwareOR -- rectangle \"Detector malfunction\"\"\n(Error)\n"
    );
}

#[test]
fn gated_emission_of_final_tree() {
    let tree = Example::LidarFinal.tree();
    let text = emit_plantuml(&tree, EmitStyle::Gated).unwrap();
    assert!(text.contains("circle MainOR\n"));
    assert!(text.contains("TopEvent -down-> MainOR : OR\n"));
    assert!(text.contains("Circles labeled 'OR' represent OR gates"));
    assert!(text.contains("Circles labeled 'AND' represent AND gates"));
    let back = parse_plantuml(&text, GateKind::Or).unwrap();
    assert_eq!(back, tree);
}

#[test]
fn flat_emission_of_initial_tree() {
    let tree = Example::LidarInitial.tree();
    let text = emit_plantuml(&tree, EmitStyle::Flat).unwrap();
    assert!(text.contains("skinparam packageStyle rectangle\n"));
    assert!(text.contains("TopEvent -- Hardware\n"));
    assert!(text.contains("  All connections represent OR gates\n"));
    assert!(!text.contains(" : "));
    assert!(parse_plantuml(&text, GateKind::Or).unwrap().structurally_eq(&tree));
}

#[test]
fn performance_flat_round_trip_counts() {
    let tree = Example::LidarPerformance.tree();
    let text = emit_plantuml(&tree, EmitStyle::Flat).unwrap();
    let back = parse_plantuml(&text, GateKind::Or).unwrap();
    assert!(back.structurally_eq(&tree));
    assert_eq!(back.nodes["TopEvent"].children().len(), 5);
    assert_eq!(count_kind(&back, &EventKind::Basic), 20);
}
