//! The ten acceptance criteria, one pass/fail line each.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use fta_copilot::{replay_session, run_repair_loop, Outcome, ScriptedProvider, DEFAULT_MAX_REPAIRS, LIDAR_COMPONENT};
use fta_core::{
    emit_plantuml, layout_tree, minimal_cut_sets, parse_plantuml, render_diagnostic, render_svg, top_probability,
    CutSet, EmitStyle, EventKind, Example, FaultTree, GateKind, RenderOptions,
};
use fta_testkit::{brute_force_cut_sets, brute_force_probability, corpus, random_probabilities, reachable_leaves, TreeConfig};
use rand::rngs::StdRng;
use rand::SeedableRng;

const PROBABILITY_TOLERANCE: f64 = 1e-12;
const LIDAR_TOLERANCE: f64 = 1e-6;
const LIDAR_EXPECTED: f64 = 0.206119;
const PARSE_BUDGET: Duration = Duration::from_secs(1);
const ORACLE_BUDGET: Duration = Duration::from_secs(60);
const CORPUS_SIZE: usize = 500;
const MAX_LEAVES: usize = 12;

type Check = Result<String, String>;
type Criterion = (&'static str, fn() -> Check);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn kind_count(tree: &FaultTree, kind: EventKind) -> usize {
    tree.nodes.values().filter(|n| n.kind == kind).count()
}

fn random_corpus(seed: u64) -> Vec<FaultTree> {
    corpus(
        seed,
        CORPUS_SIZE,
        TreeConfig {
            max_leaves: MAX_LEAVES,
            ..TreeConfig::default()
        },
    )
}

fn golden_listing_one() -> Check {
    let start = Instant::now();
    let tree = parse_plantuml(Example::LidarInitial.source(), GateKind::Or).map_err(|d| format!("{d:?}"))?;
    let elapsed = start.elapsed();
    let top = kind_count(&tree, EventKind::TopEvent);
    let top_children = tree.nodes[&tree.top].children().to_vec();
    let subsystems: BTreeSet<&String> = top_children.iter().flat_map(|c| tree.nodes[c].children()).collect();
    let basic = kind_count(&tree, EventKind::Basic);
    let all_or = tree.nodes.values().filter_map(|n| n.gate.as_ref()).all(|g| g.kind == GateKind::Or);
    ensure(top == 1, || format!("{top} top events"))?;
    ensure(top_children.len() == 3, || format!("{} categories", top_children.len()))?;
    ensure(subsystems.len() == 6, || format!("{} subsystems", subsystems.len()))?;
    ensure(basic == 17, || format!("{basic} basic events"))?;
    ensure(all_or, || "a gate is not OR".into())?;
    ensure(elapsed < PARSE_BUDGET, || format!("parse took {elapsed:?}"))?;
    Ok(format!("1 top, 3 categories, 6 subsystems, 17 basic, all OR, {elapsed:?}"))
}

fn golden_final_listing() -> Check {
    let tree = parse_plantuml(Example::LidarFinal.source(), GateKind::Or).map_err(|d| format!("{d:?}"))?;
    let gates: BTreeMap<String, GateKind> = tree
        .nodes
        .values()
        .filter_map(|n| Some((n.gate_alias.clone()?, n.gate.as_ref()?.kind)))
        .collect();
    let expected = BTreeMap::from([
        ("MainOR".to_string(), GateKind::Or),
        ("HardwareAND".to_string(), GateKind::And),
        ("SoftwareOR".to_string(), GateKind::Or),
        ("EnvironmentalAND".to_string(), GateKind::And),
    ]);
    ensure(tree.gate_count() == 4 && gates == expected, || format!("gates {gates:?}"))?;
    let basic = kind_count(&tree, EventKind::Basic);
    ensure(basic == 6, || format!("{basic} basic events"))?;
    Ok("MainOR:OR HardwareAND:AND SoftwareOR:OR EnvironmentalAND:AND, 6 basic".into())
}

fn golden_performance_listing() -> Check {
    let tree = parse_plantuml(Example::LidarPerformance.source(), GateKind::Or).map_err(|d| format!("{d:?}"))?;
    let categories = tree.nodes[&tree.top].children();
    ensure(categories.len() == 5, || format!("{} categories", categories.len()))?;
    for c in categories {
        let leaves = tree.nodes[c].children().iter().filter(|l| tree.nodes[*l].kind == EventKind::Basic).count();
        ensure(leaves == 4 && tree.nodes[c].children().len() == 4, || format!("{c} has {leaves} leaves"))?;
    }
    let basic = kind_count(&tree, EventKind::Basic);
    ensure(basic == 20, || format!("{basic} basic events"))?;
    Ok("5 categories x 4 leaves = 20 basic".into())
}

fn cut_set_oracle() -> Check {
    let start = Instant::now();
    let trees = random_corpus(0xacc_0004);
    let mut xor_trees = 0;
    for (i, tree) in trees.iter().enumerate() {
        ensure(reachable_leaves(tree).len() <= MAX_LEAVES, || format!("tree {i} too large"))?;
        let got = minimal_cut_sets(tree).map_err(|e| format!("tree {i}: {e}"))?.cut_sets;
        let want: Vec<CutSet> = brute_force_cut_sets(tree).into_iter().map(|members| CutSet { members }).collect();
        ensure(got == want, || format!("tree {i}: {got:?} != {want:?}"))?;
        xor_trees += tree.contains_kind(GateKind::Xor) as usize;
    }
    let elapsed = start.elapsed();
    ensure(elapsed < ORACLE_BUDGET, || format!("took {elapsed:?}"))?;
    Ok(format!("{CORPUS_SIZE} trees ({xor_trees} with XOR) exact, {elapsed:?}"))
}

fn probability_oracle() -> Check {
    let trees = random_corpus(0xacc_0005);
    let mut rng = StdRng::seed_from_u64(5);
    let mut worst: f64 = 0.0;
    for (i, tree) in trees.iter().enumerate() {
        let probs = random_probabilities(tree, &mut rng);
        let got = top_probability(tree, &probs).map_err(|e| format!("tree {i}: {e}"))?.value;
        let want = brute_force_probability(tree, &probs);
        worst = worst.max((got - want).abs());
        ensure((got - want).abs() <= PROBABILITY_TOLERANCE, || format!("tree {i}: {got} vs {want}"))?;
    }
    let lidar = Example::LidarFinal.tree();
    let probs: BTreeMap<String, f64> = lidar.leaves().into_iter().map(|l| (l.to_string(), 0.1)).collect();
    let value = top_probability(&lidar, &probs).map_err(|e| e.to_string())?.value;
    ensure((value - LIDAR_EXPECTED).abs() <= LIDAR_TOLERANCE, || format!("LiDAR top {value}"))?;
    Ok(format!("max error {worst:.1e} <= {PROBABILITY_TOLERANCE:.0e}; LiDAR p=0.1 -> {value:.6}"))
}

fn round_trip() -> Check {
    let mut trees: Vec<FaultTree> = Example::ALL.iter().map(|e| e.tree()).collect();
    trees.extend(random_corpus(0xacc_0006));
    for (i, tree) in trees.iter().enumerate() {
        for style in [EmitStyle::Flat, EmitStyle::Gated] {
            let text = emit_plantuml(tree, style).map_err(|e| format!("tree {i}: {e}"))?;
            let back = parse_plantuml(&text, tree.default_gate).map_err(|d| format!("tree {i} {style:?}: {d:?}"))?;
            ensure(back.structurally_eq(tree), || format!("tree {i} {style:?} differs"))?;
        }
    }
    Ok(format!("{} trees x 2 styles", trees.len()))
}

fn diagnostic_bytes() -> Check {
    let lines: Vec<&str> = Example::LidarFinal.source().lines().collect();
    let target = lines
        .iter()
        .position(|l| l.starts_with("HardwareAND -down-> (Power supply issues)"))
        .ok_or("fault site missing")?;
    for pad in 0..4 {
        let mut faulty = lines.clone();
        faulty[target] = "HardwareAND -down-> rectangle \"Power supply issues\"";
        let text = format!("{}{}\n", "' preamble\n".repeat(pad), faulty.join("\n"));
        let diags = parse_plantuml(&text, GateKind::Or).err().ok_or("fault not detected")?;
        let d = target + 1;
        let f = d + pad;
        let expected = format!(
            "Syntax Error? (@ Diagram Line {d}, File Line {f})\n\"HardwareAND -down-> rectangle \"Power supply issues\"\"\n(Error)\n"
        );
        let got = render_diagnostic(&diags[0]);
        ensure(got == expected, || format!("pad {pad}: {got:?}"))?;
    }
    Ok("three-line block exact; file line - diagram line = @startuml index for 0 to 3 preceding lines".into())
}

fn repair_convergence() -> Check {
    let replay = replay_session(&fta_copilot::lidar_transcript_path()).map_err(|e| e.to_string())?;
    let session = run_repair_loop(&replay, LIDAR_COMPONENT, DEFAULT_MAX_REPAIRS).map_err(|e| e.to_string())?;
    ensure(session.outcome.is_success(), || "bundled transcript did not converge".into())?;
    ensure(session.rounds.len() == 8 && replay.calls() == 8, || {
        format!("{} rounds, {} calls", session.rounds.len(), replay.calls())
    })?;

    let immediate = ScriptedProvider::new([Example::LidarFinal.source()]);
    let s = run_repair_loop(&immediate, LIDAR_COMPONENT, DEFAULT_MAX_REPAIRS).map_err(|e| e.to_string())?;
    ensure(s.outcome.is_success() && s.rounds.len() == 1 && immediate.calls() == 1, || {
        format!("immediate: {} rounds", s.rounds.len())
    })?;

    let broken = "@startuml\nrectangle \"T\" as T\nT -- rectangle \"X\"\n@enduml\n";
    let always = ScriptedProvider::new([broken; 10]);
    let s = run_repair_loop(&always, LIDAR_COMPONENT, 2).map_err(|e| e.to_string())?;
    ensure(s.outcome == Outcome::Exhausted && always.calls() == 3, || {
        format!("always invalid: {} calls", always.calls())
    })?;
    Ok("bundled: success at round 8, 8 calls; immediate: 1 call; always invalid, 2 repairs: exhausted, 3 calls".into())
}

fn render_census() -> Check {
    let tree = Example::LidarFinal.tree();
    let render = || render_svg(&tree, &layout_tree(&tree)?, &RenderOptions::default());
    let a = render().map_err(|e| e.to_string())?;
    let b = render().map_err(|e| e.to_string())?;
    ensure(a == b, || "renders differ".into())?;
    let doc = roxmltree::Document::parse(&a).map_err(|e| e.to_string())?;
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for node in doc.descendants().filter(|n| n.is_element()) {
        let classes: Vec<&str> = node.attribute("class").unwrap_or("").split_whitespace().collect();
        if classes.first() == Some(&"glyph") {
            for c in &classes[1..] {
                *counts.entry(c).or_default() += 1;
            }
        }
    }
    let get = |k: &str| counts.get(k).copied().unwrap_or(0);
    ensure(get("glyph-and") == 2 && get("glyph-or") == 2 && get("glyph-circle") == 6, || {
        format!("census {counts:?}")
    })?;
    Ok("2 AND, 2 OR, 6 basic circles; byte-identical".into())
}

fn cli_contract() -> Check {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let good = dir.path().join("good.puml");
    let bad = dir.path().join("bad.puml");
    std::fs::write(&good, Example::LidarFinal.source()).map_err(|e| e.to_string())?;
    std::fs::write(&bad, "@startuml\nrectangle \"T\" as T\nT -- rectangle \"X\"\n@enduml\n").map_err(|e| e.to_string())?;
    let (good, bad) = (good.to_str().unwrap(), bad.to_str().unwrap());
    let matrix: Vec<(Vec<&str>, i32)> = vec![
        (vec!["validate", good], 0),
        (vec!["cutsets", good], 0),
        (vec!["convert", good, "--to", "svg"], 0),
        (vec!["convert", good, "--to", "json"], 0),
        (vec!["example", "lidar-final", "--to", "puml"], 0),
        (vec!["validate", bad], 1),
        (vec!["cutsets", bad], 1),
        (vec!["convert", bad, "--to", "svg"], 1),
        (vec!["prob", bad], 1),
        (vec!["validate"], 2),
        (vec!["convert", good, "--to", "png"], 2),
        (vec!["cutsets", good, "--bogus"], 2),
        (vec!["nonsense"], 2),
    ];
    for (args, want) in &matrix {
        let out = common::fta(args);
        ensure(out.code == *want, || format!("{args:?} exited {} (wanted {want})", out.code))?;
    }
    Ok(format!("{} invocations match 0/1/2", matrix.len()))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("golden parse, initial listing", golden_listing_one),
        ("golden parse, final listing", golden_final_listing),
        ("golden parse, performance listing", golden_performance_listing),
        ("cut-set oracle", cut_set_oracle),
        ("probability oracle", probability_oracle),
        ("PlantUML round trip", round_trip),
        ("diagnostic byte-exactness", diagnostic_bytes),
        ("repair-loop convergence", repair_convergence),
        ("render determinism and glyph census", render_census),
        ("CLI exit-code contract", cli_contract),
    ];
    let mut failures = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let result = catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match result {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failures += 1;
                println!("criterion {:>2} FAIL  {name}: {why}", i + 1);
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures > 0 {
        std::process::exit(1);
    }
}
