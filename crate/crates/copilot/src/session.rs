//! The draft, validate and repair loop.

use fta_core::puml::parse_plantuml_with_warnings;
use fta_core::{extract_uml_block, has_errors, render_all, Diagnostic, FaultTree, GateKind, Location};
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::prompts::PromptSet;
use crate::provider::{ChatMessage, ChatProvider};

pub const DEFAULT_MAX_REPAIRS: usize = 7;

/// One request and what came back.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Round {
    pub prompt: String,
    pub response: String,
    /// Everything the validator reported for the response, warnings included.
    pub diagnostics: Vec<Diagnostic>,
}

impl Round {
    pub fn has_errors(&self) -> bool {
        has_errors(&self.diagnostics)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Success(Box<FaultTree>),
    Exhausted,
}

impl Outcome {
    pub fn is_success(&self) -> bool {
        matches!(self, Outcome::Success(_))
    }

    pub fn tree(&self) -> Option<&FaultTree> {
        match self {
            Outcome::Success(tree) => Some(tree),
            Outcome::Exhausted => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Outcome::Success(_) => "success",
            Outcome::Exhausted => "exhausted",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RepairSession {
    pub component: String,
    pub max_repairs: usize,
    pub rounds: Vec<Round>,
    pub outcome: Outcome,
}

/// Sends the opening prompt chain as a single user message and returns the
/// raw reply.
pub fn generate_candidate(provider: &dyn ChatProvider, component: &str) -> Result<String> {
    generate_with(provider, &PromptSet::default(), component)
}

fn generate_with(provider: &dyn ChatProvider, prompts: &PromptSet, component: &str) -> Result<String> {
    provider.complete(&[ChatMessage::user(prompts.initial(component)?)])
}

/// The code a reply contributes and what the validator says about it.
struct Checked {
    code: String,
    diagnostics: Vec<Diagnostic>,
    tree: Option<FaultTree>,
}

fn check(response: &str, default_gate: GateKind) -> Checked {
    let code = match extract_uml_block(response) {
        Ok(code) => code,
        Err(e) => {
            return Checked {
                code: response.to_string(),
                diagnostics: vec![Diagnostic::error("no-uml-block", e.to_string(), Location::Document)],
                tree: None,
            }
        }
    };
    match parse_plantuml_with_warnings(&code, default_gate) {
        Ok(parsed) => Checked {
            code,
            diagnostics: parsed.warnings,
            tree: Some(parsed.tree),
        },
        Err(diagnostics) => Checked {
            code,
            diagnostics,
            tree: None,
        },
    }
}

/// Runs the loop with the stock prompts and an Or default gate.
pub fn run_repair_loop(provider: &dyn ChatProvider, component: &str, max_repairs: usize) -> Result<RepairSession> {
    RepairLoop::new(max_repairs).run(provider, component)
}

/// Loop settings. Only the latest code and its diagnostics go into each
/// repair prompt; the full history stays in the session.
#[derive(Debug, Clone)]
pub struct RepairLoop {
    pub max_repairs: usize,
    pub prompts: PromptSet,
    pub default_gate: GateKind,
}

impl Default for RepairLoop {
    fn default() -> Self {
        RepairLoop::new(DEFAULT_MAX_REPAIRS)
    }
}

impl RepairLoop {
    pub fn new(max_repairs: usize) -> Self {
        RepairLoop {
            max_repairs,
            prompts: PromptSet::default(),
            default_gate: GateKind::Or,
        }
    }

    pub fn run(&self, provider: &dyn ChatProvider, component: &str) -> Result<RepairSession> {
        let mut rounds = Vec::new();
        let mut prompt = self.prompts.initial(component)?;
        loop {
            let response = provider.complete(&[ChatMessage::user(prompt.clone())])?;
            let checked = check(&response, self.default_gate);
            let failed = has_errors(&checked.diagnostics) || checked.tree.is_none();
            let errors: Vec<Diagnostic> = checked.diagnostics.iter().filter(|d| d.is_error()).cloned().collect();
            rounds.push(Round {
                prompt,
                response,
                diagnostics: checked.diagnostics,
            });
            if !failed {
                let tree = checked.tree.expect("no errors means a tree");
                return Ok(RepairSession {
                    component: component.to_string(),
                    max_repairs: self.max_repairs,
                    rounds,
                    outcome: Outcome::Success(Box::new(tree)),
                });
            }
            if rounds.len() > self.max_repairs {
                return Ok(RepairSession {
                    component: component.to_string(),
                    max_repairs: self.max_repairs,
                    rounds,
                    outcome: Outcome::Exhausted,
                });
            }
            prompt = self.prompts.repair(&render_all(&errors), &checked.code)?;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::provider::ScriptedProvider;

    const VALID: &str = "@startuml\nrectangle \"Top\" as T\nT -- (Leaf one)\nT -- (Leaf two)\n@enduml\n";
    const BROKEN: &str = "```\n@startuml\nrectangle \"Top\" as T\nT -- rectangle \"Leaf\"\n@enduml\n```";

    #[test]
    fn immediate_success() {
        let p = ScriptedProvider::new([VALID]);
        let s = run_repair_loop(&p, "x", 7).unwrap();
        assert!(s.outcome.is_success());
        assert_eq!(s.rounds.len(), 1);
        assert_eq!(p.calls(), 1);
    }

    #[test]
    fn exhausted_after_max_repairs() {
        let p = ScriptedProvider::new([BROKEN; 10]);
        let s = run_repair_loop(&p, "x", 2).unwrap();
        assert_eq!(s.outcome, Outcome::Exhausted);
        assert_eq!(s.rounds.len(), 3);
        assert_eq!(p.calls(), 3);
        let s0 = run_repair_loop(&ScriptedProvider::new([BROKEN]), "x", 0).unwrap();
        assert_eq!(s0.rounds.len(), 1);
    }

    #[test]
    fn repair_prompt_carries_rendered_errors_and_code() {
        let p = ScriptedProvider::new([BROKEN, VALID]);
        let s = run_repair_loop(&p, "x", 7).unwrap();
        assert_eq!(s.rounds.len(), 2);
        let rendered = render_all(&s.rounds[0].diagnostics);
        assert!(rendered.starts_with("Syntax Error? (@ Diagram Line 3, File Line 3)\n"));
        let expected = format!(
            "@startuml\nrectangle \"Top\" as T\nT -- rectangle \"Leaf\"\n@enduml\n\n\ngetting error for above plantuml code: {rendered}"
        );
        assert_eq!(s.rounds[1].prompt, expected);
        assert_eq!(p.requests()[1], vec![ChatMessage::user(expected)]);
    }

    #[test]
    fn prose_reply_is_a_failed_round() {
        let p = ScriptedProvider::new(["Sorry, I cannot draw that.", VALID]);
        let s = run_repair_loop(&p, "x", 7).unwrap();
        assert!(s.outcome.is_success());
        assert_eq!(s.rounds[0].diagnostics[0].location, Location::Document);
        assert!(s.rounds[1].prompt.contains("Syntax Error? (@ Document)"));
    }

    #[test]
    fn provider_errors_propagate() {
        let p = ScriptedProvider::new([BROKEN]);
        assert!(run_repair_loop(&p, "x", 3).is_err());
    }
}
