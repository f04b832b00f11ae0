//! Prompt templates with `{placeholder}` substitution.

use serde::{Deserialize, Serialize};

use crate::error::{CopilotError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PromptName {
    GenerateFta,
    ConvertToGates,
    ConvertToUml,
    RepairError,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptTemplate {
    pub name: PromptName,
    pub body: String,
}

impl PromptTemplate {
    pub fn new(name: PromptName, body: impl Into<String>) -> Self {
        PromptTemplate { name, body: body.into() }
    }

    /// The stock wording for each step.
    pub fn default_for(name: PromptName) -> Self {
        let body = match name {
            PromptName::GenerateFta => "Generate FTA for {component}",
            PromptName::ConvertToGates => "Please generate it with gates as a Fault tree analysis diagram",
            PromptName::ConvertToUml => {
                "Can you convert above FTA diagram to UML code to generate a PlantUML diagram?"
            }
            PromptName::RepairError => "{previous_code}\n\ngetting error for above plantuml code: {diagnostics}",
        };
        PromptTemplate::new(name, body)
    }

    /// Substitutes every `{name}` placeholder. A placeholder without a value
    /// is an error; braces that do not enclose an identifier are literal.
    pub fn render(&self, values: &[(&str, &str)]) -> Result<String> {
        let body = &self.body;
        let mut out = String::with_capacity(body.len());
        let mut rest = body.as_str();
        while let Some(open) = rest.find('{') {
            out.push_str(&rest[..open]);
            let after = &rest[open + 1..];
            let close = after.find('}');
            let name = close.map(|c| &after[..c]);
            match name {
                Some(n) if !n.is_empty() && n.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') => {
                    let value = values.iter().find(|(k, _)| *k == n).map(|(_, v)| *v).ok_or_else(|| {
                        CopilotError::UnresolvedPlaceholder {
                            template: format!("{:?}", self.name),
                            placeholder: n.to_string(),
                        }
                    })?;
                    out.push_str(value);
                    rest = &after[n.len() + 1..];
                }
                _ => {
                    out.push('{');
                    rest = after;
                }
            }
        }
        out.push_str(rest);
        Ok(out)
    }
}

/// The four templates used by a session.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptSet {
    pub generate: PromptTemplate,
    pub gates: PromptTemplate,
    pub uml: PromptTemplate,
    pub repair: PromptTemplate,
}

impl Default for PromptSet {
    fn default() -> Self {
        PromptSet {
            generate: PromptTemplate::default_for(PromptName::GenerateFta),
            gates: PromptTemplate::default_for(PromptName::ConvertToGates),
            uml: PromptTemplate::default_for(PromptName::ConvertToUml),
            repair: PromptTemplate::default_for(PromptName::RepairError),
        }
    }
}

impl PromptSet {
    /// The opening request: the three drafting steps as one message.
    pub fn initial(&self, component: &str) -> Result<String> {
        let values = [("component", component)];
        Ok([
            self.generate.render(&values)?,
            self.gates.render(&values)?,
            self.uml.render(&values)?,
        ]
        .join("\n\n"))
    }

    pub fn repair(&self, diagnostics: &str, previous_code: &str) -> Result<String> {
        self.repair.render(&[("diagnostics", diagnostics), ("previous_code", previous_code)])
    }
}
