//! Line-oriented syntax pass: source text to [`PumlDocument`].

use std::sync::LazyLock;

use regex::Regex;

use crate::diagnostic::{Diagnostic, Location};
use crate::model::is_valid_id;

/// Declaration keywords understood by the codec, with the event class each
/// one introduces.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeclKeyword {
    /// Generic event; kind inferred from position in the tree.
    Rectangle,
    /// A gate.
    Circle,
    /// Conditioning event.
    Usecase,
    /// External event.
    Cloud,
    /// Undeveloped event.
    Card,
    /// Transfer: in when it carries a `[[target]]` link, out otherwise.
    File,
}

impl DeclKeyword {
    pub fn as_str(self) -> &'static str {
        match self {
            DeclKeyword::Rectangle => "rectangle",
            DeclKeyword::Circle => "circle",
            DeclKeyword::Usecase => "usecase",
            DeclKeyword::Cloud => "cloud",
            DeclKeyword::Card => "card",
            DeclKeyword::File => "file",
        }
    }

    fn from_word(word: &str) -> Option<Self> {
        Some(match word {
            "rectangle" => DeclKeyword::Rectangle,
            "circle" => DeclKeyword::Circle,
            "usecase" => DeclKeyword::Usecase,
            "cloud" => DeclKeyword::Cloud,
            "card" => DeclKeyword::Card,
            "file" => DeclKeyword::File,
            _ => return None,
        })
    }
}

/// Words that start a declaration in full PlantUML. Seeing one where an edge
/// endpoint belongs is the classic "inline declaration" mistake.
const DECLARATION_WORDS: &[&str] = &[
    "rectangle", "circle", "usecase", "cloud", "card", "file", "package", "node", "folder", "frame",
    "database", "component", "interface", "actor", "class", "object", "artifact", "storage",
    "agent", "boundary", "control", "entity", "queue", "stack", "collections", "hexagon",
    "diamond", "person", "label", "action", "state", "participant",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NotePosition {
    Top,
    Bottom,
    Left,
    Right,
}

impl NotePosition {
    pub fn as_str(self) -> &'static str {
        match self {
            NotePosition::Top => "top",
            NotePosition::Bottom => "bottom",
            NotePosition::Left => "left",
            NotePosition::Right => "right",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Endpoint {
    Alias(String),
    /// `"LABEL"`
    Quoted(String),
    /// `(LABEL)`
    Paren(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeDecl {
    pub line: usize,
    pub keyword: DeclKeyword,
    pub label: String,
    pub alias: Option<String>,
    pub link: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub line: usize,
    pub from: Endpoint,
    pub to: Endpoint,
    pub arrow: String,
    pub label: Option<String>,
}

/// One statement. `line` fields are 0-based indices into the source lines.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Statement {
    SkinParam {
        line: usize,
        name: String,
        value: String,
    },
    SkinParamBlock {
        line: usize,
        name: String,
        entries: Vec<(String, String)>,
    },
    NodeDecl(NodeDecl),
    PackageBlock {
        line: usize,
        label: String,
        alias: Option<String>,
        statements: Vec<Statement>,
    },
    Edge(Edge),
    NoteBlock {
        line: usize,
        position: NotePosition,
        target: String,
        text: Vec<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct PumlDocument {
    pub title: String,
    pub statements: Vec<Statement>,
    pub source_lines: Vec<String>,
    /// 0-based index of the `@startuml` line.
    pub start_index: Option<usize>,
}

impl PumlDocument {
    /// Location of a 0-based source line, numbered both from the file start
    /// and from the `@startuml` line.
    pub fn location(&self, line: usize) -> Location {
        let offset = self.start_index.unwrap_or(0).min(line);
        Location::Line {
            diagram_line: line - offset + 1,
            file_line: line + 1,
            text: self.source_lines.get(line).cloned().unwrap_or_default(),
        }
    }
}

static ARROW: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"^(?:-(?:down|up|left|right)->|-[dulr]->|-{2,}>?|->)").unwrap()
});
static NOTE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r#"^note\s+(top|bottom|left|right)\s+of\s+([A-Za-z0-9_]+|"[^"]*")\s*(?::\s*(.*))?$"#)
        .unwrap()
});
static PACKAGE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r#"^package\s+(?:"([^"]*)"|([A-Za-z0-9_]+))(?:\s+as\s+([A-Za-z0-9_]+))?\s*\{$"#).unwrap()
});

enum Mode {
    BeforeStart,
    Body,
    Note {
        line: usize,
        position: NotePosition,
        target: String,
        text: Vec<String>,
    },
    SkinBlock {
        line: usize,
        name: String,
        entries: Vec<(String, String)>,
    },
    BlockComment,
    Done,
}

struct PackageFrame {
    line: usize,
    label: String,
    alias: Option<String>,
    statements: Vec<Statement>,
}

struct Parser {
    doc: PumlDocument,
    diagnostics: Vec<Diagnostic>,
    packages: Vec<PackageFrame>,
}

impl Parser {
    fn error(&mut self, line: usize, rule: &str, message: impl Into<String>) {
        let location = self.doc.location(line);
        self.diagnostics.push(Diagnostic::error(rule, message, location));
    }

    fn push(&mut self, statement: Statement) {
        match self.packages.last_mut() {
            Some(frame) => frame.statements.push(statement),
            None => self.doc.statements.push(statement),
        }
    }

    fn body_line(&mut self, idx: usize, raw: &str) -> Mode {
        let t = raw.trim();
        if t.is_empty() || t.starts_with('\'') {
            return Mode::Body;
        }
        if let Some(rest) = t.strip_prefix("/'") {
            return if rest.contains("'/") { Mode::Body } else { Mode::BlockComment };
        }
        if t.starts_with("@enduml") {
            return Mode::Done;
        }
        if t.starts_with("@startuml") {
            self.error(idx, "nested-startuml", "@startuml inside an open diagram");
            return Mode::Body;
        }
        if t == "}" {
            match self.packages.pop() {
                Some(frame) => self.push(Statement::PackageBlock {
                    line: frame.line,
                    label: frame.label,
                    alias: frame.alias,
                    statements: frame.statements,
                }),
                None => self.error(idx, "unmatched-brace", "`}` closes nothing"),
            }
            return Mode::Body;
        }
        let first = t.split_whitespace().next().unwrap_or("");
        match first {
            "skinparam" => return self.skinparam(idx, t),
            "note" => return self.note(idx, t),
            "package" => {
                self.package(idx, t);
                return Mode::Body;
            }
            _ => {}
        }
        if let Some(edge) = split_edge(t) {
            self.edge(idx, edge);
            return Mode::Body;
        }
        if let Some(keyword) = DeclKeyword::from_word(first) {
            self.declaration(idx, keyword, t[first.len()..].trim());
        } else if DECLARATION_WORDS.contains(&first) {
            self.error(idx, "unsupported-keyword", format!("`{first}` elements are not part of the fault-tree subset"));
        } else {
            self.error(idx, "unknown-directive", format!("cannot interpret `{t}`"));
        }
        Mode::Body
    }

    fn skinparam(&mut self, idx: usize, t: &str) -> Mode {
        let rest = t["skinparam".len()..].trim();
        let mut parts = rest.splitn(2, char::is_whitespace);
        let name = parts.next().unwrap_or("").to_string();
        let value = parts.next().unwrap_or("").trim().to_string();
        if name.is_empty() || value.is_empty() {
            self.error(idx, "malformed-skinparam", "skinparam needs a name and a value");
            return Mode::Body;
        }
        if value == "{" {
            return Mode::SkinBlock {
                line: idx,
                name,
                entries: Vec::new(),
            };
        }
        self.push(Statement::SkinParam { line: idx, name, value });
        Mode::Body
    }

    fn note(&mut self, idx: usize, t: &str) -> Mode {
        let Some(caps) = NOTE.captures(t) else {
            self.error(idx, "malformed-note", "expected `note (top|bottom|left|right) of TARGET`");
            return Mode::Body;
        };
        let position = match &caps[1] {
            "top" => NotePosition::Top,
            "bottom" => NotePosition::Bottom,
            "left" => NotePosition::Left,
            _ => NotePosition::Right,
        };
        let target = caps[2].trim_matches('"').to_string();
        if let Some(inline) = caps.get(3) {
            self.push(Statement::NoteBlock {
                line: idx,
                position,
                target,
                text: vec![inline.as_str().to_string()],
            });
            return Mode::Body;
        }
        Mode::Note {
            line: idx,
            position,
            target,
            text: Vec::new(),
        }
    }

    fn package(&mut self, idx: usize, t: &str) {
        let Some(caps) = PACKAGE.captures(t) else {
            self.error(idx, "malformed-package", "expected `package \"LABEL\" {`");
            return;
        };
        let label = caps.get(1).or(caps.get(2)).map_or("", |m| m.as_str()).to_string();
        if label.trim().is_empty() {
            self.error(idx, "empty-label", "package label is empty");
            return;
        }
        self.packages.push(PackageFrame {
            line: idx,
            label,
            alias: caps.get(3).map(|m| m.as_str().to_string()),
            statements: Vec::new(),
        });
    }

    fn edge(&mut self, idx: usize, parts: EdgeParts<'_>) {
        let from = parse_endpoint(parts.from);
        let to = parse_endpoint(parts.to);
        let (from, to) = match (from, to) {
            (Ok(f), Ok(t)) => (f, t),
            (Err((rule, msg)), _) | (_, Err((rule, msg))) => {
                self.error(idx, rule, msg);
                return;
            }
        };
        let label = match parts.label {
            None => None,
            Some("") => {
                self.error(idx, "empty-edge-label", "`:` must be followed by a gate name");
                return;
            }
            Some(l) => {
                if l.parse::<crate::model::GateKind>().is_err() {
                    self.error(idx, "unsupported-edge-label", format!("edge label `{l}` is not a gate name"));
                    return;
                }
                Some(l.to_string())
            }
        };
        self.push(Statement::Edge(Edge {
            line: idx,
            from,
            to,
            arrow: parts.arrow.to_string(),
            label,
        }));
    }

    fn declaration(&mut self, idx: usize, keyword: DeclKeyword, rest: &str) {
        match parse_declaration(rest) {
            Some((label, alias, link)) => {
                if label.trim().is_empty() {
                    self.error(idx, "empty-label", "declaration has an empty label");
                } else if link.is_some() && keyword != DeclKeyword::File {
                    self.error(idx, "unsupported-link", "only `file` transfers may carry a [[target]] link");
                } else {
                    self.push(Statement::NodeDecl(NodeDecl {
                        line: idx,
                        keyword,
                        label,
                        alias,
                        link,
                    }));
                }
            }
            None => self.error(
                idx,
                "malformed-declaration",
                format!("expected `{} \"LABEL\" as ALIAS`", keyword.as_str()),
            ),
        }
    }
}

/// Parses `"LABEL" [as ALIAS] [[[LINK]]]` or `ALIAS [[[LINK]]]`.
fn parse_declaration(rest: &str) -> Option<(String, Option<String>, Option<String>)> {
    let (label, alias, mut tail) = if let Some(stripped) = rest.strip_prefix('"') {
        let end = stripped.find('"')?;
        let label = stripped[..end].to_string();
        let tail = stripped[end + 1..].trim_start();
        if let Some(after_as) = tail.strip_prefix("as").filter(|s| s.starts_with(char::is_whitespace)) {
            let after_as = after_as.trim_start();
            let alias_end = after_as.find(|c: char| c.is_whitespace()).unwrap_or(after_as.len());
            let alias = &after_as[..alias_end];
            if !is_valid_id(alias) {
                return None;
            }
            (label, Some(alias.to_string()), after_as[alias_end..].trim_start())
        } else {
            (label, None, tail)
        }
    } else {
        let end = rest.find(|c: char| c.is_whitespace()).unwrap_or(rest.len());
        let alias = &rest[..end];
        if !is_valid_id(alias) {
            return None;
        }
        (alias.to_string(), Some(alias.to_string()), rest[end..].trim_start())
    };
    let mut link = None;
    if let Some(inner) = tail.strip_prefix("[[") {
        let end = inner.find("]]")?;
        let target = inner[..end].trim();
        if target.is_empty() {
            return None;
        }
        link = Some(target.to_string());
        tail = inner[end + 2..].trim();
    }
    tail.is_empty().then_some((label, alias, link))
}

type EndpointError = (&'static str, String);

fn parse_endpoint(s: &str) -> Result<Endpoint, EndpointError> {
    let s = s.trim();
    if s.is_empty() {
        return Err(("missing-endpoint", "edge is missing an endpoint".into()));
    }
    if let Some(inner) = s.strip_prefix('"').and_then(|r| r.strip_suffix('"')) {
        if !inner.contains('"') {
            if inner.trim().is_empty() {
                return Err(("empty-label", "quoted endpoint is empty".into()));
            }
            return Ok(Endpoint::Quoted(inner.to_string()));
        }
    }
    if let Some(inner) = s.strip_prefix('(').and_then(|r| r.strip_suffix(')')) {
        let inner = inner.trim();
        if inner.is_empty() || inner.contains(['(', ')', '"']) {
            return Err(("malformed-endpoint", format!("cannot use `{s}` as an endpoint")));
        }
        return Ok(Endpoint::Paren(inner.to_string()));
    }
    if is_valid_id(s) {
        return Ok(Endpoint::Alias(s.to_string()));
    }
    let first = s.split_whitespace().next().unwrap_or("");
    if s.len() > first.len() && DECLARATION_WORDS.contains(&first) {
        return Err((
            "keyword-as-endpoint",
            format!("`{first}` declarations cannot appear inside an edge; declare the node first"),
        ));
    }
    Err(("malformed-endpoint", format!("cannot use `{s}` as an endpoint")))
}

struct EdgeParts<'a> {
    from: &'a str,
    arrow: &'a str,
    to: &'a str,
    label: Option<&'a str>,
}

/// Finds the first arrow outside quotes and parentheses and splits around it.
fn split_edge(t: &str) -> Option<EdgeParts<'_>> {
    let arrow_at = scan_outside(t, |i, c| c == '-' && ARROW.is_match(&t[i..]))?;
    let arrow = ARROW.find(&t[arrow_at..])?.as_str();
    let from = t[..arrow_at].trim();
    let rest = &t[arrow_at + arrow.len()..];
    let (to, label) = match scan_outside(rest, |_, c| c == ':') {
        Some(colon) => (rest[..colon].trim(), Some(rest[colon + 1..].trim())),
        None => (rest.trim(), None),
    };
    Some(EdgeParts { from, arrow, to, label })
}

/// Byte index of the first char outside `"..."` and `(...)` accepted by `pred`.
fn scan_outside(s: &str, pred: impl Fn(usize, char) -> bool) -> Option<usize> {
    let mut in_quote = false;
    let mut depth = 0usize;
    for (i, c) in s.char_indices() {
        match c {
            '"' => in_quote = !in_quote,
            '(' if !in_quote => depth += 1,
            ')' if !in_quote => depth = depth.saturating_sub(1),
            _ if !in_quote && depth == 0 && pred(i, c) => return Some(i),
            _ => {}
        }
    }
    None
}

/// Splits text into lines (without terminators) and parses the first
/// `@startuml` ... `@enduml` block. Never fails: problems are diagnostics.
pub fn parse_document(source: &str) -> (PumlDocument, Vec<Diagnostic>) {
    let source_lines: Vec<String> = source
        .split('\n')
        .map(|l| l.strip_suffix('\r').unwrap_or(l).to_string())
        .collect();
    let mut p = Parser {
        doc: PumlDocument {
            source_lines,
            ..PumlDocument::default()
        },
        diagnostics: Vec::new(),
        packages: Vec::new(),
    };

    let lines = p.doc.source_lines.clone();
    let mut mode = Mode::BeforeStart;
    for (idx, raw) in lines.iter().enumerate() {
        let t = raw.trim();
        mode = match mode {
            Mode::BeforeStart => {
                if let Some(rest) = t.strip_prefix("@startuml") {
                    p.doc.start_index = Some(idx);
                    p.doc.title = rest.trim().to_string();
                    Mode::Body
                } else {
                    Mode::BeforeStart
                }
            }
            Mode::Body => p.body_line(idx, raw),
            Mode::BlockComment => {
                if t.contains("'/") {
                    Mode::Body
                } else {
                    Mode::BlockComment
                }
            }
            Mode::Note {
                line,
                position,
                target,
                mut text,
            } => {
                if t == "end note" || t == "endnote" {
                    p.push(Statement::NoteBlock {
                        line,
                        position,
                        target,
                        text,
                    });
                    Mode::Body
                } else {
                    text.push(t.to_string());
                    Mode::Note {
                        line,
                        position,
                        target,
                        text,
                    }
                }
            }
            Mode::SkinBlock {
                line,
                name,
                mut entries,
            } => {
                if t == "}" {
                    p.push(Statement::SkinParamBlock { line, name, entries });
                    Mode::Body
                } else {
                    if !t.is_empty() {
                        let mut kv = t.splitn(2, char::is_whitespace);
                        let key = kv.next().unwrap_or("").to_string();
                        let value = kv.next().unwrap_or("").trim().to_string();
                        if value.is_empty() {
                            p.error(idx, "malformed-skinparam", "skinparam entry needs a value");
                        } else if !is_valid_id(&key) || value.contains(['(', ')', '"', '{']) {
                            p.error(idx, "malformed-skinparam", format!("`{t}` is not a `name value` skinparam entry"));
                        }
                        entries.push((key, value));
                    }
                    Mode::SkinBlock { line, name, entries }
                }
            }
            Mode::Done => Mode::Done,
        };
    }

    let last = lines.len().saturating_sub(1);
    match mode {
        Mode::BeforeStart => {
            let first = lines.iter().position(|l| !l.trim().is_empty()).unwrap_or(0);
            if lines.iter().all(|l| l.trim().is_empty()) {
                p.diagnostics.push(Diagnostic::error(
                    "missing-startuml",
                    "no @startuml line found",
                    Location::Document,
                ));
            } else {
                p.error(first, "missing-startuml", "no @startuml line found");
            }
        }
        Mode::Note { line, .. } => p.error(line, "unclosed-note", "note is never closed with `end note`"),
        Mode::SkinBlock { line, .. } => p.error(line, "unclosed-skinparam", "skinparam block is never closed"),
        Mode::BlockComment | Mode::Body => {
            let at = lines.iter().rposition(|l| !l.trim().is_empty()).unwrap_or(last);
            p.error(at, "missing-enduml", "diagram is not closed with @enduml");
        }
        Mode::Done => {}
    }
    while let Some(frame) = p.packages.pop() {
        p.error(frame.line, "unclosed-package", format!("package \"{}\" is never closed", frame.label));
    }
    p.diagnostics.sort_by_key(|d| d.file_line().unwrap_or(0));
    (p.doc, p.diagnostics)
}
