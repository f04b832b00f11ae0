//! The `fta` command line.
//!
//! Exit codes: 0 on success, 1 when the input is invalid or an operation
//! fails, 2 when the command line itself is wrong.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use fta_copilot::{
    record_session, replay_session, ChatProvider, HttpChatProvider, Outcome, RepairLoop, DEFAULT_MAX_REPAIRS,
};
use fta_core::puml::parse_plantuml_with_warnings;
use fta_core::{
    emit_plantuml, from_json, layout_tree, minimal_cut_sets, render_all, render_svg, to_json, top_probability,
    Diagnostic, EmitStyle, Example, FaultTree, FtaError, GateKind, RenderOptions,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "fta", version, about = "Fault-tree analysis toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a tree and report diagnostics
    Validate(ValidateArgs),
    /// Convert between PlantUML, JSON and SVG
    Convert(ConvertArgs),
    /// List minimal cut sets
    Cutsets(CutsetsArgs),
    /// Compute the top-event probability
    Prob(ProbArgs),
    /// Draft a tree with a chat model and repair it from diagnostics
    Copilot(CopilotArgs),
    /// Print a bundled example tree
    Example(ExampleArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum InputFormat {
    Puml,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Puml,
    Json,
    Svg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Style {
    Flat,
    Gated,
}

impl From<Style> for EmitStyle {
    fn from(s: Style) -> Self {
        match s {
            Style::Flat => EmitStyle::Flat,
            Style::Gated => EmitStyle::Gated,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ReportFormat {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ExampleName {
    LidarInitial,
    LidarFinal,
    LidarPerformance,
}

impl From<ExampleName> for Example {
    fn from(n: ExampleName) -> Self {
        match n {
            ExampleName::LidarInitial => Example::LidarInitial,
            ExampleName::LidarFinal => Example::LidarFinal,
            ExampleName::LidarPerformance => Example::LidarPerformance,
        }
    }
}

/// Where a tree comes from and how to read it.
#[derive(Debug, Args)]
pub struct InputArgs {
    /// Input file, or `-` for standard input
    pub input: PathBuf,
    /// Input format; guessed from the extension when omitted
    #[arg(long, value_enum)]
    pub from: Option<InputFormat>,
    /// Gate used for PlantUML connections that name none
    #[arg(long, default_value = "OR", value_parser = parse_gate)]
    pub default_gate: GateKind,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub input: InputArgs,
}

#[derive(Debug, Args)]
pub struct ConvertArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum)]
    pub to: OutputFormat,
    /// PlantUML layout
    #[arg(long, value_enum, default_value = "gated")]
    pub style: Style,
    /// Write here instead of standard output
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CutsetsArgs {
    #[command(flatten)]
    pub input: InputArgs,
    #[arg(long, value_enum, default_value = "text")]
    pub format: ReportFormat,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ProbArgs {
    #[command(flatten)]
    pub input: InputArgs,
    /// JSON object mapping leaf ids to probabilities; overrides values
    /// stored in the tree
    #[arg(long)]
    pub probs: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "text")]
    pub format: ReportFormat,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CopilotArgs {
    /// Component to analyse, e.g. "Lidar sensor in Autonomy"
    pub description: String,
    #[arg(long, default_value_t = DEFAULT_MAX_REPAIRS)]
    pub max_repairs: usize,
    /// Save the session transcript as JSON
    #[arg(long, conflicts_with = "replay")]
    pub record: Option<PathBuf>,
    /// Answer from a recorded transcript instead of the network
    #[arg(long)]
    pub replay: Option<PathBuf>,
    #[arg(long, default_value = "OR", value_parser = parse_gate)]
    pub default_gate: GateKind,
    #[arg(long, value_enum, default_value = "gated")]
    pub style: Style,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExampleArgs {
    #[arg(value_enum)]
    pub name: ExampleName,
    /// `puml` prints the listing as bundled
    #[arg(long, value_enum, default_value = "puml")]
    pub to: OutputFormat,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_gate(s: &str) -> Result<GateKind, String> {
    s.parse().map_err(|e: fta_core::model::UnknownGateKind| e.to_string())
}

/// Process environment and streams, injectable for tests.
pub struct Io<'a> {
    pub env: &'a dyn Fn(&str) -> Option<String>,
    pub stdin: &'a mut dyn Read,
    pub stdout: &'a mut dyn Write,
    pub stderr: &'a mut dyn Write,
}

/// A failed command: what to print and the exit code.
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn new(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_FAILURE,
            message: message.into(),
        }
    }

    fn diagnostics(diagnostics: &[Diagnostic]) -> Self {
        Failure::new(render_all(diagnostics))
    }
}

impl From<FtaError> for Failure {
    fn from(e: FtaError) -> Self {
        match e {
            FtaError::InvalidTree(d) => Failure::diagnostics(&d),
            other => Failure::new(format!("error: {other}\n")),
        }
    }
}

impl From<fta_copilot::CopilotError> for Failure {
    fn from(e: fta_copilot::CopilotError) -> Self {
        Failure::new(format!("error: {e}\n"))
    }
}

type CmdResult = Result<(), Failure>;

/// Parses `argv` (program name first) and runs the command.
pub fn run<I, T>(argv: I, io: Io<'_>) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let rendered = e.render().to_string();
            return if e.use_stderr() {
                let _ = io.stderr.write_all(rendered.as_bytes());
                EXIT_USAGE
            } else {
                let _ = io.stdout.write_all(rendered.as_bytes());
                EXIT_OK
            };
        }
    };
    let Io {
        env,
        stdin,
        stdout,
        stderr,
    } = io;
    let mut ctx = Context { env, stdin, stdout, stderr };
    match ctx.dispatch(cli.command) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = ctx.stderr.write_all(f.message.as_bytes());
            f.code
        }
    }
}

/// Runs against the real process environment and standard streams.
pub fn run_process() -> i32 {
    let env = |k: &str| std::env::var(k).ok();
    let mut stdin = std::io::stdin().lock();
    let mut stdout = std::io::stdout().lock();
    let mut stderr = std::io::stderr().lock();
    let code = run(
        std::env::args_os(),
        Io {
            env: &env,
            stdin: &mut stdin,
            stdout: &mut stdout,
            stderr: &mut stderr,
        },
    );
    let _ = stdout.flush();
    code
}

struct Context<'a> {
    env: &'a dyn Fn(&str) -> Option<String>,
    stdin: &'a mut dyn Read,
    stdout: &'a mut dyn Write,
    stderr: &'a mut dyn Write,
}

impl Context<'_> {
    fn dispatch(&mut self, command: Command) -> CmdResult {
        match command {
            Command::Validate(a) => self.validate(a),
            Command::Convert(a) => self.convert(a),
            Command::Cutsets(a) => self.cutsets(a),
            Command::Prob(a) => self.prob(a),
            Command::Copilot(a) => self.copilot(a),
            Command::Example(a) => self.example(a),
        }
    }

    fn read_text(&mut self, path: &Path) -> Result<String, Failure> {
        if path.as_os_str() == "-" {
            let mut text = String::new();
            self.stdin
                .read_to_string(&mut text)
                .map_err(|e| Failure::new(format!("error: reading standard input: {e}\n")))?;
            Ok(text)
        } else {
            std::fs::read_to_string(path).map_err(|e| Failure::new(format!("error: {}: {e}\n", path.display())))
        }
    }

    /// Loads a tree; warnings go to standard error.
    fn load(&mut self, input: &InputArgs) -> Result<FaultTree, Failure> {
        let text = self.read_text(&input.input)?;
        let format = input.from.unwrap_or_else(|| {
            let is_json = input.input.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
            if is_json {
                InputFormat::Json
            } else {
                InputFormat::Puml
            }
        });
        let (tree, warnings) = match format {
            InputFormat::Puml => {
                let parsed = parse_plantuml_with_warnings(&text, input.default_gate).map_err(|d| Failure::diagnostics(&d))?;
                (parsed.tree, parsed.warnings)
            }
            InputFormat::Json => {
                let tree = from_json(&text).map_err(|d| Failure::diagnostics(&d))?;
                let warnings = fta_core::validate_tree(&tree);
                if fta_core::has_errors(&warnings) {
                    return Err(Failure::diagnostics(&warnings));
                }
                (tree, warnings)
            }
        };
        let _ = self.stderr.write_all(render_all(&warnings).as_bytes());
        Ok(tree)
    }

    fn emit(&mut self, text: &str, out: Option<&Path>) -> CmdResult {
        match out {
            Some(path) => {
                std::fs::write(path, text).map_err(|e| Failure::new(format!("error: {}: {e}\n", path.display())))
            }
            None => self
                .stdout
                .write_all(text.as_bytes())
                .map_err(|e| Failure::new(format!("error: writing output: {e}\n"))),
        }
    }

    fn validate(&mut self, a: ValidateArgs) -> CmdResult {
        self.load(&a.input).map(|_| ())
    }

    fn convert(&mut self, a: ConvertArgs) -> CmdResult {
        let tree = self.load(&a.input)?;
        let text = write_tree(&tree, a.to, a.style.into())?;
        self.emit(&text, a.out.as_deref())
    }

    fn cutsets(&mut self, a: CutsetsArgs) -> CmdResult {
        let tree = self.load(&a.input)?;
        let report = minimal_cut_sets(&tree)?;
        let _ = self.stderr.write_all(render_all(&report.warnings).as_bytes());
        let text = match a.format {
            ReportFormat::Text => report.cut_sets.iter().map(|c| format!("{c}\n")).collect(),
            ReportFormat::Json => {
                let sets: Vec<Vec<&String>> = report.cut_sets.iter().map(|c| c.members.iter().collect()).collect();
                let value = serde_json::json!({
                    "cut_sets": sets,
                    "xor_approximated": report.xor_approximated,
                });
                pretty(&value)
            }
        };
        self.emit(&text, a.out.as_deref())
    }

    fn prob(&mut self, a: ProbArgs) -> CmdResult {
        let tree = self.load(&a.input)?;
        let mut probs = tree.embedded_probabilities();
        if let Some(path) = &a.probs {
            let text = self.read_text(path)?;
            let given: BTreeMap<String, f64> = serde_json::from_str(&text).map_err(|e| {
                Failure::new(format!("error: {}: expected a JSON object of leaf probabilities: {e}\n", path.display()))
            })?;
            probs.extend(given);
        }
        let report = top_probability(&tree, &probs)?;
        let _ = self.stderr.write_all(render_all(&report.warnings).as_bytes());
        let text = match a.format {
            ReportFormat::Text => {
                let mut s = format!("{}\n", report.value);
                if report.is_approximate() {
                    s.push_str("(approximate)\n");
                }
                s
            }
            ReportFormat::Json => pretty(&serde_json::json!({
                "value": report.value,
                "method": report.method,
            })),
        };
        self.emit(&text, a.out.as_deref())
    }

    fn copilot(&mut self, a: CopilotArgs) -> CmdResult {
        let provider: Box<dyn ChatProvider> = match &a.replay {
            Some(path) => Box::new(replay_session(path)?),
            None => Box::new(HttpChatProvider::from_env(self.env)),
        };
        let mut repair = RepairLoop::new(a.max_repairs);
        repair.default_gate = a.default_gate;
        let session = repair.run(provider.as_ref(), &a.description)?;

        let mut log = String::new();
        for (i, round) in session.rounds.iter().enumerate() {
            let errors = round.diagnostics.iter().filter(|d| d.is_error()).count();
            let _ = writeln!(log, "round {}: {errors} error(s)", i + 1);
        }
        let _ = self.stderr.write_all(log.as_bytes());
        if let Some(path) = &a.record {
            record_session(&session, path, &provider.secrets())?;
        }
        match &session.outcome {
            Outcome::Success(tree) => {
                let text = emit_plantuml(tree, a.style.into())?;
                self.emit(&text, a.out.as_deref())
            }
            Outcome::Exhausted => {
                let last = session.rounds.last().map(|r| r.diagnostics.as_slice()).unwrap_or_default();
                Err(Failure::new(format!(
                    "{}error: no valid tree after {} repair round(s)\n",
                    render_all(last),
                    a.max_repairs
                )))
            }
        }
    }

    fn example(&mut self, a: ExampleArgs) -> CmdResult {
        let example = Example::from(a.name);
        let text = match a.to {
            OutputFormat::Puml => example.source().to_string(),
            other => write_tree(&example.tree(), other, EmitStyle::Gated)?,
        };
        self.emit(&text, a.out.as_deref())
    }
}

fn pretty(value: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("json value serializes");
    s.push('\n');
    s
}

fn write_tree(tree: &FaultTree, to: OutputFormat, style: EmitStyle) -> Result<String, Failure> {
    Ok(match to {
        OutputFormat::Puml => emit_plantuml(tree, style)?,
        OutputFormat::Json => to_json(tree),
        OutputFormat::Svg => render_svg(tree, &layout_tree(tree)?, &RenderOptions::default())?,
    })
}
