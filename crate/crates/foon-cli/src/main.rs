//! `foon` — merge annotation subgraphs into a universal network, retrieve
//! task trees for goal objects, validate trees against a kitchen, benchmark
//! the retrieval strategies, and export Graphviz views.
//!
//! Exit codes: 0 success, 1 retrieval or validation failure, 2 input or
//! parse error.

use std::fs;
use std::io::IsTerminal;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use foon_core::bench::{render_csv, render_text_table, run_table};
use foon_core::dot::export_dot;
use foon_core::model::{KitchenItem, MotionFlag, ObjectNode};
use foon_core::parser::ParseDiagnostic;
use foon_core::retrieval::{DEFAULT_MAX_DEPTH, RetrievalQuery, Strategy, validate};
use foon_core::{UniversalFoon, parse_kitchen, parse_subgraph, serialize_subgraph};

#[derive(Parser)]
#[command(
    name = "foon",
    version,
    about = "Task planning over functional object-oriented networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Merge subgraph files into a universal network file
    Merge(MergeArgs),
    /// Retrieve a task tree for a goal object from a kitchen
    Retrieve(RetrieveArgs),
    /// Check a task tree file against a kitchen and goal
    Validate(ValidateArgs),
    /// Unit-count and timing table for every goal and strategy
    Stats(StatsArgs),
    /// Export a network as a Graphviz DOT digraph
    ExportDot(ExportDotArgs),
}

#[derive(Args)]
struct MergeArgs {
    /// Subgraph files, merged in argument order
    #[arg(required = true)]
    files: Vec<PathBuf>,
    /// Output path for the merged network (stdout when absent)
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Algo {
    /// Iterative deepening (minimum-depth tree)
    Iddfs,
    /// Greedy maximum success rate
    H1,
    /// Greedy minimum input count
    H2,
}

impl From<Algo> for Strategy {
    fn from(algo: Algo) -> Strategy {
        match algo {
            Algo::Iddfs => Strategy::Iddfs,
            Algo::H1 => Strategy::MaxSuccessRate,
            Algo::H2 => Strategy::MinInputCount,
        }
    }
}

#[derive(Args)]
struct GoalSpec {
    /// Goal object name
    #[arg(long)]
    goal: Option<String>,
    /// Goal state (repeat for multiple states)
    #[arg(long = "state")]
    states: Vec<String>,
    /// Goal ingredient (repeat for multiple ingredients)
    #[arg(long = "ingredient")]
    ingredients: Vec<String>,
}

impl GoalSpec {
    fn to_node(&self) -> Result<ObjectNode, AppError> {
        let name = self
            .goal
            .as_deref()
            .ok_or_else(|| AppError::input("a goal is required: --goal NAME --state STATE"))?;
        if self.states.is_empty() {
            return Err(AppError::input("the goal needs at least one --state"));
        }
        ObjectNode::new(
            name,
            MotionFlag::Idle,
            self.states.clone(),
            self.ingredients.clone(),
        )
        .map_err(|e| AppError::input(format!("invalid goal: {e}")))
    }
}

#[derive(Args)]
struct RetrieveArgs {
    /// Universal network file
    #[arg(long = "foon")]
    foon: PathBuf,
    /// Kitchen inventory file
    #[arg(long)]
    kitchen: PathBuf,
    #[command(flatten)]
    goal: GoalSpec,
    /// Retrieval strategy
    #[arg(long)]
    algo: Algo,
    /// Iterative deepening bound
    #[arg(long, default_value_t = DEFAULT_MAX_DEPTH)]
    max_depth: usize,
    /// Treat objects with no creating unit as assumed-available instead of
    /// failing (breadth-first strategies only)
    #[arg(long)]
    lenient: bool,
    /// Output path for the task tree file (stdout when absent)
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    /// Task tree file (subgraph format, execution order)
    #[arg(long = "foon")]
    foon: PathBuf,
    /// Kitchen inventory file
    #[arg(long)]
    kitchen: PathBuf,
    #[command(flatten)]
    goal: GoalSpec,
}

#[derive(Args)]
struct StatsArgs {
    /// Universal network file
    #[arg(long = "foon")]
    foon: PathBuf,
    /// Kitchen inventory file
    #[arg(long)]
    kitchen: PathBuf,
    /// Goal list file (same O/S grammar as a kitchen file)
    #[arg(long)]
    goals: Option<PathBuf>,
    #[command(flatten)]
    goal: GoalSpec,
    /// Retrievals per goal and strategy; the reported time is the median
    #[arg(long, default_value_t = 5)]
    repeats: usize,
    /// CSV output path
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ExportDotArgs {
    /// Universal network file
    #[arg(long = "foon")]
    foon: PathBuf,
    /// Output path for the DOT text (stdout when absent)
    #[arg(short, long)]
    output: Option<PathBuf>,
}

enum AppError {
    /// Bad input: unreadable files, parse errors, malformed flags (exit 2).
    Input(String),
    /// The operation itself failed: no tree, invalid tree (exit 1).
    Failure(String),
}

impl AppError {
    fn input(msg: impl Into<String>) -> Self {
        AppError::Input(msg.into())
    }

    fn failure(msg: impl Into<String>) -> Self {
        AppError::Failure(msg.into())
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Merge(args) => cmd_merge(args),
        Command::Retrieve(args) => cmd_retrieve(args),
        Command::Validate(args) => cmd_validate(args),
        Command::Stats(args) => cmd_stats(args),
        Command::ExportDot(args) => cmd_export_dot(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(AppError::Failure(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(1)
        }
        Err(AppError::Input(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(2)
        }
    }
}

fn read_file(path: &Path) -> Result<String, AppError> {
    fs::read_to_string(path).map_err(|e| AppError::input(format!("{}: {e}", path.display())))
}

fn report_diagnostics(path: &Path, diagnostics: &[ParseDiagnostic]) -> AppError {
    for diagnostic in diagnostics {
        eprintln!("{}:{diagnostic}", path.display());
    }
    AppError::input(format!(
        "{}: {} parse error(s)",
        path.display(),
        diagnostics.len()
    ))
}

fn load_subgraph(path: &Path) -> Result<Vec<foon_core::FunctionalUnit>, AppError> {
    parse_subgraph(&read_file(path)?).map_err(|diags| report_diagnostics(path, &diags))
}

fn load_kitchen(path: &Path) -> Result<Vec<KitchenItem>, AppError> {
    parse_kitchen(&read_file(path)?).map_err(|diags| report_diagnostics(path, &diags))
}

/// Write to the path or stdout; returns true when stdout carried the payload.
fn emit(output: &Option<PathBuf>, payload: &str) -> Result<bool, AppError> {
    match output {
        Some(path) => {
            fs::write(path, payload)
                .map_err(|e| AppError::input(format!("{}: {e}", path.display())))?;
            Ok(false)
        }
        None => {
            print!("{payload}");
            Ok(true)
        }
    }
}

/// Summaries go to stdout unless the payload already owns it.
fn summarize(on_stdout: bool, message: &str) {
    if on_stdout {
        eprintln!("{message}");
    } else {
        println!("{message}");
    }
}

fn cmd_merge(args: MergeArgs) -> Result<(), AppError> {
    let mut subgraphs = Vec::new();
    for path in &args.files {
        subgraphs.push(load_subgraph(path)?);
    }
    let foon = UniversalFoon::merge(subgraphs);
    let used_stdout = emit(&args.output, &serialize_subgraph(foon.units()))?;
    summarize(
        used_stdout,
        &format!(
            "{} unit(s), {} duplicate(s) removed",
            foon.len(),
            foon.duplicates_removed()
        ),
    );
    Ok(())
}

fn cmd_retrieve(args: RetrieveArgs) -> Result<(), AppError> {
    let foon = UniversalFoon::merge([load_subgraph(&args.foon)?]);
    let kitchen = load_kitchen(&args.kitchen)?;
    let goal = args.goal.to_node()?;
    let query = RetrievalQuery::new(goal, kitchen, args.algo.into())
        .with_max_depth(args.max_depth)
        .with_lenient(args.lenient);
    let tree = foon_core::retrieve(&foon, &query)
        .map_err(|e| AppError::failure(format!("retrieval failed: {e}")))?;
    for key in tree.assumed_available() {
        eprintln!("warning: assumed available: {key}");
    }
    let used_stdout = emit(&args.output, &serialize_subgraph(tree.units()))?;
    let bound = match tree.depth_bound_used() {
        Some(bound) => format!(", depth bound {bound}"),
        None => String::new(),
    };
    summarize(
        used_stdout,
        &format!("{} unit(s){bound}", tree.unit_count()),
    );
    Ok(())
}

fn cmd_validate(args: ValidateArgs) -> Result<(), AppError> {
    let units = load_subgraph(&args.foon)?;
    let kitchen = load_kitchen(&args.kitchen)?;
    let goal = args.goal.to_node()?;
    let report = validate(&units, &goal, &kitchen);
    print!("{report}");
    if report.is_valid() {
        Ok(())
    } else {
        Err(AppError::failure(format!(
            "{}: task tree is not executable",
            args.foon.display()
        )))
    }
}

fn use_color() -> bool {
    match std::env::var("FOON_COLOR").as_deref() {
        Ok("never") => false,
        _ => std::io::stdout().is_terminal(),
    }
}

fn cmd_stats(args: StatsArgs) -> Result<(), AppError> {
    let foon = UniversalFoon::merge([load_subgraph(&args.foon)?]);
    let kitchen = load_kitchen(&args.kitchen)?;
    let goals: Vec<ObjectNode> = match &args.goals {
        Some(path) => load_kitchen(path)?
            .iter()
            .map(KitchenItem::to_object_node)
            .collect(),
        None => vec![args.goal.to_node()?],
    };
    if goals.is_empty() {
        return Err(AppError::input("the goal list is empty"));
    }
    let rows = run_table(&foon, &kitchen, &goals, args.repeats.max(1));
    print!("{}", render_text_table(&rows, use_color()));
    match &args.output {
        Some(_) => {
            emit(&args.output, &render_csv(&rows))?;
            println!("wrote {}", args.output.as_ref().unwrap().display());
        }
        None => eprintln!("note: pass -o PATH to also write the table as CSV"),
    }
    Ok(())
}

fn cmd_export_dot(args: ExportDotArgs) -> Result<(), AppError> {
    let foon = UniversalFoon::merge([load_subgraph(&args.foon)?]);
    let used_stdout = emit(&args.output, &export_dot(&foon))?;
    summarize(
        used_stdout,
        &format!(
            "{} unit(s), {} object node(s)",
            foon.len(),
            foon.creators_index().len()
        ),
    );
    Ok(())
}
