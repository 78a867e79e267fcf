//! Argument model and driver for the `netdea` command.

use std::fmt;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use netdea::{
    build_report, parse_dataset, render_ranks, render_report, solve_all_ccr, solve_all_relational, AnalysisReport,
    Dataset, DeaError, ReportFormat, SolverConfig, StagePriority,
};

#[derive(Debug, Parser)]
#[command(name = "netdea", version, about = "Two-stage relational network DEA")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve the selected model(s) and print score tables.
    Solve(CommonArgs),
    /// Solve both models and compare overall ranks.
    Compare(CommonArgs),
    /// Print rank columns only.
    Rank(CommonArgs),
    /// Check a dataset without solving anything.
    Validate(CommonArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Model {
    Ccr,
    Relational,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PriorityArg {
    First,
    Second,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Table,
    Csv,
    Json,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// Dataset file (header: id,name,x1..,z1..,y1..).
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long, value_enum, default_value_t = Model::Both)]
    pub model: Model,
    /// Stage maximized first when splitting the overall score.
    #[arg(long, value_enum, default_value_t = PriorityArg::Second)]
    pub stage_priority: PriorityArg,
    /// Lower bound on every multiplier.
    #[arg(long, env = "NETDEA_EPSILON", default_value_t = netdea::dea::DEFAULT_EPSILON)]
    pub epsilon: f64,
    #[arg(long, value_enum, default_value_t = FormatArg::Table)]
    pub format: FormatArg,
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
    Solver(String),
    Output(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            Self::Usage(_) => 2,
            Self::Data(_) => 3,
            Self::Solver(_) => 4,
            Self::Output(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Usage(m) => write!(f, "usage error: {m}"),
            Self::Data(m) => write!(f, "data error: {m}"),
            Self::Solver(m) => write!(f, "solver error: {m}"),
            Self::Output(m) => write!(f, "output error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

fn solver_error(e: DeaError) -> CliError {
    match e {
        DeaError::Dataset(d) => CliError::Data(d.to_string()),
        DeaError::InvalidConfig(m) => CliError::Usage(m),
        other => CliError::Solver(other.to_string()),
    }
}

impl CommonArgs {
    pub fn config(&self) -> Result<SolverConfig, CliError> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(CliError::Usage(format!(
                "--epsilon must lie in (0, 1), got {}",
                self.epsilon
            )));
        }
        let priority = match self.stage_priority {
            PriorityArg::First => StagePriority::FirstStage,
            PriorityArg::Second => StagePriority::SecondStage,
        };
        Ok(SolverConfig::default()
            .with_epsilon(self.epsilon)
            .with_stage_priority(priority))
    }

    fn format(&self) -> ReportFormat {
        match self.format {
            FormatArg::Table => ReportFormat::Table,
            FormatArg::Csv => ReportFormat::Csv,
            FormatArg::Json => ReportFormat::Json,
        }
    }

    pub fn load(&self) -> Result<Dataset, CliError> {
        let text = std::fs::read_to_string(&self.data)
            .map_err(|e| CliError::Data(format!("cannot read {}: {e}", self.data.display())))?;
        parse_dataset(&text).map_err(|e| CliError::Data(format!("{}: {e}", self.data.display())))
    }
}

fn plural(count: usize, word: &str) -> String {
    if count == 1 {
        format!("{count} {word}")
    } else {
        format!("{count} {word}s")
    }
}

/// One-line dataset summary, e.g. `13 DMUs, 3 inputs, 1 intermediate, 1 output`.
pub fn summary(data: &Dataset) -> String {
    format!(
        "{}, {}, {}, {}",
        plural(data.num_dmus(), "DMU"),
        plural(data.num_inputs(), "input"),
        plural(data.num_intermediates(), "intermediate"),
        plural(data.num_outputs(), "output"),
    )
}

fn analyse(args: &CommonArgs, model: Model) -> Result<AnalysisReport, CliError> {
    let cfg = args.config()?;
    let data = args.load()?;
    let relational = match model {
        Model::Relational | Model::Both => solve_all_relational(&data, &cfg).map_err(solver_error)?,
        Model::Ccr => Vec::new(),
    };
    let ccr = match model {
        Model::Ccr | Model::Both => solve_all_ccr(&data, &cfg).map_err(solver_error)?,
        Model::Relational => Vec::new(),
    };
    build_report(&relational, &ccr, &cfg).map_err(|e| CliError::Solver(format!("analysis: {e}")))
}

/// Executes a command and returns the report text.
pub fn run(command: &Command) -> Result<String, CliError> {
    match command {
        Command::Solve(args) => Ok(render_report(&analyse(args, args.model)?, args.format())),
        Command::Compare(args) => Ok(render_report(&analyse(args, Model::Both)?, args.format())),
        Command::Rank(args) => Ok(render_ranks(&analyse(args, args.model)?, args.format())),
        Command::Validate(args) => {
            args.config()?;
            let data = args.load()?;
            Ok(format!("{}\n", summary(&data)))
        }
    }
}

/// Output destination of a command.
pub fn output_path(command: &Command) -> Option<&PathBuf> {
    match command {
        Command::Solve(a) | Command::Compare(a) | Command::Rank(a) | Command::Validate(a) => a.out.as_ref(),
    }
}
