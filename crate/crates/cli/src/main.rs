use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use gts_core::dot::{shape_dot, transition_system_dot};
use gts_core::explore::{explore, stats_report, Config, Engine, Mode, ReportFormat, Strategy, CSV_HEADER};
use gts_core::grammar::{parse_grammar_with, Grammar, ParseOptions};
use gts_core::abstract_graph;

/// Explore graph transformation systems, concretely or over neighbourhood
/// shapes.
#[derive(Parser, Debug)]
#[command(name = "gts", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Explore the state space of a grammar and report statistics.
    Explore(ExploreArgs),
    /// Print the shape of the start graph in DOT.
    Abstract { file: PathBuf },
    /// Parse and validate a grammar.
    Check { file: PathBuf },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum EngineArg {
    Abstract,
    Concrete,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum StrategyArg {
    Bfs,
    Dfs,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum OnOff {
    On,
    Off,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Full,
    Reach,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FormatArg {
    Table,
    Csv,
}

#[derive(clap::Args, Debug)]
struct ExploreArgs {
    file: PathBuf,
    #[arg(long, value_enum, default_value = "abstract")]
    engine: EngineArg,
    #[arg(long, value_enum, default_value = "dfs")]
    strategy: StrategyArg,
    /// Shape subsumption; on by default for the abstract engine.
    #[arg(long, value_enum)]
    subsumption: Option<OnOff>,
    #[arg(long, value_enum, default_value = "full")]
    mode: ModeArg,
    /// Stop after generating this many states.
    #[arg(long, value_name = "N")]
    max_states: Option<usize>,
    /// Do not expand concrete states at this depth.
    #[arg(long, value_name = "N")]
    max_depth: Option<usize>,
    /// Wall-clock limit in seconds.
    #[arg(long, value_name = "SECS")]
    timeout: Option<f64>,
    /// Write the statistics as CSV to this file.
    #[arg(long, value_name = "PATH")]
    stats_csv: Option<PathBuf>,
    /// Write the transition system in DOT to this file.
    #[arg(long, value_name = "PATH")]
    dot: Option<PathBuf>,
    /// Also run without subsumption to fill in the maximum state count.
    #[arg(long)]
    with_maximum: bool,
    /// Format of the report on standard output.
    #[arg(long, value_enum, default_value = "table")]
    format: FormatArg,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn load(path: &Path, options: ParseOptions) -> Result<Grammar> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_grammar_with(&text, options).with_context(|| format!("parsing {}", path.display()))
}

fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Check { file } => {
            let g = load(&file, ParseOptions::default())?;
            println!(
                "{}: {} labels, {} rules, start graph with {} nodes{}",
                g.name,
                g.alphabet.labels().count(),
                g.rules.len(),
                g.start.node_count(),
                if g.has_nacs() { " (uses negative conditions)" } else { "" }
            );
            Ok(0)
        }
        Command::Abstract { file } => {
            let g = load(&file, ParseOptions::default())?;
            print!("{}", shape_dot(&abstract_graph(&g.start), &g.alphabet));
            Ok(0)
        }
        Command::Explore(args) => run_explore(args),
    }
}

fn run_explore(args: ExploreArgs) -> Result<u8> {
    let engine = match args.engine {
        EngineArg::Abstract => Engine::Abstract,
        EngineArg::Concrete => Engine::Concrete,
    };
    let subsumption = match args.subsumption {
        Some(OnOff::On) => true,
        Some(OnOff::Off) => false,
        None => engine == Engine::Abstract,
    };
    let timeout = match args.timeout {
        Some(secs) if !(secs.is_finite() && secs >= 0.0) => anyhow::bail!("invalid timeout {secs}"),
        Some(secs) => Some(Duration::from_secs_f64(secs)),
        None => None,
    };
    let config = Config {
        engine,
        strategy: match args.strategy {
            StrategyArg::Bfs => Strategy::Bfs,
            StrategyArg::Dfs => Strategy::Dfs,
        },
        subsumption,
        mode: match args.mode {
            ModeArg::Full => Mode::Full,
            ModeArg::Reach => Mode::Reach,
        },
        max_states: args.max_states,
        max_depth: args.max_depth,
        timeout,
    };
    let grammar = load(&args.file, ParseOptions { abstract_only: engine == Engine::Abstract })?;
    let mut run = explore(&grammar, &config)?;
    if args.with_maximum && config.subsumption {
        let unsubsumed = Config { subsumption: false, mode: Mode::Reach, ..config.clone() };
        run.stats.maximum = explore(&grammar, &unsubsumed)?.stats.maximum;
    }

    let format = match args.format {
        FormatArg::Table => ReportFormat::Table,
        FormatArg::Csv => ReportFormat::Csv,
    };
    print!("{}", stats_report(&run.stats, &grammar.name, &config, format));
    if let Some(path) = &args.stats_csv {
        let csv = format!("{CSV_HEADER}\n{}\n", run.stats.csv_row(&grammar.name, &config));
        fs::write(path, csv).with_context(|| format!("writing {}", path.display()))?;
    }
    if let Some(path) = &args.dot {
        fs::write(path, transition_system_dot(&run.system)).with_context(|| format!("writing {}", path.display()))?;
    }
    if run.stats.complete {
        Ok(0)
    } else {
        eprintln!("exploration stopped at a limit; statistics are partial");
        Ok(2)
    }
}
