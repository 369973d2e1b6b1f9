//! The `cb` command line client.
//!
//! `cb` talks to a server over the `/v1` API and runs benchmark contexts on
//! the local machine. Credentials and the server address come from a flat
//! `key = value` file, `~/.causalbench/config` by default.
//!
//! Exit codes: 0 on success, 1 for mistakes the user can fix (bad input,
//! rejected requests, incompatible contexts), 2 for server and I/O trouble.
//!
//! ```no_run
//! let code = causalbench_cli::dispatch(["cb", "list", "models", "--json"]);
//! std::process::exit(code);
//! ```

mod analyze;
pub mod client;
mod commands;
pub mod config;
pub mod error;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use client::{Client, HttpSource};
pub use config::{load_config, parse_config, CliConfig, ConfigError};
pub use error::{CliError, EXIT_OK, EXIT_SERVER, EXIT_USER};

#[derive(Debug, Parser)]
#[command(name = "cb", version, about = "Benchmark causal ML components against a shared registry")]
pub struct Cli {
    /// Config file; defaults to $CB_CONFIG or ~/.causalbench/config.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Print machine-readable canonical JSON.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a config file.
    InitConfig {
        #[arg(long)]
        server_url: String,
        #[arg(long, default_value = "")]
        api_key: String,
        #[arg(long)]
        store_cache_dir: Option<PathBuf>,
        /// Replace an existing file.
        #[arg(long)]
        force: bool,
    },
    /// Pack a component directory and register it (or its next version).
    Upload {
        kind: KindArg,
        dir: PathBuf,
    },
    /// Fetch a component archive and unpack it.
    Download {
        /// `owner/slug@version`
        id: String,
        /// Directory to unpack into; `./<slug>-<version>` by default.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Save the archive file itself instead of unpacking.
        #[arg(long, value_name = "FILE", conflicts_with = "out")]
        archive: Option<PathBuf>,
    },
    /// List components or runs.
    List(ListArgs),
    /// Build or check a benchmark context.
    #[command(subcommand)]
    Context(ContextCommand),
    /// Classify components by whether they fit the ones already chosen.
    Suggest {
        /// Components already picked; repeatable.
        #[arg(long = "chosen", value_name = "ID")]
        chosen: Vec<String>,
        /// Components to classify; every visible one when omitted.
        #[arg(long = "candidate", value_name = "ID")]
        candidates: Vec<String>,
    },
    /// Execute a context on this machine.
    Run {
        #[arg(long, value_name = "FILE")]
        context: PathBuf,
        /// Upload the run once it finishes.
        #[arg(long)]
        upload: bool,
    },
    /// Upload a finished run, given its file or its id in the local cache.
    UploadRun { run: String },
    /// Make a run or component public and permanent.
    Publish {
        what: Target,
        id: String,
    },
    /// Delete a private run or component.
    Delete {
        what: Target,
        id: String,
    },
    /// Query recorded results.
    #[command(subcommand)]
    Analyze(AnalyzeCommand),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum KindArg {
    Dataset,
    Model,
    Metric,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Target {
    Run,
    Component,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Listing {
    Datasets,
    Models,
    Metrics,
    Runs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ScopeArg {
    All,
    Mine,
    Public,
}

#[derive(Debug, Args)]
pub struct ListArgs {
    pub what: Listing,
    /// Component task, e.g. `causal-discovery`.
    #[arg(long)]
    pub task: Option<String>,
    /// Substring of name, title or description.
    #[arg(long)]
    pub text: Option<String>,
    #[arg(long = "context-id")]
    pub context_id: Option<String>,
    #[arg(long = "executed-by")]
    pub executed_by: Option<String>,
    #[arg(long, value_enum)]
    pub scope: Option<ScopeArg>,
    #[arg(long)]
    pub page: Option<usize>,
    #[arg(long = "page-size")]
    pub page_size: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum ContextCommand {
    /// Write a context file.
    New {
        #[arg(long)]
        id: String,
        #[arg(long = "dataset", value_name = "ID", required = true)]
        datasets: Vec<String>,
        #[arg(long = "model", value_name = "ID", required = true)]
        models: Vec<String>,
        #[arg(long = "metric", value_name = "ID", required = true)]
        metrics: Vec<String>,
        /// `MODEL=JSON-OBJECT`, one setting per flag.
        #[arg(long = "hyper", value_name = "MODEL=JSON")]
        hyper: Vec<String>,
        /// Output file; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also store the context on the server.
        #[arg(long)]
        upload: bool,
    },
    /// Expand a context and check every scenario for compatibility.
    Validate {
        file: PathBuf,
        /// Skip the server-side compatibility check.
        #[arg(long)]
        offline: bool,
    },
}

/// Selects the rows an analysis runs on. Flags override `--request`.
#[derive(Debug, Args, Default)]
pub struct SourceArgs {
    /// JSON request body to start from.
    #[arg(long, value_name = "FILE")]
    pub request: Option<PathBuf>,
    /// Analyze the virtual run of a stored context.
    #[arg(long = "context-id")]
    pub context_id: Option<String>,
    /// Analyze the virtual run of a context file.
    #[arg(long = "context", value_name = "FILE")]
    pub context: Option<PathBuf>,
    /// Restrict to these runs; repeatable.
    #[arg(long = "run", value_name = "RUN_ID")]
    pub runs: Vec<String>,
    /// Causal graph JSON file.
    #[arg(long, value_name = "FILE")]
    pub graph: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum AnalyzeCommand {
    /// Filter, group and aggregate the run table.
    Slice {
        #[command(flatten)]
        source: SourceArgs,
        /// `col=v`, `col!=v`, `col<v`, `col<=v`, `col>v`, `col>=v`, `col:null`, `col:not-null`.
        #[arg(long = "filter")]
        filters: Vec<String>,
        #[arg(long = "group-by")]
        group_by: Vec<String>,
        /// `col:mean|median|min|max|count`
        #[arg(long = "agg")]
        aggregates: Vec<String>,
    },
    /// Adjusted effect of switching one factor between two levels.
    Impact {
        #[command(flatten)]
        source: SourceArgs,
        #[arg(long)]
        factor: Option<String>,
        #[arg(long = "level-a")]
        level_a: Option<String>,
        #[arg(long = "level-b")]
        level_b: Option<String>,
        #[arg(long)]
        outcome: Option<String>,
    },
    /// Non-dominated rows under several objectives.
    Pareto {
        #[command(flatten)]
        source: SourceArgs,
        /// `col:min` or `col:max`; repeatable.
        #[arg(long = "objective")]
        objectives: Vec<String>,
        #[arg(long = "filter")]
        filters: Vec<String>,
        #[arg(long = "id-column")]
        id_column: Option<String>,
    },
    /// Predicted outcomes for a configuration.
    Predict {
        #[command(flatten)]
        source: SourceArgs,
        /// `col=value`; repeatable.
        #[arg(long = "set")]
        set: Vec<String>,
        #[arg(long = "outcome")]
        outcomes: Vec<String>,
    },
    /// Configurations worth running next.
    Recommend {
        #[command(flatten)]
        source: SourceArgs,
        /// `col=v1,v2,...`; repeatable.
        #[arg(long = "grid")]
        grid: Vec<String>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long)]
        outcome: Option<String>,
    },
}

/// Where command output goes.
pub struct Output<'a> {
    pub out: &'a mut dyn Write,
    pub err: &'a mut dyn Write,
    pub json: bool,
}

/// Runs `cb` with the process's stdout and stderr.
pub fn dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    dispatch_to(argv, &mut stdout.lock(), &mut stderr.lock())
}

/// Runs `cb` writing to the given streams; returns the exit code.
pub fn dispatch_to<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { EXIT_USER } else { EXIT_OK };
        }
    };
    let mut output = Output { out, err, json: cli.json };
    match commands::run(cli.config, cli.command, &mut output) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(output.err, "error: {e}");
            if let CliError::Api { violations, .. } = &e {
                for v in violations {
                    let v = serde_json::to_string(v).unwrap_or_default();
                    let _ = writeln!(output.err, "  - {v}");
                }
            }
            e.exit_code()
        }
    }
}

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/cli.md")]
pub mod book_cli {}
