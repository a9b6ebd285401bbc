use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(name = "iw", version, about = "Information warehouse operator tool")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Archive directory. Defaults to `archive_dir` from the config file.
    #[arg(long, global = true)]
    pub archive: Option<PathBuf>,
    /// Service config file (TOML).
    #[arg(long, global = true, env = "IW_CONFIG")]
    pub config: Option<PathBuf>,
    /// Machine-readable JSON on stdout.
    #[arg(long, global = true)]
    pub json: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Schema file tools.
    #[command(subcommand)]
    Schema(SchemaCmd),
    /// Scenario script tools.
    #[command(subcommand)]
    Scenario(ScenarioCmd),
    /// Retrieval index tools.
    #[command(subcommand)]
    Index(IndexCmd),
    /// Ranked search over element bodies.
    Query(QueryArgs),
    /// Episodic neighborhood of an element.
    Context {
        ie: String,
        #[arg(long, default_value_t = 1)]
        depth: u32,
    },
    /// Per-category authorship counts for an actor.
    Profile { actor: String },
    /// Audit archive invariants.
    Check,
    /// Canonical export of the archive state.
    Export,
    /// Run the HTTP API.
    Serve,
}

#[derive(Debug, Subcommand)]
pub enum SchemaCmd {
    /// Parse and validate a schema file.
    Validate { file: PathBuf },
}

#[derive(Debug, Subcommand)]
pub enum ScenarioCmd {
    /// Run a script against the archive and print symbol bindings.
    Replay {
        script: PathBuf,
        /// Deterministic id assignment and logical clock.
        #[arg(long)]
        seed: Option<u64>,
    },
}

#[derive(Debug, Subcommand)]
pub enum IndexCmd {
    /// Rebuild `index.json` in the archive directory.
    Build,
}

#[derive(Debug, Args)]
pub struct QueryArgs {
    pub text: String,
    /// Activity category (id or display name) to boost for.
    #[arg(long)]
    pub activity: Option<String>,
    /// Task instance of the work context. Defaults to the most recently
    /// started instance whose schema has the activity.
    #[arg(long, requires = "activity")]
    pub instance: Option<String>,
    /// Expand the query with concepts linked to the activity.
    #[arg(long, requires = "activity")]
    pub semantic: bool,
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    pub k: u64,
}
