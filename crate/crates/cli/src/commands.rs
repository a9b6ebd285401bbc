use std::fs;
use std::io::IsTerminal;
use std::path::{Path, PathBuf};

use iw_core::retrieval::{
    annotate_hits, build_index, contextual_search, expansion_terms, query_terms, search, RetrievalError,
    Tokenizer, WorkContext,
};
use iw_core::scenario::{ScenarioError, ScenarioScript};
use iw_core::{parse_schema, validate_schema, Archive, ArchiveError, ArchiveOptions, Hit, Index, ScoringParams};
use iw_service::error::schema_error_code;
use iw_service::{AppState, ServiceConfig};
use serde::Serialize;

use crate::args::{Cli, Command, Global, IndexCmd, QueryArgs, ScenarioCmd, SchemaCmd};

/// Name of the persisted index inside an archive directory.
pub const INDEX_FILE: &str = "index.json";

#[derive(Debug)]
pub struct Failure {
    pub exit: u8,
    pub code: String,
    pub message: String,
}

impl Failure {
    fn engine(code: &str, message: impl Into<String>) -> Self {
        Self { exit: 1, code: code.into(), message: message.into() }
    }

    fn usage(message: impl Into<String>) -> Self {
        Self { exit: 2, code: "usage".into(), message: message.into() }
    }
}

impl From<ArchiveError> for Failure {
    fn from(e: ArchiveError) -> Self {
        Self::engine(e.code(), e.to_string())
    }
}

impl From<RetrievalError> for Failure {
    fn from(e: RetrievalError) -> Self {
        Self::engine(e.code(), e.to_string())
    }
}

impl From<ScenarioError> for Failure {
    fn from(e: ScenarioError) -> Self {
        let code = match &e {
            ScenarioError::Io { .. } => "io",
            ScenarioError::Parse(_) => "malformed_script",
            ScenarioError::Schema { source, .. } => schema_error_code(source),
            ScenarioError::UndefinedSymbol { .. } => "undefined_symbol",
            ScenarioError::DuplicateSymbol { .. } => "duplicate_symbol",
            ScenarioError::Step { source, .. } => source.code(),
        };
        Self::engine(code, e.to_string())
    }
}

type Outcome = Result<u8, Failure>;

struct Env {
    json: bool,
    archive: Option<PathBuf>,
    config: Option<ServiceConfig>,
}

impl Env {
    fn new(global: Global, need_config: bool) -> Result<Self, Failure> {
        let config = match (&global.config, need_config) {
            (Some(path), _) => Some(
                ServiceConfig::load(path).map_err(|e| Failure::engine("invalid_config", e.to_string()))?,
            ),
            (None, true) => return Err(Failure::usage("no config file: pass --config or set IW_CONFIG")),
            (None, false) => None,
        };
        Ok(Self { json: global.json, archive: global.archive, config })
    }

    fn archive_dir(&self) -> Result<PathBuf, Failure> {
        self.archive
            .clone()
            .or_else(|| self.config.as_ref().map(|c| c.archive_dir.clone()))
            .ok_or_else(|| Failure::usage("no archive: pass --archive or --config"))
    }

    /// Opens an archive for writing, creating the directory if needed.
    fn open_writable(&self, seed: Option<u64>) -> Result<Archive, Failure> {
        Ok(Archive::open(self.archive_dir()?, ArchiveOptions { seed })?)
    }

    /// Opens an existing archive for queries.
    fn open_existing(&self) -> Result<Archive, Failure> {
        let dir = self.archive_dir()?;
        if !dir.is_dir() {
            return Err(Failure::engine("no_archive", format!("no archive at {}", dir.display())));
        }
        Ok(Archive::open(dir, ArchiveOptions::default())?)
    }

    fn tokenizer(&self) -> Tokenizer {
        self.config.as_ref().map(|c| c.scoring.tokenizer()).unwrap_or_default()
    }

    fn params(&self) -> ScoringParams {
        self.config.as_ref().map(|c| c.scoring.params()).unwrap_or_default()
    }

    fn emit<T: Serialize>(&self, value: &T, human: impl FnOnce() -> String) {
        if self.json {
            println!("{}", serde_json::to_string_pretty(value).expect("serializable"));
        } else {
            print!("{}", human());
        }
    }
}

pub fn run(cli: Cli) -> Outcome {
    let need_config = matches!(cli.command, Command::Serve);
    let env = Env::new(cli.global, need_config)?;
    match cli.command {
        Command::Schema(SchemaCmd::Validate { file }) => schema_validate(&env, &file),
        Command::Scenario(ScenarioCmd::Replay { script, seed }) => scenario_replay(&env, &script, seed),
        Command::Index(IndexCmd::Build) => index_build(&env),
        Command::Query(q) => query(&env, q),
        Command::Context { ie, depth } => context(&env, &ie, depth),
        Command::Profile { actor } => profile(&env, &actor),
        Command::Check => check(&env),
        Command::Export => {
            print!("{}", env.open_existing()?.canonical_export());
            Ok(0)
        }
        Command::Serve => serve(env),
    }
}

fn schema_validate(env: &Env, file: &Path) -> Outcome {
    let text = fs::read_to_string(file)
        .map_err(|e| Failure::engine("io", format!("cannot read {}: {e}", file.display())))?;
    let schema = parse_schema(&text).map_err(|e| Failure::engine(schema_error_code(&e), e.to_string()))?;
    let report = validate_schema(&schema);
    env.emit(&serde_json::json!({"schema": schema.schema_ref(), "report": report}), || {
        let mut out = String::new();
        for f in report.errors.iter().chain(&report.warnings) {
            out += &format!("{f}\n");
        }
        out += &format!(
            "{}: {} errors, {} warnings\n",
            schema.schema_ref(),
            report.errors.len(),
            report.warnings.len()
        );
        out
    });
    Ok(if report.is_valid() { 0 } else { 1 })
}

fn scenario_replay(env: &Env, script: &Path, seed: Option<u64>) -> Outcome {
    let (script, base) = ScenarioScript::load(script)?;
    let mut archive = env.open_writable(seed)?;
    let bindings = script.replay(&mut archive, &base)?;
    env.emit(&bindings, || bindings.iter().map(|(k, v)| format!("{k}\t{v}\n")).collect());
    Ok(0)
}

fn index_build(env: &Env) -> Outcome {
    let archive = env.open_existing()?;
    let index: Index = build_index(&archive, env.tokenizer());
    let path = archive.dir().expect("opened from a directory").join(INDEX_FILE);
    let tmp = path.with_extension("json.tmp");
    fs::write(&tmp, index.to_canonical_json())
        .and_then(|()| fs::rename(&tmp, &path))
        .map_err(|e| Failure::engine("storage", format!("cannot write {}: {e}", path.display())))?;
    env.emit(
        &serde_json::json!({"built_at_seq": index.built_at_seq, "documents": index.n, "path": path}),
        || format!("indexed {} elements at seq {} into {}\n", index.n, index.built_at_seq, path.display()),
    );
    Ok(0)
}

/// The stored index when it is current and built with the configured
/// tokenizer; otherwise a fresh in-memory build.
fn current_index(archive: &Archive, tokenizer: Tokenizer) -> Index {
    let stored = archive
        .dir()
        .and_then(|d| fs::read_to_string(d.join(INDEX_FILE)).ok())
        .and_then(|text| Index::from_json(&text).ok())
        .filter(|i| i.built_at_seq == archive.seq() && i.tokenizer == tokenizer);
    stored.unwrap_or_else(|| build_index(archive, tokenizer))
}

/// Work context for `--activity`, optionally pinned to `--instance`.
fn resolve_context(archive: &Archive, activity: &str, instance: Option<&str>) -> Result<WorkContext, Failure> {
    let unknown = || Failure::engine("unknown_activity_category", format!("no activity category '{activity}'"));
    let (ti, category) = match instance {
        Some(id) => {
            let ti = archive.instance(id).ok_or_else(|| ArchiveError::UnknownInstance(id.to_owned()))?;
            let schema = archive.schema(&ti.schema).ok_or_else(unknown)?;
            (ti, schema.resolve_activity(activity).ok_or_else(unknown)?.id.clone())
        }
        None => archive
            .instances()
            .filter_map(|ti| {
                let a = archive.schema(&ti.schema)?.resolve_activity(activity)?;
                Some((ti, a.id.clone()))
            })
            .max_by(|(a, _), (b, _)| (a.started_at, &a.id).cmp(&(b.started_at, &b.id)))
            .ok_or_else(|| {
                Failure::engine(
                    "no_context_instance",
                    format!("no task instance has activity '{activity}'; pass --instance"),
                )
            })?,
    };
    Ok(WorkContext {
        instance: ti.id.clone(),
        activity_category: category,
        schema: ti.schema.clone(),
    })
}

#[derive(Serialize)]
struct QueryOutput {
    built_at_seq: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    context: Option<WorkContext>,
    hits: Vec<Hit>,
}

fn query(env: &Env, q: QueryArgs) -> Outcome {
    let archive = env.open_existing()?;
    let index = current_index(&archive, env.tokenizer());
    let params = env.params();
    let k = usize::try_from(q.k).unwrap_or(usize::MAX);
    let mut terms = query_terms(&index, &q.text);
    let (context, hits) = match &q.activity {
        Some(activity) => {
            let ctx = resolve_context(&archive, activity, q.instance.as_deref())?;
            let schema = ctx.resolve(&archive)?;
            let hits = contextual_search(&index, schema, &q.text, &ctx, k, q.semantic, &params)?;
            if q.semantic {
                terms.extend(expansion_terms(schema, &ctx, &index.tokenizer, &terms));
            }
            (Some(ctx), hits)
        }
        None => (None, search(&index, &q.text, k, &params)),
    };
    let hits = annotate_hits(&archive, hits, &terms, &index.tokenizer)?;
    let out = QueryOutput { built_at_seq: index.built_at_seq, context, hits };
    env.emit(&out, || {
        let mut s = String::new();
        if let Some(c) = &out.context {
            s += &format!("context: {} in {} ({})\n", c.activity_category, c.instance, c.schema);
        }
        if out.hits.is_empty() {
            s += "no matches\n";
        }
        for (rank, h) in out.hits.iter().enumerate() {
            let category = h.links.as_ref().map_or("", |l| l.category.as_str());
            let mark = if h.boosted { " boosted" } else { "" };
            s += &format!("{:>3}. {:.4}{mark}  {}  [{category}]  {}\n", rank + 1, h.score, h.ie, h.snippet);
        }
        s
    });
    Ok(0)
}

fn context(env: &Env, ie: &str, depth: u32) -> Outcome {
    let archive = env.open_existing()?;
    let ctx = archive.episodic_context(ie, depth)?;
    env.emit(&ctx, || {
        let mut s = String::new();
        for n in &ctx.nodes {
            let via: Vec<String> = n
                .via
                .iter()
                .map(|v| serde_json::to_value(v).ok().and_then(|v| v.as_str().map(str::to_owned)).unwrap_or_default())
                .collect();
            let ext = if n.external { " external" } else { "" };
            s += &format!(
                "{}  {}  {}  {}{ext}\n",
                n.hops,
                n.ie,
                n.category.as_deref().unwrap_or("?"),
                via.join(",")
            );
        }
        for e in &ctx.edges {
            s += &format!("{} -{}-> {}\n", e.from, e.kind, e.to);
        }
        s
    });
    Ok(0)
}

fn profile(env: &Env, actor: &str) -> Outcome {
    let archive = env.open_existing()?;
    let report = archive.expertise_profile(actor);
    env.emit(&report, || {
        let mut s = String::new();
        for e in &report.entries {
            s += &format!("{:>4}  {}  {} / {}\n", e.count, e.schema, e.activity_category, e.content_category);
        }
        s += &format!("{actor}: {} elements\n", report.total());
        s
    });
    Ok(0)
}

fn check(env: &Env) -> Outcome {
    let archive = env.open_existing()?;
    let report = archive.integrity_check();
    env.emit(&report, || {
        let mut s: String = report.errors.iter().chain(&report.warnings).map(|f| format!("{f}\n")).collect();
        s += &format!("seq {}: {} errors, {} warnings\n", archive.seq(), report.errors.len(), report.warnings.len());
        s
    });
    Ok(if report.is_valid() { 0 } else { 1 })
}

fn serve(env: Env) -> Outcome {
    let mut config = env.config.expect("loaded for serve");
    if let Some(dir) = env.archive {
        config.archive_dir = dir;
    }
    tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "info".into()),
        )
        .with_writer(std::io::stderr)
        .with_ansi(std::io::stderr().is_terminal())
        .init();
    let state = AppState::open(config)?;
    let runtime = tokio::runtime::Runtime::new()
        .map_err(|e| Failure::engine("storage", format!("cannot start runtime: {e}")))?;
    runtime
        .block_on(iw_service::serve(state))
        .map_err(|e| Failure::engine("storage", e.to_string()))?;
    Ok(0)
}
