//! Command-line front end covering the whole workflow from clip import to
//! loop export. All state lives in one manifest file.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::io::Write;
use std::ops::ControlFlow;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};
use minvid::config::make_root;
use minvid::eval::gaps::{triplets_from_tree, with_model_scores};
use minvid::eval::{
    average_precision, gap_report, human_model_comparison, mine_hard_negatives, CountFile, GapReport,
    HardNegativeRule, RateSource, RateTriplet,
};
use minvid::eval::ScoredExample;
use minvid::io::gif::export_loop;
use minvid::io::ingest::{import_clip, Roi};
use minvid::io::manifest::{default_path, Manifest, STATE_ENV};
use minvid::io::write_atomic;
use minvid::oracle::human::HumanOracle;
use minvid::oracle::synthetic::SyntheticOracle;
use minvid::oracle::wire::{WireConfig, WireOracle};
use minvid::oracle::AnswerKey;
use minvid::search::{resume_with, run_search_with, NodeStatus, SearchError, Traversal, DEFAULT_BUDGET};
use minvid::study::client::RemoteStudy;
use minvid::study::http::spawn;
use minvid::study::{component_summary, ComponentCountFile, StudyService, SystemClock};
use minvid::{minimal_set, ConfigKey, OracleHandle, SearchParams, SearchTree};

#[derive(Parser)]
#[command(name = "minvid", version, about = "Search for minimal recognizable video configurations")]
struct Cli {
    /// Manifest file; defaults to $MINVID_STATE.
    #[arg(long, global = true)]
    state: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Import numbered PNG frames as a clip.
    Ingest(IngestArgs),
    /// Run or resume the reduction search on a clip.
    Search(SearchArgs),
    /// Serve the human study over HTTP.
    Serve(ServeArgs),
    /// Evaluation reports.
    #[command(subcommand)]
    Eval(EvalCommand),
    /// Write a configuration as a looping GIF.
    Export(ExportArgs),
    /// Summarize the manifest.
    List,
}

#[derive(Args)]
struct IngestArgs {
    /// Directory of frames named with a trailing number, e.g. frame_0007.png.
    dir: PathBuf,
    /// Square region of interest as `x,y,side`.
    #[arg(long)]
    roi: Roi,
    /// Frame numbers to keep, in order.
    #[arg(long, value_delimiter = ',', required = true)]
    frames: Vec<u32>,
    #[arg(long)]
    category: String,
    /// Answer key file (`object: ...`, `action: ...`, `override: text = bool`).
    #[arg(long)]
    answers: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum TraversalArg {
    Bfs,
    Dfs,
}

#[derive(Args)]
struct SearchArgs {
    /// Clip id from `ingest`.
    #[arg(long)]
    clip: String,
    /// Start from this configuration id instead of the full clip.
    #[arg(long)]
    root: Option<String>,
    /// `synthetic:threshold:SIDE:FRAMES`, `synthetic:hashed:SEED`,
    /// `synthetic:constant:RATE`, `wire:URL`, `wire:FILE.toml`, or `human:URL`.
    #[arg(long)]
    oracle: String,
    /// Admin token for `human:` oracles; defaults to $MINVID_ADMIN_TOKEN.
    #[arg(long)]
    token: Option<String>,
    #[arg(long, default_value_t = minvid::oracle::DEFAULT_SUBJECTS)]
    subjects: u32,
    /// Distinct configurations the oracle may be asked about. Raising it
    /// on a stored search lets the search continue.
    #[arg(long)]
    budget: Option<usize>,
    #[arg(long, value_enum, default_value = "bfs")]
    traversal: TraversalArg,
    #[arg(long)]
    max_depth: Option<u32>,
    #[arg(long, default_value_t = 4)]
    min_side: u32,
    /// Discard any stored search for the clip and start over.
    #[arg(long)]
    fresh: bool,
    /// Poll a pending human search every this many milliseconds until done.
    #[arg(long)]
    wait_ms: Option<u64>,
    /// Write the oracle audit log here as JSON lines.
    #[arg(long)]
    audit: Option<PathBuf>,
}

#[derive(Args)]
struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
    #[arg(long, default_value_t = 8750)]
    port: u16,
    /// Admin token for `POST /jobs`; defaults to $MINVID_ADMIN_TOKEN.
    #[arg(long)]
    token: Option<String>,
    #[arg(long, default_value_t = minvid::study::DEFAULT_DEADLINE_MS)]
    deadline_ms: u64,
}

#[derive(Subcommand)]
enum EvalCommand {
    /// Recognition gaps from stored searches or a count file.
    Gaps {
        /// Count file (`{"n_subjects", "triplets": [{"id", "minimal", ...}]}`).
        #[arg(long)]
        counts: Option<PathBuf>,
        /// JSON object of config id to model score; reports model gaps.
        #[arg(long)]
        scores: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Average precision of scored examples.
    Ap {
        /// JSON array of scored examples; defaults to the manifest's.
        #[arg(long)]
        scored: Option<PathBuf>,
    },
    /// Negatives scoring at or above a cutoff.
    Hardneg {
        #[arg(long)]
        scored: Option<PathBuf>,
        #[arg(long, conflicts_with = "quantile", required_unless_present = "quantile")]
        cutoff: Option<f64>,
        /// Quantile of the positive scores to use as the cutoff.
        #[arg(long)]
        quantile: Option<f64>,
    },
    /// Human against model gaps, triplet by triplet.
    Compare {
        #[arg(long)]
        human: PathBuf,
        #[arg(long)]
        model: PathBuf,
    },
    /// Component recognition summary from a count file.
    Components {
        #[arg(long)]
        counts: PathBuf,
    },
}

#[derive(Args)]
struct ExportArgs {
    /// Configuration id.
    #[arg(long)]
    config: String,
    #[arg(long)]
    gif: PathBuf,
}

/// Exit status and message of a failed command.
struct Failure {
    code: u8,
    message: String,
}

impl<E: Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure {
            code: 1,
            message: e.to_string(),
        }
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("minvid: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> Outcome {
    let state = cli.state.as_deref();
    match cli.command {
        Command::Ingest(a) => ingest(&state_path(state)?, a),
        Command::Search(a) => search(&existing_state(state)?, a),
        Command::Serve(a) => serve(&existing_state(state)?, a),
        Command::Eval(e) => eval(state, e),
        Command::Export(a) => export(&existing_state(state)?, a),
        Command::List => list(&existing_state(state)?),
    }
}

fn state_path(explicit: Option<&Path>) -> Result<PathBuf, Failure> {
    default_path(explicit).ok_or_else(|| Failure {
        code: 2,
        message: format!("no manifest given; pass --state or set {STATE_ENV}"),
    })
}

fn existing_state(explicit: Option<&Path>) -> Result<PathBuf, Failure> {
    let path = state_path(explicit)?;
    if !path.exists() {
        return Err(Failure {
            code: 2,
            message: format!("manifest {} does not exist", path.display()),
        });
    }
    Ok(path)
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?)
}

fn print_json<T: serde::Serialize>(value: &T) -> Outcome {
    println!("{}", serde_json::to_string_pretty(value)?);
    Ok(())
}

fn admin_token(explicit: Option<String>) -> Result<String, Failure> {
    explicit
        .or_else(|| std::env::var("MINVID_ADMIN_TOKEN").ok())
        .ok_or_else(|| "an admin token is required (--token or MINVID_ADMIN_TOKEN)".into())
}

fn ingest(path: &Path, a: IngestArgs) -> Outcome {
    let mut manifest = if path.exists() { Manifest::load(path)? } else { Manifest::new() };
    let text = std::fs::read_to_string(&a.answers).map_err(|e| format!("{}: {e}", a.answers.display()))?;
    let key = AnswerKey::parse(&a.category, &text)?;
    let clip = import_clip(&a.dir, a.roi, &a.frames, &a.category, &a.category)?;
    manifest.add_clip(path, &clip, key)?;
    manifest.register_config(&make_root(&clip)?);
    manifest.save(path)?;
    println!("{}", clip.clip_id());
    Ok(())
}

fn build_oracle(spec: &str, token: Option<String>) -> Result<OracleHandle, Failure> {
    let bad = || Failure::from(format!("unrecognized oracle {spec:?}"));
    let (kind, rest) = spec.split_once(':').ok_or_else(bad)?;
    match kind {
        "synthetic" => {
            let parts: Vec<&str> = rest.split(':').collect();
            let oracle = match parts.as_slice() {
                ["threshold", side, frames] => SyntheticOracle::threshold(side.parse()?, frames.parse()?, 1.0, 0.0),
                ["hashed", seed] => SyntheticOracle::hashed(seed.parse()?),
                ["constant", rate] => SyntheticOracle::constant(rate.parse()?),
                _ => return Err(bad()),
            };
            Ok(OracleHandle::new(oracle))
        }
        "wire" if rest.ends_with(".toml") => Ok(OracleHandle::new(WireOracle::new(WireConfig::load(Path::new(rest))?))),
        "wire" => Ok(OracleHandle::new(WireOracle::new(WireConfig::new(rest)))),
        "human" => Ok(OracleHandle::new(HumanOracle::new(RemoteStudy::new(rest, admin_token(token)?)))),
        _ => Err(bad()),
    }
}

/// Stores the tree and every record it holds.
fn persist(manifest: &mut Manifest, path: &Path, tree: &SearchTree) -> Result<(), Failure> {
    for node in tree.nodes() {
        if let Some(r) = &node.record {
            manifest.put_record(r.clone());
        }
    }
    manifest.put_tree(tree.clone());
    Ok(manifest.save(path)?)
}

fn search(path: &Path, a: SearchArgs) -> Outcome {
    let mut manifest = Manifest::load(path)?;
    let clip = manifest.load_clip(path, &a.clip)?;
    let oracle = build_oracle(&a.oracle, a.token.clone())?;
    let mut tree = if a.fresh { None } else { manifest.tree(&a.clip).cloned() };
    if let (Some(t), Some(b)) = (tree.as_mut(), a.budget) {
        t.set_budget(b);
    }
    let root = match &a.root {
        Some(id) => manifest.find_config(id).ok_or_else(|| format!("unknown configuration {id}"))?,
        None => make_root(&clip)?,
    };
    let params = SearchParams {
        n_subjects: a.subjects,
        min_side: a.min_side,
        max_depth: a.max_depth,
        oracle_budget: a.budget.unwrap_or(DEFAULT_BUDGET),
        traversal: match a.traversal {
            TraversalArg::Bfs => Traversal::Bfs,
            TraversalArg::Dfs => Traversal::Dfs,
        },
    };
    loop {
        let mut save_error = None;
        let mut checkpoint = |t: &SearchTree| match persist(&mut manifest, path, t) {
            Ok(()) => ControlFlow::Continue(()),
            Err(e) => {
                save_error = Some(e);
                ControlFlow::Break(())
            }
        };
        let result = match tree.take() {
            Some(t) => resume_with(t, &clip, &oracle, &mut checkpoint),
            None => run_search_with(root.clone(), &clip, &oracle, params.clone(), &mut checkpoint),
        };
        if let Some(e) = save_error {
            return Err(e);
        }
        let done = match result {
            Ok(t) => t,
            Err(e) => {
                let message = e.to_string();
                let hint = matches!(e, SearchError::BudgetExhausted { .. });
                if let Some(t) = e.into_tree() {
                    persist(&mut manifest, path, &t)?;
                    write_audit(a.audit.as_deref(), &t)?;
                }
                let suffix = if hint { "; rerun with a larger --budget to continue" } else { "" };
                return Err(format!("{message}{suffix}").into());
            }
        };
        persist(&mut manifest, path, &done)?;
        write_audit(a.audit.as_deref(), &done)?;
        if done.is_complete() {
            for config in minimal_set(&done) {
                manifest.register_config(&config);
            }
            manifest.save(path)?;
            report(&done);
            return Ok(());
        }
        let waiting = done.awaiting().count();
        match a.wait_ms {
            Some(ms) => {
                eprintln!("waiting on {waiting} configurations");
                std::thread::sleep(Duration::from_millis(ms));
                tree = Some(done);
            }
            None => {
                println!("pending: {waiting} configurations awaiting responses; rerun to continue");
                return Ok(());
            }
        }
    }
}

fn report(tree: &SearchTree) {
    println!(
        "complete: {} nodes, {} oracle queries, {} minimal",
        tree.node_count(),
        tree.queried_count(),
        tree.count(NodeStatus::Minimal)
    );
    for config in minimal_set(tree) {
        let key = config.key();
        println!("minimal {} {key}", key.id());
    }
}

fn write_audit(path: Option<&Path>, tree: &SearchTree) -> Outcome {
    let Some(path) = path else { return Ok(()) };
    let mut out = Vec::new();
    for entry in tree.audit() {
        serde_json::to_writer(&mut out, entry)?;
        out.push(b'\n');
    }
    Ok(write_atomic(path, &out)?)
}

fn serve(path: &Path, a: ServeArgs) -> Outcome {
    let mut manifest = Manifest::load(path)?;
    let token = admin_token(a.token)?;
    let service = Arc::new(StudyService::new(Arc::new(SystemClock)).with_deadline_ms(a.deadline_ms));
    for entry in manifest.clips.clone() {
        let clip = manifest.load_clip(path, &entry.clip_id)?;
        let key = manifest
            .answer_keys
            .get(&entry.answer_key_id)
            .cloned()
            .ok_or_else(|| format!("clip {} has no answer key", entry.clip_id))?;
        service.add_clip(clip, key);
    }
    let records = service.subscribe();
    let addr = format!("{}:{}", a.host, a.port).parse().map_err(|e| format!("address: {e}"))?;
    let handle = spawn(service, &token, addr)?;
    println!("serving {} clips at {}", manifest.clips.len(), handle.url());
    std::io::stdout().flush()?;
    for record in records {
        eprintln!("record {} {}/{}", record.config_key.id(), record.n_correct(), record.n_subjects());
        manifest.put_record(record);
        manifest.save(path)?;
    }
    drop(handle);
    Ok(())
}

fn stored_triplets(state: Option<&Path>) -> Result<Vec<RateTriplet>, Failure> {
    let manifest = Manifest::load(&existing_state(state)?)?;
    let mut out = Vec::new();
    for tree in &manifest.trees {
        out.extend(triplets_from_tree(tree)?);
    }
    out.extend(manifest.triplets.iter().cloned());
    if out.is_empty() {
        return Err("the manifest has no minimal configurations to evaluate".into());
    }
    Ok(out)
}

fn scored_examples(state: Option<&Path>, file: Option<PathBuf>) -> Result<Vec<ScoredExample>, Failure> {
    match file {
        Some(f) => read_json(&f),
        None => Ok(Manifest::load(&existing_state(state)?)?.scored),
    }
}

fn eval(state: Option<&Path>, command: EvalCommand) -> Outcome {
    match command {
        EvalCommand::Gaps { counts, scores, out } => {
            let triplets = match counts {
                Some(f) => CountFile::from_json(&std::fs::read_to_string(&f)?)?.to_triplets()?,
                None => stored_triplets(state)?,
            };
            let (triplets, source) = match scores {
                Some(f) => {
                    let by_id: BTreeMap<String, f64> = read_json(&f)?;
                    let keys: Vec<&ConfigKey> = triplets
                        .iter()
                        .flat_map(|t| [&t.minimal.key, &t.spatial.key, &t.temporal.key])
                        .collect();
                    let scores: BTreeMap<ConfigKey, f64> = keys
                        .into_iter()
                        .filter_map(|k| by_id.get(&k.id()).map(|s| (k.clone(), *s)))
                        .collect();
                    (with_model_scores(&triplets, &scores)?, RateSource::Model)
                }
                None => (triplets, RateSource::Human),
            };
            let report = gap_report(&triplets, source)?;
            print!("{}", report.summary_table());
            if let Some(out) = out {
                let mut text = serde_json::to_string_pretty(&report)?;
                text.push('\n');
                write_atomic(&out, text.as_bytes())?;
            }
            Ok(())
        }
        EvalCommand::Ap { scored } => {
            let examples = scored_examples(state, scored)?;
            println!("{:.6}", average_precision(&examples)?);
            Ok(())
        }
        EvalCommand::Hardneg {
            scored,
            cutoff,
            quantile,
        } => {
            let examples = scored_examples(state, scored)?;
            let rule = match (cutoff, quantile) {
                (Some(c), _) => HardNegativeRule::FixedCutoff(c),
                (None, Some(q)) => HardNegativeRule::PositiveQuantile(q),
                (None, None) => return Err("give --cutoff or --quantile".into()),
            };
            print_json(&mine_hard_negatives(&examples, rule)?)
        }
        EvalCommand::Compare { human, model } => {
            let human: GapReport = read_json(&human)?;
            let model: GapReport = read_json(&model)?;
            print_json(&human_model_comparison(&human, &model)?)
        }
        EvalCommand::Components { counts } => {
            let file = ComponentCountFile::from_json(&std::fs::read_to_string(&counts)?)?;
            let results = file.results()?;
            let summary = component_summary(&results).ok_or("no components")?;
            let recognized = results.iter().filter(|r| r.recognized).count();
            println!("components: {} ({recognized} recognized)", results.len());
            println!("rate: {}", summary.display());
            Ok(())
        }
    }
}

fn export(path: &Path, a: ExportArgs) -> Outcome {
    let manifest = Manifest::load(path)?;
    let config = manifest
        .find_config(&a.config)
        .ok_or_else(|| format!("unknown configuration {}", a.config))?;
    let clip = manifest.load_clip(path, &config.clip_id)?;
    export_loop(&config, &clip, &a.gif)?;
    println!("{}", a.gif.display());
    Ok(())
}

fn list(path: &Path) -> Outcome {
    let manifest = Manifest::load(path)?;
    for clip in &manifest.clips {
        println!(
            "clip {} {} side={} frames={}",
            clip.clip_id,
            clip.action_category,
            clip.side,
            clip.frames.len()
        );
        if let Some(tree) = manifest.tree(&clip.clip_id) {
            let state = if tree.is_complete() { "complete" } else { "in progress" };
            println!(
                "  search {state}: {} nodes, {} queried, {} minimal",
                tree.node_count(),
                tree.queried_count(),
                tree.count(NodeStatus::Minimal)
            );
            for config in minimal_set(tree) {
                println!("  minimal {}", config.key().id());
            }
        }
    }
    println!("records: {}", manifest.records.len());
    Ok(())
}
