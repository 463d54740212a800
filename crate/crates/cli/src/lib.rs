//! The `modelsets` command-line tool.
//!
//! Each pipeline command reads an optional JSON configuration and an optional
//! prior artifact, and writes a [`RunArtifact`] carrying the prior stages
//! forward plus its own. A typical run:
//!
//! ```text
//! modelsets dgp     --config dgp.json              --out 1-dgp.json
//! modelsets reduce  --config reduce.json  --artifact 1-dgp.json    --out 2-reduce.json
//! modelsets explore --config explore.json --artifact 2-reduce.json --out 3-explore.json --interactive
//! modelsets select  --config select.json  --artifact 3-explore.json --out 4-select.json
//! modelsets report  --artifact 4-select.json --out-dir tables/
//! ```

pub mod config;
pub mod error;
pub mod server;

use std::fs::{self, File};
use std::io::{self, BufWriter};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use modelsets::dgp::{dgp, DgpConfig, ResponseKind};
use modelsets::exploratory::{exploratory_phase, DecisionSource, KeepAll, ScriptedAnswer, ScriptedSource, TerminalSource};
use modelsets::harness::run_study;
use modelsets::io::{load_csv_dataset, save_csv_dataset, DgpSummary, IoError, ResponseSpec, RunArtifact};
use modelsets::reduction::{reduction_phase, ReductionError};
use modelsets::select::{
    model_selection_phase, substitution_table, variable_frequencies, write_confidence_set_csv, write_frequencies_csv,
    write_substitution_csv,
};
use modelsets::session::SessionState;
use modelsets::{Dataset, Family, ModelSpec, Term};
use serde::Deserialize;
use serde_json::Value;

use crate::config::{load_pipeline, load_plain, load_study, read_json, PipelineConfig};
pub use crate::error::{CliError, ErrorKind};
use crate::server::SessionServer;

pub const TOKEN_ENV: &str = "MODELSETS_SESSION_TOKEN";

#[derive(Debug, Parser)]
#[command(name = "modelsets", version, about = "Confidence sets of regression models")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic dataset.
    Dgp(DgpArgs),
    /// Run the hypercube reduction phase.
    Reduce(StageArgs),
    /// Scan for squared and interaction terms and decide which to keep.
    Explore(ExploreArgs),
    /// Build the confidence set of models.
    Select(StageArgs),
    /// Run a Monte Carlo study.
    Simulate(SimulateArgs),
    /// Render an artifact's confidence set, tables and study summary.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// JSON configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Where to write the run artifact.
    #[arg(long)]
    pub out: PathBuf,
    /// Root seed; overrides the configuration's.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct DgpArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Where to write the generated CSV; defaults to the artifact path with
    /// a `.csv` extension.
    #[arg(long)]
    pub data: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct StageArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Artifact of an earlier command to build on.
    #[arg(long)]
    pub artifact: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[group(id = "mode", multiple = false)]
pub struct ExploreMode {
    /// Serve the review session on loopback and wait for finalize.
    #[arg(long)]
    pub interactive: bool,
    /// Replay recorded answers from a JSON file.
    #[arg(long, value_name = "ANSWERS")]
    pub script: Option<PathBuf>,
    /// Keep every candidate without asking.
    #[arg(long)]
    pub silent: bool,
}

#[derive(Debug, Args)]
pub struct ExploreArgs {
    #[command(flatten)]
    pub stage: StageArgs,
    #[command(flatten)]
    pub mode: ExploreMode,
    /// Session server port on 127.0.0.1; 0 picks a free one.
    #[arg(long, default_value_t = 0)]
    pub port: u16,
    /// Session token; generated when absent.
    #[arg(long, env = TOKEN_ENV, hide_env_values = true)]
    pub token: Option<String>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Also write the per-group summary as CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Artifact to render.
    #[arg(long)]
    pub artifact: PathBuf,
    /// Directory for the CSV tables.
    #[arg(long, default_value = ".")]
    pub out_dir: PathBuf,
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Dgp(a) => cmd_dgp(&a),
        Command::Reduce(a) => cmd_reduce(&a),
        Command::Explore(a) => cmd_explore(&a),
        Command::Select(a) => cmd_select(&a),
        Command::Simulate(a) => cmd_simulate(&a),
        Command::Report(a) => cmd_report(&a),
    }
}

fn random_hex() -> String {
    format!("{:032x}", rand::random::<u128>())
}

/// Flag, then configuration, then a fresh draw (which the artifact records).
fn resolve_seed(flag: Option<u64>, configured: Option<u64>) -> u64 {
    flag.or(configured).unwrap_or_else(|| {
        let s = rand::random();
        log::info!("no seed given; drew {s}");
        s
    })
}

fn has_key(raw: &Value, key: &str) -> bool {
    raw.get(key).is_some()
}

fn load_prior(stage: &'static str, path: Option<&Path>) -> Result<Option<RunArtifact>, CliError> {
    let Some(p) = path else { return Ok(None) };
    RunArtifact::load(p).map(Some).map_err(|e| match e {
        IoError::Io(e) => CliError::io(stage, format!("{}: {e}", p.display())),
        e => CliError::data(stage, format!("artifact {}: {e}", p.display())),
    })
}

fn save(stage: &'static str, artifact: &RunArtifact, out: &Path) -> Result<(), CliError> {
    artifact.save(out).map_err(|e| CliError::io(stage, format!("{}: {e}", out.display())))
}

fn start_artifact(command: &str, seed: Option<u64>, raw: Value, prior: Option<&RunArtifact>) -> RunArtifact {
    let mut a = RunArtifact::new(command, seed, raw);
    if let Some(p) = prior {
        a.stages = p.stages.clone();
    }
    a
}

/// The configured dataset, or the CSV a prior `dgp` run wrote, cut to the
/// configured rows.
fn resolve_dataset(stage: &'static str, cfg: &PipelineConfig, prior: Option<&RunArtifact>) -> Result<Dataset, CliError> {
    let (path, spec) = if let Some(src) = &cfg.data {
        (src.path.clone(), src.response.clone())
    } else if let Some(d) = prior.and_then(|a| a.stages.dgp.as_ref()) {
        let path = d.data_path.clone().ok_or_else(|| CliError::data(stage, "prior dgp artifact records no data file"))?;
        let spec = match d.config.response_kind {
            ResponseKind::Gaussian => ResponseSpec::Gaussian { column: "y".into() },
            ResponseKind::Survival => ResponseSpec::Survival { time: "time".into(), status: "status".into() },
        };
        (PathBuf::from(path), spec)
    } else {
        return Err(CliError::config(stage, "no dataset: set `data` in the config or pass a dgp artifact"));
    };
    let ds = load_csv_dataset(&path, &spec).map_err(|e| {
        let mut err = CliError::dataset(stage, e);
        err.message = format!("{}: {}", path.display(), err.message);
        err
    })?;
    log::info!("{}: {} rows, {} variables", path.display(), ds.n(), ds.d());
    match cfg.rows {
        None => Ok(ds),
        Some([start, end]) if start < end && end <= ds.n() => Ok(ds.rows(start..end)),
        Some([start, end]) => {
            Err(CliError::config(stage, format!("rows [{start}, {end}) do not fit a dataset of {} rows", ds.n())))
        }
    }
}

fn resolve_family(cfg: &PipelineConfig, prior: Option<&RunArtifact>, ds: &Dataset) -> Family {
    cfg.family
        .or_else(|| prior.and_then(|a| a.stages.reduction.as_ref()).map(|t| t.family))
        .unwrap_or_else(|| ds.response.default_family())
}

fn cmd_dgp(args: &DgpArgs) -> Result<(), CliError> {
    const STAGE: &str = "dgp";
    let loaded = load_plain::<DgpConfig>(STAGE, args.common.config.as_deref())?;
    let mut config = loaded.config;
    config.seed = resolve_seed(args.common.seed, has_key(&loaded.raw, "seed").then_some(config.seed));
    let data = dgp(&config).map_err(CliError::dgp)?;
    let dataset = data.to_dataset();
    let csv = args.data.clone().unwrap_or_else(|| args.common.out.with_extension("csv"));
    save_csv_dataset(&dataset, &csv).map_err(|e| CliError::io(STAGE, format!("{}: {e}", csv.display())))?;
    let csv = fs::canonicalize(&csv).unwrap_or(csv);

    let mut artifact = RunArtifact::new(STAGE, Some(config.seed), loaded.raw);
    artifact.stages.variable_names = dataset.names.clone();
    artifact.stages.dgp = Some(DgpSummary {
        config: config.clone(),
        true_idx: data.true_idx.clone(),
        companion_idx: data.companion_idx.clone(),
        data_path: Some(csv.display().to_string()),
    });
    save(STAGE, &artifact, &args.common.out)?;
    println!("generated {} rows x {} variables (seed {}) -> {}", dataset.n(), dataset.d(), config.seed, csv.display());
    println!("signal variables: {}", labels(&data.true_idx, &dataset.names));
    Ok(())
}

fn labels(ids: &[usize], names: &[String]) -> String {
    ids.iter().map(|&v| names[v].as_str()).collect::<Vec<_>>().join(" ")
}

fn cmd_reduce(args: &StageArgs) -> Result<(), CliError> {
    const STAGE: &str = "reduce";
    let loaded = load_pipeline(STAGE, args.common.config.as_deref())?;
    let cfg = &loaded.config;
    let prior = load_prior(STAGE, args.artifact.as_deref())?;
    let ds = resolve_dataset(STAGE, cfg, prior.as_ref())?;
    let seed = resolve_seed(args.common.seed, cfg.seed);
    let rc = cfg.reduction.to_config(ds.d(), cfg.family, seed)?;

    let mut artifact = start_artifact(STAGE, Some(seed), loaded.raw.clone(), prior.as_ref());
    artifact.stages.variable_names = ds.names.clone();
    artifact.stages.exploratory = None;
    artifact.stages.confidence_set = None;
    match reduction_phase(&ds, &rc) {
        Ok(trace) => {
            for (t, s) in trace.stages.iter().enumerate() {
                println!("stage {} (dim {}): {} -> {} variables", t + 1, s.dim, s.n_candidates, s.retained.len());
            }
            println!("retained: {}", labels(trace.retained(), &ds.names));
            artifact.stages.reduction = Some(trace);
            save(STAGE, &artifact, &args.common.out)
        }
        Err(ReductionError::EmptyRetention { stage, trace }) => {
            // Keep the partial trace for inspection.
            artifact.stages.reduction = Some(*trace.clone());
            save(STAGE, &artifact, &args.common.out)?;
            Err(CliError::reduction(ReductionError::EmptyRetention { stage, trace }))
        }
        Err(e) => Err(CliError::reduction(e)),
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct AnswerEntry {
    #[serde(default)]
    term: Option<Term>,
    #[serde(default)]
    label: Option<String>,
    keep: bool,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum AnswersFile {
    List(Vec<AnswerEntry>),
    Full {
        answers: Vec<AnswerEntry>,
        #[serde(default)]
        default: Option<bool>,
    },
}

/// Recorded answers: a list of `{"term": {...}, "keep": b}` or
/// `{"label": "x3:x7", "keep": b}` entries, optionally wrapped as
/// `{"answers": [...], "default": b}`.
pub fn load_answers(path: &Path, names: &[String]) -> Result<ScriptedSource, CliError> {
    const STAGE: &str = "explore";
    let raw = read_json(STAGE, Some(path))?;
    let file: AnswersFile =
        serde_json::from_value(raw).map_err(|e| CliError::data(STAGE, format!("answers {}: {e}", path.display())))?;
    let (entries, default) = match file {
        AnswersFile::List(v) => (v, None),
        AnswersFile::Full { answers, default } => (answers, default),
    };
    let answers = entries
        .into_iter()
        .map(|e| {
            let term = match (e.term, e.label) {
                (Some(t), None) => Ok(t),
                (None, Some(l)) => {
                    Term::parse_label(&l, names).ok_or_else(|| CliError::data(STAGE, format!("unknown term `{l}`")))
                }
                _ => Err(CliError::data(STAGE, "each answer needs exactly one of `term` and `label`")),
            }?;
            Ok(ScriptedAnswer { term, keep: e.keep })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let source = ScriptedSource::new(answers);
    Ok(match default {
        Some(k) => source.with_default(k),
        None => source,
    })
}

fn cmd_explore(args: &ExploreArgs) -> Result<(), CliError> {
    const STAGE: &str = "explore";
    let common = &args.stage.common;
    let loaded = load_pipeline(STAGE, common.config.as_deref())?;
    let cfg = &loaded.config;
    let prior = load_prior(STAGE, args.stage.artifact.as_deref())?;
    let ds = resolve_dataset(STAGE, cfg, prior.as_ref())?;
    let family = resolve_family(cfg, prior.as_ref(), &ds);
    let retained = match (&cfg.retained, prior.as_ref().and_then(|a| a.stages.reduction.as_ref())) {
        (Some(r), _) => r.clone(),
        (None, Some(trace)) => trace.retained().to_vec(),
        (None, None) => {
            return Err(CliError::config(STAGE, "no retained variables: set `retained` or pass a reduce artifact"))
        }
    };
    let signif = cfg.exploratory.signif;

    let outcome = if args.mode.interactive {
        let token = args.token.clone().unwrap_or_else(random_hex);
        let session =
            SessionState::open(random_hex(), token.clone(), &ds, &retained, family, signif).map_err(CliError::exploratory)?;
        let server = SessionServer::bind(args.port)?;
        eprintln!(
            "serving {} candidate(s) at http://{} with token {token}; POST /finalize to finish",
            session.candidates.len(),
            server.addr()
        );
        server.serve(session)?
    } else {
        let mut source: Box<dyn DecisionSource> = if let Some(path) = &args.mode.script {
            Box::new(load_answers(path, &ds.names)?)
        } else if args.mode.silent {
            Box::new(KeepAll)
        } else {
            Box::new(TerminalSource::new(io::stdin().lock(), io::stderr()))
        };
        exploratory_phase(&ds, &retained, family, signif, source.as_mut()).map_err(CliError::exploratory)?
    };

    let comprehensive = outcome.comprehensive();
    println!(
        "{} candidate(s), {} kept; comprehensive model has {} terms: {}",
        outcome.candidates.len(),
        outcome.kept_terms().len(),
        comprehensive.size(),
        comprehensive.labels(&ds.names).join(" ")
    );
    let mut artifact = start_artifact(STAGE, None, loaded.raw.clone(), prior.as_ref());
    artifact.stages.variable_names = ds.names.clone();
    artifact.stages.exploratory = Some(outcome);
    artifact.stages.confidence_set = None;
    save(STAGE, &artifact, &common.out)
}

fn cmd_select(args: &StageArgs) -> Result<(), CliError> {
    const STAGE: &str = "select";
    let loaded = load_pipeline(STAGE, args.common.config.as_deref())?;
    let cfg = &loaded.config;
    let prior = load_prior(STAGE, args.artifact.as_deref())?;
    let ds = resolve_dataset(STAGE, cfg, prior.as_ref())?;
    let family = resolve_family(cfg, prior.as_ref(), &ds);
    let stages = prior.as_ref().map(|a| &a.stages);
    let comprehensive = if let Some(terms) = &cfg.comprehensive {
        ModelSpec::from_terms(terms)
    } else if let Some(e) = stages.and_then(|s| s.exploratory.as_ref()) {
        e.comprehensive()
    } else if let Some(t) = stages.and_then(|s| s.reduction.as_ref()) {
        ModelSpec::from_mains(t.retained().iter().copied())
    } else {
        return Err(CliError::config(STAGE, "no comprehensive model: set `comprehensive` or pass an earlier artifact"));
    };
    let cs = model_selection_phase(&ds, &comprehensive, family, cfg.selection.signif, cfg.selection.model_size)
        .map_err(CliError::select)?;
    println!(
        "tested {} models on {} rows: {} kept, {} rejected, {} unfittable",
        cs.counts.tested,
        cs.n_test,
        cs.counts.kept,
        cs.counts.rejected,
        cs.counts.unfittable.values().sum::<usize>()
    );
    for (size, models) in &cs.by_size {
        println!("  size {size}: {} model(s)", models.len());
    }
    let mut artifact = start_artifact(STAGE, None, loaded.raw.clone(), prior.as_ref());
    artifact.stages.variable_names = ds.names.clone();
    artifact.stages.confidence_set = Some(cs);
    save(STAGE, &artifact, &args.common.out)
}

fn cmd_simulate(args: &SimulateArgs) -> Result<(), CliError> {
    const STAGE: &str = "simulate";
    let loaded = load_study(args.common.config.as_deref())?;
    let mut config = loaded.config;
    config.seed = resolve_seed(args.common.seed, has_key(&loaded.raw, "seed").then_some(config.seed));
    let report = run_study(&config).map_err(CliError::study)?;
    print!("{}", report.render_table());
    println!("{} replication(s) in {:.1}s", config.replications, report.elapsed_seconds);
    if let Some(path) = &args.csv {
        let f = File::create(path).map_err(|e| CliError::io(STAGE, format!("{}: {e}", path.display())))?;
        report.write_csv(BufWriter::new(f)).map_err(|e| CliError::io(STAGE, e))?;
    }
    let mut artifact = RunArtifact::new(STAGE, Some(config.seed), loaded.raw);
    artifact.stages.study = Some(report);
    save(STAGE, &artifact, &args.common.out)
}

fn cmd_report(args: &ReportArgs) -> Result<(), CliError> {
    const STAGE: &str = "report";
    let artifact = load_prior(STAGE, Some(&args.artifact))?.expect("path given");
    let stages = &artifact.stages;
    fs::create_dir_all(&args.out_dir).map_err(|e| CliError::io(STAGE, format!("{}: {e}", args.out_dir.display())))?;
    let create = |name: &str| -> Result<BufWriter<File>, CliError> {
        let p = args.out_dir.join(name);
        File::create(&p).map(BufWriter::new).map_err(|e| CliError::io(STAGE, format!("{}: {e}", p.display())))
    };
    let io_err = |e: std::io::Error| CliError::io(STAGE, e);
    let mut wrote = Vec::new();

    if let Some(trace) = &stages.reduction {
        let names = names_for(&stages.variable_names, trace.stages.iter().flat_map(|s| s.tallies.keys().copied()));
        println!("reduction retained {} variable(s): {}", trace.retained().len(), labels(trace.retained(), &names));
    }
    if let Some(cs) = &stages.confidence_set {
        let names = names_for(&stages.variable_names, cs.comprehensive.terms().iter().flat_map(Term::vars));
        write_confidence_set_csv(cs, &names, create("confidence_set.csv")?).map_err(|e| io_err(e.into()))?;
        let freqs = variable_frequencies(cs);
        write_frequencies_csv(&freqs, &names, create("frequencies.csv")?).map_err(|e| io_err(e.into()))?;
        write_substitution_csv(&substitution_table(cs), &names, create("substitution.csv")?).map_err(|e| io_err(e.into()))?;
        wrote.extend(["confidence_set.csv", "frequencies.csv", "substitution.csv"]);
        println!("confidence set: {} model(s) at signif {}", cs.len(), cs.signif);
        for f in &freqs {
            println!("  {:<16} {:>6} {:>8.3}", f.term.label(&names), f.count, f.proportion);
        }
    }
    if let Some(study) = &stages.study {
        study.write_csv(create("study.csv")?).map_err(|e| io_err(e.into()))?;
        wrote.push("study.csv");
        print!("{}", study.render_table());
    }
    if wrote.is_empty() && stages.reduction.is_none() {
        return Err(CliError::data(STAGE, format!("{} has nothing to report", args.artifact.display())));
    }
    for w in wrote {
        println!("wrote {}", args.out_dir.join(w).display());
    }
    Ok(())
}

/// Recorded names, or `x1..` covering every id used.
fn names_for(recorded: &[String], ids: impl Iterator<Item = usize>) -> Vec<String> {
    if !recorded.is_empty() {
        return recorded.to_vec();
    }
    let d = ids.max().map_or(0, |m| m + 1);
    (1..=d).map(|j| format!("x{j}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use modelsets::exploratory::TermCandidate;

    fn answers_file(text: &str) -> tempfile::NamedTempFile {
        let f = tempfile::NamedTempFile::new().unwrap();
        fs::write(f.path(), text).unwrap();
        f
    }

    #[test]
    fn answers_accept_terms_labels_and_defaults() {
        let names: Vec<String> = (1..=8).map(|j| format!("x{j}")).collect();
        let f = answers_file(
            r#"{"answers": [{"label": "x3:x7", "keep": true}, {"term": {"kind": "square", "var": 0}, "keep": false}],
                "default": true}"#,
        );
        let mut src = load_answers(f.path(), &names).unwrap();
        let ask = |src: &mut ScriptedSource, term: Term| {
            let c = TermCandidate { id: 0, term, p_value: 0.0, test_statistic: 0.0, decision: Default::default() };
            src.decide(&c, &[], &names).unwrap()
        };
        assert!(ask(&mut src, Term::interaction(2, 6)));
        assert!(!ask(&mut src, Term::square(0)));
        assert!(ask(&mut src, Term::square(5)));

        for bad in [r#"[{"label": "x99", "keep": true}]"#, r#"[{"keep": true}]"#, r#"{"answers": 3}"#] {
            let err = load_answers(answers_file(bad).path(), &names).unwrap_err();
            assert_eq!(err.kind, ErrorKind::Data, "{bad}");
        }
    }
}
