//! The `detect`, `evaluate`, `grid` and `baseline` commands.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use halspan_core::{baseline, evaluate, Baseline, EvalReport, Instance, Lang, Prediction};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::jsonl::{load_corpus, load_submission, write_audit, write_submission, AuditEntry};
use crate::pipeline::{ModelSettings, Pipeline, Plan};
use crate::providers::http::{HttpChat, HttpTranslator};
use crate::providers::{CacheStore, ChatTransport, Provider, ProviderMode, TranslateTransport, Unconfigured};
use crate::report::{self, Grid, Metric};

/// Live endpoints; unset ones fail every request that reaches them.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Endpoints {
    pub chat_base_url: Option<String>,
    pub translate_url: Option<String>,
}

/// Builds the provider for `mode`. Replay never touches the network and
/// requires an existing cache directory.
pub fn build_provider(mode: ProviderMode, cache_dir: Option<&Path>, endpoints: &Endpoints) -> Result<Provider> {
    if mode == ProviderMode::Replay {
        let dir = cache_dir.ok_or(Error::Config("replay mode requires --cache-dir".into()))?;
        if !dir.is_dir() {
            return Err(Error::Config(format!("cache directory {} does not exist", dir.display())));
        }
        return Ok(Provider::replay(CacheStore::at(dir)));
    }
    let chat: Arc<dyn ChatTransport> = match &endpoints.chat_base_url {
        Some(url) => Arc::new(HttpChat::from_env(url)),
        None => Arc::new(Unconfigured),
    };
    let translator: Arc<dyn TranslateTransport> = match &endpoints.translate_url {
        Some(url) => Arc::new(HttpTranslator::from_env(url)),
        None => Arc::new(Unconfigured),
    };
    let store = cache_dir.map(CacheStore::open).transpose()?;
    Ok(Provider::new(mode, store, chat, translator)?)
}

/// Keeps the instances whose language is in `langs`; an empty filter keeps all.
pub fn filter_langs(corpus: Vec<Instance>, langs: &[Lang]) -> Vec<Instance> {
    if langs.is_empty() {
        return corpus;
    }
    corpus.into_iter().filter(|i| langs.contains(&i.lang)).collect()
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Detection {
    /// In corpus order.
    pub predictions: Vec<Prediction>,
    pub audit: Vec<AuditEntry>,
    pub failed: Vec<String>,
}

/// Runs `plan` over `corpus` on `workers` threads. Results do not depend on
/// the worker count.
pub fn detect(
    corpus: &[Instance],
    plan: &Plan,
    provider: &Provider,
    settings: ModelSettings,
    workers: usize,
) -> Result<Detection> {
    plan.validate()?;
    if workers == 0 {
        return Err(Error::Config("worker count must be at least 1".into()));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    let pipeline = Pipeline::with_settings(provider, settings);
    let outcomes: Vec<_> = pool.install(|| corpus.par_iter().map(|inst| pipeline.run(inst, plan)).collect());
    let mut out = Detection::default();
    for (inst, o) in corpus.iter().zip(outcomes) {
        if o.failed {
            out.failed.push(inst.id.clone());
        }
        out.predictions.push(o.prediction);
        out.audit.extend(o.audit);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct DetectConfig {
    pub corpus: PathBuf,
    pub plan: Plan,
    pub mode: ProviderMode,
    pub cache_dir: Option<PathBuf>,
    pub endpoints: Endpoints,
    pub output: PathBuf,
    /// Defaults to the output path with an `.audit.jsonl` suffix.
    pub audit: Option<PathBuf>,
    pub workers: usize,
    pub langs: Vec<Lang>,
    pub settings: ModelSettings,
}

pub fn default_audit_path(output: &Path) -> PathBuf {
    let mut name = output.file_stem().unwrap_or_default().to_os_string();
    name.push(".audit.jsonl");
    output.with_file_name(name)
}

pub fn cmd_detect(cfg: &DetectConfig) -> Result<Detection> {
    let corpus = filter_langs(load_corpus(&cfg.corpus, false)?, &cfg.langs);
    let provider = build_provider(cfg.mode, cfg.cache_dir.as_deref(), &cfg.endpoints)?;
    let det = detect(&corpus, &cfg.plan, &provider, cfg.settings, cfg.workers)?;
    write_submission(&cfg.output, &det.predictions)?;
    let audit = cfg.audit.clone().unwrap_or_else(|| default_audit_path(&cfg.output));
    write_audit(audit, &det.audit)?;
    log::info!(
        "{} instances, {} failed, {} audit entries",
        det.predictions.len(),
        det.failed.len(),
        det.audit.len()
    );
    Ok(det)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Writes `report.json`, `report.csv`, `instances.csv` and `report.txt`.
pub fn write_report(report: &EvalReport, out_dir: &Path) -> Result<()> {
    create_dir(out_dir)?;
    write_file(&out_dir.join("report.json"), &report::to_json(report))?;
    write_file(&out_dir.join("report.csv"), &report::language_csv(report))?;
    write_file(&out_dir.join("instances.csv"), &report::instance_csv(report))?;
    write_file(&out_dir.join("report.txt"), &report::language_table(report))
}

pub fn cmd_evaluate(submission: &Path, gold: &Path, out_dir: Option<&Path>) -> Result<EvalReport> {
    let preds = load_submission(submission)?;
    let corpus = load_corpus(gold, true)?;
    let report = evaluate(&preds, &corpus)?;
    if let Some(dir) = out_dir {
        write_report(&report, dir)?;
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridConfig {
    pub corpus: PathBuf,
    pub plans: Vec<Plan>,
    pub mode: ProviderMode,
    pub cache_dir: Option<PathBuf>,
    pub endpoints: Endpoints,
    pub out_dir: Option<PathBuf>,
    pub workers: usize,
    pub langs: Vec<Lang>,
    pub settings: ModelSettings,
}

/// Evaluates every plan on the same gold corpus. Failed instances keep their
/// mark-none predictions and are reported alongside the grid.
pub fn grid(
    corpus: &[Instance],
    plans: &[Plan],
    provider: &Provider,
    settings: ModelSettings,
    workers: usize,
) -> Result<(Grid, Vec<Detection>)> {
    let mut g = Grid::default();
    let mut detections = Vec::with_capacity(plans.len());
    for plan in plans {
        let det = detect(corpus, plan, provider, settings, workers)?;
        g.cells.push((plan.name.clone(), evaluate(&det.predictions, corpus)?));
        detections.push(det);
    }
    Ok((g, detections))
}

pub fn cmd_grid(cfg: &GridConfig) -> Result<(Grid, Vec<Detection>)> {
    if cfg.plans.is_empty() {
        return Err(Error::Config("grid needs at least one cell".into()));
    }
    let corpus = filter_langs(load_corpus(&cfg.corpus, true)?, &cfg.langs);
    let provider = build_provider(cfg.mode, cfg.cache_dir.as_deref(), &cfg.endpoints)?;
    let (g, dets) = grid(&corpus, &cfg.plans, &provider, cfg.settings, cfg.workers)?;
    if let Some(dir) = &cfg.out_dir {
        create_dir(dir)?;
        write_file(&dir.join("grid.csv"), &g.to_csv())?;
        let text = format!("{}\n{}", g.table(Metric::Iou), g.table(Metric::Corr));
        write_file(&dir.join("grid.txt"), &text)?;
        for (i, det) in dets.iter().enumerate() {
            write_submission(dir.join(format!("cell{}.jsonl", i + 1)), &det.predictions)?;
            write_audit(dir.join(format!("cell{}.audit.jsonl", i + 1)), &det.audit)?;
        }
    }
    Ok((g, dets))
}

/// Writes the baseline submission for `corpus` and, when gold is present on
/// every instance, returns its scores.
pub fn cmd_baseline(
    corpus_path: &Path,
    kind: Baseline,
    output: &Path,
    langs: &[Lang],
) -> Result<(Vec<Prediction>, Option<EvalReport>)> {
    let corpus = filter_langs(load_corpus(corpus_path, false)?, langs);
    let preds: Vec<Prediction> = corpus.iter().map(|i| baseline(kind, i)).collect();
    write_submission(output, &preds)?;
    let report = if corpus.iter().all(Instance::has_gold) {
        Some(evaluate(&preds, &corpus)?)
    } else {
        None
    };
    Ok((preds, report))
}
