use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use halspan::core::{Baseline, HypothesisMode, Lang, PromptMode, StrategyConfig, TranslationMode};
use halspan::pipeline::{ModelSettings, Plan, DEFAULT_MODEL_A, DEFAULT_MODEL_B};
use halspan::providers::ProviderMode;
use halspan::report::{self, Metric};
use halspan::runner::{self, DetectConfig, Endpoints, GridConfig};
use halspan::{Error, Result};

/// Hallucination span detection with an LLM ensemble, and its scorer.
#[derive(Parser)]
#[command(name = "halspan", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Predict hallucinated spans for a corpus and write a submission.
    Detect(DetectArgs),
    /// Score a submission against a gold corpus.
    Evaluate(EvaluateArgs),
    /// Score several strategies side by side on a gold corpus.
    Grid(GridArgs),
    /// Write a mark-all or mark-none submission.
    Baseline(BaselineArgs),
}

#[derive(Args)]
struct ProviderArgs {
    /// Provider mode.
    #[arg(long, default_value = "replay")]
    mode: ProviderMode,
    /// Record/replay cache directory.
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    /// Base URL of an OpenAI-compatible chat endpoint (key in HALSPAN_CHAT_API_KEY).
    #[arg(long, env = "HALSPAN_CHAT_URL")]
    chat_url: Option<String>,
    /// Translation endpoint URL (key in HALSPAN_TRANSLATE_API_KEY).
    #[arg(long, env = "HALSPAN_TRANSLATE_URL")]
    translate_url: Option<String>,
    /// Worker threads.
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Only process these languages (comma-separated codes).
    #[arg(long, value_delimiter = ',')]
    lang: Vec<Lang>,
    #[arg(long, default_value_t = 0.0)]
    temperature: f64,
    /// Model standing in for `a` in plans and the final system.
    #[arg(long, default_value = DEFAULT_MODEL_A)]
    model_a: String,
    /// Model standing in for `b` in plans and the final system.
    #[arg(long, default_value = DEFAULT_MODEL_B)]
    model_b: String,
}

impl ProviderArgs {
    fn endpoints(&self) -> Endpoints {
        Endpoints {
            chat_base_url: self.chat_url.clone(),
            translate_url: self.translate_url.clone(),
        }
    }

    fn settings(&self) -> ModelSettings {
        ModelSettings {
            temperature: self.temperature,
            ..ModelSettings::default()
        }
    }
}

#[derive(Args)]
struct DetectArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long)]
    output: PathBuf,
    /// Audit log path (default: next to the output).
    #[arg(long)]
    audit: Option<PathBuf>,
    /// Plan: `final`, or `;`-separated `prompt,translation,hypothesis,detector[,hypothesis_model]`.
    #[arg(long, conflicts_with_all = ["prompt_mode", "translation_mode", "hypothesis_mode", "detector_model", "hypothesis_model"])]
    plan: Option<String>,
    #[arg(long, requires = "detector_model")]
    prompt_mode: Option<PromptMode>,
    #[arg(long, requires = "detector_model")]
    translation_mode: Option<TranslationMode>,
    #[arg(long, requires = "detector_model")]
    hypothesis_mode: Option<HypothesisMode>,
    /// Single-component detector; `a`/`b` refer to --model-a/--model-b.
    #[arg(long)]
    detector_model: Option<String>,
    #[arg(long, requires = "detector_model")]
    hypothesis_model: Option<String>,
    #[command(flatten)]
    provider: ProviderArgs,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    submission: PathBuf,
    #[arg(long)]
    gold: PathBuf,
    /// Write report.json, report.csv, instances.csv and report.txt here.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct GridArgs {
    #[arg(long)]
    corpus: PathBuf,
    /// One grid column, in the same syntax as `detect --plan`. Repeatable.
    #[arg(long = "cell", required = true)]
    cells: Vec<String>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[command(flatten)]
    provider: ProviderArgs,
}

#[derive(Clone, Copy, ValueEnum)]
enum BaselineKind {
    MarkAll,
    MarkNone,
}

#[derive(Args)]
struct BaselineArgs {
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long, value_enum)]
    kind: BaselineKind,
    #[arg(long)]
    output: PathBuf,
    #[arg(long, value_delimiter = ',')]
    lang: Vec<Lang>,
}

fn resolve_model(name: &str, p: &ProviderArgs) -> String {
    match name {
        "a" | "A" => p.model_a.clone(),
        "b" | "B" => p.model_b.clone(),
        other => other.to_string(),
    }
}

fn detect_plan(args: &DetectArgs) -> Result<Plan> {
    let p = &args.provider;
    if let Some(detector) = &args.detector_model {
        let strategy = StrategyConfig::new(
            args.prompt_mode.unwrap_or(PromptMode::FewShot),
            args.translation_mode.unwrap_or(TranslationMode::None),
            args.hypothesis_mode.unwrap_or(HypothesisMode::None),
            resolve_model(detector, p),
            args.hypothesis_model.as_deref().map(|m| resolve_model(m, p)),
        )?;
        return Ok(Plan::single(strategy));
    }
    Ok(Plan::parse(args.plan.as_deref().unwrap_or("final"), &p.model_a, &p.model_b)?)
}

fn failures_exit(failed: &[String]) -> ExitCode {
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        eprintln!("{} instance(s) failed: {}", failed.len(), failed.join(", "));
        ExitCode::from(1)
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Detect(args) => {
            let plan = detect_plan(&args)?;
            let p = &args.provider;
            let det = runner::cmd_detect(&DetectConfig {
                corpus: args.corpus.clone(),
                plan,
                mode: p.mode,
                cache_dir: p.cache_dir.clone(),
                endpoints: p.endpoints(),
                output: args.output.clone(),
                audit: args.audit.clone(),
                workers: p.workers,
                langs: p.lang.clone(),
                settings: p.settings(),
            })?;
            Ok(failures_exit(&det.failed))
        }
        Command::Evaluate(args) => {
            let report = runner::cmd_evaluate(&args.submission, &args.gold, args.out_dir.as_deref())?;
            print!("{}", report::language_table(&report));
            Ok(ExitCode::SUCCESS)
        }
        Command::Grid(args) => {
            let p = &args.provider;
            let plans = args
                .cells
                .iter()
                .map(|c| Plan::parse(c, &p.model_a, &p.model_b))
                .collect::<std::result::Result<Vec<_>, _>>()?;
            let (grid, dets) = runner::cmd_grid(&GridConfig {
                corpus: args.corpus.clone(),
                plans,
                mode: p.mode,
                cache_dir: p.cache_dir.clone(),
                endpoints: p.endpoints(),
                out_dir: args.out_dir.clone(),
                workers: p.workers,
                langs: p.lang.clone(),
                settings: p.settings(),
            })?;
            print!("{}\n{}", grid.table(Metric::Iou), grid.table(Metric::Corr));
            let failed: Vec<String> = dets.into_iter().flat_map(|d| d.failed).collect();
            Ok(failures_exit(&failed))
        }
        Command::Baseline(args) => {
            let kind = match args.kind {
                BaselineKind::MarkAll => Baseline::MarkAll,
                BaselineKind::MarkNone => Baseline::MarkNone,
            };
            let (_, report) = runner::cmd_baseline(&args.corpus, kind, &args.output, &args.lang)?;
            if let Some(r) = report {
                print!("{}", report::language_table(&r));
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            report_error(&e);
            ExitCode::from(2)
        }
    }
}

fn report_error(e: &Error) {
    eprintln!("error: {e}");
    let mut source = std::error::Error::source(e);
    while let Some(s) = source {
        eprintln!("  caused by: {s}");
        source = s.source();
    }
}
