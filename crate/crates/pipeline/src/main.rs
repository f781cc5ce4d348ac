use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use talkmoves::classifier::{grid_search, save_model, train, FeatureConfig, ParamGrid, TrainConfig};
use talkmoves::corpus::{load_dataset, save_dataset, split_with_unit, Dataset, SplitRatios, SplitUnit};
use talkmoves::ingest::{
    degrade, parse_transcript_with_id, transcript_to_csv, NoiseConfig, Transcript, TranscriptFormat,
};
use talkmoves::metrics::{error_analysis, evaluate};
use talkmoves_pipeline::config::{env_overrides, load_analytics_config};
use talkmoves_pipeline::queue::now_iso;
use talkmoves_pipeline::{process_transcript, ClassifierChoice, Engine, Queue, ServiceConfig, Store};

#[derive(Parser)]
#[command(name = "talkmoves", version, about = "Talk move classification and lesson feedback")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Queue a transcript file in the job store.
    Ingest {
        file: PathBuf,
        #[arg(long)]
        format: Option<TranscriptFormat>,
        #[arg(long)]
        lesson_id: Option<String>,
        #[arg(long)]
        teacher: Option<String>,
        #[command(flatten)]
        service: ServiceArgs,
    },
    /// Train the hashed n-gram model on a labeled dataset.
    Train(TrainArgs),
    /// Score a classifier on a labeled dataset and write the metrics report.
    Eval {
        #[arg(long)]
        data: PathBuf,
        #[command(flatten)]
        classifier: ClassifierArgs,
        /// Write here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write per-class error analysis with up to N examples each.
        #[arg(long, value_name = "N")]
        errors: Option<usize>,
    },
    /// Classify one transcript and write its lesson artifacts.
    Analyze {
        file: PathBuf,
        #[arg(long)]
        format: Option<TranscriptFormat>,
        #[arg(long)]
        out_dir: PathBuf,
        #[command(flatten)]
        classifier: ClassifierArgs,
        #[arg(long)]
        analytics_config: Option<PathBuf>,
        /// Timestamp recorded in the feedback (default: now).
        #[arg(long)]
        created_at: Option<String>,
    },
    /// Stratified train/validation/test split of a dataset.
    Split {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
        /// Three comma-separated fractions.
        #[arg(long, default_value = "0.8,0.1,0.1")]
        ratios: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// `pair` or `lesson`.
        #[arg(long, default_value = "pair")]
        unit: String,
    },
    /// Train every configuration of a grid and rank on validation macro-F1.
    Gridsearch {
        #[arg(long)]
        train: PathBuf,
        #[arg(long)]
        val: PathBuf,
        /// JSON object with a list of values per training field.
        #[arg(long)]
        grid: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the HTTP service and workers.
    Serve {
        #[command(flatten)]
        service: ServiceArgs,
    },
    /// Simulate speech recognition errors in a transcript.
    Degrade {
        file: PathBuf,
        #[arg(long)]
        format: Option<TranscriptFormat>,
        #[arg(long, default_value_t = 0.0)]
        drop_rate: f64,
        #[arg(long, default_value_t = 0.0)]
        substitute_rate: f64,
        #[arg(long, default_value_t = 1.0)]
        student_multiplier: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        /// Output format, `json` or `csv`.
        #[arg(long, default_value = "json")]
        out_format: TranscriptFormat,
    },
}

/// Service settings that can also come from a config file or environment.
#[derive(Args, Default)]
struct ServiceArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    listen: Option<String>,
    #[arg(long)]
    store: Option<PathBuf>,
    #[arg(long)]
    classifier: Option<ClassifierChoice>,
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    adapter_url: Option<String>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    analytics_config: Option<PathBuf>,
    #[arg(long)]
    stage_delay_ms: Option<u64>,
}

impl ServiceArgs {
    fn resolve(&self) -> Result<ServiceConfig> {
        let mut flags = BTreeMap::new();
        let mut put = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                flags.insert(k.to_string(), v);
            }
        };
        let path = |p: &Option<PathBuf>| p.as_ref().map(|p| p.display().to_string());
        put("listen", self.listen.clone());
        put("store", path(&self.store));
        put("classifier", self.classifier.map(|c| c.to_string()));
        put("model", path(&self.model));
        put("adapter_url", self.adapter_url.clone());
        put("workers", self.workers.map(|w| w.to_string()));
        put("analytics_config", path(&self.analytics_config));
        put("stage_delay_ms", self.stage_delay_ms.map(|d| d.to_string()));
        let config_file = self
            .config
            .clone()
            .or_else(|| std::env::var_os("TALKMOVES_CONFIG").map(PathBuf::from));
        ServiceConfig::resolve(config_file.as_deref(), env_overrides(std::env::vars()), flags)
    }
}

#[derive(Args)]
struct ClassifierArgs {
    #[arg(long, default_value = "trained")]
    classifier: ClassifierChoice,
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    adapter_url: Option<String>,
}

impl ClassifierArgs {
    fn engine(&self) -> Result<Engine> {
        let mut adapter = ServiceConfig::default().adapter;
        if let Some(url) = &self.adapter_url {
            adapter.url = url.clone();
        }
        Engine::load(self.classifier, self.model.as_deref(), &adapter)
    }
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    data: PathBuf,
    /// Optional validation set for per-epoch macro-F1.
    #[arg(long)]
    val: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
    /// JSON training config; flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    learning_rate: Option<f64>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    hash_dimension: Option<usize>,
    #[arg(long)]
    l2: Option<f64>,
    #[arg(long)]
    class_weights: bool,
    #[arg(long)]
    max_ngram: Option<u32>,
    #[arg(long)]
    max_tokens: Option<u32>,
    #[arg(long)]
    no_overlap: bool,
    /// Write the per-epoch history as JSON.
    #[arg(long)]
    history: Option<PathBuf>,
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn dataset(path: &Path) -> Result<Dataset> {
    load_dataset(&read(path)?).with_context(|| format!("loading dataset {}", path.display()))
}

fn format_of(path: &Path, given: Option<TranscriptFormat>) -> Result<TranscriptFormat> {
    if let Some(f) = given {
        return Ok(f);
    }
    path.extension()
        .and_then(|e| e.to_str())
        .and_then(TranscriptFormat::from_extension)
        .with_context(|| format!("cannot tell the format of {}; pass --format", path.display()))
}

fn transcript(path: &Path, format: Option<TranscriptFormat>) -> Result<Transcript> {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("lesson");
    let t = parse_transcript_with_id(&read(path)?, format_of(path, format)?, stem)
        .with_context(|| format!("parsing {}", path.display()))?;
    Ok(t)
}

fn to_json<T: serde::Serialize>(v: &T) -> Vec<u8> {
    let mut out = serde_json::to_vec_pretty(v).expect("serializable");
    out.push(b'\n');
    out
}

fn train_config(a: &TrainArgs) -> Result<TrainConfig> {
    let mut cfg = match &a.config {
        Some(p) => serde_json::from_slice(&read(p)?).with_context(|| format!("parsing {}", p.display()))?,
        None => TrainConfig::default(),
    };
    if let Some(v) = a.learning_rate {
        cfg.learning_rate = v;
    }
    if let Some(v) = a.epochs {
        cfg.epochs = v;
    }
    if let Some(v) = a.batch_size {
        cfg.batch_size = v;
    }
    if let Some(v) = a.seed {
        cfg.seed = v;
    }
    if let Some(v) = a.hash_dimension {
        cfg.hash_dimension = v;
    }
    if let Some(v) = a.l2 {
        cfg.l2 = v;
    }
    if a.class_weights {
        cfg.use_class_weights = true;
    }
    let f: &mut FeatureConfig = &mut cfg.features;
    if let Some(v) = a.max_ngram {
        f.max_ngram = v;
    }
    if let Some(v) = a.max_tokens {
        f.max_tokens = v;
    }
    if a.no_overlap {
        f.overlap = false;
    }
    Ok(cfg)
}

fn parse_ratios(s: &str) -> Result<SplitRatios> {
    let parts: Vec<f64> = s
        .split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .with_context(|| format!("ratios {s:?}"))?;
    let [a, b, c] = parts[..] else { bail!("expected three ratios, got {s:?}") };
    Ok(SplitRatios::new(a, b, c)?)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Ingest { file, format, lesson_id, teacher, service } => {
            let cfg = service.resolve()?;
            let queue = Queue::new(Store::open(&cfg.store)?);
            let format = format_of(&file, format)?;
            let stem = file.file_stem().and_then(|s| s.to_str()).map(str::to_string);
            let lesson = lesson_id.or(if format == TranscriptFormat::TurnsText { stem } else { None });
            let job = queue.enqueue(&read(&file)?, format, lesson.as_deref(), teacher.as_deref())?;
            println!("{}", job.id);
        }
        Command::Train(args) => {
            let cfg = train_config(&args)?;
            let data = dataset(&args.data)?;
            let val = match &args.val {
                Some(p) => dataset(p)?,
                None => Dataset::default(),
            };
            let outcome = train(&data, &val, &cfg)?;
            write(&args.out, &save_model(&outcome.model))?;
            if let Some(h) = &args.history {
                write(h, &to_json(&outcome.history))?;
            }
            if let Some(last) = outcome.history.last() {
                eprintln!("trained {} epochs, final loss {:.6}", last.epoch, last.train_loss);
            }
        }
        Command::Eval { data, classifier, out, errors } => {
            let d = dataset(&data)?;
            let engine = classifier.engine()?;
            let pairs = d.pairs();
            let preds = engine.classify(&pairs)?;
            let labels: Vec<_> = preds.iter().map(|p| p.label).collect();
            let report = evaluate(&d.labels(), &labels)?;
            let bytes = match errors {
                Some(n) => {
                    let analysis = error_analysis(&d.labels(), &preds, &pairs, n)?;
                    let mut v = serde_json::to_value(&report)?;
                    v["error_analysis"] = serde_json::to_value(&analysis)?;
                    to_json(&v)
                }
                None => to_json(&report),
            };
            match out {
                Some(p) => write(&p, &bytes)?,
                None => print!("{}", String::from_utf8_lossy(&bytes)),
            }
        }
        Command::Analyze { file, format, out_dir, classifier, analytics_config, created_at } => {
            let t = transcript(&file, format)?;
            let engine = classifier.engine()?;
            let analytics = load_analytics_config(analytics_config.as_deref())?;
            let created_at = created_at.unwrap_or_else(now_iso);
            let a = process_transcript(&t, &engine, &analytics, &created_at).map_err(anyhow::Error::msg)?;
            write(&out_dir.join("predictions.csv"), &a.predictions_csv)?;
            write(&out_dir.join("feedback.json"), &a.feedback_json)?;
            write(&out_dir.join("report.html"), &a.report_html)?;
            eprintln!("{} talk moves in {} teacher sentences", a.feedback.total_talk_moves, a.pairs.len());
        }
        Command::Split { data, out_dir, ratios, seed, unit } => {
            let d = dataset(&data)?;
            let unit = match unit.as_str() {
                "pair" | "sentence" => SplitUnit::Pair,
                "lesson" => SplitUnit::Lesson,
                other => bail!("unknown split unit {other:?}"),
            };
            let (a, b, c) = split_with_unit(&d, parse_ratios(&ratios)?, seed, unit)?;
            for (name, part) in [("train.csv", &a), ("val.csv", &b), ("test.csv", &c)] {
                write(&out_dir.join(name), &save_dataset(part))?;
            }
            eprintln!("train {} / val {} / test {}", a.len(), b.len(), c.len());
        }
        Command::Gridsearch { train: t, val, grid, out } => {
            let grid: ParamGrid = serde_json::from_slice(&read(&grid)?).context("parsing grid")?;
            let result = grid_search(&dataset(&t)?, &dataset(&val)?, &grid)?;
            write(&out, &result.to_csv())?;
            print!("{}", String::from_utf8_lossy(&to_json(&result.best)));
        }
        Command::Serve { service } => {
            talkmoves_pipeline::server::serve(service.resolve()?)?;
        }
        Command::Degrade { file, format, drop_rate, substitute_rate, student_multiplier, seed, out, out_format } => {
            let t = transcript(&file, format)?;
            let cfg = NoiseConfig {
                word_drop_rate: drop_rate,
                word_substitute_rate: substitute_rate,
                student_rate_multiplier: student_multiplier,
                seed,
            };
            let noisy = degrade(&t, &cfg)?;
            let bytes = match out_format {
                TranscriptFormat::Json => noisy.to_json(),
                TranscriptFormat::Csv => transcript_to_csv(&noisy),
                TranscriptFormat::TurnsText => bail!("turns_text output would drop timestamps; use json or csv"),
            };
            write(&out, &bytes)?;
        }
    }
    Ok(())
}

fn main() -> Result<()> {
    run(Cli::parse())
}
