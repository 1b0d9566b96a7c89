//! Command-line front end: `make-data`, `train`, `eval`, `inspect-graph`
//! and `bench`. Every numeric report is CSV on stdout.
//!
//! Exit codes: 0 success, 1 internal error, 2 configuration or domain
//! error, 3 data, parse or I/O error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::bench::{time_alphabets, time_epochs};
use crate::data::{
    apply_drop, generate_synthetic, read_corpus, retention_histogram, write_corpus, DropConfig,
    DropStrategy, Sample, SyntheticConfig,
};
use crate::error::{Error, Result};
use crate::label::{letter_name, parse_token, Token};
use crate::loss::{AlphabetMode, CtcLabelGraph, StcLabelGraph};
use crate::text::{to_dot_with, to_text};
use crate::train::{Checkpoint, LossKind, RunConfig, Trainer};

#[derive(Debug, Parser)]
#[command(name = "stc", version, about = "CTC and STC training on synthetic weakly labeled data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic corpus with weak labels.
    MakeData(MakeDataArgs),
    /// Train a frame classifier; writes config, metrics and checkpoints.
    Train(TrainArgs),
    /// Evaluate a checkpoint on a corpus file.
    Eval(EvalArgs),
    /// Print a CTC, selfless-CTC or STC label graph.
    InspectGraph(InspectArgs),
    /// Time CTC against STC epochs and full against reduced alphabets.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum StrategyArg {
    Uniform,
    PerSampleSplit,
    PerTokenSplit,
}

impl From<StrategyArg> for DropStrategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Uniform => DropStrategy::Uniform,
            StrategyArg::PerSampleSplit => DropStrategy::PerSampleSplit,
            StrategyArg::PerTokenSplit => DropStrategy::PerTokenSplit,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum LossArg {
    Ctc,
    SelflessCtc,
    Stc,
}

impl From<LossArg> for LossKind {
    fn from(l: LossArg) -> Self {
        match l {
            LossArg::Ctc => LossKind::Ctc,
            LossArg::SelflessCtc => LossKind::SelflessCtc,
            LossArg::Stc => LossKind::Stc,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum AlphabetArg {
    Full,
    Reduced,
}

impl From<AlphabetArg> for AlphabetMode {
    fn from(a: AlphabetArg) -> Self {
        match a {
            AlphabetArg::Full => AlphabetMode::Full,
            AlphabetArg::Reduced => AlphabetMode::Reduced,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum GraphKind {
    Ctc,
    Selfless,
    Stc,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum GraphFormat {
    Text,
    Dot,
}

#[derive(Debug, Args)]
pub struct MakeDataArgs {
    /// Output directory for train.jsonl, valid.jsonl and retention.csv.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 30)]
    pub vocab_size: usize,
    #[arg(long, default_value_t = 2000)]
    pub train_samples: usize,
    #[arg(long, default_value_t = 300)]
    pub valid_samples: usize,
    #[arg(long, default_value_t = 3)]
    pub min_len: usize,
    #[arg(long, default_value_t = 8)]
    pub max_len: usize,
    #[arg(long, default_value_t = 1)]
    pub min_frames: usize,
    #[arg(long, default_value_t = 3)]
    pub max_frames: usize,
    #[arg(long, default_value_t = 0.3)]
    pub noise: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = StrategyArg::Uniform)]
    pub strategy: StrategyArg,
    /// One probability, or one per split, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "0.5")]
    pub p_drop: Vec<f64>,
    #[arg(long, default_value_t = 10)]
    pub bins: usize,
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Directory holding train.jsonl and valid.jsonl.
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// TOML run configuration; flags given on the command line win.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Continue from a checkpoint until `--epochs` total epochs.
    #[arg(long)]
    pub resume: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub loss: Option<LossArg>,
    #[arg(long)]
    pub p0: Option<f64>,
    #[arg(long)]
    pub p_max: Option<f64>,
    /// Steps for the insertion probability to get halfway to p_max.
    #[arg(long)]
    pub half_life: Option<f64>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub alphabet: Option<AlphabetArg>,
    #[arg(long)]
    pub hidden: Option<usize>,
    #[arg(long)]
    pub context: Option<usize>,
    /// Loss worker threads; 0 uses every core.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Output classes minus the blank; defaults to the largest token id in
    /// the data.
    #[arg(long)]
    pub vocab_size: Option<usize>,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Corpus file (JSON lines).
    #[arg(long)]
    pub data: PathBuf,
}

#[derive(Debug, Args)]
pub struct InspectArgs {
    /// Space-separated tokens: letters a-z or numeric ids.
    #[arg(long)]
    pub label: String,
    #[arg(long, value_enum, default_value_t = GraphKind::Stc)]
    pub kind: GraphKind,
    /// Insertion penalty for STC; `-inf` removes the star arcs.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub lambda: f64,
    #[arg(long, value_enum, default_value_t = GraphFormat::Text)]
    pub format: GraphFormat,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, default_value_t = 30)]
    pub vocab_size: usize,
    #[arg(long, default_value_t = 2000)]
    pub samples: usize,
    #[arg(long, default_value_t = 3)]
    pub epochs: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
    #[arg(long, default_value_t = 0.5)]
    pub p_drop: f64,
    /// Vocabulary size for the full against reduced alphabet timing.
    #[arg(long, default_value_t = 5000)]
    pub alphabet_vocab: usize,
    #[arg(long, default_value_t = 50)]
    pub alphabet_frames: usize,
    #[arg(long, default_value_t = 5)]
    pub alphabet_label_len: usize,
    #[arg(long, default_value_t = 5)]
    pub repeats: usize,
}

/// Maps an error to the process exit code.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Config(_) | Error::Domain(_) | Error::Alphabet(_) | Error::Contract(_) => 2,
        Error::Data(_)
        | Error::Parse { .. }
        | Error::Io(_)
        | Error::EmptyInput(_)
        | Error::Shape { .. } => 3,
        Error::UnsupportedGraph(_) => 1,
    }
}

/// Parses `args` (including the program name), runs the command and
/// returns the exit code. Errors are reported on stderr.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let stdout = std::io::stdout();
    match run(cli, &mut stdout.lock()) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn run(cli: Cli, out: &mut dyn Write) -> Result<()> {
    match cli.command {
        Command::MakeData(a) => make_data(a, out),
        Command::Train(a) => train(a, out),
        Command::Eval(a) => eval(a, out),
        Command::InspectGraph(a) => inspect_graph(a, out),
        Command::Bench(a) => bench(a, out),
    }
}

fn make_data(a: MakeDataArgs, out: &mut dyn Write) -> Result<()> {
    let base = SyntheticConfig {
        vocab_size: a.vocab_size,
        num_samples: a.train_samples,
        len_range: (a.min_len, a.max_len),
        frames_per_token: (a.min_frames, a.max_frames),
        noise: a.noise,
        seed: a.seed,
        id_prefix: "train".into(),
    };
    let full = generate_synthetic(&base)?;
    let drop = DropConfig {
        strategy: a.strategy.into(),
        p_drop: a.p_drop,
        seed: a.seed,
    };
    let train = apply_drop(&full, &drop)?;
    if train.is_empty() {
        return Err(Error::Data(
            "every training sample lost its whole label; nothing to write".into(),
        ));
    }
    let valid = generate_synthetic(&SyntheticConfig {
        num_samples: a.valid_samples,
        seed: valid_seed(a.seed),
        id_prefix: "valid".into(),
        ..base
    })?;

    fs::create_dir_all(&a.out)?;
    write_corpus(&train, a.out.join("train.jsonl"))?;
    write_corpus(&valid, a.out.join("valid.jsonl"))?;
    let hist = retention_histogram(&train, a.bins);
    fs::write(a.out.join("retention.csv"), hist.to_csv())?;

    writeln!(out, "split,samples,tokens,retained_tokens")?;
    for (name, set) in [("train", &train), ("valid", &valid)] {
        let tokens: usize = set.iter().map(|s| s.full_label.len()).sum();
        let kept: usize = set.iter().map(|s| s.partial_label.len()).sum();
        writeln!(out, "{name},{},{tokens},{kept}", set.len())?;
    }
    Ok(())
}

/// The held-out split uses its own seed so its samples never coincide
/// with training samples.
pub fn valid_seed(seed: u64) -> u64 {
    seed ^ 0x7661_6c69_6400_0000
}

fn train(a: TrainArgs, out: &mut dyn Write) -> Result<()> {
    let train_set = read_corpus(a.data.join("train.jsonl"))?;
    let valid_set = read_corpus(a.data.join("valid.jsonl"))?;
    let first = train_set
        .first()
        .ok_or_else(|| Error::Data("train.jsonl has no samples".into()))?;
    let input_dim = first.frames.ncols();
    let max_token = train_set
        .iter()
        .chain(&valid_set)
        .flat_map(|s| s.full_label.iter().copied())
        .max()
        .unwrap_or(1) as usize;
    let vocab = a.vocab_size.unwrap_or(max_token);
    if vocab < max_token {
        return Err(Error::Config(format!(
            "vocab size {vocab} is smaller than the largest token id {max_token}"
        )));
    }

    let mut trainer = match &a.resume {
        Some(path) => {
            let mut ckpt = Checkpoint::load(path)?;
            if has_model_overrides(&a) {
                return Err(Error::Config(
                    "only --epochs and --workers may change when resuming".into(),
                ));
            }
            if let Some(e) = a.epochs {
                ckpt.config.epochs = e;
            }
            if let Some(w) = a.workers {
                ckpt.config.workers = w;
            }
            let t = Trainer::from_checkpoint(ckpt)?;
            if t.model().config().input_dim != input_dim || t.model().classes() < vocab + 1 {
                return Err(Error::Data("checkpoint does not match the data dimensions".into()));
            }
            t
        }
        None => Trainer::new(resolve_config(&a)?, input_dim, vocab + 1)?,
    };

    fs::create_dir_all(&a.out)?;
    let config_text = toml::to_string(trainer.config())
        .map_err(|e| Error::Config(format!("cannot serialize config: {e}")))?;
    fs::write(a.out.join("config.toml"), config_text)?;

    let metrics_path = a.out.join("metrics.csv");
    let header = "epoch,split,loss,ter,lambda,seconds";
    let mut metrics = String::new();
    if a.resume.is_some() && metrics_path.exists() {
        metrics = fs::read_to_string(&metrics_path)?;
    } else {
        metrics.push_str(header);
        metrics.push('\n');
    }
    writeln!(out, "{header}")?;

    while trainer.epoch() < trainer.config().epochs {
        let stats = trainer.train_epoch(&train_set)?;
        let start = std::time::Instant::now();
        let eval = trainer.evaluate(&valid_set)?;
        let rows = [
            format!(
                "{},train,{},NaN,{},{}",
                stats.epoch, stats.loss, stats.lambda, stats.seconds
            ),
            format!(
                "{},valid,{},{},{},{}",
                stats.epoch,
                eval.loss,
                eval.ter,
                stats.lambda,
                start.elapsed().as_secs_f64()
            ),
        ];
        for row in &rows {
            writeln!(out, "{row}")?;
            metrics.push_str(row);
            metrics.push('\n');
        }
        fs::write(&metrics_path, &metrics)?;
        let ckpt = trainer.checkpoint();
        ckpt.save(a.out.join(format!("checkpoint-epoch-{}.json", stats.epoch)))?;
        ckpt.save(a.out.join("checkpoint.json"))?;
    }
    Ok(())
}

fn has_model_overrides(a: &TrainArgs) -> bool {
    a.config.is_some()
        || a.loss.is_some()
        || a.p0.is_some()
        || a.p_max.is_some()
        || a.half_life.is_some()
        || a.lr.is_some()
        || a.batch_size.is_some()
        || a.seed.is_some()
        || a.alphabet.is_some()
        || a.hidden.is_some()
        || a.context.is_some()
}

/// Defaults, then the config file, then command-line flags.
pub fn resolve_config(a: &TrainArgs) -> Result<RunConfig> {
    let mut cfg = match &a.config {
        Some(path) => load_config(path)?,
        None => RunConfig::default(),
    };
    if let Some(v) = a.loss {
        cfg.loss = v.into();
    }
    if let Some(v) = a.p0 {
        cfg.p0 = v;
    }
    if let Some(v) = a.p_max {
        cfg.p_max = v;
    }
    if let Some(v) = a.half_life {
        cfg.half_life = v;
    }
    if let Some(v) = a.lr {
        cfg.learning_rate = v;
    }
    if let Some(v) = a.batch_size {
        cfg.batch_size = v;
    }
    if let Some(v) = a.epochs {
        cfg.epochs = v;
    }
    if let Some(v) = a.seed {
        cfg.seed = v;
    }
    if let Some(v) = a.alphabet {
        cfg.alphabet = v.into();
    }
    if let Some(v) = a.hidden {
        cfg.hidden = (v > 0).then_some(v);
    }
    if let Some(v) = a.context {
        cfg.context = v;
    }
    if let Some(v) = a.workers {
        cfg.workers = v;
    }
    cfg.validate()?;
    Ok(cfg)
}

pub fn load_config(path: &Path) -> Result<RunConfig> {
    let text = fs::read_to_string(path)?;
    toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn eval(a: EvalArgs, out: &mut dyn Write) -> Result<()> {
    let trainer = Trainer::from_checkpoint(Checkpoint::load(&a.checkpoint)?)?;
    let samples = read_corpus(&a.data)?;
    check_dims(&trainer, &samples)?;
    let stats = trainer.evaluate(&samples)?;
    writeln!(out, "samples,loss,ter")?;
    writeln!(out, "{},{},{}", stats.samples, stats.loss, stats.ter)?;
    Ok(())
}

fn check_dims(trainer: &Trainer, samples: &[Sample]) -> Result<()> {
    let cfg = trainer.model().config();
    for s in samples {
        if s.frames.ncols() != cfg.input_dim {
            return Err(Error::Data(format!(
                "sample {} has {} features, the model expects {}",
                s.id,
                s.frames.ncols(),
                cfg.input_dim
            )));
        }
        if let Some(&t) = s.full_label.iter().find(|&&t| t as usize >= trainer.model().classes()) {
            return Err(Error::Data(format!(
                "sample {} uses token {t} outside the model's vocabulary",
                s.id
            )));
        }
    }
    Ok(())
}

fn inspect_graph(a: InspectArgs, out: &mut dyn Write) -> Result<()> {
    let label: Vec<Token> = a
        .label
        .split_whitespace()
        .map(|s| {
            parse_token(s).ok_or_else(|| Error::Alphabet(format!("cannot parse token {s:?}")))
        })
        .collect::<Result<_>>()?;
    let graph = match a.kind {
        GraphKind::Ctc => CtcLabelGraph::build(&label)?.into_graph(),
        GraphKind::Selfless => CtcLabelGraph::build_selfless(&label)?.into_graph(),
        GraphKind::Stc => StcLabelGraph::build(&label, a.lambda)?.into_graph(),
    };
    let text = match a.format {
        GraphFormat::Text => to_text(&graph),
        GraphFormat::Dot => to_dot_with(&graph, &letter_name),
    };
    out.write_all(text.as_bytes())?;
    Ok(())
}

fn bench(a: BenchArgs, out: &mut dyn Write) -> Result<()> {
    let data = SyntheticConfig {
        vocab_size: a.vocab_size,
        num_samples: a.samples,
        seed: a.seed,
        id_prefix: "bench".into(),
        ..SyntheticConfig::default()
    };
    let samples = apply_drop(&generate_synthetic(&data)?, &DropConfig::uniform(a.p_drop, a.seed))?;
    let base = RunConfig {
        seed: a.seed,
        workers: a.workers,
        alphabet: AlphabetMode::Reduced,
        ..RunConfig::default()
    };
    let epochs = time_epochs(&samples, &base, a.vocab_size, a.vocab_size + 1, a.epochs)?;
    let alphabet = time_alphabets(
        a.alphabet_vocab,
        a.alphabet_frames,
        a.alphabet_label_len,
        a.repeats,
        a.seed,
    )?;
    writeln!(out, "measure,value")?;
    writeln!(out, "epochs,{}", a.epochs)?;
    writeln!(out, "ctc_epoch_seconds,{}", epochs.ctc_mean())?;
    writeln!(out, "stc_epoch_seconds,{}", epochs.stc_mean())?;
    writeln!(out, "stc_ctc_ratio,{}", epochs.ratio())?;
    writeln!(out, "alphabet_vocab,{}", alphabet.vocab_size)?;
    writeln!(out, "full_alphabet_seconds,{}", alphabet.full)?;
    writeln!(out, "reduced_alphabet_seconds,{}", alphabet.reduced)?;
    writeln!(out, "reduced_full_ratio,{}", alphabet.ratio())?;
    writeln!(out, "max_loss_diff,{}", alphabet.max_loss_diff)?;
    writeln!(out, "max_grad_diff,{}", alphabet.max_grad_diff)?;
    Ok(())
}
