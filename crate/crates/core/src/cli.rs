//! Command-line front end.
//!
//! Every subcommand reads an optional JSON [`RunConfig`], applies the
//! `CORRGAN_SEED` environment variable and then command-line flags on top,
//! and writes the resolved configuration to `<out_dir>/config.json`.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use ndarray::{s, Array2};
use serde::{Deserialize, Serialize};

use crate::corrnn::RecordBatch;
use crate::data::{
    binarize_images, build_dictionaries, load_checkpoint, load_mnist, load_profiles, preprocess_profiles,
    save_checkpoint, synth_correlated_dataset, vectorize_profiles, ModelBundle, ProfileRecord, SynthSpec, Vocabulary,
};
use crate::error::{Error, Result};
use crate::gan::{conditional_generate, inpaint_halves, train_corrgan_with, CorrGan, EvalCfg, EvalScope, TrainCfg};
use crate::metrics::{
    evaluate_samples, export_report, image_grid, skill_lines, write_pgm, write_skill_samples, EvalReport,
};
use crate::nn::{seeded_rng, substream};

pub const SEED_ENV: &str = "CORRGAN_SEED";

/// MNIST images are split into a top half (`x`) and a bottom half (`y`).
pub const MNIST_SIDE: usize = 28;

const SAMPLE_ROWS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MnistSource {
    pub images: PathBuf,
    pub labels: PathBuf,
    /// Keep only the first `limit` images.
    #[serde(default)]
    pub limit: Option<usize>,
    #[serde(default = "default_threshold")]
    pub threshold: f64,
}

fn default_threshold() -> f64 {
    0.5
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

/// Full run configuration. Exactly one of `profiles`, `mnist`, `synth`
/// names the dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub profiles: Option<PathBuf>,
    pub mnist: Option<MnistSource>,
    pub synth: Option<SynthSpec>,
    pub train: TrainCfg,
    pub eval: EvalCfg,
    pub out_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            profiles: None,
            mnist: None,
            synth: None,
            train: TrainCfg::default(),
            eval: EvalCfg::default(),
            out_dir: default_out_dir(),
        }
    }
}

/// Dataset named by a [`RunConfig`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DataSource<'a> {
    Profiles(&'a Path),
    Mnist(&'a MnistSource),
    Synth(&'a SynthSpec),
}

impl RunConfig {
    pub fn from_json(text: &str, origin: &Path) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| match e.classify() {
            serde_json::error::Category::Data => Error::Config(format!("{}: {e}", origin.display())),
            _ => crate::data::json_error(text, origin, &e),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text, path)
    }

    pub fn source(&self) -> Result<Option<DataSource<'_>>> {
        let mut found = Vec::new();
        if let Some(p) = &self.profiles {
            found.push(DataSource::Profiles(p));
        }
        if let Some(m) = &self.mnist {
            found.push(DataSource::Mnist(m));
        }
        if let Some(s) = &self.synth {
            found.push(DataSource::Synth(s));
        }
        match found.len() {
            0 => Ok(None),
            1 => Ok(found.pop()),
            _ => Err(Error::Config("conflicting dataset sources: set only one of `profiles`, `mnist`, `synth`".into())),
        }
    }

    pub fn require_source(&self) -> Result<DataSource<'_>> {
        self.source()?
            .ok_or_else(|| Error::Config("missing dataset: set one of `profiles`, `mnist`, `synth`".into()))
    }

    pub fn validate(&self) -> Result<()> {
        self.train.validate()?;
        self.eval.validate()?;
        if let Some(spec) = &self.synth {
            spec.validate()?;
        }
        self.source().map(|_| ())
    }
}

/// Overrides shared by all subcommands.
#[derive(Debug, Clone, Default, Args)]
pub struct ConfigArgs {
    /// JSON run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
    /// Training seed; also the synthetic-data seed when a synth dataset is configured.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub pretrain_epochs: Option<usize>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    #[arg(long)]
    pub lr: Option<f64>,
    #[arg(long)]
    pub latent_dim: Option<usize>,
    #[arg(long)]
    pub z_dim: Option<usize>,
    #[arg(long)]
    pub lambda_corr: Option<f64>,
    /// Train the vanilla-autoencoder baseline.
    #[arg(long)]
    pub ablation_medgan: bool,
    /// Co-occurrence threshold.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Epochs between checkpoints.
    #[arg(long)]
    pub interval: Option<usize>,
    /// Read profiles from this JSON file.
    #[arg(long, conflicts_with = "synth")]
    pub profiles: Option<PathBuf>,
    /// Use a synthetic dataset with default settings unless the config sets them.
    #[arg(long)]
    pub synth: bool,
}

/// Applies `CORRGAN_SEED` (when `env_seed` is set) and then the flags.
pub fn resolve_config(args: &ConfigArgs, env_seed: Option<&str>) -> Result<RunConfig> {
    let mut cfg = match &args.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(raw) = env_seed {
        let seed = raw
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("{SEED_ENV} must be an unsigned integer, got `{raw}`")))?;
        set_seed(&mut cfg, seed);
    }
    if let Some(seed) = args.seed {
        set_seed(&mut cfg, seed);
    }
    let t = &mut cfg.train;
    macro_rules! apply {
        ($($flag:ident => $field:expr),* $(,)?) => {
            $(if let Some(v) = args.$flag { $field = v; })*
        };
    }
    apply! {
        epochs => t.epochs,
        pretrain_epochs => t.pretrain_epochs,
        batch_size => t.batch_size,
        lr => t.lr,
        latent_dim => t.latent_dim,
        z_dim => t.z_dim,
        lambda_corr => t.lambda_corr,
        alpha => cfg.eval.alpha,
        interval => cfg.eval.interval,
    }
    if args.ablation_medgan {
        cfg.train.ablation_medgan = true;
    }
    if let Some(dir) = &args.out_dir {
        cfg.out_dir = dir.clone();
    }
    if let Some(p) = &args.profiles {
        cfg.profiles = Some(p.clone());
    }
    if args.synth && cfg.synth.is_none() {
        cfg.synth = Some(SynthSpec { seed: cfg.train.seed, ..Default::default() });
    }
    cfg.validate()?;
    Ok(cfg)
}

fn set_seed(cfg: &mut RunConfig, seed: u64) {
    cfg.train.seed = seed;
    if let Some(spec) = &mut cfg.synth {
        spec.seed = seed;
    }
}

/// Creates the output directory and writes `config.json` into it.
pub fn echo_config(cfg: &RunConfig) -> Result<PathBuf> {
    fs::create_dir_all(&cfg.out_dir).map_err(|e| Error::io(&cfg.out_dir, e))?;
    let path = cfg.out_dir.join("config.json");
    let mut text = serde_json::to_string_pretty(cfg).map_err(|e| Error::Format(e.to_string()))?;
    text.push('\n');
    fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// Binary records plus what is needed to render them.
#[derive(Debug, Clone)]
pub struct LoadedData {
    pub records: RecordBatch,
    pub vocab: Option<Vocabulary>,
    /// Side length when records are square images.
    pub image_side: Option<usize>,
}

pub fn load_dataset(source: DataSource<'_>) -> Result<LoadedData> {
    match source {
        DataSource::Profiles(path) => {
            let raw = load_profiles(path)?;
            let (kept, report) = preprocess_profiles(&raw);
            eprintln!(
                "profiles: kept {} of {} (long token {}, empty skills {}, empty profession {})",
                report.kept,
                raw.len(),
                report.long_token,
                report.empty_skills,
                report.empty_profession
            );
            let vocab = build_dictionaries(&kept)?;
            let data = vectorize_profiles(&kept, &vocab)?;
            Ok(LoadedData { records: data.records(), vocab: Some(vocab), image_side: None })
        }
        DataSource::Synth(spec) => {
            let ds = synth_correlated_dataset(spec)?;
            Ok(LoadedData { records: ds.data.records(), vocab: Some(ds.data.vocab), image_side: None })
        }
        DataSource::Mnist(src) => {
            let mut mnist = load_mnist(&src.images, &src.labels)?;
            if let Some(limit) = src.limit {
                mnist = mnist.truncate(limit);
            }
            let binary = binarize_images(&mnist.images, src.threshold);
            let half = binary.ncols() / 2;
            Ok(LoadedData {
                records: RecordBatch::split(binary.view(), half)?,
                vocab: None,
                image_side: (mnist.rows == mnist.cols).then_some(mnist.rows),
            })
        }
    }
}

/// Writes the first generated rows as skill lines or an image grid.
fn write_samples(out_dir: &Path, stem: &str, data: &LoadedData, generated: &Array2<f64>, threshold: f64) -> Result<Option<PathBuf>> {
    let rows = generated.slice(s![..generated.nrows().min(SAMPLE_ROWS), ..]);
    if let Some(vocab) = &data.vocab {
        let x = rows.slice(s![.., ..data.records.x_dim()]).mapv(|v| if v >= threshold { 1.0 } else { 0.0 });
        let path = out_dir.join(format!("{stem}.txt"));
        write_skill_samples(&path, &skill_lines(x.view(), &vocab.skills)?)?;
        return Ok(Some(path));
    }
    if let Some(side) = data.image_side {
        if rows.ncols() == side * side && rows.nrows() > 0 {
            let (w, h, pixels) = image_grid(rows, side, 10)?;
            let path = out_dir.join(format!("{stem}.pgm"));
            write_pgm(&path, w, h, &pixels)?;
            return Ok(Some(path));
        }
    }
    Ok(None)
}

pub fn checkpoint_path(out_dir: &Path, epoch: usize) -> PathBuf {
    out_dir.join(format!("checkpoint_epoch_{epoch:04}.cgan"))
}

/// Full training with a checkpoint, sample dump and report at every
/// interval. Returns the reports.
pub fn run_train(cfg: &RunConfig) -> Result<Vec<EvalReport>> {
    let data = load_dataset(cfg.require_source()?)?;
    echo_config(cfg)?;
    let out_dir = &cfg.out_dir;
    let outcome = train_corrgan_with(&cfg.train, &cfg.eval, &data.records, |model, report, generated| {
        let ckpt = checkpoint_path(out_dir, model.epoch);
        save_checkpoint(&ckpt, &ModelBundle::from_model(model, data.vocab.clone()))?;
        report.artifacts.push(ckpt);
        let stem = format!("samples_epoch_{:04}", model.epoch);
        if let Some(path) = write_samples(out_dir, &stem, &data, generated, cfg.eval.threshold)? {
            report.artifacts.push(path);
        }
        eprintln!(
            "epoch {:>5}  occurrence_mse {:.4e}  cooc_err_abs {:.4e}",
            report.epoch, report.occurrence_mse, report.cooc_err_abs
        );
        Ok(())
    })?;
    let tokens = match cfg.eval.scope {
        EvalScope::DataHalf => data.vocab.as_ref().map(|v| &v.skills),
        EvalScope::FullRecord => None,
    };
    export_report(&outcome.reports, out_dir, tokens)?;
    Ok(outcome.reports)
}

/// Autoencoder pretraining only. Saves `pretrain.cgan` and
/// `pretrain_loss.csv`.
pub fn run_pretrain(cfg: &RunConfig) -> Result<PathBuf> {
    let data = load_dataset(cfg.require_source()?)?;
    echo_config(cfg)?;
    let mut model = CorrGan::new(cfg.train.clone(), data.records.x_dim(), data.records.y_dim())?;
    let history = model.pretrain(&data.records)?.to_vec();
    let mut csv = String::from("epoch,loss\n");
    for (i, loss) in history.iter().enumerate() {
        csv.push_str(&format!("{},{loss}\n", i + 1));
    }
    let loss_path = cfg.out_dir.join("pretrain_loss.csv");
    fs::write(&loss_path, csv).map_err(|e| Error::io(&loss_path, e))?;
    let path = cfg.out_dir.join("pretrain.cgan");
    save_checkpoint(&path, &ModelBundle::from_model(&model, data.vocab))?;
    Ok(path)
}

/// Writes the configured synthetic corpus as profile JSON plus its planted
/// pools.
pub fn run_synthdata(cfg: &RunConfig) -> Result<(PathBuf, PathBuf)> {
    let spec = cfg.synth.clone().unwrap_or_else(|| SynthSpec { seed: cfg.train.seed, ..Default::default() });
    let ds = synth_correlated_dataset(&spec)?;
    let resolved = RunConfig { synth: Some(spec), ..cfg.clone() };
    echo_config(&resolved)?;
    let profiles: Vec<ProfileRecord> = ds.data.to_profiles();
    let path = cfg.out_dir.join("profiles.json");
    let text = serde_json::to_string_pretty(&profiles).map_err(|e| Error::Format(e.to_string()))?;
    fs::write(&path, text + "\n").map_err(|e| Error::io(&path, e))?;

    let pools: Vec<serde_json::Value> = ds
        .pools
        .iter()
        .enumerate()
        .map(|(k, pool)| {
            serde_json::json!({
                "profession": ds.data.vocab.professions.token(k),
                "skills": pool.iter().map(|&j| ds.data.vocab.skills.token(j)).collect::<Vec<_>>(),
            })
        })
        .collect();
    let pools_path = cfg.out_dir.join("pools.json");
    let text = serde_json::to_string_pretty(&pools).map_err(|e| Error::Format(e.to_string()))?;
    fs::write(&pools_path, text + "\n").map_err(|e| Error::io(&pools_path, e))?;
    Ok((path, pools_path))
}

/// Condition row for `generate`: a profession name looked up in the
/// checkpoint's vocabulary.
fn condition_vector(bundle: &ModelBundle, condition: Option<&str>) -> Result<Vec<f64>> {
    let dim = bundle.generator.condition_dim;
    match (condition, &bundle.vocab) {
        (None, _) if dim == 0 => Ok(Vec::new()),
        (Some(_), _) if dim == 0 => Err(Error::InvalidArgument("this checkpoint is unconditional; drop --condition".into())),
        (None, _) => Err(Error::InvalidArgument(format!("this checkpoint needs --condition ({dim} condition values)"))),
        (Some(name), Some(vocab)) => {
            let key = name.trim().to_lowercase();
            let k = vocab.professions.index_of(&key).ok_or_else(|| Error::UnknownToken {
                index: 0,
                token: key.clone(),
                dictionary: "profession",
            })?;
            let mut y = vec![0.0; dim];
            y[k] = 1.0;
            Ok(y)
        }
        (Some(raw), None) => {
            let y = raw
                .split(',')
                .map(|v| v.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|_| Error::InvalidArgument(format!("condition must be comma-separated numbers, got `{raw}`")))?;
            if y.len() != dim {
                return Err(Error::shape("condition length", dim, y.len()));
            }
            Ok(y)
        }
    }
}

/// Output of `generate`.
#[derive(Debug, Clone)]
pub struct GenerateOutput {
    /// Skill lines when the checkpoint carries a vocabulary.
    pub lines: Vec<String>,
    pub raw: Array2<f64>,
}

pub fn run_generate(cfg: &RunConfig, opts: &GenerateArgs) -> Result<GenerateOutput> {
    let bundle = load_checkpoint(&opts.checkpoint)?;
    let y = condition_vector(&bundle, opts.condition.as_deref())?;
    let mut rng = seeded_rng(cfg.train.seed);
    let samples = conditional_generate(&bundle.generator, &bundle.corrnn.decoder, &y, opts.n, opts.threshold, &mut rng)?;
    let x_dim = bundle.corrnn.x_dim();
    let lines = match &bundle.vocab {
        Some(vocab) => skill_lines(samples.binary.slice(s![.., ..x_dim]), &vocab.skills)?,
        None => Vec::new(),
    };
    echo_config(cfg)?;
    if let Some(path) = &opts.dump {
        write_dump(path, &samples.raw.slice(s![.., ..x_dim]).to_owned())?;
    }
    if bundle.vocab.is_some() {
        write_skill_samples(&cfg.out_dir.join("generated.txt"), &lines)?;
    } else {
        let side = (samples.raw.ncols() as f64).sqrt() as usize;
        if side * side == samples.raw.ncols() && opts.n > 0 {
            let (w, h, pixels) = image_grid(samples.raw.view(), side, 10)?;
            write_pgm(&cfg.out_dir.join("generated.pgm"), w, h, &pixels)?;
        }
    }
    Ok(GenerateOutput { lines, raw: samples.raw })
}

/// Sample dumps: one sample per line, comma-separated values.
pub fn write_dump(path: &Path, rows: &Array2<f64>) -> Result<()> {
    let mut text = String::new();
    for row in rows.rows() {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        text.push_str(&cells.join(","));
        text.push('\n');
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn read_dump(path: &Path) -> Result<Array2<f64>> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut values = Vec::new();
    let mut width = None;
    let mut rows = 0;
    for (i, line) in text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty()) {
        let row = line
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Format(format!("{}:{}: {e}", path.display(), i + 1)))?;
        match width {
            None => width = Some(row.len()),
            Some(w) if w != row.len() => {
                return Err(Error::Format(format!(
                    "{}:{}: expected {w} values, found {}",
                    path.display(),
                    i + 1,
                    row.len()
                )))
            }
            _ => {}
        }
        values.extend(row);
        rows += 1;
    }
    Array2::from_shape_vec((rows, width.unwrap_or(0)), values).map_err(|e| Error::Format(e.to_string()))
}

/// Scores a sample dump against the configured training set and writes
/// `metrics.csv` plus a scatter file.
pub fn run_eval(cfg: &RunConfig, samples: &Path) -> Result<EvalReport> {
    let data = load_dataset(cfg.require_source()?)?;
    let generated = read_dump(samples)?;
    let (training, tokens) = match cfg.eval.scope {
        EvalScope::DataHalf => (data.records.x.clone(), data.vocab.as_ref().map(|v| &v.skills)),
        EvalScope::FullRecord => (data.records.joined(), None),
    };
    if generated.ncols() != training.ncols() {
        return Err(Error::shape("sample dump width vs training data", training.ncols(), generated.ncols()));
    }
    if generated.nrows() == 0 {
        return Err(Error::Empty("sample dump"));
    }
    let report = evaluate_samples(0, training.view(), generated.view(), cfg.eval.alpha, cfg.eval.threshold)?;
    echo_config(cfg)?;
    export_report(std::slice::from_ref(&report), &cfg.out_dir, tokens)?;
    Ok(report)
}

/// Inpainting summary.
#[derive(Debug, Clone, PartialEq)]
pub struct InpaintOutput {
    /// Mean agreement between each completion's kept half and the input.
    pub mean_agreement: f64,
    pub grid: PathBuf,
}

/// Completes the first `count` configured MNIST images whose top half is
/// replaced by noise. Writes a grid of `input | completion` pairs.
pub fn run_inpaint(cfg: &RunConfig, opts: &InpaintArgs) -> Result<InpaintOutput> {
    let Some(DataSource::Mnist(_)) = cfg.source()? else {
        return Err(Error::Config("inpaint needs an `mnist` dataset".into()));
    };
    let data = load_dataset(cfg.require_source()?)?;
    let bundle = load_checkpoint(&opts.checkpoint)?;
    let images = data.records.joined();
    let count = opts.count.min(images.nrows());
    if count == 0 {
        return Err(Error::Empty("inpainting images"));
    }
    echo_config(cfg)?;
    let mut rng = substream(cfg.train.seed, 7);
    let mut pairs = Array2::zeros((2 * count, images.ncols()));
    let mut total = 0.0;
    for i in 0..count {
        let image = images.row(i).to_vec();
        let done = inpaint_halves(&bundle.generator, &bundle.corrnn.decoder, &image, &mut rng)?;
        total += done.kept_half_agreement(&image);
        pairs.row_mut(2 * i).assign(&images.row(i));
        pairs.row_mut(2 * i + 1).assign(&done.raw);
    }
    let side = data.image_side.unwrap_or(MNIST_SIDE);
    let (w, h, pixels) = image_grid(pairs.view(), side, 10)?;
    let grid = cfg.out_dir.join("inpainting.pgm");
    write_pgm(&grid, w, h, &pixels)?;
    Ok(InpaintOutput { mean_agreement: total / count as f64, grid })
}

#[derive(Debug, Clone, Args)]
pub struct GenerateArgs {
    /// Checkpoint written by `train` or `pretrain`.
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Profession name, or comma-separated condition values for checkpoints
    /// without a vocabulary.
    #[arg(long)]
    pub condition: Option<String>,
    #[arg(short, long, default_value_t = 10)]
    pub n: usize,
    #[arg(long, default_value_t = 0.5)]
    pub threshold: f64,
    /// Also write the raw data-half values as a sample dump for `eval`.
    #[arg(long)]
    pub dump: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct InpaintArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long, default_value_t = 50)]
    pub count: usize,
}

#[derive(Debug, Parser)]
#[command(name = "corrgan", version, about = "Conditional CorrGAN for correlated binary data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic profile corpus and its planted skill pools.
    Synthdata(#[command(flatten)] ConfigArgs),
    /// Pretrain the correlational autoencoder only.
    Pretrain(#[command(flatten)] ConfigArgs),
    /// Pretrain, then train adversarially with periodic checkpoints.
    Train(#[command(flatten)] ConfigArgs),
    /// Sample from a checkpoint.
    Generate {
        #[command(flatten)]
        config: ConfigArgs,
        #[command(flatten)]
        opts: GenerateArgs,
    },
    /// Complete MNIST images from their bottom half.
    Inpaint {
        #[command(flatten)]
        config: ConfigArgs,
        #[command(flatten)]
        opts: InpaintArgs,
    },
    /// Score a sample dump against the training set.
    Eval {
        #[command(flatten)]
        config: ConfigArgs,
        /// Sample dump (one comma-separated row per sample).
        #[arg(long)]
        samples: PathBuf,
    },
}

/// Runs one parsed command, printing results to stdout.
pub fn dispatch(cli: Cli) -> Result<()> {
    let env_seed = std::env::var(SEED_ENV).ok();
    let resolve = |args: &ConfigArgs| resolve_config(args, env_seed.as_deref());
    match cli.command {
        Command::Synthdata(args) => {
            let (profiles, pools) = run_synthdata(&resolve(&args)?)?;
            println!("{}\n{}", profiles.display(), pools.display());
        }
        Command::Pretrain(args) => {
            println!("{}", run_pretrain(&resolve(&args)?)?.display());
        }
        Command::Train(args) => {
            let cfg = resolve(&args)?;
            let reports = run_train(&cfg)?;
            println!("{} checkpoints in {}", reports.len(), cfg.out_dir.display());
        }
        Command::Generate { config, opts } => {
            let out = run_generate(&resolve(&config)?, &opts)?;
            if out.lines.is_empty() {
                println!("{} samples", out.raw.nrows());
            }
            for line in out.lines {
                println!("{line}");
            }
        }
        Command::Inpaint { config, opts } => {
            let out = run_inpaint(&resolve(&config)?, &opts)?;
            println!("mean kept-half agreement {:.4}\n{}", out.mean_agreement, out.grid.display());
        }
        Command::Eval { config, samples } => {
            let r = run_eval(&resolve(&config)?, &samples)?;
            println!(
                "occurrence_mse {:.6e}\ncooc_err_signed {:.6e}\ncooc_err_abs {:.6e}",
                r.occurrence_mse, r.cooc_err_signed, r.cooc_err_abs
            );
        }
    }
    Ok(())
}
