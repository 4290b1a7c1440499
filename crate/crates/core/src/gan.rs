//! Adversarial stage. The generator maps `[noise, condition]` into the
//! autoencoder's latent space, the pretrained decoder turns latents into
//! record probabilities, and the discriminator scores each record paired
//! with the mean of its minibatch. Generator and decoder are updated
//! together while the discriminator is frozen.

use ndarray::{concatenate, s, Array1, Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::corrnn::{pretrain, CorrNn, CorrNnLoss, Decoder, DecoderGrads, PretrainCfg, RecordBatch, ReconstructionLoss, PROB_CLAMP};
use crate::error::{Error, Result};
use crate::metrics::{evaluate_samples, EvalReport};
use crate::nn::{substream, Activation, Mlp, MlpGrads, Optimizer, OptimizerKind, SeededRng, Tensors};

const STREAM_INIT: u64 = 0;
const STREAM_PRETRAIN: u64 = 1;
const STREAM_ADVERSARIAL: u64 = 2;
const STREAM_EVAL: u64 = 3;

/// Training hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainCfg {
    pub batch_size: usize,
    pub epochs: usize,
    pub pretrain_epochs: usize,
    /// Discriminator updates per generator update.
    pub d_steps: usize,
    pub z_dim: usize,
    pub latent_dim: usize,
    pub generator_hidden: Vec<usize>,
    pub discriminator_hidden: Vec<usize>,
    pub lr: f64,
    pub pretrain_lr: f64,
    pub lambda_corr: f64,
    pub reconstruction: ReconstructionLoss,
    pub optimizer: OptimizerKind,
    pub seed: u64,
    /// Pretrain a vanilla autoencoder instead: no correlation term and no
    /// cross reconstruction.
    pub ablation_medgan: bool,
    /// Feed the record's `y` half to the generator next to the noise.
    pub conditional: bool,
    /// Replace the decoded `y` half of synthetic records with the requested
    /// condition, both in the records the discriminator sees during training
    /// and in generated output.
    pub overwrite_condition: bool,
}

impl Default for TrainCfg {
    fn default() -> Self {
        Self {
            batch_size: 100,
            epochs: 1000,
            pretrain_epochs: 150,
            d_steps: 1,
            z_dim: 32,
            latent_dim: 16,
            generator_hidden: vec![128],
            discriminator_hidden: vec![128],
            lr: 1e-3,
            pretrain_lr: 1e-3,
            lambda_corr: 1.0,
            reconstruction: ReconstructionLoss::CrossEntropy,
            optimizer: OptimizerKind::Adam,
            seed: 0,
            ablation_medgan: false,
            conditional: true,
            overwrite_condition: false,
        }
    }
}

impl TrainCfg {
    pub fn validate(&self) -> Result<()> {
        let counts = [
            ("batch_size", self.batch_size),
            ("d_steps", self.d_steps),
            ("z_dim", self.z_dim),
            ("latent_dim", self.latent_dim),
        ];
        for (name, v) in counts {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be at least 1")));
            }
        }
        if self.batch_size < 2 {
            return Err(Error::Config("batch_size must be at least 2".into()));
        }
        if self.generator_hidden.contains(&0) || self.discriminator_hidden.contains(&0) {
            return Err(Error::Config("hidden layer widths must be positive".into()));
        }
        for (name, lr) in [("lr", self.lr), ("pretrain_lr", self.pretrain_lr)] {
            if !(lr > 0.0 && lr.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive, got {lr}")));
            }
        }
        Ok(())
    }

    pub fn pretrain_cfg(&self) -> PretrainCfg {
        let loss = if self.ablation_medgan {
            CorrNnLoss {
                reconstruction: self.reconstruction,
                ..CorrNnLoss::vanilla_autoencoder()
            }
        } else {
            CorrNnLoss {
                lambda_corr: self.lambda_corr,
                cross_reconstruction: true,
                reconstruction: self.reconstruction,
            }
        };
        PretrainCfg {
            epochs: self.pretrain_epochs,
            batch_size: self.batch_size,
            lr: self.pretrain_lr,
            optimizer: self.optimizer,
            loss,
        }
    }
}

/// Which record columns the checkpoint metrics look at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EvalScope {
    /// Only the data half `x` (skills).
    #[default]
    DataHalf,
    FullRecord,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalCfg {
    /// Epochs between checkpoints.
    pub interval: usize,
    /// Co-occurrence threshold.
    pub alpha: f64,
    /// Binarization threshold for generated samples.
    pub threshold: f64,
    /// Generated samples per checkpoint; defaults to the dataset size.
    pub samples: Option<usize>,
    pub scope: EvalScope,
}

impl Default for EvalCfg {
    fn default() -> Self {
        Self {
            interval: 100,
            alpha: 0.5,
            threshold: 0.5,
            samples: None,
            scope: EvalScope::DataHalf,
        }
    }
}

impl EvalCfg {
    pub fn validate(&self) -> Result<()> {
        if self.interval == 0 {
            return Err(Error::Config("eval interval must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(Error::Config(format!("alpha must lie in [0, 1], got {}", self.alpha)));
        }
        if !(self.threshold > 0.0 && self.threshold < 1.0) {
            return Err(Error::Config(format!("threshold must lie in (0, 1), got {}", self.threshold)));
        }
        Ok(())
    }
}

/// Maps `[z, condition]` to a latent vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Generator {
    pub net: Mlp,
    pub z_dim: usize,
    pub condition_dim: usize,
}

impl Generator {
    /// ReLU hidden layers and a tanh output of width `latent_dim`.
    pub fn new<R: Rng + ?Sized>(
        z_dim: usize,
        condition_dim: usize,
        hidden: &[usize],
        latent_dim: usize,
        rng: &mut R,
    ) -> Result<Self> {
        let dims: Vec<usize> = std::iter::once(z_dim + condition_dim)
            .chain(hidden.iter().copied())
            .chain(std::iter::once(latent_dim))
            .collect();
        let mut acts = vec![Activation::Relu; hidden.len()];
        acts.push(Activation::Tanh);
        Self::from_net(Mlp::init(&dims, &acts, rng)?, z_dim)
    }

    pub fn from_net(net: Mlp, z_dim: usize) -> Result<Self> {
        if z_dim == 0 || z_dim > net.in_dim() {
            return Err(Error::InvalidArgument(format!(
                "noise width {z_dim} does not fit generator input {}",
                net.in_dim()
            )));
        }
        let condition_dim = net.in_dim() - z_dim;
        Ok(Self { net, z_dim, condition_dim })
    }

    pub fn latent_dim(&self) -> usize {
        self.net.out_dim()
    }

    fn input(&self, noise: &Array2<f64>, conditions: &Array2<f64>) -> Result<Array2<f64>> {
        if noise.ncols() != self.z_dim {
            return Err(Error::shape("generator noise width", self.z_dim, noise.ncols()));
        }
        if conditions.ncols() != self.condition_dim {
            return Err(Error::shape("generator condition width", self.condition_dim, conditions.ncols()));
        }
        if noise.nrows() != conditions.nrows() {
            return Err(Error::shape("generator batch rows", noise.nrows(), conditions.nrows()));
        }
        Ok(concatenate![Axis(1), *noise, *conditions])
    }
}

/// Scores `[record, batch mean]` pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct Discriminator {
    pub net: Mlp,
}

impl Discriminator {
    /// ReLU hidden layers and a sigmoid output; input width `2 * record_dim`.
    pub fn new<R: Rng + ?Sized>(record_dim: usize, hidden: &[usize], rng: &mut R) -> Result<Self> {
        let dims: Vec<usize> = std::iter::once(2 * record_dim)
            .chain(hidden.iter().copied())
            .chain(std::iter::once(1))
            .collect();
        let mut acts = vec![Activation::Relu; hidden.len()];
        acts.push(Activation::Sigmoid);
        Self::from_net(Mlp::init(&dims, &acts, rng)?)
    }

    pub fn from_net(net: Mlp) -> Result<Self> {
        if net.layers().last().map(|l| l.activation) != Some(Activation::Sigmoid) {
            return Err(Error::InvalidArgument("discriminator must end in a sigmoid".into()));
        }
        if !net.in_dim().is_multiple_of(2) || net.out_dim() != 1 {
            return Err(Error::InvalidArgument(format!(
                "discriminator needs an even input width and one output, got {} -> {}",
                net.in_dim(),
                net.out_dim()
            )));
        }
        Ok(Self { net })
    }

    pub fn record_dim(&self) -> usize {
        self.net.in_dim() / 2
    }
}

/// i.i.d. standard normal noise.
pub fn sample_noise<R: Rng + ?Sized>(m: usize, z_dim: usize, rng: &mut R) -> Result<Array2<f64>> {
    if m == 0 || z_dim == 0 {
        return Err(Error::InvalidArgument(format!("noise batch must be non-empty, got {m}x{z_dim}")));
    }
    Ok(Array2::from_shape_simple_fn((m, z_dim), || rng.sample(StandardNormal)))
}

/// Each row followed by the mean of all rows.
pub fn pair_with_mean(batch: ArrayView2<f64>) -> Array2<f64> {
    let (m, d) = batch.dim();
    let mean = batch.mean_axis(Axis(0)).unwrap_or_else(|| Array1::zeros(d));
    let mut out = Array2::zeros((m, 2 * d));
    out.slice_mut(s![.., ..d]).assign(&batch);
    out.slice_mut(s![.., d..]).assign(&mean);
    out
}

fn clamp_prob(p: f64) -> f64 {
    p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP)
}

/// What fills the condition half of a synthetic record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ConditionHalf {
    /// The decoder's own output.
    #[default]
    Decoded,
    /// The condition that was fed to the generator. No gradient flows
    /// through the overwritten coordinates.
    Overwritten,
}

struct SynthesisPass {
    g_cache: crate::nn::ForwardCache,
    decoded: Array2<f64>,
    records: Array2<f64>,
}

fn synthesize(
    generator: &Generator,
    decoder: &Decoder,
    noise: &Array2<f64>,
    conditions: &Array2<f64>,
    half: ConditionHalf,
) -> Result<SynthesisPass> {
    if generator.latent_dim() != decoder.latent_dim() {
        return Err(Error::shape("generator output vs decoder latent", decoder.latent_dim(), generator.latent_dim()));
    }
    let g_cache = generator.net.forward(&generator.input(noise, conditions)?)?;
    let decoded = decoder.decode_batch(g_cache.output())?;
    let mut records = decoded.clone();
    if half == ConditionHalf::Overwritten {
        let c = generator.condition_dim;
        if c == 0 || c >= records.ncols() {
            return Err(Error::InvalidArgument(format!(
                "cannot overwrite a {c}-wide condition in {}-wide records",
                records.ncols()
            )));
        }
        let start = records.ncols() - c;
        records.slice_mut(s![.., start..]).assign(conditions);
    }
    Ok(SynthesisPass { g_cache, decoded, records })
}

/// Continuous synthetic records `Dec(G([z, y]))`, one per row, with the
/// trailing condition half filled according to `half`.
pub fn synthesize_batch(
    generator: &Generator,
    decoder: &Decoder,
    noise: &Array2<f64>,
    conditions: &Array2<f64>,
    half: ConditionHalf,
) -> Result<Array2<f64>> {
    Ok(synthesize(generator, decoder, noise, conditions, half)?.records)
}

/// `D([row, mean])`, clamped away from 0 and 1.
pub fn discriminate(d: &Discriminator, row: &[f64], mean: &[f64]) -> Result<f64> {
    let dim = d.record_dim();
    if row.len() != dim || mean.len() != dim {
        return Err(Error::shape("discriminator input", dim, format!("{} + {}", row.len(), mean.len())));
    }
    let input = Array2::from_shape_vec((1, 2 * dim), row.iter().chain(mean).copied().collect())
        .expect("one row");
    Ok(clamp_prob(d.net.predict(&input)?[[0, 0]]))
}

fn check_pair(d: &Discriminator, real: &Array2<f64>, synth: &Array2<f64>) -> Result<()> {
    if real.dim() != synth.dim() {
        return Err(Error::shape("real vs synthetic batch", format!("{:?}", real.dim()), format!("{:?}", synth.dim())));
    }
    if real.ncols() != d.record_dim() {
        return Err(Error::shape("discriminator record width", d.record_dim(), real.ncols()));
    }
    if real.nrows() < 2 {
        return Err(Error::InvalidArgument("adversarial batches need at least 2 rows".into()));
    }
    Ok(())
}

/// Discriminator objective
/// `(1/m) sum log D(t_i, mean t) + log(1 - D(tz_i, mean tz))` and its
/// gradient w.r.t. the discriminator parameters.
///
/// The clamp guards the reported value only. Gradients are those of the
/// unclamped log-likelihood, taken at the sigmoid's logit, so a confident
/// discriminator still passes signal.
pub fn discriminator_grads(d: &Discriminator, real: &Array2<f64>, synth: &Array2<f64>) -> Result<(f64, MlpGrads)> {
    check_pair(d, real, synth)?;
    let m = real.nrows();
    let inputs = concatenate![Axis(0), pair_with_mean(real.view()), pair_with_mean(synth.view())];
    let cache = d.net.forward(&inputs)?;
    let out = cache.output();
    let scale = 1.0 / m as f64;
    let mut objective = 0.0;
    let mut upstream = Array2::zeros((2 * m, 1));
    for i in 0..m {
        let p = out[[i, 0]];
        objective += clamp_prob(p).ln();
        upstream[[i, 0]] = scale * (1.0 - p);
        let q = out[[m + i, 0]];
        objective += (1.0 - clamp_prob(q)).ln();
        upstream[[m + i, 0]] = -scale * q;
    }
    objective *= scale;
    if !objective.is_finite() {
        return Err(Error::NonFinite("discriminator objective"));
    }
    let (grads, _) = d.net.backward_from_logits(&cache, &upstream)?;
    Ok((objective, grads))
}

pub fn discriminator_objective(d: &Discriminator, real: &Array2<f64>, synth: &Array2<f64>) -> Result<f64> {
    check_pair(d, real, synth)?;
    let m = real.nrows() as f64;
    let p_real = d.net.predict(&pair_with_mean(real.view()))?;
    let p_fake = d.net.predict(&pair_with_mean(synth.view()))?;
    let total: f64 = p_real.iter().map(|&p| clamp_prob(p).ln()).sum::<f64>()
        + p_fake.iter().map(|&q| (1.0 - clamp_prob(q)).ln()).sum::<f64>();
    Ok(total / m)
}

/// One ascent step on the discriminator objective. Returns the objective
/// before the update.
pub fn discriminator_step(
    d: &mut Discriminator,
    real: &Array2<f64>,
    synth: &Array2<f64>,
    opt: &mut Optimizer,
) -> Result<f64> {
    let (objective, grads) = discriminator_grads(d, real, synth)?;
    opt.step(&mut d.net, &grads)?;
    Ok(objective)
}

/// Generator and decoder as one parameter set, generator first.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorDecoder {
    pub generator: Generator,
    pub decoder: Decoder,
}

/// Gradients laid out like [`GeneratorDecoder`].
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorGrads {
    pub generator: MlpGrads,
    pub decoder: DecoderGrads,
}

impl Tensors for GeneratorDecoder {
    fn tensors(&self) -> Vec<&[f64]> {
        let mut v = self.generator.net.tensors();
        v.extend(self.decoder.tensors());
        v
    }

    fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let mut v = self.generator.net.tensors_mut();
        v.extend(self.decoder.tensors_mut());
        v
    }
}

impl Tensors for GeneratorGrads {
    fn tensors(&self) -> Vec<&[f64]> {
        let mut v = self.generator.tensors();
        v.extend(self.decoder.tensors());
        v
    }

    fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let mut v = self.generator.tensors_mut();
        v.extend(self.decoder.tensors_mut());
        v
    }
}

/// Generator objective `(1/m) sum log D(tz_i, mean tz)` with its gradients
/// w.r.t. the generator and decoder parameters. The discriminator only
/// passes gradient through. Clamping is handled as in
/// [`discriminator_grads`].
pub fn generator_grads(
    generator: &Generator,
    decoder: &Decoder,
    d: &Discriminator,
    noise: &Array2<f64>,
    conditions: &Array2<f64>,
    half: ConditionHalf,
) -> Result<(f64, GeneratorGrads)> {
    let pass = synthesize(generator, decoder, noise, conditions, half)?;
    let (m, t_dim) = pass.records.dim();
    if t_dim != d.record_dim() {
        return Err(Error::shape("discriminator record width", d.record_dim(), t_dim));
    }
    if m < 2 {
        return Err(Error::InvalidArgument("adversarial batches need at least 2 rows".into()));
    }
    let d_cache = d.net.forward(&pair_with_mean(pass.records.view()))?;
    let p = d_cache.output();
    let scale = 1.0 / m as f64;
    let mut objective = 0.0;
    let mut upstream = Array2::zeros((m, 1));
    for i in 0..m {
        objective += clamp_prob(p[[i, 0]]).ln();
        upstream[[i, 0]] = scale * (1.0 - p[[i, 0]]);
    }
    objective *= scale;
    if !objective.is_finite() {
        return Err(Error::NonFinite("generator objective"));
    }

    let d_input = d.net.input_gradient_from_logits(&d_cache, &upstream)?;
    // Every row also feeds the batch mean, so it collects 1/m of the
    // gradient arriving at the mean half of each pair.
    let mean_grad = d_input.slice(s![.., t_dim..]).sum_axis(Axis(0)) * scale;
    let mut d_output = &d_input.slice(s![.., ..t_dim]) + &mean_grad;
    if half == ConditionHalf::Overwritten {
        d_output.slice_mut(s![.., t_dim - generator.condition_dim..]).fill(0.0);
    }

    let mut dec_grads = decoder.zero_grads();
    let hidden = pass.g_cache.output();
    let d_hidden = decoder.backward(hidden, &pass.decoded, d_output, &mut dec_grads);
    let (g_grads, _) = generator.net.backward(&pass.g_cache, &d_hidden)?;
    Ok((objective, GeneratorGrads { generator: g_grads, decoder: dec_grads }))
}

pub fn generator_objective(
    generator: &Generator,
    decoder: &Decoder,
    d: &Discriminator,
    noise: &Array2<f64>,
    conditions: &Array2<f64>,
    half: ConditionHalf,
) -> Result<f64> {
    let synth = synthesize_batch(generator, decoder, noise, conditions, half)?;
    let p = d.net.predict(&pair_with_mean(synth.view()))?;
    Ok(p.iter().map(|&v| clamp_prob(v).ln()).sum::<f64>() / synth.nrows() as f64)
}

/// One joint ascent step on the generator and decoder with `d` frozen.
/// Returns the objective before the update.
#[allow(clippy::too_many_arguments)]
pub fn generator_step(
    generator: &mut Generator,
    decoder: &mut Decoder,
    d: &Discriminator,
    noise: &Array2<f64>,
    conditions: &Array2<f64>,
    half: ConditionHalf,
    g_opt: &mut Optimizer,
    dec_opt: &mut Optimizer,
) -> Result<f64> {
    let (objective, grads) = generator_grads(generator, decoder, d, noise, conditions, half)?;
    g_opt.step(&mut generator.net, &grads.generator)?;
    dec_opt.step(decoder, &grads.decoder)?;
    Ok(objective)
}

/// Mean objectives over one adversarial epoch.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub d_objective: f64,
    pub g_objective: f64,
}

/// Full model state: autoencoder, generator, discriminator, optimizers.
#[derive(Debug, Clone)]
pub struct CorrGan {
    pub cfg: TrainCfg,
    pub corrnn: CorrNn,
    pub generator: Generator,
    pub discriminator: Discriminator,
    /// Adversarial epochs completed.
    pub epoch: usize,
    pub pretrain_history: Vec<f64>,
    pub history: Vec<EpochStats>,
    g_opt: Optimizer,
    dec_opt: Optimizer,
    d_opt: Optimizer,
    rng: SeededRng,
}

impl CorrGan {
    /// Fresh, randomly initialized networks for records with halves of
    /// width `x_dim` and `y_dim`.
    pub fn new(cfg: TrainCfg, x_dim: usize, y_dim: usize) -> Result<Self> {
        cfg.validate()?;
        let mut rng = substream(cfg.seed, STREAM_INIT);
        let corrnn = CorrNn::init(x_dim, y_dim, cfg.latent_dim, Activation::Tanh, Activation::Sigmoid, &mut rng)?;
        let condition_dim = if cfg.conditional { y_dim } else { 0 };
        let generator = Generator::new(cfg.z_dim, condition_dim, &cfg.generator_hidden, cfg.latent_dim, &mut rng)?;
        let discriminator = Discriminator::new(x_dim + y_dim, &cfg.discriminator_hidden, &mut rng)?;
        Ok(Self::from_parts(cfg, corrnn, generator, discriminator))
    }

    /// Wraps existing networks with fresh optimizer state.
    pub fn from_parts(cfg: TrainCfg, corrnn: CorrNn, generator: Generator, discriminator: Discriminator) -> Self {
        let g_opt = Optimizer::new(cfg.optimizer, cfg.lr, true, &generator.net);
        let dec_opt = Optimizer::new(cfg.optimizer, cfg.lr, true, &corrnn.decoder);
        let d_opt = Optimizer::new(cfg.optimizer, cfg.lr, true, &discriminator.net);
        let rng = substream(cfg.seed, STREAM_ADVERSARIAL);
        Self {
            cfg,
            corrnn,
            generator,
            discriminator,
            epoch: 0,
            pretrain_history: Vec::new(),
            history: Vec::new(),
            g_opt,
            dec_opt,
            d_opt,
            rng,
        }
    }

    fn check_data(&self, data: &RecordBatch) -> Result<()> {
        if data.is_empty() {
            return Err(Error::Empty("training dataset"));
        }
        if data.len() < 2 {
            return Err(Error::InvalidArgument("training needs at least 2 records".into()));
        }
        if data.x_dim() != self.corrnn.x_dim() || data.y_dim() != self.corrnn.y_dim() {
            return Err(Error::shape(
                "training records",
                format!("{}+{}", self.corrnn.x_dim(), self.corrnn.y_dim()),
                format!("{}+{}", data.x_dim(), data.y_dim()),
            ));
        }
        Ok(())
    }

    /// Autoencoder pretraining for `cfg.pretrain_epochs`.
    pub fn pretrain(&mut self, data: &RecordBatch) -> Result<&[f64]> {
        self.check_data(data)?;
        let mut rng = substream(self.cfg.seed, STREAM_PRETRAIN);
        self.pretrain_history = pretrain(&mut self.corrnn, data, &self.cfg.pretrain_cfg(), &mut rng)?;
        Ok(&self.pretrain_history)
    }

    /// Overwriting applies in training and generation alike.
    pub fn condition_half(&self) -> ConditionHalf {
        if self.cfg.overwrite_condition && self.generator.condition_dim == self.corrnn.y_dim() {
            ConditionHalf::Overwritten
        } else {
            ConditionHalf::Decoded
        }
    }

    fn conditions_of(&self, y: &Array2<f64>) -> Array2<f64> {
        if self.generator.condition_dim == 0 {
            Array2::zeros((y.nrows(), 0))
        } else {
            y.clone()
        }
    }

    /// One pass over `data` in random minibatches: `d_steps` discriminator
    /// updates then one generator/decoder update per batch.
    pub fn train_epoch(&mut self, data: &RecordBatch) -> Result<EpochStats> {
        self.check_data(data)?;
        let epoch = self.epoch + 1;
        let diverged = |e: Error| Error::Divergence { epoch, reason: e.to_string() };
        let m = self.cfg.batch_size.min(data.len());
        let half = self.condition_half();
        let mut order: Vec<usize> = (0..data.len()).collect();
        order.shuffle(&mut self.rng);

        let (mut d_total, mut g_total, mut batches) = (0.0, 0.0, 0usize);
        for chunk in order.chunks(m) {
            if chunk.len() < 2 {
                continue;
            }
            let rows = chunk.len();
            for step in 0..self.cfg.d_steps {
                let real = if step == 0 {
                    data.select(chunk)
                } else {
                    let idx: Vec<usize> = (0..rows).map(|_| self.rng.random_range(0..data.len())).collect();
                    data.select(&idx)
                };
                let noise = sample_noise(rows, self.generator.z_dim, &mut self.rng)?;
                let synth = synthesize_batch(&self.generator, &self.corrnn.decoder, &noise, &self.conditions_of(&real.y), half)
                    .map_err(diverged)?;
                d_total += discriminator_step(&mut self.discriminator, &real.joined(), &synth, &mut self.d_opt)
                    .map_err(diverged)?;
            }
            let noise = sample_noise(rows, self.generator.z_dim, &mut self.rng)?;
            let idx: Vec<usize> = (0..rows).map(|_| self.rng.random_range(0..data.len())).collect();
            let conditions = self.conditions_of(&data.y.select(Axis(0), &idx));
            g_total += generator_step(
                &mut self.generator,
                &mut self.corrnn.decoder,
                &self.discriminator,
                &noise,
                &conditions,
                half,
                &mut self.g_opt,
                &mut self.dec_opt,
            )
            .map_err(diverged)?;
            batches += 1;
        }
        let stats = EpochStats {
            epoch,
            d_objective: d_total / (batches * self.cfg.d_steps) as f64,
            g_objective: g_total / batches as f64,
        };
        self.epoch = epoch;
        self.history.push(stats);
        Ok(stats)
    }

    /// Continuous records for the given condition rows.
    pub fn generate_raw<R: Rng + ?Sized>(&self, conditions: &Array2<f64>, rng: &mut R) -> Result<Array2<f64>> {
        if conditions.nrows() == 0 {
            return Ok(Array2::zeros((0, self.corrnn.record_dim())));
        }
        let noise = sample_noise(conditions.nrows(), self.generator.z_dim, rng)?;
        synthesize_batch(&self.generator, &self.corrnn.decoder, &noise, conditions, self.condition_half())
    }

    /// Generates one sample per evaluation slot, conditioned on the
    /// training rows' `y` halves in order (cycling), and scores the result.
    pub fn evaluate(&self, data: &RecordBatch, eval: &EvalCfg) -> Result<(EvalReport, Array2<f64>)> {
        self.check_data(data)?;
        let count = eval.samples.unwrap_or(data.len());
        let idx: Vec<usize> = (0..count).map(|i| i % data.len()).collect();
        let conditions = self.conditions_of(&data.y.select(Axis(0), &idx));
        let mut rng = substream(self.cfg.seed, STREAM_EVAL);
        let generated = self.generate_raw(&conditions, &mut rng)?;
        let report = match eval.scope {
            EvalScope::DataHalf => {
                let gen = generated.slice(s![.., ..data.x_dim()]);
                evaluate_samples(self.epoch, data.x.view(), gen, eval.alpha, eval.threshold)?
            }
            EvalScope::FullRecord => {
                evaluate_samples(self.epoch, data.joined().view(), generated.view(), eval.alpha, eval.threshold)?
            }
        };
        Ok((report, generated))
    }
}

/// Result of [`train_corrgan`].
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: CorrGan,
    pub reports: Vec<EvalReport>,
}

/// Pretraining followed by adversarial training, with a report at every
/// `eval.interval`-th epoch and at the final epoch.
pub fn train_corrgan(cfg: &TrainCfg, eval: &EvalCfg, data: &RecordBatch) -> Result<TrainOutcome> {
    train_corrgan_with(cfg, eval, data, |_, _, _| Ok(()))
}

/// Like [`train_corrgan`], calling `on_checkpoint` with the model, the
/// report and the generated samples at every checkpoint.
pub fn train_corrgan_with<F>(cfg: &TrainCfg, eval: &EvalCfg, data: &RecordBatch, mut on_checkpoint: F) -> Result<TrainOutcome>
where
    F: FnMut(&CorrGan, &mut EvalReport, &Array2<f64>) -> Result<()>,
{
    eval.validate()?;
    let mut model = CorrGan::new(cfg.clone(), data.x_dim(), data.y_dim())?;
    model.pretrain(data)?;
    let mut reports = Vec::new();
    for epoch in 1..=cfg.epochs {
        model.train_epoch(data)?;
        if epoch % eval.interval == 0 || epoch == cfg.epochs {
            let (mut report, generated) = model.evaluate(data, eval)?;
            on_checkpoint(&model, &mut report, &generated)?;
            reports.push(report);
        }
    }
    Ok(TrainOutcome { model, reports })
}

/// Generated records for a single condition.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedSamples {
    pub condition: Vec<f64>,
    pub raw: Array2<f64>,
    /// `raw >= threshold`
    pub binary: Array2<f64>,
}

pub fn conditional_generate<R: Rng + ?Sized>(
    generator: &Generator,
    decoder: &Decoder,
    condition: &[f64],
    n: usize,
    threshold: f64,
    rng: &mut R,
) -> Result<GeneratedSamples> {
    if condition.len() != generator.condition_dim {
        return Err(Error::shape("condition length", generator.condition_dim, condition.len()));
    }
    if !(threshold > 0.0 && threshold < 1.0) {
        return Err(Error::InvalidArgument(format!("threshold must lie in (0, 1), got {threshold}")));
    }
    let raw = if n == 0 {
        Array2::zeros((0, decoder.record_dim()))
    } else {
        let cond = Array2::from_shape_fn((n, condition.len()), |(_, j)| condition[j]);
        let noise = sample_noise(n, generator.z_dim, rng)?;
        synthesize_batch(generator, decoder, &noise, &cond, ConditionHalf::Decoded)?
    };
    let binary = raw.mapv(|v| if v >= threshold { 1.0 } else { 0.0 });
    Ok(GeneratedSamples {
        condition: condition.to_vec(),
        raw,
        binary,
    })
}

/// Completion of an image whose first half was replaced by noise.
#[derive(Debug, Clone, PartialEq)]
pub struct Inpainting {
    pub raw: Array1<f64>,
    pub binary: Array1<f64>,
}

impl Inpainting {
    /// Fraction of second-half pixels of the binarized completion that equal
    /// the conditioning image.
    pub fn kept_half_agreement(&self, image: &[f64]) -> f64 {
        let half = image.len() / 2;
        let same = self.binary.slice(s![half..]).iter().zip(&image[half..]).filter(|(a, b)| a == b).count();
        same as f64 / (image.len() - half) as f64
    }
}

/// Feeds `[noise, image[half..]]` to the inpainting generator and decodes a
/// full image.
pub fn inpaint_halves<R: Rng + ?Sized>(
    generator: &Generator,
    decoder: &Decoder,
    image: &[f64],
    rng: &mut R,
) -> Result<Inpainting> {
    if image.len() != decoder.record_dim() || image.len() != generator.net.in_dim() {
        return Err(Error::shape("inpainting image length", decoder.record_dim(), image.len()));
    }
    let half = image.len() / 2;
    if generator.z_dim != half {
        return Err(Error::shape("inpainting noise width", half, generator.z_dim));
    }
    let cond = Array2::from_shape_vec((1, image.len() - half), image[half..].to_vec()).expect("one row");
    let noise = sample_noise(1, half, rng)?;
    let raw = synthesize_batch(generator, decoder, &noise, &cond, ConditionHalf::Decoded)?.row(0).to_owned();
    let binary = raw.mapv(|v| if v >= 0.5 { 1.0 } else { 0.0 });
    Ok(Inpainting { raw, binary })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{finite_diff_grad, max_relative_error, seeded_rng};
    use ndarray::array;

    /// |t| = 6 (4 + 2), h = 3, z = 2, m = 4
    fn toy(seed: u64) -> (Generator, CorrNn, Discriminator) {
        let mut rng = seeded_rng(seed);
        let ae = CorrNn::init(4, 2, 3, Activation::Tanh, Activation::Sigmoid, &mut rng).unwrap();
        let g = Generator::new(2, 2, &[5], 3, &mut rng).unwrap();
        let d = Discriminator::new(6, &[7], &mut rng).unwrap();
        (g, ae, d)
    }

    fn toy_real() -> Array2<f64> {
        array![
            [1.0, 0.0, 1.0, 1.0, 1.0, 0.0],
            [0.0, 1.0, 1.0, 0.0, 0.0, 1.0],
            [1.0, 1.0, 0.0, 0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0, 1.0, 0.0, 1.0]
        ]
    }

    #[test]
    fn noise_moments_and_determinism() {
        let z = sample_noise(10_000, 1, &mut seeded_rng(3)).unwrap();
        let mean = z.mean().unwrap();
        let var = z.mapv(|v| (v - mean) * (v - mean)).sum() / 9_999.0;
        assert!(mean.abs() < 0.05, "{mean}");
        assert!((0.9..=1.1).contains(&var), "{var}");
        assert_eq!(sample_noise(4, 3, &mut seeded_rng(1)).unwrap(), sample_noise(4, 3, &mut seeded_rng(1)).unwrap());
        assert!(sample_noise(4, 0, &mut seeded_rng(1)).is_err());
    }

    #[test]
    fn zero_networks_synthesize_half() {
        let g = Generator::from_net(Mlp::zeros(&[3, 4, 2], &[Activation::Relu, Activation::Tanh]).unwrap(), 2).unwrap();
        let ae = CorrNn::zeros(3, 2, 2, Activation::Tanh, Activation::Sigmoid).unwrap();
        let z = sample_noise(5, 2, &mut seeded_rng(0)).unwrap();
        let out = synthesize_batch(&g, &ae.decoder, &z, &Array2::ones((5, 1)), ConditionHalf::Decoded).unwrap();
        assert_eq!(out.dim(), (5, 5));
        assert!(out.iter().all(|&v| v == 0.5));
    }

    #[test]
    fn synthesize_stepwise() {
        // 2-2-2 toy: G is one tanh layer from [z(1), y(1)] to h = 2, decoder to |t| = 2.
        let g = Generator::from_net(
            Mlp::new(vec![crate::nn::DenseLayer {
                weights: array![[0.5, -1.0], [0.25, 0.75]],
                bias: array![0.1, 0.0],
                activation: Activation::Tanh,
            }])
            .unwrap(),
            1,
        )
        .unwrap();
        let mut ae = CorrNn::zeros(1, 1, 2, Activation::Tanh, Activation::Sigmoid).unwrap();
        ae.decoder.w = array![[1.0, 0.0], [0.5, -0.5]];
        ae.decoder.v = array![[0.0, 2.0], [0.0, 0.0]];
        ae.decoder.b = array![0.0, 0.3];
        let out = synthesize_batch(&g, &ae.decoder, &array![[0.4]], &array![[1.0]], ConditionHalf::Decoded).unwrap();
        let h0 = (0.5 * 0.4 - 1.0 + 0.1f64).tanh();
        let h1 = (0.25 * 0.4 + 0.75f64).tanh();
        let e0 = crate::nn::sigmoid(h0 + 2.0 * h1);
        let e1 = crate::nn::sigmoid(0.5 * h0 - 0.5 * h1 + 0.3);
        assert!((out[[0, 0]] - e0).abs() < 1e-15);
        assert!((out[[0, 1]] - e1).abs() < 1e-15);
    }

    #[test]
    fn overwritten_condition_half() {
        let (g, ae, _) = toy(1);
        let z = sample_noise(3, 2, &mut seeded_rng(2)).unwrap();
        let y = array![[1.0, 0.0], [0.0, 1.0], [1.0, 0.0]];
        let decoded = synthesize_batch(&g, &ae.decoder, &z, &y, ConditionHalf::Decoded).unwrap();
        let forced = synthesize_batch(&g, &ae.decoder, &z, &y, ConditionHalf::Overwritten).unwrap();
        assert_eq!(forced.slice(s![.., 4..]), y);
        assert_eq!(forced.slice(s![.., ..4]), decoded.slice(s![.., ..4]));
        let unconditional = Generator::new(2, 0, &[3], 3, &mut seeded_rng(0)).unwrap();
        let none = Array2::zeros((3, 0));
        assert!(synthesize_batch(&unconditional, &ae.decoder, &z, &none, ConditionHalf::Overwritten).is_err());
    }

    #[test]
    fn discriminate_range_and_zero_net() {
        let d = Discriminator::from_net(Mlp::zeros(&[6, 4, 1], &[Activation::Relu, Activation::Sigmoid]).unwrap()).unwrap();
        assert_eq!(discriminate(&d, &[1.0, 0.0, 1.0], &[0.5, 0.5, 0.5]).unwrap(), 0.5);
        let (_, _, d) = toy(4);
        let p = discriminate(&d, &[1.0, 0.0, 1.0, 0.0, 1.0, 0.0], &[0.2; 6]).unwrap();
        assert!(p > 0.0 && p < 1.0);
        assert!(discriminate(&d, &[1.0], &[0.2; 6]).is_err());
    }

    #[test]
    fn batch_mean_is_order_invariant() {
        let real = toy_real();
        let paired = pair_with_mean(real.view());
        let mut rev = real.clone();
        rev.invert_axis(Axis(0));
        let paired_rev = pair_with_mean(rev.view());
        assert_eq!(paired.row(0), paired_rev.row(3));
        let mean = real.mean_axis(Axis(0)).unwrap();
        for row in paired.rows() {
            for (a, b) in row.slice(s![6..]).iter().zip(&mean) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn discriminator_gradient_matches_finite_differences() {
        for seed in 0..3 {
            let (g, ae, d) = toy(seed);
            let z = sample_noise(4, 2, &mut seeded_rng(seed + 10)).unwrap();
            let real = toy_real();
            let synth = synthesize_batch(&g, &ae.decoder, &z, &real.slice(s![.., 4..]).to_owned(), ConditionHalf::Decoded).unwrap();
            let (obj, grads) = discriminator_grads(&d, &real, &synth).unwrap();
            assert!(obj <= 0.0);
            let numeric = finite_diff_grad(
                |net: &Mlp| discriminator_objective(&Discriminator { net: net.clone() }, &real, &synth).unwrap(),
                &d.net,
                1e-5,
            )
            .unwrap();
            let err = max_relative_error(&grads, &numeric);
            assert!(err < 1e-4, "seed {seed}: {err}");
        }
    }

    #[test]
    fn generator_gradient_matches_finite_differences() {
        for (seed, half) in (0..4).zip([ConditionHalf::Decoded, ConditionHalf::Overwritten].into_iter().cycle()) {
            let (g, ae, d) = toy(seed);
            let z = sample_noise(4, 2, &mut seeded_rng(seed + 20)).unwrap();
            let y = array![[1.0, 0.0], [0.0, 1.0], [1.0, 0.0], [0.0, 1.0]];
            let (_, grads) = generator_grads(&g, &ae.decoder, &d, &z, &y, half).unwrap();
            let pair = GeneratorDecoder { generator: g.clone(), decoder: ae.decoder.clone() };
            let numeric = finite_diff_grad(
                |p: &GeneratorDecoder| generator_objective(&p.generator, &p.decoder, &d, &z, &y, half).unwrap(),
                &pair,
                1e-5,
            )
            .unwrap();
            let err = max_relative_error(&grads, &numeric);
            assert!(err < 1e-4, "seed {seed}: {err}");
        }
    }

    #[test]
    fn freeze_contracts() {
        let (mut g, mut ae, mut d) = toy(7);
        let z = sample_noise(4, 2, &mut seeded_rng(1)).unwrap();
        let y = array![[1.0, 0.0], [0.0, 1.0], [1.0, 0.0], [0.0, 1.0]];
        let synth = synthesize_batch(&g, &ae.decoder, &z, &y, ConditionHalf::Decoded).unwrap();
        let (g0, dec0, d0) = (g.clone(), ae.decoder.clone(), d.clone());

        let mut d_opt = Optimizer::new(OptimizerKind::Adam, 1e-2, true, &d.net);
        let obj = discriminator_step(&mut d, &toy_real(), &synth, &mut d_opt).unwrap();
        assert!(obj <= 0.0 && obj.is_finite());
        assert_eq!(g, g0);
        assert_eq!(ae.decoder, dec0);
        assert_ne!(d, d0);

        let d1 = d.clone();
        let mut g_opt = Optimizer::new(OptimizerKind::Adam, 1e-2, true, &g.net);
        let mut dec_opt = Optimizer::new(OptimizerKind::Adam, 1e-2, true, &ae.decoder);
        let obj = generator_step(&mut g, &mut ae.decoder, &d, &z, &y, ConditionHalf::Decoded, &mut g_opt, &mut dec_opt).unwrap();
        assert!(obj <= 0.0 && obj.is_finite());
        assert_eq!(d, d1);
        assert_ne!(g, g0);
        assert_ne!(ae.decoder, dec0);
    }

    #[test]
    fn zero_discriminator_blocks_generator_updates() {
        let (mut g, mut ae, _) = toy(2);
        let d = Discriminator::from_net(Mlp::zeros(&[12, 7, 1], &[Activation::Relu, Activation::Sigmoid]).unwrap()).unwrap();
        let z = sample_noise(4, 2, &mut seeded_rng(1)).unwrap();
        let y = Array2::from_elem((4, 2), 0.5);
        let (g0, dec0) = (g.clone(), ae.decoder.clone());
        let mut g_opt = Optimizer::new(OptimizerKind::Adam, 1e-2, true, &g.net);
        let mut dec_opt = Optimizer::new(OptimizerKind::Adam, 1e-2, true, &ae.decoder);
        generator_step(&mut g, &mut ae.decoder, &d, &z, &y, ConditionHalf::Decoded, &mut g_opt, &mut dec_opt).unwrap();
        assert_eq!(g, g0);
        assert_eq!(ae.decoder, dec0);
    }

    #[test]
    fn separable_toy_discriminator_converges() {
        let (_, _, mut d) = toy(9);
        let real = Array2::ones((4, 6));
        let synth = Array2::zeros((4, 6));
        let mut opt = Optimizer::new(OptimizerKind::Adam, 0.1, true, &d.net);
        for _ in 0..200 {
            assert!(discriminator_step(&mut d, &real, &synth, &mut opt).unwrap() <= 0.0);
        }
        let objective = discriminator_objective(&d, &real, &synth).unwrap();
        assert!((-0.01..=0.0).contains(&objective), "{objective}");
    }

    #[test]
    fn generation_tie_rule_and_empty() {
        let g = Generator::from_net(Mlp::zeros(&[4, 3], &[Activation::Tanh]).unwrap(), 2).unwrap();
        let ae = CorrNn::zeros(3, 2, 3, Activation::Tanh, Activation::Sigmoid).unwrap();
        let s = conditional_generate(&g, &ae.decoder, &[1.0, 0.0], 3, 0.5, &mut seeded_rng(0)).unwrap();
        assert!(s.raw.iter().all(|&v| v == 0.5));
        assert!(s.binary.iter().all(|&v| v == 1.0));
        assert_eq!(s.condition, vec![1.0, 0.0]);
        let e = conditional_generate(&g, &ae.decoder, &[1.0, 0.0], 0, 0.5, &mut seeded_rng(0)).unwrap();
        assert_eq!(e.raw.nrows(), 0);
        assert!(conditional_generate(&g, &ae.decoder, &[1.0], 3, 0.5, &mut seeded_rng(0)).is_err());
    }

    #[test]
    fn inpainting_contract() {
        let mut rng = seeded_rng(5);
        let g = Generator::new(8, 8, &[6], 4, &mut rng).unwrap();
        let ae = CorrNn::init(8, 8, 4, Activation::Tanh, Activation::Sigmoid, &mut rng).unwrap();
        let image: Vec<f64> = (0..16).map(|i| (i % 3 == 0) as u8 as f64).collect();
        let a = inpaint_halves(&g, &ae.decoder, &image, &mut rng).unwrap();
        let b = inpaint_halves(&g, &ae.decoder, &image, &mut rng).unwrap();
        assert_eq!(a.raw.len(), 16);
        assert!(a.raw.iter().all(|&v| v > 0.0 && v < 1.0));
        let l1: f64 = a.raw.slice(s![..8]).iter().zip(b.raw.slice(s![..8])).map(|(x, y)| (x - y).abs()).sum();
        assert!(l1 > 0.0);
        assert!((0.0..=1.0).contains(&a.kept_half_agreement(&image)));
        assert!(inpaint_halves(&g, &ae.decoder, &image[..15], &mut rng).is_err());
    }

    fn small_data() -> RecordBatch {
        let ds = crate::data::synth_correlated_dataset(&crate::data::SynthSpec {
            n_professions: 3,
            n_skills: 10,
            pool_size: 3,
            n_samples: 60,
            ..Default::default()
        })
        .unwrap();
        ds.data.records()
    }

    fn small_cfg() -> TrainCfg {
        TrainCfg {
            batch_size: 20,
            epochs: 4,
            pretrain_epochs: 2,
            z_dim: 4,
            latent_dim: 5,
            generator_hidden: vec![8],
            discriminator_hidden: vec![8],
            seed: 3,
            ..Default::default()
        }
    }

    #[test]
    fn zero_epochs_leaves_gan_untouched() {
        let data = small_data();
        let cfg = TrainCfg { epochs: 0, ..small_cfg() };
        let out = train_corrgan(&cfg, &EvalCfg::default(), &data).unwrap();
        let fresh = CorrGan::new(cfg.clone(), data.x_dim(), data.y_dim()).unwrap();
        assert!(out.reports.is_empty());
        assert_eq!(out.model.generator, fresh.generator);
        assert_eq!(out.model.discriminator, fresh.discriminator);
        assert_ne!(out.model.corrnn, fresh.corrnn);
    }

    #[test]
    fn training_is_deterministic() {
        let data = small_data();
        let eval = EvalCfg { interval: 2, ..Default::default() };
        let a = train_corrgan(&small_cfg(), &eval, &data).unwrap();
        let b = train_corrgan(&small_cfg(), &eval, &data).unwrap();
        assert_eq!(a.reports, b.reports);
        assert_eq!(a.reports.len(), 2);
        assert_eq!(a.model.generator, b.model.generator);
        assert_eq!(a.model.corrnn, b.model.corrnn);
        for s in &a.model.history {
            assert!(s.d_objective <= 0.0 && s.g_objective <= 0.0);
        }
    }

    #[test]
    fn rejects_empty_data() {
        let data = RecordBatch::new(Array2::zeros((0, 10)), Array2::zeros((0, 3))).unwrap();
        assert!(train_corrgan(&small_cfg(), &EvalCfg::default(), &data).is_err());
    }
}
