//! Correlational autoencoder that maps split binary records `t = [x, y]` to a
//! continuous latent space and back.
//!
//! The encoder is a single affine layer over both halves,
//! `f(W x + V y + b)`, and the decoder maps a latent `h` to a full-length
//! record `g(W' h + V' h + b')`. Training minimizes self reconstruction,
//! the two cross reconstructions from a masked half, and rewards correlation
//! between the latents of the two halves.

use ndarray::{concatenate, Array1, Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, Uniform};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::{Activation, Optimizer, OptimizerKind, Tensors};

/// Probabilities are clamped to `[PROB_CLAMP, 1 - PROB_CLAMP]` before any log.
pub const PROB_CLAMP: f64 = 1e-7;
/// Regularizer in the correlation denominator.
pub const CORR_EPSILON: f64 = 1e-8;

/// One binary record split into its data half `x` and condition half `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct BinaryRecord {
    pub x: Array1<f64>,
    pub y: Array1<f64>,
}

impl BinaryRecord {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.is_empty() || y.is_empty() {
            return Err(Error::InvalidArgument("both record halves need at least one entry".into()));
        }
        if x.iter().chain(&y).any(|&v| v != 0.0 && v != 1.0) {
            return Err(Error::InvalidArgument("record entries must be 0 or 1".into()));
        }
        Ok(Self {
            x: Array1::from(x),
            y: Array1::from(y),
        })
    }

    /// The full record `[x, y]`.
    pub fn joined(&self) -> Array1<f64> {
        concatenate![Axis(0), self.x, self.y]
    }
}

/// A batch of records stored as two row-aligned matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct RecordBatch {
    pub x: Array2<f64>,
    pub y: Array2<f64>,
}

impl RecordBatch {
    pub fn new(x: Array2<f64>, y: Array2<f64>) -> Result<Self> {
        if x.nrows() != y.nrows() {
            return Err(Error::shape("record batch rows", x.nrows(), y.nrows()));
        }
        if x.ncols() == 0 || y.ncols() == 0 {
            return Err(Error::InvalidArgument("both record halves need at least one column".into()));
        }
        Ok(Self { x, y })
    }

    /// Splits full records column-wise: the first `x_dim` columns become `x`.
    pub fn split(t: ArrayView2<f64>, x_dim: usize) -> Result<Self> {
        if x_dim == 0 || x_dim >= t.ncols() {
            return Err(Error::InvalidArgument(format!(
                "cannot split {} columns at {x_dim}",
                t.ncols()
            )));
        }
        let (x, y) = t.split_at(Axis(1), x_dim);
        Self::new(x.to_owned(), y.to_owned())
    }

    pub fn len(&self) -> usize {
        self.x.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn x_dim(&self) -> usize {
        self.x.ncols()
    }

    pub fn y_dim(&self) -> usize {
        self.y.ncols()
    }

    pub fn record_dim(&self) -> usize {
        self.x_dim() + self.y_dim()
    }

    /// Full records `[x, y]`, one per row.
    pub fn joined(&self) -> Array2<f64> {
        concatenate![Axis(1), self.x, self.y]
    }

    pub fn select(&self, rows: &[usize]) -> Self {
        Self {
            x: self.x.select(Axis(0), rows),
            y: self.y.select(Axis(0), rows),
        }
    }

    pub fn record(&self, i: usize) -> BinaryRecord {
        BinaryRecord {
            x: self.x.row(i).to_owned(),
            y: self.y.row(i).to_owned(),
        }
    }
}

/// Encoder parameters `[W, V, b]` and activation `f`.
#[derive(Debug, Clone, PartialEq)]
pub struct Encoder {
    /// `h x |x|`
    pub w: Array2<f64>,
    /// `h x |y|`
    pub v: Array2<f64>,
    pub b: Array1<f64>,
    pub activation: Activation,
}

/// Decoder parameters `[W', V', b']` and activation `g`.
#[derive(Debug, Clone, PartialEq)]
pub struct Decoder {
    /// `|t| x h`
    pub w: Array2<f64>,
    /// `|t| x h`
    pub v: Array2<f64>,
    pub b: Array1<f64>,
    pub activation: Activation,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrNn {
    pub encoder: Encoder,
    pub decoder: Decoder,
}

/// Which half of a record reaches the encoder.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReconstructionMode {
    Full,
    /// `[x, 0]`
    XOnly,
    /// `[0, y]`
    YOnly,
}

impl Encoder {
    pub fn latent_dim(&self) -> usize {
        self.b.len()
    }

    /// Encodes a batch; `None` stands for an all-zero half.
    pub fn encode_batch(&self, x: Option<&Array2<f64>>, y: Option<&Array2<f64>>) -> Result<Array2<f64>> {
        let rows = match (x, y) {
            (Some(x), Some(y)) if x.nrows() != y.nrows() => {
                return Err(Error::shape("encoder batch rows", x.nrows(), y.nrows()))
            }
            (Some(x), _) => x.nrows(),
            (None, Some(y)) => y.nrows(),
            (None, None) => {
                return Err(Error::InvalidArgument("encoder needs at least one input half".into()))
            }
        };
        let mut z = Array2::zeros((rows, self.latent_dim()));
        if let Some(x) = x {
            if x.ncols() != self.w.ncols() {
                return Err(Error::shape("encoder x half", self.w.ncols(), x.ncols()));
            }
            z += &x.dot(&self.w.t());
        }
        if let Some(y) = y {
            if y.ncols() != self.v.ncols() {
                return Err(Error::shape("encoder y half", self.v.ncols(), y.ncols()));
            }
            z += &y.dot(&self.v.t());
        }
        z += &self.b;
        self.activation.apply_inplace(&mut z);
        Ok(z)
    }

    fn accumulate_grads(
        &self,
        hidden: &Array2<f64>,
        mut d_hidden: Array2<f64>,
        x: Option<&Array2<f64>>,
        y: Option<&Array2<f64>>,
        grads: &mut EncoderGrads,
    ) {
        self.activation.backprop_inplace(&mut d_hidden, hidden);
        let dz = d_hidden.t();
        if let Some(x) = x {
            grads.w += &dz.dot(x);
        }
        if let Some(y) = y {
            grads.v += &dz.dot(y);
        }
        grads.b += &d_hidden.sum_axis(Axis(0));
    }
}

impl Decoder {
    pub fn latent_dim(&self) -> usize {
        self.w.ncols()
    }

    pub fn record_dim(&self) -> usize {
        self.b.len()
    }

    /// `W' + V'`; both act on the same latent and their outputs add.
    fn combined(&self) -> Array2<f64> {
        &self.w + &self.v
    }

    pub fn decode_batch(&self, hidden: &Array2<f64>) -> Result<Array2<f64>> {
        if hidden.ncols() != self.latent_dim() {
            return Err(Error::shape("decoder latent", self.latent_dim(), hidden.ncols()));
        }
        let mut z = hidden.dot(&self.combined().t());
        z += &self.b;
        self.activation.apply_inplace(&mut z);
        Ok(z)
    }

    pub fn decode(&self, hidden: &[f64]) -> Result<Array1<f64>> {
        let h = Array2::from_shape_vec((1, hidden.len()), hidden.to_vec())
            .expect("one row");
        Ok(self.decode_batch(&h)?.row(0).to_owned())
    }

    /// Accumulates parameter gradients for `output = decode(hidden)` given
    /// `d_output`, and returns the gradient w.r.t. `hidden`.
    pub fn backward(
        &self,
        hidden: &Array2<f64>,
        output: &Array2<f64>,
        mut d_output: Array2<f64>,
        grads: &mut DecoderGrads,
    ) -> Array2<f64> {
        self.activation.backprop_inplace(&mut d_output, output);
        let dw = d_output.t().dot(hidden);
        grads.w += &dw;
        grads.v += &dw;
        grads.b += &d_output.sum_axis(Axis(0));
        d_output.dot(&self.combined())
    }

    pub fn zero_grads(&self) -> DecoderGrads {
        DecoderGrads {
            w: Array2::zeros(self.w.raw_dim()),
            v: Array2::zeros(self.v.raw_dim()),
            b: Array1::zeros(self.b.raw_dim()),
        }
    }
}

impl CorrNn {
    /// Glorot-uniform weights, zero biases.
    pub fn init<R: Rng + ?Sized>(
        x_dim: usize,
        y_dim: usize,
        latent_dim: usize,
        f: Activation,
        g: Activation,
        rng: &mut R,
    ) -> Result<Self> {
        check_dims(x_dim, y_dim, latent_dim)?;
        let t_dim = x_dim + y_dim;
        let mut glorot = |rows: usize, cols: usize| {
            let limit = (6.0 / (rows + cols) as f64).sqrt();
            let dist = Uniform::new_inclusive(-limit, limit).expect("finite limit");
            Array2::from_shape_simple_fn((rows, cols), || dist.sample(rng))
        };
        let encoder = Encoder {
            w: glorot(latent_dim, x_dim),
            v: glorot(latent_dim, y_dim),
            b: Array1::zeros(latent_dim),
            activation: f,
        };
        let decoder = Decoder {
            w: glorot(t_dim, latent_dim),
            v: glorot(t_dim, latent_dim),
            b: Array1::zeros(t_dim),
            activation: g,
        };
        Ok(Self { encoder, decoder })
    }

    pub fn zeros(x_dim: usize, y_dim: usize, latent_dim: usize, f: Activation, g: Activation) -> Result<Self> {
        check_dims(x_dim, y_dim, latent_dim)?;
        let t_dim = x_dim + y_dim;
        Ok(Self {
            encoder: Encoder {
                w: Array2::zeros((latent_dim, x_dim)),
                v: Array2::zeros((latent_dim, y_dim)),
                b: Array1::zeros(latent_dim),
                activation: f,
            },
            decoder: Decoder {
                w: Array2::zeros((t_dim, latent_dim)),
                v: Array2::zeros((t_dim, latent_dim)),
                b: Array1::zeros(t_dim),
                activation: g,
            },
        })
    }

    pub fn x_dim(&self) -> usize {
        self.encoder.w.ncols()
    }

    pub fn y_dim(&self) -> usize {
        self.encoder.v.ncols()
    }

    pub fn record_dim(&self) -> usize {
        self.decoder.record_dim()
    }

    pub fn latent_dim(&self) -> usize {
        self.encoder.latent_dim()
    }

    pub fn encode(&self, x: &[f64], y: &[f64]) -> Result<Array1<f64>> {
        let xb = Array2::from_shape_vec((1, x.len()), x.to_vec()).expect("one row");
        let yb = Array2::from_shape_vec((1, y.len()), y.to_vec()).expect("one row");
        Ok(self.encoder.encode_batch(Some(&xb), Some(&yb))?.row(0).to_owned())
    }

    pub fn decode(&self, hidden: &[f64]) -> Result<Array1<f64>> {
        self.decoder.decode(hidden)
    }

    /// Latents of a batch with the suppressed half zeroed per `mode`.
    pub fn encode_masked(&self, batch: &RecordBatch, mode: ReconstructionMode) -> Result<Array2<f64>> {
        match mode {
            ReconstructionMode::Full => self.encoder.encode_batch(Some(&batch.x), Some(&batch.y)),
            ReconstructionMode::XOnly => self.encoder.encode_batch(Some(&batch.x), None),
            ReconstructionMode::YOnly => self.encoder.encode_batch(None, Some(&batch.y)),
        }
    }

    pub fn reconstruct_batch(&self, batch: &RecordBatch, mode: ReconstructionMode) -> Result<Array2<f64>> {
        self.decoder.decode_batch(&self.encode_masked(batch, mode)?)
    }

    pub fn reconstruct(&self, record: &BinaryRecord, mode: ReconstructionMode) -> Result<Array1<f64>> {
        let batch = RecordBatch::new(
            record.x.clone().insert_axis(Axis(0)),
            record.y.clone().insert_axis(Axis(0)),
        )?;
        Ok(self.reconstruct_batch(&batch, mode)?.row(0).to_owned())
    }

    /// Mean per-dimension correlation between the latents of the two masked
    /// halves over `data`.
    pub fn mean_hidden_correlation(&self, data: &RecordBatch) -> Result<f64> {
        let hx = self.encode_masked(data, ReconstructionMode::XOnly)?;
        let hy = self.encode_masked(data, ReconstructionMode::YOnly)?;
        Ok(hidden_correlation(&hx, &hy)? / self.latent_dim() as f64)
    }

    pub fn zero_grads(&self) -> CorrNnGrads {
        CorrNnGrads {
            encoder: EncoderGrads {
                w: Array2::zeros(self.encoder.w.raw_dim()),
                v: Array2::zeros(self.encoder.v.raw_dim()),
                b: Array1::zeros(self.encoder.b.raw_dim()),
            },
            decoder: self.decoder.zero_grads(),
        }
    }

    pub fn loss(&self, batch: &RecordBatch, cfg: &CorrNnLoss) -> Result<f64> {
        Ok(self.loss_and_grads_inner(batch, cfg, false)?.0)
    }

    /// Loss and its exact gradient w.r.t. every encoder and decoder parameter.
    pub fn loss_grads(&self, batch: &RecordBatch, cfg: &CorrNnLoss) -> Result<(f64, CorrNnGrads)> {
        let (loss, grads) = self.loss_and_grads_inner(batch, cfg, true)?;
        Ok((loss, grads.expect("requested")))
    }

    fn loss_and_grads_inner(
        &self,
        batch: &RecordBatch,
        cfg: &CorrNnLoss,
        with_grads: bool,
    ) -> Result<(f64, Option<CorrNnGrads>)> {
        let m = batch.len();
        if m < 2 {
            return Err(Error::InvalidArgument(format!(
                "the correlation term needs a batch of at least 2 records, got {m}"
            )));
        }
        if batch.x_dim() != self.x_dim() || batch.y_dim() != self.y_dim() {
            return Err(Error::shape(
                "corrnn batch",
                format!("{}+{}", self.x_dim(), self.y_dim()),
                format!("{}+{}", batch.x_dim(), batch.y_dim()),
            ));
        }
        let target = batch.joined();
        let scale = 1.0 / m as f64;

        let modes: &[ReconstructionMode] = if cfg.cross_reconstruction {
            &[ReconstructionMode::Full, ReconstructionMode::XOnly, ReconstructionMode::YOnly]
        } else {
            &[ReconstructionMode::Full]
        };

        let mut grads = with_grads.then(|| self.zero_grads());
        let mut loss = 0.0;
        let mut masked_hidden = (None, None);
        for &mode in modes {
            let hidden = self.encode_masked(batch, mode)?;
            let recon = self.decoder.decode_batch(&hidden)?;
            loss += scale * cfg.reconstruction.value(&target, &recon);
            if let Some(grads) = grads.as_mut() {
                let d_recon = cfg.reconstruction.gradient(&target, &recon) * scale;
                let d_hidden = self.decoder.backward(&hidden, &recon, d_recon, &mut grads.decoder);
                let (x, y) = match mode {
                    ReconstructionMode::Full => (Some(&batch.x), Some(&batch.y)),
                    ReconstructionMode::XOnly => (Some(&batch.x), None),
                    ReconstructionMode::YOnly => (None, Some(&batch.y)),
                };
                self.encoder.accumulate_grads(&hidden, d_hidden, x, y, &mut grads.encoder);
            }
            match mode {
                ReconstructionMode::XOnly => masked_hidden.0 = Some(hidden),
                ReconstructionMode::YOnly => masked_hidden.1 = Some(hidden),
                ReconstructionMode::Full => {}
            }
        }

        if cfg.lambda_corr != 0.0 {
            let hx = match masked_hidden.0.take() {
                Some(h) => h,
                None => self.encode_masked(batch, ReconstructionMode::XOnly)?,
            };
            let hy = match masked_hidden.1.take() {
                Some(h) => h,
                None => self.encode_masked(batch, ReconstructionMode::YOnly)?,
            };
            let (corr, d_hx, d_hy) = correlation_with_grad(&hx, &hy)?;
            loss -= cfg.lambda_corr * corr;
            if let Some(grads) = grads.as_mut() {
                let d_hx = d_hx * -cfg.lambda_corr;
                let d_hy = d_hy * -cfg.lambda_corr;
                self.encoder.accumulate_grads(&hx, d_hx, Some(&batch.x), None, &mut grads.encoder);
                self.encoder.accumulate_grads(&hy, d_hy, None, Some(&batch.y), &mut grads.encoder);
            }
        }

        if !loss.is_finite() {
            return Err(Error::NonFinite("corrnn loss"));
        }
        Ok((loss, grads))
    }
}

fn check_dims(x_dim: usize, y_dim: usize, latent_dim: usize) -> Result<()> {
    if x_dim == 0 || y_dim == 0 || latent_dim == 0 {
        return Err(Error::InvalidArgument(format!(
            "corrnn dims must be positive: |x|={x_dim}, |y|={y_dim}, h={latent_dim}"
        )));
    }
    Ok(())
}

/// Per-coordinate reconstruction error summed over a record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReconstructionLoss {
    /// Binary cross-entropy with clamped probabilities.
    #[default]
    CrossEntropy,
    SquaredError,
}

impl ReconstructionLoss {
    /// Summed over all rows and coordinates.
    pub fn value(self, target: &Array2<f64>, predicted: &Array2<f64>) -> f64 {
        match self {
            ReconstructionLoss::CrossEntropy => target
                .iter()
                .zip(predicted)
                .map(|(&t, &p)| {
                    let p = p.clamp(PROB_CLAMP, 1.0 - PROB_CLAMP);
                    -(t * p.ln() + (1.0 - t) * (1.0 - p).ln())
                })
                .sum(),
            ReconstructionLoss::SquaredError => target
                .iter()
                .zip(predicted)
                .map(|(&t, &p)| (t - p) * (t - p))
                .sum(),
        }
    }

    pub fn gradient(self, target: &Array2<f64>, predicted: &Array2<f64>) -> Array2<f64> {
        let mut out = predicted.clone();
        match self {
            ReconstructionLoss::CrossEntropy => {
                ndarray::Zip::from(&mut out).and(target).for_each(|p, &t| {
                    *p = if *p > PROB_CLAMP && *p < 1.0 - PROB_CLAMP {
                        -t / *p + (1.0 - t) / (1.0 - *p)
                    } else {
                        0.0
                    };
                });
            }
            ReconstructionLoss::SquaredError => {
                ndarray::Zip::from(&mut out).and(target).for_each(|p, &t| *p = 2.0 * (*p - t));
            }
        }
        out
    }
}

/// Terms of the pretraining objective.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrNnLoss {
    pub lambda_corr: f64,
    /// Include the two masked (cross) reconstruction terms.
    pub cross_reconstruction: bool,
    pub reconstruction: ReconstructionLoss,
}

impl Default for CorrNnLoss {
    fn default() -> Self {
        Self {
            lambda_corr: 1.0,
            cross_reconstruction: true,
            reconstruction: ReconstructionLoss::CrossEntropy,
        }
    }
}

impl CorrNnLoss {
    /// Vanilla autoencoder objective: self reconstruction only.
    pub fn vanilla_autoencoder() -> Self {
        Self {
            lambda_corr: 0.0,
            cross_reconstruction: false,
            reconstruction: ReconstructionLoss::CrossEntropy,
        }
    }
}

/// Sum over latent dimensions of the Pearson correlation between matching
/// columns of `hx` and `hy`.
pub fn hidden_correlation(hx: &Array2<f64>, hy: &Array2<f64>) -> Result<f64> {
    Ok(per_dimension_correlation(hx, hy)?.sum())
}

/// Pearson correlation of each column pair, with `CORR_EPSILON` inside the
/// square root of the denominator.
pub fn per_dimension_correlation(hx: &Array2<f64>, hy: &Array2<f64>) -> Result<Array1<f64>> {
    check_correlation_inputs(hx, hy)?;
    let (cx, cy) = (centered(hx), centered(hy));
    let sxy = (&cx * &cy).sum_axis(Axis(0));
    let sxx = cx.mapv(|v| v * v).sum_axis(Axis(0));
    let syy = cy.mapv(|v| v * v).sum_axis(Axis(0));
    Ok(ndarray::Zip::from(&sxy)
        .and(&sxx)
        .and(&syy)
        .map_collect(|&xy, &xx, &yy| xy / (xx * yy + CORR_EPSILON).sqrt()))
}

fn check_correlation_inputs(hx: &Array2<f64>, hy: &Array2<f64>) -> Result<()> {
    if hx.dim() != hy.dim() {
        return Err(Error::shape(
            "hidden correlation",
            format!("{:?}", hx.dim()),
            format!("{:?}", hy.dim()),
        ));
    }
    if hx.nrows() < 2 {
        return Err(Error::InvalidArgument(format!(
            "correlation needs at least 2 rows, got {}",
            hx.nrows()
        )));
    }
    Ok(())
}

fn centered(h: &Array2<f64>) -> Array2<f64> {
    let mean = h.mean_axis(Axis(0)).expect("non-empty");
    h - &mean
}

/// Summed correlation and its gradients w.r.t. `hx` and `hy`.
///
/// Per column with centered `a`, `c`: `r = Sac / sqrt(Saa Scc + eps)`,
/// `dr/dx_i = c_i / sqrt(D) - Sac Scc a_i / D^1.5`. The centering terms drop
/// out because centered columns sum to zero.
fn correlation_with_grad(hx: &Array2<f64>, hy: &Array2<f64>) -> Result<(f64, Array2<f64>, Array2<f64>)> {
    check_correlation_inputs(hx, hy)?;
    let (cx, cy) = (centered(hx), centered(hy));
    let mut d_hx = Array2::zeros(hx.raw_dim());
    let mut d_hy = Array2::zeros(hy.raw_dim());
    let mut total = 0.0;
    for k in 0..hx.ncols() {
        let a = cx.column(k);
        let c = cy.column(k);
        let sac = a.dot(&c);
        let saa = a.dot(&a);
        let scc = c.dot(&c);
        let denom = saa * scc + CORR_EPSILON;
        let root = denom.sqrt();
        total += sac / root;
        let cube = denom * root;
        for i in 0..hx.nrows() {
            d_hx[[i, k]] = c[i] / root - sac * scc * a[i] / cube;
            d_hy[[i, k]] = a[i] / root - sac * saa * c[i] / cube;
        }
    }
    Ok((total, d_hx, d_hy))
}

/// Gradients of the encoder parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderGrads {
    pub w: Array2<f64>,
    pub v: Array2<f64>,
    pub b: Array1<f64>,
}

/// Gradients of the decoder parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct DecoderGrads {
    pub w: Array2<f64>,
    pub v: Array2<f64>,
    pub b: Array1<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrNnGrads {
    pub encoder: EncoderGrads,
    pub decoder: DecoderGrads,
}

macro_rules! three_tensors {
    ($ty:ty) => {
        impl Tensors for $ty {
            fn tensors(&self) -> Vec<&[f64]> {
                vec![
                    self.w.as_slice().unwrap(),
                    self.v.as_slice().unwrap(),
                    self.b.as_slice().unwrap(),
                ]
            }
            fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
                vec![
                    self.w.as_slice_mut().unwrap(),
                    self.v.as_slice_mut().unwrap(),
                    self.b.as_slice_mut().unwrap(),
                ]
            }
        }
    };
}

three_tensors!(Encoder);
three_tensors!(Decoder);
three_tensors!(EncoderGrads);
three_tensors!(DecoderGrads);

impl Tensors for CorrNn {
    fn tensors(&self) -> Vec<&[f64]> {
        let mut out = self.encoder.tensors();
        out.extend(self.decoder.tensors());
        out
    }
    fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out = self.encoder.tensors_mut();
        out.extend(self.decoder.tensors_mut());
        out
    }
}

impl Tensors for CorrNnGrads {
    fn tensors(&self) -> Vec<&[f64]> {
        let mut out = self.encoder.tensors();
        out.extend(self.decoder.tensors());
        out
    }
    fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out = self.encoder.tensors_mut();
        out.extend(self.decoder.tensors_mut());
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PretrainCfg {
    pub epochs: usize,
    pub batch_size: usize,
    pub lr: f64,
    pub optimizer: OptimizerKind,
    pub loss: CorrNnLoss,
}

impl Default for PretrainCfg {
    fn default() -> Self {
        Self {
            epochs: 150,
            batch_size: 100,
            lr: 1e-3,
            optimizer: OptimizerKind::Adam,
            loss: CorrNnLoss::default(),
        }
    }
}

/// Minibatch training of `model` on `data`. Returns the mean batch loss of
/// every epoch.
///
/// Each epoch visits the records in a fresh random order; a trailing batch
/// with fewer than two records is skipped.
pub fn pretrain<R: Rng + ?Sized>(
    model: &mut CorrNn,
    data: &RecordBatch,
    cfg: &PretrainCfg,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if data.is_empty() {
        return Err(Error::Empty("pretraining dataset"));
    }
    if cfg.batch_size < 2 {
        return Err(Error::InvalidArgument(format!(
            "pretraining batch size must be at least 2, got {}",
            cfg.batch_size
        )));
    }
    if data.len() < 2 {
        return Err(Error::InvalidArgument("pretraining needs at least 2 records".into()));
    }
    let mut opt = Optimizer::new(cfg.optimizer, cfg.lr, false, model);
    let mut order: Vec<usize> = (0..data.len()).collect();
    let mut history = Vec::with_capacity(cfg.epochs);
    for epoch in 1..=cfg.epochs {
        order.shuffle(rng);
        let mut total = 0.0;
        let mut batches = 0usize;
        for chunk in order.chunks(cfg.batch_size) {
            if chunk.len() < 2 {
                continue;
            }
            let batch = data.select(chunk);
            let (loss, grads) = model.loss_grads(&batch, &cfg.loss).map_err(|e| Error::Divergence {
                epoch,
                reason: e.to_string(),
            })?;
            opt.step(model, &grads).map_err(|e| Error::Divergence {
                epoch,
                reason: e.to_string(),
            })?;
            total += loss;
            batches += 1;
        }
        history.push(total / batches as f64);
    }
    Ok(history)
}
