use ndarray::{Array2, ArrayView2, Axis};
use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::nn::{Activation, Mlp, Optimizer, OptimizerKind};

/// Held-out accuracy a classifier must reach before its labels are trusted.
pub const GATE_ACCURACY: f64 = 0.85;

/// Softmax classifier with one hidden layer.
#[derive(Debug, Clone)]
pub struct DigitClassifier {
    net: Mlp,
    classes: usize,
}

fn softmax_rows(logits: &mut Array2<f64>) {
    for mut row in logits.rows_mut() {
        let max = row.fold(f64::NEG_INFINITY, |a, &b| a.max(b));
        row.mapv_inplace(|v| (v - max).exp());
        let sum = row.sum();
        row /= sum;
    }
}

impl DigitClassifier {
    pub fn new<R: Rng + ?Sized>(inputs: usize, hidden: usize, classes: usize, rng: &mut R) -> Result<Self> {
        let net = Mlp::init(&[inputs, hidden, classes], &[Activation::Relu, Activation::Identity], rng)?;
        Ok(Self { net, classes })
    }

    pub fn classes(&self) -> usize {
        self.classes
    }

    /// Minibatch cross-entropy training. Returns the mean loss per epoch.
    pub fn fit<R: Rng + ?Sized>(
        &mut self,
        images: ArrayView2<f64>,
        labels: &[u8],
        epochs: usize,
        lr: f64,
        rng: &mut R,
    ) -> Result<Vec<f64>> {
        if images.nrows() != labels.len() {
            return Err(Error::shape("classifier labels", images.nrows(), labels.len()));
        }
        if let Some(&l) = labels.iter().find(|&&l| l as usize >= self.classes) {
            return Err(Error::InvalidArgument(format!("label {l} exceeds {} classes", self.classes)));
        }
        let mut opt = Optimizer::new(OptimizerKind::Adam, lr, false, &self.net);
        let mut order: Vec<usize> = (0..labels.len()).collect();
        let mut history = Vec::with_capacity(epochs);
        for _ in 0..epochs {
            order.shuffle(rng);
            let mut total = 0.0;
            for chunk in order.chunks(100) {
                let batch = images.select(Axis(0), chunk);
                let cache = self.net.forward(&batch)?;
                let mut probs = cache.output().clone();
                softmax_rows(&mut probs);
                let m = chunk.len() as f64;
                for (r, &i) in chunk.iter().enumerate() {
                    let y = labels[i] as usize;
                    total -= probs[[r, y]].max(1e-300).ln();
                    probs[[r, y]] -= 1.0;
                }
                probs /= m;
                let (grads, _) = self.net.backward(&cache, &probs)?;
                opt.step(&mut self.net, &grads)?;
            }
            history.push(total / labels.len() as f64);
        }
        Ok(history)
    }

    pub fn predict(&self, images: ArrayView2<f64>) -> Result<Vec<usize>> {
        if images.nrows() == 0 {
            return Ok(Vec::new());
        }
        let logits = self.net.predict(&images.to_owned())?;
        Ok(logits
            .rows()
            .into_iter()
            .map(|r| {
                r.iter()
                    .enumerate()
                    .fold((0, f64::NEG_INFINITY), |best, (i, &v)| if v > best.1 { (i, v) } else { best })
                    .0
            })
            .collect())
    }

    pub fn accuracy(&self, images: ArrayView2<f64>, labels: &[u8]) -> Result<f64> {
        if labels.is_empty() {
            return Err(Error::Empty("accuracy labels"));
        }
        let pred = self.predict(images)?;
        let hits = pred.iter().zip(labels).filter(|(p, &l)| **p == l as usize).count();
        Ok(hits as f64 / labels.len() as f64)
    }

    pub fn histogram(&self, images: ArrayView2<f64>) -> Result<Vec<usize>> {
        let mut hist = vec![0; self.classes];
        for p in self.predict(images)? {
            hist[p] += 1;
        }
        Ok(hist)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiversityReport {
    /// Predicted-label counts of the generated images.
    pub histogram: Vec<usize>,
    /// Accuracy on the held-out real images.
    pub accuracy: f64,
}

impl DiversityReport {
    pub fn distinct_classes(&self) -> usize {
        self.histogram.iter().filter(|&&c| c > 0).count()
    }
}

/// Trains a classifier on real labeled images, checks it against the
/// held-out set, then labels the generated images.
pub fn classifier_diversity<R: Rng + ?Sized>(
    train: (ArrayView2<f64>, &[u8]),
    held_out: (ArrayView2<f64>, &[u8]),
    generated: ArrayView2<f64>,
    rng: &mut R,
) -> Result<(DigitClassifier, DiversityReport)> {
    let classes = train.1.iter().chain(held_out.1).copied().max().map_or(1, |m| m as usize + 1);
    let mut clf = DigitClassifier::new(train.0.ncols(), 128, classes, rng)?;
    clf.fit(train.0, train.1, 10, 1e-3, rng)?;
    let accuracy = clf.accuracy(held_out.0, held_out.1)?;
    if accuracy < GATE_ACCURACY {
        return Err(Error::ClassifierGate {
            accuracy,
            required: GATE_ACCURACY,
        });
    }
    if generated.ncols() != train.0.ncols() && generated.nrows() > 0 {
        return Err(Error::shape("generated image size", train.0.ncols(), generated.ncols()));
    }
    let histogram = clf.histogram(generated)?;
    Ok((clf, DiversityReport { histogram, accuracy }))
}
