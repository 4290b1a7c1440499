//! Evaluation of generated data against the training set: per-coordinate
//! occurrence probabilities, pairwise co-occurrence matrices, and a digit
//! classifier for image samples.

mod classifier;
mod export;

pub use classifier::{classifier_diversity, DigitClassifier, DiversityReport, GATE_ACCURACY};
pub use export::{
    export_report, image_grid, pgm_bytes, skill_lines, write_metrics_csv, write_pgm, write_scatter_csv,
    write_skill_samples,
};

use ndarray::{Array1, Array2, ArrayView2, Axis};
use serde::Serialize;

use crate::error::{Error, Result};

/// Fraction of samples with each coordinate active.
#[derive(Debug, Clone, PartialEq)]
pub struct OccurrenceProfile(pub Array1<f64>);

/// Column means of a binary matrix.
pub fn occurrence_probabilities(data: ArrayView2<f64>) -> Result<OccurrenceProfile> {
    if data.nrows() == 0 {
        return Err(Error::Empty("occurrence matrix"));
    }
    Ok(OccurrenceProfile(data.mean_axis(Axis(0)).expect("non-empty")))
}

/// Mean squared distance of the `(p_train, p_gen)` points from the diagonal.
pub fn occurrence_mse(train: &OccurrenceProfile, generated: &OccurrenceProfile) -> Result<f64> {
    if train.0.len() != generated.0.len() {
        return Err(Error::shape("occurrence profiles", train.0.len(), generated.0.len()));
    }
    if train.0.is_empty() {
        return Err(Error::Empty("occurrence profile"));
    }
    Ok(train
        .0
        .iter()
        .zip(&generated.0)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        / train.0.len() as f64)
}

/// Normalized pairwise co-occurrence counts.
#[derive(Debug, Clone, PartialEq)]
pub struct CooccurrenceMatrix {
    pub matrix: Array2<f64>,
    pub alpha: f64,
}

impl CooccurrenceMatrix {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }
}

/// `M[i][j]` is the fraction of rows where both coordinates exceed `alpha`
/// (strictly), for `i != j`. The diagonal is zero.
pub fn cooccurrence_matrix(data: ArrayView2<f64>, alpha: f64) -> Result<CooccurrenceMatrix> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidArgument(format!("alpha must lie in [0, 1], got {alpha}")));
    }
    let (n, d) = data.dim();
    if n == 0 {
        return Err(Error::Empty("co-occurrence input"));
    }
    if d < 2 {
        return Err(Error::InvalidArgument(format!("co-occurrence needs at least 2 columns, got {d}")));
    }
    let active = data.mapv(|v| if v > alpha { 1.0 } else { 0.0 });
    // Counts are small integers, so the product is exact.
    let mut matrix = active.t().dot(&active);
    matrix.diag_mut().fill(0.0);
    matrix /= n as f64;
    Ok(CooccurrenceMatrix { matrix, alpha })
}

/// Signed and absolute mean of `generated - original` over all cells.
pub fn cooccurrence_error(original: &CooccurrenceMatrix, generated: &CooccurrenceMatrix) -> Result<(f64, f64)> {
    if original.matrix.dim() != generated.matrix.dim() {
        return Err(Error::shape(
            "co-occurrence matrices",
            format!("{:?}", original.matrix.dim()),
            format!("{:?}", generated.matrix.dim()),
        ));
    }
    if original.alpha != generated.alpha {
        return Err(Error::InvalidArgument(format!(
            "co-occurrence alpha differs: {} vs {}",
            original.alpha, generated.alpha
        )));
    }
    let diff = &generated.matrix - &original.matrix;
    let cells = diff.len() as f64;
    Ok((diff.sum() / cells, diff.mapv(f64::abs).sum() / cells))
}

/// Metrics of one checkpoint.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct EvalReport {
    pub epoch: usize,
    pub occurrence_mse: f64,
    pub cooc_err_signed: f64,
    pub cooc_err_abs: f64,
    pub occurrence_train: Vec<f64>,
    pub occurrence_generated: Vec<f64>,
    pub label_histogram: Option<Vec<usize>>,
    pub artifacts: Vec<std::path::PathBuf>,
}

/// Scores generated rows against training rows. `training` is binary;
/// `generated` may be continuous and is binarized at `threshold` for the
/// occurrence profile.
pub fn evaluate_samples(
    epoch: usize,
    training: ArrayView2<f64>,
    generated: ArrayView2<f64>,
    alpha: f64,
    threshold: f64,
) -> Result<EvalReport> {
    if training.ncols() != generated.ncols() {
        return Err(Error::shape("generated sample width", training.ncols(), generated.ncols()));
    }
    let p_train = occurrence_probabilities(training)?;
    let binary = generated.mapv(|v| if v >= threshold { 1.0 } else { 0.0 });
    let p_gen = occurrence_probabilities(binary.view())?;
    let mse = occurrence_mse(&p_train, &p_gen)?;
    let (signed, abs) = cooccurrence_error(
        &cooccurrence_matrix(training, alpha)?,
        &cooccurrence_matrix(generated, alpha)?,
    )?;
    Ok(EvalReport {
        epoch,
        occurrence_mse: mse,
        cooc_err_signed: signed,
        cooc_err_abs: abs,
        occurrence_train: p_train.0.to_vec(),
        occurrence_generated: p_gen.0.to_vec(),
        label_histogram: None,
        artifacts: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn column_means() {
        let p = occurrence_probabilities(array![[1.0, 0.0], [1.0, 1.0]].view()).unwrap();
        assert_eq!(p.0, array![1.0, 0.5]);
        let z = occurrence_probabilities(Array2::zeros((3, 4)).view()).unwrap();
        assert!(z.0.iter().all(|&v| v == 0.0));
        assert!(occurrence_probabilities(Array2::zeros((0, 4)).view()).is_err());
    }

    #[test]
    fn mse_cases() {
        let a = OccurrenceProfile(array![1.0, 0.0]);
        let b = OccurrenceProfile(array![0.0, 1.0]);
        assert_eq!(occurrence_mse(&a, &a).unwrap(), 0.0);
        assert_eq!(occurrence_mse(&a, &b).unwrap(), 1.0);
        assert!(occurrence_mse(&a, &OccurrenceProfile(array![1.0])).is_err());
    }

    #[test]
    fn three_row_example() {
        let data = array![[1.0, 1.0, 0.0], [1.0, 1.0, 1.0], [0.0, 1.0, 1.0]];
        let m = cooccurrence_matrix(data.view(), 0.5).unwrap();
        let expected = array![
            [0.0, 2.0 / 3.0, 1.0 / 3.0],
            [2.0 / 3.0, 0.0, 2.0 / 3.0],
            [1.0 / 3.0, 2.0 / 3.0, 0.0]
        ];
        assert_eq!(m.matrix, expected);
    }

    #[test]
    fn zero_data_and_alpha_one() {
        let z = cooccurrence_matrix(Array2::zeros((4, 3)).view(), 0.5).unwrap();
        assert!(z.matrix.iter().all(|&v| v == 0.0));
        let ones = cooccurrence_matrix(Array2::ones((4, 3)).view(), 1.0).unwrap();
        assert!(ones.matrix.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn invalid_inputs() {
        assert!(cooccurrence_matrix(Array2::zeros((4, 3)).view(), 1.5).is_err());
        assert!(cooccurrence_matrix(Array2::zeros((4, 1)).view(), 0.5).is_err());
        assert!(cooccurrence_matrix(Array2::zeros((0, 3)).view(), 0.5).is_err());
    }

    #[test]
    fn error_means() {
        let orig = CooccurrenceMatrix { matrix: Array2::zeros((3, 3)), alpha: 0.5 };
        assert_eq!(cooccurrence_error(&orig, &orig).unwrap(), (0.0, 0.0));
        let mut shifted = orig.clone();
        for i in 0..3 {
            for j in 0..3 {
                if i != j {
                    shifted.matrix[[i, j]] += 0.1;
                }
            }
        }
        let (signed, abs) = cooccurrence_error(&orig, &shifted).unwrap();
        assert!((signed - 1.0 / 15.0).abs() < 1e-15);
        assert!((abs - 1.0 / 15.0).abs() < 1e-15);
        let other_alpha = CooccurrenceMatrix { alpha: 0.3, ..orig.clone() };
        assert!(cooccurrence_error(&orig, &other_alpha).is_err());
    }

    #[test]
    fn evaluate_identical_sets() {
        let data = array![[1.0, 0.0, 1.0], [0.0, 1.0, 1.0]];
        let r = evaluate_samples(100, data.view(), data.view(), 0.5, 0.5).unwrap();
        assert_eq!(r.occurrence_mse, 0.0);
        assert_eq!((r.cooc_err_signed, r.cooc_err_abs), (0.0, 0.0));
        assert!(evaluate_samples(1, data.view(), Array2::zeros((2, 2)).view(), 0.5, 0.5).is_err());
    }
}
