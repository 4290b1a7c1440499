use super::Tensors;
use crate::error::{Error, Result};

/// Central-difference gradient of `loss` at `params`, one buffer per tensor.
pub fn finite_diff_grad<P, F>(loss: F, params: &P, epsilon: f64) -> Result<Vec<Vec<f64>>>
where
    P: Tensors + Clone,
    F: Fn(&P) -> f64,
{
    if epsilon.is_nan() || epsilon <= 0.0 {
        return Err(Error::InvalidArgument(format!("epsilon must be positive, got {epsilon}")));
    }
    let mut probe = params.clone();
    let shapes: Vec<usize> = params.tensors().iter().map(|t| t.len()).collect();
    let mut out = Vec::with_capacity(shapes.len());
    for (t, &len) in shapes.iter().enumerate() {
        let mut grad = vec![0.0; len];
        for (i, g) in grad.iter_mut().enumerate() {
            let orig = probe.tensors()[t][i];
            probe.tensors_mut()[t][i] = orig + epsilon;
            let plus = loss(&probe);
            probe.tensors_mut()[t][i] = orig - epsilon;
            let minus = loss(&probe);
            probe.tensors_mut()[t][i] = orig;
            if !plus.is_finite() || !minus.is_finite() {
                return Err(Error::NonFinite("finite-difference loss"));
            }
            *g = (plus - minus) / (2.0 * epsilon);
        }
        out.push(grad);
    }
    Ok(out)
}

/// Largest `|a - b| / max(|a|, |b|, 1e-8)` over all coordinates.
///
/// Returns infinity if the layouts differ.
pub fn max_relative_error<G: Tensors + ?Sized>(analytic: &G, numeric: &[Vec<f64>]) -> f64 {
    let analytic = analytic.tensors();
    if analytic.len() != numeric.len() {
        return f64::INFINITY;
    }
    let mut worst: f64 = 0.0;
    for (a, n) in analytic.iter().zip(numeric) {
        if a.len() != n.len() {
            return f64::INFINITY;
        }
        for (&x, &y) in a.iter().zip(n) {
            let denom = x.abs().max(y.abs()).max(1e-8);
            worst = worst.max((x - y).abs() / denom);
        }
    }
    worst
}
