//! Small dense-network engine: layers, exact backpropagation, optimizers and
//! a finite-difference gradient oracle. Everything is `f64`.

mod activation;
mod gradcheck;
mod mlp;
mod optim;

pub use activation::{sigmoid, Activation};
pub use gradcheck::{finite_diff_grad, max_relative_error};
pub use mlp::{DenseLayer, ForwardCache, LayerGrads, Mlp, MlpGrads};
pub use optim::{AdamState, Optimizer, OptimizerKind, ADAM_EPSILON, BETA1, BETA2};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Deterministic random stream. Identical seeds give identical streams on
/// every platform.
pub type SeededRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent sub-stream `stream` of the generator seeded with `seed`.
pub fn substream(seed: u64, stream: u64) -> SeededRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Flat view over a set of parameter (or gradient) tensors.
///
/// Two values with the same layout yield slices of equal count and lengths
/// in the same order; optimizers and the gradient oracle rely on that.
pub trait Tensors {
    fn tensors(&self) -> Vec<&[f64]>;
    fn tensors_mut(&mut self) -> Vec<&mut [f64]>;

    fn num_params(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::{s, Array2};
    use rand::Rng;

    #[test]
    fn same_seed_same_stream() {
        let a: Vec<u64> = seeded_rng(9).random_iter().take(8).collect();
        let b: Vec<u64> = seeded_rng(9).random_iter().take(8).collect();
        assert_eq!(a, b);
        let c: Vec<u64> = substream(9, 1).random_iter().take(8).collect();
        assert_ne!(a, c);
    }

    /// Backpropagating through two chained networks via the input gradient
    /// equals backpropagating through the same layers as one network.
    #[test]
    fn chain_rule_composes_across_networks() {
        let mut rng = seeded_rng(21);
        let first = Mlp::init(&[5, 6, 4], &[Activation::Tanh, Activation::Relu], &mut rng).unwrap();
        let second = Mlp::init(&[4, 3, 2], &[Activation::Sigmoid, Activation::Tanh], &mut rng).unwrap();
        let joined = Mlp::new(
            first.layers().iter().chain(second.layers()).cloned().collect(),
        )
        .unwrap();
        let x = Array2::from_shape_fn((3, 5), |(i, j)| ((i * 5 + j) as f64 * 0.53).cos());
        let upstream = Array2::from_shape_fn((3, 2), |(i, j)| (i as f64 + 1.0) * (j as f64 - 0.5));

        let c1 = first.forward(&x).unwrap();
        let c2 = second.forward(c1.output()).unwrap();
        let (g2, mid) = second.backward(&c2, &upstream).unwrap();
        let (g1, gx) = first.backward(&c1, &mid).unwrap();

        let cj = joined.forward(&x).unwrap();
        let (gj, gxj) = joined.backward(&cj, &upstream).unwrap();

        let split: Vec<&[f64]> = g1.tensors().into_iter().chain(g2.tensors()).collect();
        for (a, b) in split.iter().zip(gj.tensors()) {
            for (u, v) in a.iter().zip(b) {
                assert!((u - v).abs() < 1e-6);
            }
        }
        assert!((&gx - &gxj).iter().all(|d| d.abs() < 1e-6));
        assert_eq!(gx.slice(s![.., ..]).dim(), (3, 5));
    }
}
