use ndarray::{Array1, Array2, Axis};
use rand::Rng;
use rand_distr::{Distribution, Uniform};

use super::{Activation, Tensors};
use crate::error::{Error, Result};

/// One fully connected layer: `act(x W^T + b)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLayer {
    /// `out_dim x in_dim`
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
    pub activation: Activation,
}

impl DenseLayer {
    pub fn zeros(in_dim: usize, out_dim: usize, activation: Activation) -> Self {
        Self {
            weights: Array2::zeros((out_dim, in_dim)),
            bias: Array1::zeros(out_dim),
            activation,
        }
    }

    /// Glorot-uniform weights, zero bias.
    pub fn glorot<R: Rng + ?Sized>(
        in_dim: usize,
        out_dim: usize,
        activation: Activation,
        rng: &mut R,
    ) -> Self {
        let limit = (6.0 / (in_dim + out_dim) as f64).sqrt();
        let dist = Uniform::new_inclusive(-limit, limit).expect("finite glorot limit");
        let weights = Array2::from_shape_simple_fn((out_dim, in_dim), || dist.sample(rng));
        Self {
            weights,
            bias: Array1::zeros(out_dim),
            activation,
        }
    }

    pub fn in_dim(&self) -> usize {
        self.weights.ncols()
    }

    pub fn out_dim(&self) -> usize {
        self.weights.nrows()
    }

    pub fn forward(&self, input: &Array2<f64>) -> Array2<f64> {
        let mut z = input.dot(&self.weights.t());
        z += &self.bias;
        self.activation.apply_inplace(&mut z);
        z
    }
}

/// A stack of dense layers. Used for both the generator and the discriminator.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp {
    layers: Vec<DenseLayer>,
}

/// Inputs to every layer plus the final output; `activations[0]` is the batch.
#[derive(Debug, Clone)]
pub struct ForwardCache {
    pub activations: Vec<Array2<f64>>,
}

impl ForwardCache {
    pub fn output(&self) -> &Array2<f64> {
        self.activations.last().expect("cache always holds the input")
    }

    pub fn into_output(mut self) -> Array2<f64> {
        self.activations.pop().expect("cache always holds the input")
    }
}

/// Parameter gradients with the same layout as the owning [`Mlp`].
#[derive(Debug, Clone, PartialEq)]
pub struct MlpGrads {
    pub layers: Vec<LayerGrads>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerGrads {
    pub weights: Array2<f64>,
    pub bias: Array1<f64>,
}

impl Mlp {
    pub fn new(layers: Vec<DenseLayer>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::InvalidArgument("an MLP needs at least one layer".into()));
        }
        for (i, pair) in layers.windows(2).enumerate() {
            if pair[0].out_dim() != pair[1].in_dim() {
                return Err(Error::shape(
                    "mlp layer chaining",
                    format!("layer {} input dim {}", i + 1, pair[0].out_dim()),
                    pair[1].in_dim(),
                ));
            }
        }
        Ok(Self { layers })
    }

    /// Builds a network for `dims = [in, hidden.., out]` with Glorot init.
    pub fn init<R: Rng + ?Sized>(
        dims: &[usize],
        activations: &[Activation],
        rng: &mut R,
    ) -> Result<Self> {
        check_dims(dims, activations)?;
        let layers = dims
            .windows(2)
            .zip(activations)
            .map(|(d, &act)| DenseLayer::glorot(d[0], d[1], act, rng))
            .collect();
        Self::new(layers)
    }

    /// Same topology with every parameter zero.
    pub fn zeros(dims: &[usize], activations: &[Activation]) -> Result<Self> {
        check_dims(dims, activations)?;
        let layers = dims
            .windows(2)
            .zip(activations)
            .map(|(d, &act)| DenseLayer::zeros(d[0], d[1], act))
            .collect();
        Self::new(layers)
    }

    pub fn layers(&self) -> &[DenseLayer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [DenseLayer] {
        &mut self.layers
    }

    pub fn in_dim(&self) -> usize {
        self.layers[0].in_dim()
    }

    pub fn out_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].out_dim()
    }

    /// Layer widths, input first.
    pub fn dims(&self) -> Vec<usize> {
        std::iter::once(self.in_dim())
            .chain(self.layers.iter().map(DenseLayer::out_dim))
            .collect()
    }

    pub fn forward(&self, batch: &Array2<f64>) -> Result<ForwardCache> {
        if batch.ncols() != self.in_dim() {
            return Err(Error::shape("mlp forward input", self.in_dim(), batch.ncols()));
        }
        let mut activations = Vec::with_capacity(self.layers.len() + 1);
        activations.push(batch.to_owned());
        for layer in &self.layers {
            let next = layer.forward(activations.last().unwrap());
            activations.push(next);
        }
        Ok(ForwardCache { activations })
    }

    /// Network output only.
    pub fn predict(&self, batch: &Array2<f64>) -> Result<Array2<f64>> {
        Ok(self.forward(batch)?.into_output())
    }

    /// Exact gradients of a scalar loss whose gradient w.r.t. the network
    /// output is `upstream`. Returns parameter gradients and the gradient
    /// w.r.t. the network input.
    pub fn backward(
        &self,
        cache: &ForwardCache,
        upstream: &Array2<f64>,
    ) -> Result<(MlpGrads, Array2<f64>)> {
        let (grads, input_grad) = self.backprop(cache, upstream, true, false)?;
        Ok((grads.expect("requested"), input_grad))
    }

    /// Like [`Mlp::backward`] with `upstream` taken w.r.t. the last layer's
    /// pre-activation instead of its output.
    pub fn backward_from_logits(
        &self,
        cache: &ForwardCache,
        upstream: &Array2<f64>,
    ) -> Result<(MlpGrads, Array2<f64>)> {
        let (grads, input_grad) = self.backprop(cache, upstream, true, true)?;
        Ok((grads.expect("requested"), input_grad))
    }

    /// Like [`Mlp::backward`] but skips parameter gradients. Used when this
    /// network is frozen and only passes gradient to an upstream network.
    pub fn input_gradient(&self, cache: &ForwardCache, upstream: &Array2<f64>) -> Result<Array2<f64>> {
        Ok(self.backprop(cache, upstream, false, false)?.1)
    }

    /// Input gradient with `upstream` taken w.r.t. the last pre-activation.
    pub fn input_gradient_from_logits(&self, cache: &ForwardCache, upstream: &Array2<f64>) -> Result<Array2<f64>> {
        Ok(self.backprop(cache, upstream, false, true)?.1)
    }

    fn backprop(
        &self,
        cache: &ForwardCache,
        upstream: &Array2<f64>,
        with_params: bool,
        from_logits: bool,
    ) -> Result<(Option<MlpGrads>, Array2<f64>)> {
        if cache.activations.len() != self.layers.len() + 1 {
            return Err(Error::shape(
                "mlp backward cache",
                format!("{} activations", self.layers.len() + 1),
                cache.activations.len(),
            ));
        }
        let out = cache.output();
        if upstream.dim() != out.dim() {
            return Err(Error::shape(
                "mlp backward upstream gradient",
                format!("{:?}", out.dim()),
                format!("{:?}", upstream.dim()),
            ));
        }

        let mut delta = upstream.to_owned();
        let mut layer_grads = Vec::with_capacity(self.layers.len());
        for (l, layer) in self.layers.iter().enumerate().rev() {
            if !(from_logits && l + 1 == self.layers.len()) {
                layer.activation.backprop_inplace(&mut delta, &cache.activations[l + 1]);
            }
            let input = &cache.activations[l];
            if with_params {
                layer_grads.push(LayerGrads {
                    weights: delta.t().dot(input).as_standard_layout().into_owned(),
                    bias: delta.sum_axis(Axis(0)),
                });
            }
            delta = delta.dot(&layer.weights);
        }
        layer_grads.reverse();
        let grads = with_params.then_some(MlpGrads { layers: layer_grads });
        Ok((grads, delta))
    }

    pub fn zero_grads(&self) -> MlpGrads {
        MlpGrads {
            layers: self
                .layers
                .iter()
                .map(|l| LayerGrads {
                    weights: Array2::zeros(l.weights.raw_dim()),
                    bias: Array1::zeros(l.bias.raw_dim()),
                })
                .collect(),
        }
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.iter().all(|v| v.is_finite()))
    }
}

fn check_dims(dims: &[usize], activations: &[Activation]) -> Result<()> {
    if dims.len() < 2 {
        return Err(Error::InvalidArgument(format!(
            "need at least an input and an output width, got {dims:?}"
        )));
    }
    if activations.len() != dims.len() - 1 {
        return Err(Error::InvalidArgument(format!(
            "{} layer widths need {} activations, got {}",
            dims.len(),
            dims.len() - 1,
            activations.len()
        )));
    }
    if dims.contains(&0) {
        return Err(Error::InvalidArgument(format!("zero-width layer in {dims:?}")));
    }
    Ok(())
}

impl Tensors for Mlp {
    fn tensors(&self) -> Vec<&[f64]> {
        self.layers
            .iter()
            .flat_map(|l| [slice(&l.weights), l.bias.as_slice().unwrap()])
            .collect()
    }

    fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        self.layers
            .iter_mut()
            .flat_map(|l| [l.weights.as_slice_mut().unwrap(), l.bias.as_slice_mut().unwrap()])
            .collect()
    }
}

impl Tensors for MlpGrads {
    fn tensors(&self) -> Vec<&[f64]> {
        self.layers
            .iter()
            .flat_map(|l| [slice(&l.weights), l.bias.as_slice().unwrap()])
            .collect()
    }

    fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        self.layers
            .iter_mut()
            .flat_map(|l| [l.weights.as_slice_mut().unwrap(), l.bias.as_slice_mut().unwrap()])
            .collect()
    }
}

fn slice(a: &Array2<f64>) -> &[f64] {
    a.as_slice().expect("parameters are stored in standard layout")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{finite_diff_grad, max_relative_error, seeded_rng};
    use ndarray::array;

    #[test]
    fn init_is_deterministic() {
        let a = Mlp::init(&[2, 3], &[Activation::Tanh], &mut seeded_rng(7)).unwrap();
        let b = Mlp::init(&[2, 3], &[Activation::Tanh], &mut seeded_rng(7)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn init_biases_are_zero() {
        for seed in 0..5 {
            let net = Mlp::init(&[4, 4], &[Activation::Relu], &mut seeded_rng(seed)).unwrap();
            assert!(net.layers()[0].bias.iter().all(|&b| b == 0.0));
        }
    }

    #[test]
    fn init_weight_mean_and_range() {
        let net = Mlp::init(&[100, 50], &[Activation::Tanh], &mut seeded_rng(1)).unwrap();
        let w = &net.layers()[0].weights;
        assert_eq!(w.len(), 5000);
        let mean = w.iter().sum::<f64>() / w.len() as f64;
        assert!(mean.abs() < 0.02, "mean {mean}");
        let limit = (6.0f64 / 150.0).sqrt();
        assert!(w.iter().all(|v| v.abs() <= limit));
    }

    #[test]
    fn init_rejects_bad_dims() {
        let mut rng = seeded_rng(0);
        assert!(Mlp::init(&[3], &[], &mut rng).is_err());
        assert!(Mlp::init(&[3, 2], &[], &mut rng).is_err());
        assert!(Mlp::init(&[3, 0], &[Activation::Tanh], &mut rng).is_err());
    }

    #[test]
    fn identity_layer_passes_input_through() {
        let layer = DenseLayer {
            weights: Array2::eye(2),
            bias: Array1::zeros(2),
            activation: Activation::Identity,
        };
        let net = Mlp::new(vec![layer]).unwrap();
        let out = net.predict(&array![[1.0, 2.0]]).unwrap();
        assert_eq!(out, array![[1.0, 2.0]]);
    }

    #[test]
    fn zero_sigmoid_net_outputs_half() {
        let net = Mlp::zeros(&[3, 5, 2], &[Activation::Relu, Activation::Sigmoid]).unwrap();
        let out = net.predict(&array![[1.0, -4.0, 9.0], [0.3, 0.2, 0.1]]).unwrap();
        assert!(out.iter().all(|&v| v == 0.5));
    }

    #[test]
    fn two_layer_tanh_hand_evaluated() {
        let l1 = DenseLayer {
            weights: array![[0.5, -0.25], [0.1, 0.2]],
            bias: array![0.1, -0.1],
            activation: Activation::Tanh,
        };
        let l2 = DenseLayer {
            weights: array![[0.3, -0.7]],
            bias: array![0.05],
            activation: Activation::Tanh,
        };
        let net = Mlp::new(vec![l1, l2]).unwrap();
        let out = net.predict(&array![[1.0, 0.0]]).unwrap();
        // first layer: tanh(0.5 + 0.1), tanh(0.1 - 0.1)
        let h0 = 0.6f64.tanh();
        let h1 = 0.0f64.tanh();
        let expected = (0.3 * h0 - 0.7 * h1 + 0.05).tanh();
        assert!((out[[0, 0]] - expected).abs() < 1e-15);
        assert!((expected - 0.208_033_367_609_057).abs() < 1e-12);
    }

    #[test]
    fn forward_rejects_wrong_width() {
        let net = Mlp::zeros(&[3, 1], &[Activation::Sigmoid]).unwrap();
        assert!(matches!(net.forward(&Array2::zeros((2, 4))), Err(Error::Shape { .. })));
    }

    #[test]
    fn forward_is_bitwise_repeatable() {
        let net = Mlp::init(&[5, 7, 3], &[Activation::Tanh, Activation::Sigmoid], &mut seeded_rng(3)).unwrap();
        let x = Array2::from_shape_fn((4, 5), |(i, j)| (i as f64 - j as f64) * 0.37);
        assert_eq!(net.predict(&x).unwrap(), net.predict(&x).unwrap());
    }

    #[test]
    fn zero_upstream_gives_zero_gradients() {
        let net = Mlp::init(&[3, 4, 2], &[Activation::Tanh, Activation::Sigmoid], &mut seeded_rng(1)).unwrap();
        let x = Array2::from_elem((5, 3), 0.7);
        let cache = net.forward(&x).unwrap();
        let (g, gi) = net.backward(&cache, &Array2::zeros((5, 2))).unwrap();
        assert!(g.tensors().iter().all(|t| t.iter().all(|&v| v == 0.0)));
        assert!(gi.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn identity_layer_sum_loss_hand_chain_rule() {
        let w = array![[1.0, 2.0, -1.0], [0.5, 0.0, 3.0]];
        let net = Mlp::new(vec![DenseLayer {
            weights: w.clone(),
            bias: array![0.2, -0.3],
            activation: Activation::Identity,
        }])
        .unwrap();
        let x = array![[1.0, 2.0, 3.0], [-1.0, 0.5, 4.0]];
        let cache = net.forward(&x).unwrap();
        let (g, gi) = net.backward(&cache, &Array2::ones((2, 2))).unwrap();
        // dL/dW[o][i] = sum_rows x[r][i]
        let col_sums = x.sum_axis(Axis(0));
        for o in 0..2 {
            for i in 0..3 {
                assert_eq!(g.layers[0].weights[[o, i]], col_sums[i]);
            }
        }
        assert_eq!(g.layers[0].bias, array![2.0, 2.0]);
        // dL/dx[r] = ones * W
        let expected = Array2::<f64>::ones((2, 2)).dot(&w);
        assert_eq!(gi, expected);
    }

    #[test]
    fn backward_matches_finite_differences_all_activations() {
        let acts = [Activation::Tanh, Activation::Sigmoid, Activation::Relu, Activation::Identity];
        for (k, &act) in acts.iter().enumerate() {
            let mut rng = seeded_rng(100 + k as u64);
            let net = Mlp::init(&[4, 6, 3], &[act, Activation::Sigmoid], &mut rng).unwrap();
            let x = Array2::from_shape_fn((5, 4), |(i, j)| ((i * 7 + j * 3) as f64 * 0.31).sin());
            let target = Array2::from_shape_fn((5, 3), |(i, j)| ((i + j) % 2) as f64);
            let loss = |n: &Mlp| {
                let out = n.predict(&x).unwrap();
                (&out - &target).mapv(|d| d * d).sum() * 0.5
            };
            let cache = net.forward(&x).unwrap();
            let upstream = cache.output() - &target;
            let (g, _) = net.backward(&cache, &upstream).unwrap();
            let numeric = finite_diff_grad(loss, &net, 1e-5).unwrap();
            let err = max_relative_error(&g, &numeric);
            assert!(err < 1e-4, "{act:?}: relative error {err}");
        }
    }

    #[test]
    fn backward_shape_errors() {
        let net = Mlp::zeros(&[3, 2], &[Activation::Sigmoid]).unwrap();
        let cache = net.forward(&Array2::zeros((4, 3))).unwrap();
        assert!(net.backward(&cache, &Array2::zeros((4, 3))).is_err());
        let bad = ForwardCache { activations: vec![Array2::zeros((4, 3))] };
        assert!(net.backward(&bad, &Array2::zeros((4, 2))).is_err());
    }
}
