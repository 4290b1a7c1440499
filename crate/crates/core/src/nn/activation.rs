use ndarray::{Array2, Zip};
use serde::{Deserialize, Serialize};

/// Element-wise non-linearity applied after a dense affine map.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    Tanh,
    Sigmoid,
    Relu,
    Identity,
}

impl Activation {
    #[inline]
    pub fn apply(self, z: f64) -> f64 {
        match self {
            Activation::Tanh => z.tanh(),
            Activation::Sigmoid => sigmoid(z),
            Activation::Relu => z.max(0.0),
            Activation::Identity => z,
        }
    }

    /// Derivative expressed through the activation's output `y = f(z)`.
    ///
    /// Every supported non-linearity admits this form, so the forward cache
    /// only needs to keep outputs.
    #[inline]
    pub fn derivative_from_output(self, y: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - y * y,
            Activation::Sigmoid => y * (1.0 - y),
            Activation::Relu => {
                if y > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Identity => 1.0,
        }
    }

    pub fn apply_inplace(self, z: &mut Array2<f64>) {
        if self != Activation::Identity {
            z.mapv_inplace(|v| self.apply(v));
        }
    }

    /// Multiplies `grad` in place by f'(z), given the cached outputs.
    pub fn backprop_inplace(self, grad: &mut Array2<f64>, output: &Array2<f64>) {
        if self == Activation::Identity {
            return;
        }
        Zip::from(grad)
            .and(output)
            .for_each(|g, &y| *g *= self.derivative_from_output(y));
    }
}

/// Logistic function, written to stay finite for large |z|.
#[inline]
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}
