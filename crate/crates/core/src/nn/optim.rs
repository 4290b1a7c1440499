use serde::{Deserialize, Serialize};

use super::Tensors;
use crate::error::{Error, Result};

pub const BETA1: f64 = 0.9;
pub const BETA2: f64 = 0.999;
pub const ADAM_EPSILON: f64 = 1e-8;

/// Update rule used by [`Optimizer`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    /// Adaptive moments with bias correction.
    #[default]
    Adam,
    /// Plain `theta += lr * grad` (or `-=` when descending).
    Plain,
}

/// First/second moment accumulators, one buffer per parameter tensor.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub first_moment: Vec<Vec<f64>>,
    pub second_moment: Vec<Vec<f64>>,
    pub step: u64,
}

impl AdamState {
    pub fn for_params<P: Tensors + ?Sized>(params: &P) -> Self {
        let zeros: Vec<Vec<f64>> = params.tensors().iter().map(|t| vec![0.0; t.len()]).collect();
        Self {
            first_moment: zeros.clone(),
            second_moment: zeros,
            step: 0,
        }
    }

    /// One bias-corrected adaptive-moment update.
    ///
    /// With `maximize` the parameters move along the gradient (ascent on an
    /// objective), otherwise against it. A non-finite gradient entry aborts
    /// the step before anything is modified.
    pub fn step<P, G>(&mut self, params: &mut P, grads: &G, lr: f64, maximize: bool) -> Result<()>
    where
        P: Tensors + ?Sized,
        G: Tensors + ?Sized,
    {
        let grads = grads.tensors();
        check_step(&grads, &self.first_moment, lr)?;
        self.step += 1;
        let t = self.step as i32;
        let bias1 = 1.0 - BETA1.powi(t);
        let bias2 = 1.0 - BETA2.powi(t);
        let sign = if maximize { 1.0 } else { -1.0 };

        let mut params = params.tensors_mut();
        if params.len() != grads.len() {
            return Err(Error::shape("adam step tensors", grads.len(), params.len()));
        }
        for (((p, g), m), v) in params
            .iter_mut()
            .zip(&grads)
            .zip(&mut self.first_moment)
            .zip(&mut self.second_moment)
        {
            if p.len() != g.len() {
                return Err(Error::shape("adam step tensor length", g.len(), p.len()));
            }
            for i in 0..p.len() {
                let gi = g[i];
                m[i] = BETA1 * m[i] + (1.0 - BETA1) * gi;
                v[i] = BETA2 * v[i] + (1.0 - BETA2) * gi * gi;
                let m_hat = m[i] / bias1;
                let v_hat = v[i] / bias2;
                p[i] += sign * lr * m_hat / (v_hat.sqrt() + ADAM_EPSILON);
            }
        }
        Ok(())
    }
}

fn check_step(grads: &[&[f64]], moments: &[Vec<f64>], lr: f64) -> Result<()> {
    if !(lr > 0.0 && lr.is_finite()) {
        return Err(Error::InvalidArgument(format!("learning rate must be positive, got {lr}")));
    }
    if grads.len() != moments.len() {
        return Err(Error::shape("optimizer state tensors", moments.len(), grads.len()));
    }
    for (g, m) in grads.iter().zip(moments) {
        if g.len() != m.len() {
            return Err(Error::shape("optimizer state tensor length", m.len(), g.len()));
        }
    }
    if grads.iter().any(|g| g.iter().any(|v| !v.is_finite())) {
        return Err(Error::NonFinite("gradient"));
    }
    Ok(())
}

/// Optimizer bound to one parameter set.
#[derive(Debug, Clone)]
pub struct Optimizer {
    kind: OptimizerKind,
    lr: f64,
    maximize: bool,
    state: AdamState,
}

impl Optimizer {
    pub fn new<P: Tensors + ?Sized>(kind: OptimizerKind, lr: f64, maximize: bool, params: &P) -> Self {
        Self {
            kind,
            lr,
            maximize,
            state: AdamState::for_params(params),
        }
    }

    pub fn state(&self) -> &AdamState {
        &self.state
    }

    pub fn step<P, G>(&mut self, params: &mut P, grads: &G) -> Result<()>
    where
        P: Tensors + ?Sized,
        G: Tensors + ?Sized,
    {
        match self.kind {
            OptimizerKind::Adam => self.state.step(params, grads, self.lr, self.maximize),
            OptimizerKind::Plain => {
                let grads = grads.tensors();
                check_step(&grads, &self.state.first_moment, self.lr)?;
                self.state.step += 1;
                let scale = if self.maximize { self.lr } else { -self.lr };
                for (p, g) in params.tensors_mut().into_iter().zip(grads) {
                    for (pi, gi) in p.iter_mut().zip(g) {
                        *pi += scale * gi;
                    }
                }
                Ok(())
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// A bare scalar parameter.
    struct Scalar(Vec<f64>);

    impl Tensors for Scalar {
        fn tensors(&self) -> Vec<&[f64]> {
            vec![&self.0]
        }
        fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
            vec![&mut self.0]
        }
    }

    #[test]
    fn zero_gradient_leaves_params_and_counts_step() {
        let mut p = Scalar(vec![1.5, -2.0]);
        let mut st = AdamState::for_params(&p);
        st.step(&mut p, &Scalar(vec![0.0, 0.0]), 0.1, true).unwrap();
        assert_eq!(p.0, vec![1.5, -2.0]);
        assert_eq!(st.step, 1);
    }

    #[test]
    fn first_step_moves_by_lr() {
        // m_hat = 1, v_hat = 1 at step 1, so the move is lr / (1 + eps).
        let mut p = Scalar(vec![0.0]);
        let mut st = AdamState::for_params(&p);
        st.step(&mut p, &Scalar(vec![1.0]), 0.01, true).unwrap();
        let expected = 0.01 / (1.0 + ADAM_EPSILON);
        assert!((p.0[0] - expected).abs() < 1e-15);
        assert!((p.0[0] - 0.01).abs() < 1e-9);
    }

    #[test]
    fn ascent_and_descent_are_negations() {
        let g = Scalar(vec![0.3, -1.7, 4.0]);
        let mut up = Scalar(vec![0.0; 3]);
        let mut down = Scalar(vec![0.0; 3]);
        AdamState::for_params(&up).step(&mut up, &g, 0.05, true).unwrap();
        AdamState::for_params(&down).step(&mut down, &g, 0.05, false).unwrap();
        for (a, b) in up.0.iter().zip(&down.0) {
            assert_eq!(*a, -*b);
        }
    }

    #[test]
    fn second_moment_stays_non_negative() {
        let mut p = Scalar(vec![0.0; 2]);
        let mut st = AdamState::for_params(&p);
        for k in 0..20 {
            let g = Scalar(vec![(k as f64).sin(), -(k as f64)]);
            st.step(&mut p, &g, 0.01, false).unwrap();
        }
        assert_eq!(st.step, 20);
        assert!(st.second_moment[0].iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn non_finite_gradient_aborts() {
        let mut p = Scalar(vec![1.0]);
        let mut st = AdamState::for_params(&p);
        let err = st.step(&mut p, &Scalar(vec![f64::NAN]), 0.01, true).unwrap_err();
        assert!(matches!(err, Error::NonFinite(_)));
        assert_eq!(p.0, vec![1.0]);
        assert_eq!(st.step, 0);
    }

    #[test]
    fn plain_ascent() {
        let mut p = Scalar(vec![1.0]);
        let mut opt = Optimizer::new(OptimizerKind::Plain, 0.5, true, &p);
        opt.step(&mut p, &Scalar(vec![2.0])).unwrap();
        assert_eq!(p.0, vec![2.0]);
    }

    #[test]
    fn rejects_bad_lr() {
        let mut p = Scalar(vec![1.0]);
        let mut st = AdamState::for_params(&p);
        assert!(st.step(&mut p, &Scalar(vec![1.0]), 0.0, true).is_err());
    }
}
