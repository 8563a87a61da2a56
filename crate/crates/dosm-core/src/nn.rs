//! Shared neural-network primitives: Adam-tracked parameter tensors,
//! uniform fan-in initialization, and elementwise activations.
//!
//! Both learned components (the demand forecaster and the value networks)
//! are trained with hand-written backpropagation; this module only holds
//! the parameter bookkeeping they share.

use ndarray::{Array1, Array2};
use rand::Rng;
use serde::{Deserialize, Serialize};

/// Adam optimizer hyper-parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdamParams {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamParams {
    pub fn with_learning_rate(learning_rate: f64) -> Self {
        Self {
            learning_rate,
            ..Self::default()
        }
    }
}

impl Default for AdamParams {
    fn default() -> Self {
        Self {
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// A weight matrix with its Adam first/second-moment state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tensor2 {
    pub value: Array2<f64>,
    m: Array2<f64>,
    v: Array2<f64>,
}

/// A bias vector with its Adam first/second-moment state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tensor1 {
    pub value: Array1<f64>,
    m: Array1<f64>,
    v: Array1<f64>,
}

impl Tensor2 {
    /// Uniform init in ±1/sqrt(fan_in) where fan_in is the column count.
    pub fn init<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> Self {
        let bound = 1.0 / (cols.max(1) as f64).sqrt();
        let value = Array2::from_shape_fn((rows, cols), |_| rng.random_range(-bound..bound));
        Self {
            m: Array2::zeros((rows, cols)),
            v: Array2::zeros((rows, cols)),
            value,
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            value: Array2::zeros((rows, cols)),
            m: Array2::zeros((rows, cols)),
            v: Array2::zeros((rows, cols)),
        }
    }

    /// One bias-corrected Adam update. `t` is the 1-based step count.
    pub fn step(&mut self, grad: &Array2<f64>, params: &AdamParams, t: u64) {
        debug_assert_eq!(grad.dim(), self.value.dim());
        let c1 = 1.0 - params.beta1.powi(t as i32);
        let c2 = 1.0 - params.beta2.powi(t as i32);
        for ((value, (m, v)), g) in self
            .value
            .iter_mut()
            .zip(self.m.iter_mut().zip(self.v.iter_mut()))
            .zip(grad.iter())
        {
            *m = params.beta1 * *m + (1.0 - params.beta1) * g;
            *v = params.beta2 * *v + (1.0 - params.beta2) * g * g;
            let m_hat = *m / c1;
            let v_hat = *v / c2;
            *value -= params.learning_rate * m_hat / (v_hat.sqrt() + params.epsilon);
        }
    }
}

impl Tensor1 {
    pub fn zeros(len: usize) -> Self {
        Self {
            value: Array1::zeros(len),
            m: Array1::zeros(len),
            v: Array1::zeros(len),
        }
    }

    pub fn step(&mut self, grad: &Array1<f64>, params: &AdamParams, t: u64) {
        debug_assert_eq!(grad.len(), self.value.len());
        let c1 = 1.0 - params.beta1.powi(t as i32);
        let c2 = 1.0 - params.beta2.powi(t as i32);
        for ((value, (m, v)), g) in self
            .value
            .iter_mut()
            .zip(self.m.iter_mut().zip(self.v.iter_mut()))
            .zip(grad.iter())
        {
            *m = params.beta1 * *m + (1.0 - params.beta1) * g;
            *v = params.beta2 * *v + (1.0 - params.beta2) * g * g;
            let m_hat = *m / c1;
            let v_hat = *v / c2;
            *value -= params.learning_rate * m_hat / (v_hat.sqrt() + params.epsilon);
        }
    }
}

/// A fully connected layer (weights + bias). The activation and the
/// backward pass belong to the caller.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dense {
    pub w: Tensor2,
    pub b: Tensor1,
}

impl Dense {
    pub fn init<R: Rng>(out_dim: usize, in_dim: usize, rng: &mut R) -> Self {
        Self {
            w: Tensor2::init(out_dim, in_dim, rng),
            b: Tensor1::zeros(out_dim),
        }
    }

    pub fn in_dim(&self) -> usize {
        self.w.value.ncols()
    }

    pub fn out_dim(&self) -> usize {
        self.w.value.nrows()
    }

    /// Affine map of a single input vector.
    pub fn forward_vec(&self, x: &Array1<f64>) -> Array1<f64> {
        self.w.value.dot(x) + &self.b.value
    }
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

#[inline]
pub fn relu(x: f64) -> f64 {
    x.max(0.0)
}
