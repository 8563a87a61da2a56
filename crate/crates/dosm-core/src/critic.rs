//! Per-service value networks and experience replay.
//!
//! Each service owns a small MLP "critic" that scores the current system
//! state with a quality value in (0, 1). The training signal is the
//! service's measured mean delay folded against its threshold: meeting the
//! threshold with margin scores near 1, violating it scores 0. The
//! lifecycle policy reads `q < q_threshold` as "this placement is going
//! bad" and triggers re-optimization.
//!
//! Experiences accumulate in a bounded FIFO replay buffer; training draws
//! uniform batches with replacement and performs plain MSE gradient steps
//! with Adam.

use std::collections::VecDeque;

use ndarray::{Array1, Array2, Axis};
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{NetworkConfig, ServiceId, ServiceSpec};
use crate::decision::DecisionKind;
use crate::nn::{AdamParams, Dense};
use crate::placement::Placement;
use crate::seeds;
use crate::trace::DemandMatrix;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticConfig {
    pub input_dim: usize,
    pub hidden: Vec<usize>,
    pub learning_rate: f64,
}

/// Weight and bias gradients of one `Dense` layer.
type DenseGrad = (Array2<f64>, Array1<f64>);
/// Batch loss plus per-layer and head gradients.
type BatchGradients = (f64, Vec<DenseGrad>, DenseGrad);

/// State-quality estimator: ReLU MLP with a logistic output squash.
/// An untrained all-zero head scores every state 0.5 (undecided).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueNet {
    pub config: CriticConfig,
    layers: Vec<Dense>,
    head: Dense,
    adam_step: u64,
}

impl ValueNet {
    pub fn new(config: CriticConfig, seed: u64) -> Self {
        assert!(!config.hidden.is_empty(), "at least one hidden layer");
        let mut rng = seeds::rng_for("critic-init", seed);
        let mut layers = Vec::with_capacity(config.hidden.len());
        let mut in_dim = config.input_dim;
        for &units in &config.hidden {
            layers.push(Dense::init(units, in_dim, &mut rng));
            in_dim = units;
        }
        let head = Dense::init(1, in_dim, &mut rng);
        Self {
            config,
            layers,
            head,
            adam_step: 0,
        }
    }

    /// Quality estimate for one encoded state.
    pub fn q_value(&self, state: &[f64]) -> Result<f64, CriticError> {
        if state.len() != self.config.input_dim {
            return Err(CriticError::ShapeMismatch {
                expected: self.config.input_dim,
                got: state.len(),
            });
        }
        let mut a = Array1::from(state.to_vec());
        for layer in &self.layers {
            a = layer.forward_vec(&a).mapv(|v| v.max(0.0));
        }
        let z = self.head.forward_vec(&a)[0];
        Ok(crate::nn::sigmoid(z))
    }

    /// Batched forward pass caching activations; returns (activations per
    /// layer including input, pre-activations, q column).
    #[allow(clippy::type_complexity)]
    fn forward_batch(&self, x: &Array2<f64>) -> (Vec<Array2<f64>>, Vec<Array2<f64>>, Array1<f64>) {
        let mut acts = Vec::with_capacity(self.layers.len() + 1);
        let mut pre = Vec::with_capacity(self.layers.len());
        acts.push(x.clone());
        for layer in &self.layers {
            let z = acts.last().unwrap().dot(&layer.w.value.t()) + &layer.b.value;
            pre.push(z.clone());
            acts.push(z.mapv(|v| v.max(0.0)));
        }
        let logits = acts.last().unwrap().dot(&self.head.w.value.t()) + &self.head.b.value;
        let q = logits.index_axis(Axis(1), 0).mapv(crate::nn::sigmoid);
        (acts, pre, q)
    }

    /// Mean squared error of the batch without updating.
    pub fn batch_loss(&self, states: &Array2<f64>, targets: &Array1<f64>) -> f64 {
        let (_, _, q) = self.forward_batch(states);
        let d = &q - targets;
        d.iter().map(|v| v * v).sum::<f64>() / d.len() as f64
    }

    /// Loss and parameter gradients for one batch.
    fn backward_batch(&self, states: &Array2<f64>, targets: &Array1<f64>) -> BatchGradients {
        let batch = states.nrows() as f64;
        let (acts, pre, q) = self.forward_batch(states);
        let diff = &q - targets;
        let loss = diff.iter().map(|v| v * v).sum::<f64>() / batch;
        // dL/dlogit = 2 (q - y) q (1 - q) / B, column vector.
        let dlogit = (&diff * &q * &(1.0 - &q)).mapv(|v| 2.0 * v / batch);
        let dlogit2 = dlogit.view().insert_axis(Axis(1)).to_owned();
        let head_grad = (
            dlogit2.t().dot(acts.last().unwrap()),
            Array1::from(vec![dlogit.sum()]),
        );
        let mut da = dlogit2.dot(&self.head.w.value);
        let mut grads: Vec<(Array2<f64>, Array1<f64>)> = Vec::with_capacity(self.layers.len());
        for (i, layer) in self.layers.iter().enumerate().rev() {
            let mask = pre[i].mapv(|v| if v > 0.0 { 1.0 } else { 0.0 });
            let dz = &da * &mask;
            grads.push((dz.t().dot(&acts[i]), dz.sum_axis(Axis(0))));
            da = dz.dot(&layer.w.value);
        }
        grads.reverse();
        (loss, grads, head_grad)
    }

    /// One uniform-with-replacement batch from the buffer, one Adam step.
    /// Returns the pre-update batch loss.
    pub fn train_step<R: Rng>(
        &mut self,
        buffer: &ReplayBuffer,
        batch_size: usize,
        rng: &mut R,
    ) -> Result<f64, CriticError> {
        if buffer.is_empty() {
            return Err(CriticError::EmptyBuffer);
        }
        if batch_size == 0 {
            return Err(CriticError::BadBatch);
        }
        let mut states = Array2::zeros((batch_size, self.config.input_dim));
        let mut targets = Array1::zeros(batch_size);
        for b in 0..batch_size {
            let exp = buffer.get(rng.random_range(0..buffer.len()));
            if exp.state.len() != self.config.input_dim {
                return Err(CriticError::ShapeMismatch {
                    expected: self.config.input_dim,
                    got: exp.state.len(),
                });
            }
            for (j, v) in exp.state.iter().enumerate() {
                states[[b, j]] = *v;
            }
            targets[b] = exp.target;
        }
        let (loss, grads, head_grad) = self.backward_batch(&states, &targets);
        self.adam_step += 1;
        let t = self.adam_step;
        let p = AdamParams::with_learning_rate(self.config.learning_rate);
        for (layer, (gw, gb)) in self.layers.iter_mut().zip(&grads) {
            layer.w.step(gw, &p, t);
            layer.b.step(gb, &p, t);
        }
        self.head.w.step(&head_grad.0, &p, t);
        self.head.b.step(&head_grad.1, &p, t);
        Ok(loss)
    }

    /// Loss plus flattened gradients for a batch (for gradient checks).
    pub fn batch_grads_flat(&self, states: &Array2<f64>, targets: &Array1<f64>) -> (f64, Vec<f64>) {
        let (loss, grads, head_grad) = self.backward_batch(states, targets);
        let mut flat = Vec::new();
        for (gw, gb) in &grads {
            flat.extend(gw.iter());
            flat.extend(gb.iter());
        }
        flat.extend(head_grad.0.iter());
        flat.extend(head_grad.1.iter());
        (loss, flat)
    }

    pub fn params_flat(&self) -> Vec<f64> {
        let mut flat = Vec::new();
        for d in &self.layers {
            flat.extend(d.w.value.iter());
            flat.extend(d.b.value.iter());
        }
        flat.extend(self.head.w.value.iter());
        flat.extend(self.head.b.value.iter());
        flat
    }

    pub fn set_params_flat(&mut self, flat: &[f64]) {
        let mut it = flat.iter().copied();
        for d in &mut self.layers {
            for v in d.w.value.iter_mut() {
                *v = it.next().expect("enough parameters");
            }
            for v in d.b.value.iter_mut() {
                *v = it.next().unwrap();
            }
        }
        for v in self.head.w.value.iter_mut() {
            *v = it.next().unwrap();
        }
        for v in self.head.b.value.iter_mut() {
            *v = it.next().unwrap();
        }
        assert!(it.next().is_none(), "parameter count mismatch");
    }

    /// Zero all parameters (useful to pin the untrained output at 0.5).
    pub fn zero_params(&mut self) {
        let n = self.params_flat().len();
        self.set_params_flat(&vec![0.0; n]);
    }
}

/// Training label from measured feedback: the normalized margin to the
/// delay threshold, clamped to [0, 1]. Zero delay scores 1; delays at or
/// beyond the threshold score 0.
pub fn target_value(feedback_s: f64, threshold_s: f64) -> f64 {
    ((threshold_s - feedback_s) / threshold_s).clamp(0.0, 1.0)
}

/// Encode the global system state as seen by every critic:
/// per-(edge, service) demand normalized by service capacity (edge-major),
/// then raw instance counts (edge-major), then per-service mean delay
/// normalized by its threshold. Length `2 * E * S + S`.
pub fn encode_state(
    demand: &DemandMatrix,
    placement: &Placement,
    mean_delay_s: &[f64],
    services: &[ServiceSpec],
    cfg: &NetworkConfig,
) -> Vec<f64> {
    let e_n = cfg.num_edges;
    let s_n = services.len();
    debug_assert_eq!(demand.num_edges(), e_n);
    debug_assert_eq!(demand.num_services(), s_n);
    debug_assert_eq!(mean_delay_s.len(), s_n);
    let mut state = Vec::with_capacity(2 * e_n * s_n + s_n);
    for e in 0..e_n {
        for (s, spec) in services.iter().enumerate() {
            state.push(demand.count(e, s) as f64 / spec.capacity as f64);
        }
    }
    for e in 0..e_n {
        for s in 0..s_n {
            state.push(placement.count(e, s) as f64);
        }
    }
    for (s, spec) in services.iter().enumerate() {
        state.push(mean_delay_s[s] / spec.delay_threshold_s);
    }
    state
}

/// One observation of the running system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Experience {
    pub state: Vec<f64>,
    pub service: ServiceId,
    pub action: DecisionKind,
    /// Measured mean delay for the service over the slot (seconds).
    pub feedback_s: f64,
    /// Label derived from the feedback at storage time.
    pub target: f64,
}

/// Bounded FIFO of experiences.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct ReplayBuffer {
    capacity: usize,
    buf: VecDeque<Experience>,
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        Self {
            capacity,
            buf: VecDeque::with_capacity(capacity),
        }
    }

    pub fn push(&mut self, exp: Experience) {
        if self.buf.len() == self.capacity {
            self.buf.pop_front();
        }
        self.buf.push_back(exp);
    }

    pub fn len(&self) -> usize {
        self.buf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buf.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn get(&self, i: usize) -> &Experience {
        &self.buf[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = &Experience> {
        self.buf.iter()
    }
}

/// Offline training: `episodes` rounds of `iterations` batch steps each.
/// Returns the mean batch loss per episode.
pub fn train_critic(
    net: &mut ValueNet,
    buffer: &ReplayBuffer,
    episodes: usize,
    iterations: usize,
    batch_size: usize,
    seed: u64,
) -> Result<Vec<f64>, CriticError> {
    let mut rng = seeds::rng_for("replay", seed);
    let mut losses = Vec::with_capacity(episodes);
    for _ in 0..episodes {
        let mut total = 0.0;
        for _ in 0..iterations {
            total += net.train_step(buffer, batch_size, &mut rng)?;
        }
        losses.push(total / iterations.max(1) as f64);
    }
    Ok(losses)
}

#[derive(Debug, Error)]
pub enum CriticError {
    #[error("state length mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("replay buffer is empty")]
    EmptyBuffer,
    #[error("batch size must be positive")]
    BadBatch,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_net(seed: u64) -> ValueNet {
        ValueNet::new(
            CriticConfig {
                input_dim: 6,
                hidden: vec![8, 5],
                learning_rate: 5e-3,
            },
            seed,
        )
    }

    #[test]
    fn zero_network_scores_half() {
        let mut net = tiny_net(3);
        net.zero_params();
        let q = net.q_value(&[1.0, -2.0, 0.5, 3.0, 0.0, 9.0]).unwrap();
        assert_eq!(q, 0.5);
    }

    #[test]
    fn q_is_in_unit_interval_and_shape_checked() {
        let net = tiny_net(4);
        let q = net.q_value(&[0.2; 6]).unwrap();
        assert!(q > 0.0 && q < 1.0);
        assert!(matches!(
            net.q_value(&[0.0; 5]),
            Err(CriticError::ShapeMismatch {
                expected: 6,
                got: 5
            })
        ));
    }

    #[test]
    fn target_value_clamps_the_margin() {
        assert_eq!(target_value(0.0, 0.5), 1.0);
        assert_eq!(target_value(0.5, 0.5), 0.0);
        assert_eq!(target_value(1.5, 0.5), 0.0);
        assert!((target_value(0.25, 0.5) - 0.5).abs() < 1e-12);
        assert!((target_value(0.05, 0.1) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn replay_buffer_is_fifo_bounded() {
        let mut buf = ReplayBuffer::new(3);
        for i in 0..5 {
            buf.push(Experience {
                state: vec![i as f64],
                service: 0,
                action: DecisionKind::NoChange,
                feedback_s: 0.0,
                target: 0.0,
            });
        }
        assert_eq!(buf.len(), 3);
        assert_eq!(buf.get(0).state[0], 2.0);
        assert_eq!(buf.get(2).state[0], 4.0);
    }

    #[test]
    fn gradients_match_finite_differences() {
        let mut net = tiny_net(8);
        let mut rng = seeds::rng_for("critic-fd", 1);
        let states = Array2::from_shape_fn((4, 6), |_| rng.random_range(-1.0..1.0));
        let targets = Array1::from_shape_fn(4, |_| rng.random_range(0.0..1.0));
        let (_, analytic) = net.batch_grads_flat(&states, &targets);
        let params = net.params_flat();
        let eps = 1e-6;
        for k in (0..params.len()).step_by(7) {
            let mut plus = params.clone();
            plus[k] += eps;
            net.set_params_flat(&plus);
            let lp = net.batch_loss(&states, &targets);
            let mut minus = params.clone();
            minus[k] -= eps;
            net.set_params_flat(&minus);
            let lm = net.batch_loss(&states, &targets);
            net.set_params_flat(&params);
            let numeric = (lp - lm) / (2.0 * eps);
            let denom = analytic[k].abs().max(numeric.abs()).max(1e-8);
            assert!(
                (analytic[k] - numeric).abs() / denom < 1e-5,
                "param {k}: analytic {} vs numeric {}",
                analytic[k],
                numeric
            );
        }
    }

    #[test]
    fn training_fits_a_separable_signal() {
        // Two clusters of states with targets 0.1 and 0.9.
        let mut buf = ReplayBuffer::new(100);
        let mut rng = seeds::rng_for("critic-data", 2);
        for i in 0..80 {
            let hot = i % 2 == 0;
            let state: Vec<f64> = (0..6)
                .map(|_| if hot { 1.0 } else { -1.0 } + rng.random_range(-0.1..0.1))
                .collect();
            buf.push(Experience {
                state,
                service: 0,
                action: DecisionKind::NoChange,
                feedback_s: 0.0,
                target: if hot { 0.9 } else { 0.1 },
            });
        }
        let mut net = tiny_net(5);
        let losses = train_critic(&mut net, &buf, 60, 10, 16, 7).unwrap();
        assert!(losses.last().unwrap() < &0.01, "loss: {:?}", losses.last());
        let hot_q = net.q_value(&[1.0; 6]).unwrap();
        let cold_q = net.q_value(&[-1.0; 6]).unwrap();
        assert!(hot_q > 0.8, "hot {hot_q}");
        assert!(cold_q < 0.2, "cold {cold_q}");
    }

    #[test]
    fn train_is_deterministic_for_a_seed() {
        let mut buf = ReplayBuffer::new(10);
        for i in 0..10 {
            buf.push(Experience {
                state: vec![i as f64 / 10.0; 6],
                service: 0,
                action: DecisionKind::NoChange,
                feedback_s: 0.0,
                target: (i % 2) as f64,
            });
        }
        let mut a = tiny_net(6);
        let mut b = tiny_net(6);
        let la = train_critic(&mut a, &buf, 5, 4, 8, 3).unwrap();
        let lb = train_critic(&mut b, &buf, 5, 4, 8, 3).unwrap();
        assert_eq!(la, lb);
        assert_eq!(a.params_flat(), b.params_flat());
    }

    #[test]
    fn encode_state_layout_and_length() {
        use crate::catalog::EdgeNode;
        let services = vec![
            ServiceSpec {
                id: 0,
                name: "A".into(),
                delay_threshold_s: 0.5,
                input_bits: 1000.0,
                compute_intensity: 1000.0,
                instance_layer_bytes: 1,
                capacity: 10,
            },
            ServiceSpec {
                id: 1,
                name: "B".into(),
                delay_threshold_s: 0.1,
                input_bits: 1000.0,
                compute_intensity: 1000.0,
                instance_layer_bytes: 1,
                capacity: 20,
            },
        ];
        let cfg = NetworkConfig {
            num_edges: 2,
            ..test_cfg()
        };
        let _ = EdgeNode {
            id: 0,
            position: (0.0, 0.0),
            cpu_hz: 1e10,
            storage_capacity_bytes: 1,
            storage_used_bytes: 0,
        };
        let mut demand = DemandMatrix::zero(0, 2, 2);
        demand.add(0, 1); // one vehicle for service B at edge 0
        demand.add(1, 0);
        demand.add(1, 0);
        let mut placement = Placement::new(2, 2);
        placement.add_instance(0, 0);
        placement.add_instance(1, 1);
        let state = encode_state(&demand, &placement, &[0.25, 0.05], &services, &cfg);
        assert_eq!(state.len(), 2 * 2 * 2 + 2);
        // Demand block, edge-major: (e0,s0)=0, (e0,s1)=1/20, (e1,s0)=2/10, (e1,s1)=0.
        assert_eq!(&state[..4], &[0.0, 0.05, 0.2, 0.0]);
        // Count block: e0 holds s0, e1 holds s1.
        assert_eq!(&state[4..8], &[1.0, 0.0, 0.0, 1.0]);
        // Delay block: 0.25/0.5 and 0.05/0.1.
        assert!((state[8] - 0.5).abs() < 1e-12);
        assert!((state[9] - 0.5).abs() < 1e-12);
    }

    fn test_cfg() -> NetworkConfig {
        NetworkConfig {
            bandwidth_hz: 1e6,
            tx_power_w: 10.0,
            noise_power_w: 1e-13,
            backhaul_bps: 1e9,
            user_context_bytes: 1e6,
            propagation_speed_mps: 3e8,
            slot_seconds: 5.0,
            horizon_seconds: 750.0,
            frame_slots: 15,
            q_threshold: 0.5,
            util_high_pct: 90.0,
            util_low_pct: 30.0,
            num_edges: 9,
            region_side_m: 15000.0,
        }
    }
}
