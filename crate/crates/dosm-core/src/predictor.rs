//! Per-service demand forecasting with a stacked GRU.
//!
//! Each service owns one model. The input at every step is the per-edge
//! demand row for one slot; after reading a `seq_len`-slot window the final
//! hidden state feeds a small fully connected stack that emits the next
//! `horizon` slots for every edge at once (flattened frame-major:
//! `index = slot_in_frame * num_edges + edge`).
//!
//! Inputs and targets are z-score standardized with statistics fitted on
//! the training history; predictions are mapped back and clamped at zero.
//! Training is full backpropagation through time with one Adam step per
//! window. When a model has not seen enough history to fill its window it
//! falls back to persistence (repeat the latest row) and flags it.

use ndarray::{Array1, Array2, Axis};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::nn::{sigmoid, AdamParams, Dense, Tensor1, Tensor2};
use crate::seeds;

// ── Standardization ─────────────────────────────────────────────────────

/// Z-score parameters for one input dimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub mean: f64,
    pub std: f64,
}

impl Scaler {
    /// Population mean/std. A (near-)constant series keeps scale 1 so the
    /// transform stays invertible.
    pub fn fit(values: impl Iterator<Item = f64> + Clone) -> Result<Self, PredictorError> {
        let n = values.clone().count();
        if n < 2 {
            return Err(PredictorError::NotEnoughHistory { have: n, need: 2 });
        }
        let mean = values.clone().sum::<f64>() / n as f64;
        let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
        let std = var.sqrt();
        Ok(Self {
            mean,
            std: if std < 1e-12 { 1.0 } else { std },
        })
    }

    #[inline]
    pub fn transform(&self, v: f64) -> f64 {
        (v - self.mean) / self.std
    }

    #[inline]
    pub fn inverse(&self, v: f64) -> f64 {
        v * self.std + self.mean
    }
}

/// Fit one scaler per edge over a `[slot][edge]` history.
pub fn fit_scalers(history: &[Vec<f64>]) -> Result<Vec<Scaler>, PredictorError> {
    let edges = history.first().map(Vec::len).unwrap_or(0);
    (0..edges)
        .map(|e| Scaler::fit(history.iter().map(move |row| row[e])))
        .collect()
}

// ── Model ───────────────────────────────────────────────────────────────

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GruConfig {
    pub input_dim: usize,
    pub gru_units: Vec<usize>,
    pub fc_units: Vec<usize>,
    pub seq_len: usize,
    pub horizon: usize,
    pub learning_rate: f64,
}

impl GruConfig {
    pub fn output_dim(&self) -> usize {
        self.horizon * self.input_dim
    }
}

/// One GRU layer's parameters. `W*` act on the layer input, `U*` on the
/// previous hidden state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct GruLayer {
    wz: Tensor2,
    uz: Tensor2,
    bz: Tensor1,
    wr: Tensor2,
    ur: Tensor2,
    br: Tensor1,
    wc: Tensor2,
    uc: Tensor2,
    bc: Tensor1,
}

impl GruLayer {
    fn init<R: rand::Rng>(hidden: usize, input: usize, rng: &mut R) -> Self {
        Self {
            wz: Tensor2::init(hidden, input, rng),
            uz: Tensor2::init(hidden, hidden, rng),
            bz: Tensor1::zeros(hidden),
            wr: Tensor2::init(hidden, input, rng),
            ur: Tensor2::init(hidden, hidden, rng),
            br: Tensor1::zeros(hidden),
            wc: Tensor2::init(hidden, input, rng),
            uc: Tensor2::init(hidden, hidden, rng),
            bc: Tensor1::zeros(hidden),
        }
    }

    fn hidden(&self) -> usize {
        self.bz.value.len()
    }
}

/// A demand forecaster for one service.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GruModel {
    pub config: GruConfig,
    layers: Vec<GruLayer>,
    fc: Vec<Dense>,
    head: Dense,
    scalers: Option<Vec<Scaler>>,
    adam_step: u64,
}

/// Per-timestep, per-layer values cached by the forward pass for BPTT.
struct StepCache {
    x: Array1<f64>,
    h_prev: Array1<f64>,
    z: Array1<f64>,
    r: Array1<f64>,
    c: Array1<f64>,
    rh: Array1<f64>,
}

/// Gradients with the same shapes as the parameters.
struct Grads {
    layers: Vec<LayerGrads>,
    fc: Vec<(Array2<f64>, Array1<f64>)>,
    head: (Array2<f64>, Array1<f64>),
}

struct LayerGrads {
    wz: Array2<f64>,
    uz: Array2<f64>,
    bz: Array1<f64>,
    wr: Array2<f64>,
    ur: Array2<f64>,
    br: Array1<f64>,
    wc: Array2<f64>,
    uc: Array2<f64>,
    bc: Array1<f64>,
}

impl LayerGrads {
    fn zeros(layer: &GruLayer) -> Self {
        Self {
            wz: Array2::zeros(layer.wz.value.dim()),
            uz: Array2::zeros(layer.uz.value.dim()),
            bz: Array1::zeros(layer.bz.value.len()),
            wr: Array2::zeros(layer.wr.value.dim()),
            ur: Array2::zeros(layer.ur.value.dim()),
            br: Array1::zeros(layer.br.value.len()),
            wc: Array2::zeros(layer.wc.value.dim()),
            uc: Array2::zeros(layer.uc.value.dim()),
            bc: Array1::zeros(layer.bc.value.len()),
        }
    }
}

/// One standardized training example: a `seq_len x input_dim` window and
/// its flattened `horizon * input_dim` target.
#[derive(Debug, Clone)]
pub struct TrainWindow {
    pub input: Array2<f64>,
    pub target: Array1<f64>,
}

/// A forecast for the next frame. `values[f * num_edges + e]` is the
/// predicted demand at edge `e`, `f` slots ahead.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FramePrediction {
    pub horizon: usize,
    pub num_edges: usize,
    pub values: Vec<f64>,
    /// True when the model fell back to persistence for lack of history.
    pub fallback: bool,
}

impl FramePrediction {
    #[inline]
    pub fn value(&self, slot_ahead: usize, edge: usize) -> f64 {
        self.values[slot_ahead * self.num_edges + edge]
    }
}

fn outer(a: &Array1<f64>, b: &Array1<f64>) -> Array2<f64> {
    let a2 = a.view().insert_axis(Axis(1));
    let b2 = b.view().insert_axis(Axis(0));
    a2.dot(&b2)
}

impl GruModel {
    pub fn new(config: GruConfig, seed: u64) -> Self {
        assert!(!config.gru_units.is_empty(), "at least one GRU layer");
        let mut rng = seeds::rng_for("gru-init", seed);
        let mut layers = Vec::with_capacity(config.gru_units.len());
        let mut in_dim = config.input_dim;
        for &hidden in &config.gru_units {
            layers.push(GruLayer::init(hidden, in_dim, &mut rng));
            in_dim = hidden;
        }
        let mut fc = Vec::with_capacity(config.fc_units.len());
        for &units in &config.fc_units {
            fc.push(Dense::init(units, in_dim, &mut rng));
            in_dim = units;
        }
        let head = Dense::init(config.output_dim(), in_dim, &mut rng);
        Self {
            config,
            layers,
            fc,
            head,
            scalers: None,
            adam_step: 0,
        }
    }

    pub fn scalers(&self) -> Option<&[Scaler]> {
        self.scalers.as_deref()
    }

    /// Run the window through the GRU stack; returns caches and the network
    /// output, plus FC pre-activations needed for the backward pass.
    #[allow(clippy::type_complexity)]
    fn forward(
        &self,
        input: &Array2<f64>,
    ) -> (
        Vec<Vec<StepCache>>,
        Vec<Array1<f64>>,
        Vec<Array1<f64>>,
        Array1<f64>,
    ) {
        let steps = input.nrows();
        let mut caches: Vec<Vec<StepCache>> = (0..self.layers.len())
            .map(|_| Vec::with_capacity(steps))
            .collect();
        let mut h: Vec<Array1<f64>> = self
            .layers
            .iter()
            .map(|l| Array1::zeros(l.hidden()))
            .collect();
        for t in 0..steps {
            let mut x: Array1<f64> = input.row(t).to_owned();
            for (l, layer) in self.layers.iter().enumerate() {
                let h_prev = h[l].clone();
                let z = (layer.wz.value.dot(&x) + layer.uz.value.dot(&h_prev) + &layer.bz.value)
                    .mapv(sigmoid);
                let r = (layer.wr.value.dot(&x) + layer.ur.value.dot(&h_prev) + &layer.br.value)
                    .mapv(sigmoid);
                let rh = &r * &h_prev;
                let c = (layer.wc.value.dot(&x) + layer.uc.value.dot(&rh) + &layer.bc.value)
                    .mapv(f64::tanh);
                let h_new = (1.0 - &z) * &h_prev + &z * &c;
                caches[l].push(StepCache {
                    x,
                    h_prev,
                    z,
                    r,
                    c,
                    rh,
                });
                h[l] = h_new.clone();
                x = h_new;
            }
        }
        // FC stack on the final top hidden state (ReLU), then linear head.
        let mut acts: Vec<Array1<f64>> = Vec::with_capacity(self.fc.len() + 1);
        let mut pre: Vec<Array1<f64>> = Vec::with_capacity(self.fc.len());
        acts.push(h.last().expect("at least one layer").clone());
        for layer in &self.fc {
            let a = layer.forward_vec(acts.last().unwrap());
            pre.push(a.clone());
            acts.push(a.mapv(|v| v.max(0.0)));
        }
        let output = self.head.forward_vec(acts.last().unwrap());
        (caches, acts, pre, output)
    }

    /// Standardized-space forward pass only.
    fn forward_output(&self, input: &Array2<f64>) -> Array1<f64> {
        self.forward(input).3
    }

    /// MSE of one window (standardized space).
    pub fn window_loss(&self, window: &TrainWindow) -> f64 {
        let out = self.forward_output(&window.input);
        let d = &out - &window.target;
        d.iter().map(|v| v * v).sum::<f64>() / d.len() as f64
    }

    /// Loss and full parameter gradients for one window, without updating.
    fn backward(&self, window: &TrainWindow) -> (f64, Grads) {
        let (caches, acts, pre, output) = self.forward(&window.input);
        let dims = output.len() as f64;
        let diff = &output - &window.target;
        let loss = diff.iter().map(|v| v * v).sum::<f64>() / dims;
        let dy = diff.mapv(|v| 2.0 * v / dims);

        // Head and FC stack.
        let head_grads = (outer(&dy, acts.last().unwrap()), dy.clone());
        let mut da = self.head.w.value.t().dot(&dy);
        let mut fc_grads: Vec<(Array2<f64>, Array1<f64>)> = vec![];
        for (i, layer) in self.fc.iter().enumerate().rev() {
            let dpre = &da * &pre[i].mapv(|v| if v > 0.0 { 1.0 } else { 0.0 });
            fc_grads.push((outer(&dpre, &acts[i]), dpre.clone()));
            da = layer.w.value.t().dot(&dpre);
        }
        fc_grads.reverse();

        // BPTT. `da` is now the gradient on the top layer's final hidden
        // state; lower layers receive gradient through the `x` path of the
        // layer above at the same timestep.
        let steps = window.input.nrows();
        let num_layers = self.layers.len();
        let mut layer_grads: Vec<LayerGrads> = self.layers.iter().map(LayerGrads::zeros).collect();
        let mut dh_carry: Vec<Array1<f64>> = self
            .layers
            .iter()
            .map(|l| Array1::zeros(l.hidden()))
            .collect();
        dh_carry[num_layers - 1] = da;
        for t in (0..steps).rev() {
            let mut dx_above: Option<Array1<f64>> = None;
            for l in (0..num_layers).rev() {
                let cache = &caches[l][t];
                let layer = &self.layers[l];
                let mut dh = std::mem::replace(&mut dh_carry[l], Array1::zeros(layer.hidden()));
                if let Some(dx) = dx_above.take() {
                    dh += &dx;
                }
                let da_z = &dh * &(&cache.c - &cache.h_prev) * &cache.z * &(1.0 - &cache.z);
                let dc = &dh * &cache.z;
                let mut dh_prev = &dh * &(1.0 - &cache.z);
                let da_c = &dc * &(1.0 - &cache.c * &cache.c);
                let d_rh = layer.uc.value.t().dot(&da_c);
                let da_r = &d_rh * &cache.h_prev * &cache.r * &(1.0 - &cache.r);
                dh_prev += &(&d_rh * &cache.r);
                dh_prev += &layer.uz.value.t().dot(&da_z);
                dh_prev += &layer.ur.value.t().dot(&da_r);
                let dx = layer.wz.value.t().dot(&da_z)
                    + layer.wr.value.t().dot(&da_r)
                    + layer.wc.value.t().dot(&da_c);

                let g = &mut layer_grads[l];
                g.wz += &outer(&da_z, &cache.x);
                g.uz += &outer(&da_z, &cache.h_prev);
                g.bz += &da_z;
                g.wr += &outer(&da_r, &cache.x);
                g.ur += &outer(&da_r, &cache.h_prev);
                g.br += &da_r;
                g.wc += &outer(&da_c, &cache.x);
                g.uc += &outer(&da_c, &cache.rh);
                g.bc += &da_c;

                dh_carry[l] = dh_prev;
                dx_above = Some(dx);
            }
        }
        (
            loss,
            Grads {
                layers: layer_grads,
                fc: fc_grads,
                head: head_grads,
            },
        )
    }

    fn apply_grads(&mut self, grads: &Grads) {
        self.adam_step += 1;
        let t = self.adam_step;
        let p = AdamParams::with_learning_rate(self.config.learning_rate);
        for (layer, g) in self.layers.iter_mut().zip(&grads.layers) {
            layer.wz.step(&g.wz, &p, t);
            layer.uz.step(&g.uz, &p, t);
            layer.bz.step(&g.bz, &p, t);
            layer.wr.step(&g.wr, &p, t);
            layer.ur.step(&g.ur, &p, t);
            layer.br.step(&g.br, &p, t);
            layer.wc.step(&g.wc, &p, t);
            layer.uc.step(&g.uc, &p, t);
            layer.bc.step(&g.bc, &p, t);
        }
        for (layer, (gw, gb)) in self.fc.iter_mut().zip(&grads.fc) {
            layer.w.step(gw, &p, t);
            layer.b.step(gb, &p, t);
        }
        self.head.w.step(&grads.head.0, &p, t);
        self.head.b.step(&grads.head.1, &p, t);
    }

    /// Loss and flattened gradients for one window (for gradient checks).
    pub fn window_grads_flat(&self, window: &TrainWindow) -> (f64, Vec<f64>) {
        let (loss, grads) = self.backward(window);
        let mut flat = Vec::new();
        for g in &grads.layers {
            for a in [&g.wz, &g.uz] {
                flat.extend(a.iter());
            }
            flat.extend(g.bz.iter());
            for a in [&g.wr, &g.ur] {
                flat.extend(a.iter());
            }
            flat.extend(g.br.iter());
            for a in [&g.wc, &g.uc] {
                flat.extend(a.iter());
            }
            flat.extend(g.bc.iter());
        }
        for (gw, gb) in &grads.fc {
            flat.extend(gw.iter());
            flat.extend(gb.iter());
        }
        flat.extend(grads.head.0.iter());
        flat.extend(grads.head.1.iter());
        (loss, flat)
    }

    /// All parameters, flattened in the same order as `window_grads_flat`.
    pub fn params_flat(&self) -> Vec<f64> {
        let mut flat = Vec::new();
        for l in &self.layers {
            for a in [&l.wz, &l.uz] {
                flat.extend(a.value.iter());
            }
            flat.extend(l.bz.value.iter());
            for a in [&l.wr, &l.ur] {
                flat.extend(a.value.iter());
            }
            flat.extend(l.br.value.iter());
            for a in [&l.wc, &l.uc] {
                flat.extend(a.value.iter());
            }
            flat.extend(l.bc.value.iter());
        }
        for d in &self.fc {
            flat.extend(d.w.value.iter());
            flat.extend(d.b.value.iter());
        }
        flat.extend(self.head.w.value.iter());
        flat.extend(self.head.b.value.iter());
        flat
    }

    pub fn set_params_flat(&mut self, flat: &[f64]) {
        let mut it = flat.iter().copied();
        let fill2 = |a: &mut Array2<f64>, it: &mut dyn Iterator<Item = f64>| {
            for v in a.iter_mut() {
                *v = it.next().expect("enough parameters");
            }
        };
        for l in &mut self.layers {
            fill2(&mut l.wz.value, &mut it);
            fill2(&mut l.uz.value, &mut it);
            for v in l.bz.value.iter_mut() {
                *v = it.next().unwrap();
            }
            fill2(&mut l.wr.value, &mut it);
            fill2(&mut l.ur.value, &mut it);
            for v in l.br.value.iter_mut() {
                *v = it.next().unwrap();
            }
            fill2(&mut l.wc.value, &mut it);
            fill2(&mut l.uc.value, &mut it);
            for v in l.bc.value.iter_mut() {
                *v = it.next().unwrap();
            }
        }
        for d in &mut self.fc {
            fill2(&mut d.w.value, &mut it);
            for v in d.b.value.iter_mut() {
                *v = it.next().unwrap();
            }
        }
        fill2(&mut self.head.w.value, &mut it);
        for v in self.head.b.value.iter_mut() {
            *v = it.next().unwrap();
        }
        assert!(it.next().is_none(), "parameter count mismatch");
    }

    /// Fit scalers on `history`, build sliding windows, and train for
    /// `epochs` passes with one Adam step per window. Returns the per-epoch
    /// mean window MSE (standardized space).
    pub fn train(
        &mut self,
        history: &[Vec<f64>],
        epochs: usize,
        stride: usize,
        seed: u64,
    ) -> Result<Vec<f64>, PredictorError> {
        check_history(history, self.config.input_dim)?;
        let need = self.config.seq_len + self.config.horizon;
        if history.len() < need {
            return Err(PredictorError::NotEnoughHistory {
                have: history.len(),
                need,
            });
        }
        let scalers = fit_scalers(history)?;
        let windows = make_windows(
            history,
            &scalers,
            self.config.seq_len,
            self.config.horizon,
            stride,
        );
        self.scalers = Some(scalers);
        let mut rng = seeds::rng_for("gru-shuffle", seed);
        let mut order: Vec<usize> = (0..windows.len()).collect();
        let mut epoch_losses = Vec::with_capacity(epochs);
        for epoch in 0..epochs {
            order.shuffle(&mut rng);
            let mut total = 0.0;
            for &i in &order {
                let (loss, grads) = self.backward(&windows[i]);
                if !loss.is_finite() {
                    return Err(PredictorError::Diverged { epoch });
                }
                self.apply_grads(&grads);
                total += loss;
            }
            epoch_losses.push(total / windows.len() as f64);
        }
        Ok(epoch_losses)
    }

    /// Forecast the next frame from the tail of `history`. Falls back to
    /// persistence (and flags it) when the window cannot be filled or the
    /// model was never trained.
    pub fn predict_frame(&self, history: &[Vec<f64>]) -> Result<FramePrediction, PredictorError> {
        check_history(history, self.config.input_dim)?;
        let edges = self.config.input_dim;
        let horizon = self.config.horizon;
        let enough = history.len() >= self.config.seq_len && self.scalers.is_some();
        if !enough {
            let last = history.last().cloned().unwrap_or_else(|| vec![0.0; edges]);
            let mut values = Vec::with_capacity(horizon * edges);
            for _ in 0..horizon {
                values.extend_from_slice(&last);
            }
            return Ok(FramePrediction {
                horizon,
                num_edges: edges,
                values,
                fallback: true,
            });
        }
        let scalers = self.scalers.as_ref().unwrap();
        let tail = &history[history.len() - self.config.seq_len..];
        let input = Array2::from_shape_fn((self.config.seq_len, edges), |(t, e)| {
            scalers[e].transform(tail[t][e])
        });
        let out = self.forward_output(&input);
        let values = out
            .iter()
            .enumerate()
            .map(|(i, v)| scalers[i % edges].inverse(*v).max(0.0))
            .collect();
        Ok(FramePrediction {
            horizon,
            num_edges: edges,
            values,
            fallback: false,
        })
    }
}

fn check_history(history: &[Vec<f64>], input_dim: usize) -> Result<(), PredictorError> {
    if let Some(row) = history.iter().find(|r| r.len() != input_dim) {
        return Err(PredictorError::ShapeMismatch {
            expected: input_dim,
            got: row.len(),
        });
    }
    Ok(())
}

/// Standardized sliding windows over `history`, starting every `stride`
/// slots. The target flattens the following `horizon` rows frame-major.
pub fn make_windows(
    history: &[Vec<f64>],
    scalers: &[Scaler],
    seq_len: usize,
    horizon: usize,
    stride: usize,
) -> Vec<TrainWindow> {
    let edges = scalers.len();
    let stride = stride.max(1);
    let mut windows = Vec::new();
    let mut start = 0;
    while start + seq_len + horizon <= history.len() {
        let input = Array2::from_shape_fn((seq_len, edges), |(t, e)| {
            scalers[e].transform(history[start + t][e])
        });
        let target = Array1::from_shape_fn(horizon * edges, |i| {
            let (f, e) = (i / edges, i % edges);
            scalers[e].transform(history[start + seq_len + f][e])
        });
        windows.push(TrainWindow { input, target });
        start += stride;
    }
    windows
}

/// Mean relative prediction error over all (slot, edge) entries whose
/// observed value is non-zero: mean(|observed - predicted| / observed).
pub fn mean_prediction_error(
    observed: &[Vec<f64>],
    predicted: &[Vec<f64>],
) -> Result<f64, PredictorError> {
    if observed.len() != predicted.len() {
        return Err(PredictorError::ShapeMismatch {
            expected: observed.len(),
            got: predicted.len(),
        });
    }
    let mut total = 0.0;
    let mut count = 0usize;
    for (o_row, p_row) in observed.iter().zip(predicted) {
        if o_row.len() != p_row.len() {
            return Err(PredictorError::ShapeMismatch {
                expected: o_row.len(),
                got: p_row.len(),
            });
        }
        for (&o, &p) in o_row.iter().zip(p_row) {
            if o != 0.0 {
                total += (o - p).abs() / o;
                count += 1;
            }
        }
    }
    if count == 0 {
        return Err(PredictorError::NoObservations);
    }
    Ok(total / count as f64)
}

/// Predicted utilization of a service over the coming frame:
/// `100 * mean_slot(sum_edges demand) / (instances * capacity)`.
pub fn utilization_pct(
    prediction: &FramePrediction,
    instances: u32,
    capacity: u32,
) -> Result<f64, PredictorError> {
    if instances == 0 || capacity == 0 {
        return Err(PredictorError::NoCapacity);
    }
    if prediction.horizon == 0 {
        return Err(PredictorError::NoObservations);
    }
    let mut mean_total = 0.0;
    for f in 0..prediction.horizon {
        let slot_total: f64 = (0..prediction.num_edges)
            .map(|e| prediction.value(f, e).max(0.0))
            .sum();
        mean_total += slot_total;
    }
    mean_total /= prediction.horizon as f64;
    Ok(100.0 * mean_total / (instances as f64 * capacity as f64))
}

/// A seeded synthetic demand history (`[slot][edge]`): per-edge sinusoids
/// with distinct base, amplitude, period and phase plus bounded noise,
/// rounded to whole requests.
pub fn synthetic_history(seed: u64, slots: usize, edges: usize) -> Vec<Vec<f64>> {
    let mut rng = seeds::rng_for("sinusoid", seed);
    let params: Vec<(f64, f64, f64, f64)> = (0..edges)
        .map(|_| {
            let base = 10.0 + 10.0 * rng.random_range(0.0..1.0);
            let amp = 2.0 + 6.0 * rng.random_range(0.0..1.0);
            let period = 30.0 + 50.0 * rng.random_range(0.0..1.0);
            let phase = std::f64::consts::TAU * rng.random_range(0.0..1.0);
            (base, amp, period, phase)
        })
        .collect();
    (0..slots)
        .map(|t| {
            params
                .iter()
                .map(|&(base, amp, period, phase)| {
                    let clean =
                        base + amp * (std::f64::consts::TAU * t as f64 / period + phase).sin();
                    let noisy = clean + rng.random_range(-0.7..0.7);
                    noisy.round().max(0.0)
                })
                .collect()
        })
        .collect()
}

#[derive(Debug, Error)]
pub enum PredictorError {
    #[error("not enough history: have {have} slots, need {need}")]
    NotEnoughHistory { have: usize, need: usize },
    #[error("shape mismatch: expected {expected}, got {got}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("training diverged (non-finite loss) at epoch {epoch}")]
    Diverged { epoch: usize },
    #[error("no non-zero observations to score")]
    NoObservations,
    #[error("utilization undefined without instances and capacity")]
    NoCapacity,
}
