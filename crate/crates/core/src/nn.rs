//! Minimal dense-network engine: feed-forward blocks with reverse-mode
//! gradients, Adam with coupled weight decay, and the stepwise learning-rate
//! schedule. Everything is sized for small fully-connected stacks, so the
//! arithmetic stays simple and exactly reproducible.

use thiserror::Error;

use crate::rng::{self, uniform_in};
use crate::scalar::Real;

pub const ADAM_BETA1: f64 = 0.9;
pub const ADAM_BETA2: f64 = 0.999;
pub const ADAM_EPSILON: f64 = 1e-8;

#[derive(Debug, Error, PartialEq)]
pub enum NnError {
    #[error("input has length {got}, block expects {expected}")]
    InputDim { expected: usize, got: usize },
    #[error("upstream gradient has length {got}, layer {layer} produces {expected}")]
    GradDim { layer: usize, expected: usize, got: usize },
    #[error("non-finite value produced at layer {layer}")]
    NonFinite { layer: usize },
    #[error("non-finite gradient")]
    NonFiniteGrad,
    #[error("invalid block configuration: {0}")]
    InvalidConfig(String),
}

/// Activation applied after the last layer of a block. Hidden layers always
/// use relu.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OutputActivation {
    Identity,
    Sigmoid,
}

impl OutputActivation {
    pub fn name(self) -> &'static str {
        match self {
            OutputActivation::Identity => "identity",
            OutputActivation::Sigmoid => "sigmoid",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "identity" => Some(OutputActivation::Identity),
            "sigmoid" => Some(OutputActivation::Sigmoid),
            _ => None,
        }
    }
}

fn relu<T: Real>(x: T) -> T {
    if x > T::zero() {
        x
    } else {
        T::zero()
    }
}

/// Numerically stable logistic function.
pub fn sigmoid<T: Real>(z: T) -> T {
    if z >= T::zero() {
        T::one() / (T::one() + (-z).exp())
    } else {
        let e = z.exp();
        e / (T::one() + e)
    }
}

/// Stable `ln(1 + exp(x))`.
pub fn softplus<T: Real>(x: T) -> T {
    if x > T::zero() {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}

/// A stack of fully connected layers. Weights are stored row-major per layer
/// (`w[i * out + j]` connects input `i` to output `j`).
#[derive(Clone, Debug, PartialEq)]
pub struct DenseBlock<T> {
    input_dim: usize,
    layer_dims: Vec<usize>,
    weights: Vec<Vec<T>>,
    biases: Vec<Vec<T>>,
    output_activation: OutputActivation,
}

impl<T: Real> DenseBlock<T> {
    /// All-zero parameters; useful as a base for hand-crafted blocks.
    pub fn zeros(
        input_dim: usize,
        layer_dims: &[usize],
        output_activation: OutputActivation,
    ) -> Result<Self, NnError> {
        if input_dim == 0 || layer_dims.is_empty() || layer_dims.contains(&0) {
            return Err(NnError::InvalidConfig(format!(
                "dims must be positive, got input {input_dim}, layers {layer_dims:?}"
            )));
        }
        let mut weights = Vec::with_capacity(layer_dims.len());
        let mut biases = Vec::with_capacity(layer_dims.len());
        let mut fan_in = input_dim;
        for &out in layer_dims {
            weights.push(vec![T::zero(); fan_in * out]);
            biases.push(vec![T::zero(); out]);
            fan_in = out;
        }
        Ok(Self { input_dim, layer_dims: layer_dims.to_vec(), weights, biases, output_activation })
    }

    /// Uniform fan-based initialization in `(-sqrt(6/(fan_in+fan_out)),
    /// +sqrt(6/(fan_in+fan_out)))` with zero biases, deterministic per seed.
    /// Draw order: layers bottom-up, weights row-major.
    pub fn glorot(
        input_dim: usize,
        layer_dims: &[usize],
        output_activation: OutputActivation,
        seed: u64,
    ) -> Result<Self, NnError> {
        let mut block = Self::zeros(input_dim, layer_dims, output_activation)?;
        let mut rng = rng::seeded(seed);
        let mut fan_in = input_dim;
        for (l, &out) in layer_dims.iter().enumerate() {
            let bound = T::from_f64((6.0 / (fan_in + out) as f64).sqrt());
            for w in block.weights[l].iter_mut() {
                *w = uniform_in(&mut rng, -bound, bound);
            }
            fan_in = out;
        }
        Ok(block)
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        *self.layer_dims.last().unwrap()
    }

    pub fn layer_dims(&self) -> &[usize] {
        &self.layer_dims
    }

    pub fn layer_count(&self) -> usize {
        self.layer_dims.len()
    }

    pub fn output_activation(&self) -> OutputActivation {
        self.output_activation
    }

    pub fn layer_weights(&self, layer: usize) -> &[T] {
        &self.weights[layer]
    }

    pub fn layer_biases(&self, layer: usize) -> &[T] {
        &self.biases[layer]
    }

    pub fn layer_weights_mut(&mut self, layer: usize) -> &mut [T] {
        &mut self.weights[layer]
    }

    pub fn layer_biases_mut(&mut self, layer: usize) -> &mut [T] {
        &mut self.biases[layer]
    }

    /// Total number of scalar parameters.
    pub fn param_len(&self) -> usize {
        self.weights.iter().map(Vec::len).sum::<usize>()
            + self.biases.iter().map(Vec::len).sum::<usize>()
    }

    /// Flat parameter accessor: per layer, weights first then biases.
    pub fn param(&self, mut idx: usize) -> T {
        for l in 0..self.layer_dims.len() {
            if idx < self.weights[l].len() {
                return self.weights[l][idx];
            }
            idx -= self.weights[l].len();
            if idx < self.biases[l].len() {
                return self.biases[l][idx];
            }
            idx -= self.biases[l].len();
        }
        panic!("parameter index out of range");
    }

    /// Flat parameter mutator mirroring [`DenseBlock::param`].
    pub fn param_mut(&mut self, mut idx: usize) -> &mut T {
        for l in 0..self.layer_dims.len() {
            if idx < self.weights[l].len() {
                return &mut self.weights[l][idx];
            }
            idx -= self.weights[l].len();
            if idx < self.biases[l].len() {
                return &mut self.biases[l][idx];
            }
            idx -= self.biases[l].len();
        }
        panic!("parameter index out of range");
    }

    fn layer_input_dim(&self, layer: usize) -> usize {
        if layer == 0 {
            self.input_dim
        } else {
            self.layer_dims[layer - 1]
        }
    }

    fn activation_at(&self, layer: usize) -> OutputActivation {
        if layer + 1 == self.layer_dims.len() {
            self.output_activation
        } else {
            // Hidden layers are relu; encoded separately in apply/deriv.
            OutputActivation::Identity
        }
    }

    fn apply_layer(&self, layer: usize, x: &[T], out: &mut Vec<T>) {
        let in_dim = self.layer_input_dim(layer);
        let out_dim = self.layer_dims[layer];
        let w = &self.weights[layer];
        let b = &self.biases[layer];
        out.clear();
        out.extend_from_slice(b);
        for (i, &xi) in x.iter().enumerate().take(in_dim) {
            let row = &w[i * out_dim..(i + 1) * out_dim];
            for (o, &wij) in out.iter_mut().zip(row) {
                *o += xi * wij;
            }
        }
        let last = layer + 1 == self.layer_dims.len();
        for v in out.iter_mut() {
            *v = if last {
                match self.output_activation {
                    OutputActivation::Identity => *v,
                    OutputActivation::Sigmoid => sigmoid(*v),
                }
            } else {
                relu(*v)
            };
        }
    }

    /// Plain forward pass.
    pub fn forward(&self, x: &[T]) -> Result<Vec<T>, NnError> {
        if x.len() != self.input_dim {
            return Err(NnError::InputDim { expected: self.input_dim, got: x.len() });
        }
        let mut cur = x.to_vec();
        let mut next = Vec::new();
        for layer in 0..self.layer_dims.len() {
            self.apply_layer(layer, &cur, &mut next);
            std::mem::swap(&mut cur, &mut next);
        }
        Ok(cur)
    }

    /// Forward pass retaining per-layer post-activation outputs for backward.
    /// Flags non-finite intermediates with the offending layer.
    pub fn forward_trace(&self, x: &[T]) -> Result<BlockTrace<T>, NnError> {
        if x.len() != self.input_dim {
            return Err(NnError::InputDim { expected: self.input_dim, got: x.len() });
        }
        let mut layers = Vec::with_capacity(self.layer_dims.len());
        let mut cur = x.to_vec();
        for layer in 0..self.layer_dims.len() {
            let mut next = Vec::new();
            self.apply_layer(layer, &cur, &mut next);
            if next.iter().any(|v| !v.is_finite()) {
                return Err(NnError::NonFinite { layer });
            }
            layers.push(next.clone());
            cur = next;
        }
        Ok(BlockTrace { input: x.to_vec(), layers })
    }

    /// Reverse-mode pass from the block output. `d_output` is the gradient of
    /// the scalar loss with respect to the block's post-activation output.
    /// Parameter gradients accumulate into `grads`; the return value is the
    /// gradient with respect to the block input.
    pub fn backward(
        &self,
        trace: &BlockTrace<T>,
        d_output: &[T],
        grads: &mut BlockGrads<T>,
    ) -> Result<Vec<T>, NnError> {
        self.backward_from_layer(trace, self.layer_dims.len() - 1, d_output, grads)
    }

    /// Reverse-mode pass injected at an intermediate layer's post-activation
    /// output. Layers above `layer` receive no gradient.
    pub fn backward_from_layer(
        &self,
        trace: &BlockTrace<T>,
        layer: usize,
        d_layer_output: &[T],
        grads: &mut BlockGrads<T>,
    ) -> Result<Vec<T>, NnError> {
        if d_layer_output.len() != self.layer_dims[layer] {
            return Err(NnError::GradDim {
                layer,
                expected: self.layer_dims[layer],
                got: d_layer_output.len(),
            });
        }
        let last = layer + 1 == self.layer_dims.len();
        // Gradient w.r.t. the layer's pre-activation.
        let mut delta: Vec<T> = trace.layers[layer]
            .iter()
            .zip(d_layer_output)
            .map(|(&a, &d)| {
                if last {
                    match self.activation_at(layer) {
                        OutputActivation::Identity => d,
                        OutputActivation::Sigmoid => d * a * (T::one() - a),
                    }
                } else if a > T::zero() {
                    d
                } else {
                    T::zero()
                }
            })
            .collect();

        for l in (0..=layer).rev() {
            let out_dim = self.layer_dims[l];
            let prev: &[T] = if l == 0 { &trace.input } else { &trace.layers[l - 1] };
            let w = &self.weights[l];
            let gb = &mut grads.biases[l];
            let gw = &mut grads.weights[l];
            for (g, &d) in gb.iter_mut().zip(&delta) {
                *g += d;
            }
            let mut d_prev = vec![T::zero(); prev.len()];
            for (i, (&pi, dp)) in prev.iter().zip(d_prev.iter_mut()).enumerate() {
                let row = &w[i * out_dim..(i + 1) * out_dim];
                let grow = &mut gw[i * out_dim..(i + 1) * out_dim];
                let mut acc = T::zero();
                for ((g, &wij), &d) in grow.iter_mut().zip(row).zip(&delta) {
                    *g += pi * d;
                    acc += wij * d;
                }
                *dp = acc;
            }
            if l == 0 {
                return Ok(d_prev);
            }
            // Through the hidden relu of layer l-1.
            delta = trace.layers[l - 1]
                .iter()
                .zip(d_prev)
                .map(|(&a, d)| if a > T::zero() { d } else { T::zero() })
                .collect();
        }
        unreachable!()
    }
}

/// Per-layer post-activation outputs of one forward pass.
#[derive(Clone, Debug)]
pub struct BlockTrace<T> {
    input: Vec<T>,
    layers: Vec<Vec<T>>,
}

impl<T: Real> BlockTrace<T> {
    /// Final block output.
    pub fn output(&self) -> &[T] {
        self.layers.last().unwrap()
    }

    /// Post-activation output of an intermediate layer.
    pub fn layer_output(&self, layer: usize) -> &[T] {
        &self.layers[layer]
    }
}

/// Parameter-gradient accumulator shaped like a [`DenseBlock`].
#[derive(Clone, Debug, PartialEq)]
pub struct BlockGrads<T> {
    pub weights: Vec<Vec<T>>,
    pub biases: Vec<Vec<T>>,
}

impl<T: Real> BlockGrads<T> {
    pub fn zeros_like(block: &DenseBlock<T>) -> Self {
        Self {
            weights: block.weights.iter().map(|w| vec![T::zero(); w.len()]).collect(),
            biases: block.biases.iter().map(|b| vec![T::zero(); b.len()]).collect(),
        }
    }

    pub fn reset(&mut self) {
        for w in &mut self.weights {
            w.iter_mut().for_each(|v| *v = T::zero());
        }
        for b in &mut self.biases {
            b.iter_mut().for_each(|v| *v = T::zero());
        }
    }

    /// Flat accessor matching [`DenseBlock::param`] indexing.
    pub fn param(&self, mut idx: usize) -> T {
        for l in 0..self.weights.len() {
            if idx < self.weights[l].len() {
                return self.weights[l][idx];
            }
            idx -= self.weights[l].len();
            if idx < self.biases[l].len() {
                return self.biases[l][idx];
            }
            idx -= self.biases[l].len();
        }
        panic!("parameter index out of range");
    }

    pub fn is_finite(&self) -> bool {
        self.weights.iter().chain(&self.biases).all(|v| v.iter().all(|x| x.is_finite()))
    }
}

/// Adam moment accumulators for one block.
#[derive(Clone, Debug, PartialEq)]
pub struct AdamState<T> {
    pub m_weights: Vec<Vec<T>>,
    pub v_weights: Vec<Vec<T>>,
    pub m_biases: Vec<Vec<T>>,
    pub v_biases: Vec<Vec<T>>,
    pub step: u64,
}

impl<T: Real> AdamState<T> {
    pub fn zeros_like(block: &DenseBlock<T>) -> Self {
        let zw: Vec<Vec<T>> = block.weights.iter().map(|w| vec![T::zero(); w.len()]).collect();
        let zb: Vec<Vec<T>> = block.biases.iter().map(|b| vec![T::zero(); b.len()]).collect();
        Self { m_weights: zw.clone(), v_weights: zw, m_biases: zb.clone(), v_biases: zb, step: 0 }
    }
}

/// One Adam update over a flat parameter slice. Weight decay is coupled:
/// added to the gradient before the moment updates. `step` is the
/// already-incremented step counter.
pub fn adam_update_flat<T: Real>(
    params: &mut [T],
    grads: &[T],
    m: &mut [T],
    v: &mut [T],
    step: u64,
    lr: T,
    weight_decay: T,
) {
    let beta1 = T::from_f64(ADAM_BETA1);
    let beta2 = T::from_f64(ADAM_BETA2);
    let eps = T::from_f64(ADAM_EPSILON);
    let one = T::one();
    let bc1 = one - beta1.powi(step as i32);
    let bc2 = one - beta2.powi(step as i32);
    for i in 0..params.len() {
        let g = grads[i] + weight_decay * params[i];
        m[i] = beta1 * m[i] + (one - beta1) * g;
        v[i] = beta2 * v[i] + (one - beta2) * g * g;
        let m_hat = m[i] / bc1;
        let v_hat = v[i] / bc2;
        params[i] -= lr * m_hat / (v_hat.sqrt() + eps);
    }
}

/// One Adam step over every parameter of a block.
pub fn adam_step<T: Real>(
    block: &mut DenseBlock<T>,
    grads: &BlockGrads<T>,
    state: &mut AdamState<T>,
    lr: T,
    weight_decay: T,
) -> Result<(), NnError> {
    if !grads.is_finite() {
        return Err(NnError::NonFiniteGrad);
    }
    state.step += 1;
    for l in 0..block.layer_dims.len() {
        adam_update_flat(
            &mut block.weights[l],
            &grads.weights[l],
            &mut state.m_weights[l],
            &mut state.v_weights[l],
            state.step,
            lr,
            weight_decay,
        );
        adam_update_flat(
            &mut block.biases[l],
            &grads.biases[l],
            &mut state.m_biases[l],
            &mut state.v_biases[l],
            state.step,
            lr,
            weight_decay,
        );
    }
    Ok(())
}

/// Optimizer schedule: stepwise-decayed learning rate, coupled weight decay,
/// epoch and repetition counts, and the mini-batch size.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainSchedule<T> {
    pub initial_lr: T,
    pub decay_ratio: T,
    pub decay_every: usize,
    pub weight_decay: T,
    pub epochs: usize,
    pub repetitions: usize,
    pub batch_size: usize,
}

impl<T: Real> Default for TrainSchedule<T> {
    fn default() -> Self {
        Self {
            initial_lr: T::from_f64(1e-3),
            decay_ratio: T::from_f64(0.1),
            decay_every: 20,
            weight_decay: T::from_f64(1e-5),
            epochs: 60,
            repetitions: 10,
            batch_size: 256,
        }
    }
}

impl<T: Real> TrainSchedule<T> {
    pub fn validate(&self) -> Result<(), NnError> {
        let ok = self.initial_lr > T::zero()
            && self.decay_ratio > T::zero()
            && self.decay_ratio <= T::one()
            && self.decay_every > 0
            && self.weight_decay >= T::zero()
            && self.batch_size > 0
            && self.repetitions > 0;
        if ok {
            Ok(())
        } else {
            Err(NnError::InvalidConfig("schedule values must be positive".into()))
        }
    }

    /// `initial_lr * decay_ratio^floor(epoch / decay_every)`.
    pub fn lr_at_epoch(&self, epoch: usize) -> T {
        self.initial_lr * self.decay_ratio.powi((epoch / self.decay_every) as i32)
    }
}
