//! Inductive Planetoid baseline: the supervised trunk+head path plus a
//! context-prediction term. Context pairs come either from shared labels or
//! from weighted random walks on the domain graph; each sampled pair (i, c)
//! with agreement sign gamma contributes `-ln sigmoid(gamma * w_c . h(d_i))`
//! to the minimized objective, pulling agreeing pairs toward high scores.

use crate::graph::DomainGraph;
use crate::matrix::RowMatrix;
use crate::models::{
    chunk_range, labeled_batch, new_head, new_tower, seeds, shuffled_indices, supervised_term,
    ModelDims, ModelError, TrainInputs,
};
use crate::nn::{
    adam_step, adam_update_flat, softplus, AdamState, BlockGrads, DenseBlock, TrainSchedule,
};
use crate::rng::{self, derive_seed, uniform_in, ChaCha8Rng};
use crate::scalar::Real;

#[derive(Clone, Debug)]
pub struct PlanetoidHyper<T> {
    pub lambda: T,
    pub walk_length: usize,
    pub window: usize,
    /// Probability that a context sample comes from shared labels rather than
    /// a random walk.
    pub label_context_prob: f64,
    pub context_samples_per_epoch: usize,
    /// Keep the context term with the sign that rewards disagreement
    /// (comparison flag; the sign-corrected form is the default).
    pub negate_context_term: bool,
}

impl<T: Real> Default for PlanetoidHyper<T> {
    fn default() -> Self {
        Self {
            lambda: T::one(),
            walk_length: 10,
            window: 3,
            label_context_prob: 0.5,
            context_samples_per_epoch: 512,
            negate_context_term: false,
        }
    }
}

/// Trunk + label head shaped like the MLP baseline, plus one context row per
/// domain node.
#[derive(Clone, Debug, PartialEq)]
pub struct PlanetoidModel<T> {
    pub trunk: DenseBlock<T>,
    pub head: DenseBlock<T>,
    pub context: RowMatrix<T>,
}

impl<T: Real> PlanetoidModel<T> {
    pub fn init(dims: &ModelDims, domain_count: usize, seed: u64) -> Result<Self, ModelError> {
        dims.validate()?;
        let embed = dims.embedding_dim();
        let mut context = RowMatrix::zeros(domain_count, embed);
        let mut rng = rng::seeded(derive_seed(seed, seeds::CONTEXT));
        let bound = T::from_f64((6.0 / (embed + 1) as f64).sqrt());
        for v in context.as_flat_mut() {
            *v = uniform_in(&mut rng, -bound, bound);
        }
        Ok(Self {
            trunk: new_tower(dims.domain_dim, dims, derive_seed(seed, seeds::DOMAIN_TOWER))?,
            head: new_head(embed, dims, derive_seed(seed, seeds::LABEL_HEAD))?,
            context,
        })
    }

    pub fn predict(&self, domain_features: &[T]) -> Result<T, ModelError> {
        super::predict_composed(&self.trunk, &self.head, domain_features)
    }
}

/// One context-prediction sample: predict whether `context` belongs to the
/// context of `node`; `positive` is the agreement sign gamma.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ContextSample {
    pub node: usize,
    pub context: usize,
    pub positive: bool,
}

/// Draw up to `count` context samples. With probability `label_context_prob`
/// a sample pairs two labeled nodes (same label positive, different label
/// negative); otherwise it comes from a weighted random walk, pairing
/// co-window nodes positively and out-of-window nodes negatively. Positive
/// and negative draws are balanced one to one where both pools are nonempty;
/// self-pairs are excluded. Deterministic for a given generator state.
pub fn planetoid_sample_context<T: Real>(
    dg: &DomainGraph<T>,
    labels: &[Option<bool>],
    count: usize,
    walk_length: usize,
    window: usize,
    label_context_prob: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<ContextSample> {
    let n = dg.domain_count();
    if n == 0 || count == 0 {
        return Vec::new();
    }
    let adjacency = dg.adjacency();
    let labeled_true: Vec<usize> =
        (0..n).filter(|&i| labels.get(i).copied().flatten() == Some(true)).collect();
    let labeled_false: Vec<usize> =
        (0..n).filter(|&i| labels.get(i).copied().flatten() == Some(false)).collect();
    let any_labeled = !labeled_true.is_empty() || !labeled_false.is_empty();

    let mut samples = Vec::with_capacity(count);
    let mut positives = 0usize;
    let mut negatives = 0usize;
    let mut attempts = 0usize;
    let budget = count.saturating_mul(4).max(16);

    while samples.len() < count && attempts < budget {
        attempts += 1;
        let use_labels =
            any_labeled && rand::Rng::random::<f64>(rng) < label_context_prob;
        let want_positive = positives <= negatives;
        // Try the aimed-for sign first, then the opposite, so a one-sided
        // pool (e.g. all nodes share a label) still yields samples.
        let drawn = draw_sample(
            use_labels,
            want_positive,
            &labeled_true,
            &labeled_false,
            &adjacency,
            n,
            walk_length,
            window,
            rng,
        )
        .or_else(|| {
            draw_sample(
                use_labels,
                !want_positive,
                &labeled_true,
                &labeled_false,
                &adjacency,
                n,
                walk_length,
                window,
                rng,
            )
        });
        if let Some(sample) = drawn {
            if sample.positive {
                positives += 1;
            } else {
                negatives += 1;
            }
            samples.push(sample);
        }
    }
    samples
}

#[allow(clippy::too_many_arguments)]
fn draw_sample<T: Real>(
    use_labels: bool,
    positive: bool,
    labeled_true: &[usize],
    labeled_false: &[usize],
    adjacency: &[Vec<(usize, T)>],
    n: usize,
    walk_length: usize,
    window: usize,
    rng: &mut ChaCha8Rng,
) -> Option<ContextSample> {
    if use_labels {
        let total = labeled_true.len() + labeled_false.len();
        if total == 0 {
            return None;
        }
        let pick = rand::Rng::random_range(rng, 0..total);
        let (node, same_pool, other_pool) = if pick < labeled_true.len() {
            (labeled_true[pick], labeled_true, labeled_false)
        } else {
            (labeled_false[pick - labeled_true.len()], labeled_false, labeled_true)
        };
        let pool: Vec<usize> = if positive {
            same_pool.iter().copied().filter(|&c| c != node).collect()
        } else {
            other_pool.to_vec()
        };
        if pool.is_empty() {
            return None;
        }
        let context = pool[rand::Rng::random_range(rng, 0..pool.len())];
        return Some(ContextSample { node, context, positive });
    }

    // Weighted random walk.
    let start = rand::Rng::random_range(rng, 0..n);
    let mut walk = Vec::with_capacity(walk_length.max(1));
    walk.push(start);
    while walk.len() < walk_length.max(1) {
        let here = *walk.last().unwrap();
        let neighbors = &adjacency[here];
        if neighbors.is_empty() {
            break;
        }
        let total = neighbors.iter().fold(T::zero(), |acc, &(_, w)| acc + w);
        let mut draw = T::from_f64(rand::Rng::random::<f64>(rng)) * total;
        let mut next = neighbors[neighbors.len() - 1].0;
        for &(cand, w) in neighbors {
            if draw < w {
                next = cand;
                break;
            }
            draw -= w;
        }
        walk.push(next);
    }

    let pos = rand::Rng::random_range(rng, 0..walk.len());
    let node = walk[pos];
    if positive {
        let lo = pos.saturating_sub(window);
        let hi = (pos + window).min(walk.len() - 1);
        let candidates: Vec<usize> =
            (lo..=hi).filter(|&q| q != pos && walk[q] != node).map(|q| walk[q]).collect();
        if candidates.is_empty() {
            return None;
        }
        let context = candidates[rand::Rng::random_range(rng, 0..candidates.len())];
        Some(ContextSample { node, context, positive: true })
    } else {
        let lo = pos.saturating_sub(window);
        let hi = (pos + window).min(walk.len() - 1);
        let in_window: std::collections::HashSet<usize> = walk[lo..=hi].iter().copied().collect();
        if in_window.len() == n {
            return None;
        }
        for _ in 0..64 {
            let c = rand::Rng::random_range(rng, 0..n);
            if !in_window.contains(&c) {
                return Some(ContextSample { node, context: c, positive: false });
            }
        }
        None
    }
}

/// Mean supervised cross-entropy plus `lambda` times the mean context term
/// `-ln sigmoid(gamma * w_c . h(d_i))` (or the literal `+ln sigmoid`, behind
/// the flag).
pub fn planetoid_loss<T: Real>(
    model: &PlanetoidModel<T>,
    labeled: &[super::LabeledExample<'_, T>],
    samples: &[ContextSample],
    domain_features: &RowMatrix<T>,
    lambda: T,
    negate_context_term: bool,
) -> Result<T, ModelError> {
    planetoid_objective(model, labeled, samples, domain_features, lambda, negate_context_term, None)
}

/// Gradient accumulators for the trunk, head, and context matrix (flat,
/// row-major).
#[derive(Clone, Debug)]
pub struct PlanetoidGradBuffers<T> {
    pub trunk: BlockGrads<T>,
    pub head: BlockGrads<T>,
    pub context: Vec<T>,
}

impl<T: Real> PlanetoidGradBuffers<T> {
    pub fn zeros_like(model: &PlanetoidModel<T>) -> Self {
        Self {
            trunk: BlockGrads::zeros_like(&model.trunk),
            head: BlockGrads::zeros_like(&model.head),
            context: vec![T::zero(); model.context.as_flat().len()],
        }
    }

    pub fn reset(&mut self) {
        self.trunk.reset();
        self.head.reset();
        self.context.iter_mut().for_each(|v| *v = T::zero());
    }
}

/// Objective with exact reverse-mode gradients for the trunk, head, and
/// context rows.
pub fn planetoid_loss_grads<T: Real>(
    model: &PlanetoidModel<T>,
    labeled: &[super::LabeledExample<'_, T>],
    samples: &[ContextSample],
    domain_features: &RowMatrix<T>,
    lambda: T,
    negate_context_term: bool,
    grads: &mut PlanetoidGradBuffers<T>,
) -> Result<T, ModelError> {
    grads.reset();
    let PlanetoidGradBuffers { trunk, head, context } = grads;
    planetoid_objective(
        model,
        labeled,
        samples,
        domain_features,
        lambda,
        negate_context_term,
        Some(PlanetoidGrads { trunk, head, context }),
    )
}

struct PlanetoidGrads<'a, T> {
    trunk: &'a mut BlockGrads<T>,
    head: &'a mut BlockGrads<T>,
    context: &'a mut [T],
}

fn planetoid_objective<T: Real>(
    model: &PlanetoidModel<T>,
    labeled: &[super::LabeledExample<'_, T>],
    samples: &[ContextSample],
    domain_features: &RowMatrix<T>,
    lambda: T,
    negate_context_term: bool,
    mut grads: Option<PlanetoidGrads<'_, T>>,
) -> Result<T, ModelError> {
    let supervised = match grads.as_mut() {
        Some(g) => {
            supervised_term(&model.trunk, &model.head, labeled, Some((&mut *g.trunk, &mut *g.head)))?
        }
        None => supervised_term(&model.trunk, &model.head, labeled, None)?,
    };
    if samples.is_empty() || lambda == T::zero() {
        return Ok(supervised);
    }

    let embed = model.trunk.output_dim();
    let inv = T::one() / T::from_f64(samples.len() as f64);
    let coef = lambda * inv;
    let mut context_total = T::zero();
    for sample in samples {
        if sample.node >= domain_features.rows() || sample.context >= model.context.rows() {
            return Err(ModelError::InvalidInput("context sample index out of range".into()));
        }
        let trace = model.trunk.forward_trace(domain_features.row(sample.node))?;
        let h = trace.output();
        let w_c = model.context.row(sample.context);
        let z = w_c.iter().zip(h).fold(T::zero(), |acc, (&a, &b)| acc + a * b);
        let gamma = if sample.positive { T::one() } else { -T::one() };
        let term = softplus(-gamma * z);
        context_total += if negate_context_term { -term } else { term };

        if let Some(g) = grads.as_mut() {
            let sig = crate::nn::sigmoid(-gamma * z);
            let mut dz = -gamma * sig;
            if negate_context_term {
                dz = -dz;
            }
            let dz = dz * coef;
            let d_h: Vec<T> = w_c.iter().map(|&w| w * dz).collect();
            model.trunk.backward(&trace, &d_h, g.trunk)?;
            let row = &mut g.context[sample.context * embed..(sample.context + 1) * embed];
            for (gc, &hv) in row.iter_mut().zip(h) {
                *gc += hv * dz;
            }
        }
    }
    Ok(supervised + lambda * (context_total * inv))
}

/// Train the Planetoid baseline with the shared epoch/batch skeleton; context
/// samples are drawn fresh each epoch from the walks stream and spread across
/// the epoch's steps.
pub fn planetoid_train<T: Real>(
    inputs: &TrainInputs<'_, T>,
    dg: &DomainGraph<T>,
    dims: &ModelDims,
    hyper: &PlanetoidHyper<T>,
    sched: &TrainSchedule<T>,
    seed: u64,
) -> Result<(PlanetoidModel<T>, Vec<T>), ModelError> {
    sched.validate()?;
    inputs.validate(None, Some(dg.domain_count()))?;
    let mut model = PlanetoidModel::init(dims, dg.domain_count(), seed)?;
    let mut trunk_grads = BlockGrads::zeros_like(&model.trunk);
    let mut head_grads = BlockGrads::zeros_like(&model.head);
    let mut context_grads = vec![T::zero(); model.context.as_flat().len()];
    let mut adam_trunk = AdamState::zeros_like(&model.trunk);
    let mut adam_head = AdamState::zeros_like(&model.head);
    let mut context_m = vec![T::zero(); context_grads.len()];
    let mut context_v = vec![T::zero(); context_grads.len()];
    let mut context_step = 0u64;

    let mut labels_by_domain: Vec<Option<bool>> = vec![None; dg.domain_count()];
    for &(idx, y) in inputs.labeled {
        labels_by_domain[idx] = Some(y);
    }

    let mut shuffle_rng = rng::seeded(derive_seed(seed, seeds::SHUFFLE));
    let mut walk_rng = rng::seeded(derive_seed(seed, seeds::WALKS));
    let n_labeled = inputs.labeled.len();
    let steps = n_labeled.div_ceil(sched.batch_size);
    let mut log = Vec::with_capacity(sched.epochs);

    for epoch in 0..sched.epochs {
        let lr = sched.lr_at_epoch(epoch);
        let order = shuffled_indices(n_labeled, &mut shuffle_rng);
        let samples = planetoid_sample_context(
            dg,
            &labels_by_domain,
            hyper.context_samples_per_epoch,
            hyper.walk_length,
            hyper.window,
            hyper.label_context_prob,
            &mut walk_rng,
        );

        let mut epoch_loss = T::zero();
        for step in 0..steps {
            let lo = step * sched.batch_size;
            let hi = (lo + sched.batch_size).min(n_labeled);
            let batch = labeled_batch(inputs.domain_features, inputs.labeled, &order, lo..hi);
            let chunk = &samples[chunk_range(samples.len(), steps, step)];
            trunk_grads.reset();
            head_grads.reset();
            context_grads.iter_mut().for_each(|v| *v = T::zero());
            epoch_loss += planetoid_objective(
                &model,
                &batch,
                chunk,
                inputs.domain_features,
                hyper.lambda,
                hyper.negate_context_term,
                Some(PlanetoidGrads {
                    trunk: &mut trunk_grads,
                    head: &mut head_grads,
                    context: &mut context_grads,
                }),
            )?;
            adam_step(&mut model.trunk, &trunk_grads, &mut adam_trunk, lr, sched.weight_decay)?;
            adam_step(&mut model.head, &head_grads, &mut adam_head, lr, sched.weight_decay)?;
            context_step += 1;
            adam_update_flat(
                model.context.as_flat_mut(),
                &context_grads,
                &mut context_m,
                &mut context_v,
                context_step,
                lr,
                sched.weight_decay,
            );
        }
        log.push(epoch_loss / T::from_f64(steps as f64));
    }

    Ok((model, log))
}
