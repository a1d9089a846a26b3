//! The four-block HELP model: two feature towers (`h_d`, `h_u`), a sigmoid
//! label head `f` on the domain embedding, and a sigmoid similarity head `g`
//! on the concatenated pair embedding. Training jointly minimizes the mean
//! supervised cross-entropy over labeled domains plus `lambda` times the mean
//! unsupervised loss over sampled user-domain pairs; prediction needs only
//! the domain features.

use crate::graph::{shuffle_pairs, BipartiteGraph};
use crate::losses::{self, LossKind, LossSpec, RegressionKind};
use crate::models::{
    chunk_range, labeled_batch, new_head, new_tower, seeds, shuffled_indices, supervised_term,
    LabeledExample, ModelDims, ModelError, Side, TrainInputs,
};
use crate::nn::{adam_step, AdamState, BlockGrads, DenseBlock, TrainSchedule};
use crate::rng::{self, derive_seed};
use crate::scalar::Real;

/// HELP hyperparameters: block shapes, the unsupervised loss, and the pair
/// sampling policy.
#[derive(Clone, Debug)]
pub struct HelpConfig<T> {
    pub dims: ModelDims,
    pub loss: LossSpec<T>,
    /// Edges of the weighted graph strictly above this become binary links.
    pub dichotomize_threshold: T,
    /// Positive pairs sampled fresh each epoch.
    pub positives_per_epoch: usize,
    /// Negatives per positive.
    pub negative_ratio: f64,
}

impl<T: Real> Default for HelpConfig<T> {
    fn default() -> Self {
        Self {
            dims: ModelDims::default(),
            loss: LossSpec::default(),
            dichotomize_threshold: T::zero(),
            positives_per_epoch: 512,
            negative_ratio: 1.0,
        }
    }
}

/// The four-block composite. Towers share no parameters; `f` reads the domain
/// embedding, `g` reads `concat(e_d, e_u)`.
#[derive(Clone, Debug, PartialEq)]
pub struct HelpModel<T> {
    pub h_d: DenseBlock<T>,
    pub h_u: DenseBlock<T>,
    pub f: DenseBlock<T>,
    pub g: DenseBlock<T>,
}

impl<T: Real> HelpModel<T> {
    pub fn init(dims: &ModelDims, seed: u64) -> Result<Self, ModelError> {
        dims.validate()?;
        let embed = dims.embedding_dim();
        Ok(Self {
            h_d: new_tower(dims.domain_dim, dims, derive_seed(seed, seeds::DOMAIN_TOWER))?,
            h_u: new_tower(dims.user_dim, dims, derive_seed(seed, seeds::USER_TOWER))?,
            f: new_head(embed, dims, derive_seed(seed, seeds::LABEL_HEAD))?,
            g: new_head(2 * embed, dims, derive_seed(seed, seeds::SIMILARITY_HEAD))?,
        })
    }

    /// Probability that the domain is positive: `f(h_d(x))`. Inductive by
    /// construction; no graph is consulted.
    pub fn predict(&self, domain_features: &[T]) -> Result<T, ModelError> {
        super::predict_composed(&self.h_d, &self.f, domain_features)
    }

    pub fn embed_domain(&self, features: &[T]) -> Result<Vec<T>, ModelError> {
        Ok(self.h_d.forward(features)?)
    }

    pub fn embed_user(&self, features: &[T]) -> Result<Vec<T>, ModelError> {
        Ok(self.h_u.forward(features)?)
    }

    pub fn embed(&self, features: &[T], side: Side) -> Result<Vec<T>, ModelError> {
        match side {
            Side::User => self.embed_user(features),
            Side::Domain => self.embed_domain(features),
        }
    }

    pub fn embedding_dim(&self) -> usize {
        self.h_d.output_dim()
    }
}

/// One user-domain pair with resolved features. `connected` is the binary
/// link indicator from the dichotomized graph; `weight` is the raw edge
/// weight (zero for non-edges) and is the target of the regression losses.
#[derive(Clone, Copy, Debug)]
pub struct PairExample<'a, T> {
    pub domain_features: &'a [T],
    pub user_features: &'a [T],
    pub connected: bool,
    pub weight: T,
}

/// Gradient accumulators for all four blocks.
#[derive(Clone, Debug)]
pub struct HelpGrads<T> {
    pub h_d: BlockGrads<T>,
    pub h_u: BlockGrads<T>,
    pub f: BlockGrads<T>,
    pub g: BlockGrads<T>,
}

impl<T: Real> HelpGrads<T> {
    pub fn zeros_like(model: &HelpModel<T>) -> Self {
        Self {
            h_d: BlockGrads::zeros_like(&model.h_d),
            h_u: BlockGrads::zeros_like(&model.h_u),
            f: BlockGrads::zeros_like(&model.f),
            g: BlockGrads::zeros_like(&model.g),
        }
    }

    pub fn reset(&mut self) {
        self.h_d.reset();
        self.h_u.reset();
        self.f.reset();
        self.g.reset();
    }
}

/// Composite objective: mean supervised cross-entropy over the labeled batch
/// plus `lambda` times the mean unsupervised loss over the pairs.
pub fn help_loss<T: Real>(
    model: &HelpModel<T>,
    labeled: &[LabeledExample<'_, T>],
    pairs: &[PairExample<'_, T>],
    spec: &LossSpec<T>,
) -> Result<T, ModelError> {
    help_objective(model, labeled, pairs, spec, None, false)
}

/// Same objective, with exact reverse-mode gradients for every block that
/// participates. Blocks off the computation path keep zero gradients.
pub fn help_loss_grads<T: Real>(
    model: &HelpModel<T>,
    labeled: &[LabeledExample<'_, T>],
    pairs: &[PairExample<'_, T>],
    spec: &LossSpec<T>,
    grads: &mut HelpGrads<T>,
) -> Result<T, ModelError> {
    grads.reset();
    help_objective(model, labeled, pairs, spec, Some(grads), false)
}

/// Training-step variant: a step whose labeled chunk is empty contributes a
/// zero supervised term instead of erroring (the epoch's other steps carry
/// the full labeled pass).
fn help_step_grads<T: Real>(
    model: &HelpModel<T>,
    labeled: &[LabeledExample<'_, T>],
    pairs: &[PairExample<'_, T>],
    spec: &LossSpec<T>,
    grads: &mut HelpGrads<T>,
) -> Result<T, ModelError> {
    grads.reset();
    help_objective(model, labeled, pairs, spec, Some(grads), true)
}

fn help_objective<T: Real>(
    model: &HelpModel<T>,
    labeled: &[LabeledExample<'_, T>],
    pairs: &[PairExample<'_, T>],
    spec: &LossSpec<T>,
    mut grads: Option<&mut HelpGrads<T>>,
    allow_empty_labeled: bool,
) -> Result<T, ModelError> {
    spec.validate()?;
    let supervised = if labeled.is_empty() && allow_empty_labeled {
        // Pair-only training step; the epoch's other steps carry the labels.
        T::zero()
    } else {
        match grads.as_mut() {
            Some(g) => {
                supervised_term(&model.h_d, &model.f, labeled, Some((&mut g.h_d, &mut g.f)))?
            }
            None => supervised_term(&model.h_d, &model.f, labeled, None)?,
        }
    };

    if pairs.is_empty() || spec.lambda == T::zero() {
        return Ok(supervised);
    }

    let n_pairs = T::from_f64(pairs.len() as f64);
    let coef = spec.lambda / n_pairs;
    let embed_dim = model.h_d.output_dim();
    let mut unsupervised_total = T::zero();

    for pair in pairs {
        let domain_trace = model.h_d.forward_trace(pair.domain_features)?;
        let user_trace = model.h_u.forward_trace(pair.user_features)?;
        let e_d = domain_trace.output();
        let e_u = user_trace.output();

        if spec.kind.uses_similarity_head() {
            let mut joint = Vec::with_capacity(2 * embed_dim);
            joint.extend_from_slice(e_d);
            joint.extend_from_slice(e_u);
            let sim_trace = model.g.forward_trace(&joint)?;
            let w_hat = sim_trace.output()[0];

            let (value, d_what) = match spec.kind {
                LossKind::Contrastive => {
                    if pair.connected {
                        // d^2 = 1 - w_hat, computed directly to avoid the
                        // square-root gradient singularity.
                        (T::one() - w_hat, -T::one())
                    } else {
                        let dist = losses::learned_distance(w_hat);
                        let value = losses::contrastive(false, dist, spec.margin);
                        let gap = (spec.margin - dist).max(T::zero());
                        (value, gap / dist)
                    }
                }
                LossKind::CrossEntropy => (
                    losses::edge_ce(pair.connected, w_hat),
                    losses::edge_ce_dwhat(pair.connected, w_hat),
                ),
                kind => {
                    let reg = RegressionKind::of(kind).expect("regression kind");
                    (
                        losses::regression_loss(
                            pair.weight,
                            w_hat,
                            reg,
                            spec.smooth_l1_discontinuous,
                        ),
                        losses::regression_loss_dwhat(
                            pair.weight,
                            w_hat,
                            reg,
                            spec.smooth_l1_discontinuous,
                        ),
                    )
                }
            };
            unsupervised_total += value;

            if let Some(g) = grads.as_mut() {
                let d_joint = model.g.backward(&sim_trace, &[d_what * coef], &mut g.g)?;
                model.h_d.backward(&domain_trace, &d_joint[..embed_dim], &mut g.h_d)?;
                model.h_u.backward(&user_trace, &d_joint[embed_dim..], &mut g.h_u)?;
            }
        } else {
            // Embedding-distance losses bypass the similarity head entirely.
            let (value, d_eu, d_ed) = match spec.kind {
                LossKind::CosineEmbed => {
                    let value = losses::cosine_embed(pair.connected, e_u, e_d)?;
                    if grads.is_some() {
                        let (du, dd) = losses::cosine_embed_grad(pair.connected, e_u, e_d)?;
                        (value, du, dd)
                    } else {
                        (value, Vec::new(), Vec::new())
                    }
                }
                kind => {
                    let order = if kind == LossKind::L1Embed {
                        losses::NormOrder::L1
                    } else {
                        losses::NormOrder::L2Squared
                    };
                    let value = losses::embed_norm(pair.connected, e_u, e_d, order)?;
                    if grads.is_some() {
                        let (du, dd) = losses::embed_norm_grad(pair.connected, e_u, e_d, order)?;
                        (value, du, dd)
                    } else {
                        (value, Vec::new(), Vec::new())
                    }
                }
            };
            unsupervised_total += value;

            if let Some(g) = grads.as_mut() {
                let d_eu: Vec<T> = d_eu.iter().map(|&v| v * coef).collect();
                let d_ed: Vec<T> = d_ed.iter().map(|&v| v * coef).collect();
                model.h_u.backward(&user_trace, &d_eu, &mut g.h_u)?;
                model.h_d.backward(&domain_trace, &d_ed, &mut g.h_d)?;
            }
        }
    }

    Ok(supervised + spec.lambda * (unsupervised_total / n_pairs))
}

/// Train HELP on the weighted interaction graph. Each epoch passes every
/// labeled training domain once in shuffled mini-batches and spreads a fresh
/// pair sample across the same steps; one joint Adam step per batch.
/// Bitwise deterministic for a given seed.
pub fn help_train<T: Real>(
    inputs: &TrainInputs<'_, T>,
    graph: &BipartiteGraph<T>,
    cfg: &HelpConfig<T>,
    sched: &TrainSchedule<T>,
    seed: u64,
) -> Result<(HelpModel<T>, Vec<T>), ModelError> {
    sched.validate()?;
    cfg.loss.validate()?;
    inputs.validate(Some(graph.user_count()), Some(graph.domain_count()))?;
    if inputs.domain_features.cols() != cfg.dims.domain_dim
        || inputs.user_features.cols() != cfg.dims.user_dim
    {
        return Err(ModelError::InvalidInput(format!(
            "feature dims ({}, {}) disagree with model dims ({}, {})",
            inputs.domain_features.cols(),
            inputs.user_features.cols(),
            cfg.dims.domain_dim,
            cfg.dims.user_dim
        )));
    }

    let mut model = HelpModel::init(&cfg.dims, seed)?;
    let mut grads = HelpGrads::zeros_like(&model);
    let mut adam_h_d = AdamState::zeros_like(&model.h_d);
    let mut adam_h_u = AdamState::zeros_like(&model.h_u);
    let mut adam_f = AdamState::zeros_like(&model.f);
    let mut adam_g = AdamState::zeros_like(&model.g);

    let binary = graph.dichotomize(cfg.dichotomize_threshold)?;
    let mut shuffle_rng = rng::seeded(derive_seed(seed, seeds::SHUFFLE));
    let pair_base = derive_seed(seed, seeds::PAIRS);

    let n_labeled = inputs.labeled.len();
    let label_steps = n_labeled.div_ceil(sched.batch_size);
    let use_pairs = cfg.loss.lambda > T::zero();
    let mut log = Vec::with_capacity(sched.epochs);

    for epoch in 0..sched.epochs {
        let lr = sched.lr_at_epoch(epoch);
        let order = shuffled_indices(n_labeled, &mut shuffle_rng);
        let epoch_pairs = if use_pairs {
            let pair_seed = derive_seed(pair_base, epoch as u64);
            let mut pairs =
                binary.sample_pairs(cfg.positives_per_epoch, cfg.negative_ratio, pair_seed)?;
            shuffle_pairs(&mut pairs, derive_seed(pair_seed, 1));
            pairs.pairs
        } else {
            Vec::new()
        };
        // Every labeled domain passes exactly once per epoch. When the pair
        // sample needs more mini-batches than the labeled set, the single
        // labeled pass is spread in smaller chunks across the pair steps.
        let steps = label_steps.max(epoch_pairs.len().div_ceil(sched.batch_size));

        let mut epoch_loss = T::zero();
        for step in 0..steps {
            let batch = if steps == label_steps {
                let lo = step * sched.batch_size;
                let hi = (lo + sched.batch_size).min(n_labeled);
                labeled_batch(inputs.domain_features, inputs.labeled, &order, lo..hi)
            } else {
                labeled_batch(
                    inputs.domain_features,
                    inputs.labeled,
                    &order,
                    chunk_range(n_labeled, steps, step),
                )
            };
            let pair_examples: Vec<PairExample<'_, T>> = epoch_pairs
                [chunk_range(epoch_pairs.len(), steps, step)]
            .iter()
            .map(|p| PairExample {
                domain_features: inputs.domain_features.row(p.domain),
                user_features: inputs.user_features.row(p.user),
                connected: p.connected,
                weight: graph.weight(p.user, p.domain).unwrap_or_else(T::zero),
            })
            .collect();

            epoch_loss += help_step_grads(&model, &batch, &pair_examples, &cfg.loss, &mut grads)?;
            adam_step(&mut model.h_d, &grads.h_d, &mut adam_h_d, lr, sched.weight_decay)?;
            adam_step(&mut model.h_u, &grads.h_u, &mut adam_h_u, lr, sched.weight_decay)?;
            adam_step(&mut model.f, &grads.f, &mut adam_f, lr, sched.weight_decay)?;
            adam_step(&mut model.g, &grads.g, &mut adam_g, lr, sched.weight_decay)?;
        }
        log.push(epoch_loss / T::from_f64(steps as f64));
    }

    Ok((model, log))
}
