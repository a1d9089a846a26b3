//! Neural graph machine baseline: the supervised trunk+head path plus a
//! smoothness penalty on a hidden layer's output across domain-graph edges,
//! with separate weights for labeled-labeled, labeled-unlabeled, and
//! unlabeled-unlabeled edges.

use crate::graph::{DomainGraph, EdgeClasses};
use crate::matrix::RowMatrix;
use crate::models::{
    labeled_batch, new_head, new_tower, seeds, shuffled_indices, supervised_term, ModelDims,
    ModelError, TrainInputs,
};
use crate::nn::{adam_step, AdamState, BlockGrads, BlockTrace, DenseBlock, TrainSchedule};
use crate::rng::{self, derive_seed, ChaCha8Rng};
use crate::scalar::Real;

/// Distance between regularized hidden outputs.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NgmDistance {
    L1,
    L2Squared,
}

impl NgmDistance {
    pub fn name(self) -> &'static str {
        match self {
            NgmDistance::L1 => "l1",
            NgmDistance::L2Squared => "l2",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "l1" => Some(NgmDistance::L1),
            "l2" => Some(NgmDistance::L2Squared),
            _ => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct NgmHyper<T> {
    /// Weights for the labeled-labeled, labeled-unlabeled, and
    /// unlabeled-unlabeled edge terms.
    pub lambdas: [T; 3],
    pub distance: NgmDistance,
    /// Edges subsampled per class per step; each class term is the mean over
    /// the sampled edges of weight times hidden-output distance.
    pub edges_per_class_per_step: usize,
    /// Index into the stacked trunk+head layers whose output is regularized.
    /// `None` selects the second-to-last layer of the stack.
    pub regularized_layer: Option<usize>,
}

impl<T: Real> Default for NgmHyper<T> {
    fn default() -> Self {
        Self {
            lambdas: [T::from_f64(0.01); 3],
            distance: NgmDistance::L1,
            edges_per_class_per_step: 256,
            regularized_layer: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NgmModel<T> {
    pub trunk: DenseBlock<T>,
    pub head: DenseBlock<T>,
    /// Index into the stacked trunk+head layer sequence.
    pub regularized_layer: usize,
}

impl<T: Real> NgmModel<T> {
    pub fn init(
        dims: &ModelDims,
        regularized_layer: Option<usize>,
        seed: u64,
    ) -> Result<Self, ModelError> {
        dims.validate()?;
        let total_layers = dims.tower_dims.len() + dims.head_dims.len();
        let layer = regularized_layer.unwrap_or(total_layers - 2);
        if layer >= total_layers {
            return Err(ModelError::InvalidInput(format!(
                "regularized layer {layer} out of range ({total_layers} layers)"
            )));
        }
        Ok(Self {
            trunk: new_tower(dims.domain_dim, dims, derive_seed(seed, seeds::DOMAIN_TOWER))?,
            head: new_head(dims.embedding_dim(), dims, derive_seed(seed, seeds::LABEL_HEAD))?,
            regularized_layer: layer,
        })
    }

    pub fn predict(&self, domain_features: &[T]) -> Result<T, ModelError> {
        super::predict_composed(&self.trunk, &self.head, domain_features)
    }

    fn traces(&self, features: &[T]) -> Result<(BlockTrace<T>, BlockTrace<T>), ModelError> {
        let trunk = self.trunk.forward_trace(features)?;
        let head = self.head.forward_trace(trunk.output())?;
        Ok((trunk, head))
    }

    /// Regularized hidden output for one domain.
    fn hidden<'a>(&self, trunk: &'a BlockTrace<T>, head: &'a BlockTrace<T>) -> &'a [T] {
        if self.regularized_layer < self.trunk.layer_count() {
            trunk.layer_output(self.regularized_layer)
        } else {
            head.layer_output(self.regularized_layer - self.trunk.layer_count())
        }
    }

    fn backward_hidden(
        &self,
        trunk: &BlockTrace<T>,
        head: &BlockTrace<T>,
        d_hidden: &[T],
        trunk_grads: &mut BlockGrads<T>,
        head_grads: &mut BlockGrads<T>,
    ) -> Result<(), ModelError> {
        if self.regularized_layer < self.trunk.layer_count() {
            self.trunk.backward_from_layer(trunk, self.regularized_layer, d_hidden, trunk_grads)?;
        } else {
            let head_layer = self.regularized_layer - self.trunk.layer_count();
            let d_embed = self.head.backward_from_layer(head, head_layer, d_hidden, head_grads)?;
            self.trunk.backward(trunk, &d_embed, trunk_grads)?;
        }
        Ok(())
    }
}

fn distance<T: Real>(a: &[T], b: &[T], kind: NgmDistance) -> T {
    match kind {
        NgmDistance::L1 => a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + (x - y).abs()),
        NgmDistance::L2Squared => {
            a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + (x - y) * (x - y))
        }
    }
}

fn distance_grad<T: Real>(a: &[T], b: &[T], kind: NgmDistance) -> Vec<T> {
    match kind {
        NgmDistance::L1 => a
            .iter()
            .zip(b)
            .map(|(&x, &y)| {
                if x > y {
                    T::one()
                } else if x < y {
                    -T::one()
                } else {
                    T::zero()
                }
            })
            .collect(),
        NgmDistance::L2Squared => {
            a.iter().zip(b).map(|(&x, &y)| T::from_f64(2.0) * (x - y)).collect()
        }
    }
}

/// Supervised mean cross-entropy plus, for each edge class, lambda times the
/// mean over class edges of edge-weight times hidden-output distance.
pub fn ngm_loss<T: Real>(
    model: &NgmModel<T>,
    labeled: &[super::LabeledExample<'_, T>],
    classes: &EdgeClasses<T>,
    domain_features: &RowMatrix<T>,
    lambdas: [T; 3],
    kind: NgmDistance,
) -> Result<T, ModelError> {
    ngm_objective(model, labeled, classes, domain_features, lambdas, kind, None)
}

/// Objective with exact reverse-mode gradients for the trunk and head.
pub fn ngm_loss_grads<T: Real>(
    model: &NgmModel<T>,
    labeled: &[super::LabeledExample<'_, T>],
    classes: &EdgeClasses<T>,
    domain_features: &RowMatrix<T>,
    lambdas: [T; 3],
    kind: NgmDistance,
    trunk_grads: &mut BlockGrads<T>,
    head_grads: &mut BlockGrads<T>,
) -> Result<T, ModelError> {
    trunk_grads.reset();
    head_grads.reset();
    ngm_objective(model, labeled, classes, domain_features, lambdas, kind, Some((trunk_grads, head_grads)))
}

fn ngm_objective<T: Real>(
    model: &NgmModel<T>,
    labeled: &[super::LabeledExample<'_, T>],
    classes: &EdgeClasses<T>,
    domain_features: &RowMatrix<T>,
    lambdas: [T; 3],
    kind: NgmDistance,
    mut grads: Option<(&mut BlockGrads<T>, &mut BlockGrads<T>)>,
) -> Result<T, ModelError> {
    let supervised = match grads.as_mut() {
        Some((trunk, head)) => {
            supervised_term(&model.trunk, &model.head, labeled, Some((&mut **trunk, &mut **head)))?
        }
        None => supervised_term(&model.trunk, &model.head, labeled, None)?,
    };

    let class_edges = [
        &classes.labeled_labeled,
        &classes.labeled_unlabeled,
        &classes.unlabeled_unlabeled,
    ];
    let mut total = supervised;
    for (edges, &lambda) in class_edges.into_iter().zip(&lambdas) {
        if edges.is_empty() || lambda == T::zero() {
            continue;
        }
        let inv = T::one() / T::from_f64(edges.len() as f64);
        let coef = lambda * inv;
        let mut class_total = T::zero();
        for &(i, j, w) in edges {
            let (trunk_i, head_i) = model.traces(domain_features.row(i))?;
            let (trunk_j, head_j) = model.traces(domain_features.row(j))?;
            let h_i = model.hidden(&trunk_i, &head_i);
            let h_j = model.hidden(&trunk_j, &head_j);
            class_total += w * distance(h_i, h_j, kind);

            if let Some((trunk_grads, head_grads)) = grads.as_mut() {
                let base = distance_grad(h_i, h_j, kind);
                let d_i: Vec<T> = base.iter().map(|&g| g * w * coef).collect();
                let d_j: Vec<T> = base.iter().map(|&g| -g * w * coef).collect();
                model.backward_hidden(&trunk_i, &head_i, &d_i, trunk_grads, head_grads)?;
                model.backward_hidden(&trunk_j, &head_j, &d_j, trunk_grads, head_grads)?;
            }
        }
        total += lambda * (class_total * inv);
    }
    Ok(total)
}

/// Train the NGM baseline with the shared epoch/batch skeleton; each step
/// regularizes a fresh without-replacement subsample of every edge class.
pub fn ngm_train<T: Real>(
    inputs: &TrainInputs<'_, T>,
    dg: &DomainGraph<T>,
    dims: &ModelDims,
    hyper: &NgmHyper<T>,
    sched: &TrainSchedule<T>,
    seed: u64,
) -> Result<(NgmModel<T>, Vec<T>), ModelError> {
    sched.validate()?;
    inputs.validate(None, Some(dg.domain_count()))?;
    let mut model = NgmModel::init(dims, hyper.regularized_layer, seed)?;
    let mut trunk_grads = BlockGrads::zeros_like(&model.trunk);
    let mut head_grads = BlockGrads::zeros_like(&model.head);
    let mut adam_trunk = AdamState::zeros_like(&model.trunk);
    let mut adam_head = AdamState::zeros_like(&model.head);

    let mut labeled_mask = vec![false; dg.domain_count()];
    for &(idx, _) in inputs.labeled {
        labeled_mask[idx] = true;
    }
    let classes = dg.classify_edge_pairs(&labeled_mask)?;

    let mut shuffle_rng = rng::seeded(derive_seed(seed, seeds::SHUFFLE));
    let mut edge_rng = rng::seeded(derive_seed(seed, seeds::EDGES));
    let n_labeled = inputs.labeled.len();
    let steps = n_labeled.div_ceil(sched.batch_size);
    let mut log = Vec::with_capacity(sched.epochs);

    for epoch in 0..sched.epochs {
        let lr = sched.lr_at_epoch(epoch);
        let order = shuffled_indices(n_labeled, &mut shuffle_rng);
        let mut epoch_loss = T::zero();
        for step in 0..steps {
            let lo = step * sched.batch_size;
            let hi = (lo + sched.batch_size).min(n_labeled);
            let batch = labeled_batch(inputs.domain_features, inputs.labeled, &order, lo..hi);
            let sub = EdgeClasses {
                labeled_labeled: subsample(
                    &classes.labeled_labeled,
                    hyper.edges_per_class_per_step,
                    &mut edge_rng,
                ),
                labeled_unlabeled: subsample(
                    &classes.labeled_unlabeled,
                    hyper.edges_per_class_per_step,
                    &mut edge_rng,
                ),
                unlabeled_unlabeled: subsample(
                    &classes.unlabeled_unlabeled,
                    hyper.edges_per_class_per_step,
                    &mut edge_rng,
                ),
            };
            trunk_grads.reset();
            head_grads.reset();
            epoch_loss += ngm_objective(
                &model,
                &batch,
                &sub,
                inputs.domain_features,
                hyper.lambdas,
                hyper.distance,
                Some((&mut trunk_grads, &mut head_grads)),
            )?;
            adam_step(&mut model.trunk, &trunk_grads, &mut adam_trunk, lr, sched.weight_decay)?;
            adam_step(&mut model.head, &head_grads, &mut adam_head, lr, sched.weight_decay)?;
        }
        log.push(epoch_loss / T::from_f64(steps as f64));
    }

    Ok((model, log))
}

fn subsample<T: Real>(
    edges: &[(usize, usize, T)],
    count: usize,
    rng: &mut ChaCha8Rng,
) -> Vec<(usize, usize, T)> {
    if edges.len() <= count {
        return edges.to_vec();
    }
    let mut idx: Vec<usize> = (0..edges.len()).collect();
    let mut picked = Vec::with_capacity(count);
    for i in 0..count {
        let j = rand::Rng::random_range(rng, i..idx.len());
        idx.swap(i, j);
        picked.push(edges[idx[i]]);
    }
    picked
}
