//! The HELP composite model and the four benchmark baselines (MLP,
//! Planetoid-I, NGM, label propagation). All neural models share the same
//! supervised path (domain trunk + sigmoid label head), the same seed-role
//! derivation, and the same epoch/batch skeleton, so matched seeds produce
//! aligned initializations and batch orders across model kinds.

mod help;
mod label_prop;
mod mlp;
mod ngm;
mod planetoid;

pub use help::{
    help_loss, help_loss_grads, help_train, HelpConfig, HelpGrads, HelpModel, PairExample,
};
pub use label_prop::{label_propagation, LabelPropConfig, LabelPropResult};
pub use mlp::{mlp_train, MlpModel};
pub use ngm::{ngm_loss, ngm_loss_grads, ngm_train, NgmDistance, NgmHyper, NgmModel};
pub use planetoid::{
    planetoid_loss, planetoid_loss_grads, planetoid_sample_context, planetoid_train,
    ContextSample, PlanetoidGradBuffers, PlanetoidHyper, PlanetoidModel,
};

use thiserror::Error;

use crate::graph::{DomainGraph, GraphError};
use crate::losses::LossError;
use crate::matrix::RowMatrix;
use crate::nn::{BlockGrads, DenseBlock, NnError, OutputActivation};
use crate::rng::ChaCha8Rng;
use crate::scalar::Real;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Loss(#[from] LossError),
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

/// Seed-role tags. Models that share a role (the domain trunk, the label
/// head) derive identical per-block seeds from the same base seed, which is
/// what makes HELP's supervised path and the MLP baseline initialize
/// identically.
pub(crate) mod seeds {
    pub const DOMAIN_TOWER: u64 = 1;
    pub const USER_TOWER: u64 = 2;
    pub const LABEL_HEAD: u64 = 3;
    pub const SIMILARITY_HEAD: u64 = 4;
    pub const CONTEXT: u64 = 5;
    pub const SHUFFLE: u64 = 6;
    pub const PAIRS: u64 = 7;
    pub const WALKS: u64 = 8;
    pub const EDGES: u64 = 9;
}

/// Which tower an embedding request addresses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Side {
    User,
    Domain,
}

impl Side {
    pub fn name(self) -> &'static str {
        match self {
            Side::User => "user",
            Side::Domain => "domain",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "user" => Some(Side::User),
            "domain" => Some(Side::Domain),
            _ => None,
        }
    }
}

/// Layer widths shared by every neural model: two feature towers and the
/// scalar heads stacked on the domain tower output.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelDims {
    pub domain_dim: usize,
    pub user_dim: usize,
    pub tower_dims: Vec<usize>,
    pub head_dims: Vec<usize>,
}

impl Default for ModelDims {
    fn default() -> Self {
        Self {
            domain_dim: 29,
            user_dim: 129,
            tower_dims: vec![96, 64, 32],
            head_dims: vec![16, 1],
        }
    }
}

impl ModelDims {
    pub fn validate(&self) -> Result<(), ModelError> {
        if self.domain_dim == 0 || self.user_dim == 0 {
            return Err(ModelError::InvalidInput("feature dims must be positive".into()));
        }
        if self.tower_dims.is_empty() || self.tower_dims.contains(&0) {
            return Err(ModelError::InvalidInput("tower dims must be positive".into()));
        }
        if self.head_dims.last() != Some(&1) {
            return Err(ModelError::InvalidInput("head must end in a single output".into()));
        }
        Ok(())
    }

    pub fn embedding_dim(&self) -> usize {
        *self.tower_dims.last().unwrap()
    }
}

/// One labeled domain in a mini-batch.
#[derive(Clone, Copy, Debug)]
pub struct LabeledExample<'a, T> {
    pub features: &'a [T],
    pub label: bool,
}

/// Feature tables plus the visible (training) labels.
#[derive(Clone, Copy, Debug)]
pub struct TrainInputs<'a, T> {
    pub domain_features: &'a RowMatrix<T>,
    pub user_features: &'a RowMatrix<T>,
    /// `(domain index, label)` for the training split of the labeled set.
    pub labeled: &'a [(usize, bool)],
}

impl<'a, T: Real> TrainInputs<'a, T> {
    /// Index consistency between feature tables, labels, and an optional
    /// graph; rejected before any training compute is spent.
    pub fn validate(
        &self,
        user_count: Option<usize>,
        domain_count: Option<usize>,
    ) -> Result<(), ModelError> {
        if let Some(u) = user_count {
            if self.user_features.rows() != u {
                return Err(ModelError::InvalidInput(format!(
                    "user feature rows ({}) disagree with graph user count ({u})",
                    self.user_features.rows()
                )));
            }
        }
        if let Some(d) = domain_count {
            if self.domain_features.rows() != d {
                return Err(ModelError::InvalidInput(format!(
                    "domain feature rows ({}) disagree with graph domain count ({d})",
                    self.domain_features.rows()
                )));
            }
        }
        if self.labeled.is_empty() {
            return Err(ModelError::InvalidInput("no labeled training domains".into()));
        }
        for &(idx, _) in self.labeled {
            if idx >= self.domain_features.rows() {
                return Err(ModelError::InvalidInput(format!(
                    "labeled domain index {idx} out of range"
                )));
            }
        }
        Ok(())
    }
}

/// Deterministic permutation of `0..n` drawn from the shared shuffle stream.
pub(crate) fn shuffled_indices(n: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    use rand::seq::SliceRandom;
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(rng);
    idx
}

/// Bounds of chunk `i` when splitting `total` items into `chunks` contiguous
/// near-equal chunks.
pub(crate) fn chunk_range(total: usize, chunks: usize, i: usize) -> std::ops::Range<usize> {
    let start = total * i / chunks;
    let end = total * (i + 1) / chunks;
    start..end
}

/// Batch of labeled examples for positions `range` of a shuffled index order.
pub(crate) fn labeled_batch<'a, T: Real>(
    features: &'a RowMatrix<T>,
    labeled: &[(usize, bool)],
    order: &[usize],
    range: std::ops::Range<usize>,
) -> Vec<LabeledExample<'a, T>> {
    order[range]
        .iter()
        .map(|&k| {
            let (idx, label) = labeled[k];
            LabeledExample { features: features.row(idx), label }
        })
        .collect()
}

/// Mean binary cross-entropy of the trunk+head path over a batch, with
/// gradients accumulated when requested. Every neural model's supervised term
/// goes through here, so models with matched parameters produce bitwise
/// identical values and gradients.
pub(crate) fn supervised_term<T: Real>(
    trunk: &DenseBlock<T>,
    head: &DenseBlock<T>,
    batch: &[LabeledExample<'_, T>],
    mut grads: Option<(&mut BlockGrads<T>, &mut BlockGrads<T>)>,
) -> Result<T, ModelError> {
    if batch.is_empty() {
        return Err(ModelError::InvalidInput("labeled batch is empty".into()));
    }
    let inv = T::one() / T::from_f64(batch.len() as f64);
    let mut total = T::zero();
    for ex in batch {
        let trunk_trace = trunk.forward_trace(ex.features)?;
        let head_trace = head.forward_trace(trunk_trace.output())?;
        let p = head_trace.output()[0];
        total += crate::losses::supervised_ce(p, ex.label);
        if let Some((trunk_grads, head_grads)) = grads.as_mut() {
            let dp = crate::losses::supervised_ce_dp(p, ex.label) * inv;
            let d_embed = head.backward(&head_trace, &[dp], head_grads)?;
            trunk.backward(&trunk_trace, &d_embed, trunk_grads)?;
        }
    }
    Ok(total * inv)
}

/// Probability output of a trunk+head stack for one feature vector.
pub(crate) fn predict_composed<T: Real>(
    trunk: &DenseBlock<T>,
    head: &DenseBlock<T>,
    features: &[T],
) -> Result<T, ModelError> {
    let embedding = trunk.forward(features)?;
    Ok(head.forward(&embedding)?[0])
}

pub(crate) fn new_tower<T: Real>(
    input_dim: usize,
    dims: &ModelDims,
    seed: u64,
) -> Result<DenseBlock<T>, ModelError> {
    Ok(DenseBlock::glorot(input_dim, &dims.tower_dims, OutputActivation::Identity, seed)?)
}

pub(crate) fn new_head<T: Real>(
    input_dim: usize,
    dims: &ModelDims,
    seed: u64,
) -> Result<DenseBlock<T>, ModelError> {
    Ok(DenseBlock::glorot(input_dim, &dims.head_dims, OutputActivation::Sigmoid, seed)?)
}

/// Baseline selector for the shared training entry point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BaselineKind {
    Mlp,
    Planetoid,
    Ngm,
}

/// A trained baseline.
#[derive(Clone, Debug)]
pub enum BaselineModel<T> {
    Mlp(MlpModel<T>),
    Planetoid(PlanetoidModel<T>),
    Ngm(NgmModel<T>),
}

impl<T: Real> BaselineModel<T> {
    pub fn predict(&self, domain_features: &[T]) -> Result<T, ModelError> {
        match self {
            BaselineModel::Mlp(m) => m.predict(domain_features),
            BaselineModel::Planetoid(m) => m.predict(domain_features),
            BaselineModel::Ngm(m) => m.predict(domain_features),
        }
    }
}

/// Hyperparameters for the graph-regularized baselines.
#[derive(Clone, Debug)]
pub struct BaselineHyper<T> {
    pub dims: ModelDims,
    pub planetoid: PlanetoidHyper<T>,
    pub ngm: NgmHyper<T>,
}

impl<T: Real> Default for BaselineHyper<T> {
    fn default() -> Self {
        Self {
            dims: ModelDims::default(),
            planetoid: PlanetoidHyper::default(),
            ngm: NgmHyper::default(),
        }
    }
}

/// Shared epoch-loop contract for the three trainable baselines.
pub fn train_baseline<T: Real>(
    kind: BaselineKind,
    inputs: &TrainInputs<'_, T>,
    dg: &DomainGraph<T>,
    sched: &crate::nn::TrainSchedule<T>,
    hyper: &BaselineHyper<T>,
    seed: u64,
) -> Result<(BaselineModel<T>, Vec<T>), ModelError> {
    match kind {
        BaselineKind::Mlp => {
            let (model, log) = mlp_train(inputs, &hyper.dims, sched, seed)?;
            Ok((BaselineModel::Mlp(model), log))
        }
        BaselineKind::Planetoid => {
            let (model, log) = planetoid_train(inputs, dg, &hyper.dims, &hyper.planetoid, sched, seed)?;
            Ok((BaselineModel::Planetoid(model), log))
        }
        BaselineKind::Ngm => {
            let (model, log) = ngm_train(inputs, dg, &hyper.dims, &hyper.ngm, sched, seed)?;
            Ok((BaselineModel::Ngm(model), log))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::RowMatrix;
    use crate::nn::TrainSchedule;
    use crate::rng;

    fn fixture() -> (RowMatrix<f64>, RowMatrix<f64>, Vec<(usize, bool)>, DomainGraph<f64>) {
        let mut r = rng::seeded(808);
        let n = 16;
        let features = RowMatrix::from_rows(
            &(0..n)
                .map(|i| {
                    let base = if i % 2 == 0 { 0.8 } else { -0.8 };
                    (0..3).map(|_| base + rng::uniform_in(&mut r, -0.4, 0.4)).collect()
                })
                .collect::<Vec<Vec<f64>>>(),
        );
        let users = RowMatrix::zeros(1, 1);
        let labeled: Vec<(usize, bool)> = (0..10).map(|i| (i, i % 2 == 0)).collect();
        // Edges mostly connect same-parity (same-class) domains.
        let mut edges = Vec::new();
        for i in 0..n {
            for j in (i + 1)..n {
                if (i % 2 == j % 2) && rng::uniform::<f64>(&mut r) < 0.5 {
                    edges.push((i, j, rng::uniform_in(&mut r, 0.5, 2.0)));
                }
            }
        }
        let dg = DomainGraph::new(n, edges).unwrap();
        (features, users, labeled, dg)
    }

    fn dims() -> ModelDims {
        ModelDims { domain_dim: 3, user_dim: 1, tower_dims: vec![6, 3], head_dims: vec![2, 1] }
    }

    #[test]
    fn baselines_reduce_training_loss_on_most_seeds() {
        let (features, users, labeled, dg) = fixture();
        let inputs =
            TrainInputs { domain_features: &features, user_features: &users, labeled: &labeled };
        let sched = TrainSchedule { epochs: 60, batch_size: 16, ..TrainSchedule::default() };
        let hyper = BaselineHyper {
            dims: dims(),
            planetoid: PlanetoidHyper { context_samples_per_epoch: 32, ..PlanetoidHyper::default() },
            ngm: NgmHyper { edges_per_class_per_step: 8, ..NgmHyper::default() },
        };
        for kind in [BaselineKind::Mlp, BaselineKind::Planetoid, BaselineKind::Ngm] {
            let mut improved = 0;
            for seed in 0..10 {
                let (_, log) = train_baseline(kind, &inputs, &dg, &sched, &hyper, seed).unwrap();
                if log.last().unwrap() < log.first().unwrap() {
                    improved += 1;
                }
            }
            assert!(improved >= 8, "{kind:?}: loss decreased in only {improved}/10 runs");
        }
    }

    #[test]
    fn baseline_zero_epochs_returns_initialization() {
        let (features, users, labeled, dg) = fixture();
        let inputs =
            TrainInputs { domain_features: &features, user_features: &users, labeled: &labeled };
        let sched = TrainSchedule { epochs: 0, ..TrainSchedule::default() };
        let hyper = BaselineHyper { dims: dims(), ..BaselineHyper::default() };
        let (model, log) =
            train_baseline(BaselineKind::Mlp, &inputs, &dg, &sched, &hyper, 4).unwrap();
        assert!(log.is_empty());
        match model {
            BaselineModel::Mlp(m) => assert_eq!(m, MlpModel::init(&dims(), 4).unwrap()),
            _ => unreachable!(),
        }
    }

    #[test]
    fn baseline_training_is_reproducible_per_seed() {
        let (features, users, labeled, dg) = fixture();
        let inputs =
            TrainInputs { domain_features: &features, user_features: &users, labeled: &labeled };
        let sched = TrainSchedule { epochs: 3, batch_size: 8, ..TrainSchedule::default() };
        let hyper = BaselineHyper {
            dims: dims(),
            planetoid: PlanetoidHyper { context_samples_per_epoch: 16, ..PlanetoidHyper::default() },
            ngm: NgmHyper { edges_per_class_per_step: 4, ..NgmHyper::default() },
        };
        for kind in [BaselineKind::Mlp, BaselineKind::Planetoid, BaselineKind::Ngm] {
            let (_, log1) = train_baseline(kind, &inputs, &dg, &sched, &hyper, 9).unwrap();
            let (_, log2) = train_baseline(kind, &inputs, &dg, &sched, &hyper, 9).unwrap();
            assert_eq!(log1, log2, "{kind:?}");
        }
    }
}
