//! Feature-only baseline: the same domain trunk and label head as HELP's
//! supervised path, trained on the labeled domains alone. Sharing the trunk
//! and head shapes (and seed roles) keeps the capacity comparison fair and
//! makes HELP with `lambda = 0` coincide with this model exactly.

use crate::models::{
    labeled_batch, new_head, new_tower, seeds, shuffled_indices, supervised_term, ModelDims,
    ModelError, TrainInputs,
};
use crate::nn::{adam_step, AdamState, BlockGrads, DenseBlock, TrainSchedule};
use crate::rng::{self, derive_seed};
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq)]
pub struct MlpModel<T> {
    pub trunk: DenseBlock<T>,
    pub head: DenseBlock<T>,
}

impl<T: Real> MlpModel<T> {
    pub fn init(dims: &ModelDims, seed: u64) -> Result<Self, ModelError> {
        dims.validate()?;
        Ok(Self {
            trunk: new_tower(dims.domain_dim, dims, derive_seed(seed, seeds::DOMAIN_TOWER))?,
            head: new_head(dims.embedding_dim(), dims, derive_seed(seed, seeds::LABEL_HEAD))?,
        })
    }

    pub fn predict(&self, domain_features: &[T]) -> Result<T, ModelError> {
        super::predict_composed(&self.trunk, &self.head, domain_features)
    }
}

/// Supervised-only training with the shared epoch/batch skeleton.
pub fn mlp_train<T: Real>(
    inputs: &TrainInputs<'_, T>,
    dims: &ModelDims,
    sched: &TrainSchedule<T>,
    seed: u64,
) -> Result<(MlpModel<T>, Vec<T>), ModelError> {
    sched.validate()?;
    inputs.validate(None, None)?;
    if inputs.domain_features.cols() != dims.domain_dim {
        return Err(ModelError::InvalidInput(format!(
            "domain feature dim {} disagrees with model dim {}",
            inputs.domain_features.cols(),
            dims.domain_dim
        )));
    }

    let mut model = MlpModel::init(dims, seed)?;
    let mut trunk_grads = BlockGrads::zeros_like(&model.trunk);
    let mut head_grads = BlockGrads::zeros_like(&model.head);
    let mut adam_trunk = AdamState::zeros_like(&model.trunk);
    let mut adam_head = AdamState::zeros_like(&model.head);
    let mut shuffle_rng = rng::seeded(derive_seed(seed, seeds::SHUFFLE));

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
            trunk_grads.reset();
            head_grads.reset();
            epoch_loss += supervised_term(
                &model.trunk,
                &model.head,
                &batch,
                Some((&mut trunk_grads, &mut head_grads)),
            )?;
            adam_step(&mut model.trunk, &trunk_grads, &mut adam_trunk, lr, sched.weight_decay)?;
            adam_step(&mut model.head, &head_grads, &mut adam_head, lr, sched.weight_decay)?;
        }
        log.push(epoch_loss / T::from_f64(steps as f64));
    }

    Ok((model, log))
}
