//! Self-describing model checkpoints: a versioned JSON container holding the
//! model kind, per-block layer dims and activation tags, and parameter arrays
//! in row-major order. Parameters are stored as f64, which round-trips both
//! f32 and f64 models losslessly.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::RowMatrix;
use crate::models::{HelpModel, MlpModel, NgmModel, PlanetoidModel};
use crate::nn::{DenseBlock, OutputActivation};
use crate::scalar::Real;

pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum CheckpointError {
    #[error("unsupported checkpoint version {0}")]
    Version(u32),
    #[error("checkpoint holds a {actual} model, expected {expected}")]
    KindMismatch { expected: String, actual: String },
    #[error("malformed checkpoint: {0}")]
    Malformed(String),
    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BlockData {
    pub name: String,
    pub input_dim: usize,
    pub layer_dims: Vec<usize>,
    pub hidden_activation: String,
    pub output_activation: String,
    /// Row-major `(fan_in x fan_out)` weights per layer.
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Checkpoint {
    pub format_version: u32,
    pub model_kind: String,
    pub blocks: Vec<BlockData>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub context_rows: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub regularized_layer: Option<usize>,
}

fn block_data<T: Real>(name: &str, block: &DenseBlock<T>) -> BlockData {
    let weights = (0..block.layer_count())
        .map(|l| block.layer_weights(l).iter().map(|w| w.as_f64()).collect())
        .collect();
    let biases = (0..block.layer_count())
        .map(|l| block.layer_biases(l).iter().map(|b| b.as_f64()).collect())
        .collect();
    BlockData {
        name: name.to_string(),
        input_dim: block.input_dim(),
        layer_dims: block.layer_dims().to_vec(),
        hidden_activation: "relu".to_string(),
        output_activation: block.output_activation().name().to_string(),
        weights,
        biases,
    }
}

fn restore_block<T: Real>(data: &BlockData) -> Result<DenseBlock<T>, CheckpointError> {
    let activation = OutputActivation::from_name(&data.output_activation).ok_or_else(|| {
        CheckpointError::Malformed(format!("unknown activation {}", data.output_activation))
    })?;
    if data.hidden_activation != "relu" {
        return Err(CheckpointError::Malformed(format!(
            "unknown hidden activation {}",
            data.hidden_activation
        )));
    }
    let mut block = DenseBlock::zeros(data.input_dim, &data.layer_dims, activation)
        .map_err(|e| CheckpointError::Malformed(e.to_string()))?;
    if data.weights.len() != data.layer_dims.len() || data.biases.len() != data.layer_dims.len() {
        return Err(CheckpointError::Malformed("layer count mismatch".into()));
    }
    for l in 0..data.layer_dims.len() {
        let w = block.layer_weights_mut(l);
        if w.len() != data.weights[l].len() {
            return Err(CheckpointError::Malformed(format!("weight shape mismatch at layer {l}")));
        }
        for (slot, &v) in w.iter_mut().zip(&data.weights[l]) {
            *slot = T::from_f64(v);
        }
        let b = block.layer_biases_mut(l);
        if b.len() != data.biases[l].len() {
            return Err(CheckpointError::Malformed(format!("bias shape mismatch at layer {l}")));
        }
        for (slot, &v) in b.iter_mut().zip(&data.biases[l]) {
            *slot = T::from_f64(v);
        }
    }
    Ok(block)
}

impl Checkpoint {
    pub fn from_help<T: Real>(model: &HelpModel<T>) -> Self {
        Self {
            format_version: CHECKPOINT_VERSION,
            model_kind: "help".into(),
            blocks: vec![
                block_data("h_d", &model.h_d),
                block_data("h_u", &model.h_u),
                block_data("f", &model.f),
                block_data("g", &model.g),
            ],
            context_rows: None,
            regularized_layer: None,
        }
    }

    pub fn from_mlp<T: Real>(model: &MlpModel<T>) -> Self {
        Self {
            format_version: CHECKPOINT_VERSION,
            model_kind: "mlp".into(),
            blocks: vec![block_data("trunk", &model.trunk), block_data("head", &model.head)],
            context_rows: None,
            regularized_layer: None,
        }
    }

    pub fn from_planetoid<T: Real>(model: &PlanetoidModel<T>) -> Self {
        let rows = (0..model.context.rows())
            .map(|r| model.context.row(r).iter().map(|v| v.as_f64()).collect())
            .collect();
        Self {
            format_version: CHECKPOINT_VERSION,
            model_kind: "planetoid".into(),
            blocks: vec![block_data("trunk", &model.trunk), block_data("head", &model.head)],
            context_rows: Some(rows),
            regularized_layer: None,
        }
    }

    pub fn from_ngm<T: Real>(model: &NgmModel<T>) -> Self {
        Self {
            format_version: CHECKPOINT_VERSION,
            model_kind: "ngm".into(),
            blocks: vec![block_data("trunk", &model.trunk), block_data("head", &model.head)],
            context_rows: None,
            regularized_layer: Some(model.regularized_layer),
        }
    }

    fn check(&self, expected: &str) -> Result<(), CheckpointError> {
        if self.format_version != CHECKPOINT_VERSION {
            return Err(CheckpointError::Version(self.format_version));
        }
        if self.model_kind != expected {
            return Err(CheckpointError::KindMismatch {
                expected: expected.into(),
                actual: self.model_kind.clone(),
            });
        }
        Ok(())
    }

    fn named_block<T: Real>(&self, name: &str) -> Result<DenseBlock<T>, CheckpointError> {
        let data = self
            .blocks
            .iter()
            .find(|b| b.name == name)
            .ok_or_else(|| CheckpointError::Malformed(format!("missing block {name}")))?;
        restore_block(data)
    }

    pub fn to_help<T: Real>(&self) -> Result<HelpModel<T>, CheckpointError> {
        self.check("help")?;
        Ok(HelpModel {
            h_d: self.named_block("h_d")?,
            h_u: self.named_block("h_u")?,
            f: self.named_block("f")?,
            g: self.named_block("g")?,
        })
    }

    pub fn to_mlp<T: Real>(&self) -> Result<MlpModel<T>, CheckpointError> {
        self.check("mlp")?;
        Ok(MlpModel { trunk: self.named_block("trunk")?, head: self.named_block("head")? })
    }

    pub fn to_planetoid<T: Real>(&self) -> Result<PlanetoidModel<T>, CheckpointError> {
        self.check("planetoid")?;
        let rows = self
            .context_rows
            .as_ref()
            .ok_or_else(|| CheckpointError::Malformed("missing context rows".into()))?;
        let converted: Vec<Vec<T>> =
            rows.iter().map(|r| r.iter().map(|&v| T::from_f64(v)).collect()).collect();
        Ok(PlanetoidModel {
            trunk: self.named_block("trunk")?,
            head: self.named_block("head")?,
            context: RowMatrix::from_rows(&converted),
        })
    }

    pub fn to_ngm<T: Real>(&self) -> Result<NgmModel<T>, CheckpointError> {
        self.check("ngm")?;
        Ok(NgmModel {
            trunk: self.named_block("trunk")?,
            head: self.named_block("head")?,
            regularized_layer: self
                .regularized_layer
                .ok_or_else(|| CheckpointError::Malformed("missing regularized layer".into()))?,
        })
    }

    pub fn to_json(&self) -> Result<String, CheckpointError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(json: &str) -> Result<Self, CheckpointError> {
        Ok(serde_json::from_str(json)?)
    }
}
