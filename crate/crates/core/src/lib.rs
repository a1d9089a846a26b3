//! Inductive graph-regularized semi-supervised learning on bipartite
//! user-domain interaction graphs.
//!
//! The centerpiece is HELP (Heterogeneous Embedding Label Propagation): two
//! feature towers embed domains and users, a label head classifies domains
//! from the domain embedding alone, and a similarity head scores user-domain
//! pairs; supervised and graph-regularization losses are minimized jointly.
//! Because prediction reads only domain features, the model is inductive —
//! domains never seen in the training graph score without retraining.
//!
//! Alongside the model: the benchmark baselines (MLP, Planetoid-I, neural
//! graph machine, label propagation), eight unsupervised loss variants,
//! AUROC/AUPRC metrics, a synthetic data generator with planted structure,
//! and PCA utilities for embedding studies.
//!
//! All numeric code is generic over the [`scalar::Real`] scalar (`f32` or
//! `f64`); the `*64` aliases below cover the common case.

pub mod checkpoint;
pub mod graph;
pub mod losses;
pub mod matrix;
pub mod metrics;
pub mod models;
pub mod nn;
pub mod pca;
pub mod rng;
pub mod scalar;
pub mod study;
pub mod synthdata;

pub use scalar::Real;

/// `f64` instantiations of the core types.
pub type BipartiteGraph64 = graph::BipartiteGraph<f64>;
pub type DomainGraph64 = graph::DomainGraph<f64>;
pub type DenseBlock64 = nn::DenseBlock<f64>;
pub type TrainSchedule64 = nn::TrainSchedule<f64>;
pub type LossSpec64 = losses::LossSpec<f64>;
pub type HelpModel64 = models::HelpModel<f64>;
pub type HelpConfig64 = models::HelpConfig<f64>;
pub type MlpModel64 = models::MlpModel<f64>;
pub type PlanetoidModel64 = models::PlanetoidModel<f64>;
pub type NgmModel64 = models::NgmModel<f64>;
pub type LabeledDataset64 = synthdata::LabeledDataset<f64>;
pub type RowMatrix64 = matrix::RowMatrix<f64>;
