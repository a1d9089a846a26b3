//! Flat `key = value` configuration files. Lines starting with `#` and blank
//! lines are ignored. Every key has a documented default, so an empty (or
//! absent) config runs end-to-end; unknown keys are rejected to catch typos.

use std::collections::BTreeMap;
use std::path::Path;

use help_core::losses::{LossKind, LossSpec};
use help_core::models::{ModelDims, NgmDistance};
use help_core::synthdata::SynthConfig;
use help_core::TrainSchedule64;

use crate::error::CliError;

/// Every key any command understands.
pub const KNOWN_KEYS: &[&str] = &[
    // generation
    "n_users",
    "n_domains",
    "n_labeled",
    "domain_feature_dim",
    "user_feature_dim",
    "class_prevalence",
    "latent_dim",
    "feature_noise_sd",
    "edge_rate",
    "affinity_sharpness",
    "seed",
    "heldout",
    // model selection and shapes
    "model",
    "tower_dims",
    "head_dims",
    // optimizer schedule
    "epochs",
    "initial_lr",
    "decay_ratio",
    "decay_every",
    "weight_decay",
    "repetitions",
    "batch_size",
    // unsupervised loss
    "unsupervised_loss",
    "margin",
    "lambda",
    "smooth_l1_discontinuous",
    "dichotomize_threshold",
    "positives_per_epoch",
    "negative_ratio",
    // planetoid
    "walk_length",
    "window",
    "label_context_prob",
    "context_samples_per_epoch",
    "negate_context_term",
    // ngm
    "ngm_distance",
    "ngm_lambda",
    "ngm_edges_per_step",
    "regularized_layer",
    // label propagation
    "lp_max_iterations",
    "lp_tolerance",
];

#[derive(Clone, Debug, Default)]
pub struct Config {
    values: BTreeMap<String, String>,
}

impl Config {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::io(path, "cannot read config", e))?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn parse(text: &str, origin: &str) -> Result<Self, CliError> {
        let mut values = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                CliError::validation(format!(
                    "{origin}:{}: expected `key = value`, got `{line}`",
                    lineno + 1
                ))
            })?;
            let key = key.trim().to_string();
            if !KNOWN_KEYS.contains(&key.as_str()) {
                return Err(CliError::validation(format!(
                    "{origin}:{}: unknown config key `{key}`",
                    lineno + 1
                )));
            }
            values.insert(key, value.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn override_seed(&mut self, seed: u64) {
        self.values.insert("seed".into(), seed.to_string());
    }

    pub fn entries(&self) -> &BTreeMap<String, String> {
        &self.values
    }

    fn get<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T, CliError> {
        match self.values.get(key) {
            None => Ok(default),
            Some(raw) => raw.parse().map_err(|_| {
                CliError::validation(format!("config key `{key}` has invalid value `{raw}`"))
            }),
        }
    }

    fn get_bool(&self, key: &str, default: bool) -> Result<bool, CliError> {
        match self.values.get(key).map(String::as_str) {
            None => Ok(default),
            Some("true") | Some("1") => Ok(true),
            Some("false") | Some("0") => Ok(false),
            Some(raw) => {
                Err(CliError::validation(format!("config key `{key}` must be a bool, got `{raw}`")))
            }
        }
    }

    fn get_dims(&self, key: &str, default: &[usize]) -> Result<Vec<usize>, CliError> {
        match self.values.get(key) {
            None => Ok(default.to_vec()),
            Some(raw) => raw
                .split(',')
                .map(|part| part.trim().parse::<usize>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| {
                    CliError::validation(format!(
                        "config key `{key}` must be comma-separated sizes, got `{raw}`"
                    ))
                }),
        }
    }

    pub fn seed(&self) -> Result<u64, CliError> {
        self.get("seed", SynthConfig::default().seed)
    }

    pub fn synth_config(&self) -> Result<SynthConfig, CliError> {
        let d = SynthConfig::default();
        let cfg = SynthConfig {
            n_users: self.get("n_users", d.n_users)?,
            n_domains: self.get("n_domains", d.n_domains)?,
            n_labeled: self.get("n_labeled", d.n_labeled)?,
            domain_feature_dim: self.get("domain_feature_dim", d.domain_feature_dim)?,
            user_feature_dim: self.get("user_feature_dim", d.user_feature_dim)?,
            class_prevalence: self.get("class_prevalence", d.class_prevalence)?,
            latent_dim: self.get("latent_dim", d.latent_dim)?,
            feature_noise_sd: self.get("feature_noise_sd", d.feature_noise_sd)?,
            edge_rate: self.get("edge_rate", d.edge_rate)?,
            affinity_sharpness: self.get("affinity_sharpness", d.affinity_sharpness)?,
            seed: self.seed()?,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn emit_heldout(&self) -> Result<bool, CliError> {
        self.get_bool("heldout", false)
    }

    pub fn model_kind(&self) -> Result<String, CliError> {
        let kind: String = self.get("model", "help".to_string())?;
        match kind.as_str() {
            "help" | "mlp" | "planetoid" | "ngm" | "lp" => Ok(kind),
            other => Err(CliError::validation(format!(
                "config key `model` must be one of help|mlp|planetoid|ngm|lp, got `{other}`"
            ))),
        }
    }

    pub fn schedule(&self) -> Result<TrainSchedule64, CliError> {
        let d = TrainSchedule64::default();
        let sched = TrainSchedule64 {
            initial_lr: self.get("initial_lr", d.initial_lr)?,
            decay_ratio: self.get("decay_ratio", d.decay_ratio)?,
            decay_every: self.get("decay_every", d.decay_every)?,
            weight_decay: self.get("weight_decay", d.weight_decay)?,
            epochs: self.get("epochs", d.epochs)?,
            repetitions: self.get("repetitions", d.repetitions)?,
            batch_size: self.get("batch_size", d.batch_size)?,
        };
        sched.validate().map_err(|e| CliError::validation(e.to_string()))?;
        Ok(sched)
    }

    pub fn loss_spec(&self) -> Result<LossSpec<f64>, CliError> {
        let d = LossSpec::<f64>::default();
        let name: String = self.get("unsupervised_loss", d.kind.name().to_string())?;
        let kind = LossKind::from_name(&name).ok_or_else(|| {
            CliError::validation(format!("unknown unsupervised_loss `{name}` (expected one of {})",
                LossKind::ALL.map(|k| k.name()).join("|")))
        })?;
        let spec = LossSpec {
            kind,
            margin: self.get("margin", d.margin)?,
            lambda: self.get("lambda", d.lambda)?,
            smooth_l1_discontinuous: self
                .get_bool("smooth_l1_discontinuous", d.smooth_l1_discontinuous)?,
        };
        spec.validate().map_err(|e| CliError::validation(e.to_string()))?;
        Ok(spec)
    }

    pub fn model_dims(&self, domain_dim: usize, user_dim: usize) -> Result<ModelDims, CliError> {
        let d = ModelDims::default();
        let dims = ModelDims {
            domain_dim,
            user_dim,
            tower_dims: self.get_dims("tower_dims", &d.tower_dims)?,
            head_dims: self.get_dims("head_dims", &d.head_dims)?,
        };
        dims.validate()?;
        Ok(dims)
    }

    pub fn help_config(&self, dims: ModelDims) -> Result<help_core::HelpConfig64, CliError> {
        let d = help_core::HelpConfig64::default();
        Ok(help_core::HelpConfig64 {
            dims,
            loss: self.loss_spec()?,
            dichotomize_threshold: self.get("dichotomize_threshold", d.dichotomize_threshold)?,
            positives_per_epoch: self.get("positives_per_epoch", d.positives_per_epoch)?,
            negative_ratio: self.get("negative_ratio", d.negative_ratio)?,
        })
    }

    pub fn planetoid_hyper(&self) -> Result<help_core::models::PlanetoidHyper<f64>, CliError> {
        let d = help_core::models::PlanetoidHyper::<f64>::default();
        Ok(help_core::models::PlanetoidHyper {
            lambda: self.get("lambda", d.lambda)?,
            walk_length: self.get("walk_length", d.walk_length)?,
            window: self.get("window", d.window)?,
            label_context_prob: self.get("label_context_prob", d.label_context_prob)?,
            context_samples_per_epoch: self
                .get("context_samples_per_epoch", d.context_samples_per_epoch)?,
            negate_context_term: self.get_bool("negate_context_term", d.negate_context_term)?,
        })
    }

    pub fn ngm_hyper(&self) -> Result<help_core::models::NgmHyper<f64>, CliError> {
        let d = help_core::models::NgmHyper::<f64>::default();
        let name: String = self.get("ngm_distance", d.distance.name().to_string())?;
        let distance = NgmDistance::from_name(&name).ok_or_else(|| {
            CliError::validation(format!("ngm_distance must be l1 or l2, got `{name}`"))
        })?;
        let lambda: f64 = self.get("ngm_lambda", d.lambdas[0])?;
        let regularized_layer: i64 = self.get("regularized_layer", -1)?;
        Ok(help_core::models::NgmHyper {
            lambdas: [lambda; 3],
            distance,
            edges_per_class_per_step: self.get("ngm_edges_per_step", d.edges_per_class_per_step)?,
            regularized_layer: if regularized_layer < 0 {
                None
            } else {
                Some(regularized_layer as usize)
            },
        })
    }

    pub fn lp_config(&self) -> Result<help_core::models::LabelPropConfig<f64>, CliError> {
        let d = help_core::models::LabelPropConfig::<f64>::default();
        Ok(help_core::models::LabelPropConfig {
            max_iterations: self.get("lp_max_iterations", d.max_iterations)?,
            tolerance: self.get("lp_tolerance", d.tolerance)?,
        })
    }
}
