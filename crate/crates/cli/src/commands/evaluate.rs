//! `evaluate`: score a saved checkpoint on the test split of a dataset and
//! write a single-run report.

use std::path::Path;

use help_core::checkpoint::Checkpoint;
use help_core::metrics::{self, RunMetrics};

use crate::commands::require_dir;
use crate::commands::train::load_data;
use crate::error::CliError;
use crate::files;

pub fn run(data_dir: &Path, checkpoint_path: &Path, out: &Path) -> Result<(), CliError> {
    require_dir(out)?;
    let data = load_data(data_dir)?;
    let ckpt = Checkpoint::from_json(&files::read_to_string(checkpoint_path)?)?;

    let predict: Box<dyn Fn(&[f64]) -> Result<f64, help_core::models::ModelError>> =
        match ckpt.model_kind.as_str() {
            "help" => {
                let model = ckpt.to_help::<f64>()?;
                Box::new(move |x| model.predict(x))
            }
            "mlp" => {
                let model = ckpt.to_mlp::<f64>()?;
                Box::new(move |x| model.predict(x))
            }
            "planetoid" => {
                let model = ckpt.to_planetoid::<f64>()?;
                Box::new(move |x| model.predict(x))
            }
            "ngm" => {
                let model = ckpt.to_ngm::<f64>()?;
                Box::new(move |x| model.predict(x))
            }
            other => {
                return Err(CliError::validation(format!(
                    "checkpoint holds unsupported model kind `{other}`"
                )))
            }
        };

    let scores = data
        .test
        .iter()
        .map(|&(d, _)| predict(data.domain_features.row(d)))
        .collect::<Result<Vec<f64>, _>>()?;
    let labels: Vec<bool> = data.test.iter().map(|&(_, y)| y).collect();
    let prevalence = labels.iter().filter(|&&y| y).count() as f64 / labels.len() as f64;
    let run = RunMetrics {
        auroc: metrics::auroc(&scores, &labels)?,
        auprc: metrics::auprc(&scores, &labels)?,
    };
    let report = metrics::aggregate(&[run], prevalence)?;
    files::write_file(
        &out.join("eval_report.json"),
        &format!("{}\n", serde_json::to_string_pretty(&report).expect("report json")),
    )
}
