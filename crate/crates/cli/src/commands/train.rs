//! `train`: run independent training repetitions (seeds base+i, fanned out
//! across threads), evaluate each on the held-out test split, and write the
//! aggregated report, the per-epoch training log, and the checkpoint of the
//! best repetition by AUPRC.

use std::fmt::Write as _;
use std::path::Path;

use help_core::checkpoint::Checkpoint;
use help_core::matrix::RowMatrix;
use help_core::metrics::{self, RunMetrics};
use help_core::models::{
    help_train, label_propagation, mlp_train, ngm_train, planetoid_train, TrainInputs,
};
use help_core::BipartiteGraph64;

use crate::commands::require_dir;
use crate::config::Config;
use crate::error::CliError;
use crate::files::{self, IdMap};

/// Dataset as loaded from a `generate` output directory.
pub struct LoadedData {
    pub graph: BipartiteGraph64,
    pub domain_features: RowMatrix<f64>,
    pub user_features: RowMatrix<f64>,
    pub domain_ids: IdMap,
    pub user_ids: IdMap,
    pub train: Vec<(usize, bool)>,
    pub test: Vec<(usize, bool)>,
}

pub fn load_data(dir: &Path) -> Result<LoadedData, CliError> {
    let domain_table = files::read_feature_csv(&dir.join("domain_features.csv"))?;
    let user_table = files::read_feature_csv(&dir.join("user_features.csv"))?;

    let edge_data = files::read_edge_list(&dir.join("edges.tsv"))?;
    let mut edges = Vec::with_capacity(edge_data.edges.len());
    for &(u, d, w) in &edge_data.edges {
        let user = user_table.ids.get(edge_data.users.id(u)).ok_or_else(|| {
            CliError::validation(format!(
                "edge list references user `{}` absent from user_features.csv",
                edge_data.users.id(u)
            ))
        })?;
        let domain = domain_table.ids.get(edge_data.domains.id(d)).ok_or_else(|| {
            CliError::validation(format!(
                "edge list references domain `{}` absent from domain_features.csv",
                edge_data.domains.id(d)
            ))
        })?;
        edges.push((user, domain, w));
    }
    let graph = BipartiteGraph64::new(user_table.ids.len(), domain_table.ids.len(), edges)?;

    let mut train = Vec::new();
    let mut test = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for entry in files::read_labels_tsv(&dir.join("labels.tsv"))? {
        let domain = domain_table.ids.get(&entry.id).ok_or_else(|| {
            CliError::validation(format!(
                "labels reference domain `{}` absent from domain_features.csv",
                entry.id
            ))
        })?;
        if !seen.insert(domain) {
            return Err(CliError::validation(format!(
                "domain `{}` is labeled more than once",
                entry.id
            )));
        }
        if entry.split == "train" {
            train.push((domain, entry.label));
        } else {
            test.push((domain, entry.label));
        }
    }
    if train.is_empty() || test.is_empty() {
        return Err(CliError::validation("labels.tsv must contain both train and test rows"));
    }

    Ok(LoadedData {
        graph,
        domain_features: domain_table.rows,
        user_features: user_table.rows,
        domain_ids: domain_table.ids,
        user_ids: user_table.ids,
        train,
        test,
    })
}

struct RepOutcome {
    metrics: RunMetrics,
    log: Vec<f64>,
    checkpoint: Option<Checkpoint>,
}

fn evaluate_scores(scores: &[f64], labels: &[bool]) -> Result<RunMetrics, CliError> {
    Ok(RunMetrics {
        auroc: metrics::auroc(scores, labels)?,
        auprc: metrics::auprc(scores, labels)?,
    })
}

pub fn run(config: &Config, data_dir: &Path, out: &Path) -> Result<(), CliError> {
    require_dir(out)?;
    let data = load_data(data_dir)?;
    let kind = config.model_kind()?;
    let sched = config.schedule()?;
    let base_seed = config.seed()?;

    let inputs = TrainInputs {
        domain_features: &data.domain_features,
        user_features: &data.user_features,
        labeled: &data.train,
    };
    // Fail on inconsistent data before any training compute.
    inputs.validate(Some(data.graph.user_count()), Some(data.graph.domain_count()))?;

    let test_labels: Vec<bool> = data.test.iter().map(|&(_, y)| y).collect();
    let prevalence = test_labels.iter().filter(|&&y| y).count() as f64 / test_labels.len() as f64;

    let outcomes: Vec<RepOutcome> = if kind == "lp" {
        // Label propagation has no parameters and no seeds: one run.
        let dg = data.graph.compress_to_domain_graph();
        let mut labels = vec![None; data.graph.domain_count()];
        for &(d, y) in &data.train {
            labels[d] = Some(y);
        }
        let result = label_propagation(&dg, &labels, &config.lp_config()?)?;
        let scores: Vec<f64> = data.test.iter().map(|&(d, _)| result.scores[d]).collect();
        vec![RepOutcome {
            metrics: evaluate_scores(&scores, &test_labels)?,
            log: Vec::new(),
            checkpoint: None,
        }]
    } else {
        let dims = config.model_dims(data.domain_features.cols(), data.user_features.cols())?;
        let help_cfg = config.help_config(dims.clone())?;
        let planetoid_hyper = config.planetoid_hyper()?;
        let ngm_hyper = config.ngm_hyper()?;
        let dg = (kind == "planetoid" || kind == "ngm")
            .then(|| data.graph.compress_to_domain_graph());

        let run_rep = |seed: u64| -> Result<RepOutcome, CliError> {
            let (predict, log, checkpoint): (Box<dyn Fn(&[f64]) -> Result<f64, _>>, _, _) =
                match kind.as_str() {
                    "help" => {
                        let (model, log) =
                            help_train(&inputs, &data.graph, &help_cfg, &sched, seed)?;
                        let ckpt = Checkpoint::from_help(&model);
                        (Box::new(move |x: &[f64]| model.predict(x)), log, ckpt)
                    }
                    "mlp" => {
                        let (model, log) = mlp_train(&inputs, &dims, &sched, seed)?;
                        let ckpt = Checkpoint::from_mlp(&model);
                        (Box::new(move |x: &[f64]| model.predict(x)), log, ckpt)
                    }
                    "planetoid" => {
                        let (model, log) = planetoid_train(
                            &inputs,
                            dg.as_ref().expect("domain graph"),
                            &dims,
                            &planetoid_hyper,
                            &sched,
                            seed,
                        )?;
                        let ckpt = Checkpoint::from_planetoid(&model);
                        (Box::new(move |x: &[f64]| model.predict(x)), log, ckpt)
                    }
                    "ngm" => {
                        let (model, log) = ngm_train(
                            &inputs,
                            dg.as_ref().expect("domain graph"),
                            &dims,
                            &ngm_hyper,
                            &sched,
                            seed,
                        )?;
                        let ckpt = Checkpoint::from_ngm(&model);
                        (Box::new(move |x: &[f64]| model.predict(x)), log, ckpt)
                    }
                    other => return Err(CliError::validation(format!("unknown model `{other}`"))),
                };
            let scores = data
                .test
                .iter()
                .map(|&(d, _)| predict(data.domain_features.row(d)))
                .collect::<Result<Vec<f64>, _>>()?;
            Ok(RepOutcome {
                metrics: evaluate_scores(&scores, &test_labels)?,
                log,
                checkpoint: Some(checkpoint),
            })
        };

        let mut slots: Vec<Option<Result<RepOutcome, CliError>>> = Vec::new();
        slots.resize_with(sched.repetitions, || None);
        std::thread::scope(|scope| {
            for (rep, slot) in slots.iter_mut().enumerate() {
                let run_rep = &run_rep;
                scope.spawn(move || {
                    *slot = Some(run_rep(base_seed + rep as u64));
                });
            }
        });
        slots
            .into_iter()
            .map(|s| s.expect("worker completed"))
            .collect::<Result<Vec<_>, _>>()?
    };

    write_outputs(out, &kind, &outcomes, prevalence)
}

fn write_outputs(
    out: &Path,
    kind: &str,
    outcomes: &[RepOutcome],
    prevalence: f64,
) -> Result<(), CliError> {
    let per_run: Vec<RunMetrics> = outcomes.iter().map(|o| o.metrics).collect();
    let report = metrics::aggregate(&per_run, prevalence)?;
    files::write_file(
        &out.join("report.json"),
        &format!("{}\n", serde_json::to_string_pretty(&report).expect("report json")),
    )?;

    let mut log_csv = String::from("rep,epoch,loss\n");
    for (rep, outcome) in outcomes.iter().enumerate() {
        for (epoch, loss) in outcome.log.iter().enumerate() {
            writeln!(log_csv, "{rep},{epoch},{loss}").unwrap();
        }
    }
    files::write_file(&out.join("training_log.csv"), &log_csv)?;

    if kind != "lp" {
        let best = outcomes
            .iter()
            .rev() // ties go to the lowest repetition index
            .enumerate()
            .max_by(|(_, a), (_, b)| a.metrics.auprc.partial_cmp(&b.metrics.auprc).unwrap())
            .and_then(|(_, o)| o.checkpoint.as_ref())
            .ok_or_else(|| CliError::validation("no checkpoint produced"))?;
        files::write_file(&out.join("checkpoint.json"), &format!("{}\n", best.to_json()?))?;
    }
    Ok(())
}
