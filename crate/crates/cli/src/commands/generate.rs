//! `generate`: write a synthetic dataset to disk — edge list, feature CSVs,
//! labels TSV, and a manifest echoing the resolved config. With
//! `heldout = true` the evaluation-window files are emitted as well.

use std::path::Path;

use serde_json::json;

use help_core::synthdata;

use crate::commands::{require_dir, unix_time};
use crate::config::Config;
use crate::error::CliError;
use crate::files;

pub fn run(config: &Config, out: &Path) -> Result<(), CliError> {
    require_dir(out)?;
    let synth = config.synth_config()?;
    let bundle = synthdata::generate_bundle::<f64>(&synth)?;

    let user_ids: Vec<String> = (0..synth.n_users).map(|i| format!("u{i}")).collect();
    let domain_ids: Vec<String> = (0..synth.n_domains).map(|i| format!("d{i}")).collect();

    let mut files_written = vec![
        "edges.tsv".to_string(),
        "domain_features.csv".to_string(),
        "user_features.csv".to_string(),
        "labels.tsv".to_string(),
    ];

    files::write_file(
        &out.join("edges.tsv"),
        &files::format_edge_list(&bundle.graph, |u| user_ids[u].clone(), |d| domain_ids[d].clone()),
    )?;
    files::write_file(
        &out.join("domain_features.csv"),
        &files::format_feature_csv("f", &domain_ids, &bundle.dataset.domain_features),
    )?;
    files::write_file(
        &out.join("user_features.csv"),
        &files::format_feature_csv("f", &user_ids, &bundle.dataset.user_features),
    )?;

    let mut labels = Vec::new();
    for (d, label) in bundle.dataset.labels.iter().enumerate() {
        if let Some(y) = label {
            let split = if bundle.dataset.train_mask[d] { "train" } else { "test" };
            labels.push((domain_ids[d].clone(), *y, split));
        }
    }
    files::write_file(&out.join("labels.tsv"), &files::format_labels_tsv(&labels))?;

    if config.emit_heldout()? {
        let window = synthdata::heldout_graph::<f64>(&synth, 1)?;
        files::write_file(
            &out.join("heldout_edges.tsv"),
            &files::format_edge_list(&window, |u| user_ids[u].clone(), |d| domain_ids[d].clone()),
        )?;
        let window_labels: Vec<(String, bool)> = bundle
            .domain_classes
            .iter()
            .enumerate()
            .map(|(d, &y)| (domain_ids[d].clone(), y))
            .collect();
        files::write_file(
            &out.join("heldout_labels.tsv"),
            &files::format_binary_labels_tsv(&window_labels),
        )?;
        files_written.push("heldout_edges.tsv".to_string());
        files_written.push("heldout_labels.tsv".to_string());
    }

    let manifest = json!({
        "command": "generate",
        "format_version": 1,
        "created_unix": unix_time(),
        "seed": synth.seed,
        "config": {
            "n_users": synth.n_users,
            "n_domains": synth.n_domains,
            "n_labeled": synth.n_labeled,
            "domain_feature_dim": synth.domain_feature_dim,
            "user_feature_dim": synth.user_feature_dim,
            "class_prevalence": synth.class_prevalence,
            "latent_dim": synth.latent_dim,
            "feature_noise_sd": synth.feature_noise_sd,
            "edge_rate": synth.edge_rate,
            "affinity_sharpness": synth.affinity_sharpness,
            "heldout": config.emit_heldout()?,
        },
        "files": files_written,
        "edges": bundle.graph.edge_count(),
    });
    files::write_file(
        &out.join("manifest.json"),
        &format!("{}\n", serde_json::to_string_pretty(&manifest).expect("manifest json")),
    )?;
    Ok(())
}
