//! `separation-study`: derive vulnerable-user labels from a held-out
//! interaction window, balance the classes, project the user vectors to 2-D,
//! and report the separation score. The vector CSV can hold HELP embeddings
//! or raw features; both run through the same pipeline.

use std::fmt::Write as _;
use std::path::Path;

use serde_json::json;

use help_core::matrix::RowMatrix;
use help_core::pca::pca_project;
use help_core::study::{derive_vulnerable_users, downsample_negatives, separation_score};
use help_core::BipartiteGraph64;

use crate::commands::require_dir;
use crate::error::CliError;
use crate::files;

pub fn run(
    embeddings_path: &Path,
    heldout_edges_path: &Path,
    heldout_labels_path: &Path,
    activity_threshold: f64,
    seed: u64,
    out: &Path,
) -> Result<(), CliError> {
    require_dir(out)?;
    let table = files::read_feature_csv(embeddings_path)?;
    let edge_data = files::read_edge_list(heldout_edges_path)?;
    let domain_labels = files::read_binary_labels_tsv(heldout_labels_path)?;

    // Rebuild the window over the embedded-user universe.
    let mut positive_domains = vec![false; edge_data.domains.len()];
    let mut covered = vec![false; edge_data.domains.len()];
    for (id, label) in &domain_labels {
        if let Some(d) = edge_data.domains.get(id) {
            positive_domains[d] = *label;
            covered[d] = true;
        }
    }
    if let Some(missing) = covered.iter().position(|&c| !c) {
        return Err(CliError::validation(format!(
            "held-out labels do not cover domain `{}`",
            edge_data.domains.id(missing)
        )));
    }
    let mut edges = Vec::with_capacity(edge_data.edges.len());
    for &(u, d, w) in &edge_data.edges {
        let user = table.ids.get(edge_data.users.id(u)).ok_or_else(|| {
            CliError::validation(format!(
                "held-out window references user `{}` absent from the vector CSV",
                edge_data.users.id(u)
            ))
        })?;
        edges.push((user, d, w));
    }
    let window = BipartiteGraph64::new(table.ids.len(), edge_data.domains.len(), edges)?;

    let user_labels = derive_vulnerable_users(&window, &positive_domains, activity_threshold);
    let positives = user_labels.iter().filter(|&&l| l == Some(true)).count();
    if positives == 0 {
        return Err(CliError::validation(
            "no vulnerable users in the held-out window (zero positives)",
        ));
    }

    let mut labels_tsv = String::new();
    for (u, label) in user_labels.iter().enumerate() {
        if let Some(y) = label {
            writeln!(labels_tsv, "{}\t{}", table.ids.id(u), u8::from(*y)).unwrap();
        }
    }
    files::write_file(&out.join("user_labels.tsv"), &labels_tsv)?;

    let selected = downsample_negatives(&user_labels, seed);
    let rows: Vec<Vec<f64>> = selected.iter().map(|&u| table.rows.row(u).to_vec()).collect();
    let labels: Vec<bool> = selected.iter().map(|&u| user_labels[u] == Some(true)).collect();
    let projection = pca_project(&RowMatrix::from_rows(&rows), 2)?;
    let score = separation_score(&projection.coords, &labels)?;

    let mut coords_csv = String::from("id,x,y,label\n");
    for (row, (&u, &label)) in selected.iter().zip(&labels).enumerate() {
        writeln!(
            coords_csv,
            "{},{},{},{}",
            table.ids.id(u),
            projection.coords.row(row)[0],
            projection.coords.row(row)[1],
            u8::from(label)
        )
        .unwrap();
    }
    files::write_file(&out.join("coords.csv"), &coords_csv)?;

    let summary = json!({
        "separation_score": score,
        "positives": positives,
        "negatives": labels.iter().filter(|&&l| !l).count(),
        "activity_threshold": activity_threshold,
        "seed": seed,
    });
    files::write_file(
        &out.join("separation.json"),
        &format!("{}\n", serde_json::to_string_pretty(&summary).expect("summary json")),
    )
}
