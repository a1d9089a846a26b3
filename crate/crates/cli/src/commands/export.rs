//! `export-embeddings`: run one tower of a HELP checkpoint over a feature
//! table and write the embeddings as CSV.

use std::path::Path;

use help_core::checkpoint::Checkpoint;
use help_core::matrix::RowMatrix;
use help_core::models::Side;

use crate::commands::require_dir;
use crate::error::CliError;
use crate::files;

pub fn run(
    checkpoint_path: &Path,
    features_path: &Path,
    side: Side,
    out: &Path,
) -> Result<(), CliError> {
    require_dir(out)?;
    let ckpt = Checkpoint::from_json(&files::read_to_string(checkpoint_path)?)?;
    let model = ckpt.to_help::<f64>()?; // embeddings are a HELP-only product
    let table = files::read_feature_csv(features_path)?;

    let mut rows = Vec::with_capacity(table.ids.len());
    for r in 0..table.rows.rows() {
        rows.push(model.embed(table.rows.row(r), side)?);
    }
    let embeddings = RowMatrix::from_rows(&rows);
    files::write_file(
        &out.join("embeddings.csv"),
        &files::format_feature_csv("e", table.ids.ids(), &embeddings),
    )
}
