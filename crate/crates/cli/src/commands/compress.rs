//! `compress`: project a user-domain edge list onto the weighted
//! domain-domain graph, emitting the ID-to-index maps alongside.

use std::fmt::Write as _;
use std::path::Path;

use help_core::BipartiteGraph64;

use crate::commands::require_dir;
use crate::error::CliError;
use crate::files;

pub fn run(input: &Path, out: &Path) -> Result<(), CliError> {
    require_dir(out)?;
    let edge_data = files::read_edge_list(input)?;
    let graph =
        BipartiteGraph64::new(edge_data.users.len(), edge_data.domains.len(), edge_data.edges)?;
    let dg = graph.compress_to_domain_graph();

    let mut tsv = String::new();
    for &(i, j, w) in dg.edges() {
        writeln!(tsv, "{}\t{}\t{}", edge_data.domains.id(i), edge_data.domains.id(j), w).unwrap();
    }
    files::write_file(&out.join("domain_graph.tsv"), &tsv)?;
    files::write_file(&out.join("domain_ids.tsv"), &files::format_id_map(&edge_data.domains))?;
    files::write_file(&out.join("user_ids.tsv"), &files::format_id_map(&edge_data.users))?;
    Ok(())
}
