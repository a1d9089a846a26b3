//! On-disk formats: tab-separated edge lists with `#` comments, CSV feature
//! and embedding tables with an `id` header column, and label TSVs. String
//! IDs map to dense indices in insertion order.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use help_core::matrix::RowMatrix;
use help_core::BipartiteGraph64;

use crate::error::CliError;

/// Insertion-ordered string-ID to dense-index mapping.
#[derive(Clone, Debug, Default)]
pub struct IdMap {
    ids: Vec<String>,
    index: HashMap<String, usize>,
}

impl IdMap {
    pub fn intern(&mut self, id: &str) -> usize {
        if let Some(&i) = self.index.get(id) {
            return i;
        }
        let i = self.ids.len();
        self.ids.push(id.to_string());
        self.index.insert(id.to_string(), i);
        i
    }

    pub fn get(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn id(&self, index: usize) -> &str {
        &self.ids[index]
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }
}

pub fn read_to_string(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|e| CliError::io(path, "cannot read file", e))
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    std::fs::write(path, contents).map_err(|e| CliError::io(path, "cannot write file", e))
}

/// Parsed edge list plus the ID maps built in first-appearance order.
#[derive(Debug)]
pub struct EdgeListData {
    pub users: IdMap,
    pub domains: IdMap,
    pub edges: Vec<(usize, usize, f64)>,
}

/// Parse a `user<TAB>domain<TAB>weight` edge list. Duplicate (user, domain)
/// lines and malformed lines are reported with their line number.
pub fn read_edge_list(path: &Path) -> Result<EdgeListData, CliError> {
    let text = read_to_string(path)?;
    parse_edge_list(&text, &path.display().to_string())
}

pub fn parse_edge_list(text: &str, origin: &str) -> Result<EdgeListData, CliError> {
    let mut users = IdMap::default();
    let mut domains = IdMap::default();
    let mut edges = Vec::new();
    let mut seen: HashMap<(usize, usize), usize> = HashMap::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split('\t');
        let (user, domain, weight) = match (parts.next(), parts.next(), parts.next(), parts.next())
        {
            (Some(u), Some(d), Some(w), None) => (u, d, w),
            _ => {
                return Err(CliError::validation(format!(
                    "{origin}:{}: expected `user<TAB>domain<TAB>weight`",
                    lineno + 1
                )))
            }
        };
        let weight: f64 = weight.parse().map_err(|_| {
            CliError::validation(format!("{origin}:{}: invalid weight `{weight}`", lineno + 1))
        })?;
        if !weight.is_finite() || weight < 0.0 {
            return Err(CliError::validation(format!(
                "{origin}:{}: weight must be finite and non-negative",
                lineno + 1
            )));
        }
        let u = users.intern(user);
        let d = domains.intern(domain);
        if let Some(first) = seen.insert((u, d), lineno + 1) {
            return Err(CliError::validation(format!(
                "{origin}:{}: duplicate edge `{user}\t{domain}` (first at line {first})",
                lineno + 1
            )));
        }
        edges.push((u, d, weight));
    }
    Ok(EdgeListData { users, domains, edges })
}

pub fn format_edge_list(
    graph: &BipartiteGraph64,
    user_id: impl Fn(usize) -> String,
    domain_id: impl Fn(usize) -> String,
) -> String {
    let mut out = String::new();
    for &(u, d, w) in graph.edges() {
        writeln!(out, "{}\t{}\t{}", user_id(u), domain_id(d), w).unwrap();
    }
    out
}

/// Two-column `id<TAB>index` mapping file, insertion order.
pub fn format_id_map(map: &IdMap) -> String {
    let mut out = String::new();
    for (i, id) in map.ids().iter().enumerate() {
        writeln!(out, "{id}\t{i}").unwrap();
    }
    out
}

/// CSV with header `id,f0,...,fK`.
pub fn format_feature_csv(prefix: &str, ids: &[String], rows: &RowMatrix<f64>) -> String {
    let mut out = String::from("id");
    for j in 0..rows.cols() {
        write!(out, ",{prefix}{j}").unwrap();
    }
    out.push('\n');
    for (id, row) in ids.iter().zip(rows.iter_rows()) {
        write!(out, "{id}").unwrap();
        for v in row {
            write!(out, ",{v}").unwrap();
        }
        out.push('\n');
    }
    out
}

/// Parsed `id,...` CSV table.
pub struct CsvTable {
    pub ids: IdMap,
    pub rows: RowMatrix<f64>,
}

pub fn read_feature_csv(path: &Path) -> Result<CsvTable, CliError> {
    let text = read_to_string(path)?;
    parse_feature_csv(&text, &path.display().to_string())
}

pub fn parse_feature_csv(text: &str, origin: &str) -> Result<CsvTable, CliError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| CliError::validation(format!("{origin}: empty CSV (missing header)")))?;
    let cols = header.split(',').count();
    if cols < 2 || !header.starts_with("id") {
        return Err(CliError::validation(format!(
            "{origin}: header must be `id,<col0>,...`, got `{header}`"
        )));
    }
    let width = cols - 1;
    let mut ids = IdMap::default();
    let mut data = Vec::new();
    for (lineno, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split(',');
        let id = parts.next().unwrap();
        let before = ids.len();
        let idx = ids.intern(id);
        if idx < before {
            return Err(CliError::validation(format!(
                "{origin}:{}: duplicate id `{id}`",
                lineno + 1
            )));
        }
        let mut count = 0;
        for part in parts {
            let v: f64 = part.parse().map_err(|_| {
                CliError::validation(format!("{origin}:{}: invalid number `{part}`", lineno + 1))
            })?;
            data.push(v);
            count += 1;
        }
        if count != width {
            return Err(CliError::validation(format!(
                "{origin}:{}: expected {width} values, got {count}",
                lineno + 1
            )));
        }
    }
    let rows = ids.len();
    Ok(CsvTable { ids, rows: RowMatrix::from_flat(rows, width, data) })
}

/// `domain_id<TAB>label<TAB>split` with split in {train, test}.
pub fn format_labels_tsv(entries: &[(String, bool, &'static str)]) -> String {
    let mut out = String::new();
    for (id, label, split) in entries {
        writeln!(out, "{id}\t{}\t{split}", u8::from(*label)).unwrap();
    }
    out
}

pub struct LabelEntry {
    pub id: String,
    pub label: bool,
    pub split: String,
}

pub fn read_labels_tsv(path: &Path) -> Result<Vec<LabelEntry>, CliError> {
    let text = read_to_string(path)?;
    let origin = path.display().to_string();
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parts: Vec<&str> = line.split('\t').collect();
        if parts.len() != 3 {
            return Err(CliError::validation(format!(
                "{origin}:{}: expected `domain<TAB>label<TAB>split`",
                lineno + 1
            )));
        }
        let label = match parts[1] {
            "0" => false,
            "1" => true,
            other => {
                return Err(CliError::validation(format!(
                    "{origin}:{}: label must be 0 or 1, got `{other}`",
                    lineno + 1
                )))
            }
        };
        if parts[2] != "train" && parts[2] != "test" {
            return Err(CliError::validation(format!(
                "{origin}:{}: split must be train or test, got `{}`",
                lineno + 1,
                parts[2]
            )));
        }
        out.push(LabelEntry {
            id: parts[0].to_string(),
            label,
            split: parts[2].to_string(),
        });
    }
    Ok(out)
}

/// Two-column `id<TAB>label` file (evaluation-window domain labels).
pub fn format_binary_labels_tsv(entries: &[(String, bool)]) -> String {
    let mut out = String::new();
    for (id, label) in entries {
        writeln!(out, "{id}\t{}", u8::from(*label)).unwrap();
    }
    out
}

pub fn read_binary_labels_tsv(path: &Path) -> Result<Vec<(String, bool)>, CliError> {
    let text = read_to_string(path)?;
    let origin = path.display().to_string();
    let mut out = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let parts: Vec<&str> = line.split('\t').collect();
        if parts.len() != 2 {
            return Err(CliError::validation(format!(
                "{origin}:{}: expected `id<TAB>label`",
                lineno + 1
            )));
        }
        let label = match parts[1] {
            "0" => false,
            "1" => true,
            other => {
                return Err(CliError::validation(format!(
                    "{origin}:{}: label must be 0 or 1, got `{other}`",
                    lineno + 1
                )))
            }
        };
        out.push((parts[0].to_string(), label));
    }
    Ok(out)
}
