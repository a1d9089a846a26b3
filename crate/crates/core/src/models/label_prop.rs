//! Label propagation over the weighted domain graph: clamped labels diffuse
//! through row-normalized averaging until convergence. Components without any
//! label fall back to the labeled-set prevalence and are flagged.

use crate::graph::DomainGraph;
use crate::models::ModelError;
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq)]
pub struct LabelPropConfig<T> {
    pub max_iterations: usize,
    pub tolerance: T,
}

impl<T: Real> Default for LabelPropConfig<T> {
    fn default() -> Self {
        Self { max_iterations: 1000, tolerance: T::from_f64(1e-6) }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LabelPropResult<T> {
    /// Converged score per domain, in `[0, 1]`.
    pub scores: Vec<T>,
    /// True where the score is the prevalence fallback (no label reachable).
    pub fallback: Vec<bool>,
    /// Largest iteration count over connected components.
    pub iterations: usize,
    pub converged: bool,
}

/// Iterate `F <- row-normalized-W x F`, re-clamping labeled rows each sweep,
/// until the largest score change drops below the tolerance. Scores start at
/// the per-component label mean, so every intermediate state already obeys
/// the maximum principle.
pub fn label_propagation<T: Real>(
    dg: &DomainGraph<T>,
    labels: &[Option<bool>],
    cfg: &LabelPropConfig<T>,
) -> Result<LabelPropResult<T>, ModelError> {
    let n = dg.domain_count();
    if labels.len() != n {
        return Err(ModelError::InvalidInput(format!(
            "labels length {} does not match domain count {n}",
            labels.len()
        )));
    }
    if cfg.max_iterations == 0 || !(cfg.tolerance > T::zero()) {
        return Err(ModelError::InvalidInput("label propagation config must be positive".into()));
    }
    let labeled_total = labels.iter().flatten().count();
    if labeled_total == 0 {
        return Err(ModelError::InvalidInput("label propagation needs at least one label".into()));
    }
    let positives = labels.iter().flatten().filter(|&&y| y).count();
    let prevalence = T::from_f64(positives as f64 / labeled_total as f64);

    let adjacency = dg.adjacency();
    let mut scores = vec![T::zero(); n];
    let mut fallback = vec![false; n];
    let mut visited = vec![false; n];
    let mut max_iterations = 0usize;
    let mut converged = true;

    for start in 0..n {
        if visited[start] {
            continue;
        }
        // Collect the connected component.
        let mut component = vec![start];
        visited[start] = true;
        let mut head = 0;
        while head < component.len() {
            let node = component[head];
            head += 1;
            for &(next, _) in &adjacency[node] {
                if !visited[next] {
                    visited[next] = true;
                    component.push(next);
                }
            }
        }

        let component_labels: Vec<(usize, bool)> =
            component.iter().filter_map(|&i| labels[i].map(|y| (i, y))).collect();
        if component_labels.is_empty() {
            for &i in &component {
                scores[i] = prevalence;
                fallback[i] = true;
            }
            continue;
        }

        let pos = component_labels.iter().filter(|&&(_, y)| y).count();
        let local_mean = T::from_f64(pos as f64 / component_labels.len() as f64);
        for &i in &component {
            scores[i] = match labels[i] {
                Some(true) => T::one(),
                Some(false) => T::zero(),
                None => local_mean,
            };
        }

        let unlabeled: Vec<usize> =
            component.iter().copied().filter(|&i| labels[i].is_none()).collect();
        if unlabeled.is_empty() {
            continue;
        }
        let degree: Vec<T> = unlabeled
            .iter()
            .map(|&i| adjacency[i].iter().fold(T::zero(), |acc, &(_, w)| acc + w))
            .collect();

        let mut iterations = 0;
        let mut component_converged = false;
        let mut next = vec![T::zero(); unlabeled.len()];
        while iterations < cfg.max_iterations {
            iterations += 1;
            let mut max_change = T::zero();
            for (k, &i) in unlabeled.iter().enumerate() {
                let sum = adjacency[i].iter().fold(T::zero(), |acc, &(j, w)| acc + w * scores[j]);
                next[k] = sum / degree[k];
                max_change = max_change.max((next[k] - scores[i]).abs());
            }
            for (k, &i) in unlabeled.iter().enumerate() {
                scores[i] = next[k];
            }
            if max_change < cfg.tolerance {
                component_converged = true;
                break;
            }
        }
        max_iterations = max_iterations.max(iterations);
        converged &= component_converged;
    }

    Ok(LabelPropResult { scores, fallback, iterations: max_iterations, converged })
}
