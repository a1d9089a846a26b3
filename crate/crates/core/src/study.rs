//! User-level embedding study: derive binary "vulnerable user" labels from an
//! evaluation interaction window, balance the classes by downsampling
//! negatives, and score how well a 2-D projection separates the two groups.

use crate::graph::BipartiteGraph;
use crate::matrix::RowMatrix;
use crate::metrics::{self, MetricsError};
use crate::rng;
use crate::scalar::Real;

/// Per-user study label: `None` for inactive users (excluded), `Some(true)`
/// for vulnerable users, `Some(false)` for the remaining active users.
///
/// A user is active with total interaction count strictly above
/// `activity_threshold` in the window, and vulnerable if additionally the
/// interaction count with positive domains is strictly above the threshold.
pub fn derive_vulnerable_users<T: Real>(
    window: &BipartiteGraph<T>,
    positive_domains: &[bool],
    activity_threshold: T,
) -> Vec<Option<bool>> {
    let mut total = vec![T::zero(); window.user_count()];
    let mut positive = vec![T::zero(); window.user_count()];
    for &(u, d, w) in window.edges() {
        total[u] += w;
        if positive_domains.get(d).copied().unwrap_or(false) {
            positive[u] += w;
        }
    }
    total
        .iter()
        .zip(&positive)
        .map(|(&t, &p)| {
            if t > activity_threshold {
                Some(p > activity_threshold)
            } else {
                None
            }
        })
        .collect()
}

/// Indices of all positives plus a uniformly downsampled negative set of the
/// same size (or all negatives when fewer exist). Deterministic per seed;
/// output sorted.
pub fn downsample_negatives(labels: &[Option<bool>], seed: u64) -> Vec<usize> {
    let positives: Vec<usize> = labels
        .iter()
        .enumerate()
        .filter_map(|(i, l)| (*l == Some(true)).then_some(i))
        .collect();
    let mut negatives: Vec<usize> = labels
        .iter()
        .enumerate()
        .filter_map(|(i, l)| (*l == Some(false)).then_some(i))
        .collect();

    let keep = positives.len().min(negatives.len());
    let mut rng = rng::seeded(seed);
    for i in 0..keep {
        let j = rand::Rng::random_range(&mut rng, i..negatives.len());
        negatives.swap(i, j);
    }
    negatives.truncate(keep);

    let mut selected = positives;
    selected.extend(negatives);
    selected.sort_unstable();
    selected
}

/// Separation score of labeled points: AUROC of the nearest-centroid margin
/// (distance to the negative centroid minus distance to the positive one).
/// Perfectly separated clusters score 1; shuffled labels score near 0.5.
pub fn separation_score<T: Real>(
    coords: &RowMatrix<T>,
    labels: &[bool],
) -> Result<f64, MetricsError> {
    if coords.rows() != labels.len() {
        return Err(MetricsError::LengthMismatch { scores: coords.rows(), labels: labels.len() });
    }
    let dims = coords.cols();
    let mut centroid_pos = vec![T::zero(); dims];
    let mut centroid_neg = vec![T::zero(); dims];
    let mut n_pos = 0usize;
    let mut n_neg = 0usize;
    for (row, &label) in coords.iter_rows().zip(labels) {
        let (centroid, count) = if label {
            (&mut centroid_pos, &mut n_pos)
        } else {
            (&mut centroid_neg, &mut n_neg)
        };
        for (c, &v) in centroid.iter_mut().zip(row) {
            *c += v;
        }
        *count += 1;
    }
    if n_pos == 0 || n_neg == 0 {
        return Err(MetricsError::Undefined("separation needs both classes"));
    }
    centroid_pos.iter_mut().for_each(|c| *c /= T::from_f64(n_pos as f64));
    centroid_neg.iter_mut().for_each(|c| *c /= T::from_f64(n_neg as f64));

    let dist = |row: &[T], centroid: &[T]| -> T {
        row.iter()
            .zip(centroid)
            .fold(T::zero(), |acc, (&x, &c)| acc + (x - c) * (x - c))
            .sqrt()
    };
    let scores: Vec<T> =
        coords.iter_rows().map(|row| dist(row, &centroid_neg) - dist(row, &centroid_pos)).collect();
    metrics::auroc(&scores, labels)
}
