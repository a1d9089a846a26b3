//! Ranking metrics for imbalanced binary classification: AUROC (Mann-Whitney
//! with half-credit ties) and AUPRC (step-wise average precision with tied
//! scores processed as one threshold group), plus the cross-repetition
//! aggregate report.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scalar::Real;

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("scores and labels have different lengths ({scores} vs {labels})")]
    LengthMismatch { scores: usize, labels: usize },
    #[error("metric undefined: {0}")]
    Undefined(&'static str),
    #[error("non-finite score")]
    NonFiniteScore,
}

/// Probability that a uniformly drawn positive outranks a uniformly drawn
/// negative, ties counted half. Computed via the rank-sum statistic with
/// average ranks for tied scores.
pub fn auroc<T: Real>(scores: &[T], labels: &[bool]) -> Result<f64, MetricsError> {
    validate(scores, labels)?;
    let pos = labels.iter().filter(|&&l| l).count();
    let neg = labels.len() - pos;
    if pos == 0 || neg == 0 {
        return Err(MetricsError::Undefined("AUROC needs both classes"));
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[a].partial_cmp(&scores[b]).unwrap());

    // Average ranks over tie groups, 1-based.
    let mut rank_sum_pos = 0.0f64;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            j += 1;
        }
        let avg_rank = (i + 1 + j) as f64 / 2.0;
        for &idx in &order[i..j] {
            if labels[idx] {
                rank_sum_pos += avg_rank;
            }
        }
        i = j;
    }

    let p = pos as f64;
    let n = neg as f64;
    Ok((rank_sum_pos - p * (p + 1.0) / 2.0) / (p * n))
}

/// Average precision: `sum_k (R_k - R_{k-1}) * P_k` over descending-score
/// thresholds, each tie group forming a single threshold.
pub fn auprc<T: Real>(scores: &[T], labels: &[bool]) -> Result<f64, MetricsError> {
    validate(scores, labels)?;
    let pos = labels.iter().filter(|&&l| l).count();
    if pos == 0 {
        return Err(MetricsError::Undefined("AUPRC needs at least one positive"));
    }

    let mut order: Vec<usize> = (0..scores.len()).collect();
    order.sort_by(|&a, &b| scores[b].partial_cmp(&scores[a]).unwrap());

    let total_pos = pos as f64;
    let mut tp = 0usize;
    let mut fp = 0usize;
    let mut recall_prev = 0.0f64;
    let mut ap = 0.0f64;
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j < order.len() && scores[order[j]] == scores[order[i]] {
            j += 1;
        }
        for &idx in &order[i..j] {
            if labels[idx] {
                tp += 1;
            } else {
                fp += 1;
            }
        }
        let recall = tp as f64 / total_pos;
        let precision = tp as f64 / (tp + fp) as f64;
        ap += (recall - recall_prev) * precision;
        recall_prev = recall;
        i = j;
    }
    Ok(ap)
}

fn validate<T: Real>(scores: &[T], labels: &[bool]) -> Result<(), MetricsError> {
    if scores.len() != labels.len() {
        return Err(MetricsError::LengthMismatch { scores: scores.len(), labels: labels.len() });
    }
    if scores.is_empty() {
        return Err(MetricsError::Undefined("empty input"));
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(MetricsError::NonFiniteScore);
    }
    Ok(())
}

/// Metrics of a single training repetition.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunMetrics {
    pub auroc: f64,
    pub auprc: f64,
}

/// Per-run and averaged metrics across repetitions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub auroc_mean: f64,
    pub auroc_sd: f64,
    pub auprc_mean: f64,
    pub auprc_sd: f64,
    pub runs: usize,
    pub prevalence: f64,
    pub per_run: Vec<RunMetrics>,
}

/// Arithmetic mean and sample standard deviation per metric. A single run
/// reports a standard deviation of zero.
pub fn aggregate(per_run: &[RunMetrics], prevalence: f64) -> Result<EvalReport, MetricsError> {
    if per_run.is_empty() {
        return Err(MetricsError::Undefined("no runs to aggregate"));
    }
    let n = per_run.len() as f64;
    let mean = |f: fn(&RunMetrics) -> f64| per_run.iter().map(f).sum::<f64>() / n;
    let sd = |f: fn(&RunMetrics) -> f64, m: f64| {
        if per_run.len() < 2 {
            0.0
        } else {
            (per_run.iter().map(|r| (f(r) - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        }
    };
    let auroc_mean = mean(|r| r.auroc);
    let auprc_mean = mean(|r| r.auprc);
    Ok(EvalReport {
        auroc_mean,
        auroc_sd: sd(|r| r.auroc, auroc_mean),
        auprc_mean,
        auprc_sd: sd(|r| r.auprc, auprc_mean),
        runs: per_run.len(),
        prevalence,
        per_run: per_run.to_vec(),
    })
}
