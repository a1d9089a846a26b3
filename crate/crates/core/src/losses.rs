//! Supervised and graph-regularization loss functions, each a pure scalar
//! function with a hand-derived gradient. The eight unsupervised variants fall
//! into three families: regression on the raw edge weight (`reg_l1`, `reg_l2`,
//! `smooth_l1`), classification of the binary link (`cross_entropy`,
//! `contrastive` through the learned distance), and direct embedding
//! distances (`cosine_embed`, `l1_embed`, `l2_embed`).

use thiserror::Error;

use crate::scalar::Real;

/// Probabilities are clamped to `[PROB_EPS, 1 - PROB_EPS]` before logs;
/// gradients flow through the clamp as identity inside the open interval.
pub const PROB_EPS: f64 = 1e-12;

/// Guard under the square root of the learned distance.
pub const DIST_EPS: f64 = 1e-12;

#[derive(Debug, Error, PartialEq)]
pub enum LossError {
    #[error("embedding lengths differ: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("invalid loss spec: {0}")]
    InvalidSpec(String),
}

/// The unsupervised loss menu.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LossKind {
    Contrastive,
    CosineEmbed,
    L1Embed,
    L2Embed,
    RegL1,
    RegL2,
    SmoothL1,
    CrossEntropy,
}

impl LossKind {
    pub const ALL: [LossKind; 8] = [
        LossKind::Contrastive,
        LossKind::CosineEmbed,
        LossKind::L1Embed,
        LossKind::L2Embed,
        LossKind::RegL1,
        LossKind::RegL2,
        LossKind::SmoothL1,
        LossKind::CrossEntropy,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LossKind::Contrastive => "contrastive",
            LossKind::CosineEmbed => "cosine_embed",
            LossKind::L1Embed => "l1_embed",
            LossKind::L2Embed => "l2_embed",
            LossKind::RegL1 => "reg_l1",
            LossKind::RegL2 => "reg_l2",
            LossKind::SmoothL1 => "smooth_l1",
            LossKind::CrossEntropy => "cross_entropy",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == name)
    }

    /// Whether the loss reads a scalar prediction from the similarity head
    /// (as opposed to operating on the two embeddings directly).
    pub fn uses_similarity_head(self) -> bool {
        !matches!(self, LossKind::CosineEmbed | LossKind::L1Embed | LossKind::L2Embed)
    }

    /// Whether the pair target is the raw edge weight rather than the binary
    /// indicator.
    pub fn uses_raw_weight(self) -> bool {
        matches!(self, LossKind::RegL1 | LossKind::RegL2 | LossKind::SmoothL1)
    }
}

impl std::fmt::Display for LossKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Unsupervised loss selection plus its hyperparameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LossSpec<T> {
    pub kind: LossKind,
    /// Contrastive margin.
    pub margin: T,
    /// Weight of the unsupervised term in the composite objective.
    pub lambda: T,
    /// Use the discontinuous large-error branch `|x|` instead of `|x| - 0.5`
    /// for `smooth_l1` (fidelity flag; the continuous form is the default).
    pub smooth_l1_discontinuous: bool,
}

impl<T: Real> Default for LossSpec<T> {
    fn default() -> Self {
        Self {
            kind: LossKind::Contrastive,
            margin: T::from_f64(0.2),
            lambda: T::one(),
            smooth_l1_discontinuous: false,
        }
    }
}

impl<T: Real> LossSpec<T> {
    pub fn validate(&self) -> Result<(), LossError> {
        if !(self.margin > T::zero()) {
            return Err(LossError::InvalidSpec(format!("margin must be > 0, got {}", self.margin)));
        }
        if !(self.lambda >= T::zero()) {
            return Err(LossError::InvalidSpec(format!(
                "lambda must be >= 0, got {}",
                self.lambda
            )));
        }
        Ok(())
    }
}

#[inline]
pub fn clamp_prob<T: Real>(p: T) -> T {
    let lo = T::from_f64(PROB_EPS);
    let hi = T::one() - T::from_f64(PROB_EPS);
    p.max(lo).min(hi)
}

/// Negative binary cross-entropy `-(y ln p + (1-y) ln(1-p))` on the clamped
/// probability.
pub fn supervised_ce<T: Real>(p: T, y: bool) -> T {
    let p = clamp_prob(p);
    if y {
        -p.ln()
    } else {
        -(T::one() - p).ln()
    }
}

/// d `supervised_ce` / d p (gradient flows through the clamp as identity).
pub fn supervised_ce_dp<T: Real>(p: T, y: bool) -> T {
    let p = clamp_prob(p);
    let w = if y { T::one() } else { T::zero() };
    (p - w) / (p * (T::one() - p))
}

/// Cross-entropy against the binary link indicator; identical functional form
/// to [`supervised_ce`].
pub fn edge_ce<T: Real>(connected: bool, w_hat: T) -> T {
    supervised_ce(w_hat, connected)
}

pub fn edge_ce_dwhat<T: Real>(connected: bool, w_hat: T) -> T {
    supervised_ce_dp(w_hat, connected)
}

/// Learned distance `sqrt(max(1 - g_out, eps))` from a similarity in [0, 1].
pub fn learned_distance<T: Real>(g_out: T) -> T {
    (T::one() - g_out).max(T::from_f64(DIST_EPS)).sqrt()
}

/// Margin contrastive loss `w d^2 + (1-w) max(0, m - d)^2`.
pub fn contrastive<T: Real>(connected: bool, dist: T, margin: T) -> T {
    if connected {
        dist * dist
    } else {
        let gap = (margin - dist).max(T::zero());
        gap * gap
    }
}

/// d `contrastive` / d dist.
pub fn contrastive_ddist<T: Real>(connected: bool, dist: T, margin: T) -> T {
    let two = T::from_f64(2.0);
    if connected {
        two * dist
    } else if dist < margin {
        -two * (margin - dist)
    } else {
        T::zero()
    }
}

fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).fold(T::zero(), |acc, (&x, &y)| acc + x * y)
}

fn norm<T: Real>(a: &[T]) -> T {
    dot(a, a).sqrt()
}

fn check_len<T>(a: &[T], b: &[T]) -> Result<(), LossError> {
    if a.len() != b.len() {
        Err(LossError::LengthMismatch { left: a.len(), right: b.len() })
    } else {
        Ok(())
    }
}

/// Cosine embedding loss: `1 - cos` for connected pairs, `cos` otherwise.
/// Norms are clamped below at `DIST_EPS`.
pub fn cosine_embed<T: Real>(connected: bool, e_u: &[T], e_d: &[T]) -> Result<T, LossError> {
    check_len(e_u, e_d)?;
    let c = cosine(e_u, e_d);
    Ok(if connected { T::one() - c } else { c })
}

fn cosine<T: Real>(a: &[T], b: &[T]) -> T {
    let eps = T::from_f64(DIST_EPS);
    let na = norm(a).max(eps);
    let nb = norm(b).max(eps);
    dot(a, b) / (na * nb)
}

/// Gradients of [`cosine_embed`] with respect to both embeddings.
pub fn cosine_embed_grad<T: Real>(
    connected: bool,
    e_u: &[T],
    e_d: &[T],
) -> Result<(Vec<T>, Vec<T>), LossError> {
    check_len(e_u, e_d)?;
    let eps = T::from_f64(DIST_EPS);
    let na = norm(e_u).max(eps);
    let nb = norm(e_d).max(eps);
    let c = dot(e_u, e_d) / (na * nb);
    let sign = if connected { -T::one() } else { T::one() };
    let du: Vec<T> =
        e_u.iter().zip(e_d).map(|(&u, &d)| sign * (d / (na * nb) - c * u / (na * na))).collect();
    let dd: Vec<T> =
        e_u.iter().zip(e_d).map(|(&u, &d)| sign * (u / (na * nb) - c * d / (nb * nb))).collect();
    Ok((du, dd))
}

/// Difference-norm order for the embedding losses.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NormOrder {
    L1,
    L2Squared,
}

/// `w * ||e_u - e_d||_1` or `w * ||e_u - e_d||_2^2`; unconnected pairs
/// contribute nothing.
pub fn embed_norm<T: Real>(
    connected: bool,
    e_u: &[T],
    e_d: &[T],
    order: NormOrder,
) -> Result<T, LossError> {
    check_len(e_u, e_d)?;
    if !connected {
        return Ok(T::zero());
    }
    let val = match order {
        NormOrder::L1 => {
            e_u.iter().zip(e_d).fold(T::zero(), |acc, (&u, &d)| acc + (u - d).abs())
        }
        NormOrder::L2Squared => {
            e_u.iter().zip(e_d).fold(T::zero(), |acc, (&u, &d)| acc + (u - d) * (u - d))
        }
    };
    Ok(val)
}

/// Gradients of [`embed_norm`] with respect to both embeddings.
pub fn embed_norm_grad<T: Real>(
    connected: bool,
    e_u: &[T],
    e_d: &[T],
    order: NormOrder,
) -> Result<(Vec<T>, Vec<T>), LossError> {
    check_len(e_u, e_d)?;
    if !connected {
        return Ok((vec![T::zero(); e_u.len()], vec![T::zero(); e_d.len()]));
    }
    let two = T::from_f64(2.0);
    let du: Vec<T> = e_u
        .iter()
        .zip(e_d)
        .map(|(&u, &d)| match order {
            NormOrder::L1 => sign_of(u - d),
            NormOrder::L2Squared => two * (u - d),
        })
        .collect();
    let dd: Vec<T> = du.iter().map(|&g| -g).collect();
    Ok((du, dd))
}

fn sign_of<T: Real>(x: T) -> T {
    if x > T::zero() {
        T::one()
    } else if x < T::zero() {
        -T::one()
    } else {
        T::zero()
    }
}

/// Regression family for the weighted-edge target.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RegressionKind {
    L1,
    L2,
    SmoothL1,
}

impl RegressionKind {
    pub fn of(kind: LossKind) -> Option<Self> {
        match kind {
            LossKind::RegL1 => Some(RegressionKind::L1),
            LossKind::RegL2 => Some(RegressionKind::L2),
            LossKind::SmoothL1 => Some(RegressionKind::SmoothL1),
            _ => None,
        }
    }
}

/// Regression loss between the target weight `w` and the prediction `w_hat`.
/// `smooth_l1` uses `0.5 x^2` for `|x| < 1` and the continuous `|x| - 0.5`
/// otherwise, unless `discontinuous` selects the plain `|x|` branch.
pub fn regression_loss<T: Real>(w: T, w_hat: T, kind: RegressionKind, discontinuous: bool) -> T {
    let x = w - w_hat;
    match kind {
        RegressionKind::L1 => x.abs(),
        RegressionKind::L2 => x * x,
        RegressionKind::SmoothL1 => {
            let half = T::from_f64(0.5);
            if x.abs() < T::one() {
                half * x * x
            } else if discontinuous {
                x.abs()
            } else {
                x.abs() - half
            }
        }
    }
}

/// d `regression_loss` / d w_hat.
pub fn regression_loss_dwhat<T: Real>(
    w: T,
    w_hat: T,
    kind: RegressionKind,
    _discontinuous: bool,
) -> T {
    let x = w - w_hat;
    match kind {
        RegressionKind::L1 => -sign_of(x),
        RegressionKind::L2 => -T::from_f64(2.0) * x,
        RegressionKind::SmoothL1 => {
            if x.abs() < T::one() {
                -x
            } else {
                -sign_of(x)
            }
        }
    }
}
