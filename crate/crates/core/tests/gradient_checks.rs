//! Central finite differences validate every analytic gradient path: the
//! supervised loss and all eight unsupervised losses composed through the
//! full four-block model, plus the Planetoid and NGM objectives. The
//! numerical oracle is independent of the backward pass: it only re-evaluates
//! the loss at perturbed parameters.
//!
//! Finite differences are meaningless where the objective is non-smooth
//! (relu corners, the contrastive margin, zero-norm embeddings), so each
//! probe is computed at two step sizes and discarded as unstable when they
//! disagree; the fraction of discarded probes must stay negligible.

use help_core::graph::EdgeClasses;
use help_core::losses::{LossKind, LossSpec};
use help_core::matrix::RowMatrix;
use help_core::models::{
    help_loss, help_loss_grads, ngm_loss, ngm_loss_grads, planetoid_loss, planetoid_loss_grads,
    ContextSample, HelpGrads, HelpModel, LabeledExample, ModelDims, NgmDistance, NgmModel,
    PairExample, PlanetoidGradBuffers, PlanetoidModel,
};
use help_core::nn::BlockGrads;
use help_core::rng::{self, uniform_in};

const FD_STEP: f64 = 1e-5;
const REL_TOL: f64 = 1e-4;

fn tiny_dims() -> ModelDims {
    ModelDims { domain_dim: 5, user_dim: 6, tower_dims: vec![7, 4], head_dims: vec![3, 1] }
}

fn random_vec(rng: &mut rng::ChaCha8Rng, len: usize) -> Vec<f64> {
    (0..len).map(|_| uniform_in(rng, -1.0, 1.0)).collect()
}

/// Zero-initialized biases can park relu pre-activations exactly on the
/// kink (a fully dead layer outputs the bias vector verbatim), where finite
/// differences and the subgradient convention legitimately disagree. Random
/// biases keep every probe off the kink.
fn randomize_biases(block: &mut help_core::nn::DenseBlock<f64>, rng: &mut rng::ChaCha8Rng) {
    for l in 0..block.layer_count() {
        for b in block.layer_biases_mut(l) {
            *b = uniform_in(rng, -0.3, 0.3);
        }
    }
}

/// Outcome counters for one sweep over a parameter set.
#[derive(Default)]
struct SweepStats {
    checked: usize,
    skipped: usize,
}

impl SweepStats {
    fn assert_mostly_checked(&self, what: &str) {
        assert!(self.checked > 0, "{what}: no parameters checked");
        let frac = self.skipped as f64 / (self.checked + self.skipped) as f64;
        assert!(
            frac < 0.02,
            "{what}: {skipped}/{total} probes unstable",
            skipped = self.skipped,
            total = self.checked + self.skipped
        );
    }
}

/// Compare one analytic derivative against a stability-filtered central
/// difference of `eval`.
fn probe<F: FnMut(f64) -> f64>(
    analytic: f64,
    original: f64,
    mut eval: F,
    stats: &mut SweepStats,
    what: &str,
) {
    let fd = |mut eval: &mut F, h: f64| -> f64 {
        let plus = (&mut eval)(original + h);
        let minus = (&mut eval)(original - h);
        (plus - minus) / (2.0 * h)
    };
    let coarse = fd(&mut eval, FD_STEP);
    let fine = fd(&mut eval, FD_STEP / 8.0);
    let scale = coarse.abs().max(fine.abs());
    if scale > 1e-6 && (coarse - fine).abs() / scale > 1e-3 {
        stats.skipped += 1; // straddles a non-smooth point
        return;
    }
    stats.checked += 1;
    let denom = analytic.abs().max(coarse.abs());
    if denom < 1e-5 {
        // Below the resolution of the difference quotient itself (roundoff
        // in the loss evaluations is ~1e-10 at this step size).
        return;
    }
    let rel = (analytic - coarse).abs() / denom;
    assert!(rel < REL_TOL, "{what}: analytic {analytic} vs numeric {coarse} (rel err {rel:.3e})");
}

struct Fixture {
    model: HelpModel<f64>,
    domain_rows: RowMatrix<f64>,
    user_rows: RowMatrix<f64>,
    labels: Vec<bool>,
    connected: Vec<bool>,
    weights: Vec<f64>,
}

impl Fixture {
    fn new(seed: u64) -> Self {
        let dims = tiny_dims();
        // Reject draws whose pair embeddings sit near the zero vector, where
        // the cosine loss is genuinely non-differentiable.
        for attempt in 0..50 {
            let fixture = Self::draw(&dims, seed.wrapping_add(attempt * 0x9E37));
            let healthy = fixture.pairs().iter().all(|p| {
                let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
                norm(&fixture.model.embed_domain(p.domain_features).unwrap()) > 1e-2
                    && norm(&fixture.model.embed_user(p.user_features).unwrap()) > 1e-2
            });
            if healthy {
                return fixture;
            }
        }
        panic!("no healthy fixture found for seed {seed}");
    }

    fn draw(dims: &ModelDims, seed: u64) -> Self {
        let mut model = HelpModel::init(dims, seed).unwrap();
        let mut rng = rng::seeded(seed ^ 0xABCD);
        randomize_biases(&mut model.h_d, &mut rng);
        randomize_biases(&mut model.h_u, &mut rng);
        randomize_biases(&mut model.f, &mut rng);
        randomize_biases(&mut model.g, &mut rng);
        let n_labeled = 3;
        let n_pairs = 4;
        let domain_rows = RowMatrix::from_rows(
            &(0..n_labeled + n_pairs)
                .map(|_| random_vec(&mut rng, dims.domain_dim))
                .collect::<Vec<_>>(),
        );
        let user_rows = RowMatrix::from_rows(
            &(0..n_pairs).map(|_| random_vec(&mut rng, dims.user_dim)).collect::<Vec<_>>(),
        );
        let labels = (0..n_labeled).map(|i| i % 2 == 0).collect();
        let connected = (0..n_pairs).map(|i| i % 2 == 0).collect();
        let weights = (0..n_pairs).map(|_| uniform_in(&mut rng, 0.0, 3.0)).collect();
        Self { model, domain_rows, user_rows, labels, connected, weights }
    }

    fn labeled(&self) -> Vec<LabeledExample<'_, f64>> {
        self.labels
            .iter()
            .enumerate()
            .map(|(i, &label)| LabeledExample { features: self.domain_rows.row(i), label })
            .collect()
    }

    fn pairs(&self) -> Vec<PairExample<'_, f64>> {
        (0..self.connected.len())
            .map(|i| PairExample {
                domain_features: self.domain_rows.row(self.labels.len() + i),
                user_features: self.user_rows.row(i),
                connected: self.connected[i],
                weight: self.weights[i],
            })
            .collect()
    }
}

#[derive(Clone, Copy)]
enum Block {
    DomainTower,
    UserTower,
    LabelHead,
    SimilarityHead,
}

impl Block {
    const ALL: [Block; 4] =
        [Block::DomainTower, Block::UserTower, Block::LabelHead, Block::SimilarityHead];

    fn name(self) -> &'static str {
        match self {
            Block::DomainTower => "h_d",
            Block::UserTower => "h_u",
            Block::LabelHead => "f",
            Block::SimilarityHead => "g",
        }
    }

    fn of(self, model: &mut HelpModel<f64>) -> &mut help_core::nn::DenseBlock<f64> {
        match self {
            Block::DomainTower => &mut model.h_d,
            Block::UserTower => &mut model.h_u,
            Block::LabelHead => &mut model.f,
            Block::SimilarityHead => &mut model.g,
        }
    }

    fn grads(self, grads: &HelpGrads<f64>) -> &BlockGrads<f64> {
        match self {
            Block::DomainTower => &grads.h_d,
            Block::UserTower => &grads.h_u,
            Block::LabelHead => &grads.f,
            Block::SimilarityHead => &grads.g,
        }
    }
}

fn check_help(seed: u64, spec: &LossSpec<f64>, supervised_only: bool, stats: &mut SweepStats) {
    let mut fixture = Fixture::new(seed);
    let labeled_owned = fixture.labeled();
    let pairs_owned = if supervised_only { Vec::new() } else { fixture.pairs() };
    let mut grads = HelpGrads::zeros_like(&fixture.model);
    help_loss_grads(&fixture.model, &labeled_owned, &pairs_owned, spec, &mut grads).unwrap();
    drop((labeled_owned, pairs_owned));

    for block in Block::ALL {
        let n = block.of(&mut fixture.model).param_len();
        for k in 0..n {
            let analytic = block.grads(&grads).param(k);
            let original = block.of(&mut fixture.model).param(k);
            probe(
                analytic,
                original,
                |v| {
                    *block.of(&mut fixture.model).param_mut(k) = v;
                    let labeled = fixture.labeled();
                    let pairs = if supervised_only { Vec::new() } else { fixture.pairs() };
                    let loss = help_loss(&fixture.model, &labeled, &pairs, spec).unwrap();
                    drop((labeled, pairs));
                    *block.of(&mut fixture.model).param_mut(k) = original;
                    loss
                },
                stats,
                &format!("{} {}[{k}]", spec.kind, block.name()),
            );
        }
    }
}

#[test]
fn supervised_loss_gradients_match_finite_differences() {
    let spec = LossSpec::default();
    let mut stats = SweepStats::default();
    for seed in 0..20 {
        check_help(1000 + seed, &spec, true, &mut stats);
    }
    stats.assert_mostly_checked("supervised");
}

#[test]
fn all_unsupervised_losses_match_finite_differences_through_four_blocks() {
    for kind in LossKind::ALL {
        let mut stats = SweepStats::default();
        for draw in 0..20u64 {
            // Alternate margins so both contrastive branches see gradient.
            let margin = if draw % 2 == 0 { 0.2 } else { 1.5 };
            let spec = LossSpec { kind, margin, lambda: 0.7, ..LossSpec::default() };
            check_help(9000 + draw * 31 + kind as u64, &spec, false, &mut stats);
        }
        stats.assert_mostly_checked(kind.name());
    }
}

#[test]
fn planetoid_gradients_match_finite_differences() {
    let dims = tiny_dims();
    let mut stats = SweepStats::default();
    for seed in 0..20u64 {
        let mut model = PlanetoidModel::<f64>::init(&dims, 4, 300 + seed).unwrap();
        let mut rng = rng::seeded(seed ^ 0x77);
        randomize_biases(&mut model.trunk, &mut rng);
        randomize_biases(&mut model.head, &mut rng);
        let features = RowMatrix::from_rows(
            &(0..4).map(|_| random_vec(&mut rng, dims.domain_dim)).collect::<Vec<_>>(),
        );
        let labeled = [
            LabeledExample { features: features.row(0), label: true },
            LabeledExample { features: features.row(1), label: false },
        ];
        let samples = [
            ContextSample { node: 2, context: 1, positive: true },
            ContextSample { node: 3, context: 0, positive: false },
        ];
        let mut grads = PlanetoidGradBuffers::zeros_like(&model);
        planetoid_loss_grads(&model, &labeled, &samples, &features, 0.8, false, &mut grads)
            .unwrap();

        let mut m = model.clone();
        for k in 0..m.trunk.param_len() {
            let original = m.trunk.param(k);
            let analytic = grads.trunk.param(k);
            probe(
                analytic,
                original,
                |v| {
                    *m.trunk.param_mut(k) = v;
                    let loss =
                        planetoid_loss(&m, &labeled, &samples, &features, 0.8, false).unwrap();
                    *m.trunk.param_mut(k) = original;
                    loss
                },
                &mut stats,
                "planetoid trunk",
            );
        }
        for k in 0..m.context.as_flat().len() {
            let original = m.context.as_flat()[k];
            let analytic = grads.context[k];
            probe(
                analytic,
                original,
                |v| {
                    m.context.as_flat_mut()[k] = v;
                    let loss =
                        planetoid_loss(&m, &labeled, &samples, &features, 0.8, false).unwrap();
                    m.context.as_flat_mut()[k] = original;
                    loss
                },
                &mut stats,
                "planetoid context",
            );
        }
    }
    stats.assert_mostly_checked("planetoid");
}

#[test]
fn ngm_gradients_match_finite_differences() {
    let dims = tiny_dims();
    let mut stats = SweepStats::default();
    for seed in 0..20u64 {
        let mut model = NgmModel::<f64>::init(&dims, None, 600 + seed).unwrap();
        let mut rng = rng::seeded(seed ^ 0x55);
        randomize_biases(&mut model.trunk, &mut rng);
        randomize_biases(&mut model.head, &mut rng);
        let features = RowMatrix::from_rows(
            &(0..5).map(|_| random_vec(&mut rng, dims.domain_dim)).collect::<Vec<_>>(),
        );
        let labeled = [
            LabeledExample { features: features.row(0), label: true },
            LabeledExample { features: features.row(1), label: false },
        ];
        let classes = EdgeClasses {
            labeled_labeled: vec![(0, 1, 1.5)],
            labeled_unlabeled: vec![(1, 2, 0.7)],
            unlabeled_unlabeled: vec![(3, 4, 2.0)],
        };
        let lambdas = [0.3, 0.5, 0.2];
        let kind = if seed % 2 == 0 { NgmDistance::L2Squared } else { NgmDistance::L1 };
        let mut trunk_grads = BlockGrads::zeros_like(&model.trunk);
        let mut head_grads = BlockGrads::zeros_like(&model.head);
        ngm_loss_grads(
            &model,
            &labeled,
            &classes,
            &features,
            lambdas,
            kind,
            &mut trunk_grads,
            &mut head_grads,
        )
        .unwrap();

        let mut m = model.clone();
        for k in 0..m.trunk.param_len() {
            let original = m.trunk.param(k);
            let analytic = trunk_grads.param(k);
            probe(
                analytic,
                original,
                |v| {
                    *m.trunk.param_mut(k) = v;
                    let loss = ngm_loss(&m, &labeled, &classes, &features, lambdas, kind).unwrap();
                    *m.trunk.param_mut(k) = original;
                    loss
                },
                &mut stats,
                "ngm trunk",
            );
        }
        for k in 0..m.head.param_len() {
            let original = m.head.param(k);
            let analytic = head_grads.param(k);
            probe(
                analytic,
                original,
                |v| {
                    *m.head.param_mut(k) = v;
                    let loss = ngm_loss(&m, &labeled, &classes, &features, lambdas, kind).unwrap();
                    *m.head.param_mut(k) = original;
                    loss
                },
                &mut stats,
                "ngm head",
            );
        }
    }
    stats.assert_mostly_checked("ngm");
}
