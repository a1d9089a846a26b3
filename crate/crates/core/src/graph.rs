//! Weighted bipartite user-domain graph: dichotomization, one-mode projection
//! to a domain-domain graph, training-pair sampling, and the labeled/unlabeled
//! edge partition used by graph-regularized training.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::rng;
use crate::scalar::Real;

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("user index {index} out of range (user count {count})")]
    UserOutOfRange { index: usize, count: usize },
    #[error("domain index {index} out of range (domain count {count})")]
    DomainOutOfRange { index: usize, count: usize },
    #[error("duplicate edge ({user}, {domain})")]
    DuplicateEdge { user: usize, domain: usize },
    #[error("duplicate domain pair ({i}, {j})")]
    DuplicatePair { i: usize, j: usize },
    #[error("self-loop on domain {0}")]
    SelfLoop(usize),
    #[error("edge weight must be finite and non-negative, got {0}")]
    BadWeight(f64),
    #[error("negative threshold {0}")]
    BadThreshold(f64),
    #[error("graph has no users or no domains")]
    EmptySide,
    #[error("graph has no edges to sample positives from")]
    NoEdges,
    #[error("graph has no non-edges to sample negatives from")]
    NoNonEdges,
    #[error("requested {requested} negative pairs but only {available} non-edges exist")]
    NotEnoughNonEdges { requested: usize, available: usize },
    #[error("labeled mask has length {got}, expected {expected}")]
    MaskLength { expected: usize, got: usize },
}

/// Weighted bipartite user-domain interaction graph.
///
/// Edges are stored sorted by `(user, domain)`; a weight of zero means "no
/// edge" and is never stored. At most one edge exists per (user, domain) pair.
#[derive(Clone, Debug, PartialEq)]
pub struct BipartiteGraph<T> {
    user_count: usize,
    domain_count: usize,
    edges: Vec<(usize, usize, T)>,
}

impl<T: Real> BipartiteGraph<T> {
    /// Validates indices and weights, drops zero-weight entries, sorts, and
    /// rejects duplicate (user, domain) pairs.
    pub fn new(
        user_count: usize,
        domain_count: usize,
        edges: Vec<(usize, usize, T)>,
    ) -> Result<Self, GraphError> {
        let mut kept = Vec::with_capacity(edges.len());
        for (u, d, w) in edges {
            if u >= user_count {
                return Err(GraphError::UserOutOfRange { index: u, count: user_count });
            }
            if d >= domain_count {
                return Err(GraphError::DomainOutOfRange { index: d, count: domain_count });
            }
            if !w.is_finite() || w < T::zero() {
                return Err(GraphError::BadWeight(w.as_f64()));
            }
            if w > T::zero() {
                kept.push((u, d, w));
            }
        }
        kept.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        for pair in kept.windows(2) {
            if pair[0].0 == pair[1].0 && pair[0].1 == pair[1].1 {
                return Err(GraphError::DuplicateEdge { user: pair[0].0, domain: pair[0].1 });
            }
        }
        Ok(Self { user_count, domain_count, edges: kept })
    }

    pub fn user_count(&self) -> usize {
        self.user_count
    }

    pub fn domain_count(&self) -> usize {
        self.domain_count
    }

    pub fn edges(&self) -> &[(usize, usize, T)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, user: usize, domain: usize) -> bool {
        self.weight(user, domain).is_some()
    }

    /// Stored weight for the pair, `None` when unconnected.
    pub fn weight(&self, user: usize, domain: usize) -> Option<T> {
        self.edges
            .binary_search_by(|probe| (probe.0, probe.1).cmp(&(user, domain)))
            .ok()
            .map(|i| self.edges[i].2)
    }

    /// Per-user adjacency: for each user the list of (domain, weight) sorted
    /// by domain.
    pub fn user_adjacency(&self) -> Vec<Vec<(usize, T)>> {
        let mut adj = vec![Vec::new(); self.user_count];
        for &(u, d, w) in &self.edges {
            adj[u].push((d, w));
        }
        adj
    }

    /// Binary version of the graph: an edge of weight one exactly where the
    /// input weight is strictly greater than `threshold`.
    pub fn dichotomize(&self, threshold: T) -> Result<Self, GraphError> {
        if !threshold.is_finite() || threshold < T::zero() {
            return Err(GraphError::BadThreshold(threshold.as_f64()));
        }
        let edges = self
            .edges
            .iter()
            .filter(|&&(_, _, w)| w > threshold)
            .map(|&(u, d, _)| (u, d, T::one()))
            .collect();
        Ok(Self { user_count: self.user_count, domain_count: self.domain_count, edges })
    }

    /// One-mode projection onto domains: for each unordered pair of domains,
    /// the edge weight is the sum over shared users of the smaller of the
    /// user's two edge weights. Pairs with zero sum are omitted.
    pub fn compress_to_domain_graph(&self) -> DomainGraph<T> {
        let mut acc: BTreeMap<(usize, usize), T> = BTreeMap::new();
        for domains in self.user_adjacency() {
            for (a, &(di, wi)) in domains.iter().enumerate() {
                for &(dj, wj) in &domains[a + 1..] {
                    *acc.entry((di, dj)).or_insert_with(T::zero) += wi.min(wj);
                }
            }
        }
        let edges = acc
            .into_iter()
            .filter(|&(_, w)| w > T::zero())
            .map(|((i, j), w)| (i, j, w))
            .collect();
        DomainGraph { domain_count: self.domain_count, edges }
    }

    /// Sample positive pairs uniformly without replacement from the edges and
    /// `ceil(negative_ratio * positives)` negative pairs uniformly without
    /// replacement from the non-edges. Deterministic for a given seed.
    pub fn sample_pairs(
        &self,
        positives_per_epoch: usize,
        negative_ratio: f64,
        rng_seed: u64,
    ) -> Result<PairBatch, GraphError> {
        if self.user_count == 0 || self.domain_count == 0 {
            return Err(GraphError::EmptySide);
        }
        if self.edges.is_empty() {
            return Err(GraphError::NoEdges);
        }
        let total = self.user_count * self.domain_count;
        let non_edges = total - self.edges.len();
        if non_edges == 0 {
            return Err(GraphError::NoNonEdges);
        }

        let mut rng = rng::seeded(rng_seed);
        let n_pos = positives_per_epoch.min(self.edges.len());
        let mut pairs = Vec::with_capacity(n_pos * 2);

        // Partial Fisher-Yates over edge indices.
        let mut idx: Vec<usize> = (0..self.edges.len()).collect();
        for i in 0..n_pos {
            let j = rand::Rng::random_range(&mut rng, i..idx.len());
            idx.swap(i, j);
            let (u, d, _) = self.edges[idx[i]];
            pairs.push(PairSample { user: u, domain: d, connected: true });
        }

        let n_neg = (negative_ratio * n_pos as f64).ceil() as usize;
        if n_neg > non_edges {
            return Err(GraphError::NotEnoughNonEdges { requested: n_neg, available: non_edges });
        }
        let mut seen = std::collections::HashSet::with_capacity(n_neg);
        while seen.len() < n_neg {
            let u = rand::Rng::random_range(&mut rng, 0..self.user_count);
            let d = rand::Rng::random_range(&mut rng, 0..self.domain_count);
            if !self.has_edge(u, d) && seen.insert((u, d)) {
                pairs.push(PairSample { user: u, domain: d, connected: false });
            }
        }
        Ok(PairBatch { pairs })
    }
}

/// Undirected weighted domain-domain graph; edges stored with `i < j`, sorted.
#[derive(Clone, Debug, PartialEq)]
pub struct DomainGraph<T> {
    domain_count: usize,
    edges: Vec<(usize, usize, T)>,
}

impl<T: Real> DomainGraph<T> {
    /// Normalizes each pair to `i < j`, drops zero weights, sorts, and rejects
    /// self-loops, duplicates, and invalid weights.
    pub fn new(
        domain_count: usize,
        edges: Vec<(usize, usize, T)>,
    ) -> Result<Self, GraphError> {
        let mut kept = Vec::with_capacity(edges.len());
        for (a, b, w) in edges {
            if a == b {
                return Err(GraphError::SelfLoop(a));
            }
            let (i, j) = if a < b { (a, b) } else { (b, a) };
            if j >= domain_count {
                return Err(GraphError::DomainOutOfRange { index: j, count: domain_count });
            }
            if !w.is_finite() || w < T::zero() {
                return Err(GraphError::BadWeight(w.as_f64()));
            }
            if w > T::zero() {
                kept.push((i, j, w));
            }
        }
        kept.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        for pair in kept.windows(2) {
            if pair[0].0 == pair[1].0 && pair[0].1 == pair[1].1 {
                return Err(GraphError::DuplicatePair { i: pair[0].0, j: pair[0].1 });
            }
        }
        Ok(Self { domain_count, edges: kept })
    }

    pub fn domain_count(&self) -> usize {
        self.domain_count
    }

    pub fn edges(&self) -> &[(usize, usize, T)] {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    /// Symmetric adjacency: for each domain the list of (neighbor, weight).
    pub fn adjacency(&self) -> Vec<Vec<(usize, T)>> {
        let mut adj = vec![Vec::new(); self.domain_count];
        for &(i, j, w) in &self.edges {
            adj[i].push((j, w));
            adj[j].push((i, w));
        }
        adj
    }

    /// Partition the edges by endpoint label status: both labeled, exactly one
    /// labeled, both unlabeled.
    pub fn classify_edge_pairs(&self, labeled_mask: &[bool]) -> Result<EdgeClasses<T>, GraphError> {
        if labeled_mask.len() != self.domain_count {
            return Err(GraphError::MaskLength {
                expected: self.domain_count,
                got: labeled_mask.len(),
            });
        }
        let mut classes = EdgeClasses::default();
        for &(i, j, w) in &self.edges {
            match (labeled_mask[i], labeled_mask[j]) {
                (true, true) => classes.labeled_labeled.push((i, j, w)),
                (false, false) => classes.unlabeled_unlabeled.push((i, j, w)),
                _ => classes.labeled_unlabeled.push((i, j, w)),
            }
        }
        Ok(classes)
    }
}

/// Edge partition by endpoint label status.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct EdgeClasses<T> {
    pub labeled_labeled: Vec<(usize, usize, T)>,
    pub labeled_unlabeled: Vec<(usize, usize, T)>,
    pub unlabeled_unlabeled: Vec<(usize, usize, T)>,
}

/// One sampled training pair. `connected` is true iff the pair is an edge of
/// the graph it was sampled from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PairSample {
    pub user: usize,
    pub domain: usize,
    pub connected: bool,
}

/// A batch of sampled user-domain pairs, positives first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairBatch {
    pub pairs: Vec<PairSample>,
}

impl PairBatch {
    pub fn positives(&self) -> usize {
        self.pairs.iter().filter(|p| p.connected).count()
    }

    pub fn negatives(&self) -> usize {
        self.pairs.len() - self.positives()
    }
}

/// Shuffle the samples of a batch in place, deterministically per seed.
pub fn shuffle_pairs(batch: &mut PairBatch, seed: u64) {
    use rand::seq::SliceRandom;
    let mut rng = rng::seeded(seed);
    batch.pairs.shuffle(&mut rng);
}
