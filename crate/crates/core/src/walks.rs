//! Geometric-length random walks, forward vectors and the Monte-Carlo search
//! baseline.
//!
//! A walk stops at its current node with probability `α` before every step,
//! so the start is also the endpoint with probability `α`. Endpoints are then
//! distributed exactly as `π_σ`.

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId, SourceDistribution};
use crate::ranking::{Ranking, SearchStatus};
use crate::reverse_push::check_alpha;
use crate::rng::PprRng;
use crate::sparse::SparseVec;

#[inline]
pub(crate) fn walk_from(g: &Graph, alpha: f64, start: NodeId, rng: &mut PprRng) -> (NodeId, u32) {
    let mut v = start;
    let mut steps = 0;
    while !rng.chance(alpha) {
        v = g.step(v, rng.unit());
        steps += 1;
    }
    (v, steps)
}

/// Endpoint of one walk from a start drawn from `source`.
pub fn sample_walk(
    g: &Graph,
    alpha: f64,
    source: &SourceDistribution,
    rng: &mut PprRng,
) -> NodeId {
    let start = source.draw(rng);
    walk_from(g, alpha, start, rng).0
}

/// `x_s = (σ, π̃_s)`: the source block plus the empirical endpoint
/// distribution of `w` walks.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardVector {
    pub source: SourceDistribution,
    pub walks: u64,
    /// `(node, count)` sorted by node.
    pub endpoint_counts: Vec<(NodeId, u64)>,
    /// `count / walks` for each endpoint, same order.
    endpoint_freq: SparseVec,
}

impl ForwardVector {
    pub fn from_counts(
        source: SourceDistribution,
        walks: u64,
        endpoint_counts: Vec<(NodeId, u64)>,
    ) -> Result<Self> {
        let total: u64 = endpoint_counts.iter().map(|&(_, c)| c).sum();
        if walks == 0 || total != walks {
            return Err(Error::param(format!(
                "endpoint counts sum to {total}, expected {walks} walks"
            )));
        }
        let freq = SparseVec::from_pairs(
            endpoint_counts
                .iter()
                .map(|&(v, c)| (v, c as f64 / walks as f64))
                .collect(),
        );
        if freq.nnz() != endpoint_counts.len() {
            return Err(Error::param("endpoint counts must be positive and unique"));
        }
        Ok(Self {
            source,
            walks,
            endpoint_counts,
            endpoint_freq: freq,
        })
    }

    /// First block of `x_s`.
    pub fn source_block(&self) -> &SparseVec {
        self.source.support()
    }

    /// Second block of `x_s`, `π̃_s`.
    pub fn endpoint_distribution(&self) -> &SparseVec {
        &self.endpoint_freq
    }

    /// Nonzero coordinates of `x_s` in `[0, 2n)`, ascending.
    pub fn coordinates(&self, n: usize) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.source_block()
            .iter()
            .map(|(v, x)| (v as u64, x))
            .chain(self.endpoint_freq.iter().map(move |(v, x)| (n as u64 + v as u64, x)))
    }
}

/// Samples `w` walks from `source` and records their endpoints.
pub fn forward_vector(
    g: &Graph,
    alpha: f64,
    source: &SourceDistribution,
    w: u64,
    rng: &mut PprRng,
) -> Result<ForwardVector> {
    check_alpha(alpha)?;
    source.validate(g)?;
    if w == 0 {
        return Err(Error::param("forward vector needs at least one walk"));
    }
    let mut ends: Vec<NodeId> = (0..w).map(|_| sample_walk(g, alpha, source, rng)).collect();
    ends.sort_unstable();
    let mut counts: Vec<(NodeId, u64)> = Vec::new();
    for v in ends {
        match counts.last_mut() {
            Some(last) if last.0 == v => last.1 += 1,
            _ => counts.push((v, 1)),
        }
    }
    ForwardVector::from_counts(source.clone(), w, counts)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonteCarloSearch {
    /// Every target, ranked by hit count.
    pub ranking: Ranking,
    pub hits: u64,
    pub walks: u64,
}

/// Samples walks until `n_samples` of them end in `targets` or `max_walks`
/// walks have been taken; targets are ranked by hit count.
pub fn monte_carlo_search(
    g: &Graph,
    alpha: f64,
    source: &SourceDistribution,
    targets: &[NodeId],
    n_samples: u64,
    max_walks: u64,
    rng: &mut PprRng,
) -> Result<MonteCarloSearch> {
    check_alpha(alpha)?;
    source.validate(g)?;
    if targets.is_empty() {
        return Err(Error::param("target set must be nonempty"));
    }
    let mut sorted = targets.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    for &t in &sorted {
        g.check_node(t)?;
    }
    let mut counts = vec![0u64; sorted.len()];
    let mut hits = 0;
    let mut walks = 0;
    while hits < n_samples && walks < max_walks {
        let end = sample_walk(g, alpha, source, rng);
        walks += 1;
        if let Ok(i) = sorted.binary_search(&end) {
            counts[i] += 1;
            hits += 1;
        }
    }
    let status = if hits < n_samples {
        SearchStatus::Truncated
    } else {
        SearchStatus::Complete
    };
    let ranking = Ranking::from_scores(
        sorted.iter().zip(&counts).map(|(&t, &c)| (t, c as f64)),
        status,
    );
    Ok(MonteCarloSearch {
        ranking,
        hits,
        walks,
    })
}
