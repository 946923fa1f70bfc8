//! Exact PPR by power iteration, used as ground truth.
//!
//! Iterates `π ← ασ + (1 − α)πW` from `π⁰ = σ`; the map is a contraction
//! with rate `1 − α` in L1, so convergence is geometric. Dense vectors only:
//! graphs above [`ORACLE_MAX_NODES`] are refused.

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId, SourceDistribution};
use crate::ranking::{Ranking, SearchStatus};
use crate::reverse_push::check_alpha;

pub const ORACLE_MAX_NODES: usize = 100_000;

pub const DEFAULT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct ExactPpr {
    pub source: SourceDistribution,
    pub scores: Vec<f64>,
    pub iterations: usize,
    /// L1 change of the final iteration.
    pub residual_norm: f64,
}

impl ExactPpr {
    pub fn get(&self, v: NodeId) -> f64 {
        self.scores[v as usize]
    }

    /// Sum of scores over `targets`.
    pub fn mass(&self, targets: &[NodeId]) -> f64 {
        targets.iter().map(|&t| self.scores[t as usize]).sum()
    }
}

/// Upper bound on iterations for tolerance `tol`: the k-th L1 change is at
/// most `2(1 − α)^k`.
pub fn iteration_bound(alpha: f64, tol: f64) -> usize {
    ((2.0 / tol).ln() / (1.0 / (1.0 - alpha)).ln()).ceil() as usize + 1
}

pub fn exact_ppr(g: &Graph, alpha: f64, source: &SourceDistribution, tol: f64) -> Result<ExactPpr> {
    source.validate(g)?;
    let sigma = source.support().to_dense(g.node_count());
    let (scores, iterations, residual_norm) = power_iterate(g, alpha, &sigma, tol)?;
    Ok(ExactPpr {
        source: source.clone(),
        scores,
        iterations,
        residual_norm,
    })
}

/// Global PageRank: PPR from the uniform distribution.
pub fn global_pagerank(g: &Graph, alpha: f64, tol: f64) -> Result<Vec<f64>> {
    let n = g.node_count();
    let sigma = vec![1.0 / n as f64; n];
    Ok(power_iterate(g, alpha, &sigma, tol)?.0)
}

/// Row `s` holds `π_s` for every node `s`.
pub fn all_pairs_ppr(g: &Graph, alpha: f64, tol: f64) -> Result<Vec<Vec<f64>>> {
    (0..g.node_count() as NodeId)
        .map(|s| Ok(exact_ppr(g, alpha, &SourceDistribution::node(s), tol)?.scores))
        .collect()
}

fn power_iterate(g: &Graph, alpha: f64, sigma: &[f64], tol: f64) -> Result<(Vec<f64>, usize, f64)> {
    check_alpha(alpha)?;
    if !(tol > 0.0) {
        return Err(Error::param("oracle tolerance must be positive"));
    }
    let n = g.node_count();
    if n > ORACLE_MAX_NODES {
        return Err(Error::OracleTooLarge {
            n,
            cap: ORACLE_MAX_NODES,
        });
    }
    let max_iter = iteration_bound(alpha, tol) + 8;
    let mut current = sigma.to_vec();
    let mut next = vec![0.0; n];
    let mut change = f64::INFINITY;
    let mut iterations = 0;
    while change >= tol && iterations < max_iter {
        for (slot, &s) in next.iter_mut().zip(sigma) {
            *slot = alpha * s;
        }
        for u in 0..n {
            let mass = (1.0 - alpha) * current[u];
            if mass == 0.0 {
                continue;
            }
            for (v, w) in g.out_edges(u as NodeId) {
                next[v as usize] += mass * w;
            }
        }
        change = current.iter().zip(&next).map(|(a, b)| (a - b).abs()).sum();
        std::mem::swap(&mut current, &mut next);
        iterations += 1;
    }
    Ok((current, iterations, change))
}

/// Exact top-`k` of `targets` by `π_s`, ties by ascending node id.
pub fn exact_top_k(
    g: &Graph,
    alpha: f64,
    source: &SourceDistribution,
    targets: &[NodeId],
    k: usize,
) -> Result<Ranking> {
    let exact = exact_ppr(g, alpha, source, DEFAULT_TOLERANCE)?;
    rank_exact(&exact, targets, k)
}

/// Top-`k` of `targets` from an already computed exact vector.
pub fn rank_exact(exact: &ExactPpr, targets: &[NodeId], k: usize) -> Result<Ranking> {
    let mut sorted = targets.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if k > sorted.len() {
        return Err(Error::param(format!(
            "k = {k} exceeds target set size {}",
            sorted.len()
        )));
    }
    for &t in &sorted {
        if t as usize >= exact.scores.len() {
            return Err(Error::param(format!("target {t} out of range")));
        }
    }
    let mut ranking = Ranking::from_scores(
        sorted.iter().map(|&t| (t, exact.get(t))),
        SearchStatus::Complete,
    );
    ranking.entries.truncate(k);
    Ok(ranking)
}
