//! Hierarchical sampling of targets in proportion to their estimated PPR.
//!
//! The index stores, for every coordinate `v` of the reverse vectors, the
//! aggregate `y^T[v] = Σ_t y^t[v]` and an alias table over the targets with
//! `y^t[v] > 0`. A query builds a forward vector `x_s`, an alias table over
//! coordinates weighted by `x_s[v] · y^T[v]`, and then draws a coordinate
//! followed by a target. The marginal probability of drawing `t` is
//! `⟨x_s, y^t⟩ / Σ_j ⟨x_s, y^j⟩`.

mod adaptive;
mod alias;

pub use adaptive::{adaptive_r_max, power_law_delta, walk_constant};
pub use alias::{build_alias, AliasTable};

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId, SourceDistribution};
use crate::grouped::{build_grouped_with, BuildOptions, GroupedIndex, TargetStats};
use crate::ranking::{Ranking, SearchStatus};
use crate::reverse_push::ReverseVector;
use crate::rng::PprRng;
use crate::walks::{forward_vector, ForwardVector};

#[derive(Debug, Clone, PartialEq)]
pub struct SamplerIndex {
    pub(crate) grouped: GroupedIndex,
    /// `y^T[v]` for each stored coordinate, in group order.
    pub(crate) aggregate: Vec<f64>,
    pub(crate) samplers: Vec<AliasTable>,
}

impl SamplerIndex {
    /// Derives the aggregate vector and the per-coordinate alias tables from
    /// the grouped storage.
    pub fn from_grouped(grouped: GroupedIndex) -> Result<Self> {
        let mut aggregate = Vec::with_capacity(grouped.groups.len());
        let mut samplers = Vec::with_capacity(grouped.groups.len());
        for i in 0..grouped.groups.len() {
            let (_, values) = grouped.groups.group(i);
            let table = AliasTable::new(values)?;
            aggregate.push(table.total_weight());
            samplers.push(table);
        }
        Ok(Self {
            grouped,
            aggregate,
            samplers,
        })
    }

    pub fn from_reverse_vectors(n: usize, alpha: f64, r_max: f64, rows: Vec<ReverseVector>) -> Result<Self> {
        Self::from_grouped(GroupedIndex::from_reverse_vectors(n, alpha, r_max, rows)?)
    }

    pub fn grouped(&self) -> &GroupedIndex {
        &self.grouped
    }

    pub fn node_count(&self) -> usize {
        self.grouped.n
    }

    pub fn alpha(&self) -> f64 {
        self.grouped.alpha
    }

    pub fn r_max(&self) -> f64 {
        self.grouped.r_max
    }

    pub fn targets(&self) -> &[NodeId] {
        &self.grouped.targets
    }

    pub fn stats(&self) -> &[TargetStats] {
        &self.grouped.stats
    }

    pub fn stored_entries(&self) -> usize {
        self.grouped.stored_entries()
    }

    /// `y^T` as `(coordinate, value)` pairs, ascending.
    pub fn aggregate(&self) -> impl Iterator<Item = (u64, f64)> + '_ {
        self.grouped.groups.coords.iter().copied().zip(self.aggregate.iter().copied())
    }

    /// `y^T[v]`, zero when no target has weight at `v`.
    pub fn aggregate_at(&self, v: u64) -> f64 {
        self.grouped.groups.find(v).map_or(0.0, |i| self.aggregate[i])
    }

    /// Targets drawable at coordinate `v` with their exact draw
    /// probabilities `p''_v[t]`, as reconstructed from the alias table.
    pub fn conditional(&self, v: u64) -> Vec<(NodeId, f64)> {
        let Some(i) = self.grouped.groups.find(v) else {
            return Vec::new();
        };
        let (slots, _) = self.grouped.groups.group(i);
        slots
            .iter()
            .zip(self.samplers[i].probabilities())
            .map(|(&s, p)| (self.grouped.targets[s as usize], p))
            .collect()
    }

    /// First-stage sampler for a forward vector: stored coordinates where
    /// `x_s` is nonzero, with weights `x_s[v] · y^T[v]`.
    pub fn first_stage(&self, x: &ForwardVector) -> FirstStage {
        let n = self.grouped.n;
        let mut groups = Vec::new();
        let mut weights = Vec::new();
        for (c, xv) in x.coordinates(n) {
            if let Some(i) = self.grouped.groups.find(c) {
                let wv = xv * self.aggregate[i];
                if wv > 0.0 {
                    groups.push(i);
                    weights.push(wv);
                }
            }
        }
        let table = if weights.is_empty() {
            None
        } else {
            AliasTable::new(&weights).ok()
        };
        FirstStage {
            coords: groups.iter().map(|&i| self.grouped.groups.coords[i]).collect(),
            groups,
            weights,
            table,
        }
    }

    /// Exact marginal `Σ_v p'_s[v] · p''_v[t]` of the two-stage draw for
    /// every target, computed from the alias tables a query would use.
    /// Returns `None` when `x_s` has no overlap with the index.
    pub fn two_stage_distribution(&self, x: &ForwardVector) -> Option<Vec<(NodeId, f64)>> {
        let first = self.first_stage(x);
        let table = first.table.as_ref()?;
        let mut p = vec![0.0; self.grouped.targets.len()];
        for (&i, pv) in first.groups.iter().zip(table.probabilities()) {
            let (slots, _) = self.grouped.groups.group(i);
            for (&s, q) in slots.iter().zip(self.samplers[i].probabilities()) {
                p[s as usize] += pv * q;
            }
        }
        Some(self.grouped.targets.iter().copied().zip(p).collect())
    }

    /// Draws `n_samples` targets for a prebuilt forward vector.
    pub fn sample(&self, x: &ForwardVector, n_samples: u64, rng: &mut PprRng) -> Option<Vec<u64>> {
        let first = self.first_stage(x);
        let table = first.table.as_ref()?;
        let mut counts = vec![0u64; self.grouped.targets.len()];
        for _ in 0..n_samples {
            let i = first.groups[table.sample(rng)];
            let j = self.samplers[i].sample(rng);
            let slot = self.grouped.groups.slots[self.grouped.groups.offsets[i] + j];
            counts[slot as usize] += 1;
        }
        Some(counts)
    }
}

/// Query-time distribution over intermediate coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct FirstStage {
    /// Coordinates in `[0, 2n)`, ascending.
    pub coords: Vec<u64>,
    /// Unnormalized weights `x_s[v] · y^T[v]`, aligned with `coords`.
    pub weights: Vec<f64>,
    groups: Vec<usize>,
    table: Option<AliasTable>,
}

impl FirstStage {
    pub fn total_weight(&self) -> f64 {
        self.table.as_ref().map_or(0.0, AliasTable::total_weight)
    }

    pub fn table(&self) -> Option<&AliasTable> {
        self.table.as_ref()
    }
}

pub fn build_sampler_index(g: &Graph, alpha: f64, targets: &[NodeId], r_max: f64) -> Result<SamplerIndex> {
    build_sampler_index_with(g, alpha, targets, r_max, BuildOptions::new())
}

pub fn build_sampler_index_with(
    g: &Graph,
    alpha: f64,
    targets: &[NodeId],
    r_max: f64,
    options: BuildOptions,
) -> Result<SamplerIndex> {
    SamplerIndex::from_grouped(build_grouped_with(g, alpha, targets, r_max, options)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SamplerQuery {
    /// Every target ranked by sample count (as `score`), or an empty
    /// no-signal ranking.
    pub ranking: Ranking,
    pub forward: ForwardVector,
    pub samples: u64,
}

/// Builds `x_s` from `w` walks, then draws `n_samples` targets through the
/// two-stage sampler. Targets never drawn are ranked last with count 0.
pub fn sample_and_rank(
    g: &Graph,
    alpha: f64,
    source: &SourceDistribution,
    index: &SamplerIndex,
    w: u64,
    n_samples: u64,
    rng: &mut PprRng,
) -> Result<SamplerQuery> {
    if g.node_count() != index.node_count() {
        return Err(Error::DimensionMismatch(format!(
            "index built for {} nodes, graph has {}",
            index.node_count(),
            g.node_count()
        )));
    }
    if n_samples == 0 {
        return Err(Error::param("n_samples must be at least 1"));
    }
    let forward = forward_vector(g, alpha, source, w, rng)?;
    Ok(rank_by_sampling(index, forward, n_samples, rng))
}

pub fn rank_by_sampling(index: &SamplerIndex, forward: ForwardVector, n_samples: u64, rng: &mut PprRng) -> SamplerQuery {
    let ranking = match index.sample(&forward, n_samples, rng) {
        None => Ranking::empty(SearchStatus::NoSignal),
        Some(counts) => Ranking::from_scores(
            index.targets().iter().copied().zip(counts.into_iter().map(|c| c as f64)),
            SearchStatus::Complete,
        ),
    };
    SamplerQuery {
        ranking,
        forward,
        samples: n_samples,
    }
}

/// Replaces the counts of the first `k` ranked targets by their exact
/// scores `⟨x_s, y^t⟩` and reorders those `k` entries. The remaining
/// entries keep their sampled order below them.
pub fn rescore_top(index: &SamplerIndex, query: &SamplerQuery, k: usize) -> Ranking {
    if query.ranking.is_empty() {
        return query.ranking.clone();
    }
    let (scores, _) = index.grouped.score(&query.forward);
    let k = k.min(query.ranking.len());
    let head = query.ranking.entries[..k].iter().map(|e| {
        let slot = index.targets().binary_search(&e.node).expect("ranked target is indexed");
        (e.node, scores[slot])
    });
    let mut ranking = Ranking::from_scores(head, query.ranking.status);
    ranking.entries.extend_from_slice(&query.ranking.entries[k..]);
    ranking
}
