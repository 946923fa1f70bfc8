//! Ranked search results and top-k comparison.

use std::cmp::Ordering;

use crate::graph::NodeId;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankedTarget {
    pub node: NodeId,
    /// Estimated score, or a sample count for sampling-based methods.
    pub score: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchStatus {
    Complete,
    /// A walk or sample budget ran out before the requested amount of signal.
    Truncated,
    /// Nothing in the target set was reached.
    NoSignal,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ranking {
    pub entries: Vec<RankedTarget>,
    pub status: SearchStatus,
}

impl Ranking {
    /// Sorts by score descending, ties by ascending node id.
    pub fn from_scores(scores: impl IntoIterator<Item = (NodeId, f64)>, status: SearchStatus) -> Self {
        let mut entries: Vec<RankedTarget> = scores
            .into_iter()
            .map(|(node, score)| RankedTarget { node, score })
            .collect();
        entries.sort_by(compare_ranked);
        Self { entries, status }
    }

    pub fn empty(status: SearchStatus) -> Self {
        Self {
            entries: Vec::new(),
            status,
        }
    }

    pub fn top_k(&self, k: usize) -> Vec<NodeId> {
        self.entries.iter().take(k).map(|e| e.node).collect()
    }

    pub fn score_of(&self, node: NodeId) -> Option<f64> {
        self.entries.iter().find(|e| e.node == node).map(|e| e.score)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

pub(crate) fn compare_ranked(a: &RankedTarget, b: &RankedTarget) -> Ordering {
    b.score.total_cmp(&a.score).then_with(|| a.node.cmp(&b.node))
}

/// Fraction of `found`'s first `k` entries that appear in `exact`'s first `k`.
pub fn precision_at_k(found: &[NodeId], exact: &[NodeId], k: usize) -> f64 {
    if k == 0 {
        return 1.0;
    }
    let exact = &exact[..k.min(exact.len())];
    let hits = found
        .iter()
        .take(k)
        .filter(|node| exact.contains(node))
        .count();
    hits as f64 / k as f64
}

/// Like [`precision_at_k`], but a found target also counts when its exact
/// score ties the exact `k`-th score, so precision does not depend on how
/// the exact ranking broke ties.
pub fn precision_at_k_tied(found: &[NodeId], exact: &Ranking, k: usize) -> f64 {
    let k = k.min(exact.len());
    if k == 0 {
        return 1.0;
    }
    let kth = exact.entries[k - 1].score;
    let hits = found
        .iter()
        .take(k)
        .filter(|&&node| exact.score_of(node).is_some_and(|s| s >= kth))
        .count();
    hits as f64 / k as f64
}
