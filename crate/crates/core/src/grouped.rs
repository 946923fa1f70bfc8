//! Reverse vectors for a target set regrouped by coordinate.
//!
//! Conceptually this is the sparse-column form of the matrix whose rows are
//! `y^t = (p^t, r^t)`: for every coordinate `v ∈ [0, 2n)` it stores the
//! targets with `y^t[v] > 0`. Coordinates below `n` address the estimate
//! block, coordinates `n + u` the residual at `u`. A query then only touches
//! the groups of coordinates where the forward vector is nonzero.

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId, SourceDistribution};
use crate::ranking::{Ranking, SearchStatus};
use crate::reverse_push::{approx_contributions_many, ReverseVector, DEFAULT_PUSH_BUDGET};
use crate::rng::PprRng;
use crate::sparse::SparseVec;
use crate::walks::{forward_vector, ForwardVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BuildOptions {
    pub parallel: bool,
    pub push_budget: u64,
}

impl BuildOptions {
    pub fn new() -> Self {
        Self {
            parallel: false,
            push_budget: DEFAULT_PUSH_BUDGET,
        }
    }

    pub fn parallel(mut self, parallel: bool) -> Self {
        self.parallel = parallel;
        self
    }
}

/// Push statistics kept per target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetStats {
    pub target: NodeId,
    pub push_count: u64,
    pub touched_mass: u64,
    pub r_max_achieved: f64,
    /// Nonzero entries of `y^t`.
    pub nnz: u64,
}

impl TargetStats {
    pub(crate) fn of(y: &ReverseVector) -> Self {
        Self {
            target: y.target,
            push_count: y.push_count,
            touched_mass: y.touched_mass,
            r_max_achieved: y.r_max_achieved,
            nnz: y.nnz() as u64,
        }
    }
}

/// Sorts and dedups a target list, checking ids against the graph.
pub(crate) fn normalize_targets(g: &Graph, targets: &[NodeId]) -> Result<Vec<NodeId>> {
    if targets.is_empty() {
        return Err(Error::param("target set must be nonempty"));
    }
    let mut sorted = targets.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    for &t in &sorted {
        g.check_node(t)?;
    }
    Ok(sorted)
}

/// Column-major storage shared by the grouped and sampler indices: for each
/// coordinate, the targets (as positions in the sorted target list) and
/// their `y^t[v]` values, ordered by target.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct CoordinateGroups {
    pub coords: Vec<u64>,
    pub offsets: Vec<usize>,
    pub slots: Vec<u32>,
    pub values: Vec<f64>,
}

impl CoordinateGroups {
    pub fn from_rows(n: usize, rows: &[ReverseVector]) -> Self {
        let mut triples: Vec<(u64, u32, f64)> = Vec::new();
        for (slot, y) in rows.iter().enumerate() {
            let slot = slot as u32;
            triples.extend(y.estimates.iter().map(|(v, x)| (v as u64, slot, x)));
            triples.extend(y.residuals.iter().map(|(v, x)| (n as u64 + v as u64, slot, x)));
        }
        triples.sort_unstable_by_key(|&(c, s, _)| (c, s));
        let mut groups = Self {
            coords: Vec::new(),
            offsets: vec![0],
            slots: Vec::with_capacity(triples.len()),
            values: Vec::with_capacity(triples.len()),
        };
        for (c, s, x) in triples {
            if groups.coords.last() != Some(&c) {
                if !groups.coords.is_empty() {
                    groups.offsets.push(groups.slots.len());
                }
                groups.coords.push(c);
            }
            groups.slots.push(s);
            groups.values.push(x);
        }
        if !groups.coords.is_empty() {
            groups.offsets.push(groups.slots.len());
        }
        groups
    }

    pub fn validate(&self, n: usize, targets: usize) -> Result<()> {
        let ok = self.offsets.len() == self.coords.len() + 1
            && self.offsets.first() == Some(&0)
            && self.offsets.last() == Some(&self.slots.len())
            && self.slots.len() == self.values.len()
            && self.offsets.windows(2).all(|w| w[0] < w[1])
            && self.coords.windows(2).all(|w| w[0] < w[1])
            && self.coords.last().is_none_or(|&c| c < 2 * n as u64)
            && self.slots.iter().all(|&s| (s as usize) < targets)
            && self.values.iter().all(|&x| x > 0.0 && x.is_finite())
            && (0..self.coords.len()).all(|i| {
                self.slots[self.offsets[i]..self.offsets[i + 1]]
                    .windows(2)
                    .all(|w| w[0] < w[1])
            });
        if ok {
            Ok(())
        } else {
            Err(Error::Format("inconsistent coordinate groups".into()))
        }
    }

    /// Group position of coordinate `c`.
    #[inline]
    pub fn find(&self, c: u64) -> Option<usize> {
        self.coords.binary_search(&c).ok()
    }

    #[inline]
    pub fn group(&self, i: usize) -> (&[u32], &[f64]) {
        let range = self.offsets[i]..self.offsets[i + 1];
        (&self.slots[range.clone()], &self.values[range])
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    /// Scores every target slot against `x`. The estimate block and the
    /// walk block get separate accumulators, each filled in ascending
    /// coordinate order, so the result matches a row-wise dot product bit
    /// for bit.
    pub fn score(&self, n: usize, targets: usize, x: &ForwardVector) -> (Vec<f64>, u64) {
        let mut p_acc = vec![0.0; targets];
        let mut r_acc = vec![0.0; targets];
        let mut visited = 0u64;
        for (c, xv) in x.coordinates(n) {
            let Some(i) = self.find(c) else { continue };
            let (slots, values) = self.group(i);
            visited += slots.len() as u64;
            let acc = if c < n as u64 { &mut p_acc } else { &mut r_acc };
            for (&s, &z) in slots.iter().zip(values) {
                acc[s as usize] += xv * z;
            }
        }
        let scores = p_acc.iter().zip(&r_acc).map(|(p, r)| p + r).collect();
        (scores, visited)
    }

    /// Rebuilds each target's `(p, r)` pair.
    pub fn rows(&self, n: usize, targets: usize) -> Vec<(SparseVec, SparseVec)> {
        let mut p: Vec<Vec<(NodeId, f64)>> = vec![Vec::new(); targets];
        let mut r: Vec<Vec<(NodeId, f64)>> = vec![Vec::new(); targets];
        for i in 0..self.coords.len() {
            let c = self.coords[i];
            let (slots, values) = self.group(i);
            for (&s, &x) in slots.iter().zip(values) {
                if c < n as u64 {
                    p[s as usize].push((c as NodeId, x));
                } else {
                    r[s as usize].push(((c - n as u64) as NodeId, x));
                }
            }
        }
        p.into_iter()
            .zip(r)
            .map(|(p, r)| (SparseVec::from_sorted_unchecked(p), SparseVec::from_sorted_unchecked(r)))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupedIndex {
    pub(crate) n: usize,
    pub(crate) alpha: f64,
    pub(crate) r_max: f64,
    pub(crate) targets: Vec<NodeId>,
    pub(crate) stats: Vec<TargetStats>,
    pub(crate) groups: CoordinateGroups,
}

impl GroupedIndex {
    pub fn from_reverse_vectors(n: usize, alpha: f64, r_max: f64, mut rows: Vec<ReverseVector>) -> Result<Self> {
        rows.sort_by_key(|y| y.target);
        if rows.is_empty() || rows.windows(2).any(|w| w[0].target == w[1].target) {
            return Err(Error::param("reverse vectors must cover distinct targets"));
        }
        let groups = CoordinateGroups::from_rows(n, &rows);
        Ok(Self {
            n,
            alpha,
            r_max,
            targets: rows.iter().map(|y| y.target).collect(),
            stats: rows.iter().map(TargetStats::of).collect(),
            groups,
        })
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn targets(&self) -> &[NodeId] {
        &self.targets
    }

    pub fn stats(&self) -> &[TargetStats] {
        &self.stats
    }

    /// Number of stored `z[v][t]` entries.
    pub fn stored_entries(&self) -> usize {
        self.groups.values.len()
    }

    pub fn coordinate_count(&self) -> usize {
        self.groups.len()
    }

    /// Targets and values stored under coordinate `v`, ordered by target.
    pub fn group(&self, v: u64) -> Vec<(NodeId, f64)> {
        match self.groups.find(v) {
            None => Vec::new(),
            Some(i) => {
                let (slots, values) = self.groups.group(i);
                slots
                    .iter()
                    .zip(values)
                    .map(|(&s, &x)| (self.targets[s as usize], x))
                    .collect()
            }
        }
    }

    /// Reassembles `y^t` for every target, in target order.
    pub fn reverse_rows(&self) -> Vec<(NodeId, SparseVec, SparseVec)> {
        self.groups
            .rows(self.n, self.targets.len())
            .into_iter()
            .zip(&self.targets)
            .map(|((p, r), &t)| (t, p, r))
            .collect()
    }

    /// Per-target scores `⟨x_s, y^t⟩` for targets in sorted order, plus the
    /// number of group entries visited.
    pub fn score(&self, x: &ForwardVector) -> (Vec<f64>, u64) {
        self.groups.score(self.n, self.targets.len(), x)
    }
}

/// Precomputes `y^t` for every `t ∈ T` and groups them by coordinate.
pub fn build_grouped(g: &Graph, alpha: f64, targets: &[NodeId], r_max: f64) -> Result<GroupedIndex> {
    build_grouped_with(g, alpha, targets, r_max, BuildOptions::new())
}

pub fn build_grouped_with(
    g: &Graph,
    alpha: f64,
    targets: &[NodeId],
    r_max: f64,
    options: BuildOptions,
) -> Result<GroupedIndex> {
    let targets = normalize_targets(g, targets)?;
    let rows = approx_contributions_many(g, alpha, &targets, r_max, options.push_budget, options.parallel)?;
    GroupedIndex::from_reverse_vectors(g.node_count(), alpha, r_max, rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupedQuery {
    pub ranking: Ranking,
    pub forward: ForwardVector,
    /// Group entries touched while scoring.
    pub entries_visited: u64,
}

/// Samples `w` walks and scores every target through the grouped index.
pub fn rank_targets_grouped(
    g: &Graph,
    alpha: f64,
    source: &SourceDistribution,
    index: &GroupedIndex,
    w: u64,
    rng: &mut PprRng,
) -> Result<GroupedQuery> {
    if g.node_count() != index.n {
        return Err(Error::DimensionMismatch(format!(
            "index built for {} nodes, graph has {}",
            index.n,
            g.node_count()
        )));
    }
    let forward = forward_vector(g, alpha, source, w, rng)?;
    Ok(rank_with_forward(index, forward))
}

/// Scores a prebuilt forward vector against the index.
pub fn rank_with_forward(index: &GroupedIndex, forward: ForwardVector) -> GroupedQuery {
    let (scores, entries_visited) = index.score(&forward);
    let ranking = Ranking::from_scores(
        index.targets.iter().copied().zip(scores),
        SearchStatus::Complete,
    );
    GroupedQuery {
        ranking,
        forward,
        entries_visited,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bidirectional::estimate_from_vectors;
    use crate::graph::{generate_synthetic, SyntheticModel};
    use crate::reverse_push::approx_contributions;

    fn two_cycle() -> Graph {
        Graph::from_edges(2, &[(0, 1), (1, 0)]).unwrap()
    }

    #[test]
    fn single_target_is_its_reverse_vector() {
        let g = generate_synthetic(30, SyntheticModel::ErdosRenyi { p: 0.1 }, 1).unwrap();
        let y = approx_contributions(&g, 0.2, 4, 0.01).unwrap();
        let idx = build_grouped(&g, 0.2, &[4], 0.01).unwrap();
        assert_eq!(idx.stored_entries(), y.nnz());
        let rows = idx.reverse_rows();
        assert_eq!(rows.len(), 1);
        assert_eq!(rows[0].1, y.estimates);
        assert_eq!(rows[0].2, y.residuals);
    }

    #[test]
    fn two_cycle_groups() {
        let idx = build_grouped(&two_cycle(), 0.2, &[1], 0.3).unwrap();
        assert_eq!(idx.coordinate_count(), 3);
        let z0 = idx.group(0);
        let z1 = idx.group(1);
        let z3 = idx.group(3);
        assert_eq!(z0.len(), 1);
        assert!((z0[0].1 - 0.327936).abs() < 1e-12 && z0[0].0 == 1);
        assert!((z1[0].1 - 0.40992).abs() < 1e-12 && z1[0].0 == 1);
        assert!((z3[0].1 - 0.262144).abs() < 1e-12 && z3[0].0 == 1);
        assert!(idx.group(2).is_empty());
    }

    #[test]
    fn disjoint_supports_do_not_share_coordinates() {
        let g = Graph::from_edges(4, &[(0, 1), (1, 0), (2, 3), (3, 2)]).unwrap();
        let idx = build_grouped(&g, 0.2, &[1, 3], 0.05).unwrap();
        for c in 0..8 {
            assert!(idx.group(c).len() <= 1);
        }
    }

    #[test]
    fn unmatched_forward_vector_scores_zero() {
        let g = Graph::from_edges(4, &[(0, 1), (1, 0), (2, 3), (3, 2)]).unwrap();
        let idx = build_grouped(&g, 0.2, &[3, 2], 0.05).unwrap();
        let x = ForwardVector::from_counts(SourceDistribution::node(0), 5, vec![(0, 2), (1, 3)]).unwrap();
        let q = rank_with_forward(&idx, x);
        assert_eq!(q.ranking.top_k(2), vec![2, 3]);
        assert!(q.ranking.entries.iter().all(|e| e.score == 0.0));
        assert_eq!(q.entries_visited, 0);
    }

    #[test]
    fn grouped_scores_equal_row_dot_products() {
        let g = generate_synthetic(80, SyntheticModel::ErdosRenyi { p: 0.06 }, 2).unwrap();
        let targets = [3, 17, 40, 41, 79];
        let idx = build_grouped(&g, 0.2, &targets, 0.005).unwrap();
        let src = SourceDistribution::distribution(vec![(1, 0.5), (17, 0.5)]).unwrap();
        let q = rank_targets_grouped(&g, 0.2, &src, &idx, 2000, &mut PprRng::seed_from_u64(3)).unwrap();
        let mut expected_visits = 0;
        for (c, _) in q.forward.coordinates(80) {
            expected_visits += idx.group(c).len() as u64;
        }
        assert_eq!(q.entries_visited, expected_visits);
        for &t in &targets {
            let y = approx_contributions(&g, 0.2, t, 0.005).unwrap();
            let row = estimate_from_vectors(&q.forward, &y);
            assert_eq!(q.ranking.score_of(t).unwrap().to_bits(), row.to_bits());
        }
    }

    #[test]
    fn parallel_build_matches_serial() {
        let g = generate_synthetic(100, SyntheticModel::ErdosRenyi { p: 0.05 }, 4).unwrap();
        let targets: Vec<NodeId> = (0..100).step_by(7).collect();
        let a = build_grouped_with(&g, 0.2, &targets, 0.002, BuildOptions::new()).unwrap();
        let b = build_grouped_with(&g, 0.2, &targets, 0.002, BuildOptions::new().parallel(true)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn budget_error_names_target() {
        let g = generate_synthetic(50, SyntheticModel::ErdosRenyi { p: 0.1 }, 5).unwrap();
        let opts = BuildOptions {
            parallel: false,
            push_budget: 3,
        };
        let err = build_grouped_with(&g, 0.2, &[9, 2], 1e-6, opts).unwrap_err();
        assert!(matches!(err, Error::BudgetExceeded { target: 2, .. }));
    }
}
