use crate::graph::NodeId;

/// Sparse vector stored as `(index, value)` pairs sorted by index.
///
/// Zero entries are never stored.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SparseVec {
    entries: Vec<(NodeId, f64)>,
}

impl SparseVec {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds from pairs that may be unsorted; zeros are dropped and
    /// duplicate indices summed.
    pub fn from_pairs(mut pairs: Vec<(NodeId, f64)>) -> Self {
        pairs.sort_by_key(|&(i, _)| i);
        let mut entries: Vec<(NodeId, f64)> = Vec::with_capacity(pairs.len());
        for (i, v) in pairs {
            match entries.last_mut() {
                Some(last) if last.0 == i => last.1 += v,
                _ => entries.push((i, v)),
            }
        }
        entries.retain(|&(_, v)| v != 0.0);
        Self { entries }
    }

    /// Builds from a dense slice, keeping the nonzero entries.
    pub fn from_dense(dense: &[f64]) -> Self {
        Self {
            entries: dense
                .iter()
                .enumerate()
                .filter(|(_, &v)| v != 0.0)
                .map(|(i, &v)| (i as NodeId, v))
                .collect(),
        }
    }

    /// `entries` must already be sorted by index with no zeros or repeats.
    pub(crate) fn from_sorted_unchecked(entries: Vec<(NodeId, f64)>) -> Self {
        debug_assert!(entries.windows(2).all(|w| w[0].0 < w[1].0));
        debug_assert!(entries.iter().all(|&(_, v)| v != 0.0));
        Self { entries }
    }

    pub fn get(&self, index: NodeId) -> f64 {
        match self.entries.binary_search_by_key(&index, |&(i, _)| i) {
            Ok(pos) => self.entries[pos].1,
            Err(_) => 0.0,
        }
    }

    pub fn entries(&self) -> &[(NodeId, f64)] {
        &self.entries
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeId, f64)> + '_ {
        self.entries.iter().copied()
    }

    pub fn nnz(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn sum(&self) -> f64 {
        self.entries.iter().map(|&(_, v)| v).sum()
    }

    pub fn max_value(&self) -> f64 {
        self.entries.iter().map(|&(_, v)| v).fold(0.0, f64::max)
    }

    pub fn to_dense(&self, len: usize) -> Vec<f64> {
        let mut out = vec![0.0; len];
        for &(i, v) in &self.entries {
            out[i as usize] = v;
        }
        out
    }
}
