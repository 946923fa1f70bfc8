use super::{Graph, NodeId};
use crate::error::{Error, Result};
use crate::rng::PprRng;
use crate::sampler::{build_alias, AliasTable};
use crate::sparse::SparseVec;

/// Start of a walk: a single node `s`, or a sparse probability vector `σ`.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceDistribution {
    entries: SparseVec,
    sampler: Option<AliasTable>,
}

impl SourceDistribution {
    pub fn node(s: NodeId) -> Self {
        Self {
            entries: SparseVec::from_sorted_unchecked(vec![(s, 1.0)]),
            sampler: None,
        }
    }

    /// Sparse distribution; entries must be nonnegative and sum to 1 within
    /// `1e-9`. Repeated nodes are summed.
    pub fn distribution(pairs: Vec<(NodeId, f64)>) -> Result<Self> {
        if pairs.iter().any(|&(_, p)| !(p >= 0.0 && p.is_finite())) {
            return Err(Error::param("source probabilities must be nonnegative"));
        }
        let entries = SparseVec::from_pairs(pairs);
        let total = entries.sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::param(format!(
                "source probabilities sum to {total}, expected 1"
            )));
        }
        if entries.nnz() == 1 {
            return Ok(Self::node(entries.entries()[0].0));
        }
        let weights: Vec<f64> = entries.iter().map(|(_, p)| p).collect();
        let sampler = build_alias(&weights)?;
        Ok(Self {
            entries,
            sampler: Some(sampler),
        })
    }

    /// The node when this is a point mass.
    pub fn single(&self) -> Option<NodeId> {
        match self.sampler {
            None => Some(self.entries.entries()[0].0),
            Some(_) => None,
        }
    }

    /// `(node, σ(node))` pairs sorted by node.
    pub fn support(&self) -> &SparseVec {
        &self.entries
    }

    pub fn probability(&self, v: NodeId) -> f64 {
        self.entries.get(v)
    }

    #[inline]
    pub fn draw(&self, rng: &mut PprRng) -> NodeId {
        match &self.sampler {
            None => self.entries.entries()[0].0,
            Some(table) => self.entries.entries()[table.sample(rng)].0,
        }
    }

    pub fn validate(&self, g: &Graph) -> Result<()> {
        for (v, _) in self.entries.iter() {
            g.check_node(v)?;
        }
        Ok(())
    }
}

impl From<NodeId> for SourceDistribution {
    fn from(s: NodeId) -> Self {
        Self::node(s)
    }
}
