//! Deterministic synthetic graphs for tests and benchmarks.

use super::{Graph, NodeId};
use crate::error::{Error, Result};
use crate::rng::PprRng;
use crate::sampler::build_alias;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SyntheticModel {
    /// `0 -> 1 -> ... -> n-1 -> 0`.
    Cycle,
    /// Every ordered pair `u != v` is an edge independently with probability `p`.
    ErdosRenyi { p: f64 },
    /// Chung–Lu style directed graph: out-degrees drawn from a discrete power
    /// law with the given exponent, targets chosen with probability
    /// proportional to a power-law attractiveness on a random node order.
    DirectedPowerLaw { exponent: f64 },
}

/// Smallest out-degree in the power-law model.
const POWER_LAW_MIN_DEGREE: f64 = 2.0;

/// Generates a graph with `n` nodes. Identical `(n, model, seed)` always
/// produce identical adjacency; nodes left without out-edges get the usual
/// self-loop.
pub fn generate_synthetic(n: usize, model: SyntheticModel, seed: u64) -> Result<Graph> {
    if n == 0 {
        return Err(Error::param("synthetic graph needs n >= 1"));
    }
    let mut rng = PprRng::seed_from_u64(seed);
    let edges = match model {
        SyntheticModel::Cycle => (0..n)
            .map(|u| (u as NodeId, ((u + 1) % n) as NodeId))
            .collect(),
        SyntheticModel::ErdosRenyi { p } => {
            if !(p > 0.0 && p <= 1.0) {
                return Err(Error::param("erdos_renyi p must be in (0, 1]"));
            }
            erdos_renyi(n, p, &mut rng)
        }
        SyntheticModel::DirectedPowerLaw { exponent } => {
            if !(exponent > 1.0 && exponent.is_finite()) {
                return Err(Error::param("power-law exponent must be > 1"));
            }
            power_law(n, exponent, &mut rng)?
        }
    };
    Graph::from_edges(n, &edges)
}

fn erdos_renyi(n: usize, p: f64, rng: &mut PprRng) -> Vec<(NodeId, NodeId)> {
    let slots = (n as u64) * (n as u64 - 1);
    let mut edges = Vec::new();
    if slots == 0 {
        return edges;
    }
    let log_q = (1.0 - p).ln();
    // Geometric skipping over the n(n-1) ordered off-diagonal pairs.
    let mut k: u64 = 0;
    loop {
        if p < 1.0 {
            let u = 1.0 - rng.unit();
            let skip = (u.ln() / log_q).floor();
            if skip >= (slots - k) as f64 {
                break;
            }
            k += skip as u64;
        }
        if k >= slots {
            break;
        }
        let row = k / (n as u64 - 1);
        let col = k % (n as u64 - 1);
        let v = if col < row { col } else { col + 1 };
        edges.push((row as NodeId, v as NodeId));
        k += 1;
    }
    edges
}

fn power_law(n: usize, exponent: f64, rng: &mut PprRng) -> Result<Vec<(NodeId, NodeId)>> {
    if n == 1 {
        return Ok(Vec::new());
    }
    let tail = 1.0 / (exponent - 1.0);
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        let j = rng.index(i + 1);
        order.swap(i, j);
    }
    let mut attractiveness = vec![0.0; n];
    for (rank, &node) in order.iter().enumerate() {
        attractiveness[node] = ((rank + 1) as f64).powf(-tail);
    }
    let picker = build_alias(&attractiveness)?;

    let max_degree = (n - 1).min(((n as f64).sqrt() as usize).max(2) * 4);
    let mut edges = Vec::new();
    let mut chosen: Vec<NodeId> = Vec::new();
    for u in 0..n {
        let draw = POWER_LAW_MIN_DEGREE * (1.0 - rng.unit()).powf(-tail);
        let degree = (draw.floor() as usize).clamp(1, max_degree);
        chosen.clear();
        let mut attempts = 0;
        while chosen.len() < degree && attempts < degree * 50 {
            attempts += 1;
            let v = picker.sample(rng) as NodeId;
            if v as usize != u && !chosen.contains(&v) {
                chosen.push(v);
            }
        }
        chosen.sort_unstable();
        edges.extend(chosen.iter().map(|&v| (u as NodeId, v)));
    }
    Ok(edges)
}
