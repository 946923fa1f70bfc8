//! Reverse local push from a target.
//!
//! Starting from `p = 0`, `r = e_t`, each push at `v` moves `α·r(v)` into
//! `p(v)` and spreads `(1 − α)·w_{u,v}·r(v)` to every in-neighbor `u`. Every
//! push preserves, for every source `s`,
//!
//! ```text
//! π_s(t) = p(s) + Σ_v π_s(v) · r(v)
//! ```
//!
//! so `p` is an underestimate of `π_·(t)` and the residuals carry the rest.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, VecDeque};
use std::time::Instant;

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::sparse::SparseVec;

/// Push budget used when callers do not supply one.
pub const DEFAULT_PUSH_BUDGET: u64 = 1 << 32;

/// Sparse estimate/residual pair for one target.
#[derive(Debug, Clone, PartialEq)]
pub struct ReverseVector {
    pub target: NodeId,
    pub estimates: SparseVec,
    pub residuals: SparseVec,
    /// Largest residual left when the push stopped.
    pub r_max_achieved: f64,
    pub push_count: u64,
    /// Sum over pushes of the in-degree of the pushed node.
    pub touched_mass: u64,
}

impl ReverseVector {
    pub fn estimate(&self, v: NodeId) -> f64 {
        self.estimates.get(v)
    }

    pub fn residual(&self, v: NodeId) -> f64 {
        self.residuals.get(v)
    }

    /// Stored nonzero entries across both blocks.
    pub fn nnz(&self) -> usize {
        self.estimates.nnz() + self.residuals.nnz()
    }
}

/// In-progress reverse push with dense scratch vectors.
#[derive(Debug, Clone)]
pub struct ReversePush<'g> {
    graph: &'g Graph,
    alpha: f64,
    target: NodeId,
    estimates: Vec<f64>,
    residuals: Vec<f64>,
    touched: Vec<NodeId>,
    seen: Vec<bool>,
    push_count: u64,
    touched_mass: u64,
}

impl<'g> ReversePush<'g> {
    pub fn new(graph: &'g Graph, alpha: f64, target: NodeId) -> Result<Self> {
        check_alpha(alpha)?;
        graph.check_node(target)?;
        let n = graph.node_count();
        let mut state = Self {
            graph,
            alpha,
            target,
            estimates: vec![0.0; n],
            residuals: vec![0.0; n],
            touched: Vec::new(),
            seen: vec![false; n],
            push_count: 0,
            touched_mass: 0,
        };
        state.touch(target);
        state.residuals[target as usize] = 1.0;
        Ok(state)
    }

    #[inline]
    fn touch(&mut self, v: NodeId) {
        if !self.seen[v as usize] {
            self.seen[v as usize] = true;
            self.touched.push(v);
        }
    }

    /// Pushes from `v`; `on_raise(u, r(u))` is called for each in-neighbor
    /// after its residual grows. Returns the residual that was pushed.
    pub fn push(&mut self, v: NodeId, mut on_raise: impl FnMut(NodeId, f64)) -> f64 {
        let graph = self.graph;
        let rv = self.residuals[v as usize];
        self.residuals[v as usize] = 0.0;
        self.estimates[v as usize] += self.alpha * rv;
        let spread = (1.0 - self.alpha) * rv;
        let (sources, weights) = graph.in_slices(v);
        for (&u, &w) in sources.iter().zip(weights) {
            self.touch(u);
            let slot = &mut self.residuals[u as usize];
            *slot += spread * w;
            on_raise(u, *slot);
        }
        self.push_count += 1;
        self.touched_mass += sources.len() as u64;
        rv
    }

    pub fn target(&self) -> NodeId {
        self.target
    }

    pub fn estimates(&self) -> &[f64] {
        &self.estimates
    }

    pub fn residuals(&self) -> &[f64] {
        &self.residuals
    }

    pub fn push_count(&self) -> u64 {
        self.push_count
    }

    pub fn touched_mass(&self) -> u64 {
        self.touched_mass
    }

    pub fn max_residual(&self) -> f64 {
        self.touched
            .iter()
            .map(|&v| self.residuals[v as usize])
            .fold(0.0, f64::max)
    }

    pub fn finish(mut self) -> ReverseVector {
        self.touched.sort_unstable();
        let mut estimates = Vec::new();
        let mut residuals = Vec::new();
        for &v in &self.touched {
            let p = self.estimates[v as usize];
            if p != 0.0 {
                estimates.push((v, p));
            }
            let r = self.residuals[v as usize];
            if r != 0.0 {
                residuals.push((v, r));
            }
        }
        let r_max_achieved = residuals.iter().map(|&(_, r)| r).fold(0.0, f64::max);
        ReverseVector {
            target: self.target,
            estimates: SparseVec::from_sorted_unchecked(estimates),
            residuals: SparseVec::from_sorted_unchecked(residuals),
            r_max_achieved,
            push_count: self.push_count,
            touched_mass: self.touched_mass,
        }
    }
}

/// Pushes until every residual is at most `r_max`.
///
/// Nodes are processed in FIFO order of first exceeding `r_max`.
pub fn approx_contributions(
    g: &Graph,
    alpha: f64,
    t: NodeId,
    r_max: f64,
) -> Result<ReverseVector> {
    approx_contributions_observed(g, alpha, t, r_max, DEFAULT_PUSH_BUDGET, |_| {})
}

pub fn approx_contributions_budgeted(
    g: &Graph,
    alpha: f64,
    t: NodeId,
    r_max: f64,
    budget: u64,
) -> Result<ReverseVector> {
    approx_contributions_observed(g, alpha, t, r_max, budget, |_| {})
}

/// Like [`approx_contributions`], calling `observer` after every push.
pub fn approx_contributions_observed(
    g: &Graph,
    alpha: f64,
    t: NodeId,
    r_max: f64,
    budget: u64,
    mut observer: impl FnMut(&ReversePush<'_>),
) -> Result<ReverseVector> {
    if !(r_max > 0.0) {
        return Err(Error::param("r_max must be positive"));
    }
    let mut state = ReversePush::new(g, alpha, t)?;
    let mut queue = VecDeque::new();
    let mut queued = vec![false; g.node_count()];
    if state.residuals[t as usize] > r_max {
        queue.push_back(t);
        queued[t as usize] = true;
    }
    while let Some(v) = queue.pop_front() {
        queued[v as usize] = false;
        if state.push_count >= budget {
            return Err(Error::BudgetExceeded { target: t, budget });
        }
        state.push(v, |u, r| {
            if r > r_max && !queued[u as usize] {
                queued[u as usize] = true;
                queue.push_back(u);
            }
        });
        observer(&state);
    }
    Ok(state.finish())
}

/// Runs [`approx_contributions_budgeted`] for every target, optionally on
/// the rayon pool. Output order follows `targets` and does not depend on
/// `parallel`.
pub fn approx_contributions_many(
    g: &Graph,
    alpha: f64,
    targets: &[NodeId],
    r_max: f64,
    budget: u64,
    parallel: bool,
) -> Result<Vec<ReverseVector>> {
    if parallel {
        use rayon::prelude::*;
        targets
            .par_iter()
            .map(|&t| approx_contributions_budgeted(g, alpha, t, r_max, budget))
            .collect()
    } else {
        targets
            .iter()
            .map(|&t| approx_contributions_budgeted(g, alpha, t, r_max, budget))
            .collect()
    }
}

/// How the balanced push measures the time it has spent.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PushClock {
    /// Deterministic: elapsed time is `push_count × push_cost`.
    Counted { push_cost: f64 },
    /// Wall-clock seconds since the push started.
    WallClock,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BalanceConfig {
    /// Minimum PPR the subsequent walks must resolve.
    pub delta: f64,
    /// Walk-count constant.
    pub c: f64,
    /// Average cost of one walk, in the unit of `clock`.
    pub walk_cost: f64,
    pub clock: PushClock,
    pub budget: u64,
}

impl BalanceConfig {
    pub fn counted(delta: f64, c: f64, walk_cost: f64, push_cost: f64) -> Self {
        Self {
            delta,
            c,
            walk_cost,
            clock: PushClock::Counted { push_cost },
            budget: DEFAULT_PUSH_BUDGET,
        }
    }

    /// Predicted walk time at the given residual threshold.
    pub fn walk_time(&self, r_max: f64) -> f64 {
        self.walk_cost * self.c * r_max / self.delta
    }
}

#[derive(Debug, Clone, Copy)]
struct Pending {
    residual: f64,
    node: NodeId,
}

impl PartialEq for Pending {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Pending {}

impl PartialOrd for Pending {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Pending {
    fn cmp(&self, other: &Self) -> Ordering {
        self.residual
            .total_cmp(&other.residual)
            .then_with(|| other.node.cmp(&self.node))
    }
}

/// Max-residual push that stops once the time spent pushing would exceed the
/// predicted time to sample `c · r_max / δ` walks at the current maximum
/// residual.
pub fn approx_contributions_balanced(
    g: &Graph,
    alpha: f64,
    t: NodeId,
    config: &BalanceConfig,
) -> Result<ReverseVector> {
    approx_contributions_balanced_observed(g, alpha, t, config, |_| {})
}

pub fn approx_contributions_balanced_observed(
    g: &Graph,
    alpha: f64,
    t: NodeId,
    config: &BalanceConfig,
    mut observer: impl FnMut(&ReversePush<'_>),
) -> Result<ReverseVector> {
    if !(config.delta > 0.0 && config.c > 0.0 && config.walk_cost > 0.0) {
        return Err(Error::param(
            "balanced push needs positive delta, c and walk_cost",
        ));
    }
    if let PushClock::Counted { push_cost } = config.clock {
        if !(push_cost > 0.0) {
            return Err(Error::param("push_cost must be positive"));
        }
    }
    let mut state = ReversePush::new(g, alpha, t)?;
    let mut heap = BinaryHeap::new();
    heap.push(Pending {
        residual: 1.0,
        node: t,
    });
    let started = Instant::now();
    loop {
        while let Some(top) = heap.peek() {
            if state.residuals[top.node as usize] != top.residual {
                heap.pop();
            } else {
                break;
            }
        }
        let Some(&top) = heap.peek() else { break };
        if top.residual <= 0.0 {
            break;
        }
        let spent_after_next = match config.clock {
            PushClock::Counted { push_cost } => (state.push_count + 1) as f64 * push_cost,
            PushClock::WallClock => {
                let elapsed = started.elapsed().as_secs_f64();
                if state.push_count == 0 {
                    elapsed
                } else {
                    elapsed * (state.push_count + 1) as f64 / state.push_count as f64
                }
            }
        };
        if spent_after_next > config.walk_time(top.residual) {
            break;
        }
        if state.push_count >= config.budget {
            return Err(Error::BudgetExceeded {
                target: t,
                budget: config.budget,
            });
        }
        heap.pop();
        state.push(top.node, |u, r| {
            heap.push(Pending {
                residual: r,
                node: u,
            })
        });
        observer(&state);
    }
    Ok(state.finish())
}

pub(crate) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::param("teleport probability alpha must be in (0, 1)"))
    }
}
