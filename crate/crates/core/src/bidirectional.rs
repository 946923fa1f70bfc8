//! The bidirectional estimator: a reverse push from `t` followed by
//! `w = ⌈c · r_max / δ⌉` forward walks from the source.
//!
//! The estimate is the dot product `⟨x_s, y^t⟩ = Σ σ(s)·p(s) + Σ π̃_s(v)·r(v)`
//! and is unbiased for `π_σ(t)`. With `c = (3/ε²) ln(2/p_fail)` it is within
//! relative error `ε` of every `π_σ(t) ≥ δ` with probability `1 − p_fail`,
//! provided `r_max > 2eδ/(αε)`.

use std::f64::consts::E;

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId, SourceDistribution};
use crate::grouped::normalize_targets;
use crate::ranking::{Ranking, SearchStatus};
use crate::reverse_push::{
    approx_contributions_balanced, approx_contributions_budgeted, check_alpha, BalanceConfig,
    PushClock, ReverseVector, DEFAULT_PUSH_BUDGET,
};
use crate::rng::PprRng;
use crate::walks::{forward_vector, ForwardVector};

/// Walk-count constant found to give under 8% mean relative error in
/// practice.
pub const PRACTICAL_C: f64 = 7.0;

/// Walk-count constant used by the search methods.
pub const SEARCH_C: f64 = 20.0;

/// Walks beyond this count are refused as a configuration error.
pub const MAX_WALKS: u64 = 1 << 40;

/// `c = (3/ε²) · ln(2/p_fail)`.
pub fn choose_c(epsilon: f64, p_fail: f64) -> Result<f64> {
    check_epsilon(epsilon)?;
    check_p_fail(p_fail)?;
    Ok(3.0 / (epsilon * epsilon) * (2.0 / p_fail).ln())
}

/// Residual threshold balancing push and walk work for a uniformly random
/// target: `(ε/α) · sqrt(d̄ / ln(2/p_fail))`.
pub fn default_r_max(g: &Graph, epsilon: f64, alpha: f64, p_fail: f64) -> Result<f64> {
    check_alpha(alpha)?;
    check_epsilon(epsilon)?;
    check_p_fail(p_fail)?;
    Ok(r_max_for_degree(g.average_degree(), epsilon, alpha, p_fail))
}

pub(crate) fn r_max_for_degree(avg_degree: f64, epsilon: f64, alpha: f64, p_fail: f64) -> f64 {
    epsilon / alpha * (avg_degree / (2.0 / p_fail).ln()).sqrt()
}

/// `c_balance / √m`.
pub fn balance_r_max(c_balance: f64, m: usize) -> f64 {
    c_balance / (m as f64).sqrt()
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon <= 1.0 {
        Ok(())
    } else {
        Err(Error::param("relative error epsilon must be in (0, 1]"))
    }
}

fn check_p_fail(p_fail: f64) -> Result<()> {
    if p_fail > 0.0 && p_fail < 1.0 {
        Ok(())
    } else {
        Err(Error::param("failure probability must be in (0, 1)"))
    }
}

/// Which reverse push runs before the walks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PushStrategy {
    /// Push until every residual is at most `r_max`.
    Fifo,
    /// Max-residual push stopped by the walk-time prediction; `r_max` then
    /// becomes the largest residual left.
    Balanced { walk_cost: f64, clock: PushClock },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorParams {
    pub alpha: f64,
    pub delta: f64,
    pub epsilon: f64,
    pub p_fail: f64,
    pub c: f64,
    pub r_max: f64,
    pub push: PushStrategy,
    pub push_budget: u64,
}

impl EstimatorParams {
    /// Parameters with `c` from [`choose_c`] and `r_max` from
    /// [`default_r_max`].
    pub fn for_graph(g: &Graph, alpha: f64, delta: f64, epsilon: f64, p_fail: f64) -> Result<Self> {
        let params = Self {
            alpha,
            delta,
            epsilon,
            p_fail,
            c: choose_c(epsilon, p_fail)?,
            r_max: default_r_max(g, epsilon, alpha, p_fail)?,
            push: PushStrategy::Fifo,
            push_budget: DEFAULT_PUSH_BUDGET,
        };
        params.validate()?;
        Ok(params)
    }

    pub fn with_c(mut self, c: f64) -> Self {
        self.c = c;
        self
    }

    pub fn with_r_max(mut self, r_max: f64) -> Self {
        self.r_max = r_max;
        self
    }

    pub fn with_push(mut self, push: PushStrategy) -> Self {
        self.push = push;
        self
    }

    pub fn validate(&self) -> Result<()> {
        check_alpha(self.alpha)?;
        check_epsilon(self.epsilon)?;
        check_p_fail(self.p_fail)?;
        if !(self.delta > 0.0) {
            return Err(Error::param("delta must be positive"));
        }
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::param("c must be positive"));
        }
        if !(self.r_max > 0.0 && self.r_max.is_finite()) {
            return Err(Error::param("r_max must be positive"));
        }
        Ok(())
    }

    /// `⌈c · r_max / δ⌉`.
    pub fn walk_count(&self, r_max: f64) -> Result<u64> {
        let w = (self.c * r_max / self.delta).ceil();
        if w > MAX_WALKS as f64 {
            return Err(Error::param(format!(
                "walk count {w:.3e} exceeds the limit of {MAX_WALKS}"
            )));
        }
        Ok(w as u64)
    }

    /// Whether `r_max > 2eδ/(αε)`, the precondition of the accuracy bound.
    pub fn within_guarantee(&self, r_max: f64) -> bool {
        r_max > 2.0 * E * self.delta / (self.alpha * self.epsilon)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PprEstimate {
    pub value: f64,
    /// `Σ σ(s)·p^t(s)`.
    pub p_term: f64,
    /// `Σ π̃_s(v)·r^t(v)`.
    pub walk_term: f64,
    pub walks: u64,
    pub r_max_achieved: f64,
    pub within_guarantee: bool,
}

/// An estimate together with the vectors it was computed from.
#[derive(Debug, Clone, PartialEq)]
pub struct BidirectionalRun {
    pub estimate: PprEstimate,
    pub reverse: ReverseVector,
    /// `None` when no walks were needed (every residual was zero).
    pub forward: Option<ForwardVector>,
}

/// The two blocks of `⟨x_s, y^t⟩`, each accumulated in ascending node order.
pub fn dot_terms(x: &ForwardVector, y: &ReverseVector) -> (f64, f64) {
    (
        merge_dot(x.source_block().entries(), y.estimates.entries()),
        merge_dot(x.endpoint_distribution().entries(), y.residuals.entries()),
    )
}

/// `⟨x_s, y^t⟩`.
pub fn estimate_from_vectors(x: &ForwardVector, y: &ReverseVector) -> f64 {
    let (p_term, walk_term) = dot_terms(x, y);
    p_term + walk_term
}

fn merge_dot(a: &[(NodeId, f64)], b: &[(NodeId, f64)]) -> f64 {
    let (mut i, mut j) = (0, 0);
    let mut acc = 0.0;
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                acc += a[i].1 * b[j].1;
                i += 1;
                j += 1;
            }
        }
    }
    acc
}

pub fn bidirectional_ppr(
    g: &Graph,
    source: &SourceDistribution,
    t: NodeId,
    params: &EstimatorParams,
    rng: &mut PprRng,
) -> Result<PprEstimate> {
    Ok(bidirectional_ppr_run(g, source, t, params, rng)?.estimate)
}

pub fn bidirectional_ppr_run(
    g: &Graph,
    source: &SourceDistribution,
    t: NodeId,
    params: &EstimatorParams,
    rng: &mut PprRng,
) -> Result<BidirectionalRun> {
    params.validate()?;
    source.validate(g)?;
    let (reverse, walk_r_max) = match params.push {
        PushStrategy::Fifo => {
            let y = approx_contributions_budgeted(g, params.alpha, t, params.r_max, params.push_budget)?;
            (y, params.r_max)
        }
        PushStrategy::Balanced { walk_cost, clock } => {
            let config = BalanceConfig {
                delta: params.delta,
                c: params.c,
                walk_cost,
                clock,
                budget: params.push_budget,
            };
            let y = approx_contributions_balanced(g, params.alpha, t, &config)?;
            let r = y.r_max_achieved;
            (y, r)
        }
    };
    let walks = params.walk_count(walk_r_max)?;
    let (forward, p_term, walk_term) = if walks == 0 {
        let p_term = merge_dot(source.support().entries(), reverse.estimates.entries());
        (None, p_term, 0.0)
    } else {
        let x = forward_vector(g, params.alpha, source, walks, rng)?;
        let (p_term, walk_term) = dot_terms(&x, &reverse);
        (Some(x), p_term, walk_term)
    };
    let estimate = PprEstimate {
        value: p_term + walk_term,
        p_term,
        walk_term,
        walks,
        r_max_achieved: reverse.r_max_achieved,
        within_guarantee: params.within_guarantee(walk_r_max),
    };
    Ok(BidirectionalRun {
        estimate,
        reverse,
        forward,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PerTargetSearch {
    pub ranking: Ranking,
    pub forward: ForwardVector,
    /// Pushes spent across all targets.
    pub pushes: u64,
}

/// Ranks `targets` with one forward vector of `w` walks and a query-time
/// reverse push per target. Walks are drawn before any push, so for a given
/// rng state the forward vector is the one the grouped search would use.
/// `push_budget` caps the pushes of each target.
#[allow(clippy::too_many_arguments)]
pub fn rank_targets_bidirectional(
    g: &Graph,
    alpha: f64,
    source: &SourceDistribution,
    targets: &[NodeId],
    r_max: f64,
    w: u64,
    push_budget: u64,
    rng: &mut PprRng,
) -> Result<PerTargetSearch> {
    let targets = normalize_targets(g, targets)?;
    let forward = forward_vector(g, alpha, source, w, rng)?;
    let mut pushes = 0;
    let mut scores = Vec::with_capacity(targets.len());
    for &t in &targets {
        let y = approx_contributions_budgeted(g, alpha, t, r_max, push_budget)?;
        pushes += y.push_count;
        scores.push((t, estimate_from_vectors(&forward, &y)));
    }
    Ok(PerTargetSearch {
        ranking: Ranking::from_scores(scores, SearchStatus::Complete),
        forward,
        pushes,
    })
}
