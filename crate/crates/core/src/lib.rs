//! Bidirectional personalized PageRank estimation and personalized search.
//!
//! The crate is organised around the two halves of a bidirectional estimate:
//!
//! - [`reverse_push`] works backwards from a target `t`, producing a sparse
//!   reverse vector `y^t = (p^t, r^t)` of estimates and residuals.
//! - [`walks`] works forwards from a source, producing a forward vector
//!   `x_s = (e_s, π̃_s)` from the endpoints of geometric-length random walks.
//!
//! Their dot product is an unbiased estimate of `π_s(t)` ([`bidirectional`]).
//! The search strategies in [`grouped`] and [`sampler`] precompute reverse
//! vectors for a whole target set and answer top-k queries from one forward
//! vector. [`oracle`] provides exact power-iteration values used as ground
//! truth, [`persist`] the on-disk index container and [`bench`] the
//! timing/precision harness.

pub mod bench;
pub mod bidirectional;
pub mod error;
pub mod graph;
pub mod grouped;
pub mod oracle;
pub mod persist;
pub mod ranking;
pub mod reverse_push;
pub mod rng;
pub mod sampler;
pub mod sparse;
pub mod walks;

pub use bidirectional::{
    bidirectional_ppr, choose_c, default_r_max, estimate_from_vectors, EstimatorParams,
    PprEstimate, PushStrategy,
};
pub use error::{Error, Result};
pub use graph::{Graph, KeywordMap, NodeId, SourceDistribution, SyntheticModel};
pub use grouped::{build_grouped, rank_targets_grouped, GroupedIndex};
pub use persist::{IndexContainer, StoredIndex};
pub use oracle::{exact_ppr, exact_top_k, ExactPpr};
pub use ranking::{RankedTarget, Ranking};
pub use reverse_push::{
    approx_contributions, approx_contributions_balanced, BalanceConfig, PushClock, ReversePush,
    ReverseVector,
};
pub use rng::PprRng;
pub use sampler::{
    adaptive_r_max, build_alias, build_sampler_index, power_law_delta, sample_and_rank, AliasTable,
    SamplerIndex,
};
pub use sparse::SparseVec;
pub use walks::{forward_vector, monte_carlo_search, sample_walk, ForwardVector};
