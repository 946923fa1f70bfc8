//! Timing and precision harness for the search methods.
//!
//! For each target-set size the harness draws random target sets (uniform
//! among sets of that size) and random sources, builds the precomputed
//! indices outside the timed region, and records per-query wall time and
//! precision@k against the exact ranking. Everything runs on the calling
//! thread.

use std::fmt::{self, Write as _};
use std::str::FromStr;
use std::time::Instant;

use rand::seq::index::sample;

use crate::bidirectional::rank_targets_bidirectional;
use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId, SourceDistribution};
use crate::grouped::{build_grouped, rank_targets_grouped, GroupedIndex};
use crate::oracle::{exact_ppr, global_pagerank, rank_exact, DEFAULT_TOLERANCE, ORACLE_MAX_NODES};
use crate::persist::{IndexContainer, StoredIndex};
use crate::ranking::{precision_at_k_tied, Ranking};
use crate::reverse_push::DEFAULT_PUSH_BUDGET;
use crate::rng::PprRng;
use crate::sampler::{adaptive_r_max, power_law_delta, sample_and_rank, SamplerIndex};
use crate::walks::monte_carlo_search;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    MonteCarlo,
    PerTarget,
    Grouped,
    Sampling,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::MonteCarlo, Method::PerTarget, Method::Grouped, Method::Sampling];

    pub fn name(self) -> &'static str {
        match self {
            Method::MonteCarlo => "mc",
            Method::PerTarget => "per-target",
            Method::Grouped => "grouped",
            Method::Sampling => "sampling",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::param(format!("unknown bench method '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub alpha: f64,
    pub target_sizes: Vec<usize>,
    pub methods: Vec<Method>,
    pub target_sets: usize,
    pub sources: usize,
    /// Rank used for precision and for the power-law `δ`.
    pub k: usize,
    pub beta: f64,
    /// Walk-count constant for the precomputed methods.
    pub c: f64,
    /// Walks per query for the bidirectional methods.
    pub walks: u64,
    /// Monte Carlo takes `mc_c / δ` walks.
    pub mc_c: f64,
    pub seed: u64,
    /// Measure precision against the exact ranking when the graph is small
    /// enough for the oracle.
    pub precision: bool,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            alpha: 0.2,
            target_sizes: vec![10, 100, 1000],
            methods: Method::ALL.to_vec(),
            target_sets: 10,
            sources: 10,
            k: 3,
            beta: 0.77,
            c: 20.0,
            walks: 10_000,
            mc_c: 40.0,
            seed: 0,
            precision: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub method: Method,
    pub t_size: usize,
    pub trials: usize,
    pub median_ms: f64,
    /// `None` when precision was not measured.
    pub median_precision: Option<f64>,
    pub mean_precision: Option<f64>,
    pub median_walks: u64,
    pub median_pushes: u64,
    pub median_index_bytes: u64,
    pub r_max: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub n: usize,
    pub m: usize,
    pub k: usize,
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    pub fn row(&self, method: Method, t_size: usize) -> Option<&BenchRow> {
        self.rows.iter().find(|r| r.method == method && r.t_size == t_size)
    }

    /// One `key=value` record per row.
    pub fn to_lines(&self) -> String {
        let mut out = String::new();
        for r in &self.rows {
            let prec = |p: Option<f64>| p.map_or("unavailable".to_string(), |p| format!("{p:.4}"));
            writeln!(
                out,
                "method={} t_size={} trials={} median_ms={:.4} precision_at_{}={} mean_precision={} walks={} pushes={} index_bytes={} r_max={:.6e}",
                r.method,
                r.t_size,
                r.trials,
                r.median_ms,
                self.k,
                prec(r.median_precision),
                prec(r.mean_precision),
                r.median_walks,
                r.median_pushes,
                r.median_index_bytes,
                r.r_max,
            )
            .unwrap();
        }
        out
    }

    /// Median milliseconds, one line per target-set size, one column per
    /// method.
    pub fn runtime_table(&self) -> String {
        self.table(|r| format!("{:.4}", r.median_ms))
    }

    /// Median precision@k, same layout as [`BenchReport::runtime_table`].
    pub fn precision_table(&self) -> String {
        self.table(|r| r.median_precision.map_or("NA".to_string(), |p| format!("{p:.4}")))
    }

    fn table(&self, cell: impl Fn(&BenchRow) -> String) -> String {
        let mut methods: Vec<Method> = Vec::new();
        let mut sizes: Vec<usize> = Vec::new();
        for r in &self.rows {
            if !methods.contains(&r.method) {
                methods.push(r.method);
            }
            if !sizes.contains(&r.t_size) {
                sizes.push(r.t_size);
            }
        }
        let mut out = String::from("t_size");
        for m in &methods {
            write!(out, " {m}").unwrap();
        }
        out.push('\n');
        for &t in &sizes {
            write!(out, "{t}").unwrap();
            for &m in &methods {
                let v = self.row(m, t).map_or("NA".to_string(), &cell);
                write!(out, " {v}").unwrap();
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Default)]
struct Samples {
    ms: Vec<f64>,
    precision: Vec<f64>,
    walks: Vec<u64>,
    pushes: Vec<u64>,
    bytes: Vec<u64>,
}

struct Outcome {
    ranking: Ranking,
    walks: u64,
    pushes: u64,
}

/// Everything a query needs for one target set.
struct Prepared<'a> {
    g: &'a Graph,
    alpha: f64,
    targets: Vec<NodeId>,
    r_max: f64,
    walks: u64,
    mc_walks: u64,
    grouped: Option<GroupedIndex>,
    sampler: Option<SamplerIndex>,
}

impl Prepared<'_> {
    fn query(&self, method: Method, source: NodeId, rng: &mut PprRng) -> Result<Outcome> {
        let (g, alpha) = (self.g, self.alpha);
        let src = SourceDistribution::node(source);
        Ok(match method {
            Method::MonteCarlo => {
                let mc = monte_carlo_search(g, alpha, &src, &self.targets, self.mc_walks, self.mc_walks, rng)?;
                Outcome {
                    ranking: mc.ranking,
                    walks: mc.walks,
                    pushes: 0,
                }
            }
            Method::PerTarget => {
                let q = rank_targets_bidirectional(
                    g,
                    alpha,
                    &src,
                    &self.targets,
                    self.r_max,
                    self.walks,
                    DEFAULT_PUSH_BUDGET,
                    rng,
                )?;
                Outcome {
                    ranking: q.ranking,
                    walks: self.walks,
                    pushes: q.pushes,
                }
            }
            Method::Grouped => {
                let index = self.grouped.as_ref().expect("grouped index built");
                let q = rank_targets_grouped(g, alpha, &src, index, self.walks, rng)?;
                Outcome {
                    ranking: q.ranking,
                    walks: self.walks,
                    pushes: 0,
                }
            }
            Method::Sampling => {
                let index = self.sampler.as_ref().expect("sampler index built");
                let q = sample_and_rank(g, alpha, &src, index, self.walks, self.walks, rng)?;
                Outcome {
                    ranking: q.ranking,
                    walks: self.walks,
                    pushes: 0,
                }
            }
        })
    }
}

/// Residual threshold shared by the bidirectional methods for a target set.
pub fn bench_r_max(pr_t: f64, t_size: usize, cfg: &BenchConfig) -> Result<f64> {
    adaptive_r_max(t_size, pr_t, cfg.walks as f64, cfg.beta, cfg.k, cfg.c)
}

/// Monte Carlo walk count for a target-set size: `mc_c / δ` with `δ` the
/// power-law model's `k`-th value under `π_s[T] = |T|/n`.
pub fn mc_walks(n: usize, t_size: usize, cfg: &BenchConfig) -> Result<u64> {
    let delta = power_law_delta(t_size, t_size as f64 / n as f64, cfg.k, cfg.beta)?;
    Ok((cfg.mc_c / delta).ceil() as u64)
}

pub fn run_bench(g: &Graph, cfg: &BenchConfig) -> Result<BenchReport> {
    let n = g.node_count();
    if cfg.target_sizes.iter().any(|&t| t < cfg.k || t > n) {
        return Err(Error::param(format!("target-set sizes must lie in [k={}, n={n}]", cfg.k)));
    }
    if cfg.target_sets == 0 || cfg.sources == 0 || cfg.methods.is_empty() {
        return Err(Error::param("bench needs at least one target set, source and method"));
    }
    let with_oracle = cfg.precision && n <= ORACLE_MAX_NODES;
    let pagerank = if n <= ORACLE_MAX_NODES {
        Some(global_pagerank(g, cfg.alpha, DEFAULT_TOLERANCE)?)
    } else {
        None
    };
    let root = PprRng::seed_from_u64(cfg.seed);
    let mut rows = Vec::new();

    for (size_idx, &t_size) in cfg.target_sizes.iter().enumerate() {
        let mut samples: Vec<Samples> = cfg.methods.iter().map(|_| Samples::default()).collect();
        let mut warmed = vec![false; cfg.methods.len()];
        let mut r_max_seen = 0.0;
        for set in 0..cfg.target_sets {
            let mut rng = root.split((size_idx * cfg.target_sets + set) as u64);
            let mut targets: Vec<NodeId> = sample(&mut rng, n, t_size).into_iter().map(|v| v as NodeId).collect();
            targets.sort_unstable();
            let sources: Vec<NodeId> = (0..cfg.sources).map(|_| rng.index(n) as NodeId).collect();
            let pr_t = match &pagerank {
                Some(pr) => targets.iter().map(|&t| pr[t as usize]).sum(),
                None => t_size as f64 / n as f64,
            };
            let r_max = bench_r_max(pr_t, t_size, cfg)?;
            r_max_seen = r_max;
            let mut prep = Prepared {
                g,
                alpha: cfg.alpha,
                targets,
                r_max,
                walks: cfg.walks,
                mc_walks: mc_walks(n, t_size, cfg)?,
                grouped: None,
                sampler: None,
            };
            let mut index_stats = (0u64, 0u64);
            if cfg.methods.contains(&Method::Grouped) || cfg.methods.contains(&Method::Sampling) {
                let grouped = build_grouped(g, cfg.alpha, &prep.targets, r_max)?;
                let pushes = grouped.stats().iter().map(|s| s.push_count).sum();
                let mut c = IndexContainer::new(g);
                c.push("bench", StoredIndex::Grouped(grouped.clone()));
                index_stats = (pushes, c.to_bytes().len() as u64);
                if cfg.methods.contains(&Method::Sampling) {
                    prep.sampler = Some(SamplerIndex::from_grouped(grouped.clone())?);
                }
                prep.grouped = Some(grouped);
            }

            for (si, &s) in sources.iter().enumerate() {
                let exact = if with_oracle {
                    let e = exact_ppr(g, cfg.alpha, &SourceDistribution::node(s), DEFAULT_TOLERANCE)?;
                    Some(rank_exact(&e, &prep.targets, prep.targets.len())?)
                } else {
                    None
                };
                for (mi, &method) in cfg.methods.iter().enumerate() {
                    let mut qrng = rng.split(1 + si as u64);
                    if !warmed[mi] {
                        prep.query(method, s, &mut qrng.clone())?;
                        warmed[mi] = true;
                    }
                    let start = Instant::now();
                    let out = prep.query(method, s, &mut qrng)?;
                    let ms = start.elapsed().as_secs_f64() * 1e3;
                    let smp = &mut samples[mi];
                    smp.ms.push(ms);
                    smp.walks.push(out.walks);
                    if let Some(exact) = &exact {
                        smp.precision.push(precision_at_k_tied(&out.ranking.top_k(cfg.k), exact, cfg.k));
                    }
                    match method {
                        Method::Grouped | Method::Sampling => {
                            smp.pushes.push(index_stats.0);
                            smp.bytes.push(index_stats.1);
                        }
                        _ => {
                            smp.pushes.push(out.pushes);
                            smp.bytes.push(0);
                        }
                    }
                }
            }
        }
        for (mi, &method) in cfg.methods.iter().enumerate() {
            let s = &mut samples[mi];
            rows.push(BenchRow {
                method,
                t_size,
                trials: s.ms.len(),
                median_ms: median(&mut s.ms),
                median_precision: (!s.precision.is_empty()).then(|| median(&mut s.precision.clone())),
                mean_precision: (!s.precision.is_empty())
                    .then(|| s.precision.iter().sum::<f64>() / s.precision.len() as f64),
                median_walks: median_u64(&mut s.walks),
                median_pushes: median_u64(&mut s.pushes),
                median_index_bytes: median_u64(&mut s.bytes),
                r_max: if method == Method::MonteCarlo { 0.0 } else { r_max_seen },
            });
        }
    }
    Ok(BenchReport {
        n,
        m: g.edge_count(),
        k: cfg.k,
        rows,
    })
}

fn median(xs: &mut [f64]) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        (xs[n / 2 - 1] + xs[n / 2]) / 2.0
    }
}

fn median_u64(xs: &mut [u64]) -> u64 {
    xs.sort_unstable();
    xs[xs.len() / 2]
}
