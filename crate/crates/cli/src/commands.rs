use std::fs;
use std::path::Path;
use std::time::Instant;

use bippr::bench::{run_bench, BenchConfig, Method};
use bippr::bidirectional::{rank_targets_bidirectional, SEARCH_C};
use bippr::graph::{generate_synthetic, load_edge_list_path, load_keywords_path, KeywordMap};
use bippr::grouped::{build_grouped_with, rank_targets_grouped, BuildOptions};
use bippr::oracle::{exact_ppr, global_pagerank, rank_exact, ORACLE_MAX_NODES};
use bippr::ranking::{Ranking, SearchStatus};
use bippr::sampler::{rescore_top, sample_and_rank, SamplerIndex};
use bippr::walks::monte_carlo_search;
use bippr::{
    adaptive_r_max, bidirectional_ppr, EstimatorParams, Error, Graph, IndexContainer, NodeId, PprRng, PushClock, PushStrategy,
    SourceDistribution, StoredIndex, SyntheticModel,
};

use crate::args::{
    BenchArgs, CommonArgs, EstimateArgs, GraphArgs, IndexMethod, OracleArgs, PrecomputeArgs, RmaxArgs, SearchArgs,
    SearchMethod, TargetArgs,
};

pub const EXIT_OK: u8 = 0;
pub const EXIT_NO_SIGNAL: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_BUDGET: u8 = 3;

const DEFAULT_BETA: f64 = 0.77;
const DEFAULT_K: usize = 3;

#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::BudgetExceeded { .. } => EXIT_BUDGET,
            _ => EXIT_INPUT,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

type CmdResult = Result<u8, Failure>;

fn load_graph(a: &GraphArgs) -> Result<Graph, Failure> {
    if let Some(path) = &a.graph {
        return load_edge_list_path(path, a.weighted).map_err(|e| context(e, path.display()));
    }
    let spec = a.synthetic.as_deref().unwrap_or_default();
    let parts: Vec<&str> = spec.split(':').collect();
    let bad = || Failure::input(format!("bad --synthetic spec '{spec}'"));
    let n: usize = parts.get(1).and_then(|s| s.parse().ok()).ok_or_else(bad)?;
    let param = |i: usize| parts.get(i).and_then(|s| s.parse::<f64>().ok()).ok_or_else(bad);
    let model = match (parts[0], parts.len()) {
        ("cycle", 2) => SyntheticModel::Cycle,
        ("er", 3) => SyntheticModel::ErdosRenyi { p: param(2)? },
        ("powerlaw", 3) => SyntheticModel::DirectedPowerLaw { exponent: param(2)? },
        _ => return Err(bad()),
    };
    Ok(generate_synthetic(n, model, a.graph_seed)?)
}

/// Prefixes an error with what was being processed, keeping its exit code.
fn context(e: Error, what: impl std::fmt::Display) -> Failure {
    let mut f = Failure::from(e);
    f.message = format!("{what}: {}", f.message);
    f
}

fn parse_source(spec: &str, g: &Graph) -> Result<SourceDistribution, Failure> {
    let bad = || Failure::input(format!("bad --source '{spec}'"));
    let source = if spec.contains(':') {
        let mut pairs = Vec::new();
        for item in spec.split(',') {
            let (v, p) = item.split_once(':').ok_or_else(bad)?;
            pairs.push((v.trim().parse().map_err(|_| bad())?, p.trim().parse().map_err(|_| bad())?));
        }
        SourceDistribution::distribution(pairs)?
    } else {
        SourceDistribution::node(spec.trim().parse().map_err(|_| bad())?)
    };
    source.validate(g)?;
    Ok(source)
}

fn seed_rng(seed: Option<u64>) -> Result<PprRng, Failure> {
    let seed = match seed {
        Some(s) => s,
        None if std::env::var("BIPPR_TEST_MODE").is_ok_and(|v| v == "1") => {
            return Err(Failure::input("--seed is required in test mode"));
        }
        None => {
            let s = rand::random::<u64>();
            eprintln!("seed={s}");
            s
        }
    };
    Ok(PprRng::seed_from_u64(seed))
}

fn delta_for(common: &CommonArgs, g: &Graph) -> f64 {
    common.delta.unwrap_or(4.0 / g.node_count() as f64)
}

fn load_keywords(path: Option<&Path>, g: &Graph) -> Result<KeywordMap, Failure> {
    let path = path.ok_or_else(|| Failure::input("--keyword needs --keywords"))?;
    load_keywords_path(path, g.node_count()).map_err(|e| context(e, path.display()))
}

fn resolve_targets(t: &TargetArgs, keywords: Option<&Path>, g: &Graph) -> Result<Option<Vec<NodeId>>, Failure> {
    if let Some(list) = &t.targets {
        return Ok(Some(list.clone()));
    }
    let Some(kw) = &t.keyword else { return Ok(None) };
    let map = load_keywords(keywords, g)?;
    let targets = map
        .targets(kw)
        .ok_or_else(|| Failure::input(format!("unknown keyword '{kw}'")))?;
    Ok(Some(targets.to_vec()))
}

/// `(beta, k, c)` from `--adaptive-rmax`.
fn parse_adaptive(spec: &str) -> Result<(f64, usize, f64), Failure> {
    let bad = || Failure::input(format!("bad --adaptive-rmax '{spec}', expected BETA,K,C"));
    let parts: Vec<&str> = spec.split(',').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    Ok((
        parts[0].parse().map_err(|_| bad())?,
        parts[1].parse().map_err(|_| bad())?,
        parts[2].parse().map_err(|_| bad())?,
    ))
}

/// Global PageRank mass of `targets`, falling back to `|T|/n` when the
/// graph is too large for power iteration.
fn pagerank_mass(g: &Graph, alpha: f64, targets: &[NodeId], cache: &mut Option<Vec<f64>>) -> Result<f64, Failure> {
    if g.node_count() > ORACLE_MAX_NODES {
        return Ok(targets.len() as f64 / g.node_count() as f64);
    }
    if cache.is_none() {
        *cache = Some(global_pagerank(g, alpha, 1e-10)?);
    }
    let pr = cache.as_ref().unwrap();
    Ok(targets.iter().map(|&t| pr[t as usize]).sum())
}

/// Residual threshold for a target set: `--rmax` if given, otherwise the
/// adaptive rule with `--adaptive-rmax` or its defaults.
fn resolve_r_max(
    r: &RmaxArgs,
    g: &Graph,
    alpha: f64,
    targets: &[NodeId],
    walks: u64,
    cache: &mut Option<Vec<f64>>,
) -> Result<f64, Failure> {
    if let Some(r) = r.rmax {
        return Ok(r);
    }
    let (beta, k, c) = match &r.adaptive_rmax {
        Some(spec) => parse_adaptive(spec)?,
        None => (DEFAULT_BETA, DEFAULT_K, SEARCH_C),
    };
    let pr_t = pagerank_mass(g, alpha, targets, cache)?;
    Ok(adaptive_r_max(targets.len(), pr_t, walks as f64, beta, k, c)?)
}

fn print_ranking(ranking: &Ranking, k: usize, kind: &str) -> u8 {
    if ranking.status == SearchStatus::NoSignal {
        println!("result=no-signal");
        return EXIT_NO_SIGNAL;
    }
    for (i, e) in ranking.entries.iter().take(k).enumerate() {
        println!("rank={} node={} {kind}={}", i + 1, e.node, e.score);
    }
    match ranking.status {
        SearchStatus::Truncated => {
            println!("result=truncated");
            EXIT_NO_SIGNAL
        }
        _ => EXIT_OK,
    }
}

pub fn estimate(a: EstimateArgs) -> CmdResult {
    let g = load_graph(&a.graph)?;
    let source = parse_source(&a.source, &g)?;
    let mut rng = seed_rng(a.common.seed)?;
    let delta = delta_for(&a.common, &g);
    let mut params = EstimatorParams::for_graph(&g, a.common.alpha, delta, a.epsilon, a.pfail)?;
    if let Some(c) = a.c {
        params = params.with_c(c);
    }
    if let Some(r) = a.rmax {
        params = params.with_r_max(r);
    }
    params.push_budget = a.push_budget;
    if a.balanced {
        // Count a walk as 1/α steps and a push as one average in-degree scan.
        params = params.with_push(PushStrategy::Balanced {
            walk_cost: 1.0 / a.common.alpha,
            clock: PushClock::Counted {
                push_cost: g.average_degree(),
            },
        });
    }
    let start = Instant::now();
    let est = bidirectional_ppr(&g, &source, a.target, &params, &mut rng)?;
    eprintln!("elapsed_ms={:.3}", start.elapsed().as_secs_f64() * 1e3);
    println!(
        "value={} p_term={} walk_term={} walks={} r_max={} r_max_achieved={} within_guarantee={}",
        est.value, est.p_term, est.walk_term, est.walks, params.r_max, est.r_max_achieved, est.within_guarantee
    );
    Ok(EXIT_OK)
}

pub fn precompute(a: PrecomputeArgs) -> CmdResult {
    let g = load_graph(&a.graph)?;
    let map = load_keywords(Some(&a.keywords), &g)?;
    let selected: Vec<(&str, &[NodeId])> = match &a.keyword {
        Some(k) => vec![(
            k.as_str(),
            map.targets(k).ok_or_else(|| Failure::input(format!("unknown keyword '{k}'")))?,
        )],
        None => map.iter().collect(),
    };
    if selected.is_empty() {
        return Err(Failure::input("keyword file has no keywords"));
    }
    let options = BuildOptions {
        parallel: a.parallel,
        push_budget: a.push_budget,
    };
    let mut container = IndexContainer::new(&g);
    let mut cache = None;
    let mut total_entries = 0usize;
    let mut min_r_max = f64::INFINITY;
    let start = Instant::now();
    for (kw, targets) in selected {
        let r_max = resolve_r_max(&a.rmax, &g, a.alpha, targets, a.walks, &mut cache)?;
        let grouped = build_grouped_with(&g, a.alpha, targets, r_max, options).map_err(|e| context(e, format_args!("keyword '{kw}'")))?;
        let index = match a.method {
            IndexMethod::Grouped => StoredIndex::Grouped(grouped),
            IndexMethod::Sampling => StoredIndex::Sampler(SamplerIndex::from_grouped(grouped)?),
        };
        let gi = index.grouped();
        let entries = gi.stored_entries();
        let pushes: u64 = gi.stats().iter().map(|s| s.push_count).sum();
        let touched: u64 = gi.stats().iter().map(|s| s.touched_mass).sum();
        println!(
            "keyword={kw} kind={} targets={} r_max={} entries={entries} pushes={pushes} touched_mass={touched} bound={}",
            index.kind_name(),
            gi.targets().len(),
            r_max,
            (g.edge_count() as f64 / (a.alpha * r_max)).floor()
        );
        total_entries += entries;
        min_r_max = min_r_max.min(r_max);
        container.push(kw, index);
    }
    let bytes = container.to_bytes();
    eprintln!("elapsed_ms={:.3}", start.elapsed().as_secs_f64() * 1e3);
    fs::write(&a.out, &bytes).map_err(|e| Failure::input(format!("{}: {e}", a.out.display())))?;
    let bound = map.gamma() as f64 * g.edge_count() as f64 / (a.alpha * min_r_max);
    println!(
        "total_entries={total_entries} storage_bound={} gamma={} bytes={}",
        bound.floor(),
        map.gamma(),
        bytes.len()
    );
    Ok(EXIT_OK)
}

pub fn search(a: SearchArgs) -> CmdResult {
    let g = load_graph(&a.graph)?;
    let source = parse_source(&a.source, &g)?;
    let alpha = a.common.alpha;
    let delta = delta_for(&a.common, &g);
    let k = a.k;

    // The index, when given, fixes the target set and r_max.
    let loaded = match &a.index {
        None => None,
        Some(path) => {
            if !matches!(a.method, SearchMethod::Grouped | SearchMethod::Sampling) {
                return Err(Failure::input("--index is only used by grouped and sampling"));
            }
            let start = Instant::now();
            let container = IndexContainer::load(path, &g).map_err(|e| context(e, path.display()))?;
            eprintln!("index_load_ms={:.3}", start.elapsed().as_secs_f64() * 1e3);
            let section = match (&a.target.keyword, container.sections.len()) {
                (Some(kw), _) => container
                    .get(kw)
                    .cloned()
                    .ok_or_else(|| Failure::input(format!("index has no keyword '{kw}'")))?,
                (None, 1) => container.sections[0].1.clone(),
                (None, _) => return Err(Failure::input("index has several keywords; pass --keyword")),
            };
            Some(section)
        }
    };
    let targets: Vec<NodeId> = match &loaded {
        Some(index) => index.grouped().targets().to_vec(),
        None => resolve_targets(&a.target, a.keywords.as_deref(), &g)?
            .ok_or_else(|| Failure::input("pass --keyword or --targets"))?,
    };
    if targets.is_empty() {
        return Err(Failure::input("target set is empty"));
    }

    if a.method == SearchMethod::Oracle {
        let exact = exact_ppr(&g, alpha, &source, 1e-12)?;
        let mut sorted = targets.clone();
        sorted.sort_unstable();
        sorted.dedup();
        let ranking = rank_exact(&exact, &sorted, sorted.len())?;
        return Ok(print_ranking(&ranking, k, "score"));
    }

    let mut rng = seed_rng(a.common.seed)?;
    if a.method == SearchMethod::Mc {
        let walks = a.walks.unwrap_or_else(|| (40.0 / delta).ceil() as u64);
        let start = Instant::now();
        let (samples, fixed) = match a.samples {
            Some(s) => (s, false),
            None => (walks, true),
        };
        let mc = monte_carlo_search(&g, alpha, &source, &targets, samples, walks, &mut rng)?;
        eprintln!("query_ms={:.3}", start.elapsed().as_secs_f64() * 1e3);
        let mut ranking = mc.ranking;
        if fixed {
            ranking.status = SearchStatus::Complete;
        }
        println!("walks={} hits={}", mc.walks, mc.hits);
        return Ok(print_ranking(&ranking, k, "count"));
    }

    let mut cache = None;
    let (r_max, index) = match loaded {
        Some(index) => (index.grouped().r_max(), Some(index)),
        None => {
            let budget = a.walks.unwrap_or(10_000);
            (resolve_r_max(&a.rmax, &g, alpha, &targets, budget, &mut cache)?, None)
        }
    };
    let walks = match a.walks {
        Some(w) => w,
        None if a.rmax.rmax.is_some() || index.is_some() => {
            let c = a.c.unwrap_or(SEARCH_C);
            (c * r_max / delta).ceil().max(1.0) as u64
        }
        None => 10_000,
    };
    println!("walks={walks} r_max={r_max}");

    let build = |method: IndexMethod| -> Result<StoredIndex, Failure> {
        let options = BuildOptions {
            parallel: false,
            push_budget: a.push_budget,
        };
        let grouped = build_grouped_with(&g, alpha, &targets, r_max, options)?;
        Ok(match method {
            IndexMethod::Grouped => StoredIndex::Grouped(grouped),
            IndexMethod::Sampling => StoredIndex::Sampler(SamplerIndex::from_grouped(grouped)?),
        })
    };
    let (ranking, kind) = match a.method {
        SearchMethod::PerTarget => {
            let start = Instant::now();
            let q = rank_targets_bidirectional(&g, alpha, &source, &targets, r_max, walks, a.push_budget, &mut rng)?;
            eprintln!("query_ms={:.3}", start.elapsed().as_secs_f64() * 1e3);
            (q.ranking, "score")
        }
        SearchMethod::Grouped => {
            let index = match index {
                Some(i) => i,
                None => build(IndexMethod::Grouped)?,
            };
            let start = Instant::now();
            let q = rank_targets_grouped(&g, alpha, &source, index.grouped(), walks, &mut rng)?;
            eprintln!("query_ms={:.3}", start.elapsed().as_secs_f64() * 1e3);
            (q.ranking, "score")
        }
        SearchMethod::Sampling => {
            let index = match index {
                Some(i) => i,
                None => build(IndexMethod::Sampling)?,
            };
            let sampler = match index {
                StoredIndex::Sampler(s) => s,
                StoredIndex::Grouped(gi) => SamplerIndex::from_grouped(gi)?,
            };
            let n_samples = a.samples.unwrap_or(walks);
            let start = Instant::now();
            let q = sample_and_rank(&g, alpha, &source, &sampler, walks, n_samples, &mut rng)?;
            if a.rescore {
                let ranking = rescore_top(&sampler, &q, k);
                eprintln!("query_ms={:.3}", start.elapsed().as_secs_f64() * 1e3);
                (ranking, "score")
            } else {
                eprintln!("query_ms={:.3}", start.elapsed().as_secs_f64() * 1e3);
                (q.ranking, "count")
            }
        }
        SearchMethod::Mc | SearchMethod::Oracle => unreachable!(),
    };
    Ok(print_ranking(&ranking, k, kind))
}

pub fn bench(a: BenchArgs) -> CmdResult {
    let g = load_graph(&a.graph)?;
    let methods = a
        .methods
        .iter()
        .map(|m| m.parse::<Method>())
        .collect::<Result<Vec<_>, _>>()?;
    let seed = match a.seed {
        Some(s) => s,
        None => seed_rng(None)?.seed(),
    };
    let cfg = BenchConfig {
        alpha: a.alpha,
        target_sizes: a.sizes,
        methods,
        target_sets: a.target_sets,
        sources: a.sources,
        k: a.k,
        beta: a.beta,
        c: a.c,
        walks: a.walks,
        mc_c: a.mc_c,
        seed,
        precision: !a.no_precision,
    };
    let report = run_bench(&g, &cfg)?;
    let lines = report.to_lines();
    print!("{lines}");
    if let Some(dir) = &a.out {
        let write = |name: &str, body: &str| {
            fs::write(dir.join(name), body).map_err(|e| Failure::input(format!("{}: {e}", dir.join(name).display())))
        };
        fs::create_dir_all(dir).map_err(|e| Failure::input(format!("{}: {e}", dir.display())))?;
        write("report.txt", &lines)?;
        write("runtime.dat", &report.runtime_table())?;
        write("precision.dat", &report.precision_table())?;
    }
    Ok(EXIT_OK)
}

pub fn oracle(a: OracleArgs) -> CmdResult {
    let g = load_graph(&a.graph)?;
    let source = parse_source(&a.source, &g)?;
    let exact = exact_ppr(&g, a.alpha, &source, a.tol)?;
    eprintln!("iterations={} residual={:e}", exact.iterations, exact.residual_norm);
    let targets = match resolve_targets(&a.target, a.keywords.as_deref(), &g)? {
        Some(t) => t,
        None => (0..g.node_count() as NodeId).collect(),
    };
    let mut sorted = targets;
    sorted.sort_unstable();
    sorted.dedup();
    let mut ranking = rank_exact(&exact, &sorted, sorted.len())?;
    if a.k.is_none() {
        ranking.entries.retain(|e| e.score > 0.0);
    }
    let k = a.k.unwrap_or(ranking.len());
    Ok(print_ranking(&ranking, k, "score"))
}
