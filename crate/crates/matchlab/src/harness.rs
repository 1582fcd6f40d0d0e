//! Experiments: sampled MPDA-vs-WPDA comparisons, sampler equivalence tables and the
//! epsilon study, plus sharded versions of the exact and Monte Carlo engines.
//!
//! Every random quantity comes from a [`SeededStream`] labelled after the experiment, the
//! procedure and the shard, so results depend only on the configuration, the seed and the
//! shard count.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::thread;

use matchlab_core::analytic::{Estimate, IntegrandPlan, Moments};
use matchlab_core::exact::{
    binomial_standard_error, EmpiricalDistribution, EnumerationBudget, ExactDistribution, OutcomeTally,
    OutputDistribution, ProfileSpace,
};
use matchlab_core::market::{AgentId, AlternatingPermutation, BipartiteGraph, MatchingProcedure, Procedure};
use matchlab_core::prefdist::{
    edges_first, edges_first_lower_bound, graph_to_popularity, list_distribution, pairwise_preference_probability,
    PopularityMatrix, PreferenceModel, ProfileSampler, SeededStream,
};
use matchlab_core::Rational;
use num_traits::ToPrimitive;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::formats::{
    format_rational, write_comparison_result, write_graph, write_popularity, write_text, write_vertical,
    ComparisonResult, MarketFile, ResultHeader,
};
use crate::stats::{compare, total_variation_to_exact};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Splits `total` into `shards` near-equal parts, the first ones one larger.
pub fn shard_sizes(total: u64, shards: usize) -> Vec<u64> {
    let shards = shards.max(1) as u64;
    (0..shards)
        .map(|i| total / shards + u64::from(i < total % shards))
        .collect()
}

/// Runs `work(shard_index)` for every shard on its own thread and returns the results
/// in shard order.
fn in_shards<T: Send>(shards: usize, work: impl Fn(usize) -> T + Sync) -> Vec<T> {
    if shards <= 1 {
        return vec![work(0)];
    }
    thread::scope(|s| {
        let handles: Vec<_> = (0..shards)
            .map(|i| {
                s.spawn({
                    let work = &work;
                    move || work(i)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("shard panicked")).collect()
    })
}

/// Tallies `procedure`'s output on `samples` profiles drawn from `model`. Shard `i` draws
/// from `stream/shard{i}`.
pub fn sample_outputs<P: MatchingProcedure + ?Sized>(
    model: &PreferenceModel,
    procedure: &P,
    samples: u64,
    stream: &SeededStream,
    shards: usize,
) -> EmpiricalDistribution {
    let sampler = ProfileSampler::new(model);
    let sizes = shard_sizes(samples, shards);
    let parts = in_shards(sizes.len(), |i| {
        let mut rng = stream.child(format_args!("shard{i}")).rng();
        let mut tally = EmpiricalDistribution::new();
        for _ in 0..sizes[i] {
            tally.record(procedure.run(&sampler.sample(&mut rng)));
        }
        tally
    });
    let mut merged = EmpiricalDistribution::new();
    for p in &parts {
        merged.merge(p);
    }
    merged
}

/// Exact output distribution with the profile space split into `shards` index ranges.
pub fn exact_distribution_sharded<P: MatchingProcedure + ?Sized>(
    space: &ProfileSpace,
    procedure: &P,
    shards: usize,
) -> ExactDistribution {
    let ranges = space.partition(shards);
    let parts = in_shards(ranges.len(), |i| space.output_tally(procedure, ranges[i].clone()));
    let mut tally = OutcomeTally::default();
    for p in parts {
        tally.merge(p);
    }
    space.distribution(tally)
}

/// Monte Carlo stability estimate with partial moments computed per shard.
pub fn integrate_sharded(
    matrix: &PopularityMatrix,
    sigma: &AlternatingPermutation,
    samples: u64,
    seed: u64,
    shards: usize,
) -> Result<Estimate> {
    if samples < 2 {
        return Err(matchlab_core::Error::Validation("Monte Carlo needs at least 2 samples".into()).into());
    }
    let plan = IntegrandPlan::new(matrix, sigma)?;
    let stream = SeededStream::new(seed, "integrate");
    let sizes = shard_sizes(samples, shards);
    let parts = in_shards(sizes.len(), |i| {
        plan.sample_moments(sizes[i], &mut stream.child(format_args!("shard{i}")).rng())
    });
    let mut total = Moments::default();
    for p in &parts {
        total.merge(p);
    }
    Ok(total.estimate())
}

/// Canonical text of a model, used for hashing configurations.
pub fn model_text(model: &PreferenceModel) -> String {
    let body = match model {
        PreferenceModel::SymmetricAntiPopularity(p)
        | PreferenceModel::SymmetricPower(p)
        | PreferenceModel::ExponentialUtility(p) => write_popularity(p),
        PreferenceModel::Vertical { men, women } => write_vertical(men, women),
        PreferenceModel::IncompleteUniform(g) => write_graph(g),
    };
    format!("model {}\n{body}", model.name())
}

pub const MODEL_NAMES: [&str; 5] = ["antipop", "power", "exputil", "vertical", "graph-uniform"];

/// Builds the named model from an input file. The three symmetric models read a popularity
/// or vertical file, `vertical` a vertical file and `graph-uniform` a graph.
pub fn model_from_file(name: &str, file: MarketFile) -> Result<PreferenceModel> {
    let wrong = |expected: &str| -> Error {
        matchlab_core::Error::Validation(format!("model `{name}` needs a {expected} file")).into()
    };
    let matrix = |file: MarketFile| -> Result<PopularityMatrix> {
        match file {
            MarketFile::Popularity(p) => Ok(p),
            MarketFile::Vertical { men, women } => Ok(PreferenceModel::vertical(men, women)?.popularity()?),
            _ => Err(wrong("popularity or vertical")),
        }
    };
    Ok(match name {
        "antipop" => PreferenceModel::SymmetricAntiPopularity(matrix(file)?),
        "power" => PreferenceModel::SymmetricPower(matrix(file)?),
        "exputil" => PreferenceModel::ExponentialUtility(matrix(file)?),
        "vertical" => match file {
            MarketFile::Vertical { men, women } => PreferenceModel::vertical(men, women)?,
            _ => return Err(wrong("vertical")),
        },
        "graph-uniform" => match file {
            MarketFile::Graph(g) => PreferenceModel::IncompleteUniform(g),
            _ => return Err(wrong("graph")),
        },
        other => {
            return Err(matchlab_core::Error::Validation(format!(
                "unknown model `{other}`; expected one of {}",
                MODEL_NAMES.join(", ")
            ))
            .into())
        }
    })
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub model: PreferenceModel,
    pub procedures: Vec<Procedure>,
    pub samples: u64,
    pub seed: u64,
    pub shards: usize,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn new(model: PreferenceModel, samples: u64, seed: u64) -> Self {
        ExperimentConfig {
            model,
            procedures: Procedure::BOTH.to_vec(),
            samples,
            seed,
            shards: 1,
            out: None,
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(matchlab_core::Error::Validation(msg.into()).into());
        if self.samples == 0 {
            return bad("samples must be at least 1");
        }
        if self.shards == 0 {
            return bad("shard count must be at least 1");
        }
        if self.procedures.is_empty() {
            return bad("no procedure selected");
        }
        Ok(())
    }

    /// SHA-256 of everything that determines the result (the output path excluded).
    pub fn hash(&self) -> String {
        let names: Vec<&str> = self.procedures.iter().map(|p| p.name()).collect();
        let text = format!(
            "{}procedures {}\nsamples {}\nseed {}\nshards {}\n",
            model_text(&self.model),
            names.join(","),
            self.samples,
            self.seed,
            self.shards
        );
        hex::encode(Sha256::digest(text.as_bytes()))
    }
}

impl ComparisonResult {
    pub fn distribution(&self, procedure: &str) -> Option<OutputDistribution> {
        self.tallies
            .iter()
            .find(|(p, _)| p == procedure)
            .map(|(_, t)| OutputDistribution::Estimated(t.clone()))
    }
}

/// Samples each configured procedure on its own stream (`compare/<procedure>`) and, when
/// both MPDA and WPDA ran, compares the two tallies. Writes the result file if the
/// configuration names one.
pub fn run_comparison(config: &ExperimentConfig) -> Result<ComparisonResult> {
    config.validate()?;
    let tallies: Vec<(String, EmpiricalDistribution)> = config
        .procedures
        .iter()
        .map(|p| {
            let stream = SeededStream::new(config.seed, format!("compare/{}", p.name()));
            (
                p.name().to_string(),
                sample_outputs(&config.model, p, config.samples, &stream, config.shards),
            )
        })
        .collect();
    let find = |name: &str| tallies.iter().find(|(p, _)| p == name).map(|(_, t)| t);
    let stats = match (find("mpda"), find("wpda")) {
        (Some(a), Some(b)) => Some(compare(
            a,
            b,
            &mut SeededStream::new(config.seed, "compare/bootstrap").rng(),
        )),
        _ => None,
    };
    let (num_men, num_women) = config.model.shape();
    let result = ComparisonResult {
        header: ResultHeader {
            version: VERSION.to_string(),
            config_hash: config.hash(),
            seed: config.seed,
            shards: config.shards,
            model: config.model.name().to_string(),
            num_men,
            num_women,
            samples: config.samples,
        },
        tallies,
        stats,
    };
    if let Some(path) = &config.out {
        write_text(path, &write_comparison_result(&result))?;
    }
    Ok(result)
}

pub const SYMMETRIC_SAMPLERS: [&str; 3] = ["antipop", "power", "exputil"];
const FLAG_SIGMAS: f64 = 4.0;

#[derive(Debug, Clone, PartialEq)]
pub struct ListRow {
    pub agent: AgentId,
    pub list: Vec<usize>,
    pub exact: Rational,
    /// Frequencies under the anti-popularity, power and exponential-utility samplers.
    pub frequencies: [f64; 3],
    /// Largest deviation in standard errors, against the exact value or between samplers.
    pub max_z: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairwiseRow {
    pub chooser: AgentId,
    pub preferred: AgentId,
    pub other: AgentId,
    pub exact: Rational,
    pub frequencies: [f64; 3],
    pub max_z: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceReport {
    pub samples: u64,
    pub lists: Vec<ListRow>,
    pub pairwise: Vec<PairwiseRow>,
}

impl EquivalenceReport {
    pub fn flagged(&self) -> usize {
        self.lists.iter().filter(|r| r.max_z > FLAG_SIGMAS).count()
            + self.pairwise.iter().filter(|r| r.max_z > FLAG_SIGMAS).count()
    }

    pub fn list(&self, agent: AgentId, list: &[usize]) -> Option<&ListRow> {
        self.lists.iter().find(|r| r.agent == agent && r.list == list)
    }

    pub fn render(&self) -> String {
        let mut out = String::from("kind,agent,event,exact,antipop,power,exputil,max_z,flag\n");
        let name = |a: AgentId, l: &[usize]| {
            l.iter()
                .map(|&j| {
                    AgentId {
                        side: a.side.opposite(),
                        index: j,
                    }
                    .to_string()
                })
                .collect::<Vec<_>>()
                .join(">")
        };
        let flag = |z: f64| if z > FLAG_SIGMAS { "DEVIATES" } else { "ok" };
        for r in &self.lists {
            let [a, b, c] = r.frequencies;
            let _ = writeln!(
                out,
                "list,{},{},{},{a},{b},{c},{:.3},{}",
                r.agent,
                name(r.agent, &r.list),
                format_rational(&r.exact),
                r.max_z,
                flag(r.max_z)
            );
        }
        for r in &self.pairwise {
            let [a, b, c] = r.frequencies;
            let _ = writeln!(
                out,
                "pairwise,{},{}>{},{},{a},{b},{c},{:.3},{}",
                r.chooser,
                r.preferred,
                r.other,
                format_rational(&r.exact),
                r.max_z,
                flag(r.max_z)
            );
        }
        out
    }
}

/// Largest |z| of the three frequencies against `exact` and against each other.
fn max_deviation(freqs: [f64; 3], exact: f64, samples: u64) -> f64 {
    let se = binomial_standard_error(exact, samples);
    let mut z: f64 = 0.0;
    let score = |d: f64, s: f64| {
        if d == 0.0 {
            0.0
        } else if s == 0.0 {
            f64::INFINITY
        } else {
            d.abs() / s
        }
    };
    for (i, &f) in freqs.iter().enumerate() {
        z = z.max(score(f - exact, se));
        for &g in &freqs[i + 1..] {
            z = z.max(score(f - g, se * std::f64::consts::SQRT_2));
        }
    }
    z
}

/// Frequencies of every full list and every pairwise comparison under the three symmetric
/// samplers of `matrix`, next to the exact probabilities.
pub fn run_sampler_equivalence(matrix: &PopularityMatrix, samples: u64, seed: u64) -> Result<EquivalenceReport> {
    let (num_men, num_women) = matrix.shape();
    if num_men.max(num_women) > 3 {
        return Err(matchlab_core::Error::Validation(
            "sampler equivalence tables are limited to markets with at most 3 agents per side".into(),
        )
        .into());
    }
    if samples == 0 {
        return Err(matchlab_core::Error::Validation("samples must be at least 1".into()).into());
    }
    let agents: Vec<AgentId> = (0..num_men)
        .map(AgentId::man)
        .chain((0..num_women).map(AgentId::woman))
        .collect();
    let models = [
        PreferenceModel::SymmetricAntiPopularity(matrix.clone()),
        PreferenceModel::SymmetricPower(matrix.clone()),
        PreferenceModel::ExponentialUtility(matrix.clone()),
    ];
    let counts: Vec<HashMap<(AgentId, Vec<usize>), u64>> = models
        .iter()
        .map(|model| {
            let sampler = ProfileSampler::new(model);
            let mut rng = SeededStream::new(seed, format!("equiv/{}", model.name())).rng();
            let mut counts = HashMap::new();
            for _ in 0..samples {
                let p = sampler.sample(&mut rng);
                for &a in &agents {
                    *counts.entry((a, p.list(a).to_vec())).or_insert(0) += 1;
                }
            }
            counts
        })
        .collect();
    let n = samples as f64;
    let mut lists = Vec::new();
    let mut pairwise = Vec::new();
    for &a in &agents {
        let dist = list_distribution(&models[0], a)?;
        for (list, exact) in &dist {
            let frequencies = [0, 1, 2].map(|k| counts[k].get(&(a, list.clone())).copied().unwrap_or(0) as f64 / n);
            lists.push(ListRow {
                agent: a,
                list: list.clone(),
                max_z: max_deviation(frequencies, exact.to_f64().unwrap(), samples),
                exact: exact.clone(),
                frequencies,
            });
        }
        let opposite = if a.is_man() { num_women } else { num_men };
        for x in 0..opposite {
            for y in x + 1..opposite {
                let side = a.side.opposite();
                let (px, py) = (AgentId { side, index: x }, AgentId { side, index: y });
                let exact = pairwise_preference_probability(matrix, a, px, py)?;
                let frequencies = [0, 1, 2].map(|k| {
                    dist.iter()
                        .filter(|(l, _)| l.iter().position(|&j| j == x) < l.iter().position(|&j| j == y))
                        .map(|(l, _)| counts[k].get(&(a, l.clone())).copied().unwrap_or(0))
                        .sum::<u64>() as f64
                        / n
                });
                pairwise.push(PairwiseRow {
                    chooser: a,
                    preferred: px,
                    other: py,
                    max_z: max_deviation(frequencies, exact.to_f64().unwrap(), samples),
                    exact,
                    frequencies,
                });
            }
        }
    }
    Ok(EquivalenceReport {
        samples,
        lists,
        pairwise,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonRow {
    pub epsilon: Rational,
    /// Frequency of the event that every acceptable partner precedes every other one in
    /// every list.
    pub ok_frequency: f64,
    pub ok_standard_error: f64,
    /// `1 - ε N³`.
    pub bound: f64,
    /// DA outputs restricted to the graph's edges.
    pub mpda: EmpiricalDistribution,
    pub wpda: EmpiricalDistribution,
    /// Total variation to the exact output distribution of the graph model.
    pub tv_mpda: f64,
    pub tv_wpda: f64,
}

impl EpsilonRow {
    pub fn meets_bound(&self, sigmas: f64) -> bool {
        self.ok_frequency >= self.bound - sigmas * self.ok_standard_error
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpsilonReport {
    pub reference: ExactDistribution,
    pub rows: Vec<EpsilonRow>,
}

impl EpsilonReport {
    pub fn render(&self) -> String {
        let mut out = String::from("epsilon,ok_frequency,ok_se,bound,tv_mpda,tv_wpda\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                format_rational(&r.epsilon),
                r.ok_frequency,
                r.ok_standard_error,
                r.bound,
                r.tv_mpda,
                r.tv_wpda
            );
        }
        out
    }
}

/// For each ε, samples the anti-popularity model with weight 1 on edges and ε elsewhere
/// and compares its DA outputs, restricted to the edges, with the exact output
/// distribution of the uniform model on the graph.
pub fn run_epsilon_study(
    graph: &BipartiteGraph,
    epsilons: &[Rational],
    samples: u64,
    seed: u64,
    budget: EnumerationBudget,
) -> Result<EpsilonReport> {
    if samples == 0 {
        return Err(matchlab_core::Error::Validation("samples must be at least 1".into()).into());
    }
    let reference = ProfileSpace::new(&PreferenceModel::IncompleteUniform(graph.clone()), budget)?
        .output_distribution(&Procedure::Mpda);
    let mut rows = Vec::with_capacity(epsilons.len());
    for eps in epsilons {
        let model = PreferenceModel::SymmetricAntiPopularity(graph_to_popularity(graph, eps)?);
        let sampler = ProfileSampler::new(&model);
        let mut rng = SeededStream::new(seed, format!("epsilon/{}", format_rational(eps))).rng();
        let mut ok = 0u64;
        let mut mpda = EmpiricalDistribution::new();
        let mut wpda = EmpiricalDistribution::new();
        for _ in 0..samples {
            let p = sampler.sample(&mut rng);
            ok += u64::from(edges_first(graph, &p));
            mpda.record(graph.restrict(&Procedure::Mpda.run(&p)));
            wpda.record(graph.restrict(&Procedure::Wpda.run(&p)));
        }
        let ok_frequency = ok as f64 / samples as f64;
        rows.push(EpsilonRow {
            epsilon: eps.clone(),
            ok_frequency,
            ok_standard_error: binomial_standard_error(ok_frequency, samples),
            bound: edges_first_lower_bound(graph, eps.to_f64().unwrap_or(f64::NAN)),
            tv_mpda: total_variation_to_exact(&mpda, &reference),
            tv_wpda: total_variation_to_exact(&wpda, &reference),
            mpda,
            wpda,
        });
    }
    Ok(EpsilonReport { reference, rows })
}

/// Turns a failed statistical check into the error the CLI reports with exit code 4.
pub fn require(ok: bool, what: impl FnOnce() -> String) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Statistical(what()))
    }
}
