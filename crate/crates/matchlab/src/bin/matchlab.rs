use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use matchlab::formats::{
    format_rational, parse_rational, read_market_file, write_exact_result, write_profile, write_text, ExactResult,
    MarketFile,
};
use matchlab::harness::{
    exact_distribution_sharded, integrate_sharded, model_from_file, require, run_comparison, run_epsilon_study,
    run_sampler_equivalence, ExperimentConfig,
};
use matchlab::{Error, Result};
use matchlab_core::analytic::{ie_optimal_probability, Evaluator, IeValue};
use matchlab_core::exact::{EnumerationBudget, Optimality, ProfileSpace, DEFAULT_MAX_PROFILES};
use matchlab_core::market::{
    enumerate_stable_matchings, exposed_rotations, mpda, wpda, AlternatingPermutation, Direction, Matching,
    MatchingProcedure, PreferenceProfile, Procedure, DEFAULT_STABLE_SET_CAP,
};
use matchlab_core::prefdist::{PopularityMatrix, PreferenceModel, ProfileSampler, SeededStream};
use num_traits::ToPrimitive;

/// Stable matching under random symmetric preferences: exact and sampled output
/// distributions of men- and women-proposing deferred acceptance.
#[derive(Parser)]
#[command(name = "matchlab", version)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Master seed for every random stream.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Number of shards the work is split into.
    #[arg(long, global = true, default_value_t = 1)]
    shards: usize,
    /// Cap on the number of profiles an exact enumeration may visit.
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_PROFILES)]
    budget: u128,
    /// Write the result to this file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModelKind {
    Antipop,
    Power,
    Exputil,
    Vertical,
    GraphUniform,
}

impl ModelKind {
    fn name(self) -> &'static str {
        match self {
            ModelKind::Antipop => "antipop",
            ModelKind::Power => "power",
            ModelKind::Exputil => "exputil",
            ModelKind::Vertical => "vertical",
            ModelKind::GraphUniform => "graph-uniform",
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ProcedureChoice {
    Mpda,
    Wpda,
    Both,
}

impl ProcedureChoice {
    fn procedures(self) -> Vec<Procedure> {
        match self {
            ProcedureChoice::Mpda => vec![Procedure::Mpda],
            ProcedureChoice::Wpda => vec![Procedure::Wpda],
            ProcedureChoice::Both => Procedure::BOTH.to_vec(),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum SideChoice {
    /// The matching is the women-optimal stable matching (the WPDA output).
    Women,
    /// The matching is the men-optimal stable matching (the MPDA output).
    Men,
}

#[derive(Clone, Copy, ValueEnum)]
enum EvaluatorChoice {
    Exact,
    Mc,
}

#[derive(Args)]
struct ModelInput {
    #[arg(long, value_enum)]
    model: ModelKind,
    /// Popularity, vertical or graph file.
    #[arg(long)]
    input: PathBuf,
}

impl ModelInput {
    fn load(&self) -> Result<PreferenceModel> {
        model_from_file(self.model.name(), read_market_file(&self.input)?)
    }
}

#[derive(Subcommand)]
enum Command {
    /// MPDA and WPDA outputs, all stable matchings and the exposed rotations of a profile.
    Solve {
        #[arg(long)]
        profile: PathBuf,
    },
    /// Draw preference profiles from a model.
    Sample {
        #[command(flatten)]
        input: ModelInput,
        #[arg(long, default_value_t = 1)]
        count: u64,
    },
    /// Exact output distribution of a discrete model.
    ExactDist {
        #[command(flatten)]
        input: ModelInput,
        #[arg(long, value_enum, default_value = "both")]
        procedure: ProcedureChoice,
    },
    /// Probability that a perfect matching is the optimal stable matching, by inclusion-exclusion.
    OptimalProb {
        /// Popularity or vertical file.
        #[arg(long)]
        matrix: PathBuf,
        /// Canonical matching text, e.g. `m1-w2,m2-w1`.
        #[arg(long)]
        matching: String,
        #[arg(long, value_enum, default_value = "women")]
        side: SideChoice,
        #[arg(long, value_enum, default_value = "exact")]
        evaluator: EvaluatorChoice,
        /// Monte Carlo samples per term.
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
    },
    /// Monte Carlo estimate of the probability that a permutation is stable.
    Integrate {
        #[arg(long)]
        matrix: PathBuf,
        /// Successor arrows, e.g. `m1>w1,w1>m1,m2>w2,w2>m2`.
        #[arg(long)]
        perm: String,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
    },
    /// Sample MPDA and WPDA outputs and test whether their distributions differ.
    Compare {
        #[command(flatten)]
        input: ModelInput,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
        #[arg(long, value_enum, default_value = "both")]
        procedures: ProcedureChoice,
    },
    /// List frequencies of the three symmetric samplers against exact probabilities.
    Equiv {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
    },
    /// Approximate a graph by anti-popularity weights 1 and epsilon.
    EpsilonStudy {
        #[arg(long)]
        graph: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "1/10,1/100,1/1000")]
        epsilons: Vec<String>,
        #[arg(long, default_value_t = 100_000)]
        samples: u64,
    },
}

fn load_matrix(path: &Path) -> Result<PopularityMatrix> {
    match read_market_file(path)? {
        MarketFile::Popularity(p) => Ok(p),
        MarketFile::Vertical { men, women } => Ok(PreferenceModel::vertical(men, women)?.popularity()?),
        _ => Err(invalid(format!(
            "{}: expected a popularity or vertical file",
            path.display()
        ))),
    }
}

fn invalid(msg: String) -> Error {
    matchlab_core::Error::Validation(msg).into()
}

/// Prints `text` and, when `--out` is set, writes it there too.
fn emit(global: &Global, text: &str) -> Result<()> {
    print!("{text}");
    match &global.out {
        Some(path) => write_text(path, text),
        None => Ok(()),
    }
}

fn solve(profile: &PreferenceProfile) -> Result<String> {
    let (men_opt, women_opt) = (mpda(profile), wpda(profile));
    let mut out = format!("mpda {men_opt}\nwpda {women_opt}\n");
    for m in enumerate_stable_matchings(profile, DEFAULT_STABLE_SET_CAP)? {
        out += &format!("stable {m}\n");
    }
    for r in exposed_rotations(profile, &men_opt, Direction::WomenImproving)? {
        out += &format!("rotation-from-mpda {r}\n");
    }
    for r in exposed_rotations(profile, &women_opt, Direction::MenImproving)? {
        out += &format!("rotation-from-wpda {r}\n");
    }
    Ok(out)
}

fn run(cli: Cli) -> Result<()> {
    let g = &cli.global;
    let budget = EnumerationBudget::new(g.budget);
    match &cli.command {
        Command::Solve { profile } => {
            let MarketFile::Profile(p) = read_market_file(profile)? else {
                return Err(invalid(format!(
                    "{}: expected a market profile file",
                    profile.display()
                )));
            };
            emit(g, &solve(&p)?)
        }
        Command::Sample { input, count } => {
            let model = input.load()?;
            let sampler = ProfileSampler::new(&model);
            let mut rng = SeededStream::new(g.seed, "sample").rng();
            let text: Vec<String> = (0..*count).map(|_| write_profile(&sampler.sample(&mut rng))).collect();
            emit(g, &text.join("\n"))
        }
        Command::ExactDist { input, procedure } => {
            let model = input.load()?;
            let space = ProfileSpace::new(&model, budget)?;
            let (num_men, num_women) = model.shape();
            let procedures = procedure.procedures();
            for p in &procedures {
                let text = write_exact_result(&ExactResult {
                    num_men,
                    num_women,
                    procedure: p.name().to_string(),
                    distribution: exact_distribution_sharded(&space, p, g.shards),
                });
                print!("{text}");
                if let Some(out) = &g.out {
                    let path = if procedures.len() > 1 {
                        let mut name = out.clone().into_os_string();
                        name.push(format!(".{}", p.name()));
                        PathBuf::from(name)
                    } else {
                        out.clone()
                    };
                    write_text(&path, &text)?;
                }
            }
            Ok(())
        }
        Command::OptimalProb {
            matrix,
            matching,
            side,
            evaluator,
            samples,
        } => {
            let matrix = load_matrix(matrix)?;
            let (num_men, num_women) = matrix.shape();
            let mu = Matching::parse(num_men, num_women, matching)?;
            let side = match side {
                SideChoice::Women => Optimality::WomenOptimal,
                SideChoice::Men => Optimality::MenOptimal,
            };
            let evaluator = match evaluator {
                EvaluatorChoice::Exact => Evaluator::Exact(budget),
                EvaluatorChoice::Mc => Evaluator::MonteCarlo {
                    samples: *samples,
                    stream: SeededStream::new(g.seed, "optimal-prob"),
                },
            };
            let text = match ie_optimal_probability(&matrix, &mu, side, &evaluator)? {
                IeValue::Exact(r) => format!("{} {}\n", format_rational(&r), r.to_f64().unwrap_or(f64::NAN)),
                IeValue::Estimate(e) => format!("{} {} {}\n", e.mean, e.standard_error, e.samples),
            };
            emit(g, &text)
        }
        Command::Integrate { matrix, perm, samples } => {
            let matrix = load_matrix(matrix)?;
            let sigma = AlternatingPermutation::parse(matrix.num_men(), perm)?;
            let e = integrate_sharded(&matrix, &sigma, *samples, g.seed, g.shards)?;
            emit(g, &format!("{} {} {}\n", e.mean, e.standard_error, e.samples))
        }
        Command::Compare {
            input,
            samples,
            procedures,
        } => {
            let config = ExperimentConfig {
                procedures: procedures.procedures(),
                shards: g.shards,
                out: g.out.clone(),
                ..ExperimentConfig::new(input.load()?, *samples, g.seed)
            };
            let result = run_comparison(&config)?;
            for (name, tally) in &result.tallies {
                for (m, count) in tally.iter() {
                    println!("{name} {m} {count} {}", tally.frequency(m));
                }
            }
            if let Some(s) = &result.stats {
                println!(
                    "tv {} tv_null_p99 {} chi_square {} df {} p_value {} pooled_cells {}",
                    s.total_variation, s.tv_null_p99, s.chi_square, s.degrees_of_freedom, s.p_value, s.pooled_cells
                );
                require(s.accepts(0.01), || {
                    format!(
                        "MPDA and WPDA tallies differ (p = {}, tv = {})",
                        s.p_value, s.total_variation
                    )
                })?;
            }
            Ok(())
        }
        Command::Equiv { matrix, samples } => {
            let report = run_sampler_equivalence(&load_matrix(matrix)?, *samples, g.seed)?;
            emit(g, &report.render())?;
            let flagged = report.flagged();
            require(flagged == 0, || {
                format!("{flagged} rows deviate by more than 4 standard errors")
            })
        }
        Command::EpsilonStudy {
            graph,
            epsilons,
            samples,
        } => {
            let MarketFile::Graph(graph) = read_market_file(graph)? else {
                return Err(invalid(format!("{}: expected a graph file", graph.display())));
            };
            let epsilons = epsilons
                .iter()
                .map(|e| parse_rational(e).ok_or_else(|| invalid(format!("bad epsilon `{e}`"))))
                .collect::<Result<Vec<_>>>()?;
            let report = run_epsilon_study(&graph, &epsilons, *samples, g.seed, budget)?;
            emit(g, &report.render())?;
            let violated = report.rows.iter().filter(|r| !r.meets_bound(3.0)).count();
            require(violated == 0, || {
                format!("{violated} rows fall below the 1 - eps N^3 bound")
            })
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("matchlab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
