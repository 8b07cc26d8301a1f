use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};

use lsck::clustering::{Convergence, Penalties};
use lsck::constraints::{self, fsc_equivalent_queries, GenerationParams};
use lsck::dataset::{self, SyntheticSpec};
use lsck::geometry::{Distance, GridAnchor};
use lsck::harness::{self, Algorithm, DatasetSource, ExperimentConfig, OracleSpec, PenaltySpec};
use lsck::metrics::constraint_ri;

/// Constrained k-means with oracle-generated must-link / cannot-link sets
#[derive(Parser, Debug)]
#[command(name = "lsck", version, about)]
struct Cli {
    /// Log more (repeat for debug output)
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a labeled Gaussian-blob corpus and its embeddings
    Synth(SynthArgs),
    /// Stage 1: query the oracle and write the constraint pool
    GenConstraints(RunArgs),
    /// Stage 2: cluster every (algorithm, ratio, seed) cell
    Cluster {
        #[command(flatten)]
        run: RunArgs,
        /// Constraint pool (defaults to <output-dir>/constraints.json)
        #[arg(long)]
        constraints: Option<PathBuf>,
    },
    /// Score an assignment, and optionally a constraint file, against labels
    Evaluate(EvaluateArgs),
    /// Aggregate result files into report.csv and queries.csv
    Report {
        /// Directory of result JSON files
        #[arg(long)]
        results: PathBuf,
        /// Where to write the CSVs (defaults to the parent of --results)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Stages 1 and 2 followed by the report
    Run(RunArgs),
}

#[derive(Args, Debug)]
struct SynthArgs {
    #[arg(long, default_value_t = 10)]
    k_true: usize,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 16)]
    dim: usize,
    /// Center spacing in component standard deviations
    #[arg(long, default_value_t = 10.0)]
    separation: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory for corpus.jsonl and embeddings.bin
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct DatasetArgs {
    /// JSONL corpus with id, text and optional label
    #[arg(long, requires = "embeddings")]
    corpus: Option<PathBuf>,
    /// EMB1 embedding file aligned with the corpus
    #[arg(long, requires = "corpus")]
    embeddings: Option<PathBuf>,
    /// Synthetic blobs instead of files: k_true=10,n=1000,dim=16,separation=3,seed=0
    #[arg(long, conflicts_with = "corpus")]
    synthetic: Option<String>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Backend {
    Sim,
    Remote,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum DistanceArg {
    Squared,
    Euclidean,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum AnchorArg {
    Global,
    NearestCenter,
}

/// Every flag overrides the matching field of `--config`.
#[derive(Args, Debug)]
struct RunArgs {
    /// Declarative run file (JSON ExperimentConfig)
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    dataset: DatasetArgs,
    #[arg(long)]
    k: Option<usize>,
    /// Comma-separated: lsck_hc, lsck, kmeanspp
    #[arg(long, value_delimiter = ',')]
    algorithms: Option<Vec<Algorithm>>,
    /// Comma-separated constraint ratios in [0, 1]
    #[arg(long, value_delimiter = ',')]
    ratios: Option<Vec<f64>>,
    /// Comma-separated seeds, or a half-open range such as 0..10
    #[arg(long)]
    seeds: Option<String>,
    /// "auto", or "W_M,W_CL"
    #[arg(long)]
    penalties: Option<String>,
    #[arg(long, value_enum)]
    oracle: Option<Backend>,
    /// Simulated oracle flip probability
    #[arg(long)]
    error_rate: Option<f64>,
    #[arg(long)]
    oracle_seed: Option<u64>,
    /// Chat model name for the remote oracle (ORACLE_API_URL / ORACLE_API_KEY)
    #[arg(long)]
    model: Option<String>,
    #[arg(long)]
    temperature: Option<f64>,
    #[arg(long)]
    max_in_flight: Option<usize>,
    #[arg(long)]
    max_iters: Option<usize>,
    /// Squared center shift that ends iteration
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long, value_enum)]
    distance: Option<DistanceArg>,
    #[arg(long)]
    m_max: Option<usize>,
    #[arg(long)]
    alpha_pair: Option<u32>,
    #[arg(long)]
    alpha_set: Option<u32>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long, value_enum)]
    grid_anchor: Option<AnchorArg>,
    #[arg(long)]
    constraint_seed: Option<u64>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args, Debug)]
struct EvaluateArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[command(flatten)]
    dataset: DatasetArgs,
    /// Result JSON or a bare JSON array of cluster ids
    #[arg(long)]
    assignment: Option<PathBuf>,
    /// Constraint file to score against the labels
    #[arg(long)]
    constraints: Option<PathBuf>,
}

fn parse_synthetic(s: &str) -> Result<SyntheticSpec> {
    let mut spec = SyntheticSpec {
        k_true: 10,
        n: 1000,
        dim: 16,
        separation: 10.0,
        seed: 0,
    };
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (key, value) = part
            .split_once('=')
            .with_context(|| format!("expected key=value in --synthetic, got {part:?}"))?;
        let bad = || format!("bad value for {key}: {value:?}");
        match key.trim() {
            "k_true" | "k" => spec.k_true = value.parse().with_context(bad)?,
            "n" => spec.n = value.parse().with_context(bad)?,
            "dim" => spec.dim = value.parse().with_context(bad)?,
            "separation" | "sep" => spec.separation = value.parse().with_context(bad)?,
            "seed" => spec.seed = value.parse().with_context(bad)?,
            other => bail!("unknown --synthetic key {other:?}"),
        }
    }
    Ok(spec)
}

fn parse_seeds(s: &str) -> Result<Vec<u64>> {
    if let Some((a, b)) = s.split_once("..") {
        let (a, b): (u64, u64) = (a.trim().parse()?, b.trim().parse()?);
        if a >= b {
            bail!("empty seed range {s:?}");
        }
        return Ok((a..b).collect());
    }
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<u64>()
                .with_context(|| format!("bad seed {p:?}"))
        })
        .collect()
}

fn parse_penalties(s: &str) -> Result<PenaltySpec> {
    if s.eq_ignore_ascii_case("auto") {
        return Ok(PenaltySpec::Auto);
    }
    let (m, c) = s
        .split_once(',')
        .with_context(|| format!("penalties must be \"auto\" or \"W_M,W_CL\", got {s:?}"))?;
    let p = Penalties::new(m.trim().parse()?, c.trim().parse()?)?;
    Ok(PenaltySpec::Fixed(p))
}

impl DatasetArgs {
    fn source(&self) -> Result<Option<DatasetSource>> {
        if let Some(s) = &self.synthetic {
            return Ok(Some(DatasetSource::Synthetic(parse_synthetic(s)?)));
        }
        Ok(match (&self.corpus, &self.embeddings) {
            (Some(c), Some(e)) => Some(DatasetSource::Files {
                corpus: c.clone(),
                embeddings: e.clone(),
            }),
            _ => None,
        })
    }
}

fn load_config(path: Option<&Path>) -> Result<Option<ExperimentConfig>> {
    path.map(|p| {
        ExperimentConfig::from_json_file(p)
            .with_context(|| format!("reading config {}", p.display()))
    })
    .transpose()
}

impl RunArgs {
    fn resolve(&self) -> Result<ExperimentConfig> {
        let base = load_config(self.config.as_deref())?;
        let dataset = match (self.dataset.source()?, &base) {
            (Some(d), _) => d,
            (None, Some(b)) => b.dataset.clone(),
            (None, None) => {
                bail!("no dataset: pass --config, --corpus/--embeddings or --synthetic")
            }
        };
        let k = match (self.k, &base) {
            (Some(k), _) => k,
            (None, Some(b)) => b.k,
            (None, None) => bail!("--k is required without --config"),
        };
        let mut cfg = base.unwrap_or_else(|| ExperimentConfig {
            dataset: dataset.clone(),
            k,
            algorithms: vec![Algorithm::LsckHc, Algorithm::Kmeanspp],
            ratios: vec![0.0, 0.1, 0.2, 0.4],
            seeds: (0..10).collect(),
            penalties: PenaltySpec::Auto,
            oracle: OracleSpec::Sim {
                error_rate: 0.0,
                seed: 0,
            },
            convergence: Convergence::default(),
            distance: Distance::Squared,
            generation: GenerationParams::default(),
            constraint_seed: 0,
            output_dir: PathBuf::from("lsck-out"),
            threads: None,
        });
        cfg.dataset = dataset;
        cfg.k = k;
        if let Some(a) = &self.algorithms {
            cfg.algorithms = a.clone();
        }
        if let Some(r) = &self.ratios {
            cfg.ratios = r.clone();
        }
        if let Some(s) = &self.seeds {
            cfg.seeds = parse_seeds(s)?;
        }
        if let Some(p) = &self.penalties {
            cfg.penalties = parse_penalties(p)?;
        }
        self.apply_oracle(&mut cfg)?;
        if let Some(m) = self.max_iters {
            cfg.convergence.max_iters = m;
        }
        if let Some(t) = self.tol {
            cfg.convergence.tol = Some(t);
        }
        if let Some(d) = self.distance {
            cfg.distance = match d {
                DistanceArg::Squared => Distance::Squared,
                DistanceArg::Euclidean => Distance::Euclidean,
            };
        }
        let g = &mut cfg.generation;
        if let Some(v) = self.m_max {
            g.m_max = v;
        }
        if let Some(v) = self.alpha_pair {
            g.alpha_pair = v;
        }
        if let Some(v) = self.alpha_set {
            g.alpha_set = v;
        }
        if let Some(v) = self.eps {
            g.eps = v;
        }
        if let Some(a) = self.grid_anchor {
            g.anchor = match a {
                AnchorArg::Global => GridAnchor::Global,
                AnchorArg::NearestCenter => GridAnchor::NearestCenter,
            };
        }
        if let Some(s) = self.constraint_seed {
            cfg.constraint_seed = s;
        }
        if let Some(d) = &self.output_dir {
            cfg.output_dir = d.clone();
        }
        if self.threads.is_some() {
            cfg.threads = self.threads;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn apply_oracle(&self, cfg: &mut ExperimentConfig) -> Result<()> {
        let backend = self.oracle.unwrap_or(match cfg.oracle {
            OracleSpec::Sim { .. } => Backend::Sim,
            OracleSpec::Remote { .. } => Backend::Remote,
        });
        cfg.oracle = match (backend, &cfg.oracle) {
            (Backend::Sim, OracleSpec::Sim { error_rate, seed }) => OracleSpec::Sim {
                error_rate: self.error_rate.unwrap_or(*error_rate),
                seed: self.oracle_seed.unwrap_or(*seed),
            },
            (Backend::Sim, OracleSpec::Remote { .. }) => OracleSpec::Sim {
                error_rate: self.error_rate.unwrap_or(0.0),
                seed: self.oracle_seed.unwrap_or(0),
            },
            (Backend::Remote, current) => {
                let (model, temperature, max_in_flight) = match current {
                    OracleSpec::Remote {
                        model,
                        temperature,
                        max_in_flight,
                    } => (Some(model.clone()), *temperature, *max_in_flight),
                    OracleSpec::Sim { .. } => (None, 0.7, 4),
                };
                OracleSpec::Remote {
                    model: self
                        .model
                        .clone()
                        .or(model)
                        .context("--model is required for the remote oracle")?,
                    temperature: self.temperature.unwrap_or(temperature),
                    max_in_flight: self.max_in_flight.unwrap_or(max_in_flight),
                }
            }
        };
        Ok(())
    }
}

fn synth(args: &SynthArgs) -> Result<()> {
    let data = dataset::generate_synthetic(&SyntheticSpec {
        k_true: args.k_true,
        n: args.n,
        dim: args.dim,
        separation: args.separation,
        seed: args.seed,
    })?;
    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;
    let corpus = args.out.join("corpus.jsonl");
    let embeddings = args.out.join("embeddings.bin");
    dataset::write_corpus(&corpus, data.records())?;
    dataset::write_embeddings(&embeddings, &data)?;
    println!(
        "wrote {} points ({}-d) to {} and {}",
        data.n(),
        data.dim(),
        corpus.display(),
        embeddings.display()
    );
    Ok(())
}

fn gen_constraints(cfg: &ExperimentConfig) -> Result<()> {
    let pool = harness::cmd_gen_constraints(cfg)?;
    let l = pool.ledger;
    println!("constraints: {}", cfg.constraints_path().display());
    println!(
        "ml_sets {} (hard {}), cl_sets {}",
        pool.ml_sets.len(),
        pool.ml_sets.iter().filter(|s| s.hard).count(),
        pool.cl_sets.len()
    );
    println!(
        "queries: ml {} cl {} consistency {} total {} (pairwise-equivalent {})",
        l.ml_queries,
        l.cl_queries,
        l.consistency_queries,
        l.total(),
        fsc_equivalent_queries(&pool)
    );
    let t = pool.thresholds;
    println!("psi_pair {:.6} psi_set {:.6}", t.psi_pair, t.psi_set);
    Ok(())
}

fn cluster(cfg: &ExperimentConfig, constraints: Option<&Path>) -> Result<()> {
    let path = constraints.map_or_else(|| cfg.constraints_path(), Path::to_path_buf);
    let written = harness::cmd_cluster(cfg, &path)?;
    println!(
        "wrote {} result files to {}",
        written.len(),
        cfg.results_dir().display()
    );
    Ok(())
}

fn report(results: &Path, out: Option<&Path>) -> Result<()> {
    let out = match out {
        Some(o) => o.to_path_buf(),
        None => results
            .parent()
            .map_or_else(|| PathBuf::from("."), Path::to_path_buf),
    };
    let rep = harness::cmd_report(results, &out)?;
    for w in &rep.warnings {
        warn!("{w}");
    }
    print!("{}", rep.csv);
    println!();
    print!("{}", rep.queries_csv);
    info!(
        "wrote {} and {}",
        out.join("report.csv").display(),
        out.join("queries.csv").display()
    );
    Ok(())
}

fn evaluate(args: &EvaluateArgs) -> Result<()> {
    let source = match (args.dataset.source()?, load_config(args.config.as_deref())?) {
        (Some(d), _) => d,
        (None, Some(cfg)) => cfg.dataset,
        (None, None) => bail!("no dataset: pass --config, --corpus/--embeddings or --synthetic"),
    };
    if args.assignment.is_none() && args.constraints.is_none() {
        bail!("nothing to evaluate: pass --assignment and/or --constraints");
    }
    let data = source.load()?;
    let mut out = serde_json::Map::new();
    if let Some(p) = &args.assignment {
        let assignment = harness::read_assignment(p)?;
        let scores = harness::evaluate_assignment(&data, &assignment)?;
        out.insert("scores".into(), serde_json::to_value(scores)?);
    }
    if let Some(p) = &args.constraints {
        let c = constraints::read_constraints(p, data.n())?;
        let truth = data
            .labels()
            .context("dataset has no labels to score constraints against")?;
        out.insert(
            "constraint_ri".into(),
            serde_json::to_value(constraint_ri(&c, &truth)?)?,
        );
        out.insert("ledger_total".into(), c.ledger.total().into());
        out.insert(
            "fsc_equiv_queries".into(),
            fsc_equivalent_queries(&c).into(),
        );
    }
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth(a) => synth(&a),
        Command::GenConstraints(a) => gen_constraints(&a.resolve()?),
        Command::Cluster { run, constraints } => cluster(&run.resolve()?, constraints.as_deref()),
        Command::Evaluate(a) => evaluate(&a),
        Command::Report { results, out } => report(&results, out.as_deref()),
        Command::Run(a) => {
            let cfg = a.resolve()?;
            gen_constraints(&cfg)?;
            cluster(&cfg, None)?;
            report(&cfg.results_dir(), Some(&cfg.output_dir))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
