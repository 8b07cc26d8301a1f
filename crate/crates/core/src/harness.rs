//! Experiment runner: constraint generation, ratio and seed sweeps, result
//! files and aggregated reports.
//!
//! Output layout under `output_dir`:
//!
//! ```text
//! constraints.json        constraint pool with query ledger
//! transcript.jsonl        one line per oracle query
//! results/<alg>_r<ratio>_s<seed>.json
//! timings.csv             wall time per run (not deterministic)
//! report.csv              algorithm,ratio,metric,mean,stddev,n_seeds
//! queries.csv             ledger totals against the pairwise-equivalent count
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::clustering::{
    default_penalties, kmeans_baseline, lsck, lsck_hc, ClusteringConfig, ClusteringResult,
    Convergence, Diagnostics, Penalties,
};
use crate::constraints::{self, fsc_equivalent_queries, ConstraintCollection, GenerationParams};
use crate::dataset::{self, EmbeddedDataset, SyntheticSpec};
use crate::error::{Error, Result};
use crate::geometry::Distance;
use crate::metrics::{constraint_ri, score_all, ClusteringScores};
use crate::oracle::{Oracle, RemoteConfig, RemoteOracle, SimOracle, SimOracleConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DatasetSource {
    Synthetic(SyntheticSpec),
    Files {
        corpus: PathBuf,
        embeddings: PathBuf,
    },
}

impl DatasetSource {
    pub fn load(&self) -> Result<EmbeddedDataset> {
        match self {
            DatasetSource::Synthetic(spec) => dataset::generate_synthetic(spec),
            DatasetSource::Files { corpus, embeddings } => {
                dataset::load_dataset(corpus, embeddings)
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    LsckHc,
    Lsck,
    Kmeanspp,
}

impl Algorithm {
    pub fn name(self) -> &'static str {
        match self {
            Algorithm::LsckHc => "lsck_hc",
            Algorithm::Lsck => "lsck",
            Algorithm::Kmeanspp => "kmeanspp",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lsck_hc" | "lsck-hc" => Ok(Algorithm::LsckHc),
            "lsck" => Ok(Algorithm::Lsck),
            "kmeanspp" | "kmeans++" => Ok(Algorithm::Kmeanspp),
            other => Err(Error::InvalidParameter(format!(
                "unknown algorithm {other:?}"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "backend")]
pub enum OracleSpec {
    Sim {
        error_rate: f64,
        seed: u64,
    },
    Remote {
        model: String,
        #[serde(default = "default_temperature")]
        temperature: f64,
        #[serde(default = "default_in_flight")]
        max_in_flight: usize,
    },
}

fn default_temperature() -> f64 {
    0.7
}

fn default_in_flight() -> usize {
    4
}

impl OracleSpec {
    pub fn build(&self, data: &EmbeddedDataset) -> Result<Oracle> {
        match self {
            OracleSpec::Sim { error_rate, seed } => Ok(Oracle::new(SimOracle::from_dataset(
                data,
                SimOracleConfig {
                    error_rate: *error_rate,
                    seed: *seed,
                },
            )?)),
            OracleSpec::Remote {
                model,
                temperature,
                max_in_flight,
            } => {
                let mut cfg = RemoteConfig::from_env(model.clone())?;
                cfg.temperature = *temperature;
                Ok(Oracle::new(RemoteOracle::new(cfg)).with_max_in_flight(*max_in_flight))
            }
        }
    }
}

/// `"auto"` or explicit weights.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum PenaltySpec {
    #[default]
    Auto,
    Fixed(Penalties),
}

impl Serialize for PenaltySpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            PenaltySpec::Auto => s.serialize_str("auto"),
            PenaltySpec::Fixed(p) => p.serialize(s),
        }
    }
}

impl<'de> Deserialize<'de> for PenaltySpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Word(String),
            Fixed(Penalties),
        }
        match Raw::deserialize(d)? {
            Raw::Word(w) if w == "auto" => Ok(PenaltySpec::Auto),
            Raw::Word(w) => Err(serde::de::Error::custom(format!(
                "unknown penalty spec {w:?}"
            ))),
            Raw::Fixed(p) => Ok(PenaltySpec::Fixed(p)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub dataset: DatasetSource,
    pub k: usize,
    #[serde(default = "default_algorithms")]
    pub algorithms: Vec<Algorithm>,
    pub ratios: Vec<f64>,
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub penalties: PenaltySpec,
    pub oracle: OracleSpec,
    #[serde(default)]
    pub convergence: Convergence,
    #[serde(default)]
    pub distance: Distance,
    #[serde(default)]
    pub generation: GenerationParams,
    /// Seed for the k-center start and cannot-link sampling.
    #[serde(default)]
    pub constraint_seed: u64,
    pub output_dir: PathBuf,
    /// Worker threads for the run grid; `None` uses all cores.
    #[serde(default)]
    pub threads: Option<usize>,
}

fn default_algorithms() -> Vec<Algorithm> {
    vec![Algorithm::LsckHc, Algorithm::Kmeanspp]
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(Error::InvalidParameter(
                "at least one seed is required".into(),
            ));
        }
        if self.algorithms.is_empty() {
            return Err(Error::InvalidParameter(
                "at least one algorithm is required".into(),
            ));
        }
        if let Some(r) = self.ratios.iter().find(|r| !(0.0..=1.0).contains(*r)) {
            return Err(Error::InvalidParameter(format!("ratio {r} outside [0, 1]")));
        }
        if self.ratios.is_empty() {
            return Err(Error::InvalidParameter(
                "at least one ratio is required".into(),
            ));
        }
        if let PenaltySpec::Fixed(p) = self.penalties {
            p.validate()?;
        }
        Ok(())
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let s = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg: Self = serde_json::from_str(&s)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn constraints_path(&self) -> PathBuf {
        self.output_dir.join("constraints.json")
    }

    pub fn transcript_path(&self) -> PathBuf {
        self.output_dir.join("transcript.jsonl")
    }

    pub fn results_dir(&self) -> PathBuf {
        self.output_dir.join("results")
    }
}

// ---------------------------------------------------------------------------
// Stage 1

#[derive(Debug)]
pub struct GenerationOutcome {
    pub pool: ConstraintCollection,
    pub oracle: Oracle,
}

pub fn gen_constraints(
    config: &ExperimentConfig,
    data: &EmbeddedDataset,
) -> Result<GenerationOutcome> {
    let oracle = config.oracle.build(data)?;
    let pool = constraints::generate_constraints(
        data,
        &oracle,
        config.k,
        &config.generation,
        config.constraint_seed,
    )?;
    Ok(GenerationOutcome { pool, oracle })
}

/// Generates the pool and writes the constraint file and transcript. On an
/// oracle failure the partial transcript is still written and named in the
/// error.
pub fn cmd_gen_constraints(config: &ExperimentConfig) -> Result<ConstraintCollection> {
    config.validate()?;
    let data = config.dataset.load()?;
    fs::create_dir_all(&config.output_dir).map_err(|e| Error::io(&config.output_dir, e))?;
    let oracle = config.oracle.build(&data)?;
    let generated = constraints::generate_constraints(
        &data,
        &oracle,
        config.k,
        &config.generation,
        config.constraint_seed,
    );
    let transcript = config.transcript_path();
    oracle.write_transcript(&transcript)?;
    let pool = generated.map_err(|e| match e {
        Error::OracleTransport { attempts, message } => Error::OracleTransport {
            attempts,
            message: format!("{message} (transcript: {})", transcript.display()),
        },
        Error::OracleParse {
            attempts,
            message,
            raw,
        } => Error::OracleParse {
            attempts,
            message: format!("{message} (transcript: {})", transcript.display()),
            raw,
        },
        other => other,
    })?;
    constraints::write_constraints(&config.constraints_path(), &pool)?;
    Ok(pool)
}

// ---------------------------------------------------------------------------
// Stage 2

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSummary {
    pub ml_sets: usize,
    pub hard_ml_sets: usize,
    pub cl_sets: usize,
    pub constrained_ratio: f64,
    pub below_target: bool,
    pub constraint_ri: Option<f64>,
    pub ml_queries: u64,
    pub cl_queries: u64,
    pub consistency_queries: u64,
    pub fsc_equiv_queries: u64,
}

impl ConstraintSummary {
    pub fn of(c: &ConstraintCollection, n: usize, truth: Option<&[i64]>) -> Result<Self> {
        Ok(Self {
            ml_sets: c.ml_sets.len(),
            hard_ml_sets: c.ml_sets.iter().filter(|s| s.hard).count(),
            cl_sets: c.cl_sets.len(),
            constrained_ratio: c.constrained_ratio(n),
            below_target: c.below_target,
            constraint_ri: match truth {
                Some(t) => constraint_ri(c, t)?,
                None => None,
            },
            ml_queries: c.ledger.ml_queries,
            cl_queries: c.ledger.cl_queries,
            consistency_queries: c.ledger.consistency_queries,
            fsc_equiv_queries: fsc_equivalent_queries(c),
        })
    }

    pub fn ledger_total(&self) -> u64 {
        self.ml_queries + self.cl_queries + self.consistency_queries
    }
}

/// One (algorithm, ratio, seed) cell. Wall time is kept out so that files
/// are reproducible.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub algorithm: Algorithm,
    pub ratio: f64,
    pub seed: u64,
    pub k: usize,
    pub penalties: Penalties,
    pub distance: Distance,
    pub convergence: Convergence,
    pub objective: f64,
    pub iterations: usize,
    pub converged: bool,
    pub scores: Option<ClusteringScores>,
    pub constraints: ConstraintSummary,
    pub diagnostics: Diagnostics,
    pub assignment: Vec<usize>,
    pub centers: Vec<Vec<f64>>,
}

impl RunRecord {
    pub fn file_name(&self) -> String {
        format!("{}_r{:.4}_s{}.json", self.algorithm, self.ratio, self.seed)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TimedRecord {
    pub record: RunRecord,
    pub wall_ms: f64,
}

/// Runs one algorithm on the selection of `pool` at `ratio`. The selection
/// uses the run seed, so all algorithms see the same constraints per cell.
#[allow(clippy::too_many_arguments)]
pub fn run_cell(
    data: &EmbeddedDataset,
    pool: &ConstraintCollection,
    algorithm: Algorithm,
    ratio: f64,
    seed: u64,
    k: usize,
    penalties: Penalties,
    convergence: &Convergence,
    distance: Distance,
) -> Result<(RunRecord, ClusteringResult)> {
    let selection = pool.select(ratio, data.n(), seed)?;
    let cfg = ClusteringConfig {
        k,
        penalties,
        convergence: *convergence,
        distance,
    };
    let result = match algorithm {
        Algorithm::LsckHc => lsck_hc(data, &selection, &cfg, seed)?,
        Algorithm::Lsck => lsck(data, &selection, &cfg, seed)?,
        Algorithm::Kmeanspp => kmeans_baseline(data, k, seed, convergence)?,
    };
    let truth = data.labels();
    let scores = match &truth {
        Some(t) => Some(score_all(&as_labels(&result.assignment), t)?),
        None => None,
    };
    let record = RunRecord {
        algorithm,
        ratio,
        seed,
        k,
        penalties,
        distance,
        convergence: *convergence,
        objective: result.objective,
        iterations: result.iterations,
        converged: result.converged,
        scores,
        constraints: ConstraintSummary::of(&selection, data.n(), truth.as_deref())?,
        diagnostics: result.diagnostics,
        assignment: result.assignment.clone(),
        centers: result.centers.to_rows(),
    };
    Ok((record, result))
}

pub fn as_labels(assignment: &[usize]) -> Vec<i64> {
    assignment.iter().map(|&c| c as i64).collect()
}

/// Runs every (algorithm, ratio, seed) cell in a worker pool. Records come
/// back in (algorithm, ratio, seed) configuration order.
pub fn cluster_all(
    config: &ExperimentConfig,
    data: &EmbeddedDataset,
    pool: &ConstraintCollection,
) -> Result<Vec<TimedRecord>> {
    config.validate()?;
    pool.validate(data.n())?;
    let penalties: BTreeMap<u64, Penalties> = match config.penalties {
        PenaltySpec::Fixed(p) => config.seeds.iter().map(|&s| (s, p)).collect(),
        PenaltySpec::Auto => config
            .seeds
            .iter()
            .map(|&s| {
                default_penalties(data, config.k, s, &config.convergence, config.distance)
                    .map(|p| (s, p))
            })
            .collect::<Result<_>>()?,
    };
    let cells: Vec<(Algorithm, f64, u64)> = config
        .algorithms
        .iter()
        .flat_map(|&a| {
            config
                .ratios
                .iter()
                .flat_map(move |&r| config.seeds.iter().map(move |&s| (a, r, s)))
        })
        .collect();
    let work = || {
        cells
            .par_iter()
            .map(|&(a, r, s)| {
                let start = Instant::now();
                let (record, _) = run_cell(
                    data,
                    pool,
                    a,
                    r,
                    s,
                    config.k,
                    penalties[&s],
                    &config.convergence,
                    config.distance,
                )?;
                Ok(TimedRecord {
                    record,
                    wall_ms: start.elapsed().as_secs_f64() * 1e3,
                })
            })
            .collect::<Result<Vec<_>>>()
    };
    match config.threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t.max(1))
            .build()
            .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    }
}

pub fn write_record(dir: &Path, record: &RunRecord) -> Result<PathBuf> {
    let path = dir.join(record.file_name());
    let body = serde_json::to_string_pretty(record)? + "\n";
    fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

pub fn write_timings(path: &Path, records: &[TimedRecord]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["algorithm", "ratio", "seed", "wall_ms"])?;
    for t in records {
        w.write_record([
            t.record.algorithm.name().to_string(),
            format!("{:.4}", t.record.ratio),
            t.record.seed.to_string(),
            format!("{:.3}", t.wall_ms),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Loads the pool written by stage 1 and writes one result file per cell.
pub fn cmd_cluster(config: &ExperimentConfig, constraints_path: &Path) -> Result<Vec<PathBuf>> {
    config.validate()?;
    let data = config.dataset.load()?;
    let pool = constraints::read_constraints(constraints_path, data.n())?;
    let records = cluster_all(config, &data, &pool)?;
    let dir = config.results_dir();
    fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    let paths = records
        .iter()
        .map(|t| write_record(&dir, &t.record))
        .collect::<Result<Vec<_>>>()?;
    write_timings(&config.output_dir.join("timings.csv"), &records)?;
    Ok(paths)
}

/// Scores an assignment file (a result JSON or a JSON array of cluster ids)
/// against the dataset labels.
pub fn evaluate_assignment(
    data: &EmbeddedDataset,
    assignment: &[usize],
) -> Result<ClusteringScores> {
    let truth = data.labels().ok_or_else(|| {
        Error::InvalidParameter("dataset has no labels to evaluate against".into())
    })?;
    if assignment.len() != data.n() {
        return Err(Error::DimensionMismatch {
            left: assignment.len(),
            right: data.n(),
        });
    }
    score_all(&as_labels(assignment), &truth)
}

pub fn read_assignment(path: &Path) -> Result<Vec<usize>> {
    let s = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let v: serde_json::Value = serde_json::from_str(&s)?;
    let arr = match &v {
        serde_json::Value::Array(_) => &v,
        serde_json::Value::Object(o) => o.get("assignment").ok_or_else(|| {
            Error::Malformed(format!("{} has no assignment field", path.display()))
        })?,
        _ => {
            return Err(Error::Malformed(format!(
                "{} is not an assignment",
                path.display()
            )))
        }
    };
    Ok(serde_json::from_value(arr.clone())?)
}

// ---------------------------------------------------------------------------
// Reporting

#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub csv: String,
    pub queries_csv: String,
    /// Files that failed to load and cells with fewer seeds than the rest.
    pub warnings: Vec<String>,
}

/// Reads every `*.json` in `dir` as a [`RunRecord`]. Unreadable files are
/// reported as warnings.
pub fn read_records(dir: &Path) -> Result<(Vec<RunRecord>, Vec<String>)> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "json"))
        .collect();
    paths.sort();
    let mut records = Vec::new();
    let mut warnings = Vec::new();
    for p in paths {
        let parsed = fs::read_to_string(&p)
            .map_err(|e| e.to_string())
            .and_then(|s| serde_json::from_str::<RunRecord>(&s).map_err(|e| e.to_string()));
        match parsed {
            Ok(r) => records.push(r),
            Err(e) => warnings.push(format!("skipped {}: {e}", p.display())),
        }
    }
    Ok((records, warnings))
}

/// Mean and population standard deviation.
pub fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Fixed-point text with four decimals; negative zero prints as zero.
pub fn fmt4(x: f64) -> String {
    let s = format!("{x:.4}");
    if s == "-0.0000" {
        "0.0000".into()
    } else {
        s
    }
}

const METRICS: [&str; 6] = ["acc", "nmi", "ri", "ari", "objective", "iterations"];

fn metric(r: &RunRecord, name: &str) -> Option<f64> {
    let s = r.scores.as_ref();
    match name {
        "acc" => s.map(|s| s.acc),
        "nmi" => s.map(|s| s.nmi),
        "ri" => s.map(|s| s.ri),
        "ari" => s.map(|s| s.ari),
        "objective" => Some(r.objective),
        "iterations" => Some(r.iterations as f64),
        _ => None,
    }
}

/// Ratio keys compare on their printed form so files from different runs
/// group together.
fn ratio_key(r: f64) -> String {
    fmt4(r)
}

pub fn build_report(records: &[RunRecord]) -> Result<Report> {
    let mut warnings = Vec::new();
    let mut cells: BTreeMap<(Algorithm, String), Vec<&RunRecord>> = BTreeMap::new();
    for r in records {
        cells
            .entry((r.algorithm, ratio_key(r.ratio)))
            .or_default()
            .push(r);
    }
    let most = cells.values().map(Vec::len).max().unwrap_or(0);

    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["algorithm", "ratio", "metric", "mean", "stddev", "n_seeds"])?;
    for ((alg, ratio), rs) in &cells {
        if rs.len() < most {
            warnings.push(format!(
                "{alg} at ratio {ratio} has {} of {most} seeds",
                rs.len()
            ));
        }
        for name in METRICS {
            let xs: Vec<f64> = rs.iter().filter_map(|r| metric(r, name)).collect();
            if xs.is_empty() {
                continue;
            }
            let (m, s) = mean_std(&xs);
            w.write_record([
                alg.name(),
                ratio,
                name,
                &fmt4(m),
                &fmt4(s),
                &xs.len().to_string(),
            ])?;
        }
    }
    let csv = String::from_utf8(
        w.into_inner()
            .map_err(|e| Error::Malformed(e.to_string()))?,
    )
    .expect("csv output is utf-8");

    // selections depend only on (ratio, seed); count each once
    let mut by_ratio: BTreeMap<String, BTreeMap<u64, &ConstraintSummary>> = BTreeMap::new();
    for r in records {
        by_ratio
            .entry(ratio_key(r.ratio))
            .or_default()
            .entry(r.seed)
            .or_insert(&r.constraints);
    }
    let mut q = csv::Writer::from_writer(Vec::new());
    q.write_record([
        "ratio",
        "ml_queries",
        "cl_queries",
        "consistency_queries",
        "ledger_total",
        "fsc_equiv_queries",
        "reduction",
        "constraint_ri",
        "n_seeds",
    ])?;
    for (ratio, seeds) in &by_ratio {
        let cs: Vec<&ConstraintSummary> = seeds.values().copied().collect();
        let avg = |f: &dyn Fn(&ConstraintSummary) -> f64| {
            mean_std(&cs.iter().map(|c| f(c)).collect::<Vec<_>>()).0
        };
        let total = avg(&|c| c.ledger_total() as f64);
        let fsc = avg(&|c| c.fsc_equiv_queries as f64);
        let ris: Vec<f64> = cs.iter().filter_map(|c| c.constraint_ri).collect();
        q.write_record([
            ratio.clone(),
            fmt4(avg(&|c| c.ml_queries as f64)),
            fmt4(avg(&|c| c.cl_queries as f64)),
            fmt4(avg(&|c| c.consistency_queries as f64)),
            fmt4(total),
            fmt4(fsc),
            if total > 0.0 {
                fmt4(fsc / total)
            } else {
                String::new()
            },
            if ris.is_empty() {
                String::new()
            } else {
                fmt4(mean_std(&ris).0)
            },
            cs.len().to_string(),
        ])?;
    }
    let queries_csv = String::from_utf8(
        q.into_inner()
            .map_err(|e| Error::Malformed(e.to_string()))?,
    )
    .expect("csv output is utf-8");
    Ok(Report {
        csv,
        queries_csv,
        warnings,
    })
}

/// Aggregates a results directory and writes `report.csv` and
/// `queries.csv` into `out_dir`.
pub fn cmd_report(results_dir: &Path, out_dir: &Path) -> Result<Report> {
    let (records, mut warnings) = read_records(results_dir)?;
    if records.is_empty() {
        warnings.push(format!("no result files in {}", results_dir.display()));
    }
    let mut report = build_report(&records)?;
    warnings.append(&mut report.warnings);
    report.warnings = warnings;
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    for (name, body) in [
        ("report.csv", &report.csv),
        ("queries.csv", &report.queries_csv),
    ] {
        let p = out_dir.join(name);
        fs::write(&p, body).map_err(|e| Error::io(&p, e))?;
    }
    Ok(report)
}

/// Stage 1, stage 2 and the report in one call.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Report> {
    cmd_gen_constraints(config)?;
    cmd_cluster(config, &config.constraints_path())?;
    cmd_report(&config.results_dir(), &config.output_dir)
}
