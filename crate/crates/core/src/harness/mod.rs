//! Experiment presets, multi-seed execution, aggregation and CSV output.

pub mod checks;
pub mod config;
pub mod csv;

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dynamics::{run_chain, ChainConfig, Method, NoiseKind, RunRecord, StepCheck};
use crate::error::{Error, Result};
use crate::geometry::FeasibleDomain;
use crate::measure::{build_oracle, tv_distance, GibbsOracle};
use crate::objectives::{make_benchmark_mixture, reference_minimum, GaussianMixture, Objective};

pub use config::{ConfigFile, Overrides, SeedList};

/// Seed of the benchmark mixture used by the planar presets: the smallest
/// seed whose grid minimizer lies within 0.2 of `(0, -2)` and from which PG,
/// started at the projection of `(0.5, 0.5)`, stops at a non-global minimum.
pub const GM2D_MIXTURE_SEED: u64 = 13;
/// Default seeds for multi-seed runs: `0..=19`.
pub const DEFAULT_SEEDS: std::ops::RangeInclusive<u64> = 0..=19;
pub const ROSENBROCK_DIMS: [usize; 3] = [4, 10, 20];
pub const RASTRIGIN_DIMS: [usize; 6] = [2, 3, 5, 10, 20, 30];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PresetName {
    Gm2d,
    Gm2dPgldVsRgld,
    Gm2dBetaSweep,
    Gm2dEtaSweep,
    Rosenbrock,
    Rastrigin,
    Gibbs1d,
    Custom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ObjectiveSpec {
    Quadratic {
        dim: usize,
        scale: f64,
    },
    /// The 25-well planar benchmark mixture.
    BenchmarkMixture {
        seed: u64,
    },
    GaussianMixture {
        weights: Vec<f64>,
        means: Vec<Vec<f64>>,
    },
    Rosenbrock {
        dim: usize,
    },
    Rastrigin {
        dim: usize,
    },
}

impl ObjectiveSpec {
    pub fn build(&self) -> Result<Objective> {
        match self {
            ObjectiveSpec::Quadratic { dim, scale } => Objective::quadratic(*dim, *scale),
            ObjectiveSpec::BenchmarkMixture { seed } => Ok(make_benchmark_mixture(*seed)),
            ObjectiveSpec::GaussianMixture { weights, means } => Ok(Objective::GaussianMixture(
                GaussianMixture::new(weights.clone(), means.clone())?,
            )),
            ObjectiveSpec::Rosenbrock { dim } => Objective::rosenbrock(*dim),
            ObjectiveSpec::Rastrigin { dim } => Objective::rastrigin(*dim),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DomainSpec {
    Ball {
        center: Vec<f64>,
        radius: f64,
    },
    Shell {
        center: Vec<f64>,
        inner_radius: f64,
        outer_radius: f64,
    },
}

impl DomainSpec {
    pub fn build(&self) -> Result<FeasibleDomain> {
        match self {
            DomainSpec::Ball { center, radius } => FeasibleDomain::ball(center.clone(), *radius),
            DomainSpec::Shell {
                center,
                inner_radius,
                outer_radius,
            } => FeasibleDomain::shell(center.clone(), *inner_radius, *outer_radius),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StartKeyword {
    /// Uniform over the domain, drawn per seed.
    Uniform,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StartSpec {
    Point(Vec<f64>),
    Keyword(StartKeyword),
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Aggregation {
    None,
    #[default]
    MedianWithQuartiles,
}

/// Stationarity diagnostic attached to a run: TV distance between the
/// chain's empirical measure and a quadrature oracle over growing prefixes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
pub struct StationaritySpec {
    pub cells: usize,
    pub prefixes: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub name: String,
    pub preset: PresetName,
    pub objective: ObjectiveSpec,
    pub domain: DomainSpec,
    pub methods: Vec<Method>,
    pub eta: f64,
    pub beta: f64,
    pub steps: usize,
    pub noise: NoiseKind,
    pub start: StartSpec,
    /// Replace a fixed start outside the domain by its projection.
    pub project_start: bool,
    pub seeds: Vec<u64>,
    pub output: PathBuf,
    pub aggregation: Aggregation,
    pub workers: usize,
    pub step_check: StepCheck,
    pub stationarity: Option<StationaritySpec>,
}

fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn gm2d_base(name: &str, preset: PresetName, methods: Vec<Method>) -> ExperimentSpec {
    ExperimentSpec {
        name: name.into(),
        preset,
        objective: ObjectiveSpec::BenchmarkMixture {
            seed: GM2D_MIXTURE_SEED,
        },
        domain: DomainSpec::Shell {
            center: vec![0.0, 0.0],
            inner_radius: 0.9,
            outer_radius: 4.0,
        },
        methods,
        eta: 0.05,
        beta: 1.0,
        steps: 10_000,
        noise: NoiseKind::Rademacher,
        start: StartSpec::Point(vec![0.5, 0.5]),
        project_start: true,
        seeds: DEFAULT_SEEDS.collect(),
        output: PathBuf::from("out"),
        aggregation: Aggregation::MedianWithQuartiles,
        workers: default_workers(),
        step_check: StepCheck::Enforce,
        stationarity: None,
    }
}

/// Planar mixture on Shell(0.9, 4), PG versus RGLD.
pub fn preset_gm2d() -> ExperimentSpec {
    gm2d_base("gm2d", PresetName::Gm2d, vec![Method::Pg, Method::Rgld])
}

/// Planar mixture, RGLD versus PGLD with shared seeds.
pub fn preset_gm2d_pgld_vs_rgld() -> ExperimentSpec {
    gm2d_base(
        "gm2d-pgld-vs-rgld",
        PresetName::Gm2dPgldVsRgld,
        vec![Method::Rgld, Method::Pgld],
    )
}

/// RGLD on the planar mixture at `beta` in {1, 8}.
pub fn preset_gm2d_beta_sweep() -> Vec<ExperimentSpec> {
    [1.0, 8.0]
        .into_iter()
        .map(|beta| ExperimentSpec {
            beta,
            ..gm2d_base(
                &format!("gm2d-beta{beta}"),
                PresetName::Gm2dBetaSweep,
                vec![Method::Rgld],
            )
        })
        .collect()
}

/// Step sizes of the planar eta sweep.
pub const GM2D_ETA_SWEEP: [f64; 4] = [0.005, 0.01, 0.02, 0.05];

/// RGLD on the planar mixture at `beta = 1` across [`GM2D_ETA_SWEEP`].
pub fn preset_gm2d_eta_sweep() -> Vec<ExperimentSpec> {
    GM2D_ETA_SWEEP
        .into_iter()
        .map(|eta| ExperimentSpec {
            eta,
            ..gm2d_base(
                &format!("gm2d-eta{eta}"),
                PresetName::Gm2dEtaSweep,
                vec![Method::Rgld],
            )
        })
        .collect()
}

/// Rosenbrock on Shell(0.5 sqrt d, 2 sqrt d), `eta = 5e-4`, `beta = 0.25 d`.
///
/// The worst-case gradient over this shell makes the a-priori step check
/// fail for every `d`, so the preset runs in [`StepCheck::Monitor`] mode and
/// out-of-margin proposals show up in the fallback counters.
pub fn preset_rosenbrock(d: usize) -> Result<ExperimentSpec> {
    if !ROSENBROCK_DIMS.contains(&d) {
        return Err(Error::config(
            "dim",
            format!("rosenbrock preset supports d in {ROSENBROCK_DIMS:?}, got {d}"),
        ));
    }
    Ok(multi_dim_spec(
        format!("rosenbrock-d{d}"),
        PresetName::Rosenbrock,
        ObjectiveSpec::Rosenbrock { dim: d },
        0.5 * (d as f64).sqrt(),
        2.0 * (d as f64).sqrt(),
        0.25 * d as f64,
        d,
        StepCheck::Monitor,
    ))
}

/// Rastrigin on Shell(0.9, 5.12), `eta = 5e-4`, `beta = 0.05 d`.
pub fn preset_rastrigin(d: usize) -> Result<ExperimentSpec> {
    if !RASTRIGIN_DIMS.contains(&d) {
        return Err(Error::config(
            "dim",
            format!("rastrigin preset supports d in {RASTRIGIN_DIMS:?}, got {d}"),
        ));
    }
    Ok(multi_dim_spec(
        format!("rastrigin-d{d}"),
        PresetName::Rastrigin,
        ObjectiveSpec::Rastrigin { dim: d },
        0.9,
        5.12,
        0.05 * d as f64,
        d,
        StepCheck::Enforce,
    ))
}

#[allow(clippy::too_many_arguments)]
fn multi_dim_spec(
    name: String,
    preset: PresetName,
    objective: ObjectiveSpec,
    inner: f64,
    outer: f64,
    beta: f64,
    d: usize,
    step_check: StepCheck,
) -> ExperimentSpec {
    ExperimentSpec {
        name,
        preset,
        objective,
        domain: DomainSpec::Shell {
            center: vec![0.0; d],
            inner_radius: inner,
            outer_radius: outer,
        },
        methods: vec![Method::Pg, Method::Rgld],
        eta: 5e-4,
        beta,
        steps: 200_000,
        noise: NoiseKind::Rademacher,
        start: StartSpec::Keyword(StartKeyword::Uniform),
        project_start: false,
        seeds: DEFAULT_SEEDS.collect(),
        output: PathBuf::from("out"),
        aggregation: Aggregation::MedianWithQuartiles,
        workers: default_workers(),
        step_check,
        stationarity: None,
    }
}

/// RGLD on `x^2 / 2` over [-1, 1] at `beta = 2`, checked against a
/// 256-cell quadrature of the Gibbs density.
pub fn preset_gibbs1d() -> ExperimentSpec {
    ExperimentSpec {
        name: "gibbs1d".into(),
        preset: PresetName::Gibbs1d,
        objective: ObjectiveSpec::Quadratic { dim: 1, scale: 1.0 },
        domain: DomainSpec::Ball {
            center: vec![0.0],
            radius: 1.0,
        },
        methods: vec![Method::Rgld],
        eta: 1e-3,
        beta: 2.0,
        steps: 2_000_000,
        noise: NoiseKind::Rademacher,
        start: StartSpec::Point(vec![0.0]),
        project_start: false,
        seeds: vec![0],
        output: PathBuf::from("out"),
        aggregation: Aggregation::None,
        workers: default_workers(),
        step_check: StepCheck::Enforce,
        stationarity: Some(StationaritySpec {
            cells: 256,
            prefixes: vec![10_000, 100_000, 1_000_000, 2_000_000],
        }),
    }
}

/// Resolves a preset name such as `gm2d`, `rosenbrock:10` or `rastrigin`
/// (default dimensions 4 and 2) into one or more specs.
pub fn preset_by_name(name: &str) -> Result<Vec<ExperimentSpec>> {
    let (base, dim) = match name.split_once(':') {
        Some((b, d)) => {
            let d: usize = d
                .parse()
                .map_err(|_| Error::config("preset", format!("bad dimension in `{name}`")))?;
            (b, Some(d))
        }
        None => (name, None),
    };
    let no_dim = |specs: Vec<ExperimentSpec>| {
        if dim.is_some() {
            Err(Error::config(
                "preset",
                format!("`{base}` takes no dimension"),
            ))
        } else {
            Ok(specs)
        }
    };
    match base {
        "gm2d" => no_dim(vec![preset_gm2d()]),
        "gm2d-pgld-vs-rgld" => no_dim(vec![preset_gm2d_pgld_vs_rgld()]),
        "gm2d-beta-sweep" => no_dim(preset_gm2d_beta_sweep()),
        "gm2d-eta-sweep" => no_dim(preset_gm2d_eta_sweep()),
        "gibbs1d" => no_dim(vec![preset_gibbs1d()]),
        "rosenbrock" => Ok(vec![preset_rosenbrock(dim.unwrap_or(4))?]),
        "rastrigin" => Ok(vec![preset_rastrigin(dim.unwrap_or(2))?]),
        other => Err(Error::config("preset", format!("unknown preset `{other}`"))),
    }
}

pub fn is_preset_name(name: &str) -> bool {
    let base = name.split_once(':').map_or(name, |(b, _)| b);
    matches!(
        base,
        "gm2d"
            | "gm2d-pgld-vs-rgld"
            | "gm2d-beta-sweep"
            | "gm2d-eta-sweep"
            | "gibbs1d"
            | "rosenbrock"
            | "rastrigin"
    )
}

/// A spec with its objective and domain built and its chains configured.
#[derive(Debug, Clone)]
pub struct PreparedExperiment {
    pub spec: ExperimentSpec,
    pub objective: Objective,
    pub domain: FeasibleDomain,
    /// Minimum of the objective over the domain, when known.
    pub min_f: Option<f64>,
    /// One config per `(method, seed)`, methods outermost.
    pub chains: Vec<ChainConfig>,
}

impl ExperimentSpec {
    /// Builds the objective and domain and validates every chain config.
    pub fn prepare(&self) -> Result<PreparedExperiment> {
        if self.name.is_empty()
            || !self
                .name
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
        {
            return Err(Error::config(
                "name",
                "use ASCII letters, digits, '-', '_' or '.'",
            ));
        }
        if self.methods.is_empty() {
            return Err(Error::config("methods", "at least one method is required"));
        }
        if self.seeds.is_empty() {
            return Err(Error::config("seeds", "at least one seed is required"));
        }
        if self.workers == 0 {
            return Err(Error::config("workers", "must be at least 1"));
        }
        let objective = self.objective.build()?;
        let domain = self.domain.build()?;
        if objective.dim() != domain.dim() {
            return Err(Error::config(
                "domain",
                format!(
                    "dimension {} does not match objective dimension {}",
                    domain.dim(),
                    objective.dim()
                ),
            ));
        }
        if let Some(st) = &self.stationarity {
            if st.prefixes.is_empty() || st.prefixes.iter().any(|p| *p == 0 || *p > self.steps) {
                return Err(Error::config(
                    "stationarity.prefixes",
                    format!("prefixes must lie in 1..={}", self.steps),
                ));
            }
            if domain.dim() > 2 {
                return Err(Error::config("stationarity", "only available for d <= 2"));
            }
        }
        let bounds = match self.step_check {
            StepCheck::Enforce => Some(objective.lipschitz_bounds(&domain)?),
            StepCheck::Monitor => None,
        };
        let mut chains = Vec::with_capacity(self.methods.len() * self.seeds.len());
        for &method in &self.methods {
            for &seed in &self.seeds {
                let x0 = self.start_point(&domain, seed)?;
                let cfg = ChainConfig {
                    method,
                    eta: self.eta,
                    beta: self.beta,
                    steps: self.steps,
                    seed,
                    noise: self.noise,
                    x0,
                    record_trajectory: self.stationarity.is_some(),
                    step_check: self.step_check,
                };
                cfg.validate_with(&objective, &domain, bounds.as_ref())?;
                chains.push(cfg);
            }
        }
        let min_f = reference_minimum(&objective, &domain);
        Ok(PreparedExperiment {
            spec: self.clone(),
            objective,
            domain,
            min_f,
            chains,
        })
    }

    fn start_point(&self, domain: &FeasibleDomain, seed: u64) -> Result<Vec<f64>> {
        match &self.start {
            StartSpec::Point(p) => {
                if p.len() != domain.dim() {
                    return Err(Error::config(
                        "x0",
                        format!("has dimension {}, domain has {}", p.len(), domain.dim()),
                    ));
                }
                if self.project_start {
                    domain.project(p)
                } else {
                    Ok(p.clone())
                }
            }
            StartSpec::Keyword(StartKeyword::Uniform) => {
                // stream 1 keeps start draws independent of the chain noise on stream 0
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(1);
                Ok(domain.sample_uniform(&mut rng))
            }
        }
    }
}

/// Per-step median and quartiles of the optimization error across seeds.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateCurve {
    pub q25: Vec<f64>,
    pub q50: Vec<f64>,
    pub q75: Vec<f64>,
    pub seeds: usize,
}

/// Linear-interpolation quantile of sorted data.
fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Aggregates `cumulative_min - min_f` across runs (or the raw cumulative
/// minimum when `min_f` is unknown).
pub fn aggregate(records: &[&RunRecord], min_f: Option<f64>) -> Result<AggregateCurve> {
    let n = records
        .first()
        .ok_or_else(|| Error::InvalidArgument {
            name: "records",
            reason: "nothing to aggregate".into(),
        })?
        .cumulative_min
        .len();
    if records.iter().any(|r| r.cumulative_min.len() != n) {
        return Err(Error::InvalidArgument {
            name: "records",
            reason: "runs have different lengths".into(),
        });
    }
    let offset = min_f.unwrap_or(0.0);
    let mut column = vec![0.0; records.len()];
    let mut curve = AggregateCurve {
        q25: Vec::with_capacity(n),
        q50: Vec::with_capacity(n),
        q75: Vec::with_capacity(n),
        seeds: records.len(),
    };
    for k in 0..n {
        for (c, r) in column.iter_mut().zip(records) {
            *c = r.cumulative_min[k] - offset;
        }
        column.sort_by(f64::total_cmp);
        curve.q25.push(quantile_sorted(&column, 0.25));
        curve.q50.push(quantile_sorted(&column, 0.5));
        curve.q75.push(quantile_sorted(&column, 0.75));
    }
    Ok(curve)
}

/// Median of a non-empty slice.
pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    quantile_sorted(&v, 0.5)
}

/// Results of running every chain of an experiment.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub prepared: PreparedExperiment,
    /// Same order as `prepared.chains`.
    pub records: Vec<RunRecord>,
    /// `(prefix length, TV distance)` when a stationarity check is attached.
    pub tv_curve: Option<Vec<(usize, f64)>>,
    pub oracle: Option<GibbsOracle>,
}

impl Simulation {
    pub fn records_for(&self, method: Method) -> Vec<&RunRecord> {
        self.records
            .iter()
            .filter(|r| r.config.method == method)
            .collect()
    }

    /// Final optimization error `min_k f(X_k) - min f` per seed for `method`.
    pub fn final_errors(&self, method: Method) -> Vec<f64> {
        let offset = self.prepared.min_f.unwrap_or(0.0);
        self.records_for(method)
            .iter()
            .map(|r| r.final_cumulative_min() - offset)
            .collect()
    }

    pub fn total_fallbacks(&self) -> u64 {
        self.records.iter().map(|r| r.fallback_count).sum()
    }
}

/// Runs every chain of an experiment without writing files.
pub fn simulate(spec: &ExperimentSpec) -> Result<Simulation> {
    let prepared = spec.prepare()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(spec.workers)
        .build()
        .map_err(|e| Error::config("workers", e.to_string()))?;
    let records: Vec<RunRecord> = pool.install(|| {
        prepared
            .chains
            .par_iter()
            .map(|cfg| run_chain(cfg, &prepared.objective, &prepared.domain))
            .collect::<Result<Vec<_>>>()
    })?;

    let (tv_curve, oracle) = match &spec.stationarity {
        Some(st) => {
            let oracle = build_oracle(&prepared.objective, &prepared.domain, spec.beta, st.cells)?;
            let rec = &records[0];
            (
                Some(tv_over_prefixes(rec, &oracle, &st.prefixes)?),
                Some(oracle),
            )
        }
        None => (None, None),
    };
    Ok(Simulation {
        prepared,
        records,
        tv_curve,
        oracle,
    })
}

/// TV distance between the oracle and the first `p` iterates of `rec`,
/// for each prefix length `p`.
pub fn tv_over_prefixes(
    rec: &RunRecord,
    oracle: &GibbsOracle,
    prefixes: &[usize],
) -> Result<Vec<(usize, f64)>> {
    let d = rec.dim();
    let traj = rec
        .trajectory
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument {
            name: "rec",
            reason: "trajectory was not recorded".into(),
        })?;
    let n = traj.len() / d;
    let mut sorted = prefixes.to_vec();
    sorted.sort_unstable();
    let mut hist = oracle.histogram();
    let mut filled = 0;
    let mut out = Vec::with_capacity(sorted.len());
    for p in sorted {
        if p > n || p == 0 {
            return Err(Error::InvalidArgument {
                name: "prefixes",
                reason: format!("prefix {p} outside 1..={n}"),
            });
        }
        hist.extend(traj[filled * d..p * d].chunks_exact(d));
        filled = p;
        out.push((p, tv_distance(&hist, oracle)?));
    }
    Ok(out)
}

/// Runs an experiment and writes its CSV files into `spec.output`.
///
/// Files: one `<name>_<method>_seed<seed>.csv` per chain, one
/// `<name>_<method>_aggregate.csv` per method when aggregating, and for
/// stationarity runs `<name>_tv.csv` plus `<name>_oracle.csv`.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<(Simulation, Vec<PathBuf>)> {
    let sim = simulate(spec)?;
    let files = write_outputs(&sim, &spec.output)?;
    Ok((sim, files))
}

pub fn write_outputs(sim: &Simulation, dir: &Path) -> Result<Vec<PathBuf>> {
    let spec = &sim.prepared.spec;
    fs::create_dir_all(dir)?;
    let mut files = Vec::new();
    let create =
        |path: &Path| -> Result<BufWriter<File>> { Ok(BufWriter::new(File::create(path)?)) };

    for rec in &sim.records {
        let path = dir.join(format!(
            "{}_{}_seed{}.csv",
            spec.name,
            rec.config.method.as_str(),
            rec.config.seed
        ));
        csv::write_chain(rec, create(&path)?)?;
        files.push(path);
    }
    if spec.aggregation == Aggregation::MedianWithQuartiles {
        for &method in &spec.methods {
            let curve = aggregate(&sim.records_for(method), sim.prepared.min_f)?;
            let path = dir.join(format!("{}_{}_aggregate.csv", spec.name, method.as_str()));
            csv::write_aggregate(&curve, create(&path)?)?;
            files.push(path);
        }
    }
    if let (Some(tv), Some(oracle)) = (&sim.tv_curve, &sim.oracle) {
        let path = dir.join(format!("{}_tv.csv", spec.name));
        let mut w = ::csv::Writer::from_writer(create(&path)?);
        w.write_record(["prefix", "tv"])
            .map_err(|e| Error::Io(e.to_string()))?;
        for (p, v) in tv {
            w.write_record([p.to_string(), csv::fmt_float(*v)])
                .map_err(|e| Error::Io(e.to_string()))?;
        }
        w.flush()?;
        files.push(path);

        let mut hist = oracle.histogram();
        let rec = &sim.records[0];
        if let Some(traj) = &rec.trajectory {
            hist.extend(traj.chunks_exact(rec.dim()));
        }
        let path = dir.join(format!("{}_oracle.csv", spec.name));
        oracle.write_csv(Some(&hist), create(&path)?)?;
        files.push(path);
    }
    Ok(files)
}
