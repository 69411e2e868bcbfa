//! Command-line front end.
//!
//! Numeric options resolve in the order flag, `--config` file, built-in
//! default. The seed additionally falls back to `HEXSEP_SEED` before the
//! default [`DEFAULT_SEED`].

use std::collections::HashMap;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::geom::Point2;
use crate::mc::{self, Experiment, NodeProcessSpec, SimRecord};
use crate::pipeline::{self, AnomalyReport, Dataset, DetectorModel, IngestOptions, PipelineConfig, PipelineRun};
use crate::rgg::{ClusterSet, GraphMode};
use crate::sv::{self, SupportVectorSet};
use crate::thresh::{self, ThresholdParams};

pub const VERSION: &str = concat!("hexsep ", env!("CARGO_PKG_VERSION"));
pub const DEFAULT_SEED: u64 = 20_240_521;
pub const SEED_ENV: &str = "HEXSEP_SEED";

/// Exit code when no point is anomalous.
pub const EXIT_NOT_SEPARABLE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "hexsep", version, about = "Hexagonal thresholds, percolation experiments and anomaly separation")]
pub struct Cli {
    /// File of key=value pairs supplying defaults for any option.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form thresholds for one (M, N) pair.
    Threshold(ThresholdArgs),
    /// Monte Carlo threshold curves.
    Simulate(SimulateArgs),
    /// Project and cluster a dataset.
    Cluster(DataArgs),
    /// Full detection report.
    Detect(DataArgs),
    /// Support-vector report.
    Sv(DataArgs),
}

#[derive(Debug, Args)]
pub struct ThresholdArgs {
    #[arg(long = "M")]
    pub m: Option<u64>,
    #[arg(long = "N")]
    pub n: Option<u64>,
    #[arg(long)]
    pub rho: Option<f64>,
    /// Emit JSON instead of CSV.
    #[arg(long)]
    pub json: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Continuum,
    Hex,
    Both,
}

impl ModeArg {
    fn modes(self) -> Vec<GraphMode> {
        match self {
            ModeArg::Continuum => vec![GraphMode::Continuum],
            ModeArg::Hex => vec![GraphMode::Hex],
            ModeArg::Both => vec![GraphMode::Continuum, GraphMode::Hex],
        }
    }
}

/// Comma-separated radius list.
#[derive(Debug, Clone, PartialEq)]
pub struct Radii(pub Vec<f64>);

fn parse_radii_arg(s: &str) -> std::result::Result<Radii, String> {
    parse_radii(s).map(Radii)
}

fn parse_radii(s: &str) -> std::result::Result<Vec<f64>, String> {
    let radii = s
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| t.parse::<f64>().map_err(|e| format!("bad radius {t:?}: {e}")))
        .collect::<std::result::Result<Vec<f64>, String>>()?;
    if radii.is_empty() {
        return Err("radii list is empty".into());
    }
    Ok(radii)
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Points per sample, or the Poisson intensity with `--poisson`.
    #[arg(long)]
    pub n: Option<f64>,
    #[arg(long)]
    pub poisson: bool,
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub trials: Option<usize>,
    /// Comma-separated radii; sorted before use.
    #[arg(long, value_parser = parse_radii_arg)]
    pub radii: Option<Radii>,
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    #[arg(long)]
    pub workers: Option<usize>,
    #[arg(long)]
    pub eps: Option<f64>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
    /// Write threshold-window estimates as JSON.
    #[arg(long)]
    pub summary: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Comma-separated numeric records.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Skip the first line of the input.
    #[arg(long)]
    pub header: bool,
    /// Replace projected coordinates by their ranks.
    #[arg(long)]
    pub rank: bool,
    #[arg(long = "M")]
    pub m: Option<u64>,
    #[arg(long = "N")]
    pub n: Option<u64>,
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub gamma: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// JSON destination; stdout when absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

/// Parsed `key=value` configuration. Blank lines and `#` comments are
/// ignored; keys are case-sensitive and match long flag names.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ConfigFile {
    values: HashMap<String, String>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = HashMap::new();
        for (k, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(domain(format!("config line {}: expected key=value", k + 1)));
            };
            values.insert(key.trim().to_string(), value.trim().to_string());
        }
        Ok(Self { values })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::State(format!("cannot read config {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn get<T: FromStr>(&self, key: &str) -> Result<Option<T>>
    where
        T::Err: std::fmt::Display,
    {
        self.values
            .get(key)
            .map(|v| v.parse::<T>().map_err(|e| domain(format!("config key {key} = {v:?}: {e}"))))
            .transpose()
    }

    fn flag(&self, key: &str) -> Result<bool> {
        Ok(self.get::<bool>(key)?.unwrap_or(false))
    }
}

fn pick<T: FromStr>(flag: Option<T>, config: &ConfigFile, key: &str) -> Result<Option<T>>
where
    T::Err: std::fmt::Display,
{
    match flag {
        Some(v) => Ok(Some(v)),
        None => config.get(key),
    }
}

/// Seed from the flag, the config file, `HEXSEP_SEED`, or the default.
pub fn resolve_seed(flag: Option<u64>, config: &ConfigFile, env: Option<&str>) -> Result<u64> {
    if let Some(seed) = pick(flag, config, "seed")? {
        return Ok(seed);
    }
    match env {
        Some(v) => v.trim().parse().map_err(|e| domain(format!("{SEED_ENV} = {v:?}: {e}"))),
        None => Ok(DEFAULT_SEED),
    }
}

fn env_seed() -> Option<String> {
    std::env::var(SEED_ENV).ok()
}

fn writer(path: Option<&Path>) -> Result<Box<dyn Write>> {
    match path {
        Some(p) => {
            let f = File::create(p).map_err(|e| Error::State(format!("cannot create {}: {e}", p.display())))?;
            Ok(Box::new(BufWriter::new(f)))
        }
        None => Ok(Box::new(io::stdout().lock())),
    }
}

fn io_err(e: impl std::fmt::Display) -> Error {
    Error::State(format!("write failed: {e}"))
}

fn write_json<T: Serialize>(path: Option<&Path>, value: &T) -> Result<()> {
    let mut w = writer(path)?;
    serde_json::to_writer_pretty(&mut w, value).map_err(io_err)?;
    writeln!(w).map_err(io_err)?;
    w.flush().map_err(io_err)
}

/// Parse arguments, run, and return the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

pub fn run(cli: Cli) -> Result<i32> {
    let config = match &cli.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    match cli.command {
        Command::Threshold(a) => cmd_threshold(&a, &config),
        Command::Simulate(a) => cmd_simulate(&a, &config),
        Command::Cluster(a) => cmd_cluster(&a, &config),
        Command::Detect(a) => cmd_detect(&a, &config),
        Command::Sv(a) => cmd_sv(&a, &config),
    }
}

#[derive(Debug, Serialize)]
struct ThresholdRow {
    m: u64,
    n: u64,
    s: u64,
    r: f64,
    b: f64,
    p_c: f64,
    k: Option<u64>,
    r0_star: f64,
    delta_star: Option<f64>,
}

pub fn cmd_threshold(a: &ThresholdArgs, config: &ConfigFile) -> Result<i32> {
    let m = pick(a.m, config, "M")?.ok_or_else(|| domain("--M is required"))?;
    let rho = pick(a.rho, config, "rho")?;
    let n = match (pick(a.n, config, "N")?, rho) {
        (Some(n), _) => n,
        (None, Some(rho)) => (thresh::expected_classes(m, rho)? as f64).sqrt().round() as u64,
        (None, None) => return Err(domain("give --N or --rho")),
    };
    let p = ThresholdParams::compute(m, n, rho)?;
    let row = ThresholdRow {
        m: p.m,
        n: p.n,
        s: p.s,
        r: p.r,
        b: p.b,
        p_c: p.p_c,
        k: p.k,
        r0_star: p.r0_star,
        delta_star: p.delta_star,
    };
    if a.json || config.flag("json")? {
        write_json(None, &row)?;
    } else {
        let mut w = csv::Writer::from_writer(io::stdout().lock());
        w.serialize(&row).map_err(io_err)?;
        w.flush().map_err(io_err)?;
    }
    Ok(0)
}

/// Threshold-window estimates for one mode.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModeSummary {
    pub mode: GraphMode,
    pub r_eps: f64,
    pub r_one_minus_eps: f64,
    /// First probe radius with `p_hat >= 1/2`.
    pub r0: f64,
    pub delta: f64,
    /// Tail exponent fitted below `r0` on the requested radii.
    pub tail_exponent: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationSummary {
    pub version: &'static str,
    pub n: f64,
    pub poisson: bool,
    pub rho: f64,
    pub trials: usize,
    pub eps: f64,
    pub tol: f64,
    pub seed: u64,
    pub modes: Vec<ModeSummary>,
}

/// Resolved `simulate` parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulateConfig {
    pub spec: NodeProcessSpec,
    pub rho: f64,
    pub trials: usize,
    pub radii: Vec<f64>,
    pub modes: Vec<GraphMode>,
    pub workers: usize,
    pub eps: f64,
    pub tol: f64,
}

impl SimulateConfig {
    pub fn resolve(a: &SimulateArgs, config: &ConfigFile, env: Option<&str>) -> Result<Self> {
        let n = pick(a.n, config, "n")?.ok_or_else(|| domain("--n is required"))?;
        let seed = resolve_seed(a.seed, config, env)?;
        let poisson = a.poisson || config.flag("poisson")?;
        let spec = if poisson {
            NodeProcessSpec::poisson(n, seed)
        } else {
            if n < 0.0 || n.fract() != 0.0 {
                return Err(domain(format!("n must be a non-negative integer, got {n}")));
            }
            NodeProcessSpec::fixed(n as usize, seed)
        };
        spec.validate()?;
        let mut radii = match &a.radii {
            Some(r) => r.0.clone(),
            None => match config.values.get("radii") {
                Some(s) => parse_radii(s).map_err(domain)?,
                None => default_radii(n),
            },
        };
        if let Some(bad) = radii.iter().find(|r| !(**r >= 0.0 && r.is_finite())) {
            return Err(domain(format!("radii must be finite and non-negative, got {bad}")));
        }
        radii.sort_by(f64::total_cmp);
        let mode = pick(a.mode, config, "mode")?.unwrap_or(ModeArg::Both);
        Ok(Self {
            spec,
            rho: pick(a.rho, config, "rho")?.unwrap_or(0.6),
            trials: pick(a.trials, config, "trials")?.unwrap_or(200),
            radii,
            modes: mode.modes(),
            workers: pick(a.workers, config, "workers")?.unwrap_or(1),
            eps: pick(a.eps, config, "eps")?.unwrap_or(0.1),
            tol: pick(a.tol, config, "tol")?.unwrap_or(1e-3),
        })
    }
}

impl FromStr for ModeArg {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        <ModeArg as ValueEnum>::from_str(s, true)
    }
}

/// Forty radii evenly spaced up to `2 sqrt(ln n / n)`.
fn default_radii(n: f64) -> Vec<f64> {
    let top = if n >= 2.0 { 2.0 * (n.ln() / n).sqrt() } else { 1.0 };
    (1..=40).map(|k| top * k as f64 / 40.0).collect()
}

/// Curve records for every mode, after checking the coupled monotonicity
/// and comparison relations on the shared samples.
pub fn simulate(cfg: &SimulateConfig) -> Result<(Experiment, Vec<SimRecord>)> {
    let exp = Experiment::new(cfg.spec, cfg.rho, cfg.trials, cfg.workers)?;
    let mut records = Vec::new();
    for &mode in &cfg.modes {
        let curve = exp.curve(&cfg.radii, mode)?;
        if mode == GraphMode::Continuum && !curve.is_non_decreasing() {
            return Err(Error::Inconsistent("continuum estimates decrease along the radii".into()));
        }
        records.extend(curve.radii.iter().zip(&curve.p_hats).map(|(&r, e)| exp.record(r, mode, e)));
    }
    if cfg.modes.len() == 2 {
        for &r in &cfg.radii {
            exp.compare(r)?;
        }
    }
    Ok((exp, records))
}

pub fn summarize(exp: &Experiment, cfg: &SimulateConfig) -> Result<SimulationSummary> {
    let mut modes = Vec::new();
    for &mode in &cfg.modes {
        let r_eps = exp.r_eps(mode, cfg.eps, cfg.tol)?;
        let r_hi = exp.r_eps(mode, 1.0 - cfg.eps, cfg.tol)?;
        let r0 = exp.first_radius(mode, cfg.tol, |e| e.p_hat >= 0.5)?;
        let curve = exp.curve(&cfg.radii, mode)?;
        modes.push(ModeSummary {
            mode,
            r_eps,
            r_one_minus_eps: r_hi,
            r0,
            delta: r_hi - r_eps,
            tail_exponent: mc::fit_tail_exponent(&curve, r0, cfg.spec.n_or_lambda),
        });
    }
    Ok(SimulationSummary {
        version: VERSION,
        n: cfg.spec.n_or_lambda,
        poisson: cfg.spec.count_mode == mc::CountMode::PoissonLambda,
        rho: cfg.rho,
        trials: cfg.trials,
        eps: cfg.eps,
        tol: cfg.tol,
        seed: cfg.spec.seed,
        modes,
    })
}

pub fn write_records<W: Write>(w: W, records: &[SimRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(w);
    for r in records {
        w.serialize(r).map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

pub fn cmd_simulate(a: &SimulateArgs, config: &ConfigFile) -> Result<i32> {
    let cfg = SimulateConfig::resolve(a, config, env_seed().as_deref())?;
    let (exp, records) = simulate(&cfg)?;
    let output = pick(a.output.clone(), config, "output")?;
    write_records(writer(output.as_deref())?, &records)?;
    if let Some(path) = pick(a.summary.clone(), config, "summary")? {
        write_json(Some(&path), &summarize(&exp, &cfg)?)?;
    }
    Ok(0)
}

/// Resolved options shared by the dataset commands.
#[derive(Debug, Clone, PartialEq)]
pub struct DataConfig {
    pub input: PathBuf,
    pub header: bool,
    pub rank: bool,
    pub pipeline: PipelineConfig,
    pub seed: u64,
    pub output: Option<PathBuf>,
}

impl DataConfig {
    pub fn resolve(a: &DataArgs, config: &ConfigFile, env: Option<&str>) -> Result<Self> {
        let defaults = PipelineConfig::default();
        Ok(Self {
            input: pick(a.input.clone(), config, "input")?.ok_or_else(|| domain("--input is required"))?,
            header: a.header || config.flag("header")?,
            rank: a.rank || config.flag("rank")?,
            pipeline: PipelineConfig {
                m: pick(a.m, config, "M")?,
                n: pick(a.n, config, "N")?,
                rho: pick(a.rho, config, "rho")?.unwrap_or(defaults.rho),
                gamma: pick(a.gamma, config, "gamma")?.unwrap_or(defaults.gamma),
            },
            seed: resolve_seed(a.seed, config, env)?,
            output: pick(a.output.clone(), config, "output")?,
        })
    }

    pub fn load(&self) -> Result<Dataset> {
        let file = File::open(&self.input)
            .map_err(|e| Error::Ingest(format!("cannot open {}: {e}", self.input.display())))?;
        let rows = pipeline::read_csv(file, self.header)?;
        pipeline::ingest(rows, IngestOptions { rank_uniformize: self.rank })
    }
}

#[derive(Debug, Serialize)]
struct TransformSection<'a> {
    raw_dim: usize,
    rows: usize,
    center: &'a [f64],
    axes: &'a [Vec<f64>; 2],
    variances: [f64; 2],
    min: [f64; 2],
    max: [f64; 2],
    rank_uniformized: bool,
}

impl<'a> TransformSection<'a> {
    fn new(ds: &'a Dataset) -> Self {
        let t = &ds.transform;
        Self {
            raw_dim: ds.raw_dim,
            rows: ds.len(),
            center: &t.center,
            axes: &t.axes,
            variances: t.variances,
            min: t.min,
            max: t.max,
            rank_uniformized: t.rank_uniformized,
        }
    }
}

#[derive(Debug, Serialize)]
struct ClusterSection<'a> {
    m: u64,
    n: u64,
    radius: f64,
    count: usize,
    n0: u64,
    assignment: &'a [usize],
    sizes: &'a [usize],
    centers: &'a [Point2],
    /// Distance from each point to its cluster center.
    center_distance: Vec<f64>,
}

impl<'a> ClusterSection<'a> {
    fn new(m: u64, n: u64, n0: u64, cs: &'a ClusterSet, points: &[Point2]) -> Result<Self> {
        Ok(Self {
            m,
            n,
            radius: thresh::circumradius(m, n)?,
            count: cs.len(),
            n0,
            assignment: &cs.assignment,
            sizes: &cs.sizes,
            centers: &cs.centers,
            center_distance: points.iter().zip(&cs.assignment).map(|(p, &c)| p.dist(&cs.centers[c])).collect(),
        })
    }

    fn from_run(run: &'a PipelineRun, points: &[Point2]) -> Result<Self> {
        Self::new(run.m, run.n, run.n0, &run.clusters, points)
    }
}

#[derive(Debug, Serialize)]
struct AnomalySection<'a> {
    r0: f64,
    n0: u64,
    anomalous_classes: &'a [usize],
    anomalous_points: &'a [usize],
    regular_points: &'a [usize],
    /// Signed distance of every point to the fitted line.
    distances: &'a [f64],
}

impl<'a> AnomalySection<'a> {
    fn new(rep: &'a AnomalyReport, n0: u64) -> Self {
        Self {
            r0: rep.r0,
            n0,
            anomalous_classes: &rep.anomalous_classes,
            anomalous_points: &rep.anomalous_points,
            regular_points: &rep.regular_points,
            distances: &rep.distances,
        }
    }
}

#[derive(Debug, Serialize)]
struct DetectorSection<'a> {
    #[serde(flatten)]
    model: &'a DetectorModel,
    /// `-theta_gamma`, the reflected shift.
    theta_gamma_reflected: f64,
    training_accuracy: f64,
    band_agreement: pipeline::BandAgreement,
}

#[derive(Debug, Serialize)]
struct IndexedDistance {
    index: usize,
    distance: f64,
}

#[derive(Debug, Serialize)]
struct SupportSection {
    x_star: usize,
    anomaly_side: Vec<IndexedDistance>,
    regular_side: Vec<IndexedDistance>,
    equivalency_class: Vec<IndexedDistance>,
}

impl SupportSection {
    fn new(svs: &SupportVectorSet, rep: &AnomalyReport) -> Self {
        let tag = |v: &[usize]| v.iter().map(|&i| IndexedDistance { index: i, distance: rep.distances[i] }).collect();
        Self {
            x_star: svs.x_star,
            anomaly_side: tag(&svs.anomaly_side),
            regular_side: tag(&svs.regular_side),
            equivalency_class: tag(&svs.equivalency_class),
        }
    }
}

#[derive(Debug, Serialize)]
struct ClusterReport<'a> {
    version: &'static str,
    command: &'static str,
    input: String,
    transform: TransformSection<'a>,
    points: &'a [Point2],
    clusters: ClusterSection<'a>,
    warnings: &'a [String],
}

#[derive(Debug, Serialize)]
struct DetectReport<'a> {
    version: &'static str,
    command: &'static str,
    input: String,
    seed: u64,
    gamma: f64,
    separable: bool,
    transform: TransformSection<'a>,
    points: &'a [Point2],
    clusters: ClusterSection<'a>,
    hyperplane: &'a pipeline::Hyperplane,
    anomalies: AnomalySection<'a>,
    detector: Option<DetectorSection<'a>>,
    support_vectors: Option<SupportSection>,
    warnings: &'a [String],
}

#[derive(Debug, Serialize)]
struct SvReport<'a> {
    version: &'static str,
    command: &'static str,
    input: String,
    gamma: f64,
    separable: bool,
    support_vectors: Option<SupportSection>,
    warnings: &'a [String],
}

fn warn_all(run: &PipelineRun) {
    for w in &run.warnings {
        eprintln!("warning: {w}");
    }
}

pub fn cmd_cluster(a: &DataArgs, config: &ConfigFile) -> Result<i32> {
    let cfg = DataConfig::resolve(a, config, env_seed().as_deref())?;
    let ds = cfg.load()?;
    let (m, n) = pipeline::resolve_grid(ds.len(), &cfg.pipeline)?;
    let mut warnings = Vec::new();
    if ds.len() as u64 > m * m {
        warnings.push(format!("{} points exceed M² = {}", ds.len(), m * m));
    }
    let clusters = pipeline::cluster(&ds.projected, m, n)?;
    let n0 = ((clusters.len() as f64).sqrt().ceil() as u64).clamp(1, m);
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    let report = ClusterReport {
        version: VERSION,
        command: "cluster",
        input: cfg.input.display().to_string(),
        transform: TransformSection::new(&ds),
        points: &ds.projected,
        clusters: ClusterSection::new(m, n, n0, &clusters, &ds.projected)?,
        warnings: &warnings,
    };
    write_json(cfg.output.as_deref(), &report)?;
    Ok(0)
}

fn training_accuracy(model: &DetectorModel, rep: &AnomalyReport, points: &[Point2]) -> f64 {
    let correct = points
        .iter()
        .enumerate()
        .filter(|&(i, &p)| (pipeline::classify(model, p) == pipeline::Label::Anomalous) == rep.is_anomalous(i))
        .count();
    correct as f64 / points.len().max(1) as f64
}

/// Agreement of the band rule with the activations on uniform points.
fn band_check(model: &DetectorModel, seed: u64) -> pipeline::BandAgreement {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ys: Vec<Point2> = (0..10_000).map(|_| Point2::new(rng.random(), rng.random())).collect();
    pipeline::band_agreement(model, &ys)
}

fn support(run: &PipelineRun) -> Result<Option<SupportSection>> {
    run.detector
        .as_ref()
        .map(|m| sv::support_vectors(&run.report, m, run.n0).map(|s| SupportSection::new(&s, &run.report)))
        .transpose()
}

pub fn cmd_detect(a: &DataArgs, config: &ConfigFile) -> Result<i32> {
    let cfg = DataConfig::resolve(a, config, env_seed().as_deref())?;
    let ds = cfg.load()?;
    let run = pipeline::analyze(&ds.projected, &cfg.pipeline)?;
    warn_all(&run);
    let detector = run.detector.as_ref().map(|model| DetectorSection {
        model,
        theta_gamma_reflected: -model.theta_gamma,
        training_accuracy: training_accuracy(model, &run.report, &ds.projected),
        band_agreement: band_check(model, cfg.seed),
    });
    let report = DetectReport {
        version: VERSION,
        command: "detect",
        input: cfg.input.display().to_string(),
        seed: cfg.seed,
        gamma: cfg.pipeline.gamma,
        separable: run.detector.is_some(),
        transform: TransformSection::new(&ds),
        points: &ds.projected,
        clusters: ClusterSection::from_run(&run, &ds.projected)?,
        hyperplane: &run.hyperplane,
        anomalies: AnomalySection::new(&run.report, run.n0),
        detector,
        support_vectors: support(&run)?,
        warnings: &run.warnings,
    };
    write_json(cfg.output.as_deref(), &report)?;
    Ok(exit_for(&run))
}

pub fn cmd_sv(a: &DataArgs, config: &ConfigFile) -> Result<i32> {
    let cfg = DataConfig::resolve(a, config, env_seed().as_deref())?;
    let ds = cfg.load()?;
    let run = pipeline::analyze(&ds.projected, &cfg.pipeline)?;
    warn_all(&run);
    let report = SvReport {
        version: VERSION,
        command: "sv",
        input: cfg.input.display().to_string(),
        gamma: cfg.pipeline.gamma,
        separable: run.detector.is_some(),
        support_vectors: support(&run)?,
        warnings: &run.warnings,
    };
    write_json(cfg.output.as_deref(), &report)?;
    Ok(exit_for(&run))
}

fn exit_for(run: &PipelineRun) -> i32 {
    if run.detector.is_some() {
        0
    } else {
        eprintln!("not separable: no point lies at least R0 = {} from the fitted line", run.report.r0);
        EXIT_NOT_SEPARABLE
    }
}
