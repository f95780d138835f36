//! Command-line experiments. Each command writes one or more tables as CSV
//! (with `#` metadata lines) or JSON.
//!
//! Seeds: sweep point `p` runs with seed `seed + p·0x9E3779B97F4A7C15`
//! (wrapping); inside a point the chain and each matrix use their own ChaCha
//! stream (see [`crate::sampler::seeded_rng`]).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, ValueEnum};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::acceptance;
use crate::analytics::{
    avg_entropy, model_log_negativity_for, model_radius, rate_function, tail_log_probability, transition_points,
};
use crate::density::{semicircle_density, DensityCurve, DensityLaw};
use crate::empirics::{compare_density, histogram, ks_distance};
use crate::ensemble::{sample_pt_ensemble, Bipartition, NegativityEstimate};
use crate::error::{invalid, Error, Result};
use crate::params::{BarrierSpec, EnsembleParams, WallSide};
use crate::sampler::{
    estimate_tail_curve, mcmc_sample, pilot_thinning, seeded_rng, ChainConfig,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    /// Equilibrium density vs Metropolis histogram at one wall position.
    Density,
    /// Rate function and leading-order tail log-probability on a ζ grid.
    Rate,
    /// Analytic vs sampled average entropy on a ζ grid.
    Entropy,
    /// Partial-transpose spectrum histogram vs the semicircle model.
    Ptspectrum,
    /// Sampled log negativity vs the model on a ζ grid.
    Negativity,
    /// Exact-sampling estimate of P(Nλ_min > ζ) at small N.
    Tail,
    /// Run the acceptance suite.
    Verify,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Min,
    Max,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Command-line flags.
#[derive(Debug, Clone, Parser)]
#[command(name = "schmidt-ldp", version, about = "Constrained random-state spectra, entropy and negativity")]
pub struct Args {
    #[arg(long, value_enum)]
    pub command: Command,
    /// Wall position for single-point commands.
    #[arg(long)]
    pub zeta: Option<f64>,
    #[arg(long, value_enum, default_value = "min")]
    pub side: Side,
    #[arg(long, default_value_t = 100)]
    pub n: usize,
    /// Defaults to `n`.
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long, default_value_t = 2.0)]
    pub beta: f64,
    #[arg(long)]
    pub n1: Option<usize>,
    #[arg(long)]
    pub n2: Option<usize>,
    /// Total Metropolis sweeps per point, burn-in included.
    #[arg(long, default_value_t = 200_000)]
    pub sweeps: usize,
    #[arg(long, default_value_t = 20_000)]
    pub burn_in: usize,
    /// Thinning in sweeps; chosen from a pilot run as ceil(2τ) when absent.
    #[arg(long)]
    pub thin: Option<usize>,
    #[arg(long, default_value_t = 1000)]
    pub matrices: usize,
    /// Exact draws for `tail`.
    #[arg(long, default_value_t = 1_000_000)]
    pub draws: usize,
    /// ζ grid as `start:stop:step` for sweep commands.
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Output file; tables go to stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
    /// `verify`: criterion ids to run (all when absent).
    #[arg(long, value_delimiter = ',')]
    pub only: Vec<u8>,
    /// `verify`: multiply every tolerance by this factor.
    #[arg(long, default_value_t = 1.0)]
    pub tolerance_scale: f64,
}

/// Validated settings of one run; hashed into the output metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub command: Command,
    pub params: EnsembleParams,
    pub barrier: BarrierSpec,
    pub bipartition: Option<Bipartition>,
    pub sweeps: usize,
    pub burn_in: usize,
    pub thin: Option<usize>,
    pub matrices: usize,
    pub draws: usize,
    pub grid: Vec<f64>,
    pub seed: u64,
    pub only: Vec<u8>,
    pub tolerance_scale: f64,
    #[serde(skip)]
    pub output_path: Option<PathBuf>,
    #[serde(skip)]
    pub format: Option<Format>,
}

fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let parts: Vec<f64> = spec
        .split(':')
        .map(|s| s.trim().parse::<f64>().map_err(|_| invalid(format!("bad grid entry {s:?}"))))
        .collect::<Result<_>>()?;
    let [start, stop, step] = parts[..] else {
        return Err(invalid("grid must be start:stop:step"));
    };
    if !(step > 0.0) || stop < start {
        return Err(invalid("grid needs step > 0 and stop >= start"));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|k| start + k as f64 * step).collect())
}

impl ExperimentConfig {
    pub fn from_args(a: &Args) -> Result<Self> {
        let params = EnsembleParams::new(a.n, a.m.unwrap_or(a.n), a.beta)?;
        let side = match a.side {
            Side::Min => WallSide::Min,
            Side::Max => WallSide::Max,
            Side::None => WallSide::None,
        };
        let needs_zeta = matches!(a.command, Command::Density | Command::Ptspectrum) && side != WallSide::None;
        let barrier = match (a.zeta, side) {
            (_, WallSide::None) => BarrierSpec::none(),
            (Some(z), s) => BarrierSpec::new(s, z)?,
            (None, _) if needs_zeta => return Err(invalid("--zeta is required for this command")),
            (None, _) => BarrierSpec::none(),
        };
        let bipartition = match (a.n1, a.n2) {
            (Some(n1), Some(n2)) => Some(Bipartition::new(n1, n2)?),
            (None, None) => None,
            _ => return Err(invalid("give both --n1 and --n2")),
        };
        if matches!(a.command, Command::Ptspectrum | Command::Negativity) {
            let p = bipartition.ok_or_else(|| invalid("--n1 and --n2 are required"))?;
            if p.dim() != params.n {
                return Err(Error::DimensionMismatch { expected: params.n, got: p.dim() });
            }
        }
        let default_grid = match a.command {
            Command::Rate => "0:4:0.05",
            Command::Entropy => "0:4:0.25",
            Command::Negativity => "0:4:0.1",
            Command::Tail => "0:0.5:0.05",
            _ => "0:0:1",
        };
        let grid = parse_grid(a.grid.as_deref().unwrap_or(default_grid))?;
        if a.thin == Some(0) {
            return Err(invalid("--thin must be at least 1"));
        }
        if a.sweeps <= a.burn_in {
            return Err(invalid("--sweeps must exceed --burn-in"));
        }
        Ok(Self {
            command: a.command,
            params,
            barrier,
            bipartition,
            sweeps: a.sweeps,
            burn_in: a.burn_in,
            thin: a.thin,
            matrices: a.matrices,
            draws: a.draws,
            grid,
            seed: a.seed,
            only: a.only.clone(),
            tolerance_scale: a.tolerance_scale,
            output_path: a.out.clone(),
            format: Some(a.format),
        })
    }

    /// SHA-256 of the JSON form of the configuration.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        Sha256::digest(json.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }

    fn point_seed(&self, p: usize) -> u64 {
        self.seed.wrapping_add((p as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
    }

    fn chain(&self, barrier: &BarrierSpec, seed: u64) -> Result<ChainConfig> {
        let thin = match self.thin {
            Some(t) => t,
            None => pilot_thinning(&self.params, barrier, self.burn_in, 5000, seed ^ 0x5EED)?,
        };
        let cfg = ChainConfig { steps: self.sweeps, burn_in: self.burn_in, step_width: 1e-3, thin, seed };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// A named table of numbers.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Table {
    pub name: String,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    fn new(name: &str, columns: &[&str]) -> Self {
        Self { name: name.into(), columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }
}

/// Everything a command produces.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub tables: Vec<Table>,
    /// Extra `key: value` metadata (thresholds, diagnostics).
    pub notes: Vec<(String, String)>,
    /// False when a pass/fail threshold of the command was missed.
    pub passed: bool,
}

fn wall_for(zeta: f64) -> Result<BarrierSpec> {
    if zeta <= 1.0 {
        BarrierSpec::min_wall(zeta)
    } else {
        BarrierSpec::max_wall(zeta)
    }
}

/// Law used for comparison: the wall's equilibrium law, or Marchenko–Pastur
/// for the given `Q` without a wall.
fn reference_law(cfg: &ExperimentConfig) -> Result<DensityLaw> {
    if cfg.barrier.side == WallSide::None {
        Ok(DensityLaw::MarchenkoPastur { q: cfg.params.q() })
    } else if cfg.params.n != cfg.params.m {
        Err(Error::Unsupported("walled equilibrium densities are for N = M".into()))
    } else {
        DensityLaw::equilibrium(cfg.barrier)
    }
}

pub fn run_density(cfg: &ExperimentConfig) -> Result<Report> {
    let law = reference_law(cfg)?;
    if law.is_point_mass() {
        return Err(Error::Domain("the wall pins every eigenvalue at x = 1; nothing to sample".into()));
    }
    let chain = cfg.chain(&cfg.barrier, cfg.seed)?;
    let (spectra, diag) = mcmc_sample(&cfg.params, &cfg.barrier, &chain)?;
    let xs: Vec<f64> = spectra.iter().flat_map(|s| s.rescaled()).collect();
    let (a, b) = law.support();
    let mut curve = Table::new("curve", &["x", "density"]);
    for k in 0..512 {
        let x = a + (b - a) * (k as f64 + 0.5) / 512.0;
        curve.rows.push(vec![x, law.density(x)]);
    }
    let h = histogram(&xs, 50, (a, b))?;
    let mut hist = Table::new("histogram", &["x", "y", "yerr"]);
    for ((x, d), c) in h.centers().into_iter().zip(h.density()).zip(&h.counts) {
        let width = (b - a) / 50.0;
        hist.rows.push(vec![x, d, (*c as f64).sqrt() / (h.total as f64 * width)]);
    }
    let dist = compare_density(&h, &DensityCurve::from_law(law, 512)?)?;
    let mut distance = Table::new("distance", &["l1", "ks", "acceptance_rate", "tau", "thin", "kept"]);
    distance.rows.push(vec![
        dist.l1,
        dist.ks,
        diag.acceptance_rate,
        diag.autocorrelation_time,
        chain.thin as f64,
        diag.n_kept as f64,
    ]);
    Ok(Report {
        tables: vec![curve, hist, distance],
        notes: vec![("threshold".into(), "l1 < 0.05".into())],
        passed: dist.l1 < 0.05,
    })
}

pub fn run_rate(cfg: &ExperimentConfig) -> Result<Report> {
    let mut t = Table::new("rate", &["zeta", "phi", "log_probability"]);
    for &z in &cfg.grid {
        let b = match cfg.barrier.side {
            WallSide::Max => BarrierSpec::max_wall(z)?,
            WallSide::Min => BarrierSpec::min_wall(z)?,
            WallSide::None => wall_for(z)?,
        };
        t.rows.push(vec![z, rate_function(&b)?, tail_log_probability(&cfg.params, &b)?]);
    }
    Ok(Report { tables: vec![t], notes: vec![], passed: true })
}

/// Mean of `values` and its standard error from 20 batch means.
fn batch_mean(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    let mean = values.iter().sum::<f64>() / n as f64;
    let batches = 20.min(n);
    if batches < 2 {
        return (mean, f64::NAN);
    }
    let size = n / batches;
    let means: Vec<f64> =
        (0..batches).map(|k| values[k * size..(k + 1) * size].iter().sum::<f64>() / size as f64).collect();
    let m = means.iter().sum::<f64>() / batches as f64;
    let var = means.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (batches as f64 - 1.0);
    (mean, (var / batches as f64).sqrt())
}

pub fn run_entropy_sweep(cfg: &ExperimentConfig) -> Result<Report> {
    if cfg.params.n != cfg.params.m {
        return Err(Error::Unsupported("the entropy sweep needs N = M".into()));
    }
    let rows = cfg
        .grid
        .par_iter()
        .enumerate()
        .map(|(p, &z)| -> Result<Vec<f64>> {
            let b = wall_for(z)?;
            let analytic = avg_entropy(&b, cfg.params.n)?;
            if b.is_pinned() {
                return Ok(vec![z, analytic, analytic, 0.0]);
            }
            let chain = cfg.chain(&b, cfg.point_seed(p))?;
            let (spectra, _) = mcmc_sample(&cfg.params, &b, &chain)?;
            let s: Vec<f64> = spectra.iter().map(|s| s.entropy()).collect();
            let (mean, se) = batch_mean(&s);
            Ok(vec![z, analytic, mean, se])
        })
        .collect::<Result<Vec<_>>>()?;
    let mut t = Table::new("entropy", &["zeta", "analytic", "mc", "stderr"]);
    t.rows = rows;
    Ok(Report {
        tables: vec![t],
        notes: vec![("walls".into(), "min for zeta <= 1, max above".into())],
        passed: true,
    })
}

pub fn run_pt_spectrum(cfg: &ExperimentConfig) -> Result<Report> {
    let parts = cfg.bipartition.ok_or_else(|| invalid("bipartition required"))?;
    let chain = cfg.chain(&cfg.barrier, cfg.seed)?;
    let (samples, _) = sample_pt_ensemble(&cfg.params, &parts, &cfg.barrier, cfg.matrices, &chain)?;
    let r = model_radius(&cfg.barrier)?;
    let xs: Vec<f64> = samples.iter().flat_map(|s| s.pt.rescaled()).collect();
    let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min).min(1.0 - r);
    let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max).max(1.0 + r);
    let h = histogram(&xs, 60, (lo, hi))?;
    let width = (hi - lo) / 60.0;
    let mut t = Table::new("pt_spectrum", &["x", "y", "yerr", "semicircle"]);
    for ((x, d), c) in h.centers().into_iter().zip(h.density()).zip(&h.counts) {
        t.rows.push(vec![x, d, (*c as f64).sqrt() / (h.total as f64 * width), semicircle_density(x, r)]);
    }
    let ks = ks_distance(&xs, |x| crate::density::semicircle_cdf(x, r))?;
    let neg = NegativityEstimate::from_samples(&samples)?;
    let mut s = Table::new("summary", &["radius", "ks", "mean_log_negativity", "stderr", "npt_fraction"]);
    s.rows.push(vec![r, ks, neg.mean, neg.stderr, neg.npt_fraction]);
    Ok(Report {
        tables: vec![t, s],
        notes: vec![("threshold".into(), "ks < 0.03".into())],
        passed: ks < 0.03,
    })
}

pub fn run_negativity_sweep(cfg: &ExperimentConfig) -> Result<Report> {
    let parts = cfg.bipartition.ok_or_else(|| invalid("bipartition required"))?;
    let rows = cfg
        .grid
        .par_iter()
        .enumerate()
        .map(|(p, &z)| -> Result<Vec<f64>> {
            let b = wall_for(z)?;
            let model = model_log_negativity_for(&b)?;
            let chain = if b.is_pinned() {
                ChainConfig { steps: 1, burn_in: 0, step_width: 1e-3, thin: 1, seed: cfg.point_seed(p) }
            } else {
                cfg.chain(&b, cfg.point_seed(p))?
            };
            let (samples, _) = sample_pt_ensemble(&cfg.params, &parts, &b, cfg.matrices, &chain)?;
            let est = NegativityEstimate::from_samples(&samples)?;
            Ok(vec![z, model, est.mean, est.stderr, est.npt_fraction])
        })
        .collect::<Result<Vec<_>>>()?;
    let mut t = Table::new("negativity", &["zeta", "model", "mc", "stderr", "npt_fraction"]);
    t.rows = rows;
    let (lo, hi) = transition_points();
    Ok(Report {
        tables: vec![t],
        notes: vec![
            ("transitions".into(), format!("{lo} {hi}")),
            ("walls".into(), "min for zeta <= 1, max above".into()),
        ],
        passed: true,
    })
}

pub fn run_tail(cfg: &ExperimentConfig) -> Result<Report> {
    let mut rng = seeded_rng(cfg.seed, 0);
    let est = estimate_tail_curve(&cfg.params, &cfg.grid, cfg.draws, &mut rng)?;
    let mut t = Table::new("tail", &["zeta", "p", "stderr", "rate_estimate", "phi"]);
    for e in est {
        let phi = rate_function(&BarrierSpec::min_wall(e.zeta)?)?;
        t.rows.push(vec![e.zeta, e.p, e.stderr, e.empirical_rate(&cfg.params), phi]);
    }
    Ok(Report {
        tables: vec![t],
        notes: vec![("zero_success_bound".into(), "stderr column holds 3/draws when p = 0".into())],
        passed: true,
    })
}

pub fn run_verify(cfg: &ExperimentConfig) -> Result<Report> {
    let settings = acceptance::Settings { seed: cfg.seed, tolerance_scale: cfg.tolerance_scale };
    let reports = acceptance::run(&cfg.only, &settings);
    if reports.is_empty() {
        return Err(invalid("no criterion matches --only"));
    }
    for r in &reports {
        eprintln!("{}", r.summary_line());
    }
    let mut t = Table::new("verify", &["criterion", "passed", "checks", "seconds"]);
    for r in &reports {
        t.rows.push(vec![r.id as f64, r.passed() as u8 as f64, r.checks.len() as f64, r.seconds]);
    }
    let passed = reports.iter().all(|r| r.passed());
    let detail = serde_json::to_string(&reports).map_err(|e| invalid(e.to_string()))?;
    Ok(Report { tables: vec![t], notes: vec![("report".into(), detail)], passed })
}

pub fn run(cfg: &ExperimentConfig) -> Result<Report> {
    match cfg.command {
        Command::Density => run_density(cfg),
        Command::Rate => run_rate(cfg),
        Command::Entropy => run_entropy_sweep(cfg),
        Command::Ptspectrum => run_pt_spectrum(cfg),
        Command::Negativity => run_negativity_sweep(cfg),
        Command::Tail => run_tail(cfg),
        Command::Verify => run_verify(cfg),
    }
}

fn metadata(cfg: &ExperimentConfig, report: &Report, seconds: f64) -> Vec<(String, String)> {
    let mut meta = vec![
        ("version".to_string(), env!("CARGO_PKG_VERSION").to_string()),
        ("command".into(), serde_json::to_string(&cfg.command).unwrap_or_default().replace('"', "")),
        ("seed".into(), cfg.seed.to_string()),
        ("config_sha256".into(), cfg.hash()),
        ("config".into(), serde_json::to_string(cfg).unwrap_or_default()),
    ];
    meta.extend(report.notes.iter().cloned());
    meta.push(("passed".into(), report.passed.to_string()));
    meta.push(("wall_clock_seconds".into(), format!("{seconds:.3}")));
    meta
}

/// CSV rendering: `# key: value` lines, then per table a `# table: name`
/// line, a header row and the rows; tables separated by a blank line.
pub fn render_csv(meta: &[(String, String)], tables: &[Table]) -> Result<String> {
    let mut out = String::new();
    for (k, v) in meta {
        out.push_str(&format!("# {k}: {v}\n"));
    }
    for (i, t) in tables.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        out.push_str(&format!("# table: {}\n", t.name));
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&t.columns).map_err(|e| invalid(e.to_string()))?;
        for row in &t.rows {
            w.write_record(row.iter().map(|v| v.to_string())).map_err(|e| invalid(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| invalid(e.to_string()))?;
        out.push_str(&String::from_utf8(bytes).map_err(|e| invalid(e.to_string()))?);
    }
    Ok(out)
}

pub fn render_json(meta: &[(String, String)], tables: &[Table]) -> Result<String> {
    let meta: serde_json::Map<String, serde_json::Value> =
        meta.iter().map(|(k, v)| (k.clone(), serde_json::Value::String(v.clone()))).collect();
    let doc = serde_json::json!({ "metadata": meta, "tables": tables });
    serde_json::to_string_pretty(&doc).map_err(|e| invalid(e.to_string()))
}

fn write_output(path: Option<&Path>, text: &str) -> std::io::Result<()> {
    match path {
        Some(p) => fs::write(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn configure_threads() {
    if let Some(n) = std::env::var("SCHMIDT_LDP_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        // ignore the error when a pool already exists
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
}

/// Entry point: exit 0 on success, 1 when a threshold is missed, 2 on usage
/// or configuration errors.
pub fn main_with(args: Args) -> ExitCode {
    configure_threads();
    let cfg = match ExperimentConfig::from_args(&args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let start = Instant::now();
    let report = match run(&cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let meta = metadata(&cfg, &report, start.elapsed().as_secs_f64());
    let text = match args.format {
        Format::Csv => render_csv(&meta, &report.tables),
        Format::Json => render_json(&meta, &report.tables),
    };
    let written = text.map_err(|e| e.to_string()).and_then(|t| {
        write_output(cfg.output_path.as_deref(), &t).map_err(|e| e.to_string())
    });
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    if report.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

pub fn main() -> ExitCode {
    main_with(Args::parse())
}
