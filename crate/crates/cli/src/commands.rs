//! `run`, `histogram` and `surface`.

use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use vqa_core::bounds::{grid_argmin, product_grid, surface, Axis, Surface, SurfaceKind};
use vqa_core::noise::estimate_bias;
use vqa_core::optim::{fmt_f64, sa_run, RunOptions};
use vqa_core::{seed, BoundParams, MixtureFit, NoisyObjective, Trajectory};

use crate::config::{require, ExperimentConfig, HistogramSpec, SurfaceSpec};
use crate::error::{CliError, CliResult};
use crate::manifest::OutputSet;

const TAG_OBJECTIVE: u64 = 10;
const TAG_THETA0: u64 = 11;

/// Grid resolution per axis when a command needs `argmin f`.
pub const ARGMIN_GRID: usize = 64;

pub fn replicate_seed(base: u64, r: usize) -> u64 {
    seed::derive(base, r as u64)
}

/// Replicate `r` of the run described by `cfg`.
pub fn run_replicate(cfg: &ExperimentConfig, obj: &NoisyObjective, r: usize) -> CliResult<Trajectory> {
    let run = require(&cfg.run, "run")?;
    let est = require(&cfg.estimator, "estimator")?;
    let sched = require(&cfg.schedule, "schedule")?;
    let s = replicate_seed(run.seed, r);
    let obj = obj.with_seed_stream(seed::derive(s, TAG_OBJECTIVE));
    let theta0 = match &run.theta0 {
        Some(t) => t.clone(),
        None => {
            let mut rng = seed::rng(s, TAG_THETA0);
            (0..obj.p()).map(|_| rng.random_range(0.0..std::f64::consts::PI)).collect()
        }
    };
    let opts = RunOptions { probe_every: run.probe_every };
    Ok(sa_run(&obj, est, sched, &theta0, run.k, s, opts)?)
}

/// All replicates, in parallel, in replicate order.
pub fn run_replicates(cfg: &ExperimentConfig) -> CliResult<Vec<Trajectory>> {
    let run = require(&cfg.run, "run")?;
    if run.replicates == 0 {
        return Err(CliError::Core(vqa_core::Error::InvalidArgument("replicates must be at least 1".into())));
    }
    let obj = cfg.objective.build()?;
    (0..run.replicates)
        .into_par_iter()
        .map(|r| run_replicate(cfg, &obj, r))
        .collect()
}

/// Per-iteration mean and sample standard deviation (ddof = 1) of `fval`
/// across replicates, and the mean probed `∥∇f∥²`. The std column is
/// empty for a single replicate, as is the probe column off-probe.
pub fn summary_csv(trajs: &[Trajectory]) -> String {
    let mut s = String::from("k,fval_mean,fval_std,grad_norm_sq_mean,n\n");
    let n = trajs.len();
    let k_max = trajs.iter().map(|t| t.len()).min().unwrap_or(0);
    for k in 0..k_max {
        let vals: Vec<f64> = trajs.iter().map(|t| t.fvals[k]).collect();
        let mean = vals.iter().sum::<f64>() / n as f64;
        let std = if n > 1 {
            fmt_f64((vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt())
        } else {
            String::new()
        };
        let probes: Vec<f64> = trajs.iter().filter_map(|t| t.grad_norm_sq[k]).collect();
        let probe = if probes.is_empty() {
            String::new()
        } else {
            fmt_f64(probes.iter().sum::<f64>() / probes.len() as f64)
        };
        let _ = writeln!(s, "{},{},{},{},{}", k + 1, fmt_f64(mean), std, probe, n);
    }
    s
}

pub fn trajectory_file(r: usize) -> String {
    format!("trajectory_rep{r:03}.csv")
}

pub fn cmd_run(cfg: &ExperimentConfig, out_dir: &Path) -> CliResult<Vec<Trajectory>> {
    let mut out = OutputSet::new("run");
    let trajs = run_replicates(cfg)?;
    for (r, t) in trajs.iter().enumerate() {
        out.add(trajectory_file(r), t.to_csv());
    }
    out.add("summary.csv", summary_csv(&trajs));
    let seeds = trajs.iter().map(|t| t.seed).collect();
    out.finish(out_dir, Some(cfg), seeds)?;
    Ok(trajs)
}

/// One histogram level and repeat.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HistogramResult {
    pub label: String,
    pub btilde: Option<f64>,
    pub repeat: usize,
    pub seed: u64,
    pub theta: Vec<f64>,
    /// Exact value with the read-out model removed.
    pub reference_mean: f64,
    pub fit: MixtureFit,
    #[serde(skip)]
    pub samples: Vec<f64>,
}

/// Argmin of the noise-free objective over the default grid.
pub fn default_theta(obj: &NoisyObjective) -> CliResult<Vec<f64>> {
    let grid = product_grid(obj.p(), ARGMIN_GRID, 0.0, std::f64::consts::PI);
    let ideal = obj.to_ideal();
    Ok(grid_argmin(|t| ideal.exact_value(t, None), &grid)?)
}

/// Samples of `F(θ, ξ)` per read-out level. Repeat `r` uses the same seed
/// stream at every level.
pub fn histograms(cfg: &ExperimentConfig, spec: &HistogramSpec) -> CliResult<Vec<HistogramResult>> {
    let base = cfg.objective.build()?;
    let n = cfg.objective.graph.build()?.n();
    let theta = match &spec.theta {
        Some(t) => t.clone(),
        None => default_theta(&base)?,
    };
    let levels: Vec<Option<f64>> = if spec.btilde.is_empty() {
        vec![None]
    } else {
        spec.btilde.iter().copied().map(Some).collect()
    };
    let jobs: Vec<(usize, Option<f64>)> = (0..spec.repeats)
        .flat_map(|r| levels.iter().map(move |l| (r, *l)))
        .collect();
    jobs.into_par_iter()
        .map(|(r, level)| {
            let mut noise = base.noise().clone();
            if let Some(b) = level {
                noise.readout = Some(spec.btilde_model.model(b, n)?);
            }
            let s = seed::derive(spec.seed, r as u64);
            let obj = base.with_noise(noise.clone())?.with_seed_stream(s);
            let samples = obj.evaluate_batch(&theta, 0..spec.samples as u64)?;
            let reference = base
                .with_noise(vqa_core::NoiseConfig { readout: None, ..noise })?
                .exact_value(&theta, None)?;
            let fit = estimate_bias(&samples, Some(reference))?;
            let label = match level {
                Some(b) => format!("btilde{}_r{r}", fmt_f64(b)),
                None => format!("base_r{r}"),
            };
            Ok(HistogramResult {
                label,
                btilde: level,
                repeat: r,
                seed: s,
                theta: theta.clone(),
                reference_mean: reference,
                fit,
                samples,
            })
        })
        .collect()
}

pub fn cmd_histogram(cfg: &ExperimentConfig, spec: &HistogramSpec, out_dir: &Path) -> CliResult<Vec<HistogramResult>> {
    let mut out = OutputSet::new("histogram");
    let results = histograms(cfg, spec)?;
    for h in &results {
        let mut csv = String::from("sample,value\n");
        for (i, v) in h.samples.iter().enumerate() {
            let _ = writeln!(csv, "{i},{}", fmt_f64(*v));
        }
        out.add(format!("samples_{}.csv", h.label), csv);
        out.add(
            format!("mixture_{}.json", h.label),
            serde_json::to_string_pretty(h).expect("result serializes") + "\n",
        );
    }
    let seeds = results.iter().map(|h| h.seed).collect();
    let mut cfg = cfg.clone();
    cfg.histogram = Some(spec.clone());
    out.finish(out_dir, Some(&cfg), seeds)?;
    Ok(results)
}

/// `lo:hi:n`.
pub fn parse_axis(s: &str) -> CliResult<Axis> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || CliError::Schema(format!("axis {s:?} is not lo:hi:n"));
    if parts.len() != 3 {
        return Err(bad());
    }
    Ok(Axis {
        lo: parts[0].trim().parse().map_err(|_| bad())?,
        hi: parts[1].trim().parse().map_err(|_| bad())?,
        n: parts[2].trim().parse().map_err(|_| bad())?,
    })
}

/// `b=lo:hi:n,c=lo:hi:n` (the second key is `p` for the optimal-c surface).
pub fn parse_grid(s: &str) -> CliResult<(Option<Axis>, Option<Axis>)> {
    let (mut b, mut y) = (None, None);
    for item in s.split(',').filter(|x| !x.trim().is_empty()) {
        let (key, val) = item
            .split_once('=')
            .ok_or_else(|| CliError::Schema(format!("grid entry {item:?} is not key=lo:hi:n")))?;
        match key.trim() {
            "b" => b = Some(parse_axis(val)?),
            "c" | "p" => y = Some(parse_axis(val)?),
            k => return Err(CliError::Schema(format!("unknown grid axis {k:?}"))),
        }
    }
    Ok((b, y))
}

/// Applies `key=value` overrides to bound constants; keys and value types
/// follow the `[surface.params]` table.
pub fn apply_params(params: &BoundParams, overrides: &[String]) -> CliResult<BoundParams> {
    let mut table = match toml::Value::try_from(params).map_err(|e| CliError::Schema(e.to_string()))? {
        toml::Value::Table(t) => t,
        _ => unreachable!("BoundParams is a struct"),
    };
    for o in overrides {
        let (k, v) = o
            .split_once('=')
            .ok_or_else(|| CliError::Schema(format!("parameter {o:?} is not key=value")))?;
        let (k, v) = (k.trim(), v.trim());
        let old = table
            .get(k)
            .ok_or_else(|| CliError::Schema(format!("unknown bound parameter {k:?}")))?;
        let parsed = match old {
            toml::Value::Integer(_) => {
                toml::Value::Integer(v.parse().map_err(|_| CliError::Schema(format!("{k} needs an integer, got {v:?}")))?)
            }
            _ => toml::Value::Float(v.parse().map_err(|_| CliError::Schema(format!("{k} needs a number, got {v:?}")))?),
        };
        table.insert(k.to_string(), parsed);
    }
    toml::Value::Table(table)
        .try_into()
        .map_err(|e: toml::de::Error| CliError::Schema(e.to_string()))
}

pub fn default_axes(kind: SurfaceKind) -> (Axis, Axis) {
    let b = Axis { lo: 0.0, hi: 1.0, n: 21 };
    let y = match kind {
        SurfaceKind::OptimalC => Axis { lo: 1.0, hi: 20.0, n: 20 },
        _ => Axis { lo: 0.05, hi: 1.0, n: 20 },
    };
    (b, y)
}

pub fn build_surface(kind: SurfaceKind, spec: &SurfaceSpec) -> CliResult<Surface> {
    spec.params.validate()?;
    let (db, dy) = default_axes(kind);
    Ok(surface(
        kind,
        &spec.params,
        spec.regime,
        spec.variant,
        &spec.b.unwrap_or(db),
        &spec.y.unwrap_or(dy),
    )?)
}

pub fn surface_file(kind: SurfaceKind) -> String {
    let name = serde_json::to_value(kind).expect("kind serializes");
    format!("surface_{}.csv", name.as_str().expect("string tag"))
}

pub fn cmd_surface(kind: SurfaceKind, spec: &SurfaceSpec, out_dir: &Path) -> CliResult<Surface> {
    let mut out = OutputSet::new("surface");
    let s = build_surface(kind, spec)?;
    out.add(surface_file(kind), s.to_csv());
    let cfg = ExperimentConfig {
        surface: Some(SurfaceSpec { kind: Some(kind), ..spec.clone() }),
        ..ExperimentConfig::parse("").expect("empty config parses")
    };
    out.finish(out_dir, Some(&cfg), Vec::new())?;
    Ok(s)
}
