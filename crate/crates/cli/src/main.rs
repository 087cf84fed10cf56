use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use vqa_core::bounds::{SpsaVariant, SurfaceKind};
use vqa_core::Regime;
use vqa_opt::commands::{apply_params, cmd_histogram, cmd_run, cmd_surface, parse_grid};
use vqa_opt::config::{ExperimentConfig, SurfaceSpec};
use vqa_opt::verify::{format_table, Verifier};
use vqa_opt::{CliError, CliResult};

#[derive(Parser)]
#[command(name = "vqa-opt", version, about = "Biased zeroth-order optimization experiments")]
struct Cli {
    /// Output directory (default: the config's output_dir, else "out").
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Worker threads for replicate and grid parallelism.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Overrides every base seed in the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    TwoPointBound,
    SpsaBound,
    OptimalC,
    EffBias,
}

impl From<Kind> for SurfaceKind {
    fn from(k: Kind) -> Self {
        match k {
            Kind::TwoPointBound => SurfaceKind::TwoPointBound,
            Kind::SpsaBound => SurfaceKind::SpsaBound,
            Kind::OptimalC => SurfaceKind::OptimalC,
            Kind::EffBias => SurfaceKind::EffBias,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum RegimeArg {
    FixedBudget,
    Diminishing,
}

#[derive(Clone, Copy, ValueEnum)]
enum VariantArg {
    MainText,
    Restated,
}

#[derive(Subcommand)]
enum Command {
    /// Replicated stochastic-approximation runs.
    Run { config: PathBuf },
    /// Samples of the noisy objective at a fixed point, with a mixture fit.
    Histogram {
        config: PathBuf,
        /// Comma-separated parameter vector.
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        theta: Option<Vec<f64>>,
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Tabulates a bound over a (b, c) or (b, p) grid.
    Surface {
        /// Falls back to the config's [surface] kind.
        kind: Option<Kind>,
        /// "b=lo:hi:n,c=lo:hi:n" (use p for optimal-c).
        #[arg(long)]
        grid: Option<String>,
        /// Bound constant override, key=value; repeatable.
        #[arg(long = "param")]
        params: Vec<String>,
        #[arg(long)]
        regime: Option<RegimeArg>,
        #[arg(long)]
        variant: Option<VariantArg>,
        /// Config whose [surface] section supplies defaults.
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Runs the verification suite.
    Verify { config: Option<PathBuf> },
}

fn load(path: &Path, seed: Option<u64>) -> CliResult<ExperimentConfig> {
    Ok(ExperimentConfig::load(path)?.with_seed(seed))
}

fn out_dir(cli: &Option<PathBuf>, cfg: Option<&ExperimentConfig>) -> PathBuf {
    cli.clone()
        .or_else(|| cfg.and_then(|c| c.output_dir.clone()))
        .unwrap_or_else(|| PathBuf::from("out"))
}

fn execute(cli: Cli) -> CliResult<()> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Schema(format!("--threads: {e}")))?;
    }
    match cli.command {
        Command::Run { config } => {
            let cfg = load(&config, cli.seed)?;
            let dir = out_dir(&cli.out_dir, Some(&cfg));
            let trajs = cmd_run(&cfg, &dir)?;
            println!("{} replicates written to {}", trajs.len(), dir.display());
        }
        Command::Histogram { config, theta, samples } => {
            let cfg = load(&config, cli.seed)?;
            let mut spec = cfg.histogram.clone().unwrap_or_default();
            if theta.is_some() {
                spec.theta = theta;
            }
            if let Some(n) = samples {
                spec.samples = n;
            }
            let dir = out_dir(&cli.out_dir, Some(&cfg));
            for h in cmd_histogram(&cfg, &spec, &dir)? {
                println!("{}: b_hat = {:.6}, mode = {:.6}, normal mean = {:.6}", h.label, h.fit.b_hat, h.fit.mode, h.fit.mean);
            }
        }
        Command::Surface { kind, grid, params, regime, variant, config } => {
            let cfg = config.as_deref().map(|p| load(p, cli.seed)).transpose()?;
            let mut spec = cfg.as_ref().and_then(|c| c.surface.clone()).unwrap_or_else(SurfaceSpec::default);
            if let Some(g) = grid {
                let (b, y) = parse_grid(&g)?;
                spec.b = b.or(spec.b);
                spec.y = y.or(spec.y);
            }
            spec.params = apply_params(&spec.params, &params)?;
            if let Some(r) = regime {
                spec.regime = match r {
                    RegimeArg::FixedBudget => Regime::FixedBudget,
                    RegimeArg::Diminishing => Regime::Diminishing,
                };
            }
            if let Some(v) = variant {
                spec.variant = match v {
                    VariantArg::MainText => SpsaVariant::MainText,
                    VariantArg::Restated => SpsaVariant::Restated,
                };
            }
            let kind = kind
                .map(SurfaceKind::from)
                .or(spec.kind)
                .ok_or_else(|| CliError::Schema("surface kind missing".into()))?;
            let dir = out_dir(&cli.out_dir, cfg.as_ref());
            let s = cmd_surface(kind, &spec, &dir)?;
            println!("{} grid points written to {}", s.points.len(), dir.display());
        }
        Command::Verify { config } => {
            let cfg = config.as_deref().map(|p| load(p, cli.seed)).transpose()?;
            let mut spec = cfg.as_ref().and_then(|c| c.verify.clone()).unwrap_or_default();
            if let Some(s) = cli.seed {
                spec.seed = s;
            }
            let dir = out_dir(&cli.out_dir, cfg.as_ref());
            let results = Verifier::new(spec, &dir).run()?;
            print!("{}", format_table(&results));
            let report = serde_json::to_string_pretty(&results).expect("results serialize") + "\n";
            std::fs::create_dir_all(&dir).map_err(|e| CliError::io(&dir, e))?;
            let path = dir.join("verify.json");
            std::fs::write(&path, report).map_err(|e| CliError::io(&path, e))?;
            let failed = results.iter().filter(|r| !r.passed).count();
            if failed > 0 {
                return Err(CliError::Failed(format!("{failed} of {} checks failed", results.len())));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("vqa-opt: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
