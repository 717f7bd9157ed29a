use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ybbp_core::model::Census;
use ybbp_core::LawFamily;

use crate::commands;
use crate::config::{AbcSection, ExperimentConfig, Mode, PredictiveSection, SchemeChoice};
use crate::error::{AppError, AppResult};

#[derive(Debug, Parser)]
#[command(name = "ybbp", version, about = "Simulate and infer Y-linked bisexual branching processes")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Global {
    /// JSON run configuration; flags below override its fields.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (default: all cores). Outputs do not depend on it.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Output directory.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,
    /// Also write SVG density plots.
    #[arg(long, global = true)]
    pub plots: bool,
    #[arg(long, global = true)]
    pub hpd_level: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate one path and write its observable projections.
    Simulate(SimulateArgs),
    /// Rejection ABC for θ from an observed file.
    Infer(InferArgs),
    /// Posterior predictive simulation from a posterior file.
    Predict(PredictArgs),
    /// Collect several inference runs into one table.
    Report(ReportArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub generations: Option<usize>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum SchemeArg {
    Auto,
    Basic,
    BothPositive,
    RrZero,
    RmutZero,
}

impl From<SchemeArg> for SchemeChoice {
    fn from(s: SchemeArg) -> Self {
        match s {
            SchemeArg::Auto => Self::Auto,
            SchemeArg::Basic => Self::Basic,
            SchemeArg::BothPositive => Self::BothPositive,
            SchemeArg::RrZero => Self::RrZero,
            SchemeArg::RmutZero => Self::RmutZero,
        }
    }
}

#[derive(Debug, Args)]
pub struct InferArgs {
    #[arg(long)]
    pub observed: Option<PathBuf>,
    #[arg(long)]
    pub pool_size: Option<u64>,
    #[arg(long)]
    pub quantile: Option<f64>,
    #[arg(long, value_enum)]
    pub scheme: Option<SchemeArg>,
    /// `poisson` or `negbin:K`.
    #[arg(long, value_parser = parse_family)]
    pub law_family: Option<LawFamily>,
}

#[derive(Debug, Args)]
pub struct PredictArgs {
    #[arg(long)]
    pub posterior: Option<PathBuf>,
    /// Observed file whose last generation is the start census.
    #[arg(long)]
    pub observed: Option<PathBuf>,
    #[arg(long)]
    pub horizon: Option<usize>,
    #[arg(long)]
    pub replicates: Option<u64>,
    /// Start census as `F,M_R,M_r`.
    #[arg(long, value_parser = parse_census)]
    pub start: Option<Census>,
    #[arg(long, value_parser = parse_family)]
    pub law_family: Option<LawFamily>,
}

#[derive(Debug, Args)]
pub struct ReportArgs {
    /// Run directories, or directories holding run directories.
    pub runs: Vec<PathBuf>,
}

pub fn parse_family(s: &str) -> Result<LawFamily, String> {
    let s = s.trim().to_ascii_lowercase();
    if s == "poisson" {
        return Ok(LawFamily::Poisson);
    }
    let k = s
        .strip_prefix("negbin:")
        .ok_or_else(|| format!("expected `poisson` or `negbin:K`, got `{s}`"))?
        .parse::<f64>()
        .map_err(|e| format!("bad negbin size: {e}"))?;
    let family = LawFamily::Negbin { k };
    family.validate().map_err(|e| e.to_string())?;
    Ok(family)
}

fn parse_census(s: &str) -> Result<Census, String> {
    let parts: Vec<u64> = s
        .split(',')
        .map(|p| p.trim().parse::<u64>().map_err(|e| format!("`{p}`: {e}")))
        .collect::<Result<_, _>>()?;
    match parts[..] {
        [f, r, m] => Ok(Census::new(f, r, m)),
        _ => Err("expected three counts F,M_R,M_r".into()),
    }
}

/// Loads the config file (if any) and applies command-line overrides.
pub fn resolve(cli: &Cli) -> AppResult<ExperimentConfig> {
    let mut cfg = match &cli.global.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    let g = &cli.global;
    if g.seed.is_some() {
        cfg.seed = g.seed;
    }
    if g.workers.is_some() {
        cfg.workers = g.workers;
    }
    if g.output.is_some() {
        cfg.io.output_dir = g.output.clone();
    }
    if g.plots {
        cfg.summary.plots = true;
    }
    if let Some(l) = g.hpd_level {
        cfg.summary.hpd_level = l;
    }
    match &cli.command {
        Command::Simulate(a) => {
            cfg.mode = Some(Mode::Simulate);
            if let Some(n) = a.generations {
                cfg.model.as_mut().ok_or_else(|| AppError::config("`model` block is required for simulate"))?.generations = n;
            }
        }
        Command::Infer(a) => {
            cfg.mode = Some(Mode::Infer);
            if a.observed.is_some() {
                cfg.io.observed = a.observed.clone();
            }
            if cfg.abc.is_none() {
                if let (Some(pool_size), Some(q)) = (a.pool_size, a.quantile) {
                    cfg.abc = Some(AbcSection {
                        pool_size,
                        tolerance_quantile: q,
                        law_family: LawFamily::Poisson,
                        scheme: SchemeChoice::Auto,
                        m_max: 10.0,
                        force_positive_beta: None,
                        force_positive_m_r: None,
                    });
                }
            }
            let abc = cfg.abc.as_mut().ok_or_else(|| {
                AppError::config("`abc` block is required for infer (or pass --pool-size and --quantile)")
            })?;
            if let Some(n) = a.pool_size {
                abc.pool_size = n;
            }
            if let Some(q) = a.quantile {
                abc.tolerance_quantile = q;
            }
            if let Some(s) = a.scheme {
                abc.scheme = s.into();
            }
            if let Some(f) = a.law_family {
                abc.law_family = f;
            }
        }
        Command::Predict(a) => {
            cfg.mode = Some(Mode::Predict);
            if a.posterior.is_some() {
                cfg.io.posterior = a.posterior.clone();
            }
            if a.observed.is_some() {
                cfg.io.observed = a.observed.clone();
            }
            if cfg.predictive.is_none() {
                if let (Some(horizon), Some(replicates)) = (a.horizon, a.replicates) {
                    cfg.predictive = Some(PredictiveSection { horizon, replicates, start: None, law_family: None });
                }
            }
            let p = cfg.predictive.as_mut().ok_or_else(|| {
                AppError::config("`predictive` block is required for predict (or pass --horizon and --replicates)")
            })?;
            if let Some(h) = a.horizon {
                p.horizon = h;
            }
            if let Some(s) = a.replicates {
                p.replicates = s;
            }
            if a.start.is_some() {
                p.start = a.start;
            }
            if a.law_family.is_some() {
                p.law_family = a.law_family;
            }
        }
        Command::Report(a) => {
            cfg.mode = Some(Mode::Report);
            if !a.runs.is_empty() {
                cfg.io.runs = a.runs.clone();
            }
        }
    }
    Ok(cfg)
}

pub fn run(cli: Cli) -> AppResult<()> {
    let cfg = resolve(&cli)?;
    match cli.command {
        Command::Simulate(_) => {
            let r = commands::simulate(&cfg)?;
            println!(
                "simulated {} generations (attempt {}), coexistence: {}, files: {}",
                r.generations,
                r.attempt,
                r.coexistence,
                r.files.join(", ")
            );
        }
        Command::Infer(_) => {
            let out = commands::infer(&cfg)?;
            print!("{}", commands::render_summary(&out.summary));
        }
        Command::Predict(_) => {
            let s = commands::predict(&cfg)?;
            println!("{} draws x {} replicates, horizon {}", s.n_draws, s.replicates, s.horizon);
            for (name, q) in &s.quantities {
                let hpd: Vec<String> = q.hpd.iter().map(|[a, b]| format!("({a:.1}, {b:.1})")).collect();
                println!("{name:<5} mean {:>12.2}  HPD {}", q.mean, hpd.join(" U "));
            }
        }
        Command::Report(_) => {
            let r = commands::report(&cfg)?;
            println!("{} runs, scheme {}", r.rows.len(), r.scheme);
            for row in &r.rows {
                let p = &row.parameters;
                println!(
                    "{:<16} {:<14} n={:<6} alpha {:.4} beta {:.4} m_R {:.4} m_r {:.4}",
                    row.run, row.law_family, row.n_accepted, p.alpha.mean, p.beta.mean, p.m_R.mean, p.m_r.mean
                );
            }
        }
    }
    Ok(())
}
