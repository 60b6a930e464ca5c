//! Command-line front end. Exit codes: 0 success, 1 configuration or I/O
//! error, 2 numerical failure. Nothing is written unless the whole run
//! succeeds.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::SystemTime;

use clap::{Args, Parser, Subcommand, ValueEnum};

use volboot_core::limitoracle::{DiffusionKind, DiffusionSpec, DriftSign};
use volboot_core::montecarlo::{prepare_path, Alternative, AlternativeKind, ExperimentConfig};
use volboot_core::volatility::{GarchSpec, JumpSpec, SvSpec, VolSpec};
use volboot_core::{InnovationLaw, Model, MultiplierLaw, Statistic};

use crate::error::{AppError, Result};
use crate::harness::{Harness, OracleConfig};
use crate::io::{self, Outputs};
use crate::manifest::{RunConfig, RunManifest};
use crate::render;

#[derive(Debug, Parser)]
#[command(name = "volboot", version, about = "Wild bootstrap Monte Carlo under non-stationary volatility")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Conditional size experiment: fan charts of bootstrap p-value cdfs.
    Size(ExperimentArgs),
    /// Local power experiment over a grid of drifts c.
    Power {
        #[command(flatten)]
        experiment: ExperimentArgs,
        /// Comma-separated nonnegative drifts; defaults depend on the problem.
        #[arg(long, value_delimiter = ',')]
        c_grid: Option<Vec<f64>>,
    },
    /// Euler oracle for the continuous-time limit, with a discrete comparison.
    Oracle(OracleArgs),
    /// Writes one simulated volatility path as CSV.
    Path {
        #[command(flatten)]
        experiment: ExperimentArgs,
        #[arg(long, default_value_t = 1)]
        path_id: usize,
    },
    /// Reruns the configuration recorded in a manifest.
    Replay {
        manifest: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        threads: usize,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum VolKind {
    Garch,
    Sv,
    Jump,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MultiplierArg {
    Gaussian,
    Rademacher,
    Mammen,
}

impl From<MultiplierArg> for MultiplierLaw {
    fn from(m: MultiplierArg) -> Self {
        match m {
            MultiplierArg::Gaussian => Self::Gaussian,
            MultiplierArg::Rademacher => Self::Rademacher,
            MultiplierArg::Mammen => Self::Mammen,
        }
    }
}

fn parse_stat(s: &str) -> std::result::Result<Statistic, String> {
    Statistic::from_short_name(s).ok_or_else(|| format!("unknown test {s:?}; expected one of s, t, tnull, cs, ct, r, w"))
}

#[derive(Debug, Clone, Args)]
pub struct ExperimentArgs {
    /// Innovation law: 1 Gaussian, 2 zero-skew mixture, 3 negative-skew mixture.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u8).range(1..=3))]
    pub dgp: u8,
    /// Test statistics (comma-separated, one problem).
    #[arg(long = "test", value_delimiter = ',', default_value = "tnull", value_parser = parse_stat)]
    pub tests: Vec<Statistic>,
    #[arg(long, default_value_t = 500)]
    pub n: usize,
    #[arg(long, default_value_t = 100)]
    pub paths: usize,
    #[arg(long, default_value_t = 1000)]
    pub reps: usize,
    /// Bootstrap replications.
    #[arg(long = "B", default_value_t = 199)]
    pub boot: usize,
    #[arg(long, env = "VOLBOOT_SEED", default_value_t = 42)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = VolKind::Garch)]
    pub vol: VolKind,
    #[arg(long, default_value_t = 5.0)]
    pub kappa: f64,
    #[arg(long, default_value_t = 10f64.sqrt())]
    pub sigma_eta: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma_bar: f64,
    /// Expected number of jumps (jump volatility).
    #[arg(long, default_value_t = 2.0)]
    pub lambda: f64,
    #[arg(long, default_value_t = 0.0)]
    pub omega0: f64,
    #[arg(long, default_value_t = 0.5)]
    pub omega1: f64,
    #[arg(long, value_enum, default_value_t = MultiplierArg::Gaussian)]
    pub multiplier: MultiplierArg,
    /// Worker threads (0 = all cores); output does not depend on it.
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    /// Full budget: 50,000 replicates per path for size, 10,000 for power.
    #[arg(long, alias = "paper-scale")]
    pub full_scale: bool,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

impl ExperimentArgs {
    pub fn vol_spec(&self) -> Result<VolSpec> {
        Ok(match self.vol {
            VolKind::Garch => VolSpec::Garch(GarchSpec::new(self.kappa, self.sigma_bar, self.sigma_eta)?),
            VolKind::Sv => VolSpec::Sv(SvSpec::new(self.kappa, self.sigma_bar, self.sigma_eta)?),
            VolKind::Jump => VolSpec::Jump(JumpSpec::new(self.omega0, self.omega1, self.lambda)?),
        })
    }

    pub fn config(&self, alternative: Option<Alternative>) -> Result<ExperimentConfig> {
        let mut config = ExperimentConfig {
            law: InnovationLaw::from_dgp(self.dgp).ok_or_else(|| AppError::Config(format!("no DGP {}", self.dgp)))?,
            vol: self.vol_spec()?,
            stats: self.tests.clone(),
            n: self.n,
            n_paths: self.paths,
            n_reps: self.reps,
            replications: self.boot,
            multiplier: self.multiplier.into(),
            alternative,
            alpha: self.alpha,
            master_seed: self.seed,
            ..ExperimentConfig::default()
        };
        if self.full_scale {
            config = config.full_scale();
        }
        config.validate()?;
        Ok(config)
    }
}

/// Location `[0, 8]` in steps of 0.5, CUSUM `[0, 15]` and unit root `[0, 20]`
/// in unit steps.
pub fn default_c_grid(kind: AlternativeKind) -> Vec<f64> {
    match kind {
        AlternativeKind::Location => (0..=16).map(|i| i as f64 / 2.0).collect(),
        AlternativeKind::Cusum => (0..=15).map(f64::from).collect(),
        AlternativeKind::UnitRoot => (0..=20).map(f64::from).collect(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DiffusionArg {
    Garch,
    Logou,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DriftArg {
    MeanReverting,
    Explosive,
}

#[derive(Debug, Clone, Args)]
pub struct OracleArgs {
    #[arg(long, value_enum, default_value_t = DiffusionArg::Garch)]
    pub kind: DiffusionArg,
    #[arg(long, default_value_t = 10_000)]
    pub steps: usize,
    #[arg(long, default_value_t = 2000)]
    pub reps: usize,
    #[arg(long, default_value_t = 5.0)]
    pub kappa: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma_bar: f64,
    #[arg(long, default_value_t = 10f64.sqrt())]
    pub sigma_eta: f64,
    /// Correlation between the volatility and return Brownian motions.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub rho: f64,
    #[arg(long, value_enum, default_value_t = DriftArg::MeanReverting)]
    pub drift_sign: DriftArg,
    /// Exact Gaussian transitions for the log-OU limit.
    #[arg(long)]
    pub exact_ou: bool,
    /// Sample size of the discrete recursion compared against the oracle.
    #[arg(long, default_value_t = 20_000)]
    pub discrete_n: usize,
    #[arg(long)]
    pub no_discrete: bool,
    #[arg(long, env = "VOLBOOT_SEED", default_value_t = 42)]
    pub seed: u64,
    #[arg(long, default_value_t = 0)]
    pub threads: usize,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

impl OracleArgs {
    pub fn config(&self) -> Result<OracleConfig> {
        let kind = match self.kind {
            DiffusionArg::Garch => DiffusionKind::GarchDiffusion,
            DiffusionArg::Logou => DiffusionKind::LogOu,
        };
        let drift = match self.drift_sign {
            DriftArg::MeanReverting => DriftSign::MeanReverting,
            DriftArg::Explosive => DriftSign::Explosive,
        };
        let spec = DiffusionSpec::new(kind, self.kappa, self.sigma_bar, self.sigma_eta)?
            .with_correlation(self.rho)
            .with_drift_sign(drift)
            .with_exact_ou(self.exact_ou);
        // the discrete recursions need σ_η > 0
        let discrete = !self.no_discrete && self.sigma_eta > 0.0;
        let config = OracleConfig {
            spec,
            steps: self.steps,
            reps: self.reps,
            master_seed: self.seed,
            discrete_n: discrete.then_some(self.discrete_n),
        };
        config.validate()?;
        Ok(config)
    }
}

/// Parses `args` (program name first), runs and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(command: Command) -> Result<Vec<PathBuf>> {
    match command {
        Command::Size(args) => {
            let config = args.config(None)?;
            run_config(RunConfig::Size(config), args.threads, &args.out)
        }
        Command::Power { experiment, c_grid } => {
            let problem = experiment
                .tests
                .first()
                .map_or(Model::Location { theta_bar: 0.0 }, Statistic::default_model);
            let kind = AlternativeKind::for_model(&problem);
            let alternative = Alternative {
                kind,
                c_grid: c_grid.unwrap_or_else(|| default_c_grid(kind)),
            };
            let config = experiment.config(Some(alternative))?;
            run_config(RunConfig::Power(config), experiment.threads, &experiment.out)
        }
        Command::Oracle(args) => run_config(RunConfig::Oracle(args.config()?), args.threads, &args.out),
        Command::Path { experiment, path_id } => {
            let config = experiment.config(None)?;
            if path_id == 0 || path_id > config.n_paths {
                return Err(AppError::Config(format!("path id must lie in 1..={}", config.n_paths)));
            }
            let prepared = prepare_path(&config, path_id)?;
            ensure_dir(&experiment.out)?;
            let mut out = Outputs::default();
            out.add(experiment.out.join("volpath.csv"), io::volpath_csv(&prepared.path)?);
            out.commit()
        }
        Command::Replay { manifest, out, threads } => {
            let m: RunManifest = io::read_json(&manifest)?;
            run_config(m.run, threads, &out)
        }
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| AppError::io(dir, e))
}

fn stem(base: &str, stat: Statistic, many: bool) -> String {
    if many {
        format!("{base}_{}", stat.short_name())
    } else {
        base.to_owned()
    }
}

/// Runs a recorded configuration and writes its artifacts plus a manifest.
pub fn run_config(run: RunConfig, threads: usize, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let started = SystemTime::now();
    let harness = Harness::new(threads)?;
    let mut out = Outputs::default();
    match &run {
        RunConfig::Size(config) => {
            let tables = harness.run_size(config)?;
            let many = tables.len() > 1;
            for t in &tables {
                let name = stem("fanchart", t.stat, many);
                out.add(out_dir.join(format!("{name}.csv")), io::fanchart_csv(t)?);
                out.add(out_dir.join(format!("{name}.svg")), render::render_fanchart(t)?.into_bytes());
            }
        }
        RunConfig::Power(config) => {
            let tables = harness.run_power(config)?;
            let many = tables.len() > 1;
            for t in &tables {
                let name = stem("power", t.stat, many);
                out.add(out_dir.join(format!("{name}.csv")), io::power_csv(t)?);
                out.add(out_dir.join(format!("{name}.svg")), render::render_power(t)?.into_bytes());
            }
        }
        RunConfig::Oracle(config) => {
            let result = harness.run_oracle(config)?;
            out.add(out_dir.join("oracle.csv"), io::oracle_csv(&result)?);
            out.add(out_dir.join("oracle_summary.csv"), io::oracle_summary_csv(&result.summary)?);
        }
    }
    let names = out
        .paths()
        .iter()
        .filter_map(|p| p.file_name().map(|f| f.to_string_lossy().into_owned()))
        .collect();
    let manifest = RunManifest::new(run, harness.threads(), started, names);
    out.add(out_dir.join("manifest.json"), io::to_json(&manifest)?);
    ensure_dir(out_dir)?;
    out.commit()
}
