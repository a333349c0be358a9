//! The `lorenz-qubit` command line.
//!
//! Every subcommand builds a [`RunConfig`]: defaults, then an optional JSON
//! config file, then flags, each layer overriding the one before.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::diagnostics::{
    conservation_monitor, default_lobe_threshold, find_fixed_points, largest_lyapunov,
    lobe_statistics, lyapunov_spectrum, DEFAULT_MAX_ITER,
};
use crate::error::{Error, Result};
use crate::generators::Axis;
use crate::integrate::{self, Form, Method, Trajectory};
use crate::io::{
    containment_summary, export_ensemble, export_trajectory, render_projection, write_json,
    write_report, DiagnosticResult, InitialCondition, ModelKind, Plane, Recipe, Report,
    RunConfig, RunManifest,
};
use crate::state::{density_from_bloch, BlochVector};

#[derive(Debug, Parser)]
#[command(name = "lorenz-qubit", version, about = "Chaotic nonlinear qubit channels on the Bloch ball")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Integrate one trajectory and write it as CSV.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        form: Option<Form>,
        /// CSV output path [default: trajectory.csv]
        #[arg(long)]
        out: Option<PathBuf>,
        /// Also write a JSON diagnostics report.
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Integrate an ensemble of seeds drawn uniformly from a ball.
    Ensemble {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        seeds: Seeds,
        /// Output directory [default: ensemble]
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Estimate the largest Lyapunov exponent (or the full spectrum).
    Lyapunov {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        transient: Option<f64>,
        /// Averaging time after the transient.
        #[arg(long)]
        total_time: Option<f64>,
        #[arg(long)]
        renorm: Option<f64>,
        #[arg(long)]
        spectrum: bool,
        /// JSON report path; printed to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Locate and classify fixed points by Newton iteration.
    FixedPoints {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        /// JSON report path; printed to stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render a 2D projection of an ensemble point cloud as SVG.
    Plot {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        seeds: Seeds,
        #[arg(long, value_enum, conflicts_with = "config")]
        recipe: Option<Recipe>,
        #[arg(long, value_enum)]
        plane: Option<Plane>,
        #[arg(long)]
        transient: Option<f64>,
        #[arg(long)]
        max_points: Option<usize>,
        /// SVG output path [default: <recipe>.svg or projection.svg]
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct Common {
    /// JSON config file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    model: Option<ModelKind>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    beta: Option<f64>,
    /// Torsion strength of the selected model.
    #[arg(long)]
    g: Option<f64>,
    /// GP symmetric coupling.
    #[arg(long)]
    m: Option<f64>,
    #[arg(long, value_enum)]
    method: Option<Method>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    rtol: Option<f64>,
    #[arg(long)]
    atol: Option<f64>,
    #[arg(long)]
    t_max: Option<f64>,
    #[arg(long)]
    sample_every: Option<usize>,
    #[arg(long)]
    max_steps: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    x0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    y0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    z0: Option<f64>,
}

#[derive(Debug, Args)]
struct Seeds {
    /// Number of seeds.
    #[arg(long)]
    n: Option<usize>,
    /// Radius of the seed ball [default: 0.9]
    #[arg(long)]
    radius: Option<f64>,
    /// RNG seed; required unless the config file provides one.
    #[arg(long)]
    seed: Option<u64>,
}

/// What to do, with the fully merged configuration.
#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Simulate { report: Option<PathBuf> },
    Ensemble,
    Lyapunov { spectrum: bool },
    FixedPoints { tol: f64 },
    Plot,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Invocation {
    pub command: Command,
    pub config: RunConfig,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Usage(#[from] clap::Error),
    #[error(transparent)]
    Run(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(e) if !e.use_stderr() => 0,
            CliError::Usage(_) => 1,
            CliError::Run(e) => e.exit_code(),
        }
    }
}

const DEFAULT_ENSEMBLE_SIZE: usize = 500;
const DEFAULT_RADIUS: f64 = 0.9;

impl Common {
    fn base(&self) -> Result<RunConfig> {
        match &self.config {
            Some(path) => RunConfig::from_json_file(path),
            None => Ok(RunConfig::default()),
        }
    }

    fn apply(&self, cfg: &mut RunConfig) {
        if let Some(m) = self.model {
            cfg.model = m;
        }
        set(&mut cfg.lor63.rho, self.rho);
        set(&mut cfg.lor63.sigma, self.sigma);
        set(&mut cfg.lor63.beta, self.beta);
        set(&mut cfg.gp.m, self.m);
        if let Some(g) = self.g {
            match cfg.model {
                ModelKind::Lor63 => cfg.lor63.g = g,
                ModelKind::Gp => cfg.gp.g = g,
                ModelKind::Custom => {
                    if let Some(c) = cfg.custom.as_mut() {
                        c.g = g;
                    }
                }
            }
        }
        let ic = &mut cfg.integrator;
        set(&mut ic.method, self.method);
        set(&mut ic.dt, self.dt);
        set(&mut ic.rel_tol, self.rtol);
        set(&mut ic.abs_tol, self.atol);
        set(&mut ic.t_max, self.t_max);
        set(&mut ic.sample_every, self.sample_every);
        set(&mut ic.max_steps, self.max_steps);
        if self.x0.is_some() || self.y0.is_some() || self.z0.is_some() {
            let mut r0 = match cfg.initial {
                InitialCondition::Explicit { r0 } => r0,
                InitialCondition::Ensemble { .. } => BlochVector::ORIGIN,
            };
            set(&mut r0.x, self.x0);
            set(&mut r0.y, self.y0);
            set(&mut r0.z, self.z0);
            cfg.initial = InitialCondition::Explicit { r0 };
        }
    }
}

fn set<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

impl Seeds {
    fn any(&self) -> bool {
        self.n.is_some() || self.radius.is_some() || self.seed.is_some()
    }

    /// Switch `cfg` to ensemble mode, keeping any ensemble values it already has.
    fn apply(&self, cfg: &mut RunConfig) -> Result<()> {
        let (count, radius, rng_seed) = match cfg.initial {
            InitialCondition::Ensemble { count, radius, rng_seed } => {
                (count, radius, Some(rng_seed))
            }
            InitialCondition::Explicit { .. } => (DEFAULT_ENSEMBLE_SIZE, DEFAULT_RADIUS, None),
        };
        let rng_seed = self.seed.or(rng_seed).ok_or_else(|| {
            Error::Validation("ensemble mode needs --seed (or an ensemble config)".to_string())
        })?;
        cfg.initial = InitialCondition::Ensemble {
            count: self.n.unwrap_or(count),
            radius: self.radius.unwrap_or(radius),
            rng_seed,
        };
        Ok(())
    }
}

/// Parse `argv` (including the program name) into a validated invocation.
pub fn parse_cli<I, T>(argv: I) -> std::result::Result<Invocation, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv)?;
    let (command, config) = match cli.command {
        Sub::Simulate { common, form, out, report } => {
            let mut cfg = common.base()?;
            common.apply(&mut cfg);
            set(&mut cfg.form, form);
            if out.is_some() {
                cfg.output.out = out;
            }
            (Command::Simulate { report }, cfg)
        }
        Sub::Ensemble { common, seeds, out_dir } => {
            let mut cfg = common.base()?;
            common.apply(&mut cfg);
            seeds.apply(&mut cfg)?;
            if out_dir.is_some() {
                cfg.output.out_dir = out_dir;
            }
            (Command::Ensemble, cfg)
        }
        Sub::Lyapunov { common, transient, total_time, renorm, spectrum, out } => {
            let mut cfg = common.base()?;
            common.apply(&mut cfg);
            set(&mut cfg.lyapunov.transient, transient);
            set(&mut cfg.lyapunov.total_time, total_time);
            set(&mut cfg.lyapunov.renorm_interval, renorm);
            if out.is_some() {
                cfg.output.out = out;
            }
            (Command::Lyapunov { spectrum }, cfg)
        }
        Sub::FixedPoints { common, tol, out } => {
            let mut cfg = common.base()?;
            common.apply(&mut cfg);
            if out.is_some() {
                cfg.output.out = out;
            }
            if !(tol > 0.0) {
                return Err(Error::Validation(format!("--tol must be positive (got {tol})")).into());
            }
            (Command::FixedPoints { tol }, cfg)
        }
        Sub::Plot { common, seeds, recipe, plane, transient, max_points, out } => {
            let mut cfg = match recipe {
                Some(r) => r.config(),
                None => common.base()?,
            };
            common.apply(&mut cfg);
            if seeds.any() {
                seeds.apply(&mut cfg)?;
            }
            set(&mut cfg.plot.plane, plane);
            set(&mut cfg.plot.transient, transient);
            set(&mut cfg.plot.max_points_per_trajectory, max_points);
            if out.is_some() {
                cfg.output.out = out;
            }
            (Command::Plot, cfg)
        }
    };
    config.validate()?;
    if let Command::Simulate { .. } | Command::Lyapunov { .. } = command {
        if let InitialCondition::Ensemble { .. } = config.initial {
            return Err(Error::Validation(
                "this subcommand takes a single initial condition; use `ensemble` or --x0/--y0/--z0"
                    .to_string(),
            )
            .into());
        }
    }
    Ok(Invocation { command, config })
}

/// Run an invocation, returning the text to print on stdout.
pub fn run(inv: &Invocation) -> Result<String> {
    let cfg = &inv.config;
    let gen = cfg.generator()?;
    let started = Instant::now();
    let mut lines = cfg.warnings().into_iter().map(|w| format!("warning: {w}")).collect::<Vec<_>>();

    match &inv.command {
        Command::Simulate { report } => {
            let r0 = single_seed(cfg);
            let traj = match cfg.form {
                Form::Bloch => integrate::integrate_bloch(&gen, r0, &cfg.integrator)?,
                Form::Density => integrate::integrate_density(&gen, &density_from_bloch(r0), &cfg.integrator)?,
            };
            let out = cfg.output.out.clone().unwrap_or_else(|| PathBuf::from("trajectory.csv"));
            export_trajectory(&traj, &out)?;
            let trajs = [traj];
            let mut manifest = RunManifest::new(cfg, &trajs, started.elapsed().as_secs_f64());
            manifest.files = vec![file_name(&out)];
            let sidecar = sidecar_path(&out);
            write_json(&manifest, &sidecar)?;
            lines.push(format!(
                "{} samples to {} ({:?}, final t = {})",
                trajs[0].samples.len(),
                out.display(),
                trajs[0].termination,
                trajs[0].last().t
            ));
            if let Some(path) = report {
                let results = trajectory_diagnostics(cfg, &trajs[0]);
                write_report(&Report::new(Some(manifest), results), path)?;
                lines.push(format!("report written to {}", path.display()));
            }
        }
        Command::Ensemble => {
            let trajs = integrate::ensemble(&gen, &cfg.seeds(), &cfg.integrator)?;
            let dir = cfg.output.out_dir.clone().unwrap_or_else(|| PathBuf::from("ensemble"));
            let files = export_ensemble(&trajs, &dir)?;
            let mut manifest = RunManifest::new(cfg, &trajs, started.elapsed().as_secs_f64());
            manifest.files = files.iter().map(|f| f.display().to_string()).collect();
            write_json(&manifest, &dir.join("manifest.json"))?;
            lines.push(format!("{} trajectories to {}", trajs.len(), dir.display()));
        }
        Command::Lyapunov { spectrum } => {
            let r0 = single_seed(cfg);
            let mut results = vec![DiagnosticResult::Lyapunov(largest_lyapunov(
                &gen,
                r0,
                &cfg.lyapunov,
                &cfg.integrator,
            )?)];
            if *spectrum {
                results.push(DiagnosticResult::LyapunovSpectrum(lyapunov_spectrum(
                    &gen,
                    r0,
                    &cfg.lyapunov,
                    &cfg.integrator,
                )?));
            }
            emit_report(cfg, results, started, &mut lines)?;
        }
        Command::FixedPoints { tol } => {
            let points = find_fixed_points(&gen, &newton_guesses(), *tol, DEFAULT_MAX_ITER);
            emit_report(cfg, vec![DiagnosticResult::FixedPoints { points }], started, &mut lines)?;
        }
        Command::Plot => {
            let trajs = integrate::ensemble(&gen, &cfg.seeds(), &cfg.integrator)?;
            let out = cfg.output.out.clone().unwrap_or_else(|| match cfg.plot.recipe {
                Some(Recipe::Fig1) => PathBuf::from("fig1.svg"),
                Some(Recipe::Fig2) => PathBuf::from("fig2.svg"),
                None => PathBuf::from("projection.svg"),
            });
            let summary = render_projection(&trajs, &out, &cfg.plot)?;
            let mut manifest = RunManifest::new(cfg, &trajs, started.elapsed().as_secs_f64());
            manifest.files = vec![file_name(&out)];
            write_json(&manifest, &sidecar_path(&out))?;
            lines.push(format!(
                "{} points from {} trajectories to {} (max |r| plotted {})",
                summary.points,
                trajs.len(),
                out.display(),
                summary.max_norm
            ));
        }
    }
    Ok(lines.join("\n"))
}

/// Parse, run and report; returns the process exit status.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let result = parse_cli(argv).and_then(|inv| run(&inv).map_err(CliError::from));
    match result {
        Ok(text) => {
            if !text.is_empty() {
                println!("{text}");
            }
            0
        }
        Err(CliError::Usage(e)) => {
            let _ = e.print();
            CliError::Usage(e).exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn single_seed(cfg: &RunConfig) -> BlochVector {
    cfg.seeds()[0]
}

fn file_name(path: &Path) -> String {
    path.file_name().map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned())
}

/// `traj.csv` -> `traj.csv.manifest.json`
pub fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".manifest.json");
    PathBuf::from(name)
}

/// The origin plus a 5×5×5 grid over `[−0.8, 0.8]³`.
fn newton_guesses() -> Vec<BlochVector> {
    let ticks = [-0.8, -0.4, 0.0, 0.4, 0.8];
    let mut out = vec![BlochVector::ORIGIN];
    for &x in &ticks {
        for &y in &ticks {
            for &z in &ticks {
                out.push(BlochVector::new(x, y, z));
            }
        }
    }
    out
}

fn trajectory_diagnostics(cfg: &RunConfig, traj: &Trajectory) -> Vec<DiagnosticResult> {
    let mut results = vec![DiagnosticResult::Containment(containment_summary(
        std::slice::from_ref(traj),
        cfg.plot.transient,
    ))];
    match cfg.model {
        ModelKind::Lor63 => results.push(DiagnosticResult::LobeStats(lobe_statistics(
            traj,
            Axis::X,
            default_lobe_threshold(&cfg.lor63),
        ))),
        ModelKind::Gp => results.push(DiagnosticResult::Conservation {
            drifts: conservation_monitor(traj, &cfg.gp),
        }),
        ModelKind::Custom => {}
    }
    results
}

fn emit_report(
    cfg: &RunConfig,
    results: Vec<DiagnosticResult>,
    started: Instant,
    lines: &mut Vec<String>,
) -> Result<()> {
    let manifest = RunManifest::new(cfg, &[], started.elapsed().as_secs_f64());
    let report = Report::new(Some(manifest), results);
    match &cfg.output.out {
        Some(path) => {
            write_report(&report, path)?;
            lines.push(format!("report written to {}", path.display()));
        }
        None => lines.push(serde_json::to_string_pretty(&report).expect("reports serialize")),
    }
    Ok(())
}
