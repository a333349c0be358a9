use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::diagnostics::{ConservationDrift, FixedPoint, LobeStats, LyapunovResult, LyapunovSpectrum};
use crate::error::{Error, Result};
use crate::integrate::{Termination, Trajectory};
use crate::state::PHYSICAL_TOL;

use super::RunConfig;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TerminationSummary {
    pub completed: usize,
    pub max_steps: usize,
    pub nonfinite: usize,
}

pub fn termination_summary(trajs: &[Trajectory]) -> TerminationSummary {
    let mut s = TerminationSummary::default();
    for t in trajs {
        match t.termination {
            Termination::Completed => s.completed += 1,
            Termination::MaxSteps => s.max_steps += 1,
            Termination::Nonfinite => s.nonfinite += 1,
        }
    }
    s
}

/// How far trajectories stray from the origin after a transient.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContainmentSummary {
    pub transient: f64,
    pub trajectories: usize,
    /// `None` when no sample lies past the transient.
    pub max_norm: Option<f64>,
    /// Post-transient samples with `|r| > 1 + 1e-9`.
    pub samples_outside: usize,
}

pub fn containment_summary(trajs: &[Trajectory], transient: f64) -> ContainmentSummary {
    let mut max_norm: Option<f64> = None;
    let mut samples_outside = 0;
    for s in trajs.iter().flat_map(|t| t.after(transient)) {
        max_norm = Some(max_norm.map_or(s.norm, |m| m.max(s.norm)));
        if s.norm > 1.0 + PHYSICAL_TOL {
            samples_outside += 1;
        }
    }
    ContainmentSummary {
        transient,
        trajectories: trajs.len(),
        max_norm,
        samples_outside,
    }
}

/// Written next to every data export, with enough to rerun it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config: RunConfig,
    pub version: String,
    pub wall_time_s: f64,
    pub termination: TerminationSummary,
    pub containment: Option<ContainmentSummary>,
    #[serde(default)]
    pub files: Vec<String>,
    #[serde(default)]
    pub warnings: Vec<String>,
}

impl RunManifest {
    pub fn new(config: &RunConfig, trajs: &[Trajectory], wall_time_s: f64) -> Self {
        RunManifest {
            config: config.clone(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            wall_time_s,
            termination: termination_summary(trajs),
            containment: (!trajs.is_empty())
                .then(|| containment_summary(trajs, config.plot.transient)),
            files: Vec::new(),
            warnings: config.warnings(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DiagnosticResult {
    FixedPoints { points: Vec<FixedPoint> },
    Lyapunov(LyapunovResult),
    LyapunovSpectrum(LyapunovSpectrum),
    LobeStats(LobeStats),
    Conservation { drifts: Vec<ConservationDrift> },
    Containment(ContainmentSummary),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: u32,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub manifest: Option<RunManifest>,
    pub results: Vec<DiagnosticResult>,
}

impl Report {
    pub fn new(manifest: Option<RunManifest>, results: Vec<DiagnosticResult>) -> Self {
        Report {
            schema: SCHEMA_VERSION,
            manifest,
            results,
        }
    }
}

pub fn write_json<T: Serialize>(value: &T, path: &Path) -> Result<()> {
    let text = serde_json::to_string(value).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn write_report(report: &Report, path: &Path) -> Result<()> {
    write_json(report, path)
}

pub fn read_report(path: &Path) -> Result<Report> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|source| Error::Json {
        path: path.to_path_buf(),
        source,
    })
}
