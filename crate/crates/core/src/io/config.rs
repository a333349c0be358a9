use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::diagnostics::LyapunovSettings;
use crate::error::{Error, Result};
use crate::generators::{
    custom_generator, gp_generator, lor63_generator, Axis, GPParams, Lor63Params, Mat3,
    TorsionGenerator,
};
use crate::integrate::{Form, IntegratorConfig};
use crate::state::BlochVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    #[default]
    Lor63,
    Gp,
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CustomModel {
    pub linear: Mat3,
    pub projection_axis: BlochVector,
    pub g: f64,
    pub twist_axis: Axis,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialCondition {
    Explicit { r0: BlochVector },
    Ensemble { count: usize, radius: f64, rng_seed: u64 },
}

impl Default for InitialCondition {
    fn default() -> Self {
        InitialCondition::Explicit {
            r0: BlochVector::new(0.12, 0.12, 0.3),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Plane {
    Xy,
    #[default]
    Xz,
    Yz,
}

impl Plane {
    pub fn project(self, r: BlochVector) -> (f64, f64) {
        match self {
            Plane::Xy => (r.x, r.y),
            Plane::Xz => (r.x, r.z),
            Plane::Yz => (r.y, r.z),
        }
    }

    pub fn labels(self) -> (&'static str, &'static str) {
        match self {
            Plane::Xy => ("x", "y"),
            Plane::Xz => ("x", "z"),
            Plane::Yz => ("y", "z"),
        }
    }
}

/// Figure recipes: ensemble point clouds of the two models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Recipe {
    /// Lorenz-63 qubit, x–z projection.
    Fig1,
    /// GP butterfly, x–z projection.
    Fig2,
}

impl Recipe {
    pub const SEEDS: usize = 500;
    pub const RADIUS: f64 = 0.9;
    pub const RNG_SEED: u64 = 1;
    pub const T_MAX: f64 = 200.0;
    pub const TRANSIENT: f64 = 5.0;

    pub fn model(self) -> ModelKind {
        match self {
            Recipe::Fig1 => ModelKind::Lor63,
            Recipe::Fig2 => ModelKind::Gp,
        }
    }

    /// The full run configuration for this recipe.
    pub fn config(self) -> RunConfig {
        RunConfig {
            model: self.model(),
            initial: InitialCondition::Ensemble {
                count: Self::SEEDS,
                radius: Self::RADIUS,
                rng_seed: Self::RNG_SEED,
            },
            integrator: IntegratorConfig {
                t_max: Self::T_MAX,
                ..Default::default()
            },
            plot: PlotOptions {
                recipe: Some(self),
                plane: Plane::Xz,
                transient: Self::TRANSIENT,
                ..Default::default()
            },
            ..Default::default()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PlotOptions {
    pub recipe: Option<Recipe>,
    pub plane: Plane,
    pub transient: f64,
    /// Post-transient samples drawn per trajectory, evenly strided.
    pub max_points_per_trajectory: usize,
}

impl Default for PlotOptions {
    fn default() -> Self {
        PlotOptions {
            recipe: None,
            plane: Plane::Xz,
            transient: 5.0,
            max_points_per_trajectory: 400,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputPaths {
    pub out: Option<PathBuf>,
    pub out_dir: Option<PathBuf>,
}

/// Everything needed to reproduce a run. Mirrors the JSON config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub model: ModelKind,
    pub lor63: Lor63Params,
    pub gp: GPParams,
    pub custom: Option<CustomModel>,
    pub initial: InitialCondition,
    pub form: Form,
    pub integrator: IntegratorConfig,
    pub lyapunov: LyapunovSettings,
    pub output: OutputPaths,
    pub plot: PlotOptions,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            model: ModelKind::Lor63,
            lor63: Lor63Params::default(),
            gp: GPParams::default(),
            custom: None,
            initial: InitialCondition::default(),
            form: Form::Bloch,
            integrator: IntegratorConfig::default(),
            lyapunov: LyapunovSettings::default(),
            output: OutputPaths::default(),
            plot: PlotOptions::default(),
        }
    }
}

impl RunConfig {
    pub fn from_json_file(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text)
            .map_err(|e| Error::Validation(format!("{}: invalid config: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<()> {
        self.integrator.validate()?;
        if let InitialCondition::Ensemble { count, radius, .. } = self.initial {
            if count == 0 {
                return Err(Error::Validation("ensemble count must be positive".to_string()));
            }
            if !(radius > 0.0 && radius <= 1.0) {
                return Err(Error::Validation(format!(
                    "ensemble radius must lie in (0, 1] (got {radius})"
                )));
            }
        }
        if !(self.plot.transient >= 0.0) || self.plot.max_points_per_trajectory == 0 {
            return Err(Error::Validation(
                "plot transient must be >= 0 and max_points_per_trajectory positive".to_string(),
            ));
        }
        self.generator().map(|_| ())
    }

    pub fn generator(&self) -> Result<TorsionGenerator> {
        match self.model {
            ModelKind::Lor63 => Ok(lor63_generator(&self.lor63)),
            ModelKind::Gp => Ok(gp_generator(&self.gp)),
            ModelKind::Custom => {
                let c = self.custom.ok_or_else(|| {
                    Error::Validation("model `custom` needs a `custom` section".to_string())
                })?;
                custom_generator(c.linear, c.projection_axis, c.g, c.twist_axis)
            }
        }
    }

    pub fn warnings(&self) -> Vec<String> {
        match self.model {
            ModelKind::Lor63 => self.lor63.warnings(),
            ModelKind::Gp => self.gp.warnings(),
            ModelKind::Custom => Vec::new(),
        }
    }

    /// Initial states: the explicit `r0`, or `count` points drawn uniformly
    /// from the ball of the given radius by a ChaCha8 stream keyed on `rng_seed`.
    pub fn seeds(&self) -> Vec<BlochVector> {
        match self.initial {
            InitialCondition::Explicit { r0 } => vec![r0],
            InitialCondition::Ensemble {
                count,
                radius,
                rng_seed,
            } => uniform_ball(count, radius, rng_seed),
        }
    }
}

/// Rejection sampling from the cube `[−1, 1]³`, scaled to `radius`.
pub(crate) fn uniform_ball(count: usize, radius: f64, rng_seed: u64) -> Vec<BlochVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(rng_seed);
    (0..count)
        .map(|_| loop {
            let v = BlochVector::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            if v.dot(v) <= 1.0 {
                break v * radius;
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_the_published_parameters() {
        let cfg = RunConfig::default();
        assert_eq!(cfg.lor63.rho, 28.0);
        assert_eq!(cfg.lor63.sigma, 10.0);
        assert_eq!(cfg.lor63.beta, 8.0 / 3.0);
        assert_eq!(cfg.lor63.g, 80.0);
        assert_eq!(cfg.gp.m, 10.0);
        assert_eq!(cfg.gp.g, 40.0);
    }

    #[test]
    fn seeds_are_deterministic_and_inside_the_ball() {
        let a = uniform_ball(200, 0.5, 7);
        assert_eq!(a, uniform_ball(200, 0.5, 7));
        assert_ne!(a, uniform_ball(200, 0.5, 8));
        assert!(a.iter().all(|r| r.norm() <= 0.5));
        // roughly uniform in volume: about 1/8 fall inside half the radius
        let inner = a.iter().filter(|r| r.norm() <= 0.25).count();
        assert!((10..=45).contains(&inner), "{inner}");
    }

    #[test]
    fn config_json_round_trips_and_rejects_unknown_fields() {
        let cfg = Recipe::Fig1.config();
        let text = serde_json::to_string(&cfg).unwrap();
        let back: RunConfig = serde_json::from_str(&text).unwrap();
        assert_eq!(back, cfg);
        assert!(serde_json::from_str::<RunConfig>(r#"{"modle":"gp"}"#).is_err());
        let partial: RunConfig = serde_json::from_str(r#"{"model":"gp","gp":{"m":5,"g":20}}"#).unwrap();
        assert_eq!(partial.gp, GPParams { m: 5.0, g: 20.0 });
        assert_eq!(partial.integrator, IntegratorConfig::default());
    }

    #[test]
    fn validation() {
        let mut cfg = RunConfig {
            initial: InitialCondition::Ensemble { count: 3, radius: 1.5, rng_seed: 0 },
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
        cfg.initial = InitialCondition::Ensemble { count: 3, radius: 1.0, rng_seed: 0 };
        assert!(cfg.validate().is_ok());
        cfg.model = ModelKind::Custom;
        assert!(cfg.validate().is_err());
        cfg.custom = Some(CustomModel {
            linear: Mat3::identity() * -1.0,
            projection_axis: BlochVector::new(0.0, 0.0, 1.0),
            g: 2.0,
            twist_axis: Axis::Z,
        });
        assert!(cfg.validate().is_ok());
    }
}
