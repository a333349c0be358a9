//! Time integration of `dr/dt = G(r) r` in Bloch form and of
//! `dX/dt = (σᵃ/2) drᵃ/dt` in density-matrix form.
//!
//! Both forms run through the same generic steppers ([`Phase`] + [`Flow`]).
//! The density form evolves the traceless part `X − I/2`, whose entries are
//! exactly half the Bloch components, so identical step sequences produce
//! identical Bloch projections.

use std::ops::{Add, Mul};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generators::TorsionGenerator;
use crate::state::{self, BlochVector, DensityMatrix};

/// A point in the integrator's phase space.
pub trait Phase: Copy + Add<Output = Self> + Mul<f64, Output = Self> {
    /// Euclidean size used by the adaptive error controller, in Bloch units.
    fn magnitude(&self) -> f64;
    fn is_finite(&self) -> bool;
}

/// An autonomous vector field on a phase space.
pub trait Flow<S> {
    fn rate(&self, s: &S) -> S;
}

impl Phase for BlochVector {
    fn magnitude(&self) -> f64 {
        self.norm()
    }
    fn is_finite(&self) -> bool {
        BlochVector::is_finite(*self)
    }
}

impl Flow<BlochVector> for TorsionGenerator {
    fn rate(&self, r: &BlochVector) -> BlochVector {
        self.vector_field(*r)
    }
}

/// The traceless Hermitian part `X − I/2` of a density matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracelessPart(pub [[Complex64; 2]; 2]);

impl TracelessPart {
    pub fn from_bloch(r: BlochVector) -> Self {
        let h = |v: f64| v * 0.5;
        TracelessPart([
            [Complex64::new(h(r.z), 0.0), Complex64::new(h(r.x), -h(r.y))],
            [Complex64::new(h(r.x), h(r.y)), Complex64::new(-h(r.z), 0.0)],
        ])
    }

    /// `(tr Δσx, tr Δσy, tr Δσz)`; exact for states built by [`Self::from_bloch`].
    pub fn bloch(&self) -> BlochVector {
        let e = &self.0;
        BlochVector::new(
            e[0][1].re + e[1][0].re,
            e[1][0].im - e[0][1].im,
            e[0][0].re - e[1][1].re,
        )
    }

    pub fn density(&self) -> DensityMatrix {
        let half = Complex64::new(0.5, 0.0);
        let e = &self.0;
        DensityMatrix::new([[half + e[0][0], e[0][1]], [e[1][0], half + e[1][1]]])
    }
}

impl Add for TracelessPart {
    type Output = TracelessPart;
    fn add(self, o: TracelessPart) -> TracelessPart {
        let mut e = self.0;
        for i in 0..2 {
            for j in 0..2 {
                e[i][j] += o.0[i][j];
            }
        }
        TracelessPart(e)
    }
}

impl Mul<f64> for TracelessPart {
    type Output = TracelessPart;
    fn mul(self, s: f64) -> TracelessPart {
        let mut e = self.0;
        e.iter_mut().flatten().for_each(|v| *v *= s);
        TracelessPart(e)
    }
}

impl Phase for TracelessPart {
    fn magnitude(&self) -> f64 {
        self.bloch().norm()
    }
    fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|v| v.is_finite())
    }
}

/// Density-form flow `dX/dt = Σ_a (σᵃ/2) (G(r) r)ᵃ` with `r = tr(X σ)`.
pub struct DensityFlow<'a>(pub &'a TorsionGenerator);

impl Flow<TracelessPart> for DensityFlow<'_> {
    fn rate(&self, x: &TracelessPart) -> TracelessPart {
        TracelessPart::from_bloch(self.0.vector_field(x.bloch()))
    }
}

/// One classical fourth-order Runge-Kutta step.
pub fn rk4<S: Phase, F: Flow<S>>(flow: &F, s: S, h: f64) -> S {
    let half = 0.5 * h;
    let k1 = flow.rate(&s);
    let k2 = flow.rate(&(s + k1 * half));
    let k3 = flow.rate(&(s + k2 * half));
    let k4 = flow.rate(&(s + k3 * h));
    s + (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0)
}

// Dormand-Prince 5(4) tableau.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// b - b*, fifth minus fourth order weights
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// One Dormand-Prince step from `s` with `k1 = f(s)`. Returns the fifth-order
/// solution, `f` at that solution (FSAL) and the embedded error estimate.
pub fn dopri5<S: Phase, F: Flow<S>>(flow: &F, s: S, k1: S, h: f64) -> (S, S, S) {
    let k2 = flow.rate(&(s + k1 * (h * A21)));
    let k3 = flow.rate(&(s + (k1 * A31 + k2 * A32) * h));
    let k4 = flow.rate(&(s + (k1 * A41 + k2 * A42 + k3 * A43) * h));
    let k5 = flow.rate(&(s + (k1 * A51 + k2 * A52 + k3 * A53 + k4 * A54) * h));
    let k6 = flow.rate(&(s + (k1 * A61 + k2 * A62 + k3 * A63 + k4 * A64 + k5 * A65) * h));
    let next = s + (k1 * B1 + k3 * B3 + k4 * B4 + k5 * B5 + k6 * B6) * h;
    let k7 = flow.rate(&next);
    let err = (k1 * E1 + k3 * E3 + k4 * E4 + k5 * E5 + k6 * E6 + k7 * E7) * h;
    (next, k7, err)
}

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Rk4,
    Rk45,
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rk4" => Ok(Method::Rk4),
            "rk45" | "dopri5" => Ok(Method::Rk45),
            _ => Err(Error::Validation(format!("unknown method `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegratorConfig {
    pub method: Method,
    /// Fixed step for rk4, initial step for rk45.
    pub dt: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub t_max: f64,
    /// Keep every k-th accepted step.
    pub sample_every: usize,
    pub max_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            method: Method::Rk45,
            dt: 5e-3,
            rel_tol: 1e-9,
            abs_tol: 1e-9,
            t_max: 200.0,
            sample_every: 1,
            max_steps: 50_000_000,
        }
    }
}

impl IntegratorConfig {
    pub fn rk4(dt: f64, t_max: f64) -> Self {
        IntegratorConfig {
            method: Method::Rk4,
            dt,
            t_max,
            ..Default::default()
        }
    }

    pub fn rk45(tol: f64, t_max: f64) -> Self {
        IntegratorConfig {
            method: Method::Rk45,
            rel_tol: tol,
            abs_tol: tol,
            t_max,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("dt", self.dt),
            ("rel_tol", self.rel_tol),
            ("abs_tol", self.abs_tol),
            ("t_max", self.t_max),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Validation(format!(
                    "{name} must be positive and finite (got {v})"
                )));
            }
        }
        if self.sample_every == 0 || self.max_steps == 0 {
            return Err(Error::Validation(
                "sample_every and max_steps must be positive".to_string(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Completed,
    MaxSteps,
    Nonfinite,
}

/// Result of advancing a state over an interval.
#[derive(Debug, Clone, Copy)]
pub struct Advance<S> {
    pub state: S,
    pub t: f64,
    pub termination: Termination,
}

/// Drives a [`Flow`] with the configured method. The adaptive step size is
/// carried across calls to [`Integrator::advance`].
pub struct Integrator<'a, F> {
    flow: &'a F,
    cfg: IntegratorConfig,
    h: f64,
    steps: usize,
}

impl<'a, F> Integrator<'a, F> {
    pub fn new(flow: &'a F, cfg: &IntegratorConfig) -> Self {
        Integrator {
            flow,
            cfg: *cfg,
            h: cfg.dt,
            steps: 0,
        }
    }

    /// Accepted steps taken so far.
    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Advance `s` from `t0` to `t1`, calling `observe(t, &state)` after every
    /// accepted step. A non-finite state is never passed to the observer.
    pub fn advance<S: Phase>(
        &mut self,
        s: S,
        t0: f64,
        t1: f64,
        mut observe: impl FnMut(f64, &S),
    ) -> Advance<S>
    where
        F: Flow<S>,
    {
        match self.cfg.method {
            Method::Rk4 => self.advance_fixed(s, t0, t1, &mut observe),
            Method::Rk45 => self.advance_adaptive(s, t0, t1, &mut observe),
        }
    }

    fn advance_fixed<S: Phase>(
        &mut self,
        mut s: S,
        t0: f64,
        t1: f64,
        observe: &mut impl FnMut(f64, &S),
    ) -> Advance<S>
    where
        F: Flow<S>,
    {
        let dt = self.cfg.dt;
        let span = t1 - t0;
        let n = ((span / dt) * (1.0 - 1e-12)).ceil().max(0.0) as usize;
        let mut t = t0;
        for k in 1..=n {
            if self.steps >= self.cfg.max_steps {
                return Advance { state: s, t, termination: Termination::MaxSteps };
            }
            let t_next = if k == n { t1 } else { t0 + k as f64 * dt };
            let next = rk4(self.flow, s, t_next - t);
            if !next.is_finite() {
                return Advance { state: s, t, termination: Termination::Nonfinite };
            }
            s = next;
            t = t_next;
            self.steps += 1;
            observe(t, &s);
        }
        Advance { state: s, t, termination: Termination::Completed }
    }

    fn advance_adaptive<S: Phase>(
        &mut self,
        mut s: S,
        t0: f64,
        t1: f64,
        observe: &mut impl FnMut(f64, &S),
    ) -> Advance<S>
    where
        F: Flow<S>,
    {
        let mut t = t0;
        let mut k1 = self.flow.rate(&s);
        let mut rejections = 0usize;
        while t < t1 {
            if self.steps + rejections >= self.cfg.max_steps {
                return Advance { state: s, t, termination: Termination::MaxSteps };
            }
            let last = self.h >= t1 - t;
            let h = if last { t1 - t } else { self.h };
            let (next, k_next, err) = dopri5(self.flow, s, k1, h);
            if !next.is_finite() || !err.is_finite() {
                // A blown-up trial step is retried smaller until the step
                // size itself underflows relative to t.
                self.h = h * MIN_FACTOR;
                rejections += 1;
                if t + self.h == t || !k1.is_finite() {
                    return Advance { state: s, t, termination: Termination::Nonfinite };
                }
                continue;
            }
            let scale = self
                .cfg
                .abs_tol
                .max(self.cfg.rel_tol * s.magnitude().max(next.magnitude()));
            let ratio = err.magnitude() / scale;
            let factor = if ratio == 0.0 {
                MAX_FACTOR
            } else {
                (SAFETY * ratio.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR)
            };
            if ratio <= 1.0 {
                s = next;
                k1 = k_next;
                t = if last { t1 } else { t + h };
                self.steps += 1;
                observe(t, &s);
                // a step clipped to land on t1 says little about the next one
                let proposal = h * factor;
                self.h = if last && h < self.h { self.h.max(proposal) } else { proposal };
            } else {
                self.h = h * factor.min(1.0);
                rejections += 1;
            }
        }
        Advance { state: s, t, termination: Termination::Completed }
    }
}

/// Which representation a trajectory was integrated in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Form {
    Bloch,
    Density,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectorySample {
    pub t: f64,
    pub r: BlochVector,
    pub norm: f64,
    pub purity: f64,
    /// Von Neumann entropy in nats; NaN for samples outside the Bloch ball.
    pub entropy: f64,
    /// `|tr X − 1|` for density-form runs, otherwise 0.
    pub trace_error: f64,
}

impl TrajectorySample {
    pub fn new(t: f64, r: BlochVector, trace_error: f64) -> Self {
        TrajectorySample {
            t,
            r,
            norm: r.norm(),
            purity: state::purity(r),
            entropy: state::von_neumann_entropy(r).unwrap_or(f64::NAN),
            trace_error,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    pub generator: TorsionGenerator,
    pub config: IntegratorConfig,
    pub form: Form,
    pub termination: Termination,
}

impl Trajectory {
    pub fn initial(&self) -> &TrajectorySample {
        &self.samples[0]
    }

    pub fn last(&self) -> &TrajectorySample {
        self.samples.last().expect("trajectory is never empty")
    }

    /// Samples with `t >= cutoff`.
    pub fn after(&self, cutoff: f64) -> impl Iterator<Item = &TrajectorySample> {
        self.samples.iter().filter(move |s| s.t >= cutoff)
    }

    /// Largest `|r|` among samples with `t >= cutoff`.
    pub fn max_norm_after(&self, cutoff: f64) -> Option<f64> {
        self.after(cutoff).map(|s| s.norm).reduce(f64::max)
    }
}

/// One RK4 step of the Bloch-form field.
pub fn step_rk4(gen: &TorsionGenerator, r: BlochVector, dt: f64) -> Result<BlochVector> {
    if !(dt > 0.0) {
        return Err(Error::Validation(format!("dt must be positive (got {dt})")));
    }
    let next = rk4(gen, r, dt);
    if next.is_finite() {
        Ok(next)
    } else {
        Err(Error::NonFinite { t: dt })
    }
}

fn sampled<S: Phase, F: Flow<S>>(
    flow: &F,
    s0: S,
    cfg: &IntegratorConfig,
    first: TrajectorySample,
    to_sample: impl Fn(f64, &S) -> TrajectorySample,
) -> (Vec<TrajectorySample>, Termination) {
    let mut samples = vec![first];
    let mut count = 0usize;
    let mut pending: Option<TrajectorySample> = None;
    let mut integrator = Integrator::new(flow, cfg);
    let every = cfg.sample_every;
    let end = integrator.advance(s0, 0.0, cfg.t_max, |t, s| {
        count += 1;
        let sample = to_sample(t, s);
        if count.is_multiple_of(every) {
            samples.push(sample);
            pending = None;
        } else {
            pending = Some(sample);
        }
    });
    // the final state is always kept
    if let Some(p) = pending {
        samples.push(p);
    }
    (samples, end.termination)
}

/// Integrate `dr/dt = G(r) r` from `r0` over `[0, cfg.t_max]`.
pub fn integrate_bloch(
    gen: &TorsionGenerator,
    r0: BlochVector,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    cfg.validate()?;
    if !r0.is_finite() {
        return Err(Error::Validation("initial state must be finite".to_string()));
    }
    let (samples, termination) = sampled(
        gen,
        r0,
        cfg,
        TrajectorySample::new(0.0, r0, 0.0),
        |t, r| TrajectorySample::new(t, *r, 0.0),
    );
    Ok(Trajectory {
        samples,
        generator: *gen,
        config: *cfg,
        form: Form::Bloch,
        termination,
    })
}

fn initial_traceless(x0: &DensityMatrix) -> Result<TracelessPart> {
    let report = state::check_state(x0);
    if !(report.trace_error <= state::MATRIX_TOL) {
        return Err(Error::Validation(format!(
            "initial density matrix must have unit trace (error {:e})",
            report.trace_error
        )));
    }
    Ok(TracelessPart::from_bloch(state::bloch_from_density(x0)?))
}

/// Evolve a density matrix directly, reporting every accepted step as the
/// full matrix `X(t)`.
pub fn evolve_density(
    gen: &TorsionGenerator,
    x0: &DensityMatrix,
    cfg: &IntegratorConfig,
    mut observe: impl FnMut(f64, &DensityMatrix),
) -> Result<Advance<DensityMatrix>> {
    cfg.validate()?;
    let flow = DensityFlow(gen);
    let end = Integrator::new(&flow, cfg).advance(initial_traceless(x0)?, 0.0, cfg.t_max, |t, d| {
        observe(t, &d.density())
    });
    Ok(Advance {
        state: end.state.density(),
        t: end.t,
        termination: end.termination,
    })
}

/// Integrate the master equation in density-matrix form from `X0`.
pub fn integrate_density(
    gen: &TorsionGenerator,
    x0: &DensityMatrix,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    cfg.validate()?;
    let d0 = initial_traceless(x0)?;
    let trace_error = |x: &DensityMatrix| (x.trace() - Complex64::new(1.0, 0.0)).norm();
    let first = TrajectorySample::new(0.0, d0.bloch(), trace_error(x0));
    let (samples, termination) = sampled(&DensityFlow(gen), d0, cfg, first, |t, d| {
        TrajectorySample::new(t, d.bloch(), trace_error(&d.density()))
    });
    Ok(Trajectory {
        samples,
        generator: *gen,
        config: *cfg,
        form: Form::Density,
        termination,
    })
}

/// Independent Bloch-form runs from each seed, in seed order.
pub fn ensemble(
    gen: &TorsionGenerator,
    seeds: &[BlochVector],
    cfg: &IntegratorConfig,
) -> Result<Vec<Trajectory>> {
    if seeds.is_empty() {
        return Err(Error::Validation("ensemble needs at least one seed".to_string()));
    }
    cfg.validate()?;
    seeds
        .par_iter()
        .map(|&r0| integrate_bloch(gen, r0, cfg))
        .collect()
}
