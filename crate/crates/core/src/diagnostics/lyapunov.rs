//! Lyapunov exponents by co-integrating tangent vectors along a trajectory
//! and renormalizing them at fixed intervals (Benettin's method).

use std::ops::{Add, Mul};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generators::TorsionGenerator;
use crate::integrate::{Flow, Integrator, IntegratorConfig, Phase, Termination};
use crate::state::BlochVector;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LyapunovSettings {
    /// Time discarded before tangent vectors are tracked.
    pub transient: f64,
    /// Averaging time after the transient.
    pub total_time: f64,
    pub renorm_interval: f64,
}

impl Default for LyapunovSettings {
    fn default() -> Self {
        LyapunovSettings {
            transient: 20.0,
            total_time: 2000.0,
            renorm_interval: 0.5,
        }
    }
}

impl LyapunovSettings {
    fn validate(&self) -> Result<usize> {
        if !(self.renorm_interval > 0.0)
            || !(self.total_time >= self.renorm_interval)
            || !(self.transient >= 0.0)
            || !self.total_time.is_finite()
        {
            return Err(Error::Validation(format!(
                "need total_time >= renorm_interval > 0 and transient >= 0 (got {self:?})"
            )));
        }
        Ok((self.total_time / self.renorm_interval).round() as usize)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyapunovResult {
    pub lambda_max: f64,
    /// `(t, λ(t))` after each renormalization, `t` measured from the end of the transient.
    pub running_estimates: Vec<(f64, f64)>,
    pub renorm_interval: f64,
    pub total_time: f64,
    pub transient: f64,
    /// Spread (max − min) of the running estimate over its last quarter.
    pub last_quarter_spread: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LyapunovSpectrum {
    /// Descending.
    pub exponents: [f64; 3],
    pub sum: f64,
    pub renorm_interval: f64,
    pub total_time: f64,
    pub transient: f64,
}

/// A base point together with `K` tangent vectors.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Tangent<const K: usize> {
    r: BlochVector,
    v: [BlochVector; K],
}

impl<const K: usize> Add for Tangent<K> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        let mut v = self.v;
        for (a, b) in v.iter_mut().zip(o.v) {
            *a = *a + b;
        }
        Tangent { r: self.r + o.r, v }
    }
}

impl<const K: usize> Mul<f64> for Tangent<K> {
    type Output = Self;
    fn mul(self, s: f64) -> Self {
        Tangent {
            r: self.r * s,
            v: self.v.map(|v| v * s),
        }
    }
}

impl<const K: usize> Phase for Tangent<K> {
    fn magnitude(&self) -> f64 {
        (self.r.dot(self.r) + self.v.iter().map(|v| v.dot(*v)).sum::<f64>()).sqrt()
    }
    fn is_finite(&self) -> bool {
        self.r.is_finite() && self.v.iter().all(|v| v.is_finite())
    }
}

struct TangentFlow<'a>(&'a TorsionGenerator);

impl<const K: usize> Flow<Tangent<K>> for TangentFlow<'_> {
    fn rate(&self, s: &Tangent<K>) -> Tangent<K> {
        let j = self.0.jacobian(s.r);
        Tangent {
            r: self.0.vector_field(s.r),
            v: s.v.map(|v| j.mul_vec(v)),
        }
    }
}

fn check(termination: Termination, t: f64) -> Result<()> {
    match termination {
        Termination::Completed => Ok(()),
        Termination::Nonfinite => Err(Error::NonFinite { t }),
        Termination::MaxSteps => Err(Error::Validation(format!(
            "max_steps exhausted at t = {t} during Lyapunov run"
        ))),
    }
}

fn settle(
    gen: &TorsionGenerator,
    r0: BlochVector,
    transient: f64,
    cfg: &IntegratorConfig,
) -> Result<BlochVector> {
    cfg.validate()?;
    if transient == 0.0 {
        return Ok(r0);
    }
    let end = Integrator::new(gen, cfg).advance(r0, 0.0, transient, |_, _| {});
    check(end.termination, end.t)?;
    Ok(end.state)
}

/// Largest Lyapunov exponent, starting the tangent vector at `(1, 0, 0)`.
pub fn largest_lyapunov(
    gen: &TorsionGenerator,
    r0: BlochVector,
    settings: &LyapunovSettings,
    cfg: &IntegratorConfig,
) -> Result<LyapunovResult> {
    let intervals = settings.validate()?;
    let r = settle(gen, r0, settings.transient, cfg)?;
    let flow = TangentFlow(gen);
    let mut integrator = Integrator::new(&flow, cfg);
    let mut s = Tangent {
        r,
        v: [BlochVector::new(1.0, 0.0, 0.0)],
    };
    let mut log_sum = 0.0;
    let mut running = Vec::with_capacity(intervals);
    let tau = settings.renorm_interval;
    for k in 0..intervals {
        let (t0, t1) = (k as f64 * tau, (k + 1) as f64 * tau);
        let end = integrator.advance(s, t0, t1, |_, _| {});
        check(end.termination, settings.transient + end.t)?;
        s = end.state;
        let stretch = s.v[0].norm();
        if !(stretch > 0.0 && stretch.is_finite()) {
            return Err(Error::NonFinite { t: settings.transient + t1 });
        }
        log_sum += stretch.ln();
        s.v[0] = s.v[0] * (1.0 / stretch);
        running.push((t1, log_sum / t1));
    }
    let elapsed = intervals as f64 * tau;
    let quarter = &running[running.len() - running.len().div_ceil(4)..];
    let (lo, hi) = quarter
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &(_, l)| (lo.min(l), hi.max(l)));
    Ok(LyapunovResult {
        lambda_max: log_sum / elapsed,
        running_estimates: running,
        renorm_interval: tau,
        total_time: elapsed,
        transient: settings.transient,
        last_quarter_spread: hi - lo,
    })
}

/// All three exponents via repeated Gram-Schmidt orthonormalization of a
/// tangent frame. Their sum approximates the mean divergence of the flow.
pub fn lyapunov_spectrum(
    gen: &TorsionGenerator,
    r0: BlochVector,
    settings: &LyapunovSettings,
    cfg: &IntegratorConfig,
) -> Result<LyapunovSpectrum> {
    let intervals = settings.validate()?;
    let r = settle(gen, r0, settings.transient, cfg)?;
    let flow = TangentFlow(gen);
    let mut integrator = Integrator::new(&flow, cfg);
    let mut s = Tangent {
        r,
        v: [
            BlochVector::new(1.0, 0.0, 0.0),
            BlochVector::new(0.0, 1.0, 0.0),
            BlochVector::new(0.0, 0.0, 1.0),
        ],
    };
    let mut sums = [0.0; 3];
    let tau = settings.renorm_interval;
    for k in 0..intervals {
        let end = integrator.advance(s, k as f64 * tau, (k + 1) as f64 * tau, |_, _| {});
        check(end.termination, settings.transient + end.t)?;
        s = end.state;
        // modified Gram-Schmidt; the norms are the diagonal of R in v = QR
        for i in 0..3 {
            for j in 0..i {
                let proj = s.v[i].dot(s.v[j]);
                s.v[i] = s.v[i] - s.v[j] * proj;
            }
            let n = s.v[i].norm();
            if !(n > 0.0 && n.is_finite()) {
                return Err(Error::NonFinite { t: settings.transient + end.t });
            }
            sums[i] += n.ln();
            s.v[i] = s.v[i] * (1.0 / n);
        }
    }
    let elapsed = intervals as f64 * tau;
    let mut exponents = sums.map(|s| s / elapsed);
    exponents.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    Ok(LyapunovSpectrum {
        exponents,
        sum: exponents.iter().sum(),
        renorm_interval: tau,
        total_time: elapsed,
        transient: settings.transient,
    })
}
