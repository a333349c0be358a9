use serde::{Deserialize, Serialize};

use crate::generators::{Axis, Lor63Params};
use crate::integrate::Trajectory;

/// Switching between the two wings of the attractor, detected as sign
/// changes of one coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LobeStats {
    pub axis: Axis,
    pub threshold: f64,
    pub switch_times: Vec<f64>,
    /// First differences of `switch_times`.
    pub residence_durations: Vec<f64>,
    pub switch_count: usize,
}

impl LobeStats {
    /// Standard deviation over mean of the residence durations; `None` with
    /// fewer than two durations.
    pub fn coefficient_of_variation(&self) -> Option<f64> {
        let d = &self.residence_durations;
        if d.len() < 2 {
            return None;
        }
        let n = d.len() as f64;
        let mean = d.iter().sum::<f64>() / n;
        let var = d.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
        Some(var.sqrt() / mean)
    }
}

/// Quarter of the wing-centre offset `√(β(ρ−1))/g`.
pub fn default_lobe_threshold(p: &Lor63Params) -> f64 {
    0.25 * p.fixed_point_radius()
}

/// A switch is counted when the coordinate goes from beyond `+threshold` to
/// beyond `−threshold` or back. The switch time is the last zero crossing
/// (linearly interpolated) before the new side was reached, so chatter
/// around zero inside the band is ignored.
pub fn lobe_statistics(traj: &Trajectory, axis: Axis, threshold: f64) -> LobeStats {
    let mut side: Option<bool> = traj
        .samples
        .first()
        .map(|s| s.r.component(axis))
        .filter(|v| v.abs() > threshold)
        .map(|v| v > 0.0);
    let mut last_crossing: Option<f64> = None;
    let mut switch_times = Vec::new();
    for w in traj.samples.windows(2) {
        let (a, b) = (&w[0], &w[1]);
        let (va, vb) = (a.r.component(axis), b.r.component(axis));
        if (va < 0.0) != (vb < 0.0) {
            last_crossing = Some(a.t + (b.t - a.t) * va / (va - vb));
        }
        if vb.abs() > threshold {
            let positive = vb > 0.0;
            if side == Some(!positive) {
                if let Some(t) = last_crossing {
                    switch_times.push(t);
                }
            }
            side = Some(positive);
        }
    }
    let residence_durations = switch_times.windows(2).map(|w| w[1] - w[0]).collect();
    LobeStats {
        axis,
        threshold,
        switch_count: switch_times.len(),
        switch_times,
        residence_durations,
    }
}
