//! Conserved quantities of the GP butterfly and entropy monitoring.
//!
//! For `G(r) = m λ₄ + g z J_z` the field is `(m z − g z y, g z x, m x)`.
//! Since `dz/dt = m x` and `dy/dt = g z x`, `C = y − (g/2m) z²` is constant.
//! Substituting `y` into `dx/dt = z (m − g y)` gives
//! `dx/dt = z (A − (g²/2m) z²)` with `A = m − g C`, whose first integral is
//! `H = (m/2) x² − (A/2) z² + (g²/8m) z⁴`.

use serde::{Deserialize, Serialize};

use crate::generators::GPParams;
use crate::integrate::Trajectory;
use crate::state::{self, BlochVector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConservationDrift {
    pub quantity: String,
    pub initial: f64,
    /// `max_t |Q(t) − Q(0)|`.
    pub max_drift: f64,
}

/// `(C, H)` at `r`.
pub fn gp_invariants(r: BlochVector, p: &GPParams) -> (f64, f64) {
    let c = r.y - p.g / (2.0 * p.m) * r.z * r.z;
    let a = p.m - p.g * c;
    let z2 = r.z * r.z;
    let h = 0.5 * p.m * r.x * r.x - 0.5 * a * z2 + p.g * p.g / (8.0 * p.m) * z2 * z2;
    (c, h)
}

pub fn conservation_monitor(traj: &Trajectory, p: &GPParams) -> Vec<ConservationDrift> {
    let (c0, h0) = gp_invariants(traj.initial().r, p);
    let (dc, dh) = traj.samples.iter().fold((0.0f64, 0.0f64), |(dc, dh), s| {
        let (c, h) = gp_invariants(s.r, p);
        (dc.max((c - c0).abs()), dh.max((h - h0).abs()))
    });
    vec![
        ConservationDrift {
            quantity: "C".to_string(),
            initial: c0,
            max_drift: dc,
        },
        ConservationDrift {
            quantity: "H".to_string(),
            initial: h0,
            max_drift: dh,
        },
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntropyPoint {
    pub t: f64,
    /// Omitted for samples outside the Bloch ball.
    pub entropy: Option<f64>,
    pub purity: f64,
    pub norm: f64,
    pub physical: bool,
}

pub fn entropy_series(traj: &Trajectory) -> Vec<EntropyPoint> {
    traj.samples
        .iter()
        .map(|s| {
            let entropy = state::von_neumann_entropy(s.r).ok();
            EntropyPoint {
                t: s.t,
                entropy,
                purity: state::purity(s.r),
                norm: s.r.norm(),
                physical: entropy.is_some(),
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{custom_generator, gp_generator, Axis, Mat3};
    use crate::integrate::{integrate_bloch, IntegratorConfig};

    #[test]
    fn invariants_at_reference_point() {
        let p = GPParams::default();
        let (c, _) = gp_invariants(BlochVector::new(0.1, 0.2, 0.1), &p);
        assert!((c - 0.18).abs() < 1e-15);
        assert_eq!(gp_invariants(BlochVector::ORIGIN, &p), (0.0, 0.0));
    }

    #[test]
    fn invariants_have_zero_time_derivative() {
        // chain rule against the field, for parameters away from g = 4m
        for p in [GPParams::default(), GPParams { m: 3.0, g: 7.0 }] {
            let gen = gp_generator(&p);
            for r in [
                BlochVector::new(0.3, -0.2, 0.5),
                BlochVector::new(-0.7, 0.1, 0.2),
            ] {
                let f = gen.vector_field(r);
                let h = 1e-6;
                let (c_plus, h_plus) = gp_invariants(r + f * h, &p);
                let (c_minus, h_minus) = gp_invariants(r - f * h, &p);
                assert!(((c_plus - c_minus) / (2.0 * h)).abs() < 1e-6);
                assert!(((h_plus - h_minus) / (2.0 * h)).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn stationary_origin_has_no_drift() {
        let p = GPParams::default();
        let traj = integrate_bloch(&gp_generator(&p), BlochVector::ORIGIN, &IntegratorConfig::rk45(1e-9, 10.0))
            .unwrap();
        for d in conservation_monitor(&traj, &p) {
            assert_eq!(d.max_drift, 0.0);
        }
    }

    #[test]
    fn gp_drift_is_small_and_sampling_independent() {
        let p = GPParams::default();
        let r0 = BlochVector::new(0.1, 0.2, 0.1);
        let dense = IntegratorConfig::rk45(1e-9, 100.0);
        let sparse = IntegratorConfig { sample_every: 2, ..dense };
        let gen = gp_generator(&p);
        let a = conservation_monitor(&integrate_bloch(&gen, r0, &dense).unwrap(), &p);
        let b = conservation_monitor(&integrate_bloch(&gen, r0, &sparse).unwrap(), &p);
        assert!((a[0].initial - 0.18).abs() < 1e-15);
        for (x, y) in a.iter().zip(&b) {
            assert!(x.max_drift < 1e-6, "{} drift {}", x.quantity, x.max_drift);
            assert!((x.max_drift - y.max_drift).abs() <= 0.1 * x.max_drift.max(1e-300));
        }
    }

    #[test]
    fn entropy_of_mixed_and_decaying_states() {
        let zero = custom_generator(Mat3::ZERO, Axis::X.unit(), 0.0, Axis::X).unwrap();
        let traj = integrate_bloch(&zero, BlochVector::ORIGIN, &IntegratorConfig::rk4(0.1, 1.0)).unwrap();
        assert!(entropy_series(&traj)
            .iter()
            .all(|e| e.entropy == Some(std::f64::consts::LN_2)));

        let decay = custom_generator(Mat3::identity() * -1.0, Axis::X.unit(), 0.0, Axis::X).unwrap();
        let traj = integrate_bloch(&decay, BlochVector::new(0.0, 0.6, 0.7), &IntegratorConfig::rk4(0.1, 3.0))
            .unwrap();
        let series = entropy_series(&traj);
        for w in series.windows(2) {
            assert!(w[1].norm < w[0].norm);
            assert!(w[1].entropy.unwrap() > w[0].entropy.unwrap());
            assert!(w[1].purity < w[0].purity);
        }
    }

    #[test]
    fn unphysical_samples_are_flagged() {
        let grow = custom_generator(Mat3::identity(), Axis::X.unit(), 0.0, Axis::X).unwrap();
        let traj = integrate_bloch(&grow, BlochVector::new(0.5, 0.0, 0.0), &IntegratorConfig::rk4(0.1, 2.0))
            .unwrap();
        let series = entropy_series(&traj);
        assert!(series.first().unwrap().physical);
        let last = series.last().unwrap();
        assert!(!last.physical);
        assert_eq!(last.entropy, None);
    }
}
