//! Dynamical-systems diagnostics over generators and trajectories.

mod conservation;
mod fixed_point;
mod lobes;
mod lyapunov;

pub use conservation::{
    conservation_monitor, entropy_series, gp_invariants, ConservationDrift, EntropyPoint,
};
pub use fixed_point::{
    find_fixed_points, newton_fixed_point, Classification, FixedPoint, DEFAULT_MAX_ITER,
};
pub use lobes::{default_lobe_threshold, lobe_statistics, LobeStats};
pub use lyapunov::{
    largest_lyapunov, lyapunov_spectrum, LyapunovResult, LyapunovSettings, LyapunovSpectrum,
};
