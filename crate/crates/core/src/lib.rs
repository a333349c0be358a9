//! Nonlinear positive trace-preserving qubit channels whose Bloch-ball
//! dynamics trace out Lorenz-type attractors.
//!
//! The crate is organized bottom-up:
//!
//! - [`state`]: Bloch vectors, density matrices and their observables.
//! - [`generators`]: torsion generators `G(r) = L + g (e·r) J_a`, including the
//!   Lorenz-63 qubit and the GP butterfly.
//! - [`integrate`]: RK4 and Dormand-Prince integration in Bloch or density form.
//! - [`diagnostics`]: fixed points, Lyapunov exponents, lobe switching,
//!   conserved quantities and entropy series.
//! - [`io`] and [`cli`]: configuration, CSV/JSON/SVG export and the command line.

pub mod cli;
pub mod diagnostics;
pub mod error;
pub mod generators;
pub mod integrate;
pub mod io;
pub mod state;

pub use error::{Error, Result};
pub use generators::{
    custom_generator, gell_mann, gp_generator, lor63_generator, so3_generator, Axis, GPParams,
    GellMann, Lor63Params, Mat3, TorsionGenerator,
};
pub use integrate::{
    ensemble, integrate_bloch, integrate_density, step_rk4, Form, IntegratorConfig, Method,
    Termination, Trajectory, TrajectorySample,
};
pub use state::{
    bloch_from_density, check_state, density_from_bloch, purity, von_neumann_entropy,
    BlochVector, DensityMatrix, StateCheckReport,
};
