use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generators::TorsionGenerator;
use crate::state::BlochVector;

pub const DEFAULT_MAX_ITER: usize = 100;
const MAX_HALVINGS: usize = 40;
const DEGENERATE_RE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    /// All eigenvalues have negative real part.
    Stable,
    /// All eigenvalues have positive real part.
    Unstable,
    /// Mixed signs of the real parts.
    Saddle,
    /// Some eigenvalue has `|Re| < 1e-8`.
    Degenerate,
}

impl Classification {
    pub fn from_eigenvalues(ev: &[Complex64]) -> Self {
        if ev.iter().any(|c| c.re.abs() < DEGENERATE_RE) {
            Classification::Degenerate
        } else if ev.iter().all(|c| c.re < 0.0) {
            Classification::Stable
        } else if ev.iter().all(|c| c.re > 0.0) {
            Classification::Unstable
        } else {
            Classification::Saddle
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FixedPoint {
    pub r_star: BlochVector,
    /// `|f(r*)|`.
    pub residual: f64,
    pub jacobian_eigenvalues: [Complex64; 3],
    pub classification: Classification,
    pub iterations: usize,
}

/// Solve `J δ = −f` by Gaussian elimination with partial pivoting; `None`
/// when `J` is numerically singular.
fn newton_direction(j: &crate::generators::Mat3, f: BlochVector) -> Option<BlochVector> {
    let lu = j.to_nalgebra().lu();
    let scale = j.0.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    let det = lu.determinant();
    if !(det.abs() > 1e-13 * scale * scale * scale) {
        return None;
    }
    let rhs = nalgebra::Vector3::new(-f.x, -f.y, -f.z);
    lu.solve(&rhs)
        .map(|d| BlochVector::new(d[0], d[1], d[2]))
        .filter(|d| d.is_finite())
}

/// Damped Newton iteration for `G(r) r = 0`.
///
/// Full Newton steps are halved (up to 40 times) until the residual drops.
/// When the Jacobian is singular the steepest-descent direction `−Jᵀ f` of
/// `|f|²/2` is used instead.
pub fn newton_fixed_point(
    gen: &TorsionGenerator,
    guess: BlochVector,
    tol: f64,
    max_iter: usize,
) -> Result<FixedPoint> {
    if !(tol > 0.0) {
        return Err(Error::Validation(format!("tol must be positive (got {tol})")));
    }
    let mut r = guess;
    let mut f = gen.vector_field(r);
    let mut res = f.norm();
    let mut iterations = 0;
    while !(res <= tol) {
        if iterations >= max_iter || !res.is_finite() {
            return Err(Error::Convergence {
                best: r,
                residual: res,
                iterations,
            });
        }
        iterations += 1;
        let j = gen.jacobian(r);
        let direction = match newton_direction(&j, f) {
            Some(d) => d,
            None => -j.transpose().mul_vec(f),
        };
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..=MAX_HALVINGS {
            let trial = r + direction * step;
            let f_trial = gen.vector_field(trial);
            let res_trial = f_trial.norm();
            if res_trial < res {
                r = trial;
                f = f_trial;
                res = res_trial;
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            // at roundoff level the residual cannot drop further
            if res <= tol * 1e3 && res <= 1e-13 {
                break;
            }
            return Err(Error::DegenerateStep { at: r });
        }
    }
    let ev = gen.jacobian(r).eigenvalues();
    Ok(FixedPoint {
        r_star: r,
        residual: res,
        jacobian_eigenvalues: ev,
        classification: Classification::from_eigenvalues(&ev),
        iterations,
    })
}

/// Run Newton from each guess and keep the distinct converged roots, sorted
/// by `(x, y, z)`. Guesses that fail to converge are skipped.
pub fn find_fixed_points(
    gen: &TorsionGenerator,
    guesses: &[BlochVector],
    tol: f64,
    max_iter: usize,
) -> Vec<FixedPoint> {
    let mut found: Vec<FixedPoint> = Vec::new();
    for &g in guesses {
        if let Ok(fp) = newton_fixed_point(gen, g, tol, max_iter) {
            if !found.iter().any(|p| p.r_star.max_abs_diff(fp.r_star) < 1e-8) {
                found.push(fp);
            }
        }
    }
    found.sort_by(|a, b| {
        let (a, b) = (a.r_star.to_array(), b.r_star.to_array());
        a.partial_cmp(&b).unwrap_or(std::cmp::Ordering::Equal)
    });
    found
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::{gp_generator, lor63_generator, GPParams, Lor63Params};

    fn closed_form_c_plus(p: &Lor63Params) -> BlochVector {
        // y = x, z = (ρ−1)/g, x² = β(ρ−1)/g²
        let a = (p.beta * (p.rho - 1.0)).sqrt() / p.g;
        BlochVector::new(a, a, (p.rho - 1.0) / p.g)
    }

    #[test]
    fn origin_needs_no_iterations() {
        for gen in [
            lor63_generator(&Lor63Params::default()),
            gp_generator(&GPParams::default()),
        ] {
            let fp = newton_fixed_point(&gen, BlochVector::ORIGIN, 1e-12, 10).unwrap();
            assert_eq!(fp.r_star, BlochVector::ORIGIN);
            assert_eq!(fp.residual, 0.0);
            assert_eq!(fp.iterations, 0);
        }
    }

    #[test]
    fn lorenz_wing_centres() {
        let p = Lor63Params::default();
        let gen = lor63_generator(&p);
        let c = closed_form_c_plus(&p);
        assert!((c.x - 0.10606602).abs() < 1e-8);
        assert_eq!(c.z, 0.3375);

        let plus = newton_fixed_point(&gen, BlochVector::new(0.1, 0.1, 0.3), 1e-12, 50).unwrap();
        assert!(plus.r_star.max_abs_diff(c) < 1e-12);
        assert!(plus.residual <= 1e-10);
        let minus = newton_fixed_point(&gen, BlochVector::new(-0.1, -0.1, 0.3), 1e-12, 50).unwrap();
        let mirrored = BlochVector::new(-plus.r_star.x, -plus.r_star.y, plus.r_star.z);
        assert!(minus.r_star.max_abs_diff(mirrored) < 1e-10);

        // ρ > 24.74: one real negative eigenvalue plus an unstable spiral pair
        assert_eq!(plus.classification, Classification::Saddle);
        assert!(plus.jacobian_eigenvalues[0].re > 0.0);
        assert!(plus.jacobian_eigenvalues[0].im.abs() > 0.0);

        let origin = newton_fixed_point(&gen, BlochVector::ORIGIN, 1e-12, 5).unwrap();
        assert_eq!(origin.classification, Classification::Saddle);
    }

    #[test]
    fn finds_exactly_three_lorenz_roots() {
        let gen = lor63_generator(&Lor63Params::default());
        let guesses: Vec<BlochVector> = [-0.5, 0.0, 0.5]
            .iter()
            .flat_map(|&x| [-0.5, 0.5].iter().map(move |&z| BlochVector::new(x, x, z)))
            .chain([BlochVector::ORIGIN])
            .collect();
        let found = find_fixed_points(&gen, &guesses, 1e-12, 100);
        assert_eq!(found.len(), 3);
        assert!(found[0].r_star.x < 0.0 && found[2].r_star.x > 0.0);
        assert_eq!(found[1].r_star, BlochVector::ORIGIN);
    }

    #[test]
    fn gp_equilibrium_line_is_degenerate() {
        // x = z = 0 is a line of equilibria; Newton's Jacobian is singular there
        let gen = gp_generator(&GPParams::default());
        let fp = newton_fixed_point(&gen, BlochVector::new(0.01, 0.3, 0.02), 1e-12, 100).unwrap();
        assert!(fp.residual <= 1e-12);
        assert_eq!(fp.classification, Classification::Degenerate);
    }

    #[test]
    fn convergence_failure_carries_best_iterate() {
        let gen = lor63_generator(&Lor63Params::default());
        match newton_fixed_point(&gen, BlochVector::new(0.3, -0.2, 0.9), 1e-12, 1) {
            Err(Error::Convergence { iterations, residual, .. }) => {
                assert_eq!(iterations, 1);
                assert!(residual.is_finite());
            }
            other => panic!("expected convergence error, got {other:?}"),
        }
        assert!(newton_fixed_point(&gen, BlochVector::ORIGIN, 0.0, 1).is_err());
    }
}
