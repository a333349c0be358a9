//! Qubit state representations and scalar observables.
//!
//! A qubit state is carried either as its Bloch vector `r = tr(X σ)` or as
//! the 2×2 density matrix `X = (I + r·σ)/2`. States outside the unit ball are
//! representable; the check functions report them instead of clamping.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance on `|r| - 1` below which a state still counts as physical.
pub const PHYSICAL_TOL: f64 = 1e-9;

/// Tolerance on Hermiticity, trace and imaginary residues of a density matrix.
pub const MATRIX_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub const ORIGIN: BlochVector = BlochVector {
        x: 0.0,
        y: 0.0,
        z: 0.0,
    };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        BlochVector { x, y, z }
    }

    pub fn from_array(a: [f64; 3]) -> Self {
        BlochVector::new(a[0], a[1], a[2])
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }

    pub fn dot(self, other: BlochVector) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn max_abs_diff(self, other: BlochVector) -> f64 {
        (self.x - other.x)
            .abs()
            .max((self.y - other.y).abs())
            .max((self.z - other.z).abs())
    }

    pub fn component(self, axis: crate::generators::Axis) -> f64 {
        use crate::generators::Axis;
        match axis {
            Axis::X => self.x,
            Axis::Y => self.y,
            Axis::Z => self.z,
        }
    }
}

impl Add for BlochVector {
    type Output = BlochVector;
    fn add(self, o: BlochVector) -> BlochVector {
        BlochVector::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for BlochVector {
    type Output = BlochVector;
    fn sub(self, o: BlochVector) -> BlochVector {
        BlochVector::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for BlochVector {
    type Output = BlochVector;
    fn neg(self) -> BlochVector {
        BlochVector::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for BlochVector {
    type Output = BlochVector;
    fn mul(self, s: f64) -> BlochVector {
        BlochVector::new(self.x * s, self.y * s, self.z * s)
    }
}

/// A 2×2 complex matrix meant to hold a qubit density matrix, row-major.
///
/// Construction does not validate; use [`check_state`] or
/// [`bloch_from_density`] to test the physical constraints.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrix {
    pub entries: [[Complex64; 2]; 2],
}

impl DensityMatrix {
    pub fn new(entries: [[Complex64; 2]; 2]) -> Self {
        DensityMatrix { entries }
    }

    pub fn from_real(m: [[f64; 2]; 2]) -> Self {
        let c = |v: f64| Complex64::new(v, 0.0);
        DensityMatrix::new([[c(m[0][0]), c(m[0][1])], [c(m[1][0]), c(m[1][1])]])
    }

    pub fn maximally_mixed() -> Self {
        DensityMatrix::from_real([[0.5, 0.0], [0.0, 0.5]])
    }

    /// Projector `|ψ⟩⟨ψ|` onto a (not necessarily normalized) ket.
    pub fn pure(ket: [Complex64; 2]) -> Self {
        let n2 = ket[0].norm_sqr() + ket[1].norm_sqr();
        let mut e = [[Complex64::new(0.0, 0.0); 2]; 2];
        for (i, row) in e.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v = ket[i] * ket[j].conj() / n2;
            }
        }
        DensityMatrix::new(e)
    }

    pub fn trace(&self) -> Complex64 {
        self.entries[0][0] + self.entries[1][1]
    }

    /// Largest elementwise deviation `|X_ij − conj(X_ji)|`.
    pub fn hermiticity_error(&self) -> f64 {
        let e = &self.entries;
        let mut err: f64 = 0.0;
        for (i, row) in e.iter().enumerate() {
            for (j, v) in row.iter().enumerate() {
                err = err.max((v - e[j][i].conj()).norm());
            }
        }
        err
    }

    pub fn max_entry_diff(&self, other: &DensityMatrix) -> f64 {
        self.entries
            .iter()
            .flatten()
            .zip(other.entries.iter().flatten())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Eigenvalues of the Hermitian part, ascending.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let e = &self.entries;
        let a = e[0][0].re;
        let d = e[1][1].re;
        let b = (e[0][1] + e[1][0].conj()) * 0.5;
        let mean = 0.5 * (a + d);
        let half_gap = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
        [mean - half_gap, mean + half_gap]
    }
}

/// Pauli components `(tr Xσx, tr Xσy, tr Xσz)` with their imaginary residues.
fn pauli_traces(x: &DensityMatrix) -> [Complex64; 3] {
    let e = &x.entries;
    let i = Complex64::new(0.0, 1.0);
    [
        e[0][1] + e[1][0],
        i * (e[0][1] - e[1][0]),
        e[0][0] - e[1][1],
    ]
}

pub fn bloch_from_density(x: &DensityMatrix) -> Result<BlochVector> {
    let herm = x.hermiticity_error();
    if !(herm <= MATRIX_TOL) {
        return Err(Error::Validation(format!(
            "density matrix is not Hermitian (error {herm:e})"
        )));
    }
    let t = pauli_traces(x);
    if let Some(c) = t.iter().find(|c| !(c.im.abs() <= MATRIX_TOL)) {
        return Err(Error::Validation(format!(
            "Pauli trace has imaginary residue {:e}",
            c.im
        )));
    }
    Ok(BlochVector::new(t[0].re, t[1].re, t[2].re))
}

/// `X = (I + r·σ)/2`; the trace is exactly one and the matrix exactly Hermitian.
pub fn density_from_bloch(r: BlochVector) -> DensityMatrix {
    let h = |v: f64| 0.5 * v;
    DensityMatrix::new([
        [
            Complex64::new(0.5 + h(r.z), 0.0),
            Complex64::new(h(r.x), -h(r.y)),
        ],
        [
            Complex64::new(h(r.x), h(r.y)),
            Complex64::new(0.5 - h(r.z), 0.0),
        ],
    ])
}

/// `tr X² = (1 + |r|²)/2`.
pub fn purity(r: BlochVector) -> f64 {
    0.5 * (1.0 + r.dot(r))
}

/// Von Neumann entropy in nats, from the eigenvalues `(1 ± |r|)/2`.
pub fn von_neumann_entropy(r: BlochVector) -> Result<f64> {
    let n = r.norm();
    if !(n <= 1.0 + PHYSICAL_TOL) {
        return Err(Error::Unphysical {
            norm: n,
            tol: PHYSICAL_TOL,
        });
    }
    let n = n.min(1.0);
    let xlnx = |p: f64| if p > 0.0 { p * p.ln() } else { 0.0 };
    Ok(-xlnx(0.5 * (1.0 + n)) - xlnx(0.5 * (1.0 - n)))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateCheckReport {
    pub hermiticity_error: f64,
    pub trace_error: f64,
    pub bloch_norm: f64,
    pub physical: bool,
}

pub fn check_state(x: &DensityMatrix) -> StateCheckReport {
    let hermiticity_error = x.hermiticity_error();
    let trace_error = (x.trace() - Complex64::new(1.0, 0.0)).norm();
    let t = pauli_traces(x);
    let bloch_norm = (t[0].re * t[0].re + t[1].re * t[1].re + t[2].re * t[2].re).sqrt();
    let physical = bloch_norm <= 1.0 + PHYSICAL_TOL
        && trace_error <= MATRIX_TOL
        && hermiticity_error <= MATRIX_TOL;
    StateCheckReport {
        hermiticity_error,
        trace_error,
        bloch_norm,
        physical,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn bloch_of_reference_states() {
        assert_eq!(
            bloch_from_density(&DensityMatrix::maximally_mixed()).unwrap(),
            BlochVector::ORIGIN
        );
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let plus = DensityMatrix::pure([c(s, 0.0), c(s, 0.0)]);
        let r = bloch_from_density(&plus).unwrap();
        assert!(r.max_abs_diff(BlochVector::new(1.0, 0.0, 0.0)) < 1e-15);
        let zero = DensityMatrix::pure([c(1.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(
            bloch_from_density(&zero).unwrap(),
            BlochVector::new(0.0, 0.0, 1.0)
        );
        let plus_i = DensityMatrix::pure([c(s, 0.0), c(0.0, s)]);
        let r = bloch_from_density(&plus_i).unwrap();
        assert!(r.max_abs_diff(BlochVector::new(0.0, 1.0, 0.0)) < 1e-15);
    }

    #[test]
    fn non_hermitian_rejected() {
        let x = DensityMatrix::new([[c(0.5, 0.0), c(0.3, 0.0)], [c(0.0, 0.0), c(0.5, 0.0)]]);
        assert!(matches!(bloch_from_density(&x), Err(Error::Validation(_))));
    }

    #[test]
    fn density_of_reference_vectors() {
        assert_eq!(
            density_from_bloch(BlochVector::ORIGIN),
            DensityMatrix::maximally_mixed()
        );
        assert_eq!(
            density_from_bloch(BlochVector::new(0.0, 0.0, 1.0)),
            DensityMatrix::from_real([[1.0, 0.0], [0.0, 0.0]])
        );
        let x = density_from_bloch(BlochVector::new(1.0, 0.0, 0.0));
        for row in x.entries {
            for v in row {
                assert_eq!(v.re, 0.5);
                assert_eq!(v.im.abs(), 0.0);
            }
        }
    }

    #[test]
    fn purity_values() {
        assert_eq!(purity(BlochVector::new(0.0, 1.0, 0.0)), 1.0);
        assert_eq!(purity(BlochVector::ORIGIN), 0.5);
        assert_eq!(purity(BlochVector::new(0.3, 0.0, 0.4)), 0.625);
    }

    #[test]
    fn entropy_values() {
        let ln2 = std::f64::consts::LN_2;
        assert!((von_neumann_entropy(BlochVector::ORIGIN).unwrap() - ln2).abs() < 1e-15);
        assert_eq!(
            von_neumann_entropy(BlochVector::new(0.0, 0.0, 1.0)).unwrap(),
            0.0
        );
        // eigenvalues 0.75 and 0.25
        let oracle = -(0.75f64 * 0.75f64.ln()) - 0.25 * 0.25f64.ln();
        let s = von_neumann_entropy(BlochVector::new(0.5, 0.0, 0.0)).unwrap();
        assert!((s - oracle).abs() < 1e-15);
        assert!((s - 0.562335).abs() < 1e-6);
        // just inside the tolerance is clamped to a pure state
        assert_eq!(
            von_neumann_entropy(BlochVector::new(1.0 + 1e-10, 0.0, 0.0)).unwrap(),
            0.0
        );
        assert!(matches!(
            von_neumann_entropy(BlochVector::new(1.0 + 1e-6, 0.0, 0.0)),
            Err(Error::Unphysical { .. })
        ));
    }

    #[test]
    fn check_state_reports() {
        let rep = check_state(&DensityMatrix::maximally_mixed());
        assert!(rep.physical);
        assert_eq!(rep.hermiticity_error, 0.0);
        assert_eq!(rep.trace_error, 0.0);
        assert_eq!(rep.bloch_norm, 0.0);

        let rep = check_state(&DensityMatrix::from_real([[1.5, 0.0], [0.0, -0.5]]));
        assert!(!rep.physical);
        assert_eq!(rep.trace_error, 0.0);
        assert_eq!(DensityMatrix::from_real([[1.5, 0.0], [0.0, -0.5]]).eigenvalues(), [-0.5, 1.5]);

        let rep = check_state(&density_from_bloch(BlochVector::new(0.2, 0.1, -0.3)));
        assert!(rep.physical);
        assert!((rep.bloch_norm - 0.14f64.sqrt()).abs() < 1e-15);
        assert!((rep.bloch_norm - 0.374166).abs() < 1e-6);
    }

    fn ball_point() -> impl Strategy<Value = BlochVector> {
        (-1.0f64..1.0, -1.0f64..1.0, -1.0f64..1.0)
            .prop_filter("inside unit ball", |(x, y, z)| x * x + y * y + z * z <= 1.0)
            .prop_map(|(x, y, z)| BlochVector::new(x, y, z))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn round_trip_through_density(r in ball_point()) {
            let x = density_from_bloch(r);
            prop_assert_eq!(x.trace(), Complex64::new(1.0, 0.0));
            prop_assert!(x.hermiticity_error() <= 1e-16);
            let back = bloch_from_density(&x).unwrap();
            prop_assert!(back.max_abs_diff(r) <= 1e-14);
            let ev = x.eigenvalues();
            prop_assert!(ev[0] >= -MATRIX_TOL);
        }
    }

    #[test]
    fn entropy_and_purity_are_monotone_in_norm() {
        let mut norms: Vec<f64> = (0..200).map(|k| (k as f64 * 0.618034) % 1.0).collect();
        norms.sort_by(|a, b| a.partial_cmp(b).unwrap());
        norms.dedup();
        let pts: Vec<(f64, f64)> = norms
            .iter()
            .map(|&n| {
                let r = BlochVector::new(0.0, n, 0.0);
                (von_neumann_entropy(r).unwrap(), purity(r))
            })
            .collect();
        for w in pts.windows(2) {
            assert!(w[1].0 < w[0].0);
            assert!(w[1].1 > w[0].1);
        }
    }
}
