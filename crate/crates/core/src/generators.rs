//! Nonlinear Bloch-ball generators `G(r) = L + g (e·r) J_a`.
//!
//! A generator is a linear 3×3 part `L` plus a torsion term: an SO(3)
//! rotation generator `J_a` whose rate is the projection of the Bloch vector
//! on a unit axis `e`. The Bloch vector then evolves as `dr/dt = G(r) r`.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::state::BlochVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub fn unit(self) -> BlochVector {
        match self {
            Axis::X => BlochVector::new(1.0, 0.0, 0.0),
            Axis::Y => BlochVector::new(0.0, 1.0, 0.0),
            Axis::Z => BlochVector::new(0.0, 0.0, 1.0),
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl std::str::FromStr for Axis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "x" => Ok(Axis::X),
            "y" => Ok(Axis::Y),
            "z" => Ok(Axis::Z),
            _ => Err(Error::Validation(format!("unknown axis `{s}`"))),
        }
    }
}

/// Real 3×3 matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Mat3(pub [[f64; 3]; 3]);

impl Mat3 {
    pub const ZERO: Mat3 = Mat3([[0.0; 3]; 3]);

    pub fn identity() -> Mat3 {
        Mat3::diag([1.0, 1.0, 1.0])
    }

    pub fn diag(d: [f64; 3]) -> Mat3 {
        let mut m = Mat3::ZERO;
        for (i, v) in d.into_iter().enumerate() {
            m.0[i][i] = v;
        }
        m
    }

    pub fn transpose(&self) -> Mat3 {
        let mut t = Mat3::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                t.0[i][j] = self.0[j][i];
            }
        }
        t
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1] + self.0[2][2]
    }

    pub fn symmetric_part(&self) -> Mat3 {
        (*self + self.transpose()) * 0.5
    }

    pub fn antisymmetric_part(&self) -> Mat3 {
        (*self - self.transpose()) * 0.5
    }

    pub fn mul_vec(&self, v: BlochVector) -> BlochVector {
        let row = |i: usize| self.0[i][0] * v.x + self.0[i][1] * v.y + self.0[i][2] * v.z;
        BlochVector::new(row(0), row(1), row(2))
    }

    /// Outer product `a bᵀ`.
    pub fn outer(a: BlochVector, b: BlochVector) -> Mat3 {
        let a = a.to_array();
        let b = b.to_array();
        let mut m = Mat3::ZERO;
        for i in 0..3 {
            for j in 0..3 {
                m.0[i][j] = a[i] * b[j];
            }
        }
        m
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|v| v.is_finite())
    }

    pub fn max_abs_diff(&self, other: &Mat3) -> f64 {
        self.0
            .iter()
            .flatten()
            .zip(other.0.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn to_nalgebra(&self) -> nalgebra::Matrix3<f64> {
        nalgebra::Matrix3::from_fn(|i, j| self.0[i][j])
    }

    /// Eigenvalues, sorted by descending real part then descending imaginary part.
    pub fn eigenvalues(&self) -> [Complex64; 3] {
        let ev = self
            .to_nalgebra()
            .complex_eigenvalues()
            .map(|c| Complex64::new(c.re, c.im));
        let mut ev = [ev[0], ev[1], ev[2]];
        ev.sort_by(|a, b| {
            b.re.partial_cmp(&a.re)
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(b.im.partial_cmp(&a.im).unwrap_or(std::cmp::Ordering::Equal))
        });
        ev
    }
}

impl Add for Mat3 {
    type Output = Mat3;
    fn add(mut self, o: Mat3) -> Mat3 {
        for i in 0..3 {
            for j in 0..3 {
                self.0[i][j] += o.0[i][j];
            }
        }
        self
    }
}

impl Sub for Mat3 {
    type Output = Mat3;
    fn sub(mut self, o: Mat3) -> Mat3 {
        for i in 0..3 {
            for j in 0..3 {
                self.0[i][j] -= o.0[i][j];
            }
        }
        self
    }
}

impl Mul<f64> for Mat3 {
    type Output = Mat3;
    fn mul(mut self, s: f64) -> Mat3 {
        self.0.iter_mut().flatten().for_each(|v| *v *= s);
        self
    }
}

/// SO(3) generator with `(J_a)_{bc} = −ε_{abc}`.
pub fn so3_generator(axis: Axis) -> Mat3 {
    let a = axis.index();
    let mut m = Mat3::ZERO;
    for b in 0..3 {
        for c in 0..3 {
            m.0[b][c] = -levi_civita(a, b, c);
        }
    }
    m
}

fn levi_civita(a: usize, b: usize, c: usize) -> f64 {
    match (a, b, c) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

/// The two symmetric Gell-Mann matrices used by the models.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GellMann {
    /// Couples x and y.
    Lambda1,
    /// Couples x and z.
    Lambda4,
}

pub fn gell_mann(which: GellMann) -> Mat3 {
    let (i, j) = match which {
        GellMann::Lambda1 => (0, 1),
        GellMann::Lambda4 => (0, 2),
    };
    let mut m = Mat3::ZERO;
    m.0[i][j] = 1.0;
    m.0[j][i] = 1.0;
    m
}

/// Lorenz-63 parameters with the torsion strength `g` that shrinks the
/// attractor into the Bloch ball.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Lor63Params {
    pub rho: f64,
    pub sigma: f64,
    pub beta: f64,
    pub g: f64,
}

impl Default for Lor63Params {
    fn default() -> Self {
        Lor63Params {
            rho: 28.0,
            sigma: 10.0,
            beta: 8.0 / 3.0,
            g: 80.0,
        }
    }
}

impl Lor63Params {
    /// Warnings for parameters outside the canonical chaotic regime. Sweeps
    /// are allowed to go there, so these are never errors.
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        for (name, v) in [("sigma", self.sigma), ("beta", self.beta), ("g", self.g)] {
            if !(v > 0.0) {
                w.push(format!("{name} = {v} is outside the canonical regime ({name} > 0)"));
            }
        }
        if !self.rho.is_finite() {
            w.push(format!("rho = {} is not finite", self.rho));
        }
        w
    }

    /// `D = diag(σ, 1, β)`.
    pub fn damping(&self) -> Mat3 {
        Mat3::diag([self.sigma, 1.0, self.beta])
    }

    /// Symmetric part `((ρ+σ)/2) λ₁ − D`.
    pub fn symmetric_part(&self) -> Mat3 {
        gell_mann(GellMann::Lambda1) * (0.5 * (self.rho + self.sigma)) - self.damping()
    }

    /// Antisymmetric part `((ρ−σ)/2) J_z`.
    pub fn antisymmetric_part(&self) -> Mat3 {
        so3_generator(Axis::Z) * (0.5 * (self.rho - self.sigma))
    }

    /// Radius `√(β(ρ−1))/g` of the nontrivial fixed points in x and y.
    pub fn fixed_point_radius(&self) -> f64 {
        (self.beta * (self.rho - 1.0)).sqrt() / self.g
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GPParams {
    pub m: f64,
    pub g: f64,
}

impl Default for GPParams {
    fn default() -> Self {
        GPParams { m: 10.0, g: 40.0 }
    }
}

impl GPParams {
    pub fn warnings(&self) -> Vec<String> {
        let mut w = Vec::new();
        if !self.m.is_finite() || !self.g.is_finite() {
            w.push(format!("non-finite parameters m = {}, g = {}", self.m, self.g));
        }
        w
    }
}

/// `G(r) = L + g (e·r) J_twist`, stored by its parts so that Jacobians and
/// serialization stay exact.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TorsionGenerator {
    pub linear: Mat3,
    pub g: f64,
    pub twist_axis: Axis,
    pub projection_axis: BlochVector,
}

impl TorsionGenerator {
    /// `G(r)`.
    pub fn evaluate(&self, r: BlochVector) -> Mat3 {
        self.linear + so3_generator(self.twist_axis) * (self.g * self.projection_axis.dot(r))
    }

    /// `G(r) r`.
    pub fn vector_field(&self, r: BlochVector) -> BlochVector {
        self.evaluate(r).mul_vec(r)
    }

    /// Derivative of `r ↦ G(r) r`: `L + g (e·r) J + g (J r) eᵀ`.
    pub fn jacobian(&self, r: BlochVector) -> Mat3 {
        let j = so3_generator(self.twist_axis);
        self.linear
            + j * (self.g * self.projection_axis.dot(r))
            + Mat3::outer(j.mul_vec(r) * self.g, self.projection_axis)
    }

    /// The same generator with a different torsion strength.
    pub fn with_torsion(&self, g: f64) -> TorsionGenerator {
        TorsionGenerator { g, ..*self }
    }
}

/// Free-function form of [`TorsionGenerator::vector_field`].
pub fn vector_field(gen: &TorsionGenerator, r: BlochVector) -> BlochVector {
    gen.vector_field(r)
}

/// Free-function form of [`TorsionGenerator::jacobian`].
pub fn jacobian(gen: &TorsionGenerator, r: BlochVector) -> Mat3 {
    gen.jacobian(r)
}

/// Lorenz-63 qubit: `L = [[−σ, σ, 0], [ρ, −1, 0], [0, 0, −β]]` with x-axis torsion.
pub fn lor63_generator(p: &Lor63Params) -> TorsionGenerator {
    TorsionGenerator {
        linear: Mat3([
            [-p.sigma, p.sigma, 0.0],
            [p.rho, -1.0, 0.0],
            [0.0, 0.0, -p.beta],
        ]),
        g: p.g,
        twist_axis: Axis::X,
        projection_axis: Axis::X.unit(),
    }
}

/// GP butterfly: `G(r) = m λ₄ + g z J_z`.
pub fn gp_generator(p: &GPParams) -> TorsionGenerator {
    TorsionGenerator {
        linear: gell_mann(GellMann::Lambda4) * p.m,
        g: p.g,
        twist_axis: Axis::Z,
        projection_axis: Axis::Z.unit(),
    }
}

pub fn custom_generator(
    linear: Mat3,
    projection_axis: BlochVector,
    g: f64,
    twist_axis: Axis,
) -> Result<TorsionGenerator> {
    if !linear.is_finite() || !g.is_finite() || !projection_axis.is_finite() {
        return Err(Error::Validation(
            "generator entries must be finite".to_string(),
        ));
    }
    let n = projection_axis.norm();
    if !((n - 1.0).abs() <= 1e-12) {
        return Err(Error::Validation(format!(
            "projection axis must be a unit vector (|e| = {n})"
        )));
    }
    Ok(TorsionGenerator {
        linear,
        g,
        twist_axis,
        projection_axis,
    })
}
