//! Sine eigenbasis of the hinged beam operator on `[0, L]`.
//!
//! With hinged (simply supported) ends `u = u_xx = 0`, the Dirichlet
//! Laplacian and the bi-Laplacian `A = Δ²` share the eigenfunctions
//! `ω_j(x) = sqrt(2/L) sin(jπx/L)`, with eigenvalues `μ_j = (jπ/L)²` for
//! `−Δ` and `λ_j = μ_j²` for `A`. Every fractional power `A^s` is therefore
//! diagonal in modal coordinates.
//!
//! Physical-space work (nonlinear source terms, `L^p` norms) happens on
//! `P = 4(m+1)` equispaced interior nodes `x_k = kL/(P+1)`. The trapezoid
//! rule on that grid integrates `cos(nπx/L)` exactly for `n < 2(P+1)`, which
//! covers any product of four modes of index `≤ m`; cubic source terms are
//! therefore projected without aliasing.

use std::f64::consts::PI;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use crate::error::{BeamError, Result};

/// Coefficients of a field in the orthonormal eigenbasis.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ModalVector(Vec<f64>);

impl ModalVector {
    pub fn zeros(m: usize) -> Self {
        Self(vec![0.0; m])
    }

    /// Unit vector `e_k` (1-based mode index).
    pub fn unit(m: usize, k: usize) -> Self {
        let mut y = Self::zeros(m);
        if (1..=m).contains(&k) {
            y.0[k - 1] = 1.0;
        }
        y
    }

    pub fn from_vec(v: Vec<f64>) -> Self {
        Self(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, f64> {
        self.0.iter()
    }

    pub fn dot(&self, other: &Self) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    /// Euclidean norm of the coefficient vector (the `L²` norm of the field).
    pub fn l2(&self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self(self.0.iter().map(|x| c * x).collect())
    }

    /// `self + c * other`
    pub fn axpy(&self, c: f64, other: &Self) -> Self {
        Self(self.0.iter().zip(&other.0).map(|(a, b)| a + c * b).collect())
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    /// 1-based index of the first non-finite coefficient.
    pub fn first_non_finite(&self) -> Option<usize> {
        self.0.iter().position(|x| !x.is_finite()).map(|i| i + 1)
    }
}

impl Index<usize> for ModalVector {
    type Output = f64;
    fn index(&self, i: usize) -> &f64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for ModalVector {
    fn index_mut(&mut self, i: usize) -> &mut f64 {
        &mut self.0[i]
    }
}

impl Add for &ModalVector {
    type Output = ModalVector;
    fn add(self, rhs: Self) -> ModalVector {
        self.axpy(1.0, rhs)
    }
}

impl Sub for &ModalVector {
    type Output = ModalVector;
    fn sub(self, rhs: Self) -> ModalVector {
        self.axpy(-1.0, rhs)
    }
}

impl Mul<&ModalVector> for f64 {
    type Output = ModalVector;
    fn mul(self, rhs: &ModalVector) -> ModalVector {
        rhs.scaled(self)
    }
}

impl From<Vec<f64>> for ModalVector {
    fn from(v: Vec<f64>) -> Self {
        Self(v)
    }
}

/// Hinged-beam eigenbasis with its quadrature grid and transform matrices.
#[derive(Debug, Clone)]
pub struct SpectralBasis {
    length: f64,
    mu: Vec<f64>,
    lambda: Vec<f64>,
    nodes: Vec<f64>,
    weight: f64,
    // P x m, row k holds ω_j(x_k)
    synth: Vec<f64>,
    // m x P, row j holds weight * ω_j(x_k)
    analysis: Vec<f64>,
}

impl SpectralBasis {
    pub fn new(length: f64, modes: usize) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return Err(BeamError::invalid(format!(
                "domain length must be positive and finite, got {length}"
            )));
        }
        if modes == 0 {
            return Err(BeamError::invalid("mode count must be at least 1"));
        }
        let mu: Vec<f64> = (1..=modes)
            .map(|j| {
                let k = j as f64 * PI / length;
                k * k
            })
            .collect();
        let lambda: Vec<f64> = mu.iter().map(|m| m * m).collect();

        let p = 4 * (modes + 1);
        let q = (p + 1) as f64;
        let nodes: Vec<f64> = (1..=p).map(|k| k as f64 * length / q).collect();
        let weight = length / q;
        let amp = (2.0 / length).sqrt();

        let mut synth = vec![0.0; p * modes];
        let mut analysis = vec![0.0; modes * p];
        for k in 1..=p {
            for j in 1..=modes {
                // sin(jkπ/q) with the product reduced mod 2q keeps the argument small
                let phase = ((j * k) % (2 * (p + 1))) as f64 * PI / q;
                let val = amp * phase.sin();
                synth[(k - 1) * modes + (j - 1)] = val;
                analysis[(j - 1) * p + (k - 1)] = weight * val;
            }
        }
        Ok(Self {
            length,
            mu,
            lambda,
            nodes,
            weight,
            synth,
            analysis,
        })
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn modes(&self) -> usize {
        self.mu.len()
    }

    /// Eigenvalues of `−Δ`.
    pub fn mu(&self) -> &[f64] {
        &self.mu
    }

    /// Eigenvalues of `A = Δ²`.
    pub fn lambda(&self) -> &[f64] {
        &self.lambda
    }

    pub fn lambda1(&self) -> f64 {
        self.lambda[0]
    }

    pub fn lambda_max(&self) -> f64 {
        self.lambda[self.lambda.len() - 1]
    }

    /// Interior quadrature nodes.
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn grid_len(&self) -> usize {
        self.nodes.len()
    }

    /// Trapezoid weight of every interior node.
    pub fn quadrature_weight(&self) -> f64 {
        self.weight
    }

    /// `λ_j^s` for every mode.
    pub fn lambda_pow(&self, s: f64) -> Vec<f64> {
        self.lambda.iter().map(|l| l.powf(s)).collect()
    }

    pub fn check(&self, y: &ModalVector) -> Result<()> {
        if y.len() != self.modes() {
            return Err(BeamError::DimensionMismatch {
                expected: self.modes(),
                found: y.len(),
            });
        }
        Ok(())
    }

    /// `A^s y`.
    pub fn apply_fractional_power(&self, s: f64, y: &ModalVector) -> Result<ModalVector> {
        self.check(y)?;
        Ok(ModalVector(
            self.lambda
                .iter()
                .zip(y.iter())
                .map(|(l, v)| l.powf(s) * v)
                .collect(),
        ))
    }

    /// `‖A^s y‖₂`.
    pub fn norm_ds(&self, s: f64, y: &ModalVector) -> Result<f64> {
        self.check(y)?;
        Ok(self.norm_ds_sq_unchecked(s, y).sqrt())
    }

    pub(crate) fn norm_ds_sq_unchecked(&self, s: f64, y: &ModalVector) -> f64 {
        let e = 2.0 * s;
        self.lambda
            .iter()
            .zip(y.iter())
            .map(|(l, v)| l.powf(e) * v * v)
            .sum()
    }

    /// Field values at arbitrary points of `[0, L]`.
    pub fn evaluate_field(&self, y: &ModalVector, points: &[f64]) -> Result<Vec<f64>> {
        self.check(y)?;
        let amp = (2.0 / self.length).sqrt();
        points
            .iter()
            .map(|&x| {
                if !(0.0..=self.length).contains(&x) {
                    return Err(BeamError::OutOfDomain {
                        x,
                        length: self.length,
                    });
                }
                Ok(y.iter()
                    .enumerate()
                    .map(|(i, c)| c * amp * ((i + 1) as f64 * PI * x / self.length).sin())
                    .sum())
            })
            .collect()
    }

    /// Field values on the quadrature grid.
    pub fn to_grid(&self, y: &ModalVector) -> Result<Vec<f64>> {
        self.check(y)?;
        Ok(self.to_grid_unchecked(y))
    }

    pub(crate) fn to_grid_unchecked(&self, y: &ModalVector) -> Vec<f64> {
        let m = self.modes();
        let coeffs = y.as_slice();
        self.synth
            .chunks_exact(m)
            .map(|row| row.iter().zip(coeffs).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Discrete `(g, ω_j)` inner products from grid samples of `g`.
    pub fn project_function(&self, values: &[f64]) -> Result<ModalVector> {
        if values.len() != self.grid_len() {
            return Err(BeamError::DimensionMismatch {
                expected: self.grid_len(),
                found: values.len(),
            });
        }
        Ok(self.project_unchecked(values))
    }

    pub(crate) fn project_unchecked(&self, values: &[f64]) -> ModalVector {
        let p = self.grid_len();
        ModalVector(
            self.analysis
                .chunks_exact(p)
                .map(|row| row.iter().zip(values).map(|(a, b)| a * b).sum())
                .collect(),
        )
    }

    /// Grid quadrature of `∫ g dx` from samples on the interior nodes.
    pub fn integrate_grid(&self, values: &[f64]) -> f64 {
        self.weight * values.iter().sum::<f64>()
    }

    pub(crate) fn weight_sum(&self, values: impl Iterator<Item = f64>) -> f64 {
        self.weight * values.sum::<f64>()
    }

    /// `‖g‖_{L^q}` by grid quadrature.
    pub fn lq_norm_grid(&self, values: &[f64], q: f64) -> f64 {
        let s: f64 = values.iter().map(|v| v.abs().powf(q)).sum();
        (self.weight * s).powf(1.0 / q)
    }

    /// `m × m` matrix of `ω ↦ project(d · evaluate(ω))` for grid multipliers `d`
    /// (row-major); the Galerkin Jacobian of a pointwise nonlinearity.
    pub(crate) fn sandwich(&self, diag: &[f64]) -> Vec<f64> {
        let m = self.modes();
        let p = self.grid_len();
        let mut out = vec![0.0; m * m];
        for i in 0..m {
            let row = &self.analysis[i * p..(i + 1) * p];
            for k in 0..p {
                let w = row[k] * diag[k];
                if w == 0.0 {
                    continue;
                }
                let e = &self.synth[k * m..(k + 1) * m];
                for j in 0..m {
                    out[i * m + j] += w * e[j];
                }
            }
        }
        out
    }

    /// Discrete Gram matrix of the basis on the quadrature grid (row-major).
    pub fn gram(&self) -> Vec<f64> {
        let m = self.modes();
        let p = self.grid_len();
        let mut g = vec![0.0; m * m];
        for i in 0..m {
            for j in 0..m {
                g[i * m + j] = (0..p)
                    .map(|k| self.analysis[i * p + k] * self.synth[k * m + j])
                    .sum();
            }
        }
        g
    }
}
