//! Galerkin form of the extensible beam with fractional rotational inertia:
//!
//! ```text
//! (1 + α λ_j^{θ/2}) ÿ_j + λ_j y_j + M(S) λ_j^{1/2} y_j + N(S) λ_j^{θ'/2} ẏ_j + (f(u), ω_j) = h_j
//! ```
//!
//! with the nonlocal argument `S = ‖A^{1/4}u‖² = Σ μ_j y_j²`.

mod constitutive;
mod hypotheses;

use std::sync::Arc;

pub use constitutive::{
    Affine, ConstitutiveFunctions, HypothesisConstants, OddCubic, INSTANCE_NAMES,
};
pub use hypotheses::{HypothesisCheck, HypothesisReport, Violation};

use crate::error::{BeamError, Result};
use crate::spectral::{ModalVector, SpectralBasis};

/// Phase-space point `(u, u_t)` in modal coordinates at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub y: ModalVector,
    pub v: ModalVector,
    pub t: f64,
}

impl State {
    pub fn new(y: ModalVector, v: ModalVector, t: f64) -> Self {
        Self { y, v, t }
    }

    pub fn zero(m: usize) -> Self {
        Self::new(ModalVector::zeros(m), ModalVector::zeros(m), 0.0)
    }

    /// Displacement `y` at rest.
    pub fn at_rest(y: ModalVector) -> Self {
        let m = y.len();
        Self::new(y, ModalVector::zeros(m), 0.0)
    }

    pub fn is_finite(&self) -> bool {
        self.y.is_finite() && self.v.is_finite()
    }

    /// Difference `(yA − yB, vA − vB)`, stamped with `self.t`.
    pub fn difference(&self, other: &State) -> State {
        State::new(&self.y - &other.y, &self.v - &other.v, self.t)
    }
}

/// Immutable model: parameters, basis, constitutive laws, and forcing.
#[derive(Debug, Clone)]
pub struct ModelConfig {
    alpha: f64,
    theta: f64,
    theta_prime: f64,
    basis: Arc<SpectralBasis>,
    constitutive: ConstitutiveFunctions,
    forcing: ModalVector,
    // per-mode caches
    mass: Vec<f64>,
    inertia_weight: Vec<f64>,
    damping_weight: Vec<f64>,
}

impl ModelConfig {
    pub fn new(
        alpha: f64,
        theta: f64,
        theta_prime: f64,
        basis: Arc<SpectralBasis>,
        constitutive: ConstitutiveFunctions,
        forcing: ModalVector,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(BeamError::invalid(format!(
                "alpha = {alpha} violates 0 ≤ α ≤ 1"
            )));
        }
        if !(0.0..=1.0).contains(&theta)
            || !(0.0..=1.0).contains(&theta_prime)
            || theta > theta_prime
        {
            return Err(BeamError::invalid(format!(
                "theta = {theta}, theta_prime = {theta_prime} violate 0 ≤ θ ≤ θ' ≤ 1"
            )));
        }
        basis.check(&forcing)?;
        if !forcing.is_finite() {
            return Err(BeamError::invalid("forcing has non-finite coefficients"));
        }
        let inertia_weight = basis.lambda_pow(theta / 2.0);
        let damping_weight = basis.lambda_pow(theta_prime / 2.0);
        let mass = inertia_weight.iter().map(|w| 1.0 + alpha * w).collect();
        Ok(Self {
            alpha,
            theta,
            theta_prime,
            basis,
            constitutive,
            forcing,
            mass,
            inertia_weight,
            damping_weight,
        })
    }

    /// Unforced model.
    pub fn unforced(
        alpha: f64,
        theta: f64,
        theta_prime: f64,
        basis: Arc<SpectralBasis>,
        constitutive: ConstitutiveFunctions,
    ) -> Result<Self> {
        let m = basis.modes();
        Self::new(alpha, theta, theta_prime, basis, constitutive, ModalVector::zeros(m))
    }

    /// Same model with a different rotational-inertia strength.
    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        Self::new(
            alpha,
            self.theta,
            self.theta_prime,
            self.basis.clone(),
            self.constitutive,
            self.forcing.clone(),
        )
    }

    pub fn with_forcing(&self, forcing: ModalVector) -> Result<Self> {
        Self::new(
            self.alpha,
            self.theta,
            self.theta_prime,
            self.basis.clone(),
            self.constitutive,
            forcing,
        )
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn theta_prime(&self) -> f64 {
        self.theta_prime
    }

    pub fn basis(&self) -> &SpectralBasis {
        &self.basis
    }

    pub fn basis_arc(&self) -> &Arc<SpectralBasis> {
        &self.basis
    }

    pub fn modes(&self) -> usize {
        self.basis.modes()
    }

    pub fn constitutive(&self) -> &ConstitutiveFunctions {
        &self.constitutive
    }

    pub fn forcing(&self) -> &ModalVector {
        &self.forcing
    }

    /// Modal mass `1 + α λ_j^{θ/2}` (always `≥ 1`).
    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    /// `λ_j^{θ/2}`
    pub fn inertia_weight(&self) -> &[f64] {
        &self.inertia_weight
    }

    /// `λ_j^{θ'/2}`
    pub fn damping_weight(&self) -> &[f64] {
        &self.damping_weight
    }

    pub fn check_state(&self, state: &State) -> Result<()> {
        self.basis.check(&state.y)?;
        self.basis.check(&state.v)
    }

    /// `S = ‖A^{1/4}u‖² = Σ μ_j y_j²`, the argument of `M` and `N`.
    pub fn bulge(&self, y: &ModalVector) -> f64 {
        self.basis
            .mu()
            .iter()
            .zip(y.iter())
            .map(|(mu, c)| mu * c * c)
            .sum()
    }

    /// Modal coefficients `(f(u), ω_j)` computed on the de-aliased grid.
    pub fn nonlinear_force(&self, y: &ModalVector) -> Result<ModalVector> {
        self.basis.check(y)?;
        let out = self.source_modes(y);
        if let Some(mode) = out.first_non_finite() {
            return Err(BeamError::Divergence {
                mode,
                time: f64::NAN,
            });
        }
        Ok(out)
    }

    pub(crate) fn source_modes(&self, y: &ModalVector) -> ModalVector {
        let f = self.constitutive.source;
        if f.is_zero() {
            return ModalVector::zeros(self.modes());
        }
        if f.cubic == 0.0 {
            // projection of a linear map is exact
            return y.scaled(f.linear);
        }
        let mut grid = self.basis.to_grid_unchecked(y);
        for u in grid.iter_mut() {
            *u = f.value(*u);
        }
        self.basis.project_unchecked(&grid)
    }

    /// Force balance without inertia: `h − A y − M(S) A^{1/2} y − N(S) A^{θ'/2} v − F(y)`.
    pub fn acceleration_numerator(&self, state: &State) -> ModalVector {
        let s = self.bulge(&state.y);
        let tension = self.constitutive.tension.value(s);
        let damping = self.constitutive.damping.value(s);
        let force = self.source_modes(&state.y);
        let b = &*self.basis;
        let out: Vec<f64> = (0..self.modes())
            .map(|j| {
                self.forcing[j]
                    - b.lambda()[j] * state.y[j]
                    - tension * b.mu()[j] * state.y[j]
                    - damping * self.damping_weight[j] * state.v[j]
                    - force[j]
            })
            .collect();
        ModalVector::from_vec(out)
    }

    /// `ÿ` from the Galerkin system: numerator divided by the modal mass.
    pub fn acceleration(&self, state: &State) -> ModalVector {
        let mut a = self.acceleration_numerator(state);
        for (aj, mj) in a.as_mut_slice().iter_mut().zip(&self.mass) {
            *aj /= mj;
        }
        a
    }

    /// Stationary residual `G(y) = A y + M(S) A^{1/2} y + F(y) − h`.
    pub fn stationary_residual(&self, y: &ModalVector) -> Result<ModalVector> {
        self.basis.check(y)?;
        Ok(self.stationary_residual_unchecked(y))
    }

    pub(crate) fn stationary_residual_unchecked(&self, y: &ModalVector) -> ModalVector {
        let s = self.bulge(y);
        let tension = self.constitutive.tension.value(s);
        let force = self.source_modes(y);
        let b = &*self.basis;
        ModalVector::from_vec(
            (0..self.modes())
                .map(|j| {
                    b.lambda()[j] * y[j] + tension * b.mu()[j] * y[j] + force[j] - self.forcing[j]
                })
                .collect(),
        )
    }

    /// Sample the hypotheses on `τ ∈ [0, tau_max]` and `u ∈ [−u_max, u_max]`.
    pub fn verify_hypotheses(
        &self,
        tau_max: f64,
        u_max: f64,
        samples: usize,
    ) -> Result<HypothesisReport> {
        hypotheses::verify(self, tau_max, u_max, samples)
    }
}
