//! Diagonal phase-space norms `‖(y, v)‖² = Σ a_j y_j² + Σ b_j v_j²`.
//!
//! Every norm the toolkit measures in is diagonal in modal coordinates:
//! the `α`-weighted phase norm, its `α`-free version, and the weak
//! `ℋ^{−s}` norms.

use crate::model::{ModelConfig, State};
use crate::spectral::SpectralBasis;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakNormSpec {
    s: f64,
}

impl WeakNormSpec {
    /// Weakening exponent `s ∈ (0, 1]`.
    pub fn new(s: f64) -> crate::Result<Self> {
        if !(s > 0.0 && s <= 1.0) {
            return Err(crate::BeamError::invalid(format!(
                "weak norm exponent must satisfy 0 < s ≤ 1, got {s}"
            )));
        }
        Ok(Self { s })
    }

    pub fn s(&self) -> f64 {
        self.s
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalNorm {
    pub y_weight: Vec<f64>,
    pub v_weight: Vec<f64>,
}

impl DiagonalNorm {
    /// `‖A^{1/2}u‖² + ‖v‖² + α‖A^{θ/4}v‖²`.
    pub fn phase(config: &ModelConfig) -> Self {
        Self {
            y_weight: config.basis().lambda().to_vec(),
            v_weight: config.mass().to_vec(),
        }
    }

    /// The `α`-independent norm `‖A^{1/2}u‖² + ‖v‖²`.
    pub fn phase_alpha_free(basis: &SpectralBasis) -> Self {
        Self {
            y_weight: basis.lambda().to_vec(),
            v_weight: vec![1.0; basis.modes()],
        }
    }

    /// `‖A^{(1−s)/2}u‖² + ‖A^{−s/2}v‖² + α‖A^{θ/4−s/2}v‖²`.
    pub fn weak(config: &ModelConfig, spec: WeakNormSpec) -> Self {
        let s = spec.s();
        let b = config.basis();
        let (a, th) = (config.alpha(), config.theta());
        Self {
            y_weight: b.lambda().iter().map(|l| l.powf(1.0 - s)).collect(),
            v_weight: b
                .lambda()
                .iter()
                .map(|l| l.powf(-s) + a * l.powf(th / 2.0 - s))
                .collect(),
        }
    }

    pub fn norm_sq(&self, state: &State) -> f64 {
        let mut acc = 0.0;
        for j in 0..self.y_weight.len() {
            acc += self.y_weight[j] * state.y[j] * state.y[j] + self.v_weight[j] * state.v[j] * state.v[j];
        }
        acc
    }

    pub fn norm(&self, state: &State) -> f64 {
        self.norm_sq(state).sqrt()
    }

    pub fn distance_sq(&self, a: &State, b: &State) -> f64 {
        let mut acc = 0.0;
        for j in 0..self.y_weight.len() {
            let dy = a.y[j] - b.y[j];
            let dv = a.v[j] - b.v[j];
            acc += self.y_weight[j] * dy * dy + self.v_weight[j] * dv * dv;
        }
        acc
    }

    pub fn distance(&self, a: &State, b: &State) -> f64 {
        self.distance_sq(a, b).sqrt()
    }
}
