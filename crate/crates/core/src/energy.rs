//! Energy functionals, the energy balance of a record, the perturbed energy,
//! exponential decay fits, and the second (differentiated) energy.

use crate::error::{BeamError, Result};
use crate::integrator::{second_time_derivative, TrajectoryRecord};
use crate::model::{ModelConfig, State};

/// `E = ½(‖A^{1/2}u‖² + ‖u_t‖² + α‖A^{θ/4}u_t‖² + M̃(S)) + ∫(f̃(u) − hu) dx`.
pub fn energy(config: &ModelConfig, state: &State) -> f64 {
    let b = config.basis();
    let c = config.constitutive();
    let mut quad = 0.0;
    for j in 0..config.modes() {
        quad += b.lambda()[j] * state.y[j] * state.y[j] + config.mass()[j] * state.v[j] * state.v[j];
    }
    let s = config.bulge(&state.y);
    let source = if c.source.is_zero() {
        0.0
    } else if c.source.cubic == 0.0 {
        0.5 * c.source.linear * state.y.dot(&state.y)
    } else {
        let grid = b.to_grid_unchecked(&state.y);
        b.weight_sum(grid.iter().map(|u| c.source.antiderivative(*u)))
    };
    0.5 * (quad + c.tension.antiderivative(s)) + source - config.forcing().dot(&state.y)
}

/// `dE/dt = −N(S)‖A^{θ'/4}v‖²` along exact dynamics.
pub fn dissipation_rate(config: &ModelConfig, state: &State) -> f64 {
    let s = config.bulge(&state.y);
    let n = config.constitutive().damping.value(s);
    let w: f64 = config
        .damping_weight()
        .iter()
        .zip(state.v.iter())
        .map(|(w, v)| w * v * v)
        .sum();
    -n * w
}

/// `‖(u, v)‖²_{ℋ_{α,θ}} = ‖A^{1/2}u‖² + ‖v‖² + α‖A^{θ/4}v‖²`.
pub fn phase_norm_sq(config: &ModelConfig, state: &State) -> f64 {
    let b = config.basis();
    (0..config.modes())
        .map(|j| b.lambda()[j] * state.y[j] * state.y[j] + config.mass()[j] * state.v[j] * state.v[j])
        .sum()
}

/// `max_t |E(t) + ∫₀ᵗ N‖A^{θ'/4}u_t‖² ds − E(0)| / max(1, |E(0)|)`.
///
/// The dissipation integral is the one the integrator carried with its own
/// stages, so the residual reflects the scheme's order rather than the
/// sampling stride. [`energy_identity_residual_trapezoid`] gives the
/// sample-based variant.
pub fn energy_identity_residual(record: &TrajectoryRecord) -> Result<f64> {
    if record.len() < 2 {
        return Err(BeamError::InsufficientData(
            "energy identity needs at least 2 samples".into(),
        ));
    }
    let e0 = record.samples[0].energy;
    let scale = e0.abs().max(1.0);
    Ok(record
        .samples
        .iter()
        .map(|s| (s.energy + s.dissipated - e0).abs() / scale)
        .fold(0.0, f64::max))
}

/// Same balance with the dissipation integral taken by the composite
/// trapezoid rule over the recorded samples.
pub fn energy_identity_residual_trapezoid(record: &TrajectoryRecord) -> Result<f64> {
    if record.len() < 2 {
        return Err(BeamError::InsufficientData(
            "energy identity needs at least 2 samples".into(),
        ));
    }
    let e0 = record.samples[0].energy;
    let scale = e0.abs().max(1.0);
    let mut integral = 0.0;
    let mut worst: f64 = 0.0;
    for w in record.samples.windows(2) {
        let dt = w[1].state.t - w[0].state.t;
        integral -= 0.5 * dt * (w[0].dissipation_rate + w[1].dissipation_rate);
        worst = worst.max((w[1].energy + integral - e0).abs() / scale);
    }
    Ok(worst)
}

/// `Ψ = (u_t, u) + α(A^{θ/4}u_t, A^{θ/4}u)`.
pub fn perturbation(config: &ModelConfig, state: &State) -> f64 {
    (0..config.modes())
        .map(|j| config.mass()[j] * state.v[j] * state.y[j])
        .sum()
}

/// `E_ε = E + εΨ`.
pub fn perturbed_energy(config: &ModelConfig, state: &State, eps: f64) -> Result<f64> {
    if !(eps >= 0.0) {
        return Err(BeamError::invalid("eps must be non-negative"));
    }
    Ok(energy(config, state) + eps * perturbation(config, state))
}

/// Largest `ε` for which `½E − c ≤ E_ε ≤ (3/2)E + c`, `c = ½(‖h‖² + L)`,
/// holds for every state, or `None` when this bookkeeping cannot guarantee one.
///
/// From `|Ψ| ≤ ½κ‖z‖²` with `κ = max(1, (1 + αλ₁^{θ/2})/λ₁)` and the lower
/// bound `¼‖z‖² ≤ E + (2/λ₁)‖h‖² + l₀L`, the choice `ε = 1/(4κ)` works as long
/// as `(2/λ₁)‖h‖² + l₀L ≤ ‖h‖² + L`.
pub fn perturbation_threshold(config: &ModelConfig) -> Option<f64> {
    let b = config.basis();
    let l1 = b.lambda1();
    let h2 = config.forcing().dot(config.forcing());
    let l0 = config.constitutive().constants.l0;
    let a = 2.0 / l1 * h2 + l0 * b.length();
    if a > h2 + b.length() {
        return None;
    }
    let kappa = 1f64.max((1.0 + config.alpha() * l1.powf(config.theta() / 2.0)) / l1);
    Some(1.0 / (4.0 * kappa))
}

/// `¼‖z‖²_{ℋ_{α,θ}} ≤ E + (2/λ₁)‖h‖² + l₀L`; returns the slack (non-negative when it holds).
pub fn energy_lower_bound_slack(config: &ModelConfig, state: &State) -> f64 {
    let b = config.basis();
    let h2 = config.forcing().dot(config.forcing());
    energy(config, state) + 2.0 / b.lambda1() * h2 + config.constitutive().constants.l0 * b.length()
        - 0.25 * phase_norm_sq(config, state)
}

/// `‖A^{1/2}u_t‖² + ‖u_tt‖² + α‖A^{θ/4}u_tt‖² + M(S)‖A^{1/4}u_t‖²`.
pub fn second_energy(config: &ModelConfig, state: &State) -> f64 {
    let a = second_time_derivative(config, state);
    let b = config.basis();
    let tension = config.constitutive().tension.value(config.bulge(&state.y));
    (0..config.modes())
        .map(|j| {
            let v = state.v[j];
            b.lambda()[j] * v * v + config.mass()[j] * a[j] * a[j] + tension * b.mu()[j] * v * v
        })
        .sum()
}

/// Smallest `C` with `log Q(t) − log Q(0) ≤ C t` over the record, `Q` the second energy.
///
/// Returns `None` when `Q(0) = 0` (equilibrium start; nothing to grow from).
pub fn second_energy_growth_rate(record: &TrajectoryRecord) -> Option<f64> {
    let cfg = &record.config;
    let first = &record.samples.first()?.state;
    let q0 = second_energy(cfg, first);
    if q0 <= 0.0 {
        return None;
    }
    let mut c = f64::NEG_INFINITY;
    for s in record.samples.iter().skip(1) {
        let t = s.state.t - first.t;
        let q = second_energy(cfg, &s.state);
        if t > 0.0 && q > 0.0 {
            c = c.max((q.ln() - q0.ln()) / t);
        }
    }
    Some(c.max(0.0))
}

/// Largest single-interval energy increase over a record (≤ 0 for monotone energy).
pub fn max_energy_increase(record: &TrajectoryRecord) -> f64 {
    record
        .samples
        .windows(2)
        .map(|w| w[1].energy - w[0].energy)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// `E(t_{k+1}) − E(t_k) ≤ 10 × (energy-identity residual per step)` for every interval.
pub fn energy_is_monotone(record: &TrajectoryRecord) -> Result<bool> {
    if record.len() < 2 {
        return Ok(true);
    }
    let res = energy_identity_residual(record)?;
    let scale = record.samples[0].energy.abs().max(1.0);
    let tol = 10.0 * res * scale / record.steps.max(1) as f64 * record.stride as f64;
    Ok(max_energy_increase(record) <= tol + 1e-14 * scale)
}

/// Fitted exponential absorption `‖z(t)‖² ≈ K₁ e^{−δt} + K₂`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub k1: f64,
    pub delta: f64,
    pub k2: f64,
    /// rms of the log-linear regression residual.
    pub rms: f64,
}

/// Relative floor under which `‖z‖²` counts as numerically zero when forming `K₂`.
pub const DECAY_FLOOR: f64 = 1e-10;

/// Fit `‖z(t)‖² ≤ K₁e^{−δt} + K₂` on a record.
///
/// `K₂` is the mean of `‖z‖²` over the final quarter of the record, floored at
/// `DECAY_FLOOR · sup ‖z‖²`. The tail must be flat: its spread has to stay
/// under 10% of the drop from the initial value, otherwise `NonPlateau`.
/// `(K₁, δ)` come from least squares on `log(‖z‖² − K₂)` over the samples
/// before the tail where the excess is still above `K₂`.
pub fn decay_fit(record: &TrajectoryRecord) -> Result<DecayFit> {
    let n = record.len();
    if n < 8 {
        return Err(BeamError::InsufficientData(
            "decay fit needs at least 8 samples".into(),
        ));
    }
    let z2: Vec<f64> = record.samples.iter().map(|s| s.phase_norm * s.phase_norm).collect();
    let t: Vec<f64> = record.times();
    let tail_start = n - n / 4;
    let tail = &z2[tail_start..];
    let tail_mean = tail.iter().sum::<f64>() / tail.len() as f64;
    let tail_spread = tail.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
        - tail.iter().cloned().fold(f64::INFINITY, f64::min);
    let sup = z2.iter().cloned().fold(0.0, f64::max);
    let k2 = tail_mean.max(DECAY_FLOOR * sup);
    let drop = (z2[0] - k2).abs();
    if tail_spread > 0.1 * drop && tail_spread > DECAY_FLOOR * sup {
        return Err(BeamError::NonPlateau {
            spread: tail_spread,
            drop,
        });
    }

    let pts: Vec<(f64, f64)> = (0..tail_start)
        .filter(|&i| z2[i] - k2 > k2)
        .map(|i| (t[i], (z2[i] - k2).ln()))
        .collect();
    if pts.len() < 2 {
        return Ok(DecayFit {
            k1: 0.0,
            delta: 0.0,
            k2,
            rms: 0.0,
        });
    }
    let (slope, intercept, rms) = crate::fit::linear_regression(&pts);
    Ok(DecayFit {
        k1: intercept.exp(),
        delta: -slope,
        k2,
        rms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Affine, ConstitutiveFunctions, HypothesisConstants, OddCubic};
    use crate::spectral::{ModalVector, SpectralBasis};
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn cfg(alpha: f64, c: ConstitutiveFunctions, m: usize) -> ModelConfig {
        let b = Arc::new(SpectralBasis::new(PI, m).unwrap());
        ModelConfig::unforced(alpha, 1.0, 1.0, b, c).unwrap()
    }

    fn linear(b: f64, nu: f64) -> ConstitutiveFunctions {
        ConstitutiveFunctions {
            tension: Affine::constant(b),
            damping: Affine::constant(nu),
            source: OddCubic::zero(),
            constants: HypothesisConstants::default(),
        }
    }

    #[test]
    fn energy_examples() {
        let c = cfg(0.0, ConstitutiveFunctions::named("wk-cubic").unwrap(), 4);
        assert_eq!(energy(&c, &State::zero(4)), 0.0);
        let c = cfg(0.0, linear(0.0, 1.0), 4);
        assert_eq!(energy(&c, &State::at_rest(ModalVector::unit(4, 1))), 0.5);
        let c = cfg(1.0, linear(0.0, 1.0), 4);
        let s = State::new(ModalVector::zeros(4), ModalVector::unit(4, 1), 0.0);
        assert_eq!(energy(&c, &s), 1.0);
    }

    #[test]
    fn cubic_energy_term_matches_closed_form() {
        // ∫ (c ω_1)^4 / 4 over [0, π] = c^4 (2/π)^2 (3π/8) / 4
        let c = cfg(0.0, ConstitutiveFunctions::named("wk-cubic").unwrap(), 5);
        let amp = 0.8;
        let s = State::at_rest(ModalVector::unit(5, 1).scaled(amp));
        let quartic = amp.powi(4) * (2.0 / PI).powi(2) * (3.0 * PI / 8.0) / 4.0;
        // λ₁ = μ₁ = 1, M̃(S) = S + S²/2 with S = amp²
        let sq = amp * amp;
        let want = 0.5 * (sq + sq + 0.5 * sq * sq) + quartic;
        assert!((energy(&c, &s) - want).abs() < 1e-14);
    }

    #[test]
    fn dissipation_examples() {
        let nu = 0.7;
        let c = cfg(0.0, linear(0.0, nu), 3);
        assert_eq!(dissipation_rate(&c, &State::at_rest(ModalVector::unit(3, 2))), 0.0);
        let s = State::new(ModalVector::zeros(3), ModalVector::unit(3, 1), 0.0);
        assert_eq!(dissipation_rate(&c, &s), -nu);
        let s = State::new(ModalVector::zeros(3), ModalVector::from_vec(vec![0.0, 1e-3, 0.0]), 0.0);
        assert!(dissipation_rate(&c, &s) < 0.0);
    }

    #[test]
    fn perturbed_energy_examples() {
        let c = cfg(1.0, ConstitutiveFunctions::named("wk-cubic").unwrap(), 3);
        let rest = State::at_rest(ModalVector::unit(3, 1));
        assert_eq!(perturbed_energy(&c, &rest, 0.3).unwrap(), energy(&c, &rest));
        let s = State::new(ModalVector::unit(3, 1), ModalVector::unit(3, 1), 0.0);
        assert_eq!(perturbed_energy(&c, &s, 0.0).unwrap(), energy(&c, &s));
        let e = energy(&c, &s);
        assert!((perturbed_energy(&c, &s, 0.1).unwrap() - (e + 0.2)).abs() < 1e-15);
        assert!(perturbed_energy(&c, &s, -1.0).is_err());
    }

    #[test]
    fn second_energy_examples() {
        let (b, nu) = (0.5, 0.3);
        let c = cfg(0.0, linear(b, nu), 3);
        assert_eq!(second_energy(&c, &State::zero(3)), 0.0);
        // single mode: λ v² + a² + α λ^{θ/2} a² + b μ v²
        let s = State::new(ModalVector::unit(3, 1).scaled(0.4), ModalVector::unit(3, 1).scaled(-0.2), 0.0);
        let a = c.acceleration(&s)[0];
        let want = 0.04 + a * a + b * 0.04;
        assert!((second_energy(&c, &s) - want).abs() < 1e-15);
    }

    #[test]
    fn equilibrium_second_energy_vanishes() {
        let c = cfg(0.0, linear(2.0, 1.0), 3)
            .with_forcing(ModalVector::unit(3, 1).scaled(3.0))
            .unwrap();
        let y = ModalVector::unit(3, 1).scaled(1.0);
        assert!(second_energy(&c, &State::at_rest(y)) < 1e-28);
    }

    #[test]
    fn threshold_exists_for_shipped_instances() {
        let c = cfg(0.5, ConstitutiveFunctions::named("wk-cubic").unwrap(), 8);
        let eps = perturbation_threshold(&c).unwrap();
        assert!(eps > 0.0 && eps <= 0.25);
        let forced = c.with_forcing(ModalVector::unit(8, 1)).unwrap();
        assert!(perturbation_threshold(&forced).is_some());
        let heavy = c.with_forcing(ModalVector::unit(8, 1).scaled(10.0)).unwrap();
        assert!(perturbation_threshold(&heavy).is_none());
    }
}
