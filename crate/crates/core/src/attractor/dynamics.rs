use rayon::prelude::*;

use crate::energy;
use crate::error::{BeamError, Result};
use crate::integrator::{integrate, IntegrationSettings, Scheme};
use crate::model::{ModelConfig, State};
use crate::norms::DiagonalNorm;

use super::cloud::{hausdorff_semidistance, PointCloud};

/// How an ω-limit cloud is sampled from one trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplingParams {
    pub t_transient: f64,
    pub t_sample: f64,
    pub dt: f64,
    /// Integration steps between collected states.
    pub stride: usize,
    pub scheme: Scheme,
}

impl SamplingParams {
    fn validate(&self) -> Result<()> {
        if !(self.t_transient > 0.0 && self.t_sample > 0.0) {
            return Err(BeamError::invalid("T_transient and T_sample must be positive"));
        }
        Ok(())
    }
}

fn sample_states(config: &ModelConfig, z0: &State, p: &SamplingParams) -> Result<Vec<State>> {
    p.validate()?;
    let transient = IntegrationSettings::new(p.t_transient, p.dt, usize::MAX, p.scheme);
    let start = integrate(config, z0, &transient, &[])?.into_result()?;
    let sampling = IntegrationSettings::new(p.t_sample, p.dt, p.stride, p.scheme);
    let rec = integrate(config, start.last_state(), &sampling, &[])?.into_result()?;
    Ok(rec.samples.into_iter().map(|s| s.state).collect())
}

/// States collected every `stride` steps over `[T_transient, T_transient + T_sample]`,
/// measured in the `α`-weighted phase norm.
pub fn omega_limit_sample(config: &ModelConfig, z0: &State, params: &SamplingParams) -> Result<PointCloud> {
    PointCloud::new(sample_states(config, z0, params)?, DiagonalNorm::phase(config))
}

/// Union of the ω-limit clouds of several initial states, integrated concurrently
/// and merged in input order.
pub fn omega_limit_ensemble(
    config: &ModelConfig,
    initial: &[State],
    params: &SamplingParams,
) -> Result<PointCloud> {
    if initial.is_empty() {
        return Err(BeamError::EmptyCloud);
    }
    let parts: Vec<Vec<State>> = initial
        .par_iter()
        .map(|z0| sample_states(config, z0, params))
        .collect::<Result<_>>()?;
    PointCloud::new(parts.into_iter().flatten().collect(), DiagonalNorm::phase(config))
}

/// Lyapunov-function diagnostics of one long trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientReport {
    /// Largest energy increase between consecutive samples (≤ 0 when monotone).
    pub max_energy_increase: f64,
    /// Energy non-increasing within the scheme's own energy-balance error.
    pub energy_monotone: bool,
    /// `‖v(T)‖₂`
    pub terminal_velocity: f64,
    /// `‖G(y(T))‖₂`
    pub terminal_residual: f64,
    pub terminal_state: State,
}

impl GradientReport {
    pub fn passes(&self, velocity_tol: f64, residual_tol: f64) -> bool {
        self.energy_monotone
            && self.terminal_velocity <= velocity_tol
            && self.terminal_residual <= residual_tol
    }
}

pub fn gradient_structure_check(
    config: &ModelConfig,
    z0: &State,
    settings: &IntegrationSettings,
) -> Result<GradientReport> {
    let rec = integrate(config, z0, settings, &[])?.into_result()?;
    let last = rec.last_state().clone();
    Ok(GradientReport {
        max_energy_increase: energy::max_energy_increase(&rec),
        energy_monotone: energy::energy_is_monotone(&rec)?,
        terminal_velocity: last.v.l2(),
        terminal_residual: config.stationary_residual_unchecked(&last.y).l2(),
        terminal_state: last,
    })
}

/// Suprema over a cloud of `‖Au‖`, `‖A^{1/2}u_t‖` and the second energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularityReport {
    pub sup_au: f64,
    pub sup_half_v: f64,
    pub sup_second_energy: f64,
}

pub fn attractor_regularity_check(config: &ModelConfig, cloud: &PointCloud) -> Result<RegularityReport> {
    if cloud.is_empty() {
        return Err(BeamError::EmptyCloud);
    }
    let lam = config.basis().lambda();
    let mut r = RegularityReport {
        sup_au: 0.0,
        sup_half_v: 0.0,
        sup_second_energy: 0.0,
    };
    for s in &cloud.states {
        config.check_state(s)?;
        let au: f64 = (0..lam.len()).map(|j| (lam[j] * s.y[j]).powi(2)).sum();
        let hv: f64 = (0..lam.len()).map(|j| lam[j] * s.v[j] * s.v[j]).sum();
        r.sup_au = r.sup_au.max(au.sqrt());
        r.sup_half_v = r.sup_half_v.max(hv.sqrt());
        r.sup_second_energy = r.sup_second_energy.max(energy::second_energy(config, s));
    }
    Ok(r)
}

/// `h(𝒜_α, 𝒜_0)` per `α`, clouds compared in the `α`-free phase norm.
#[derive(Debug, Clone, PartialEq)]
pub struct UscReport {
    pub entries: Vec<(f64, f64)>,
}

impl UscReport {
    /// `h` strictly decreasing along the (descending) `α` list.
    pub fn decreasing(&self) -> bool {
        self.entries.windows(2).all(|w| w[1].1 < w[0].1)
    }

    pub fn final_value(&self) -> Option<f64> {
        self.entries.last().map(|e| e.1)
    }
}

/// ω-limit clouds from a fixed set of initial states at each `α` (sorted
/// descending), each compared with the `α = 0` cloud.
pub fn upper_semicontinuity_scan(
    template: &ModelConfig,
    alphas: &[f64],
    initial: &[State],
    params: &SamplingParams,
) -> Result<UscReport> {
    if alphas.is_empty() {
        return Err(BeamError::InsufficientData("empty alpha list".into()));
    }
    if alphas.windows(2).any(|w| w[1] > w[0]) {
        return Err(BeamError::invalid("alphas must be sorted in descending order"));
    }
    let norm = DiagonalNorm::phase_alpha_free(template.basis());
    let base = omega_limit_ensemble(&template.with_alpha(0.0)?, initial, params)?.with_norm(norm.clone())?;
    let entries = alphas
        .iter()
        .map(|&a| {
            if a == 0.0 {
                return Ok((a, 0.0));
            }
            let cloud = omega_limit_ensemble(&template.with_alpha(a)?, initial, params)?
                .with_norm(norm.clone())?;
            Ok((a, hausdorff_semidistance(&cloud, &base)?))
        })
        .collect::<Result<_>>()?;
    Ok(UscReport { entries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ConstitutiveFunctions;
    use crate::spectral::{ModalVector, SpectralBasis};
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn cubic(alpha: f64, m: usize) -> ModelConfig {
        let b = Arc::new(SpectralBasis::new(PI, m).unwrap());
        ModelConfig::unforced(alpha, 1.0, 1.0, b, ConstitutiveFunctions::named("wk-cubic").unwrap()).unwrap()
    }

    fn params(dt: f64) -> SamplingParams {
        SamplingParams {
            t_transient: 1.0,
            t_sample: 1.0,
            dt,
            stride: 10,
            scheme: Scheme::Rk4,
        }
    }

    #[test]
    fn equilibrium_cloud_is_one_point() {
        let c = cubic(0.5, 4);
        let cloud = omega_limit_sample(&c, &State::zero(4), &params(0.01)).unwrap();
        assert!(cloud.len() > 5);
        assert!(cloud.states.iter().all(|s| s.y == ModalVector::zeros(4) && s.v == ModalVector::zeros(4)));
        let r = attractor_regularity_check(&c, &cloud).unwrap();
        assert_eq!((r.sup_au, r.sup_half_v, r.sup_second_energy), (0.0, 0.0, 0.0));
        let g = gradient_structure_check(&c, &State::zero(4), &IntegrationSettings::new(1.0, 0.01, 10, Scheme::Rk4)).unwrap();
        assert!(g.passes(1e-15, 1e-15));
    }

    #[test]
    fn zero_alpha_scan_is_zero() {
        let c = cubic(0.5, 4);
        let z = vec![State::at_rest(ModalVector::unit(4, 1))];
        let r = upper_semicontinuity_scan(&c, &[0.0], &z, &params(0.01)).unwrap();
        assert_eq!(r.entries, vec![(0.0, 0.0)]);
        assert!(upper_semicontinuity_scan(&c, &[0.1, 0.5], &z, &params(0.01)).is_err());
    }

    #[test]
    fn sampling_requires_positive_windows() {
        let c = cubic(0.0, 4);
        let mut p = params(0.01);
        p.t_transient = 0.0;
        assert!(omega_limit_sample(&c, &State::zero(4), &p).is_err());
    }
}
