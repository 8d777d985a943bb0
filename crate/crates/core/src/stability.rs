//! Two-trajectory analysis: continuous dependence on initial data, the
//! stability inequality, continuity in the rotational-inertia strength
//! `α → 0`, and Hölder continuity in time in the weak norms.

use rayon::prelude::*;

use crate::error::{BeamError, Result};
use crate::fit;
use crate::integrator::{integrate, IntegrationSettings, TrajectoryRecord};
use crate::model::{ModelConfig, State};
use crate::norms::{DiagonalNorm, WeakNormSpec};

/// `‖(u, v)‖_{ℋ_{α,θ}}`, or the weak `ℋ^{−s}_{α,θ}` norm when `spec` is given.
pub fn phase_norm(config: &ModelConfig, state: &State, spec: Option<WeakNormSpec>) -> f64 {
    match spec {
        None => DiagonalNorm::phase(config).norm(state),
        Some(s) => DiagonalNorm::weak(config, s).norm(state),
    }
}

/// `F = ½{‖A^{1/2}w‖² + ‖w_t‖² + α‖A^{θ/4}w_t‖² + M(‖A^{1/4}u‖²)‖A^{1/4}w‖²}`
/// with `w = u_A − u_B` and `u = u_A`.
pub fn difference_functional(config: &ModelConfig, a: &State, b: &State) -> f64 {
    let w = a.difference(b);
    let tension = config.constitutive().tension.value(config.bulge(&a.y));
    0.5 * (DiagonalNorm::phase(config).norm_sq(&w) + tension * config.bulge(&w.y))
}

fn run_pair(
    config: &ModelConfig,
    a: &State,
    b: &State,
    settings: &IntegrationSettings,
) -> Result<(TrajectoryRecord, TrajectoryRecord)> {
    let (ra, rb) = rayon::join(
        || integrate(config, a, settings, &[]),
        || integrate(config, b, settings, &[]),
    );
    Ok((ra?.into_result()?, rb?.into_result()?))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LipschitzReport {
    /// `sup_t ‖z(t) − z̃(t)‖ / ‖z₀ − z̃₀‖`
    pub sup_ratio: f64,
    /// `log(sup_ratio) / T`
    pub fitted_c: f64,
}

/// Continuous dependence on initial data in `ℋ_{α,θ}`.
pub fn lipschitz_check(
    config: &ModelConfig,
    z0: &State,
    z0_tilde: &State,
    settings: &IntegrationSettings,
) -> Result<LipschitzReport> {
    let norm = DiagonalNorm::phase(config);
    let d0 = norm.distance(z0, z0_tilde);
    if d0 == 0.0 {
        return Err(BeamError::invalid("initial states must differ"));
    }
    if !(settings.t_final > 0.0) {
        return Err(BeamError::invalid("T must be positive"));
    }
    let (ra, rb) = run_pair(config, z0, z0_tilde, settings)?;
    let sup = ra
        .states()
        .zip(rb.states())
        .map(|(a, b)| norm.distance(a, b))
        .fold(0.0, f64::max);
    let sup_ratio = sup / d0;
    Ok(LipschitzReport {
        sup_ratio,
        fitted_c: sup_ratio.ln() / settings.t_final,
    })
}

/// `δ` grid: 25 log-spaced values on `[1e−4, 10]`.
pub fn delta_grid() -> Vec<f64> {
    log_grid(1e-4, 10.0, 25)
}

/// `C` grid: 33 log-spaced values on `[1e−2, 1e6]`.
pub fn c_grid() -> Vec<f64> {
    log_grid(1e-2, 1e6, 33)
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let (a, b) = (lo.log10(), hi.log10());
    (0..n)
        .map(|i| 10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct StabilityReport {
    pub times: Vec<f64>,
    /// `‖z¹(t) − z²(t)‖²_{ℋ_{α,θ}}`
    pub lhs: Vec<f64>,
    /// `‖A^{1/4}w‖² + ‖w‖²_{L^{p+2}}`
    pub integrand: Vec<f64>,
    pub initial_gap_sq: f64,
    /// For every grid `δ`, the smallest `C` (not restricted to the grid) the data require.
    pub required_c: Vec<(f64, f64)>,
    /// Smallest grid `C` and its `δ` for which the inequality holds at every sample.
    pub best: Option<(f64, f64)>,
}

impl StabilityReport {
    pub fn feasible(&self) -> bool {
        self.best.is_some()
    }

    /// `(C, δ)` or `Infeasible`.
    pub fn ensure_feasible(&self) -> Result<(f64, f64)> {
        self.best.ok_or_else(|| BeamError::Infeasible {
            best_c: self
                .required_c
                .iter()
                .map(|p| p.1)
                .fold(f64::INFINITY, f64::min),
        })
    }

    /// Right-hand side `C e^{−δt}‖w₀‖² + C ∫₀ᵗ e^{−δ(t−s)} g(s) ds` on the sample times.
    pub fn rhs(&self, c: f64, delta: f64) -> Vec<f64> {
        convolution(&self.times, &self.integrand, delta)
            .iter()
            .zip(&self.times)
            .map(|(i, t)| c * ((-delta * (t - self.times[0])).exp() * self.initial_gap_sq + i))
            .collect()
    }
}

// ∫₀ᵗ e^{−δ(t−s)} g(s) ds by the trapezoid rule, recursively
fn convolution(times: &[f64], g: &[f64], delta: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(times.len());
    let mut acc = 0.0;
    out.push(0.0);
    for k in 1..times.len() {
        let h = times[k] - times[k - 1];
        let decay = (-delta * h).exp();
        acc = decay * acc + 0.5 * h * (decay * g[k - 1] + g[k]);
        out.push(acc);
    }
    out
}

/// Two-trajectory stability inequality
/// `‖w(t)‖² ≤ C e^{−δt}‖w(0)‖² + C ∫₀ᵗ e^{−δ(t−s)}(‖A^{1/4}w‖² + ‖w‖²_{L^{p+2}}) ds`,
/// searched over the `(C, δ)` grids.
pub fn stability_inequality_check(
    config: &ModelConfig,
    z0a: &State,
    z0b: &State,
    settings: &IntegrationSettings,
) -> Result<StabilityReport> {
    let (ra, rb) = run_pair(config, z0a, z0b, settings)?;
    let norm = DiagonalNorm::phase(config);
    let q = config.constitutive().constants.p + 2.0;
    let basis = config.basis();
    let mut times = Vec::with_capacity(ra.len());
    let mut lhs = Vec::with_capacity(ra.len());
    let mut integrand = Vec::with_capacity(ra.len());
    for (a, b) in ra.states().zip(rb.states()) {
        let w = a.difference(b);
        times.push(a.t);
        lhs.push(norm.norm_sq(&w));
        let grid = basis.to_grid_unchecked(&w.y);
        let lq = basis.lq_norm_grid(&grid, q);
        integrand.push(config.bulge(&w.y) + lq * lq);
    }
    let initial_gap_sq = lhs[0];

    let cs = c_grid();
    let mut required_c = Vec::new();
    let mut best: Option<(f64, f64)> = None;
    for delta in delta_grid() {
        let conv = convolution(&times, &integrand, delta);
        let mut need: f64 = 0.0;
        for k in 0..times.len() {
            let base = (-delta * (times[k] - times[0])).exp() * initial_gap_sq + conv[k];
            if lhs[k] > 0.0 {
                need = need.max(if base > 0.0 { lhs[k] / base } else { f64::INFINITY });
            }
        }
        required_c.push((delta, need));
        if let Some(&c) = cs.iter().find(|&&c| c >= need) {
            // prefer smaller C, then larger δ
            if best.is_none_or(|(bc, _)| c <= bc) {
                best = Some((c, delta));
            }
        }
    }
    Ok(StabilityReport {
        times,
        lhs,
        integrand,
        initial_gap_sq,
        required_c,
        best,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlphaScanReport {
    /// `(α, D(α))` with `D(α) = sup_{t ≤ T} ‖z^α(t) − z^0(t)‖_ℋ`.
    pub entries: Vec<(f64, f64)>,
    /// Fitted `ρ` in `D(α) ≈ C α^ρ` (needs ≥ 3 positive `α`).
    pub rho: Option<f64>,
    pub c: Option<f64>,
}

impl AlphaScanReport {
    /// `D(α)` strictly decreasing as `α` decreases.
    pub fn strictly_monotone(&self) -> bool {
        let mut e = self.entries.clone();
        e.sort_by(|a, b| a.0.total_cmp(&b.0));
        e.windows(2).all(|w| w[0].1 < w[1].1)
    }
}

/// Distance between the `α > 0` and `α = 0` trajectories from the same initial
/// data, measured in the `α`-independent norm `‖A^{1/2}u‖² + ‖u_t‖²`.
pub fn alpha_continuity_scan(
    template: &ModelConfig,
    z0: &State,
    alphas: &[f64],
    settings: &IntegrationSettings,
) -> Result<AlphaScanReport> {
    if alphas.is_empty() {
        return Err(BeamError::InsufficientData("empty alpha list".into()));
    }
    let base_cfg = template.with_alpha(0.0)?;
    let reference = integrate(&base_cfg, z0, settings, &[])?.into_result()?;
    let norm = DiagonalNorm::phase_alpha_free(template.basis());
    let entries: Vec<(f64, f64)> = alphas
        .par_iter()
        .map(|&a| -> Result<(f64, f64)> {
            if a == 0.0 {
                return Ok((0.0, 0.0));
            }
            let cfg = template.with_alpha(a)?;
            let rec = integrate(&cfg, z0, settings, &[])?.into_result()?;
            let d = rec
                .states()
                .zip(reference.states())
                .map(|(x, y)| norm.distance(x, y))
                .fold(0.0, f64::max);
            Ok((a, d))
        })
        .collect::<Result<_>>()?;

    let positive: Vec<(f64, f64)> = entries.iter().copied().filter(|e| e.0 > 0.0).collect();
    let (rho, c) = match positive.len() {
        0 => (None, None),
        n if n < 3 => {
            return Err(BeamError::InsufficientData(
                "rate regression needs at least 3 positive alpha values".into(),
            ))
        }
        _ => match fit::power_law(&positive) {
            Some((r, c)) => (Some(r), Some(c)),
            None => (None, None),
        },
    };
    Ok(AlphaScanReport { entries, rho, c })
}

#[derive(Debug, Clone, PartialEq)]
pub struct HolderEstimate {
    /// Fitted slope of `log sup‖z(t+τ) − z(t)‖` against `log τ`, capped at 1.
    pub exponent: f64,
    /// `(τ, sup increment)` per dyadic level.
    pub increments: Vec<(f64, f64)>,
}

/// Hölder exponent in time of a record in the weak `ℋ^{−s}_{α,θ}` norm.
///
/// Uses lags `τ = 2^k Δ` (`Δ` the sample spacing) up to an eighth of the record.
pub fn holder_exponent_weak(record: &TrajectoryRecord, spec: WeakNormSpec) -> Result<HolderEstimate> {
    if record.len() < 50 {
        return Err(BeamError::InsufficientData(format!(
            "Hölder estimate needs at least 50 samples, record has {}",
            record.len()
        )));
    }
    let times = record.times();
    let spacing = times[1] - times[0];
    // uniform prefix; the final sample may close off a partial stride
    let n = times
        .windows(2)
        .take_while(|w| ((w[1] - w[0]) - spacing).abs() <= 1e-9 * spacing)
        .count()
        + 1;
    let norm = DiagonalNorm::weak(&record.config, spec);
    let states: Vec<&State> = record.states().take(n).collect();
    let mut increments = Vec::new();
    let mut lag = 1usize;
    while lag * 8 <= n && increments.len() < 8 {
        let sup = (0..n - lag)
            .map(|i| norm.distance(states[i + lag], states[i]))
            .fold(0.0, f64::max);
        increments.push((lag as f64 * spacing, sup));
        lag *= 2;
    }
    if increments.len() < 3 {
        return Err(BeamError::InsufficientData("fewer than 3 dyadic lags".into()));
    }
    let exponent = match fit::power_law(&increments) {
        Some((slope, _)) if increments.iter().all(|p| p.1 > 0.0) => slope.min(1.0),
        _ => 1.0,
    };
    Ok(HolderEstimate {
        exponent,
        increments,
    })
}
