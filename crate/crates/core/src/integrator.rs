//! Time integration of the Galerkin system `y' = v`, `v' = acceleration(y, v)`.
//!
//! Two schemes are provided. `Rk4` is classical fourth-order Runge–Kutta on
//! the first-order system. `Imex` treats the stiff diagonal part
//! `m_j ÿ_j + N(S̄) λ_j^{θ'/2} ẏ_j + (λ_j + M(S̄) λ_j^{1/2}) y_j` exactly with
//! coefficients frozen at a reference bulge `S̄`, and the remaining nonlocal
//! and nonlinear residual explicitly through an exponential midpoint rule.
//!
//! Both schemes carry the cumulative dissipated energy `∫ N(S)‖A^{θ'/4}v‖² dt`
//! alongside the state, integrated with the scheme's own stages, so the
//! energy balance of a record can be checked at the scheme's order.

use std::fmt;
use std::str::FromStr;

use crate::energy;
use crate::error::{BeamError, Result};
use crate::model::{ModelConfig, State};
use crate::spectral::ModalVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scheme {
    Rk4,
    Imex,
}

impl Scheme {
    /// `imex` above 64 modes, `rk4` otherwise.
    pub fn default_for(modes: usize) -> Self {
        if modes > 64 {
            Scheme::Imex
        } else {
            Scheme::Rk4
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scheme::Rk4 => "rk4",
            Scheme::Imex => "imex",
        })
    }
}

impl FromStr for Scheme {
    type Err = BeamError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rk4" => Ok(Scheme::Rk4),
            "imex" => Ok(Scheme::Imex),
            other => Err(BeamError::invalid(format!(
                "unknown scheme '{other}' (expected rk4 or imex)"
            ))),
        }
    }
}

/// Linear stability limit of `rk4` on the stiffest mode,
/// `2.8 / sqrt(λ_m / (1 + α λ_m^{θ/2}))`.
pub fn rk4_stability_bound(config: &ModelConfig) -> f64 {
    let lm = config.basis().lambda_max();
    let mass = 1.0 + config.alpha() * lm.powf(config.theta() / 2.0);
    2.8 / (lm / mass).sqrt()
}

/// Default time step: half the `rk4` stability bound.
pub fn auto_dt(config: &ModelConfig) -> f64 {
    0.5 * rk4_stability_bound(config)
}

/// `u_tt` at a state; identical to [`ModelConfig::acceleration`].
pub fn second_time_derivative(config: &ModelConfig, state: &State) -> ModalVector {
    config.acceleration(state)
}

/// One step of size `dt` from `state`.
pub fn step(config: &ModelConfig, state: &State, dt: f64, scheme: Scheme) -> Result<State> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(BeamError::invalid(format!("dt must be positive, got {dt}")));
    }
    config.check_state(state)?;
    let (next, _) = match scheme {
        Scheme::Rk4 => rk4_advance(config, state, 0.0, dt),
        Scheme::Imex => ImexStepper::new(config, dt).advance(config, state, 0.0),
    };
    check_finite(&next)?;
    Ok(next)
}

fn check_finite(state: &State) -> Result<()> {
    let m = state.y.len();
    if let Some(mode) = state.y.first_non_finite() {
        return Err(BeamError::Divergence { mode, time: state.t });
    }
    if let Some(mode) = state.v.first_non_finite() {
        return Err(BeamError::Divergence {
            mode: mode + m,
            time: state.t,
        });
    }
    Ok(())
}

// derivative of (y, v, dissipated)
fn rhs(config: &ModelConfig, y: &ModalVector, v: &ModalVector) -> (ModalVector, f64) {
    let st = State::new(y.clone(), v.clone(), 0.0);
    let a = config.acceleration(&st);
    (a, -energy::dissipation_rate(config, &st))
}

fn rk4_advance(config: &ModelConfig, s: &State, q: f64, dt: f64) -> (State, f64) {
    let (a1, d1) = rhs(config, &s.y, &s.v);
    let k1y = s.v.clone();

    let y2 = s.y.axpy(0.5 * dt, &k1y);
    let v2 = s.v.axpy(0.5 * dt, &a1);
    let (a2, d2) = rhs(config, &y2, &v2);
    let k2y = v2;

    let y3 = s.y.axpy(0.5 * dt, &k2y);
    let v3 = s.v.axpy(0.5 * dt, &a2);
    let (a3, d3) = rhs(config, &y3, &v3);
    let k3y = v3;

    let y4 = s.y.axpy(dt, &k3y);
    let v4 = s.v.axpy(dt, &a3);
    let (a4, d4) = rhs(config, &y4, &v4);
    let k4y = v4;

    let m = s.y.len();
    let mut y = s.y.clone();
    let mut v = s.v.clone();
    for j in 0..m {
        y[j] += dt / 6.0 * (k1y[j] + 2.0 * k2y[j] + 2.0 * k3y[j] + k4y[j]);
        v[j] += dt / 6.0 * (a1[j] + 2.0 * a2[j] + 2.0 * a3[j] + a4[j]);
    }
    let q = q + dt / 6.0 * (d1 + 2.0 * d2 + 2.0 * d3 + d4);
    (State::new(y, v, s.t + dt), q)
}

/// Exact flow of `m z'' + c z' + k z = 0` over a fixed interval, as a 2×2 matrix.
#[derive(Debug, Clone, Copy)]
struct ModeFlow {
    zz: f64,
    zv: f64,
    vz: f64,
    vv: f64,
}

impl ModeFlow {
    fn new(mass: f64, damping: f64, stiffness: f64, dt: f64) -> Self {
        let gamma = 0.5 * damping / mass;
        let w2 = stiffness / mass;
        let disc = gamma * gamma - w2;
        // e^{-γt}·cosh-like and e^{-γt}·sinh(dt)/d-like parts
        let (c, s) = if disc > 0.0 {
            let d = disc.sqrt();
            let ep = ((d - gamma) * dt).exp();
            let em = ((-d - gamma) * dt).exp();
            let s = if d * dt < 1e-8 {
                (-gamma * dt).exp() * dt
            } else {
                (ep - em) / (2.0 * d)
            };
            (0.5 * (ep + em), s)
        } else {
            let w = (-disc).sqrt();
            let decay = (-gamma * dt).exp();
            let s = if w * dt < 1e-8 {
                decay * dt
            } else {
                decay * (w * dt).sin() / w
            };
            (decay * (w * dt).cos(), s)
        };
        Self {
            zz: c + gamma * s,
            zv: s,
            vz: -w2 * s,
            vv: c - gamma * s,
        }
    }
}

/// IMEX stepper with a cached linear propagator.
///
/// The propagator is rebuilt whenever the bulge `S` drifts by more than 1%
/// from the value it was built at.
#[derive(Debug, Clone)]
pub struct ImexStepper {
    dt: f64,
    s_ref: f64,
    tension_ref: f64,
    damping_ref: f64,
    stiffness: Vec<f64>,
    full: Vec<ModeFlow>,
    half: Vec<ModeFlow>,
    rebuilds: usize,
}

impl ImexStepper {
    pub fn new(config: &ModelConfig, dt: f64) -> Self {
        let mut st = Self {
            dt,
            s_ref: f64::NAN,
            tension_ref: 0.0,
            damping_ref: 0.0,
            stiffness: Vec::new(),
            full: Vec::new(),
            half: Vec::new(),
            rebuilds: 0,
        };
        st.rebuild(config, 0.0);
        st.rebuilds = 0;
        st
    }

    /// Number of propagator rebuilds triggered by bulge drift.
    pub fn rebuilds(&self) -> usize {
        self.rebuilds
    }

    fn rebuild(&mut self, config: &ModelConfig, s: f64) {
        let c = config.constitutive();
        self.s_ref = s;
        self.tension_ref = c.tension.value(s);
        self.damping_ref = c.damping.value(s);
        let b = config.basis();
        self.stiffness = (0..config.modes())
            .map(|j| b.lambda()[j] + self.tension_ref * b.mu()[j])
            .collect();
        let flows = |dt: f64| -> Vec<ModeFlow> {
            (0..config.modes())
                .map(|j| {
                    ModeFlow::new(
                        config.mass()[j],
                        self.damping_ref * config.damping_weight()[j],
                        self.stiffness[j],
                        dt,
                    )
                })
                .collect()
        };
        self.full = flows(self.dt);
        self.half = flows(0.5 * self.dt);
        self.rebuilds += 1;
    }

    fn maybe_rebuild(&mut self, config: &ModelConfig, s: f64) {
        if (s - self.s_ref).abs() > 0.01 * self.s_ref.abs().max(f64::MIN_POSITIVE) {
            self.rebuild(config, s);
        }
    }

    // explicit part: everything the frozen linear operator does not capture
    fn residual(&self, config: &ModelConfig, y: &ModalVector, v: &ModalVector) -> ModalVector {
        let c = config.constitutive();
        let s = config.bulge(y);
        let dt = c.tension.value(s) - self.tension_ref;
        let dn = c.damping.value(s) - self.damping_ref;
        let force = config.source_modes(y);
        let b = config.basis();
        ModalVector::from_vec(
            (0..config.modes())
                .map(|j| {
                    config.forcing()[j]
                        - dt * b.mu()[j] * y[j]
                        - dn * config.damping_weight()[j] * v[j]
                        - force[j]
                })
                .collect(),
        )
    }

    fn propagate(
        &self,
        flows: &[ModeFlow],
        y: &ModalVector,
        v: &ModalVector,
        forcing: &ModalVector,
    ) -> (ModalVector, ModalVector) {
        let m = y.len();
        let mut yn = ModalVector::zeros(m);
        let mut vn = ModalVector::zeros(m);
        for j in 0..m {
            let eq = forcing[j] / self.stiffness[j];
            let z = y[j] - eq;
            let f = flows[j];
            yn[j] = eq + f.zz * z + f.zv * v[j];
            vn[j] = f.vz * z + f.vv * v[j];
        }
        (yn, vn)
    }

    fn advance(&mut self, config: &ModelConfig, s: &State, q: f64) -> (State, f64) {
        self.maybe_rebuild(config, config.bulge(&s.y));
        let r0 = self.residual(config, &s.y, &s.v);
        let (yh, vh) = self.propagate(&self.half, &s.y, &s.v, &r0);
        let rh = self.residual(config, &yh, &vh);
        let (y1, v1) = self.propagate(&self.full, &s.y, &s.v, &rh);

        let d0 = -energy::dissipation_rate(config, s);
        let dh = -energy::dissipation_rate(config, &State::new(yh, vh, 0.0));
        let next = State::new(y1, v1, s.t + self.dt);
        let d1 = -energy::dissipation_rate(config, &next);
        (next, q + self.dt / 6.0 * (d0 + 4.0 * dh + d1))
    }

    /// Advance one step (rebuilding the propagator if needed).
    pub fn step(&mut self, config: &ModelConfig, state: &State) -> Result<State> {
        config.check_state(state)?;
        let (next, _) = self.advance(config, state, 0.0);
        check_finite(&next)?;
        Ok(next)
    }
}

/// Extra per-sample quantity recorded alongside the standard columns.
pub trait Observer: Sync {
    fn name(&self) -> String;
    fn observe(&self, config: &ModelConfig, state: &State) -> f64;
}

impl<F> Observer for (String, F)
where
    F: Fn(&ModelConfig, &State) -> f64 + Sync,
{
    fn name(&self) -> String {
        self.0.clone()
    }

    fn observe(&self, config: &ModelConfig, state: &State) -> f64 {
        (self.1)(config, state)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegrationSettings {
    pub t_final: f64,
    pub dt: f64,
    pub stride: usize,
    pub scheme: Scheme,
}

impl IntegrationSettings {
    pub fn new(t_final: f64, dt: f64, stride: usize, scheme: Scheme) -> Self {
        Self {
            t_final,
            dt,
            stride,
            scheme,
        }
    }

    /// `rk4` at the automatic step with the given stride.
    pub fn auto(config: &ModelConfig, t_final: f64, stride: usize) -> Self {
        Self::new(t_final, auto_dt(config), stride, Scheme::default_for(config.modes()))
    }

    /// Number of steps and the effective step that lands exactly on `t_final`.
    pub fn resolve(&self) -> (usize, f64) {
        if self.t_final <= 0.0 {
            return (0, self.dt);
        }
        let n = (self.t_final / self.dt - 1e-9).ceil().max(1.0) as usize;
        (n, self.t_final / n as f64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub state: State,
    pub energy: f64,
    /// `dE/dt = −N(S)‖A^{θ'/4}v‖²`
    pub dissipation_rate: f64,
    /// Cumulative `∫₀ᵗ N(S)‖A^{θ'/4}v‖² ds`, integrated by the scheme itself.
    pub dissipated: f64,
    /// `‖z‖` in the `α`-weighted phase space.
    pub phase_norm: f64,
    pub observed: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Divergence {
    /// 1-based index into `(y_1..y_m, v_1..v_m)`.
    pub mode: usize,
    pub time: f64,
}

/// Sampled trajectory with its energy ledger.
#[derive(Debug, Clone)]
pub struct TrajectoryRecord {
    pub config: ModelConfig,
    pub scheme: Scheme,
    pub dt: f64,
    pub steps: usize,
    pub stride: usize,
    pub observer_names: Vec<String>,
    pub samples: Vec<Sample>,
    pub divergence: Option<Divergence>,
}

impl TrajectoryRecord {
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.state.t).collect()
    }

    pub fn states(&self) -> impl Iterator<Item = &State> {
        self.samples.iter().map(|s| &s.state)
    }

    pub fn energies(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.energy).collect()
    }

    pub fn last_state(&self) -> &State {
        &self.samples.last().expect("record holds at least the initial state").state
    }

    /// `Err(Divergence)` when the run blew up, otherwise the record.
    pub fn into_result(self) -> Result<Self> {
        match self.divergence {
            Some(d) => Err(BeamError::Divergence {
                mode: d.mode,
                time: d.time,
            }),
            None => Ok(self),
        }
    }
}

fn make_sample(
    config: &ModelConfig,
    state: State,
    dissipated: f64,
    observers: &[&dyn Observer],
) -> Sample {
    let observed = observers.iter().map(|o| o.observe(config, &state)).collect();
    Sample {
        energy: energy::energy(config, &state),
        dissipation_rate: energy::dissipation_rate(config, &state),
        phase_norm: energy::phase_norm_sq(config, &state).sqrt(),
        dissipated,
        observed,
        state,
    }
}

/// Integrate from `state0` over `[t0, t0 + t_final]`, recording every
/// `stride`-th step and the final state.
pub fn integrate(
    config: &ModelConfig,
    state0: &State,
    settings: &IntegrationSettings,
    observers: &[&dyn Observer],
) -> Result<TrajectoryRecord> {
    if settings.t_final < 0.0 || !settings.t_final.is_finite() {
        return Err(BeamError::invalid("T must be non-negative and finite"));
    }
    if !(settings.dt > 0.0 && settings.dt.is_finite()) {
        return Err(BeamError::invalid("dt must be positive"));
    }
    if settings.stride == 0 {
        return Err(BeamError::invalid("stride must be at least 1"));
    }
    config.check_state(state0)?;
    if !state0.is_finite() {
        return Err(BeamError::invalid("initial state is not finite"));
    }

    let (steps, dt) = settings.resolve();
    let t0 = state0.t;
    let mut record = TrajectoryRecord {
        config: config.clone(),
        scheme: settings.scheme,
        dt,
        steps,
        stride: settings.stride,
        observer_names: observers.iter().map(|o| o.name()).collect(),
        samples: Vec::with_capacity(steps / settings.stride + 2),
        divergence: None,
    };
    record
        .samples
        .push(make_sample(config, state0.clone(), 0.0, observers));

    let mut imex = match settings.scheme {
        Scheme::Imex => Some(ImexStepper::new(config, dt)),
        Scheme::Rk4 => None,
    };
    let mut state = state0.clone();
    let mut dissipated = 0.0;
    for k in 1..=steps {
        let (mut next, q) = match imex.as_mut() {
            Some(st) => st.advance(config, &state, dissipated),
            None => rk4_advance(config, &state, dissipated, dt),
        };
        // avoid accumulating rounding in the clock
        next.t = t0 + k as f64 * dt;
        if let Err(BeamError::Divergence { mode, time }) = check_finite(&next) {
            record.divergence = Some(Divergence { mode, time });
            break;
        }
        state = next;
        dissipated = q;
        if k % settings.stride == 0 || k == steps {
            record
                .samples
                .push(make_sample(config, state.clone(), dissipated, observers));
        }
    }
    Ok(record)
}
