//! `key = value` experiment files.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{BeamError, Result};
use crate::initial::{random_state, InitialSpec};
use crate::integrator::{auto_dt, rk4_stability_bound, IntegrationSettings, Scheme};
use crate::model::{
    Affine, ConstitutiveFunctions, HypothesisConstants, ModelConfig, OddCubic, State, INSTANCE_NAMES,
};
use crate::spectral::{ModalVector, SpectralBasis};

/// Shortest decimal text that parses back to the same `f64`.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DtSpec {
    /// Half the `rk4` stability bound of the stiffest mode.
    Auto,
    Fixed(f64),
}

/// Parsed and validated experiment description.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// Built-in instance name; `None` for inline constitutive parameters.
    pub instance: Option<String>,
    pub constitutive: ConstitutiveFunctions,
    pub alpha: f64,
    pub theta: f64,
    pub theta_prime: f64,
    pub length: f64,
    pub modes: usize,
    pub t_final: f64,
    pub dt: DtSpec,
    pub stride: usize,
    /// `None` picks the default for the mode count.
    pub scheme: Option<Scheme>,
    pub initial: InitialSpec,
    /// Leading modal coefficients of `h`; trailing zeros dropped.
    pub forcing: Vec<f64>,
    /// Number of initial states; member `k` of `random:seed:r` uses seed `seed + k`.
    pub ensemble: usize,
    /// Record file whose last row replaces `initial`.
    pub restart: Option<String>,

    pub tau_max: f64,
    pub u_max: f64,
    pub samples: usize,
    pub perturbation: f64,
    pub alphas: Vec<f64>,
    pub rho_min: f64,
    pub rho_max: f64,
    pub tol: f64,
    pub max_iter: usize,
    pub t_transient: f64,
    pub t_sample: f64,
    pub sample_stride: usize,
    pub box_dim: usize,
    /// Box sizes `2^{−lo} .. 2^{−hi}`.
    pub eps_levels: (i32, i32),
    pub velocity_tol: f64,
    pub residual_tol: f64,
    pub usc_threshold: f64,
    pub weak_s: f64,
    pub holder_min: f64,
}

const REQUIRED: &[&str] = &["alpha", "m", "L", "T"];

const INLINE_KEYS: &[&str] = &[
    "tension_c0",
    "tension_c1",
    "damping_c0",
    "damping_c1",
    "source_linear",
    "source_cubic",
    "sigma1",
    "p",
    "l0",
    "l1",
    "l2",
];

const OTHER_KEYS: &[&str] = &[
    "instance",
    "alpha",
    "theta",
    "theta_prime",
    "L",
    "m",
    "T",
    "dt",
    "stride",
    "scheme",
    "initial",
    "forcing",
    "ensemble",
    "restart",
    "tau_max",
    "u_max",
    "samples",
    "perturbation",
    "alphas",
    "rho_min",
    "rho_max",
    "tol",
    "max_iter",
    "t_transient",
    "t_sample",
    "sample_stride",
    "box_dim",
    "eps_levels",
    "velocity_tol",
    "residual_tol",
    "usc_threshold",
    "weak_s",
    "holder_min",
];

struct Entries {
    map: BTreeMap<String, (usize, String)>,
}

fn err(line: usize, message: impl Into<String>) -> BeamError {
    BeamError::Config {
        line,
        message: message.into(),
    }
}

impl Entries {
    fn line(&self, key: &str) -> usize {
        self.map.get(key).map_or(0, |e| e.0)
    }

    fn raw(&self, key: &str) -> Option<(usize, &str)> {
        self.map.get(key).map(|(l, v)| (*l, v.as_str()))
    }

    fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        match self.raw(key) {
            None => Ok(default),
            Some((l, v)) => parse_real(v).ok_or_else(|| err(l, format!("{key}: expected a finite number, got '{v}'"))),
        }
    }

    fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        match self.raw(key) {
            None => Ok(default),
            Some((l, v)) => v
                .parse()
                .map_err(|_| err(l, format!("{key}: expected a non-negative integer, got '{v}'"))),
        }
    }

    fn list_or(&self, key: &str, default: &[f64]) -> Result<Vec<f64>> {
        match self.raw(key) {
            None => Ok(default.to_vec()),
            Some((l, v)) => split_list(v)
                .map(|s| parse_real(s).ok_or_else(|| err(l, format!("{key}: cannot parse '{s}' as a number"))))
                .collect(),
        }
    }
}

fn split_list(v: &str) -> impl Iterator<Item = &str> {
    v.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty())
}

fn parse_real(v: &str) -> Option<f64> {
    v.parse::<f64>().ok().filter(|x| x.is_finite())
}

/// `pi`, `k*pi`, `pi/k`, or a plain number.
fn parse_length(v: &str) -> Option<f64> {
    let v = v.replace(' ', "");
    if v == "pi" {
        return Some(PI);
    }
    if let Some(k) = v.strip_suffix("*pi") {
        return parse_real(k).map(|k| k * PI);
    }
    if let Some(k) = v.strip_prefix("pi/") {
        return parse_real(k).filter(|k| *k != 0.0).map(|k| PI / k);
    }
    parse_real(&v)
}

fn read_entries(text: &str) -> Result<Entries> {
    let mut map = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (k, v) = content
            .split_once('=')
            .ok_or_else(|| err(line, format!("expected 'key = value', got '{content}'")))?;
        let (k, v) = (k.trim(), v.trim().trim_matches('"').trim());
        if !OTHER_KEYS.contains(&k) && !INLINE_KEYS.contains(&k) {
            return Err(err(line, format!("unknown key '{k}'")));
        }
        if let Some((first, _)) = map.insert(k.to_string(), (line, v.to_string())) {
            return Err(err(line, format!("duplicate key '{k}' (first set on line {first})")));
        }
    }
    Ok(Entries { map })
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let e = read_entries(text)?;

        let mut missing: Vec<&str> = REQUIRED.iter().copied().filter(|k| !e.map.contains_key(*k)).collect();
        let inline_present = INLINE_KEYS.iter().any(|k| e.map.contains_key(*k));
        if !e.map.contains_key("instance") && !inline_present {
            missing.push("instance (or inline tension_c0/damping_c0/...)");
        }
        if !missing.is_empty() {
            return Err(err(0, format!("missing required keys: {}", missing.join(", "))));
        }

        let (instance, constitutive) = match e.raw("instance") {
            Some((l, name)) => {
                if inline_present {
                    return Err(err(l, "instance cannot be combined with inline constitutive keys"));
                }
                let c = ConstitutiveFunctions::named(name).ok_or_else(|| {
                    err(l, format!("unknown instance '{name}' (known: {})", INSTANCE_NAMES.join(", ")))
                })?;
                (Some(name.to_string()), c)
            }
            None => {
                for k in ["tension_c0", "damping_c0"] {
                    if !e.map.contains_key(k) {
                        return Err(err(0, format!("inline constitutive parameters need '{k}'")));
                    }
                }
                let d = HypothesisConstants::default();
                let c = ConstitutiveFunctions {
                    tension: Affine::new(e.f64_or("tension_c0", 0.0)?, e.f64_or("tension_c1", 0.0)?),
                    damping: Affine::new(e.f64_or("damping_c0", 0.0)?, e.f64_or("damping_c1", 0.0)?),
                    source: OddCubic::new(e.f64_or("source_linear", 0.0)?, e.f64_or("source_cubic", 0.0)?),
                    constants: HypothesisConstants {
                        sigma1: e.f64_or("sigma1", d.sigma1)?,
                        p: e.f64_or("p", d.p)?,
                        l0: e.f64_or("l0", d.l0)?,
                        l1: e.f64_or("l1", d.l1)?,
                        l2: e.f64_or("l2", d.l2)?,
                    },
                };
                (None, c)
            }
        };

        let alpha = e.f64_or("alpha", 0.0)?;
        if !(0.0..=1.0).contains(&alpha) {
            return Err(err(e.line("alpha"), format!("alpha = {alpha} violates 0 ≤ α ≤ 1")));
        }
        let theta = e.f64_or("theta", 1.0)?;
        let theta_prime = e.f64_or("theta_prime", 1.0)?;
        if !(0.0..=1.0).contains(&theta) || !(0.0..=1.0).contains(&theta_prime) || theta > theta_prime {
            let l = e.line("theta").max(e.line("theta_prime"));
            return Err(err(
                l,
                format!("theta = {theta}, theta_prime = {theta_prime} violate 0 ≤ θ ≤ θ' ≤ 1"),
            ));
        }
        let (ll, lv) = e.raw("L").expect("required");
        let length = parse_length(lv)
            .filter(|x| *x > 0.0)
            .ok_or_else(|| err(ll, format!("L: expected a positive length (number, pi, k*pi, pi/k), got '{lv}'")))?;
        let modes = e.usize_or("m", 0)?;
        if modes == 0 {
            return Err(err(e.line("m"), "m must be at least 1"));
        }
        let t_final = e.f64_or("T", 0.0)?;
        if t_final < 0.0 {
            return Err(err(e.line("T"), "T must be non-negative"));
        }
        let dt = match e.raw("dt") {
            None | Some((_, "auto")) => DtSpec::Auto,
            Some((l, v)) => DtSpec::Fixed(
                parse_real(v)
                    .filter(|x| *x > 0.0)
                    .ok_or_else(|| err(l, format!("dt: expected a positive number or 'auto', got '{v}'")))?,
            ),
        };
        let stride = e.usize_or("stride", 1)?;
        if stride == 0 {
            return Err(err(e.line("stride"), "stride must be at least 1"));
        }
        let scheme = match e.raw("scheme") {
            None | Some((_, "auto")) => None,
            Some((l, v)) => Some(v.parse().map_err(|x: BeamError| err(l, x.to_string()))?),
        };
        let initial: InitialSpec = match e.raw("initial") {
            None => InitialSpec::Zero,
            Some((l, v)) => v.parse().map_err(|x: BeamError| err(l, x.to_string()))?,
        };
        if let InitialSpec::Mode { k, .. } = initial {
            if k == 0 || k > modes {
                return Err(err(e.line("initial"), format!("mode index {k} outside 1..={modes}")));
            }
        }
        let mut forcing = e.list_or("forcing", &[])?;
        while forcing.last() == Some(&0.0) {
            forcing.pop();
        }
        if forcing.len() > modes {
            return Err(err(e.line("forcing"), format!("forcing has {} coefficients but m = {modes}", forcing.len())));
        }
        let ensemble = e.usize_or("ensemble", 1)?;
        if ensemble == 0 {
            return Err(err(e.line("ensemble"), "ensemble must be at least 1"));
        }
        if ensemble > 1 && !matches!(initial, InitialSpec::Random { .. }) {
            return Err(err(e.line("ensemble"), "ensemble > 1 needs initial = random:seed:radius"));
        }
        let restart = e.raw("restart").map(|(_, v)| v.to_string());

        let positive = |key: &str, default: f64| -> Result<f64> {
            let x = e.f64_or(key, default)?;
            if x > 0.0 {
                Ok(x)
            } else {
                Err(err(e.line(key), format!("{key} must be positive")))
            }
        };
        let tau_max = positive("tau_max", 100.0)?;
        let u_max = positive("u_max", 10.0)?;
        let samples = e.usize_or("samples", 1001)?;
        if samples < 100 {
            return Err(err(e.line("samples"), "samples must be at least 100"));
        }
        let perturbation = positive("perturbation", 1e-4)?;
        let alphas = e.list_or("alphas", &[1e-1, 1e-2, 1e-3, 1e-4])?;
        if alphas.is_empty() || alphas.iter().any(|a| !(0.0..=1.0).contains(a)) {
            return Err(err(e.line("alphas"), "alphas must be a non-empty list inside 0 ≤ α ≤ 1"));
        }
        let rho_min = e.f64_or("rho_min", 0.85)?;
        let rho_max = e.f64_or("rho_max", 1.15)?;
        let tol = positive("tol", 1e-10)?;
        let max_iter = e.usize_or("max_iter", 50)?;
        let t_transient = positive("t_transient", 50.0)?;
        let t_sample = positive("t_sample", 10.0)?;
        let sample_stride = e.usize_or("sample_stride", 100)?;
        if sample_stride == 0 {
            return Err(err(e.line("sample_stride"), "sample_stride must be at least 1"));
        }
        let box_dim = e.usize_or("box_dim", modes.min(3))?;
        if box_dim == 0 || box_dim > 8 || box_dim > modes {
            return Err(err(e.line("box_dim"), format!("box_dim must lie in 1..={}", modes.min(8))));
        }
        let eps_levels = match e.raw("eps_levels") {
            None => (2, 8),
            Some((l, v)) => {
                let ks: Vec<i32> = split_list(v)
                    .map(|s| s.parse().map_err(|_| err(l, format!("eps_levels: cannot parse '{s}'"))))
                    .collect::<Result<_>>()?;
                match ks.as_slice() {
                    [a, b] if b - a >= 3 => (*a, *b),
                    _ => return Err(err(l, "eps_levels needs 'lo hi' with at least 4 dyadic levels")),
                }
            }
        };
        let velocity_tol = positive("velocity_tol", 1e-6)?;
        let residual_tol = positive("residual_tol", 1e-6)?;
        let usc_threshold = positive("usc_threshold", 1e-3)?;
        let weak_s = e.f64_or("weak_s", 1.0)?;
        if !(weak_s > 0.0 && weak_s <= 1.0) {
            return Err(err(e.line("weak_s"), "weak_s must satisfy 0 < s ≤ 1"));
        }
        let holder_min = e.f64_or("holder_min", 0.45)?;

        let cfg = Self {
            instance,
            constitutive,
            alpha,
            theta,
            theta_prime,
            length,
            modes,
            t_final,
            dt,
            stride,
            scheme,
            initial,
            forcing,
            ensemble,
            restart,
            tau_max,
            u_max,
            samples,
            perturbation,
            alphas,
            rho_min,
            rho_max,
            tol,
            max_iter,
            t_transient,
            t_sample,
            sample_stride,
            box_dim,
            eps_levels,
            velocity_tol,
            residual_tol,
            usc_threshold,
            weak_s,
            holder_min,
        };
        cfg.model().map_err(|x| err(0, x.to_string()))?;
        Ok(cfg)
    }

    /// Canonical text: every key, defaults filled in, fixed order.
    pub fn emit(&self) -> String {
        let mut out = Vec::new();
        let mut kv = |k: &str, v: String| out.push(format!("{k} = {v}"));
        match &self.instance {
            Some(name) => kv("instance", name.clone()),
            None => {
                let c = &self.constitutive;
                kv("tension_c0", fmt_f64(c.tension.c0));
                kv("tension_c1", fmt_f64(c.tension.c1));
                kv("damping_c0", fmt_f64(c.damping.c0));
                kv("damping_c1", fmt_f64(c.damping.c1));
                kv("source_linear", fmt_f64(c.source.linear));
                kv("source_cubic", fmt_f64(c.source.cubic));
                kv("sigma1", fmt_f64(c.constants.sigma1));
                kv("p", fmt_f64(c.constants.p));
                kv("l0", fmt_f64(c.constants.l0));
                kv("l1", fmt_f64(c.constants.l1));
                kv("l2", fmt_f64(c.constants.l2));
            }
        }
        let list = |xs: &[f64]| xs.iter().map(|x| fmt_f64(*x)).collect::<Vec<_>>().join(" ");
        kv("alpha", fmt_f64(self.alpha));
        kv("theta", fmt_f64(self.theta));
        kv("theta_prime", fmt_f64(self.theta_prime));
        kv("L", fmt_f64(self.length));
        kv("m", self.modes.to_string());
        kv("T", fmt_f64(self.t_final));
        kv(
            "dt",
            match self.dt {
                DtSpec::Auto => "auto".into(),
                DtSpec::Fixed(x) => fmt_f64(x),
            },
        );
        kv("stride", self.stride.to_string());
        kv("scheme", self.scheme.map_or("auto".into(), |s| s.to_string()));
        kv("initial", self.initial.to_string());
        kv("forcing", if self.forcing.is_empty() { "0".into() } else { list(&self.forcing) });
        kv("ensemble", self.ensemble.to_string());
        if let Some(r) = &self.restart {
            kv("restart", r.clone());
        }
        kv("tau_max", fmt_f64(self.tau_max));
        kv("u_max", fmt_f64(self.u_max));
        kv("samples", self.samples.to_string());
        kv("perturbation", fmt_f64(self.perturbation));
        kv("alphas", list(&self.alphas));
        kv("rho_min", fmt_f64(self.rho_min));
        kv("rho_max", fmt_f64(self.rho_max));
        kv("tol", fmt_f64(self.tol));
        kv("max_iter", self.max_iter.to_string());
        kv("t_transient", fmt_f64(self.t_transient));
        kv("t_sample", fmt_f64(self.t_sample));
        kv("sample_stride", self.sample_stride.to_string());
        kv("box_dim", self.box_dim.to_string());
        kv("eps_levels", format!("{} {}", self.eps_levels.0, self.eps_levels.1));
        kv("velocity_tol", fmt_f64(self.velocity_tol));
        kv("residual_tol", fmt_f64(self.residual_tol));
        kv("usc_threshold", fmt_f64(self.usc_threshold));
        kv("weak_s", fmt_f64(self.weak_s));
        kv("holder_min", fmt_f64(self.holder_min));
        let mut s = out.join("\n");
        s.push('\n');
        s
    }

    pub fn basis(&self) -> Result<Arc<SpectralBasis>> {
        Ok(Arc::new(SpectralBasis::new(self.length, self.modes)?))
    }

    pub fn model(&self) -> Result<ModelConfig> {
        let basis = self.basis()?;
        let mut h = self.forcing.clone();
        h.resize(self.modes, 0.0);
        ModelConfig::new(
            self.alpha,
            self.theta,
            self.theta_prime,
            basis,
            self.constitutive,
            ModalVector::from_vec(h),
        )
    }

    pub fn scheme_for(&self, model: &ModelConfig) -> Scheme {
        self.scheme.unwrap_or_else(|| Scheme::default_for(model.modes()))
    }

    /// Time step for `model`; `auto` is logged together with the bound it came from.
    pub fn resolve_dt(&self, model: &ModelConfig) -> f64 {
        match self.dt {
            DtSpec::Fixed(x) => x,
            DtSpec::Auto => {
                let dt = auto_dt(model);
                log::info!(
                    "dt = auto resolves to {dt:e} (rk4 stability bound {:e})",
                    rk4_stability_bound(model)
                );
                dt
            }
        }
    }

    pub fn settings(&self, model: &ModelConfig) -> IntegrationSettings {
        IntegrationSettings::new(self.t_final, self.resolve_dt(model), self.stride, self.scheme_for(model))
    }

    /// Initial state(s): the restart file's last row, or the `initial` spec
    /// expanded over the ensemble.
    pub fn initial_states(&self, basis: &SpectralBasis) -> Result<Vec<State>> {
        if let Some(path) = &self.restart {
            let s = crate::io::read_restart_state(std::path::Path::new(path))?;
            basis.check(&s.y)?;
            return Ok(vec![s]);
        }
        match self.initial {
            InitialSpec::Random { seed, radius } => Ok((0..self.ensemble as u64)
                .map(|k| random_state(basis, seed.wrapping_add(k), radius))
                .collect()),
            spec => Ok(vec![spec.build(basis)?]),
        }
    }
}
