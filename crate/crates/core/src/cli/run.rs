//! Subcommand drivers. Each writes its CSVs plus one metadata sidecar into
//! the output directory.

use std::fmt;
use std::fs;
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use crate::attractor::{
    attractor_regularity_check, box_counting_dimension, dyadic_scales, gradient_structure_check,
    omega_limit_ensemble, stationary_solve, upper_semicontinuity_scan, SamplingParams,
};
use crate::energy::decay_fit;
use crate::error::{BeamError, Result};
use crate::initial::{random_direction, InitialSpec};
use crate::integrator::integrate;
use crate::io::{self, Cell};
use crate::model::{ModelConfig, State};
use crate::norms::{DiagonalNorm, WeakNormSpec};
use crate::stability::{alpha_continuity_scan, holder_exponent_weak, lipschitz_check, stability_inequality_check};

use super::config::ExperimentConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Subcommand {
    Simulate,
    Hypotheses,
    Decay,
    Stability,
    AlphaScan,
    Stationary,
    Attractor,
    UscScan,
    Holder,
}

pub const SUBCOMMAND_NAMES: &[&str] = &[
    "simulate",
    "hypotheses",
    "decay",
    "stability",
    "alpha-scan",
    "stationary",
    "attractor",
    "usc-scan",
    "holder",
];

impl Subcommand {
    const ALL: [Subcommand; 9] = [
        Subcommand::Simulate,
        Subcommand::Hypotheses,
        Subcommand::Decay,
        Subcommand::Stability,
        Subcommand::AlphaScan,
        Subcommand::Stationary,
        Subcommand::Attractor,
        Subcommand::UscScan,
        Subcommand::Holder,
    ];

    pub fn name(&self) -> &'static str {
        SUBCOMMAND_NAMES[Self::ALL.iter().position(|s| s == self).expect("listed")]
    }
}

impl fmt::Display for Subcommand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Subcommand {
    type Err = BeamError;
    fn from_str(s: &str) -> Result<Self> {
        SUBCOMMAND_NAMES
            .iter()
            .position(|n| *n == s)
            .map(|i| Self::ALL[i])
            .ok_or_else(|| {
                BeamError::invalid(format!("unknown subcommand '{s}' (expected one of {})", SUBCOMMAND_NAMES.join(", ")))
            })
    }
}

/// What a successful run produced.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    /// `Some(false)` when the subcommand's claim check failed.
    pub claim: Option<bool>,
    pub message: String,
    pub files: Vec<String>,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        match self.claim {
            Some(false) => 2,
            _ => 0,
        }
    }
}

pub fn version() -> String {
    format!(
        "{} ({})",
        env!("CARGO_PKG_VERSION"),
        option_env!("BEAM_ATTRACTOR_GIT").unwrap_or("unknown")
    )
}

struct Ctx<'a> {
    cfg: &'a ExperimentConfig,
    model: ModelConfig,
    out: &'a Path,
    files: Vec<String>,
}

impl Ctx<'_> {
    fn table(&mut self, name: &str, header: &[&str], rows: &[Vec<Cell>]) -> Result<()> {
        io::write_table(&self.out.join(name), header, rows)?;
        self.files.push(name.into());
        Ok(())
    }

    fn states(&self) -> Result<Vec<State>> {
        self.cfg.initial_states(self.model.basis())
    }

    fn first_state(&self) -> Result<State> {
        Ok(self.states()?.swap_remove(0))
    }

    fn seed(&self, k: usize) -> u64 {
        match self.cfg.initial {
            InitialSpec::Random { seed, .. } => seed.wrapping_add(k as u64),
            _ => k as u64,
        }
    }

    fn sampling(&self, model: &ModelConfig) -> SamplingParams {
        SamplingParams {
            t_transient: self.cfg.t_transient,
            t_sample: self.cfg.t_sample,
            dt: self.cfg.resolve_dt(model),
            stride: self.cfg.sample_stride,
            scheme: self.cfg.scheme_for(model),
        }
    }
}

/// Run one subcommand, writing its outputs and `metadata.txt` into `out`.
///
/// `config_path` is only recorded in the metadata.
pub fn run_subcommand(
    sub: Subcommand,
    cfg: &ExperimentConfig,
    out: &Path,
    config_path: Option<&Path>,
) -> Result<RunOutcome> {
    let start = Instant::now();
    fs::create_dir_all(out)?;
    let model = cfg.model()?;
    let mut ctx = Ctx {
        cfg,
        model,
        out,
        files: Vec::new(),
    };
    let result = dispatch(sub, &mut ctx);

    let model = &ctx.model;
    let mut meta = vec![
        ("version".to_string(), version()),
        ("subcommand".to_string(), sub.to_string()),
        (
            "config_file".to_string(),
            config_path.map_or("-".into(), |p| p.display().to_string()),
        ),
        ("scheme".to_string(), cfg.scheme_for(model).to_string()),
        ("dt".to_string(), io::fmt_csv(cfg.resolve_dt(model))),
        ("threads".to_string(), rayon::current_num_threads().to_string()),
        ("wall_time_s".to_string(), format!("{:.3}", start.elapsed().as_secs_f64())),
        ("outputs".to_string(), ctx.files.join(" ")),
    ];
    if let Some(r) = &cfg.restart {
        meta.push(("restart_file".to_string(), r.clone()));
    }
    meta.push((
        "status".to_string(),
        match &result {
            Ok(o) if o.claim == Some(false) => "claim_failed".into(),
            Ok(_) => "ok".into(),
            Err(e) => format!("error ({})", e.kind()),
        },
    ));
    io::write_metadata(out, &meta, &cfg.emit())?;

    result.map(|mut o| {
        o.files = ctx.files;
        o
    })
}

fn dispatch(sub: Subcommand, ctx: &mut Ctx<'_>) -> Result<RunOutcome> {
    match sub {
        Subcommand::Simulate => simulate(ctx),
        Subcommand::Hypotheses => hypotheses(ctx),
        Subcommand::Decay => decay(ctx),
        Subcommand::Stability => stability(ctx),
        Subcommand::AlphaScan => alpha_scan(ctx),
        Subcommand::Stationary => stationary(ctx),
        Subcommand::Attractor => attractor(ctx),
        Subcommand::UscScan => usc_scan(ctx),
        Subcommand::Holder => holder(ctx),
    }
}

fn outcome(claim: Option<bool>, message: String) -> RunOutcome {
    RunOutcome {
        claim,
        message,
        files: Vec::new(),
    }
}

fn simulate(ctx: &mut Ctx<'_>) -> Result<RunOutcome> {
    let z0 = ctx.first_state()?;
    let rec = integrate(&ctx.model, &z0, &ctx.cfg.settings(&ctx.model), &[])?;
    io::write_record(&ctx.out.join("record.csv"), &rec)?;
    ctx.files.push("record.csv".into());
    let rec = rec.into_result()?;
    Ok(outcome(
        None,
        format!("{} samples, {} steps of dt = {:e}", rec.len(), rec.steps, rec.dt),
    ))
}

fn hypotheses(ctx: &mut Ctx<'_>) -> Result<RunOutcome> {
    let cfg = ctx.cfg;
    let report = ctx.model.verify_hypotheses(cfg.tau_max, cfg.u_max, cfg.samples)?;
    let rows: Vec<Vec<Cell>> = report
        .checks
        .iter()
        .map(|c| {
            let (at, lhs, rhs) = c
                .first_violation
                .as_ref()
                .map_or((f64::NAN, f64::NAN, f64::NAN), |v| (v.at, v.lhs, v.rhs));
            vec![c.name.into(), c.passed.into(), at.into(), lhs.into(), rhs.into(), c.statement.into()]
        })
        .collect();
    ctx.table(
        "hypotheses.csv",
        &["name", "passed", "violation_at", "lhs", "rhs", "statement"],
        &rows,
    )?;
    Ok(outcome(Some(report.all_passed()), report.to_string()))
}

fn decay(ctx: &mut Ctx<'_>) -> Result<RunOutcome> {
    let settings = ctx.cfg.settings(&ctx.model);
    let mut rows = Vec::new();
    let mut ok = true;
    for (k, z0) in ctx.states()?.iter().enumerate() {
        let rec = integrate(&ctx.model, z0, &settings, &[])?.into_result()?;
        let fit = decay_fit(&rec)?;
        let n = rec.len();
        let radius = 1.1 * fit.k2.sqrt();
        let tail_max = rec.samples[n - n / 4..]
            .iter()
            .map(|s| s.phase_norm)
            .fold(0.0, f64::max);
        let entered = tail_max <= radius;
        ok &= fit.delta > 0.0 && fit.k2.is_finite() && entered;
        rows.push(vec![
            k.into(),
            fit.k1.into(),
            fit.delta.into(),
            fit.k2.into(),
            fit.rms.into(),
            tail_max.into(),
            radius.into(),
            entered.into(),
        ]);
    }
    ctx.table(
        "decay.csv",
        &["member", "k1", "delta", "k2", "rms", "tail_max_norm", "ball_radius", "entered"],
        &rows,
    )?;
    Ok(outcome(Some(ok), format!("{} trajectories fitted", rows.len())))
}

fn stability(ctx: &mut Ctx<'_>) -> Result<RunOutcome> {
    let settings = ctx.cfg.settings(&ctx.model);
    let basis = ctx.model.basis_arc().clone();
    let norm = DiagonalNorm::phase(&ctx.model);
    let mut rows = Vec::new();
    let mut required = Vec::new();
    let mut ok = true;
    for (k, za) in ctx.states()?.iter().enumerate() {
        let dir = random_direction(&basis, ctx.seed(k));
        let scale = ctx.cfg.perturbation / norm.norm(&dir);
        let zb = State::new(za.y.axpy(scale, &dir.y), za.v.axpy(scale, &dir.v), za.t);
        let lip = lipschitz_check(&ctx.model, za, &zb, &settings)?;
        let rep = stability_inequality_check(&ctx.model, za, &zb, &settings)?;
        let (c, d) = rep.best.unwrap_or((f64::NAN, f64::NAN));
        ok &= rep.feasible() && lip.sup_ratio.is_finite();
        rows.push(vec![
            k.into(),
            lip.sup_ratio.into(),
            lip.fitted_c.into(),
            rep.feasible().into(),
            c.into(),
            d.into(),
        ]);
        for (delta, need) in &rep.required_c {
            required.push(vec![k.into(), (*delta).into(), (*need).into()]);
        }
    }
    ctx.table(
        "stability.csv",
        &["pair", "sup_ratio", "fitted_c", "feasible", "best_c", "best_delta"],
        &rows,
    )?;
    ctx.table("stability_required.csv", &["pair", "delta", "required_c"], &required)?;
    Ok(outcome(Some(ok), format!("{} pairs checked", rows.len())))
}

fn alpha_scan(ctx: &mut Ctx<'_>) -> Result<RunOutcome> {
    let z0 = ctx.first_state()?;
    // one step size for every alpha: the alpha = 0 system is the stiffest
    let base = ctx.model.with_alpha(0.0)?;
    let settings = ctx.cfg.settings(&base);
    let rep = alpha_continuity_scan(&ctx.model, &z0, &ctx.cfg.alphas, &settings)?;
    let rows: Vec<Vec<Cell>> = rep.entries.iter().map(|(a, d)| vec![(*a).into(), (*d).into()]).collect();
    ctx.table("alpha_scan.csv", &["alpha", "distance"], &rows)?;
    let rho = rep
        .rho
        .ok_or_else(|| BeamError::InsufficientData("no positive alpha with a nonzero distance".into()))?;
    let monotone = rep.strictly_monotone();
    ctx.table(
        "alpha_rate.csv",
        &["rho", "c", "strictly_monotone"],
        &[vec![rho.into(), rep.c.unwrap_or(f64::NAN).into(), monotone.into()]],
    )?;
    let ok = (ctx.cfg.rho_min..=ctx.cfg.rho_max).contains(&rho) && monotone;
    Ok(outcome(Some(ok), format!("rho = {rho:.4}, monotone = {monotone}")))
}

fn stationary(ctx: &mut Ctx<'_>) -> Result<RunOutcome> {
    let guess = ctx.first_state()?.y;
    let sol = stationary_solve(&ctx.model, &guess, ctx.cfg.tol, ctx.cfg.max_iter)?;
    let g = ctx.model.stationary_residual(&sol.y)?;
    let rows: Vec<Vec<Cell>> = (0..sol.y.len())
        .map(|j| vec![(j + 1).into(), sol.y[j].into(), g[j].into()])
        .collect();
    ctx.table("stationary.csv", &["mode", "y", "residual"], &rows)?;
    ctx.table(
        "stationary_summary.csv",
        &["iterations", "residual_norm"],
        &[vec![sol.iterations.into(), sol.residual.into()]],
    )?;
    Ok(outcome(
        None,
        format!("converged in {} iterations, residual {:e}", sol.iterations, sol.residual),
    ))
}

fn attractor(ctx: &mut Ctx<'_>) -> Result<RunOutcome> {
    let cfg = ctx.cfg;
    let states = ctx.states()?;
    let grad = gradient_structure_check(&ctx.model, &states[0], &cfg.settings(&ctx.model))?;
    let reference = stationary_solve(&ctx.model, &grad.terminal_state.y, cfg.tol, cfg.max_iter).ok();
    let gap = reference.as_ref().map_or(f64::NAN, |r| {
        DiagonalNorm::phase(&ctx.model).distance(&grad.terminal_state, &State::at_rest(r.y.clone()))
    });
    let passed = grad.passes(cfg.velocity_tol, cfg.residual_tol);
    ctx.table(
        "gradient.csv",
        &[
            "max_energy_increase",
            "energy_monotone",
            "terminal_velocity",
            "terminal_residual",
            "distance_to_stationary",
            "passed",
        ],
        &[vec![
            grad.max_energy_increase.into(),
            grad.energy_monotone.into(),
            grad.terminal_velocity.into(),
            grad.terminal_residual.into(),
            gap.into(),
            passed.into(),
        ]],
    )?;

    let cloud = omega_limit_ensemble(&ctx.model, &states, &ctx.sampling(&ctx.model))?;
    io::write_cloud(&ctx.out.join("cloud.csv"), &cloud)?;
    ctx.files.push("cloud.csv".into());
    let reg = attractor_regularity_check(&ctx.model, &cloud)?;
    let boxes = box_counting_dimension(
        &cloud.project_displacement(cfg.box_dim)?,
        &dyadic_scales(cfg.eps_levels.0, cfg.eps_levels.1),
    )?;
    ctx.table(
        "box_counts.csv",
        &["eps", "count"],
        &boxes.counts.iter().map(|(e, n)| vec![(*e).into(), (*n).into()]).collect::<Vec<_>>(),
    )?;
    ctx.table(
        "attractor_summary.csv",
        &["points", "sup_Au", "sup_A_half_v", "sup_second_energy", "box_dimension"],
        &[vec![
            cloud.len().into(),
            reg.sup_au.into(),
            reg.sup_half_v.into(),
            reg.sup_second_energy.into(),
            boxes.dimension.into(),
        ]],
    )?;
    Ok(outcome(
        Some(passed),
        format!(
            "terminal |v| = {:e}, residual = {:e}, cloud of {} points",
            grad.terminal_velocity,
            grad.terminal_residual,
            cloud.len()
        ),
    ))
}

fn usc_scan(ctx: &mut Ctx<'_>) -> Result<RunOutcome> {
    let states = ctx.states()?;
    let base = ctx.model.with_alpha(0.0)?;
    let rep = upper_semicontinuity_scan(&ctx.model, &ctx.cfg.alphas, &states, &ctx.sampling(&base))?;
    let rows: Vec<Vec<Cell>> = rep.entries.iter().map(|(a, h)| vec![(*a).into(), (*h).into()]).collect();
    ctx.table("usc.csv", &["alpha", "hausdorff_semidistance"], &rows)?;
    let last = rep.final_value().unwrap_or(0.0);
    let ok = rep.decreasing() && last <= ctx.cfg.usc_threshold;
    Ok(outcome(
        Some(ok),
        format!("final h = {last:e}, decreasing = {}", rep.decreasing()),
    ))
}

fn holder(ctx: &mut Ctx<'_>) -> Result<RunOutcome> {
    let z0 = ctx.first_state()?;
    let rec = integrate(&ctx.model, &z0, &ctx.cfg.settings(&ctx.model), &[])?.into_result()?;
    let est = holder_exponent_weak(&rec, WeakNormSpec::new(ctx.cfg.weak_s)?)?;
    let rows: Vec<Vec<Cell>> = est
        .increments
        .iter()
        .map(|(t, d)| vec![(*t).into(), (*d).into()])
        .collect();
    ctx.table("holder.csv", &["tau", "sup_increment"], &rows)?;
    ctx.table(
        "holder_summary.csv",
        &["s", "exponent"],
        &[vec![ctx.cfg.weak_s.into(), est.exponent.into()]],
    )?;
    Ok(outcome(
        Some(est.exponent >= ctx.cfg.holder_min),
        format!("Hölder exponent {:.4}", est.exponent),
    ))
}

/// Machine-readable error line for standard error.
pub fn error_line(sub: &str, kind: &str, message: &str) -> String {
    serde_json::json!({
        "status": "error",
        "subcommand": sub,
        "kind": kind,
        "message": message,
    })
    .to_string()
}

/// Read the config, run, and map the result to an exit code
/// (0 ok, 2 claim failure, 1 runtime error), reporting failures on stderr.
pub fn execute(sub: &str, config_path: &Path, out: &Path) -> i32 {
    let run = || -> Result<RunOutcome> {
        let sub: Subcommand = sub.parse()?;
        let text = fs::read_to_string(config_path)
            .map_err(|e| BeamError::Io(format!("{}: {e}", config_path.display())))?;
        let cfg = ExperimentConfig::parse(&text)?;
        run_subcommand(sub, &cfg, out, Some(config_path))
    };
    match run() {
        Ok(o) => {
            log::info!("{sub}: {}", o.message.trim_end());
            if o.exit_code() == 2 {
                eprintln!(
                    "{}",
                    serde_json::json!({
                        "status": "claim_failed",
                        "subcommand": sub,
                        "kind": "claim",
                        "message": o.message.trim_end(),
                    })
                );
            }
            o.exit_code()
        }
        Err(e) => {
            eprintln!("{}", error_line(sub, e.kind(), &e.to_string()));
            1
        }
    }
}

/// Cap the global worker pool from `BEAM_ATTRACTOR_THREADS`.
pub fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("BEAM_ATTRACTOR_THREADS") {
        let n: usize = v
            .trim()
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| BeamError::invalid(format!("BEAM_ATTRACTOR_THREADS must be a positive integer, got '{v}'")))?;
        // fails only if the pool was already built, which keeps the earlier cap
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}
