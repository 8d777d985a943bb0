//! Sampled verification of the structural hypotheses on `M`, `N` and `f`.
//!
//! The hypotheses quantify over all of `[0, ∞)` or `ℝ`; here they are checked
//! on uniform grids over the range a simulation actually visits.

use std::fmt;

use super::ModelConfig;
use crate::error::{BeamError, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    /// Sample point (`τ` or `u`).
    pub at: f64,
    pub lhs: f64,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisCheck {
    pub name: &'static str,
    pub statement: &'static str,
    pub passed: bool,
    pub first_violation: Option<Violation>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisReport {
    pub checks: Vec<HypothesisCheck>,
    pub tau_max: f64,
    pub u_max: f64,
    pub samples: usize,
}

impl HypothesisReport {
    pub fn all_passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn get(&self, name: &str) -> Option<&HypothesisCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for HypothesisReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            write!(f, "{:<5} {:<4} {}", c.name, if c.passed { "pass" } else { "FAIL" }, c.statement)?;
            if let Some(v) = &c.first_violation {
                write!(f, "  [first violation at {:.6e}: lhs {:.6e} > rhs {:.6e}]", v.at, v.lhs, v.rhs)?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

// lhs ≤ rhs up to rounding
fn holds(lhs: f64, rhs: f64) -> bool {
    lhs <= rhs + 1e-12 * (1.0 + lhs.abs().max(rhs.abs()))
}

fn scan(
    name: &'static str,
    statement: &'static str,
    points: impl Iterator<Item = f64>,
    sides: impl Fn(f64) -> (f64, f64),
) -> HypothesisCheck {
    let first_violation = points
        .map(|x| {
            let (lhs, rhs) = sides(x);
            (x, lhs, rhs)
        })
        .find(|&(_, lhs, rhs)| !holds(lhs, rhs))
        .map(|(at, lhs, rhs)| Violation { at, lhs, rhs });
    HypothesisCheck {
        name,
        statement,
        passed: first_violation.is_none(),
        first_violation,
    }
}

pub(super) fn verify(
    config: &ModelConfig,
    tau_max: f64,
    u_max: f64,
    samples: usize,
) -> Result<HypothesisReport> {
    if !(tau_max > 0.0 && u_max > 0.0) {
        return Err(BeamError::invalid("tau_max and u_max must be positive"));
    }
    if samples < 100 {
        return Err(BeamError::invalid("at least 100 samples are required"));
    }
    let c = *config.constitutive();
    let k = c.constants;
    let lambda1 = config.basis().lambda1();
    let taus = move || (0..samples).map(move |i| tau_max * i as f64 / (samples - 1) as f64);
    let us = move || (0..samples).map(move |i| -u_max + 2.0 * u_max * i as f64 / (samples - 1) as f64);

    let mut checks = Vec::with_capacity(7);

    // (H1) as two one-sided scans; N > 0 is written as −N ≤ −tiny
    let m_sign = scan("H1", "M(τ) ≥ 0", taus(), |t| (-c.tension.value(t), 0.0));
    let n_sign = taus()
        .map(|t| (t, c.damping.value(t)))
        .find(|&(_, n)| n <= 0.0)
        .map(|(at, n)| Violation { at, lhs: -n, rhs: 0.0 });
    let h1_violation = m_sign.first_violation.clone().or(n_sign);
    checks.push(HypothesisCheck {
        name: "H1",
        statement: "M(τ) ≥ 0 and N(τ) > 0",
        passed: h1_violation.is_none(),
        first_violation: h1_violation,
    });

    let declared = k.sigma1 > 0.0 && k.p > 0.0 && c.source.value(0.0) == 0.0;
    let mut h2 = scan("H2", "|f'(u)| ≤ σ₁(1 + |u|^{p/2}), f(0) = 0", us(), |u| {
        (
            c.source.derivative(u).abs(),
            k.sigma1 * (1.0 + u.abs().powf(k.p / 2.0)),
        )
    });
    if !declared && h2.passed {
        h2.passed = false;
        h2.first_violation = Some(Violation {
            at: 0.0,
            lhs: c.source.value(0.0),
            rhs: 0.0,
        });
    }
    checks.push(h2);

    checks.push(scan("F0", "f̃(u) ≥ −(λ₁/8)u² − l₀", us(), |u| {
        (-c.source.antiderivative(u), lambda1 / 8.0 * u * u + k.l0)
    }));

    checks.push(scan("H3", "f̃(u) ≤ f(u)u + (λ₁/8)u² + l₁", us(), |u| {
        (
            c.source.antiderivative(u),
            c.source.value(u) * u + lambda1 / 8.0 * u * u + k.l1,
        )
    }));

    checks.push(scan("H4", "M̃(τ) ≤ 2M(τ)τ + (λ₁^{1/2}/4)τ + 2l₂", taus(), |t| {
        (
            c.tension.antiderivative(t),
            2.0 * c.tension.value(t) * t + lambda1.sqrt() / 4.0 * t + 2.0 * k.l2,
        )
    }));

    Ok(HypothesisReport {
        checks,
        tau_max,
        u_max,
        samples,
    })
}
