#![allow(dead_code)]

use std::f64::consts::PI;
use std::sync::Arc;

use beam_attractor::model::{Affine, ConstitutiveFunctions, HypothesisConstants, ModelConfig, OddCubic};
use beam_attractor::spectral::{ModalVector, SpectralBasis};

pub fn basis(m: usize) -> Arc<SpectralBasis> {
    Arc::new(SpectralBasis::new(PI, m).unwrap())
}

pub fn named(instance: &str, alpha: f64, m: usize, forcing: &[f64]) -> ModelConfig {
    let mut h = forcing.to_vec();
    h.resize(m, 0.0);
    ModelConfig::new(
        alpha,
        1.0,
        1.0,
        basis(m),
        ConstitutiveFunctions::named(instance).unwrap(),
        ModalVector::from_vec(h),
    )
    .unwrap()
}

pub fn custom(tension: Affine, damping: Affine, source: OddCubic) -> ConstitutiveFunctions {
    ConstitutiveFunctions {
        tension,
        damping,
        source,
        constants: HypothesisConstants::default(),
    }
}

/// Adaptive Simpson on 64 pre-split panels.
pub fn quad(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (flm, frm) = (f(0.5 * (a + m)), f(0.5 * (m + b)));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            return left + right + (left + right - whole) / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1) + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let panels = 64;
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|k| {
            let (lo, hi) = (a + k as f64 * h, a + (k + 1) as f64 * h);
            let (fa, fm, fb) = (f(lo), f(0.5 * (lo + hi)), f(hi));
            rec(f, lo, hi, fa, fm, fb, h / 6.0 * (fa + 4.0 * fm + fb), tol / panels as f64, 40)
        })
        .sum()
}

/// `ω_j(x)` on `[0, π]`.
pub fn mode(j: usize, x: f64) -> f64 {
    (2.0 / PI).sqrt() * (j as f64 * x).sin()
}

/// Closed form of `mass·ÿ + ν ẏ + k y = 0`, `y(0) = 1`, `ẏ(0) = 0` (underdamped).
pub fn damped_oscillator(mass: f64, nu: f64, k: f64, t: f64) -> (f64, f64) {
    let g = nu / (2.0 * mass);
    let wd = (k / mass - g * g).sqrt();
    let (s, c) = (wd * t).sin_cos();
    let ex = (-g * t).exp();
    (ex * (c + g / wd * s), -ex * (g * g + wd * wd) / wd * s)
}
