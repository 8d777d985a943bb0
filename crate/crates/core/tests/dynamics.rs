mod common;

use beam_attractor::energy::{
    decay_fit, energy, energy_identity_residual, energy_is_monotone, energy_lower_bound_slack, perturbed_energy,
    perturbation_threshold, phase_norm_sq, second_energy_growth_rate, DECAY_FLOOR,
};
use beam_attractor::initial::random_state;
use beam_attractor::integrator::{auto_dt, integrate, rk4_stability_bound, IntegrationSettings, Scheme};
use beam_attractor::model::{Affine, ModelConfig, OddCubic, State};
use beam_attractor::spectral::ModalVector;
use common::{basis, custom, damped_oscillator, named};

fn rk4(t: f64, dt: f64, stride: usize) -> IntegrationSettings {
    IntegrationSettings::new(t, dt, stride, Scheme::Rk4)
}

fn oscillator_error(alpha: f64, dt: f64) -> f64 {
    let c = named("linear", alpha, 4, &[]);
    let rec = integrate(&c, &State::at_rest(ModalVector::unit(4, 1)), &rk4(10.0, dt, 1), &[]).unwrap();
    rec.samples
        .iter()
        .map(|s| {
            let (y, v) = damped_oscillator(1.0 + alpha, 0.5, 1.0, s.state.t);
            (s.state.y[0] - y).abs().max((s.state.v[0] - v).abs())
        })
        .fold(0.0, f64::max)
}

#[test]
fn rk4_is_fourth_order_on_the_oscillator() {
    for alpha in [0.0, 1.0] {
        let errs: Vec<f64> = (0..4).map(|k| oscillator_error(alpha, 0.2 / 2f64.powi(k))).collect();
        for w in errs.windows(2) {
            let r = w[0] / w[1];
            assert!((8.0..=32.0).contains(&r), "alpha {alpha}: ratio {r} from {errs:?}");
        }
    }
}

#[test]
fn energy_balance_converges_on_a_damped_mode() {
    let c = named("linear", 0.0, 4, &[]);
    let dt = rk4_stability_bound(&c) / 20.0;
    let z0 = State::at_rest(ModalVector::unit(4, 1));
    let r1 = energy_identity_residual(&integrate(&c, &z0, &rk4(10.0, dt, 5), &[]).unwrap()).unwrap();
    let r2 = energy_identity_residual(&integrate(&c, &z0, &rk4(10.0, dt / 2.0, 10), &[]).unwrap()).unwrap();
    assert!(r1 <= 1e-6, "{r1}");
    assert!(r1 / r2 >= 8.0, "{r1} / {r2}");
}

fn conservative(alpha: f64) -> ModelConfig {
    ModelConfig::unforced(
        alpha,
        1.0,
        1.0,
        basis(4),
        custom(Affine::constant(0.0), Affine::constant(0.0), OddCubic::zero()),
    )
    .unwrap()
}

#[test]
fn conservative_runs_keep_their_energy() {
    for alpha in [0.0, 0.7] {
        let c = conservative(alpha);
        let dt = rk4_stability_bound(&c) / 20.0;
        let z0 = State::at_rest(ModalVector::unit(4, 1));
        let rec = integrate(&c, &z0, &rk4(10.0, dt, 1), &[]).unwrap();
        let res = energy_identity_residual(&rec).unwrap();
        let e0 = energy(&c, &z0);
        let drift = rec.samples.iter().map(|s| (s.energy - e0).abs()).fold(0.0, f64::max) / e0.abs().max(1.0);
        assert!(res <= 1e-8 && res == drift, "{res} vs {drift}");
    }
}

#[test]
fn quadratic_energy_drift_vanishes_with_dt() {
    let c = conservative(0.4);
    let z0 = State::new(ModalVector::from_vec(vec![1.0, 0.2, 0.0, 0.05]), ModalVector::unit(4, 2), 0.0);
    let e0 = 0.5 * phase_norm_sq(&c, &z0);
    let drift = |dt: f64| {
        let rec = integrate(&c, &z0, &rk4(10.0, dt, 1), &[]).unwrap();
        rec.samples
            .iter()
            .map(|s| (0.5 * phase_norm_sq(&c, &s.state) - e0).abs())
            .fold(0.0, f64::max)
    };
    let dt = rk4_stability_bound(&c) / 20.0;
    let (d1, d2) = (drift(dt), drift(dt / 2.0));
    assert!(d1 / e0 < 1e-3 && d1 / d2 >= 16.0, "{d1} {d2}");
}

#[test]
fn trapezoid_ledger_is_second_order() {
    use beam_attractor::energy::energy_identity_residual_trapezoid;
    let c = named("wk-cubic", 0.5, 8, &[]);
    let z0 = State::at_rest(ModalVector::unit(8, 1));
    let dt = auto_dt(&c) / 4.0;
    let r1 = energy_identity_residual_trapezoid(&integrate(&c, &z0, &rk4(5.0, dt, 4), &[]).unwrap()).unwrap();
    let r2 = energy_identity_residual_trapezoid(&integrate(&c, &z0, &rk4(5.0, dt, 2), &[]).unwrap()).unwrap();
    assert!(r1 / r2 > 3.0 && r1 / r2 < 5.0, "{r1} {r2}");
}

#[test]
fn records_are_deterministic() {
    let c = named("wk-cubic", 0.3, 16, &[1.0]);
    let z0 = random_state(c.basis(), 9, 3.0);
    for scheme in [Scheme::Rk4, Scheme::Imex] {
        let s = IntegrationSettings::new(2.0, auto_dt(&c), 3, scheme);
        let a = integrate(&c, &z0, &s, &[]).unwrap();
        let b = integrate(&c, &z0, &s, &[]).unwrap();
        assert_eq!(a.samples, b.samples);
    }
}

#[test]
fn imex_tracks_rk4_on_the_cubic_instance() {
    let c = named("wk-cubic", 0.5, 16, &[]);
    let z0 = random_state(c.basis(), 2, 2.0);
    let fine = integrate(&c, &z0, &rk4(2.0, auto_dt(&c) / 8.0, 1000), &[]).unwrap();
    let imex = integrate(&c, &z0, &IntegrationSettings::new(2.0, auto_dt(&c) / 8.0, 1000, Scheme::Imex), &[]).unwrap();
    let d = (&fine.last_state().y - &imex.last_state().y).l2();
    assert!(d < 1e-4, "{d}");
    assert!(energy_identity_residual(&imex).unwrap() < 1e-3);
}

#[test]
fn equilibrium_record_is_constant() {
    let c = named("wk-cubic", 0.5, 8, &[]);
    let rec = integrate(&c, &State::zero(8), &rk4(3.0, 0.01, 7), &[]).unwrap();
    assert!(rec.samples.iter().all(|s| s.state.y == ModalVector::zeros(8) && s.energy == 0.0));
}

#[test]
fn energy_bounds_hold_samplewise() {
    let c = named("wk-cubic", 0.5, 16, &[1.0, 0.0, 0.5]);
    let z0 = random_state(c.basis(), 4, 6.0);
    let rec = integrate(&c, &z0, &rk4(10.0, auto_dt(&c), 5), &[]).unwrap();
    assert!(energy_is_monotone(&rec).unwrap());
    let eps = 0.5 * perturbation_threshold(&c).expect("threshold exists");
    let h2 = c.forcing().dot(c.forcing());
    let cst = 0.5 * (h2 + c.basis().length());
    for s in &rec.samples {
        assert!(energy_lower_bound_slack(&c, &s.state) >= 0.0);
        let e = s.energy;
        let pe = perturbed_energy(&c, &s.state, eps).unwrap();
        assert!(0.5 * e - cst <= pe && pe <= 1.5 * e + cst, "{e} {pe}");
    }
    let g = second_energy_growth_rate(&rec).unwrap();
    assert!(g.is_finite());
}

#[test]
fn decay_rate_of_a_damped_mode() {
    for alpha in [0.0, 1.0] {
        let c = named("linear", alpha, 4, &[]);
        let z0 = State::at_rest(ModalVector::unit(4, 1));
        let rec = integrate(&c, &z0, &rk4(60.0, auto_dt(&c) / 4.0, 10), &[]).unwrap();
        let fit = decay_fit(&rec).unwrap();
        // characteristic roots of (1+α)r² + r/2 + 1: Re r = −1/(4(1+α))
        let expect = 2.0 * 0.25 / (1.0 + alpha);
        assert!((fit.delta - expect).abs() <= 0.05 * expect, "alpha {alpha}: {} vs {expect}", fit.delta);
    }
}

#[test]
fn cubic_decay_has_floor_level_k2() {
    let c = named("wk-cubic", 0.5, 16, &[]);
    let z0 = random_state(c.basis(), 1, 10.0);
    let rec = integrate(&c, &z0, &rk4(80.0, auto_dt(&c), 10), &[]).unwrap();
    let fit = decay_fit(&rec).unwrap();
    let sup = rec.samples.iter().map(|s| s.phase_norm.powi(2)).fold(0.0, f64::max);
    assert!(fit.delta > 0.0);
    assert!(fit.k2 <= DECAY_FLOOR * sup * (1.0 + 1e-12));
}
