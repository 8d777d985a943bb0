mod common;

use beam_attractor::attractor::{
    attractor_regularity_check, box_counting_dimension, dyadic_scales, hausdorff_semidistance, omega_limit_ensemble,
    omega_limit_sample, stationary_solve, upper_semicontinuity_scan, PointCloud, SamplingParams,
};
use beam_attractor::initial::random_state;
use beam_attractor::integrator::{auto_dt, integrate, IntegrationSettings, Scheme};
use beam_attractor::model::{Affine, ModelConfig, OddCubic, State};
use beam_attractor::norms::{DiagonalNorm, WeakNormSpec};
use beam_attractor::spectral::ModalVector;
use beam_attractor::stability::{
    alpha_continuity_scan, difference_functional, holder_exponent_weak, phase_norm, stability_inequality_check,
};
use beam_attractor::BeamError;
use common::{basis, custom, named};
use proptest::prelude::*;

fn rk4(t: f64, dt: f64, stride: usize) -> IntegrationSettings {
    IntegrationSettings::new(t, dt, stride, Scheme::Rk4)
}

#[test]
fn newton_agrees_with_gradient_flow() {
    let c = named("wk-cubic", 0.0, 16, &[1.0]);
    let newton = stationary_solve(&c, &ModalVector::zeros(16), 1e-12, 30).unwrap();
    // preconditioned gradient flow ẏ = −D⁻¹G(y), D = diag(λ + μ), by explicit Euler
    let b = c.basis();
    let mut y = ModalVector::zeros(16);
    for _ in 0..20_000 {
        let g = c.stationary_residual(&y).unwrap();
        if g.l2() < 1e-13 {
            break;
        }
        for j in 0..16 {
            y[j] -= 0.5 * g[j] / (b.lambda()[j] + b.mu()[j]);
        }
    }
    assert!((&y - &newton.y).l2() < 1e-8);
    let acc = c.acceleration(&State::at_rest(newton.y.clone()));
    let min_mass = c.mass().iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(acc.l2() <= 1e-12 / min_mass);
}

#[test]
fn singular_jacobian_is_reported() {
    // A + M A^{1/2} vanishes on mode 1 when M ≡ −1 on L = π
    let c = ModelConfig::new(
        0.0,
        1.0,
        1.0,
        basis(4),
        custom(Affine::constant(-1.0), Affine::constant(1.0), OddCubic::zero()),
        ModalVector::unit(4, 1),
    )
    .unwrap();
    let e = stationary_solve(&c, &ModalVector::zeros(4), 1e-10, 10).unwrap_err();
    assert!(matches!(e, BeamError::SingularJacobian { iteration: 1 }), "{e}");
}

#[test]
fn unforced_cubic_clouds_collapse_to_zero() {
    let c = named("wk-cubic", 0.5, 16, &[]);
    let p = SamplingParams {
        t_transient: 80.0,
        t_sample: 5.0,
        dt: auto_dt(&c),
        stride: 20,
        scheme: Scheme::Rk4,
    };
    let cloud = omega_limit_sample(&c, &random_state(c.basis(), 2, 5.0), &p).unwrap();
    let norm = DiagonalNorm::phase(&c);
    assert!(cloud.states.iter().all(|s| norm.norm(s) < 1e-4));
}

#[test]
fn forced_cloud_sits_on_the_stationary_state() {
    let c = named("wk-cubic", 0.25, 16, &[1.0]);
    let sol = stationary_solve(&c, &ModalVector::zeros(16), 1e-12, 30).unwrap();
    let p = SamplingParams {
        t_transient: 80.0,
        t_sample: 5.0,
        dt: auto_dt(&c),
        stride: 20,
        scheme: Scheme::Rk4,
    };
    let z0: Vec<State> = (0..3).map(|k| random_state(c.basis(), k, 4.0)).collect();
    let cloud = omega_limit_ensemble(&c, &z0, &p).unwrap();
    let target = PointCloud::new(vec![State::at_rest(sol.y.clone())], DiagonalNorm::phase(&c)).unwrap();
    assert!(hausdorff_semidistance(&cloud, &target).unwrap() < 1e-6);
    let reg = attractor_regularity_check(&c, &cloud).unwrap();
    let au: f64 = (0..16).map(|j| (c.basis().lambda()[j] * sol.y[j]).powi(2)).sum::<f64>().sqrt();
    assert!((reg.sup_au - au).abs() < 1e-5 * au);
}

#[test]
fn regularity_of_a_single_mode_fixed_point() {
    let c = named("linear", 0.5, 4, &[]);
    let cloud = PointCloud::new(vec![State::at_rest(ModalVector::unit(4, 1).scaled(-0.3))], DiagonalNorm::phase(&c)).unwrap();
    let r = attractor_regularity_check(&c, &cloud).unwrap();
    assert_eq!(r.sup_au, c.basis().lambda1() * 0.3);
    assert_eq!(r.sup_half_v, 0.0);
}

#[test]
fn usc_is_bounded_by_trajectory_distance() {
    let c = named("wk-cubic", 0.0, 16, &[1.0]);
    let p = SamplingParams {
        t_transient: 4.0,
        t_sample: 2.0,
        dt: auto_dt(&c),
        stride: 50,
        scheme: Scheme::Rk4,
    };
    let z0: Vec<State> = (0..3).map(|k| random_state(c.basis(), 40 + k, 3.0)).collect();
    let alphas = [1.0, 0.1, 0.01, 0.001];
    let rep = upper_semicontinuity_scan(&c, &alphas, &z0, &p).unwrap();
    assert!(rep.decreasing(), "{:?}", rep.entries);
    let settings = rk4(6.0, p.dt, 1);
    let d_max = z0
        .iter()
        .map(|z| alpha_continuity_scan(&c, z, &alphas, &settings).unwrap().entries[3].1)
        .fold(0.0, f64::max);
    assert!(rep.final_value().unwrap() <= 10.0 * d_max);
}

#[test]
fn usc_unforced_cubic_is_degenerate() {
    let c = named("wk-cubic", 0.0, 8, &[]);
    let p = SamplingParams {
        t_transient: 80.0,
        t_sample: 2.0,
        dt: auto_dt(&c),
        stride: 100,
        scheme: Scheme::Rk4,
    };
    let z0 = vec![random_state(c.basis(), 1, 3.0)];
    let rep = upper_semicontinuity_scan(&c, &[1.0, 0.1, 0.0], &z0, &p).unwrap();
    assert!(rep.entries.iter().all(|e| e.1 <= 1e-4));
    assert_eq!(rep.entries[2], (0.0, 0.0));
}

#[test]
fn alpha_scan_linear_rate() {
    let c = named("linear", 0.0, 8, &[]);
    let z0 = State::at_rest(ModalVector::unit(8, 1));
    let rep = alpha_continuity_scan(&c, &z0, &[0.0, 1e-1, 1e-2, 1e-3, 1e-4], &rk4(5.0, auto_dt(&c), 1)).unwrap();
    let rho = rep.rho.unwrap();
    assert!((0.9..=1.1).contains(&rho), "{rho}");
    assert!(rep.entries.iter().all(|e| e.1 >= 0.0));
    assert_eq!(rep.entries[0], (0.0, 0.0));
}

#[test]
fn stability_inequality_on_linear_pair() {
    let c = named("linear", 0.3, 8, &[]);
    let a = random_state(c.basis(), 1, 2.0);
    let b = random_state(c.basis(), 2, 2.0);
    let rep = stability_inequality_check(&c, &a, &b, &rk4(15.0, auto_dt(&c), 5)).unwrap();
    let (cc, d) = rep.ensure_feasible().unwrap();
    let rhs = rep.rhs(cc, d);
    assert!(rep.lhs.iter().zip(&rhs).all(|(l, r)| *l <= *r * (1.0 + 1e-12)));
}

#[test]
fn holder_slope_of_smooth_mode_is_one() {
    let c = named("linear", 0.0, 4, &[]);
    let rec = integrate(&c, &State::at_rest(ModalVector::unit(4, 1)), &rk4(2.0, 0.005, 1), &[]).unwrap();
    let h = holder_exponent_weak(&rec, WeakNormSpec::new(1.0).unwrap()).unwrap();
    assert!(h.exponent >= 0.95, "{}", h.exponent);
}

#[test]
fn phase_norm_without_inertia_has_no_alpha_term() {
    let c0 = named("wk-cubic", 0.0, 6, &[]);
    let s = State::new(ModalVector::unit(6, 2), ModalVector::unit(6, 3).scaled(2.0), 0.0);
    let direct = (c0.basis().lambda()[1] + 4.0f64).sqrt();
    assert_eq!(phase_norm(&c0, &s, None), direct);
}

fn state(m: usize) -> impl Strategy<Value = State> {
    (prop::collection::vec(-1.0f64..1.0, m), prop::collection::vec(-1.0f64..1.0, m))
        .prop_map(|(y, v)| State::new(ModalVector::from_vec(y), ModalVector::from_vec(v), 0.0))
}

fn cloud(m: usize, n: usize) -> impl Strategy<Value = Vec<State>> {
    prop::collection::vec(state(m), 1..n)
}

fn unit_norm(m: usize) -> DiagonalNorm {
    DiagonalNorm {
        y_weight: (1..=m).map(|j| (j as f64).powi(4)).collect(),
        v_weight: vec![1.0; m],
    }
}

proptest! {
    #[test]
    fn weak_norms_are_ordered(s in state(6), s1 in 0.05f64..1.0, frac in 0.0f64..1.0, alpha in 0.0f64..1.0, len in 0.5f64..8.0) {
        let b = std::sync::Arc::new(beam_attractor::spectral::SpectralBasis::new(len, 6).unwrap());
        let c = ModelConfig::unforced(alpha, 1.0, 1.0, b.clone(), beam_attractor::model::ConstitutiveFunctions::named("wk-cubic").unwrap()).unwrap();
        let s2 = s1 * frac + 1e-3;
        let n1 = phase_norm(&c, &s, Some(WeakNormSpec::new(s1).unwrap()));
        let n2 = phase_norm(&c, &s, Some(WeakNormSpec::new(s2.min(s1)).unwrap()));
        let k = 1f64.max(b.lambda1().powf((s2.min(s1) - s1) / 2.0));
        prop_assert!(n1 <= k * n2 * (1.0 + 1e-12));
    }

    #[test]
    fn difference_functional_dominates_half_phase(a in state(6), b in state(6), alpha in 0.0f64..1.0) {
        let c = named("wk-cubic", alpha, 6, &[]);
        let w = a.difference(&b);
        let f = difference_functional(&c, &a, &b);
        prop_assert!(f >= 0.5 * phase_norm(&c, &w, None).powi(2) * (1.0 - 1e-12));
    }

    #[test]
    fn hausdorff_triangle(a in cloud(3, 20), b in cloud(3, 20), c in cloud(3, 20)) {
        let n = unit_norm(3);
        let (a, b, c) = (
            PointCloud::new(a, n.clone()).unwrap(),
            PointCloud::new(b, n.clone()).unwrap(),
            PointCloud::new(c, n).unwrap(),
        );
        let ac = hausdorff_semidistance(&a, &c).unwrap();
        let ab = hausdorff_semidistance(&a, &b).unwrap();
        let bc = hausdorff_semidistance(&b, &c).unwrap();
        prop_assert!(ac <= (ab + bc) * (1.0 + 1e-12) + 1e-15);
    }

    #[test]
    fn hausdorff_zero_on_subsets(a in cloud(3, 20), extra in cloud(3, 10)) {
        let n = unit_norm(3);
        let sub = PointCloud::new(a.clone(), n.clone()).unwrap();
        let mut all = a;
        all.extend(extra);
        let sup = PointCloud::new(all, n).unwrap();
        prop_assert_eq!(hausdorff_semidistance(&sub, &sup).unwrap(), 0.0);
    }

    #[test]
    fn box_count_is_translation_invariant(seed in 0u64..1000, shift in prop::collection::vec(-10.0f64..10.0, 2)) {
        use rand_core::{RngCore, SeedableRng};
        let mut rng = rand_xoshiro::SplitMix64::seed_from_u64(seed);
        let mut u = || (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
        let pts: Vec<Vec<f64>> = (0..500).map(|_| { let t = u(); vec![t, 0.5 * t * t] }).collect();
        let moved: Vec<Vec<f64>> = pts.iter().map(|p| vec![p[0] + shift[0], p[1] + shift[1]]).collect();
        let scales = dyadic_scales(2, 6);
        let d0 = box_counting_dimension(&pts, &scales).unwrap().dimension;
        let d1 = box_counting_dimension(&moved, &scales).unwrap().dimension;
        prop_assert!((d0 - d1).abs() <= 0.05);
    }

    #[test]
    fn newton_solves_linear_instance_in_one_step(g in prop::collection::vec(-10.0f64..10.0, 6), h in prop::collection::vec(-2.0f64..2.0, 6)) {
        let c = named("wk-linear", 0.0, 6, &[]);
        let c = ModelConfig::new(0.0, 1.0, 1.0, c.basis_arc().clone(),
            custom(Affine::constant(0.8), Affine::constant(1.0), OddCubic::new(0.5, 0.0)),
            ModalVector::from_vec(h)).unwrap();
        let sol = stationary_solve(&c, &ModalVector::from_vec(g), 1e-8, 5).unwrap();
        prop_assert!(sol.iterations <= 1);
    }
}
