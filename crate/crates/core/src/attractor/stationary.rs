use nalgebra::{DMatrix, DVector};

use crate::error::{BeamError, Result};
use crate::model::ModelConfig;
use crate::spectral::ModalVector;

/// Converged stationary displacement with solver diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct StationarySolution {
    pub y: ModalVector,
    /// Newton steps taken (0 when the guess already meets the tolerance).
    pub iterations: usize,
    /// `‖G(y)‖₂` at exit.
    pub residual: f64,
}

const MAX_HALVINGS: usize = 30;

/// Jacobian of `G(y) = A y + M(S) A^{1/2} y + F(y) − h`:
/// `diag(λ + M(S) μ) + 2M'(S)(μ∘y)(μ∘y)ᵀ + Q diag(f'(u)) E`.
pub fn stationary_jacobian(config: &ModelConfig, y: &ModalVector) -> DMatrix<f64> {
    let b = config.basis();
    let m = config.modes();
    let c = config.constitutive();
    let s = config.bulge(y);
    let tension = c.tension.value(s);
    let slope = c.tension.derivative(s);
    let mut jac = if c.source.cubic != 0.0 {
        let grid = b.to_grid_unchecked(y);
        let fp: Vec<f64> = grid.iter().map(|u| c.source.derivative(*u)).collect();
        DMatrix::from_row_slice(m, m, &b.sandwich(&fp))
    } else {
        DMatrix::identity(m, m) * c.source.linear
    };
    let my: Vec<f64> = (0..m).map(|j| b.mu()[j] * y[j]).collect();
    for i in 0..m {
        jac[(i, i)] += b.lambda()[i] + tension * b.mu()[i];
        if slope != 0.0 {
            for j in 0..m {
                jac[(i, j)] += 2.0 * slope * my[i] * my[j];
            }
        }
    }
    jac
}

/// Newton iteration for `G(y) = 0` with backtracking on `‖G‖²`
/// (step halved up to 30 times).
pub fn stationary_solve(
    config: &ModelConfig,
    guess: &ModalVector,
    tol: f64,
    max_iter: usize,
) -> Result<StationarySolution> {
    if !(tol > 0.0) {
        return Err(BeamError::invalid("tolerance must be positive"));
    }
    config.basis().check(guess)?;
    let mut y = guess.clone();
    let mut g = config.stationary_residual_unchecked(&y);
    let mut norm = g.l2();
    let mut iterations = 0;
    while !(norm <= tol) {
        if iterations == max_iter || !norm.is_finite() {
            return Err(BeamError::NoConvergence {
                iterations,
                residual: norm,
            });
        }
        iterations += 1;
        let jac = stationary_jacobian(config, &y);
        let rhs = DVector::from_iterator(g.len(), g.iter().map(|x| -x));
        let step = jac
            .lu()
            .solve(&rhs)
            .filter(|d| d.iter().all(|x| x.is_finite()))
            .ok_or(BeamError::SingularJacobian {
                iteration: iterations,
            })?;
        let step = ModalVector::from_vec(step.iter().copied().collect());

        let mut t = 1.0;
        let mut trial = y.axpy(t, &step);
        let mut trial_g = config.stationary_residual_unchecked(&trial);
        for _ in 0..MAX_HALVINGS {
            let n = trial_g.l2();
            if n.is_finite() && n < norm {
                break;
            }
            t *= 0.5;
            trial = y.axpy(t, &step);
            trial_g = config.stationary_residual_unchecked(&trial);
        }
        y = trial;
        g = trial_g;
        norm = g.l2();
    }
    Ok(StationarySolution {
        y,
        iterations,
        residual: norm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Affine, ConstitutiveFunctions, HypothesisConstants, OddCubic, State};
    use crate::spectral::SpectralBasis;
    use std::f64::consts::PI;
    use std::sync::Arc;

    fn config(c: ConstitutiveFunctions, m: usize, h: ModalVector) -> ModelConfig {
        let b = Arc::new(SpectralBasis::new(PI, m).unwrap());
        ModelConfig::new(0.0, 1.0, 1.0, b, c, h).unwrap()
    }

    #[test]
    fn zero_is_root_of_unforced_cubic() {
        let c = config(ConstitutiveFunctions::named("wk-cubic").unwrap(), 8, ModalVector::zeros(8));
        let s = stationary_solve(&c, &ModalVector::zeros(8), 1e-12, 5).unwrap();
        assert!(s.iterations <= 1);
        assert_eq!(s.y, ModalVector::zeros(8));
    }

    #[test]
    fn linear_problem_in_one_step() {
        let b = 0.7;
        let f = ConstitutiveFunctions {
            tension: Affine::constant(b),
            damping: Affine::constant(1.0),
            source: OddCubic::zero(),
            constants: HypothesisConstants::default(),
        };
        let c = config(f, 6, ModalVector::unit(6, 1).scaled(2.0));
        let guess = ModalVector::from_vec(vec![0.3, -1.0, 2.0, 0.0, 0.1, 5.0]);
        let s = stationary_solve(&c, &guess, 1e-10, 5).unwrap();
        assert_eq!(s.iterations, 1);
        assert!((s.y[0] - 2.0 / (1.0 + b)).abs() < 1e-13);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let c = config(
            ConstitutiveFunctions::named("wk-cubic").unwrap(),
            5,
            ModalVector::unit(5, 1),
        );
        let y = ModalVector::from_vec(vec![0.4, -0.2, 0.1, 0.05, -0.03]);
        let jac = stationary_jacobian(&c, &y);
        let h = 1e-6;
        for k in 0..5 {
            let e = ModalVector::unit(5, k + 1);
            let gp = c.stationary_residual_unchecked(&y.axpy(h, &e));
            let gm = c.stationary_residual_unchecked(&y.axpy(-h, &e));
            for i in 0..5 {
                let fd = (gp[i] - gm[i]) / (2.0 * h);
                assert!((fd - jac[(i, k)]).abs() < 1e-6, "({i},{k}) {fd} vs {}", jac[(i, k)]);
            }
        }
    }

    #[test]
    fn forced_cubic_has_zero_acceleration() {
        let c = config(
            ConstitutiveFunctions::named("wk-cubic").unwrap(),
            16,
            ModalVector::unit(16, 1),
        );
        let s = stationary_solve(&c, &ModalVector::zeros(16), 1e-11, 20).unwrap();
        let acc = c.acceleration(&State::at_rest(s.y.clone()));
        assert!(acc.l2() <= 1e-11);
    }

    #[test]
    fn iteration_cap_and_bad_tolerance() {
        let c = config(
            ConstitutiveFunctions::named("wk-cubic").unwrap(),
            8,
            ModalVector::unit(8, 1).scaled(50.0),
        );
        let e = stationary_solve(&c, &ModalVector::zeros(8), 1e-14, 1).unwrap_err();
        assert!(matches!(e, BeamError::NoConvergence { iterations: 1, .. }));
        assert!(stationary_solve(&c, &ModalVector::zeros(8), 0.0, 1).is_err());
    }
}
