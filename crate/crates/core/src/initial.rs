//! Named initial states and seeded random draws.
//!
//! Random draws use SplitMix64 (64-bit state, fixed increment
//! `0x9E3779B97F4A7C15` and the standard output mix), so a seed produces
//! the same state on every platform.

use std::fmt;
use std::str::FromStr;

use rand_core::SeedableRng;
use rand_distr::{Distribution, StandardNormal};
use rand_xoshiro::SplitMix64;

use crate::error::{BeamError, Result};
use crate::model::State;
use crate::norms::DiagonalNorm;
use crate::spectral::{ModalVector, SpectralBasis};

/// `zero`, `mode:k:amp`, or `random:seed:radius`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialSpec {
    Zero,
    /// Displacement `amp · e_k` at rest.
    Mode { k: usize, amp: f64 },
    /// Seeded random state with `‖z‖_ℋ = radius` in the `α`-free norm.
    Random { seed: u64, radius: f64 },
}

impl InitialSpec {
    pub fn build(&self, basis: &SpectralBasis) -> Result<State> {
        let m = basis.modes();
        match *self {
            InitialSpec::Zero => Ok(State::zero(m)),
            InitialSpec::Mode { k, amp } => {
                if k == 0 || k > m {
                    return Err(BeamError::invalid(format!(
                        "mode index {k} outside 1..={m}"
                    )));
                }
                Ok(State::at_rest(ModalVector::unit(m, k).scaled(amp)))
            }
            InitialSpec::Random { seed, radius } => Ok(random_state(basis, seed, radius)),
        }
    }
}

impl fmt::Display for InitialSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialSpec::Zero => f.write_str("zero"),
            InitialSpec::Mode { k, amp } => write!(f, "mode:{k}:{}", crate::cli::fmt_f64(*amp)),
            InitialSpec::Random { seed, radius } => {
                write!(f, "random:{seed}:{}", crate::cli::fmt_f64(*radius))
            }
        }
    }
}

impl FromStr for InitialSpec {
    type Err = BeamError;
    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').collect();
        let bad = || BeamError::invalid(format!("cannot parse state spec '{s}' (zero | mode:k:amp | random:seed:radius)"));
        match parts.as_slice() {
            ["zero"] => Ok(InitialSpec::Zero),
            ["mode", k, amp] => Ok(InitialSpec::Mode {
                k: k.parse().map_err(|_| bad())?,
                amp: amp.parse().map_err(|_| bad())?,
            }),
            ["random", seed, radius] => {
                let radius: f64 = radius.parse().map_err(|_| bad())?;
                if !(radius >= 0.0) {
                    return Err(bad());
                }
                Ok(InitialSpec::Random {
                    seed: seed.parse().map_err(|_| bad())?,
                    radius,
                })
            }
            _ => Err(bad()),
        }
    }
}

/// Seeded state whose phase-norm contributions decay like `j⁻⁴` across modes,
/// scaled to `‖A^{1/2}u‖² + ‖v‖² = radius²`.
pub fn random_state(basis: &SpectralBasis, seed: u64, radius: f64) -> State {
    let m = basis.modes();
    let mut rng = SplitMix64::seed_from_u64(seed);
    let mut y = ModalVector::zeros(m);
    let mut v = ModalVector::zeros(m);
    for j in 0..m {
        let decay = 1.0 / ((j + 1) as f64).powi(2);
        let gy: f64 = StandardNormal.sample(&mut rng);
        let gv: f64 = StandardNormal.sample(&mut rng);
        y[j] = gy * decay / basis.mu()[j];
        v[j] = gv * decay;
    }
    let mut st = State::new(y, v, 0.0);
    let n = DiagonalNorm::phase_alpha_free(basis).norm(&st);
    if n > 0.0 {
        st.y = st.y.scaled(radius / n);
        st.v = st.v.scaled(radius / n);
    }
    st
}

/// Unit-norm seeded direction in the `α`-free phase norm, for perturbations.
pub fn random_direction(basis: &SpectralBasis, seed: u64) -> State {
    random_state(basis, seed ^ 0xD1B5_4A32_D192_ED03, 1.0)
}

/// `count` seeded states inside the ball of the given radius.
///
/// Member `k` uses seed `seed + k` and a radius drawn uniformly from
/// `(0, radius]` by the same generator.
pub fn ensemble(basis: &SpectralBasis, seed: u64, count: usize, radius: f64) -> Vec<State> {
    (0..count as u64)
        .map(|k| {
            let mut rng = SplitMix64::seed_from_u64(seed.wrapping_add(k).wrapping_mul(0x9E37_79B9));
            let u: f64 = rand_distr::Open01.sample(&mut rng);
            random_state(basis, seed.wrapping_add(k), radius * u)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn parse_and_display_roundtrip() {
        for s in ["zero", "mode:3:0.5", "random:42:10"] {
            let spec: InitialSpec = s.parse().unwrap();
            let again: InitialSpec = spec.to_string().parse().unwrap();
            assert_eq!(spec, again);
        }
        assert!("mode:x:1".parse::<InitialSpec>().is_err());
        assert!("random:1".parse::<InitialSpec>().is_err());
        assert!("random:1:-2".parse::<InitialSpec>().is_err());
    }

    #[test]
    fn random_state_has_requested_radius_and_is_deterministic() {
        let b = SpectralBasis::new(PI, 12).unwrap();
        let a = random_state(&b, 7, 3.0);
        let c = random_state(&b, 7, 3.0);
        assert_eq!(a, c);
        let n = DiagonalNorm::phase_alpha_free(&b).norm(&a);
        assert!((n - 3.0).abs() < 1e-12);
        assert_ne!(random_state(&b, 8, 3.0), a);
    }

    #[test]
    fn mode_spec_bounds() {
        let b = SpectralBasis::new(PI, 4).unwrap();
        assert!(InitialSpec::Mode { k: 5, amp: 1.0 }.build(&b).is_err());
        let s = InitialSpec::Mode { k: 2, amp: 0.5 }.build(&b).unwrap();
        assert_eq!(s.y[1], 0.5);
    }

    #[test]
    fn ensemble_members_lie_in_ball() {
        let b = SpectralBasis::new(PI, 8).unwrap();
        let norm = DiagonalNorm::phase_alpha_free(&b);
        let e = ensemble(&b, 3, 16, 2.0);
        assert_eq!(e.len(), 16);
        assert!(e.iter().all(|s| norm.norm(s) <= 2.0 + 1e-12));
    }
}
