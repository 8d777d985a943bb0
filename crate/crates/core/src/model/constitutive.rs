//! Scalar laws `M`, `N`, `f` and the named instances shipped with the crate.

/// `c0 + c1·s`, used for the tension feedback `M` and the damping coefficient `N`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Affine {
    pub c0: f64,
    pub c1: f64,
}

impl Affine {
    pub const fn new(c0: f64, c1: f64) -> Self {
        Self { c0, c1 }
    }

    pub const fn constant(c0: f64) -> Self {
        Self { c0, c1: 0.0 }
    }

    #[inline]
    pub fn value(&self, s: f64) -> f64 {
        // a constant stays constant even when s overflows
        if self.c1 == 0.0 {
            self.c0
        } else {
            self.c0 + self.c1 * s
        }
    }

    #[inline]
    pub fn derivative(&self, _s: f64) -> f64 {
        self.c1
    }

    /// `∫₀ˢ (c0 + c1 r) dr`
    #[inline]
    pub fn antiderivative(&self, s: f64) -> f64 {
        self.c0 * s + 0.5 * self.c1 * s * s
    }
}

/// Odd source term `f(u) = a·u + b·u³`; `f(0) = 0` holds by construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OddCubic {
    pub linear: f64,
    pub cubic: f64,
}

impl OddCubic {
    pub const fn new(linear: f64, cubic: f64) -> Self {
        Self { linear, cubic }
    }

    pub const fn zero() -> Self {
        Self::new(0.0, 0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.linear == 0.0 && self.cubic == 0.0
    }

    #[inline]
    pub fn value(&self, u: f64) -> f64 {
        u * (self.linear + self.cubic * u * u)
    }

    #[inline]
    pub fn derivative(&self, u: f64) -> f64 {
        self.linear + 3.0 * self.cubic * u * u
    }

    /// `∫₀ᵘ f(r) dr`
    #[inline]
    pub fn antiderivative(&self, u: f64) -> f64 {
        let u2 = u * u;
        u2 * (0.5 * self.linear + 0.25 * self.cubic * u2)
    }

    /// Polynomial degree, used to decide how exact grid quadrature is.
    pub fn degree(&self) -> u32 {
        if self.cubic != 0.0 {
            3
        } else if self.linear != 0.0 {
            1
        } else {
            0
        }
    }
}

/// Constants an instance declares for the growth and sign hypotheses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypothesisConstants {
    /// Growth constant in `|f'(u)| ≤ σ₁(1 + |u|^{p/2})`.
    pub sigma1: f64,
    /// Growth exponent `p > 0`.
    pub p: f64,
    pub l0: f64,
    pub l1: f64,
    pub l2: f64,
}

impl Default for HypothesisConstants {
    fn default() -> Self {
        Self {
            sigma1: 1.0,
            p: 4.0,
            l0: 0.0,
            l1: 0.0,
            l2: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstitutiveFunctions {
    /// `M`, the nonlocal tension feedback.
    pub tension: Affine,
    /// `N`, the nonlocal damping coefficient.
    pub damping: Affine,
    /// `f`, the nonlinear source.
    pub source: OddCubic,
    pub constants: HypothesisConstants,
}

/// Names accepted by [`ConstitutiveFunctions::named`].
pub const INSTANCE_NAMES: &[&str] = &["wk-cubic", "wk-linear", "linear", "bad-m"];

impl ConstitutiveFunctions {
    /// Built-in instances:
    ///
    /// * `wk-cubic`: `M(s) = 1 + s`, `N ≡ 1`, `f(u) = u³` (σ₁ = 3, p = 4).
    /// * `wk-linear`: `M(s) = 1 + s`, `N ≡ 1`, `f(u) = u`.
    /// * `linear`: `M ≡ 0`, `N ≡ 1/2`, `f ≡ 0`; modes decouple into damped oscillators.
    /// * `bad-m`: `M ≡ −1`, `N ≡ 1`, `f(u) = u³`; violates the sign condition on `M`.
    pub fn named(name: &str) -> Option<Self> {
        let c = match name {
            "wk-cubic" => Self {
                tension: Affine::new(1.0, 1.0),
                damping: Affine::constant(1.0),
                source: OddCubic::new(0.0, 1.0),
                constants: HypothesisConstants {
                    sigma1: 3.0,
                    p: 4.0,
                    ..Default::default()
                },
            },
            "wk-linear" => Self {
                tension: Affine::new(1.0, 1.0),
                damping: Affine::constant(1.0),
                source: OddCubic::new(1.0, 0.0),
                constants: HypothesisConstants {
                    sigma1: 1.0,
                    p: 4.0,
                    ..Default::default()
                },
            },
            "linear" => Self {
                tension: Affine::constant(0.0),
                damping: Affine::constant(0.5),
                source: OddCubic::zero(),
                constants: HypothesisConstants::default(),
            },
            "bad-m" => Self {
                tension: Affine::constant(-1.0),
                damping: Affine::constant(1.0),
                source: OddCubic::new(0.0, 1.0),
                constants: HypothesisConstants {
                    sigma1: 3.0,
                    p: 4.0,
                    ..Default::default()
                },
            },
            _ => return None,
        };
        Some(c)
    }

    /// `true` when the Galerkin system is linear in `(y, v)`.
    pub fn is_linear(&self) -> bool {
        self.tension.c1 == 0.0 && self.damping.c1 == 0.0 && self.source.cubic == 0.0
    }
}
