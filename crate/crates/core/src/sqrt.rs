//! Certified square-root upper bounds by Heron's method.
//!
//! Starting from `max(x, 1)`, every iterate satisfies `r^2 >= x`: the
//! Heron step `(r + x/r) / 2` is the arithmetic mean of `r` and `x/r`,
//! whose product is `x`, and rounding an iterate up only makes it larger.
//! Iterates are rounded up to a fixed decimal grid so their bit length does
//! not double on every step.

use tracing::warn;

use crate::error::{Error, Result};
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SqrtConfig {
    /// Stop once two successive iterates differ by at most this much.
    pub err_tolerance: Rational,
    pub max_iterations: u64,
    /// Decimal places each intermediate iterate is rounded up to.
    pub iterate_precision_places: u32,
}

pub const DEFAULT_SQRT_ITERATIONS: u64 = 2_000_000;
pub const DEFAULT_ITERATE_PLACES: u32 = 40;
pub const MIN_ITERATE_PLACES: u32 = 20;

impl Default for SqrtConfig {
    fn default() -> Self {
        SqrtConfig {
            err_tolerance: Rational::ulp(11),
            max_iterations: DEFAULT_SQRT_ITERATIONS,
            iterate_precision_places: DEFAULT_ITERATE_PLACES,
        }
    }
}

impl SqrtConfig {
    pub fn new(err_tolerance: Rational, max_iterations: u64, iterate_precision_places: u32) -> Result<Self> {
        let cfg = SqrtConfig {
            err_tolerance,
            max_iterations,
            iterate_precision_places,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.err_tolerance.is_positive() {
            return Err(Error::Config(format!(
                "sqrt error tolerance must be positive, got {}",
                self.err_tolerance
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::Config("sqrt iteration limit must be at least 1".into()));
        }
        if self.iterate_precision_places < MIN_ITERATE_PLACES {
            return Err(Error::Config(format!(
                "sqrt iterate precision must be at least {MIN_ITERATE_PLACES} places, got {}",
                self.iterate_precision_places
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SqrtBound {
    /// Always satisfies `value >= 0` and `value^2 >= x`.
    pub value: Rational,
    /// False when the iteration limit was hit first.
    pub converged: bool,
    pub iterations: u64,
}

/// One Heron step, exact.
pub fn heron_step(r: &Rational, x: &Rational) -> Rational {
    (r + x / r) / Rational::from(2)
}

/// Upper bound on `sqrt(x)`.
///
/// When `converged` is set the returned `r` also satisfies
/// `r^2 - x <= 2 * err_tolerance * r`.
pub fn sqrt_upper_bound(x: &Rational, cfg: &SqrtConfig) -> Result<SqrtBound> {
    sqrt_upper_bound_observed(x, cfg, |_| {})
}

/// [`sqrt_upper_bound`], calling `observe` with every intermediate iterate
/// (after rounding) and with the returned value.
pub fn sqrt_upper_bound_observed(
    x: &Rational,
    cfg: &SqrtConfig,
    mut observe: impl FnMut(&Rational),
) -> Result<SqrtBound> {
    if x.is_negative() {
        return Err(Error::NegativeSqrt(x.to_string()));
    }
    if x.is_zero() {
        return Ok(SqrtBound {
            value: Rational::zero(),
            converged: true,
            iterations: 0,
        });
    }
    let one = Rational::one();
    let mut r = if *x < one { one } else { x.clone() };
    for i in 1..=cfg.max_iterations {
        let next = heron_step(&r, x);
        if &r - &next <= cfg.err_tolerance {
            let value = settle(next, x, cfg);
            observe(&value);
            return Ok(SqrtBound {
                value,
                converged: true,
                iterations: i,
            });
        }
        r = next.ceil_to_places(cfg.iterate_precision_places);
        observe(&r);
    }
    warn!(
        iterations = cfg.max_iterations,
        "sqrt upper bound terminated early before reaching tolerance"
    );
    Ok(SqrtBound {
        value: r,
        converged: false,
        iterations: cfg.max_iterations,
    })
}

/// The exact converged iterate already meets the tightness guarantee; keep
/// its rounded-up form instead whenever that still does.
fn settle(exact: Rational, x: &Rational, cfg: &SqrtConfig) -> Rational {
    let rounded = exact.ceil_to_places(cfg.iterate_precision_places);
    let slack = Rational::from(2) * &cfg.err_tolerance * &rounded;
    if rounded.square() - x <= slack {
        rounded
    } else {
        exact
    }
}

/// Value-only convenience wrapper for nonnegative inputs.
pub(crate) fn sqrt_ub(x: &Rational, cfg: &SqrtConfig) -> Rational {
    sqrt_upper_bound(x, cfg)
        .expect("sqrt of a sum of squares is nonnegative")
        .value
}
