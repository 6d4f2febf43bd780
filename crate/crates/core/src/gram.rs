//! Operator-norm upper bounds by Gram iteration.
//!
//! Each round replaces `M` by `Truncate(M^T M / r)` where `r` bounds
//! `||M^T M||_F`, remembering `r` and a Frobenius bound `e` on the
//! truncation error. Since `M^T M / r` is symmetric, Weyl's inequality gives
//! `||M_i||_op <= sqrt(r * (||M_{i+1}||_op + e))`, and [`expand`] unwinds
//! that chain from the Frobenius norm of the last iterate.

use crate::linalg::Matrix;
use crate::rational::Rational;
use crate::sqrt::{sqrt_ub, SqrtConfig};

pub const DEFAULT_TRUNCATE_PLACES: u32 = 16;

/// Scale and truncation-error bound of one Gram round.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IterationRecord {
    /// Frobenius bound of the Gram matrix, or 1 when it vanished.
    pub scale: Rational,
    /// Frobenius bound of the truncation error.
    pub err_bound: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OperatorNormBound {
    /// Upper bound on `||M||_op`.
    pub value: Rational,
    pub iterations: usize,
    /// Most recent round first.
    pub records: Vec<IterationRecord>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GramConfig {
    pub iterations: usize,
    pub truncate_places: u32,
    pub sqrt: SqrtConfig,
}

impl GramConfig {
    pub fn new(iterations: usize, sqrt: SqrtConfig) -> Self {
        GramConfig {
            iterations,
            truncate_places: DEFAULT_TRUNCATE_PLACES,
            sqrt,
        }
    }
}

/// Upper bound on `||m||_op` after `n` Gram rounds at the default
/// truncation precision.
pub fn gram_iteration(m: &Matrix, n: usize, cfg: &SqrtConfig) -> OperatorNormBound {
    gram_iteration_with(m, &GramConfig::new(n, cfg.clone()))
}

pub fn gram_iteration_with(m: &Matrix, cfg: &GramConfig) -> OperatorNormBound {
    let mut current = m.clone();
    let mut records = Vec::with_capacity(cfg.iterations);
    for _ in 0..cfg.iterations {
        let gram = current.mtm();
        let scale = if gram.is_zero_matrix() {
            Rational::one()
        } else {
            gram.frobenius_norm_upper_bound(&cfg.sqrt)
        };
        let (truncated, err) = gram
            .matrix_div(&scale)
            .and_then(|g| g.truncate_with_error(cfg.truncate_places))
            .expect("normalized Gram matrix is symmetric with a positive scale");
        records.push(IterationRecord {
            scale,
            err_bound: err.frobenius_norm_upper_bound(&cfg.sqrt),
        });
        current = truncated;
    }
    records.reverse();
    let seed = current.frobenius_norm_upper_bound(&cfg.sqrt);
    OperatorNormBound {
        value: expand(&records, seed, &cfg.sqrt),
        iterations: cfg.iterations,
        records,
    }
}

/// Fold `v <- sqrt_ub(scale * (v + err_bound))` over `records`, head first.
pub fn expand(records: &[IterationRecord], v: Rational, cfg: &SqrtConfig) -> Rational {
    records.iter().fold(v, |v, rec| {
        let x = &rec.scale * (v + &rec.err_bound);
        sqrt_ub(&x, cfg)
    })
}
