//! Per-output certification against a precomputed bounds table.

use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::lipschitz::LipschitzBounds;
use crate::nn::argmax;
use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CertificationResult {
    pub certified: bool,
    pub argmax_index: usize,
    /// First index `i` with `L[i][x] * e >= v[x] - v[i]`, when rejected.
    pub failing_index: Option<usize>,
}

/// Accept `v_out` iff every other logit trails the top one by strictly more
/// than `L[i][x] * e`.
///
/// If accepted, every input producing `v_out` under a network whose true
/// margin Lipschitz constants are bounded by `bounds` is robust at radius
/// `e`. Equal top logits are always rejected, including at `e = 0`.
pub fn certify(v_out: &Vector, e: &Rational, bounds: &LipschitzBounds) -> Result<CertificationResult> {
    if v_out.len() != bounds.dim() {
        return Err(Error::DimensionMismatch {
            op: "certify",
            left: bounds.dim(),
            right: v_out.len(),
        });
    }
    if e.is_negative() {
        return Err(Error::NegativeEpsilon(e.to_string()));
    }
    let x = argmax(v_out);
    let top = &v_out[x];
    let failing_index = (0..v_out.len())
        .filter(|&i| i != x)
        .find(|&i| bounds.get(i, x) * e >= top - &v_out[i]);
    Ok(CertificationResult {
        certified: failing_index.is_none(),
        argmax_index: x,
        failing_index,
    })
}
