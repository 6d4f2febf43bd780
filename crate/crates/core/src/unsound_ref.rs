//! Single-precision reference of a previously published, unverified
//! certifier, kept to reproduce its three unsound behaviors in tests:
//!
//! * underflow of margin bounds to 0 for tiny weights,
//! * power iteration whose `v / (||v|| + eps)` normalization shrinks the
//!   iterate when `||v|| << eps`, underestimating layer norms,
//! * a bottom-logit computation that masks every entry equal to the top
//!   logit, so equal-logit outputs certify at any radius.
//!
//! Nothing here is reachable from the command line.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// IEEE-754 binary32 value; each operation rounds to nearest-even.
#[derive(Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct Float32Value(pub f32);

impl Float32Value {
    pub const NEG_INFINITY: Float32Value = Float32Value(f32::NEG_INFINITY);
    /// Smallest positive normal single-precision value.
    pub const TINY: Float32Value = Float32Value(f32::MIN_POSITIVE);

    pub fn sqrt(self) -> Self {
        Float32Value(self.0.sqrt())
    }

    pub fn abs(self) -> Self {
        Float32Value(self.0.abs())
    }

    pub fn max(self, other: Self) -> Self {
        if other.0 > self.0 {
            other
        } else {
            self
        }
    }
}

impl fmt::Debug for Float32Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:e}f32", self.0)
    }
}

impl From<f32> for Float32Value {
    fn from(x: f32) -> Self {
        Float32Value(x)
    }
}

macro_rules! f32_op {
    ($trait:ident, $method:ident, $op:tt) => {
        impl $trait for Float32Value {
            type Output = Float32Value;
            fn $method(self, rhs: Float32Value) -> Float32Value {
                Float32Value(self.0 $op rhs.0)
            }
        }
    };
}

f32_op!(Add, add, +);
f32_op!(Sub, sub, -);
f32_op!(Mul, mul, *);
f32_op!(Div, div, /);

impl Neg for Float32Value {
    type Output = Float32Value;
    fn neg(self) -> Float32Value {
        Float32Value(-self.0)
    }
}

pub type F32Matrix = Vec<Vec<Float32Value>>;

/// Default normalization guard of the reference power method.
pub const REF_EPS_GUARD: Float32Value = Float32Value(1e-9);

fn l2(v: &[Float32Value]) -> Float32Value {
    v.iter().fold(Float32Value(0.0), |acc, &x| acc + x * x).sqrt()
}

fn mv(m: &F32Matrix, v: &[Float32Value]) -> Vec<Float32Value> {
    m.iter()
        .map(|row| row.iter().zip(v).fold(Float32Value(0.0), |acc, (&a, &b)| acc + a * b))
        .collect()
}

fn mtv(m: &F32Matrix, v: &[Float32Value]) -> Vec<Float32Value> {
    let cols = m[0].len();
    (0..cols)
        .map(|j| {
            m.iter()
                .zip(v)
                .fold(Float32Value(0.0), |acc, (row, &b)| acc + row[j] * b)
        })
        .collect()
}

/// Power-method norm estimate with the guarded normalization
/// `v <- M^T M v / (||M^T M v|| + eps_guard)`.
///
/// The normalized iterate is then treated as a unit vector, so the
/// estimate is `||M v||`. When `||M^T M v||` is far below `eps_guard` the
/// iterate shrinks on every step and the estimate falls below the true
/// operator norm.
pub fn ref_power_method_norm(m: &F32Matrix, iters: usize, eps_guard: Float32Value) -> Float32Value {
    let cols = m[0].len();
    let start = Float32Value(1.0) / Float32Value(cols as f32).sqrt();
    let mut v = vec![start; cols];
    for _ in 0..iters.max(1) {
        let u = mtv(m, &mv(m, &v));
        let scale = l2(&u) + eps_guard;
        v = u.into_iter().map(|x| x / scale).collect();
    }
    l2(&mv(m, &v))
}

/// Reference margin bound for output pair `(i, k)`: product of power-method
/// estimates of the hidden layers times the f32 l2 norm of the row
/// difference of the final layer.
pub fn ref_margin_lipschitz(
    layers: &[F32Matrix],
    i: usize,
    k: usize,
    iters: usize,
    eps_guard: Float32Value,
) -> Float32Value {
    let (last, hidden) = layers.split_last().expect("non-empty network");
    let diff: Vec<Float32Value> = last[k].iter().zip(&last[i]).map(|(&a, &b)| a - b).collect();
    hidden.iter().fold(l2(&diff), |acc, layer| {
        ref_power_method_norm(layer, iters, eps_guard) * acc
    })
}

/// Largest reference margin bound over the rows of a final-layer matrix,
/// computed entirely in single precision.
pub fn ref_tiny_weight_lipschitz(m: &F32Matrix) -> Float32Value {
    let mut best = Float32Value(0.0);
    for i in 0..m.len() {
        for k in i + 1..m.len() {
            best = best.max(ref_margin_lipschitz(std::slice::from_ref(m), i, k, 1, REF_EPS_GUARD));
        }
    }
    best
}

/// The reference bottom logit: `max_i m_i` with `z_i = y_i + eps * L[i][j]`
/// and `m_i = -inf` wherever `y_i == y_j` (`j` the argmax).
pub fn ref_bot_logit(y: &[Float32Value], eps: Float32Value, lipschitz: &[Vec<Float32Value>]) -> Float32Value {
    let j = ref_argmax(y);
    let top = y[j];
    y.iter()
        .enumerate()
        .map(|(i, &yi)| {
            if yi == top {
                Float32Value::NEG_INFINITY
            } else {
                yi + eps * lipschitz[i][j]
            }
        })
        .fold(Float32Value::NEG_INFINITY, Float32Value::max)
}

fn ref_argmax(y: &[Float32Value]) -> usize {
    let mut best = 0;
    for (i, x) in y.iter().enumerate().skip(1) {
        if x.0 > y[best].0 {
            best = i;
        }
    }
    best
}

/// The reference accepts when the appended bottom logit does not win the
/// argmax (ties go to the earlier, real class).
pub fn ref_certify(y: &[Float32Value], eps: Float32Value, lipschitz: &[Vec<Float32Value>]) -> bool {
    ref_bot_logit(y, eps, lipschitz).0 <= y[ref_argmax(y)].0
}
