//! Brute-force reference computations used as independent test oracles.
//!
//! Nothing in here shares code paths with the production routines it is
//! compared against: matrix products go through an explicit recursive
//! transpose, square roots through integer Newton iteration, and norm lower
//! bounds through exact Rayleigh-style quotients.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::nn::NeuralNet;
use crate::rational::Rational;

fn first_column(rows: &[Vec<Rational>]) -> Vec<Rational> {
    rows.iter().map(|r| r[0].clone()).collect()
}

fn remove_first_column(rows: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    rows.iter().map(|r| r[1..].to_vec()).collect()
}

/// Recursive column-peeling transpose.
pub fn naive_transpose(m: &Matrix) -> Matrix {
    fn go(rows: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
        let mut out = vec![first_column(rows)];
        if rows[0].len() > 1 {
            out.extend(go(&remove_first_column(rows)));
        }
        out
    }
    Matrix::from_rows(go(&m.to_rows())).expect("non-empty")
}

fn naive_dot(a: &[Rational], b: &[Rational]) -> Rational {
    match (a.split_first(), b.split_first()) {
        (Some((x, xs)), Some((y, ys))) if !xs.is_empty() => x * y + naive_dot(xs, ys),
        (Some((x, _)), Some((y, _))) => x * y,
        _ => unreachable!("vectors are non-empty"),
    }
}

/// Textbook product, one row at a time against the columns of `b`.
pub fn naive_mm_product(a: &Matrix, b: &Matrix) -> Result<Matrix> {
    if a.cols() != b.rows() {
        return Err(Error::DimensionMismatch {
            op: "naive_mm_product",
            left: a.cols(),
            right: b.rows(),
        });
    }
    let bt = naive_transpose(b);
    let rows = a
        .row_iter()
        .map(|row| bt.row_iter().map(|col| naive_dot(row, col)).collect())
        .collect();
    Matrix::from_rows(rows)
}

pub fn naive_mv_product(m: &Matrix, v: &Vector) -> Vector {
    Vector::new(m.row_iter().map(|row| naive_dot(row, v.as_slice())).collect()).expect("non-empty")
}

/// Network application by recursion on the layer prefix.
pub fn naive_apply_nn(net: &NeuralNet, v: &Vector) -> Vector {
    fn body(layers: &[Matrix], v: &Vector) -> Vector {
        let (last, prefix) = layers.split_last().expect("non-empty");
        let input = if prefix.is_empty() { v.clone() } else { body(prefix, v) };
        naive_mv_product(last, &input).map(|x| {
            if *x >= Rational::zero() {
                x.clone()
            } else {
                Rational::zero()
            }
        })
    }
    let layers = net.layers();
    let (last, prefix) = layers.split_last().expect("non-empty");
    let input = if prefix.is_empty() { v.clone() } else { body(prefix, v) };
    naive_mv_product(last, &input)
}

/// `||M v||^2 / ||v||^2`, a lower bound on `||M||_op^2` for any `v != 0`.
pub fn rayleigh_ratio_sq(m: &Matrix, v: &Vector) -> Rational {
    let mv = naive_mv_product(m, v);
    let num: Rational = mv.iter().map(Rational::square).sum();
    let den: Rational = v.iter().map(Rational::square).sum();
    num / den
}

/// A rational `l` with `l <= sqrt(x)`, from `x / u` for any `u >= sqrt(x)`.
pub fn sqrt_lower_bound(x: &Rational) -> Rational {
    if x.is_zero() {
        return Rational::zero();
    }
    // Integer square roots of scaled numerator and denominator.
    let places = 30u32;
    let scale = num_traits::pow(BigUint::from(10u8), 2 * places as usize);
    let num = x.numer().magnitude() * &scale;
    let den = x.denom().magnitude();
    // floor(sqrt(num/den)) on the 10^-places grid.
    let root = isqrt(&(num / den));
    let lower = Rational::new(BigInt::from(root), num_traits::pow(BigInt::from(10u8), places as usize));
    debug_assert!(lower.square() <= *x);
    lower
}

/// `floor(sqrt(n))` by integer Newton iteration.
pub fn isqrt(n: &BigUint) -> BigUint {
    if n.is_zero() {
        return BigUint::zero();
    }
    let bits = n.bits();
    let mut x = BigUint::one() << bits.div_ceil(2);
    loop {
        let y = (&x + n / &x) >> 1;
        if y >= x {
            break;
        }
        x = y;
    }
    debug_assert!(&x * &x <= *n && (&x + 1u8) * (&x + 1u8) > *n);
    x
}

/// `sqrt(x)` truncated to `digits` decimal places.
pub fn decimal_sqrt(x: u64, digits: u32) -> Rational {
    let scale = num_traits::pow(BigUint::from(10u8), 2 * digits as usize);
    let root = isqrt(&(BigUint::from(x) * scale));
    Rational::new(BigInt::from(root), num_traits::pow(BigInt::from(10u8), digits as usize))
}

fn random_probe(rng: &mut ChaCha8Rng, dim: usize) -> Vector {
    loop {
        let v: Vec<i64> = (0..dim).map(|_| rng.random_range(-1000..=1000)).collect();
        if v.iter().any(|&c| c != 0) {
            return Vector::from_integers(&v).expect("dim >= 1");
        }
    }
}

/// Largest `||M v||^2 / ||v||^2` over random integer probes and the basis
/// vectors. Every value is at most `||M||_op^2`.
pub fn sampled_opnorm_lower_bound_sq(m: &Matrix, probes: usize, seed: u64) -> Rational {
    let dim = m.cols();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let basis = (0..dim).map(|j| {
        Vector::new(
            (0..dim)
                .map(|i| if i == j { Rational::one() } else { Rational::zero() })
                .collect(),
        )
        .expect("dim >= 1")
    });
    let random = (0..probes).map(|_| random_probe(&mut rng, dim));
    basis
        .chain(random)
        .map(|v| rayleigh_ratio_sq(m, &v))
        .max()
        .expect("at least one probe")
}

/// Rational lower bound on `||M||_op` from sampled probes.
pub fn sampled_opnorm_lower_bound(m: &Matrix, probes: usize, seed: u64) -> Rational {
    sqrt_lower_bound(&sampled_opnorm_lower_bound_sq(m, probes, seed))
}

/// Power method on `M^T M` without any additive guard in the normalization.
///
/// The iterate is divided by its max-abs component (no square roots) and
/// snapped to a `10^-24` grid to keep its size bounded; the result is the
/// exact quotient `||M v||^2 / ||v||^2` of the final iterate, which never
/// exceeds `||M||_op^2` whatever `v` is.
pub fn correct_power_method_sq(m: &Matrix, iters: usize, seed: u64) -> Rational {
    const GRID: u32 = 24;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = random_probe(&mut rng, m.cols());
    let mt = naive_transpose(m);
    for _ in 0..iters.max(1) {
        let w = m.mv_product(&v).and_then(|mv| mt.mv_product(&mv)).expect("dims agree");
        let scale = w.iter().map(Rational::abs).max().expect("non-empty");
        if scale.is_zero() {
            // v is in the kernel; any nonzero probe is still a valid witness.
            break;
        }
        let next = w.map(|x| (x / &scale).floor_to_places(GRID));
        if next.iter().all(Rational::is_zero) {
            break;
        }
        v = next;
    }
    rayleigh_ratio_sq(m, &v)
}

/// Rational lower bound on `||M||_op` from the guard-free power method.
pub fn correct_power_method(m: &Matrix, iters: usize, seed: u64) -> Rational {
    sqrt_lower_bound(&correct_power_method_sq(m, iters, seed))
}

/// Round an exact rational to the nearest binary32 value, ties to even.
pub fn round_to_f32(x: &Rational) -> f32 {
    if x.is_zero() {
        return 0.0;
    }
    let negative = x.is_negative();
    let num = x.numer().abs().to_biguint().expect("abs");
    let den = x.denom().to_biguint().expect("positive");

    // Find e with 2^e <= |x| < 2^(e+1).
    let mut e = num.bits() as i64 - den.bits() as i64;
    let ge = |e: i64| -> bool {
        if e >= 0 {
            num >= (&den << e as usize)
        } else {
            (&num << (-e) as usize) >= den
        }
    };
    if !ge(e) {
        e -= 1;
    }
    // Normal numbers keep 24 significant bits; subnormals have a fixed
    // quantum of 2^-149.
    let quantum_exp = (e - 23).max(-149);
    // Scaled = |x| / 2^quantum_exp, split into integer and remainder.
    let (sn, sd) = if quantum_exp >= 0 {
        (num.clone(), &den << quantum_exp as usize)
    } else {
        (&num << (-quantum_exp) as usize, den.clone())
    };
    let (mut q, r) = sn.div_rem(&sd);
    let twice_r = &r << 1usize;
    if twice_r > sd || (twice_r == sd && q.bit(0)) {
        q += 1u8;
    }
    let mag = if q.is_zero() {
        0.0f64
    } else {
        let qf = q.to_u64_digits().first().copied().unwrap_or(0) as f64;
        if quantum_exp > 127 {
            f64::INFINITY
        } else {
            qf * 2f64.powi(quantum_exp as i32)
        }
    };
    let mag = if mag >= 2f64.powi(128) { f64::INFINITY } else { mag };
    let v = mag as f32;
    if negative {
        -v
    } else {
        v
    }
}
