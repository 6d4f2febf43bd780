#![allow(dead_code)]

use lipcert::{Matrix, NeuralNet, Rational, Vector};
use rand::Rng;

/// `k / 10^4` with `k` uniform in `[-10^4, 10^4]`.
pub fn four_decimal<R: Rng>(rng: &mut R) -> Rational {
    Rational::new(rng.random_range(-10_000i64..=10_000), 10_000)
}

pub fn random_matrix<R: Rng>(rng: &mut R, rows: usize, cols: usize) -> Matrix {
    let rows = (0..rows)
        .map(|_| (0..cols).map(|_| four_decimal(rng)).collect())
        .collect();
    Matrix::from_rows(rows).unwrap()
}

pub fn random_symmetric<R: Rng>(rng: &mut R, n: usize) -> Matrix {
    let upper = random_matrix(rng, n, n);
    Matrix::from_fn(n, n, |i, j| upper.get(i.min(j), i.max(j)).clone()).unwrap()
}

pub fn random_vector<R: Rng>(rng: &mut R, dim: usize) -> Vector {
    Vector::new((0..dim).map(|_| four_decimal(rng)).collect()).unwrap()
}

/// At most `max_depth` layers, widths at most `max_width`, at least two
/// outputs.
pub fn random_net<R: Rng>(rng: &mut R, max_depth: usize, max_width: usize) -> NeuralNet {
    let depth = rng.random_range(1..=max_depth);
    let mut widths = vec![rng.random_range(1..=max_width)];
    for j in 0..depth {
        let lo = if j + 1 == depth { 2 } else { 1 };
        widths.push(rng.random_range(lo..=max_width));
    }
    let layers = widths.windows(2).map(|w| random_matrix(rng, w[1], w[0])).collect();
    NeuralNet::new(layers).unwrap()
}

pub fn q(n: i64, d: i64) -> Rational {
    Rational::new(n, d)
}
