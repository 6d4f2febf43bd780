//! Margin Lipschitz bounds for every pair of output classes.
//!
//! For output classes `i` and `k`, the margin `N(v)[k] - N(v)[i]` changes by
//! at most `L[i][k] * ||v - u||` between inputs `v` and `u`, where `L[i][k]`
//! is the product of operator-norm bounds of the hidden layers times the l2
//! norm of the difference of rows `k` and `i` of the final layer.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gram::{gram_iteration_with, GramConfig};
use crate::nn::NeuralNet;
use crate::rational::Rational;
use crate::sqrt::SqrtConfig;

/// Symmetric table of margin Lipschitz bounds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LipschitzBounds {
    dim: usize,
    table: Vec<Rational>,
    pub gram_iterations: usize,
    pub sqrt: SqrtConfig,
    pub model_digest: String,
}

impl LipschitzBounds {
    /// Build from a full `dim x dim` table. The diagonal is ignored and
    /// stored as zero; off-diagonal entries must be nonnegative and
    /// symmetric.
    pub fn from_table(
        table: Vec<Vec<Rational>>,
        gram_iterations: usize,
        sqrt: SqrtConfig,
        model_digest: impl Into<String>,
    ) -> Result<Self> {
        let dim = table.len();
        if dim == 0 {
            return Err(Error::Empty("bounds table"));
        }
        let mut flat = Vec::with_capacity(dim * dim);
        for (i, row) in table.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::InvalidBounds(format!(
                    "row {i} has {} entries, expected {dim}",
                    row.len()
                )));
            }
            for (k, x) in row.iter().enumerate() {
                if i == k {
                    flat.push(Rational::zero());
                    continue;
                }
                if x.is_negative() {
                    return Err(Error::InvalidBounds(format!("entry ({i}, {k}) is negative")));
                }
                if *x != table[k][i] {
                    return Err(Error::InvalidBounds(format!(
                        "entries ({i}, {k}) and ({k}, {i}) differ"
                    )));
                }
                flat.push(x.clone());
            }
        }
        Ok(LipschitzBounds {
            dim,
            table: flat,
            gram_iterations,
            sqrt,
            model_digest: model_digest.into(),
        })
    }

    /// Build from the upper triangle, `pairs[(i, k)]` for `i < k` in
    /// row-major order.
    pub(crate) fn from_upper(
        dim: usize,
        upper: Vec<Rational>,
        gram_iterations: usize,
        sqrt: SqrtConfig,
        model_digest: String,
    ) -> Self {
        debug_assert_eq!(upper.len(), dim * dim.saturating_sub(1) / 2);
        let mut table = vec![Rational::zero(); dim * dim];
        for ((i, k), value) in upper_pairs(dim).zip(upper) {
            table[k * dim + i] = value.clone();
            table[i * dim + k] = value;
        }
        LipschitzBounds {
            dim,
            table,
            gram_iterations,
            sqrt,
            model_digest,
        }
    }

    /// Output dimension.
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, k: usize) -> &Rational {
        &self.table[i * self.dim + k]
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.table[i * self.dim..(i + 1) * self.dim]
    }

    pub fn to_rows(&self) -> Vec<Vec<Rational>> {
        self.table.chunks_exact(self.dim).map(<[Rational]>::to_vec).collect()
    }

    /// `(i, k, L[i][k])` for every unordered pair with `i < k`.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize, &Rational)> + '_ {
        upper_pairs(self.dim).map(move |(i, k)| (i, k, self.get(i, k)))
    }
}

pub(crate) fn upper_pairs(dim: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..dim).flat_map(move |i| (i + 1..dim).map(move |k| (i, k)))
}

/// Margin Lipschitz bound for classes `i`, `k` given per-layer operator-norm
/// bounds `s` (one per layer; the final entry is not used).
pub fn gen_lipschitz_bound(net: &NeuralNet, i: usize, k: usize, s: &[Rational], cfg: &SqrtConfig) -> Result<Rational> {
    if s.len() != net.depth() {
        return Err(Error::DimensionMismatch {
            op: "gen_lipschitz_bound (norm bounds per layer)",
            left: net.depth(),
            right: s.len(),
        });
    }
    let dim = net.output_dim();
    if i >= dim || k >= dim || i == k {
        return Err(Error::InvalidPair { i, k, dim });
    }
    let last = net.last_layer();
    let d = last.row_vector(k).minus(&last.row_vector(i))?;
    let seed = d.l2_upper_bound(cfg);
    Ok(s[..s.len() - 1].iter().rev().fold(seed, |r, norm| norm * r))
}

/// Operator-norm bounds for each layer: Gram iteration for hidden layers,
/// the Frobenius bound for the final one.
pub fn layer_norm_bounds(net: &NeuralNet, cfg: &GramConfig) -> Vec<Rational> {
    let last = net.depth() - 1;
    net.layers()
        .par_iter()
        .enumerate()
        .map(|(j, layer)| {
            if j == last {
                layer.frobenius_norm_upper_bound(&cfg.sqrt)
            } else {
                gram_iteration_with(layer, cfg).value
            }
        })
        .collect()
}

/// Bounds for every output pair, each unordered pair computed once.
pub fn gen_all_bounds(net: &NeuralNet, gram_n: usize, cfg: &SqrtConfig) -> LipschitzBounds {
    gen_all_bounds_with(net, &GramConfig::new(gram_n, cfg.clone()))
}

pub fn gen_all_bounds_with(net: &NeuralNet, cfg: &GramConfig) -> LipschitzBounds {
    let s = layer_norm_bounds(net, cfg);
    let dim = net.output_dim();
    let pairs: Vec<_> = upper_pairs(dim).collect();
    let upper = pairs
        .par_iter()
        .map(|&(i, k)| gen_lipschitz_bound(net, i, k, &s, &cfg.sqrt).expect("valid pair"))
        .collect();
    LipschitzBounds::from_upper(dim, upper, cfg.iterations, cfg.sqrt.clone(), net.digest())
}
