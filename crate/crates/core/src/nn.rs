//! Dense ReLU networks without biases, evaluated exactly.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{Matrix, Vector};
use crate::rational::Rational;

/// Layer matrices applied in order; `rows(layers[i]) == cols(layers[i + 1])`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeuralNet {
    layers: Vec<Matrix>,
}

impl NeuralNet {
    pub fn new(layers: Vec<Matrix>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Empty("network"));
        }
        for (prev, pair) in layers.windows(2).enumerate() {
            if pair[0].rows() != pair[1].cols() {
                return Err(Error::LayerChain {
                    prev,
                    next: prev + 1,
                    expected: pair[1].cols(),
                    found: pair[0].rows(),
                });
            }
        }
        Ok(NeuralNet { layers })
    }

    pub fn layers(&self) -> &[Matrix] {
        &self.layers
    }

    pub fn depth(&self) -> usize {
        self.layers.len()
    }

    pub fn last_layer(&self) -> &Matrix {
        self.layers.last().expect("non-empty network")
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].cols()
    }

    pub fn output_dim(&self) -> usize {
        self.last_layer().rows()
    }

    pub fn is_input(&self, v: &Vector) -> bool {
        v.len() == self.input_dim()
    }

    pub fn is_output(&self, v: &Vector) -> bool {
        v.len() == self.output_dim()
    }

    /// ReLU after every layer except the last.
    pub fn apply(&self, v: &Vector) -> Result<Vector> {
        if !self.is_input(v) {
            return Err(Error::DimensionMismatch {
                op: "apply_nn",
                left: self.input_dim(),
                right: v.len(),
            });
        }
        let (last, hidden) = self.layers.split_last().expect("non-empty network");
        let mut x = v.clone();
        for layer in hidden {
            x = layer.mv_product(&x)?.map(relu);
        }
        last.mv_product(&x)
    }

    /// SHA-256 of the canonical model text.
    pub fn digest(&self) -> String {
        crate::io::model_digest(self)
    }
}

pub fn apply_nn(net: &NeuralNet, v: &Vector) -> Result<Vector> {
    net.apply(v)
}

pub fn relu(x: &Rational) -> Rational {
    if x.is_negative() {
        Rational::zero()
    } else {
        x.clone()
    }
}

/// Index of the maximum; ties go to the lowest index.
pub fn argmax(v: &Vector) -> usize {
    argmax_slice(v.as_slice())
}

pub(crate) fn argmax_slice(v: &[Rational]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate().skip(1) {
        if *x > v[best] {
            best = i;
        }
    }
    best
}

/// Draw a perturbation with `||delta||^2 <= e^2`, checked exactly.
///
/// The direction is a Gaussian sample scaled to integers; the radius is `e`
/// half of the time and a uniform fraction of `e` otherwise.
pub fn sample_perturbation<R: Rng + ?Sized>(rng: &mut R, dim: usize, e: &Rational) -> Vector {
    const DIRECTION_SCALE: f64 = 1e6;
    if e.is_zero() {
        return Vector::new(vec![Rational::zero(); dim]).expect("dim >= 1");
    }
    let z: Vec<i64> = loop {
        let z: Vec<i64> = (0..dim)
            .map(|_| {
                let g: f64 = rng.sample(StandardNormal);
                (g * DIRECTION_SCALE).round() as i64
            })
            .collect();
        if z.iter().any(|&c| c != 0) {
            break z;
        }
    };
    let norm_sq: u128 = z.iter().map(|&c| (c as i128 * c as i128) as u128).sum();
    let mut s = (norm_sq as f64).sqrt().ceil() as u128;
    while s * s < norm_sq {
        s += 1;
    }
    let radius = if rng.random_bool(0.5) {
        e.clone()
    } else {
        e * Rational::new(rng.random_range(0..=1000i64), 1000)
    };
    let factor = radius / Rational::from(s as u64);
    let delta = Vector::new(z.into_iter().map(|c| Rational::from(c) * &factor).collect()).expect("dim >= 1");
    debug_assert!(delta.sum_of_squares() <= e.square());
    delta
}

/// First sampled input within distance `e` of `v` whose prediction differs
/// from that of `v`, if any.
pub fn find_counterexample(
    net: &NeuralNet,
    v: &Vector,
    e: &Rational,
    samples: usize,
    seed: u64,
) -> Result<Option<Vector>> {
    if e.is_negative() {
        return Err(Error::NegativeEpsilon(e.to_string()));
    }
    let expected = argmax(&net.apply(v)?);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let delta = sample_perturbation(&mut rng, v.len(), e);
        if delta.sum_of_squares() > e.square() {
            continue;
        }
        let u = v.plus(&delta)?;
        if argmax(&net.apply(&u)?) != expected {
            return Ok(Some(u));
        }
    }
    Ok(None)
}

/// Sampling refutation oracle for robustness at `v`.
///
/// `false` proves `v` is not robust at radius `e`; `true` is only evidence.
pub fn sampled_robustness_check(net: &NeuralNet, v: &Vector, e: &Rational, samples: usize, seed: u64) -> Result<bool> {
    Ok(find_counterexample(net, v, e, samples, seed)?.is_none())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn scalar_layer(w: Rational) -> Matrix {
        Matrix::from_rows(vec![vec![w]]).unwrap()
    }

    fn toy_net(w: Rational) -> NeuralNet {
        NeuralNet::new(vec![scalar_layer(w), Matrix::from_integers(&[&[1], &[-1]]).unwrap()]).unwrap()
    }

    #[test]
    fn chain_is_validated() {
        let a = Matrix::from_integers(&[&[1, 0], &[0, 1]]).unwrap();
        let b = Matrix::from_integers(&[&[1, 2, 3]]).unwrap();
        assert!(matches!(
            NeuralNet::new(vec![a, b]),
            Err(Error::LayerChain {
                prev: 0,
                next: 1,
                expected: 3,
                found: 2
            })
        ));
        assert!(matches!(NeuralNet::new(vec![]), Err(Error::Empty(_))));
    }

    #[test]
    fn is_input_examples() {
        let net = NeuralNet::new(vec![Matrix::zeros(3, 2).unwrap()]).unwrap();
        assert!(net.is_input(&Vector::from_integers(&[1, 2]).unwrap()));
        assert!(!net.is_input(&Vector::from_integers(&[1, 2, 3]).unwrap()));
        let unit = NeuralNet::new(vec![scalar_layer(Rational::one())]).unwrap();
        assert!(unit.is_input(&Vector::from_integers(&[4]).unwrap()));
    }

    #[test]
    fn apply_examples() {
        let unit = NeuralNet::new(vec![scalar_layer(Rational::one())]).unwrap();
        assert_eq!(
            unit.apply(&Vector::from_integers(&[-2]).unwrap()).unwrap(),
            Vector::from_integers(&[-2]).unwrap()
        );
        let net = toy_net(q(9, 10));
        assert_eq!(
            net.apply(&Vector::from_integers(&[1]).unwrap()).unwrap(),
            Vector::new(vec![q(9, 10), q(-9, 10)]).unwrap()
        );
        assert_eq!(
            net.apply(&Vector::from_integers(&[-1]).unwrap()).unwrap(),
            Vector::from_integers(&[0, 0]).unwrap()
        );
        assert!(net.apply(&Vector::from_integers(&[1, 1]).unwrap()).is_err());
    }

    #[test]
    fn relu_examples() {
        assert_eq!(relu(&Rational::from(5)), Rational::from(5));
        assert_eq!(relu(&Rational::from(-5)), Rational::zero());
        assert_eq!(relu(&Rational::zero()), Rational::zero());
    }

    #[test]
    fn argmax_examples() {
        assert_eq!(argmax(&Vector::from_integers(&[0, 0]).unwrap()), 0);
        assert_eq!(argmax(&Vector::from_integers(&[1, 3, 2]).unwrap()), 1);
        assert_eq!(argmax(&Vector::from_integers(&[2, 2, 3]).unwrap()), 2);
    }

    #[test]
    fn perturbations_stay_in_ball() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let e = q(3, 7);
        for dim in 1..6 {
            for _ in 0..200 {
                let d = sample_perturbation(&mut rng, dim, &e);
                assert_eq!(d.len(), dim);
                assert!(d.sum_of_squares() <= e.square());
            }
        }
    }

    #[test]
    fn zero_radius_is_trivially_robust() {
        let net = toy_net(q(9, 10));
        let v = Vector::from_integers(&[0]).unwrap();
        assert!(sampled_robustness_check(&net, &v, &Rational::zero(), 100, 1).unwrap());
    }

    #[test]
    fn single_output_is_trivially_robust() {
        let net = NeuralNet::new(vec![Matrix::from_integers(&[&[1, -1]]).unwrap()]).unwrap();
        let v = Vector::from_integers(&[0, 0]).unwrap();
        assert!(sampled_robustness_check(&net, &v, &Rational::from(5), 200, 2).unwrap());
    }

    #[test]
    fn decision_boundary_is_refuted() {
        // Without a hidden ReLU, input 0 sits on the decision boundary.
        let net = NeuralNet::new(vec![Matrix::from_rows(vec![vec![q(9, 10)], vec![q(-9, 10)]]).unwrap()]).unwrap();
        let v = Vector::from_integers(&[0]).unwrap();
        assert!(!sampled_robustness_check(&net, &v, &q(1, 10), 1000, 3).unwrap());
    }

    #[test]
    fn hidden_relu_removes_the_boundary() {
        // With the hidden ReLU every input of the toy net predicts class 0:
        // negative inputs give [0, 0] and ties go to index 0.
        let net = toy_net(q(9, 10));
        let v = Vector::from_integers(&[0]).unwrap();
        assert!(sampled_robustness_check(&net, &v, &Rational::from(2), 1000, 4).unwrap());
    }

    #[test]
    fn negative_radius_is_rejected() {
        let net = toy_net(q(9, 10));
        let v = Vector::from_integers(&[0]).unwrap();
        assert!(sampled_robustness_check(&net, &v, &Rational::from(-1), 1, 0).is_err());
    }
}
