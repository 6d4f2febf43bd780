//! Sound l2 robustness certification for dense ReLU networks.
//!
//! Every quantity is an exact rational. Operator norms are bounded from
//! above by Gram iteration with explicit truncation error, and square roots
//! by Heron's method started from above, so any bound reported here is a
//! true upper bound rather than a floating-point estimate.
//!
//! ```
//! use lipcert::{certify, gen_all_bounds, parse_model, Rational, SqrtConfig, Vector};
//!
//! let net = parse_model("0.9\n\n1.0\n-1.0\n").unwrap();
//! let bounds = gen_all_bounds(&net, 8, &SqrtConfig::default());
//! let out = net.apply(&Vector::from_integers(&[1]).unwrap()).unwrap();
//! assert!(certify(&out, &Rational::new(1, 2), &bounds).unwrap().certified);
//! assert!(!certify(&out, &Rational::from(1), &bounds).unwrap().certified);
//! ```

pub mod certify;
pub mod cli;
pub mod error;
pub mod gram;
pub mod io;
pub mod linalg;
pub mod lipschitz;
pub mod nn;
pub mod oracle;
pub mod rational;
pub mod sqrt;
pub mod unsound_ref;

pub use certify::{certify, CertificationResult};
pub use error::{Error, ParseError, Result};
pub use gram::{expand, gram_iteration, gram_iteration_with, GramConfig, IterationRecord, OperatorNormBound};
pub use io::{
    format_bounds, format_model, load_bounds, load_model, parse_bounds, parse_model, save_bounds, save_model,
};
pub use linalg::{Matrix, Vector};
pub use lipschitz::{gen_all_bounds, gen_all_bounds_with, gen_lipschitz_bound, layer_norm_bounds, LipschitzBounds};
pub use nn::{apply_nn, argmax, find_counterexample, relu, sampled_robustness_check, NeuralNet};
pub use rational::Rational;
pub use sqrt::{sqrt_upper_bound, SqrtBound, SqrtConfig};
