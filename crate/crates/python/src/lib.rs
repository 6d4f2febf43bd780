//! Python bindings. Exact values cross the boundary as strings: decimals
//! (`"0.9"`, `"1e-5"`) or fractions (`"9/10"`) going in, canonical
//! `"num/den"` coming out, so `fractions.Fraction` round-trips them.

use pyo3::exceptions::{PyIOError, PyIndexError, PyValueError};
use pyo3::prelude::*;

use lipcert::sqrt::SqrtConfig;
use lipcert::{Error, Matrix, Rational, Vector};

fn to_py(e: Error) -> PyErr {
    match e {
        Error::Io { .. } => PyIOError::new_err(e.to_string()),
        Error::InvalidPair { .. } => PyIndexError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

fn rational(text: &str) -> PyResult<Rational> {
    text.trim()
        .parse()
        .map_err(|e: lipcert::ParseError| PyValueError::new_err(e.to_string()))
}

fn vector(values: Vec<String>) -> PyResult<Vector> {
    let values = values.iter().map(|s| rational(s)).collect::<PyResult<Vec<_>>>()?;
    Vector::new(values).map_err(to_py)
}

fn strings(v: &Vector) -> Vec<String> {
    v.iter().map(Rational::to_exact_string).collect()
}

fn sqrt_config(err: Option<&str>, max_iters: Option<u64>) -> PyResult<SqrtConfig> {
    let mut cfg = SqrtConfig::default();
    if let Some(err) = err {
        cfg.err_tolerance = rational(err)?;
    }
    if let Some(n) = max_iters {
        cfg.max_iterations = n;
    }
    cfg.validate().map_err(to_py)?;
    Ok(cfg)
}

/// Dense ReLU network with exact rational weights.
#[pyclass(name = "NeuralNet", frozen)]
struct PyNeuralNet {
    inner: lipcert::NeuralNet,
}

#[pymethods]
impl PyNeuralNet {
    /// Build from a list of layers, each a list of rows of number strings.
    #[new]
    fn new(layers: Vec<Vec<Vec<String>>>) -> PyResult<Self> {
        let layers = layers
            .into_iter()
            .map(|rows| {
                let rows = rows
                    .into_iter()
                    .map(|row| row.iter().map(|s| rational(s)).collect::<PyResult<Vec<_>>>())
                    .collect::<PyResult<Vec<_>>>()?;
                Matrix::from_rows(rows).map_err(to_py)
            })
            .collect::<PyResult<Vec<_>>>()?;
        Ok(PyNeuralNet {
            inner: lipcert::NeuralNet::new(layers).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        Ok(PyNeuralNet {
            inner: lipcert::parse_model(text).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(PyNeuralNet {
            inner: lipcert::load_model(path).map_err(to_py)?,
        })
    }

    fn to_text(&self) -> String {
        lipcert::format_model(&self.inner)
    }

    #[getter]
    fn depth(&self) -> usize {
        self.inner.depth()
    }

    #[getter]
    fn input_dim(&self) -> usize {
        self.inner.input_dim()
    }

    #[getter]
    fn output_dim(&self) -> usize {
        self.inner.output_dim()
    }

    fn digest(&self) -> String {
        self.inner.digest()
    }

    /// Exact network output as `"num/den"` strings.
    fn apply(&self, v: Vec<String>) -> PyResult<Vec<String>> {
        let out = self.inner.apply(&vector(v)?).map_err(to_py)?;
        Ok(strings(&out))
    }

    fn argmax(&self, v: Vec<String>) -> PyResult<usize> {
        let out = self.inner.apply(&vector(v)?).map_err(to_py)?;
        Ok(lipcert::argmax(&out))
    }

    /// `False` proves non-robustness at `v`; `True` is sampling evidence only.
    #[pyo3(signature = (v, epsilon, samples = 10_000, seed = 0))]
    fn sampled_robustness_check(&self, v: Vec<String>, epsilon: &str, samples: usize, seed: u64) -> PyResult<bool> {
        lipcert::sampled_robustness_check(&self.inner, &vector(v)?, &rational(epsilon)?, samples, seed).map_err(to_py)
    }

    fn __repr__(&self) -> String {
        let dims: Vec<String> = self
            .inner
            .layers()
            .iter()
            .map(|m| format!("{}x{}", m.rows(), m.cols()))
            .collect();
        format!("NeuralNet([{}])", dims.join(", "))
    }
}

/// Margin Lipschitz bounds for every pair of output classes.
#[pyclass(name = "LipschitzBounds", frozen)]
struct PyLipschitzBounds {
    inner: lipcert::LipschitzBounds,
}

#[pymethods]
impl PyLipschitzBounds {
    #[staticmethod]
    #[pyo3(signature = (net, gram_iterations, sqrt_err = None, sqrt_max_iters = None))]
    fn compute(
        py: Python<'_>,
        net: &PyNeuralNet,
        gram_iterations: usize,
        sqrt_err: Option<&str>,
        sqrt_max_iters: Option<u64>,
    ) -> PyResult<Self> {
        let cfg = sqrt_config(sqrt_err, sqrt_max_iters)?;
        let net = net.inner.clone();
        let inner = py.detach(move || lipcert::gen_all_bounds(&net, gram_iterations, &cfg));
        Ok(PyLipschitzBounds { inner })
    }

    #[staticmethod]
    fn from_text(text: &str) -> PyResult<Self> {
        Ok(PyLipschitzBounds {
            inner: lipcert::parse_bounds(text).map_err(to_py)?,
        })
    }

    #[staticmethod]
    fn load(path: &str) -> PyResult<Self> {
        Ok(PyLipschitzBounds {
            inner: lipcert::load_bounds(path).map_err(to_py)?,
        })
    }

    fn save(&self, path: &str) -> PyResult<()> {
        lipcert::save_bounds(&self.inner, path).map_err(to_py)
    }

    fn to_text(&self) -> String {
        lipcert::format_bounds(&self.inner)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn gram_iterations(&self) -> usize {
        self.inner.gram_iterations
    }

    #[getter]
    fn model_digest(&self) -> String {
        self.inner.model_digest.clone()
    }

    fn get(&self, i: usize, k: usize) -> PyResult<String> {
        let dim = self.inner.dim();
        if i >= dim || k >= dim {
            return Err(PyIndexError::new_err(format!(
                "pair ({i}, {k}) out of range for dimension {dim}"
            )));
        }
        Ok(self.inner.get(i, k).to_exact_string())
    }

    fn certify(&self, v: Vec<String>, epsilon: &str) -> PyResult<(bool, usize, Option<usize>)> {
        certify(v, epsilon, self)
    }
}

/// Certify an output vector: `(certified, argmax, failing_index)`.
#[pyfunction]
fn certify(v: Vec<String>, epsilon: &str, bounds: &PyLipschitzBounds) -> PyResult<(bool, usize, Option<usize>)> {
    let r = lipcert::certify(&vector(v)?, &rational(epsilon)?, &bounds.inner).map_err(to_py)?;
    Ok((r.certified, r.argmax_index, r.failing_index))
}

/// Certified upper bound on `sqrt(x)` as `"num/den"`.
#[pyfunction]
#[pyo3(signature = (x, err = None, max_iters = None))]
fn sqrt_upper_bound(x: &str, err: Option<&str>, max_iters: Option<u64>) -> PyResult<String> {
    let cfg = sqrt_config(err, max_iters)?;
    let bound = lipcert::sqrt_upper_bound(&rational(x)?, &cfg).map_err(to_py)?;
    Ok(bound.value.to_exact_string())
}

/// Upper bound on the spectral norm of a matrix after `n` Gram iterations.
#[pyfunction]
#[pyo3(signature = (rows, n, sqrt_err = None))]
fn gram_bound(py: Python<'_>, rows: Vec<Vec<String>>, n: usize, sqrt_err: Option<&str>) -> PyResult<String> {
    let rows = rows
        .into_iter()
        .map(|row| row.iter().map(|s| rational(s)).collect::<PyResult<Vec<_>>>())
        .collect::<PyResult<Vec<_>>>()?;
    let m = Matrix::from_rows(rows).map_err(to_py)?;
    let cfg = sqrt_config(sqrt_err, None)?;
    let bound = py.detach(move || lipcert::gram_iteration(&m, n, &cfg));
    Ok(bound.value.to_exact_string())
}

/// Canonical `"num/den"` form of a decimal or fraction literal.
#[pyfunction]
fn parse_rational(text: &str) -> PyResult<String> {
    Ok(rational(text)?.to_exact_string())
}

#[pymodule]
fn pylipcert(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyNeuralNet>()?;
    m.add_class::<PyLipschitzBounds>()?;
    m.add_function(wrap_pyfunction!(certify, m)?)?;
    m.add_function(wrap_pyfunction!(sqrt_upper_bound, m)?)?;
    m.add_function(wrap_pyfunction!(gram_bound, m)?)?;
    m.add_function(wrap_pyfunction!(parse_rational, m)?)?;
    Ok(())
}
