//! Text formats for models and bounds tables.
//!
//! Model files hold one matrix row per line as comma-separated numbers,
//! with a single blank line between layers. A layer with `r` rows and `c`
//! columns maps `c` inputs to `r` outputs. Numbers are decimal literals
//! (`-1.5e-3`) or exact fractions (`-3/2000`), both parsed without rounding.
//!
//! Bounds files are line oriented:
//!
//! ```text
//! version 1
//! dim 2
//! gram 8
//! sqrt 1/100000000000 2000000 40
//! model <sha256 of the canonical model text>
//! 0 1 1001/50000000
//! ```
//!
//! with one `i k num/den` line per unordered output pair. The `sqrt` line
//! is optional on input.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::lipschitz::{upper_pairs, LipschitzBounds};
use crate::nn::NeuralNet;
use crate::rational::Rational;
use crate::sqrt::SqrtConfig;

pub const BOUNDS_FORMAT_VERSION: u32 = 1;

fn read_file(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Parse a number as written in model files and on stdin.
pub fn parse_number(text: &str) -> std::result::Result<Rational, crate::error::ParseError> {
    text.parse()
}

pub fn load_model(path: impl AsRef<Path>) -> Result<NeuralNet> {
    let path = path.as_ref();
    parse_model_inner(&read_file(path)?, Some(path.to_path_buf()))
}

pub fn parse_model(text: &str) -> Result<NeuralNet> {
    parse_model_inner(text, None)
}

fn parse_model_inner(text: &str, path: Option<PathBuf>) -> Result<NeuralNet> {
    let mut lines: Vec<&str> = text.lines().collect();
    while lines.last().is_some_and(|l| l.trim().is_empty()) {
        lines.pop();
    }

    // (first line number, rows)
    let mut layers: Vec<(usize, Vec<Vec<Rational>>)> = vec![(1, Vec::new())];
    for (idx, line) in lines.iter().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            let (start, rows) = layers.last().expect("at least one layer");
            if rows.is_empty() {
                return Err(Error::ModelFormat {
                    path,
                    layer: layers.len() - 1,
                    line: *start,
                    reason: "is empty".into(),
                });
            }
            layers.push((line_no + 1, Vec::new()));
            continue;
        }
        let mut row = Vec::new();
        let mut column = 1;
        for field in line.split(',') {
            let lead = field.len() - field.trim_start().len();
            let token = field.trim();
            let value = parse_number(token).map_err(|source| Error::ModelLiteral {
                path: path.clone(),
                line: line_no,
                column: column + lead + source.position,
                source,
            })?;
            row.push(value);
            column += field.len() + 1;
        }
        let layer = layers.len() - 1;
        let (_, rows) = layers.last_mut().expect("at least one layer");
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(Error::ModelFormat {
                    path,
                    layer,
                    line: line_no,
                    reason: format!("row has {} values, expected {}", row.len(), first.len()),
                });
            }
        }
        rows.push(row);
    }
    if let Some((start, rows)) = layers.last() {
        if rows.is_empty() {
            return Err(Error::ModelFormat {
                path,
                layer: layers.len() - 1,
                line: *start,
                reason: "is empty".into(),
            });
        }
    }

    let starts: Vec<usize> = layers.iter().map(|(s, _)| *s).collect();
    let matrices = layers
        .into_iter()
        .map(|(_, rows)| Matrix::from_rows(rows))
        .collect::<Result<Vec<_>>>()?;
    for (prev, pair) in matrices.windows(2).enumerate() {
        if pair[0].rows() != pair[1].cols() {
            return Err(Error::ModelFormat {
                path,
                layer: prev + 1,
                line: starts[prev + 1],
                reason: format!(
                    "has {} columns but layer {prev} has {} rows",
                    pair[1].cols(),
                    pair[0].rows()
                ),
            });
        }
    }
    NeuralNet::new(matrices)
}

fn render_number(x: &Rational) -> String {
    x.to_decimal_exact().unwrap_or_else(|| x.to_exact_string())
}

/// Canonical model text; parsing it yields the same network.
pub fn format_model(net: &NeuralNet) -> String {
    let mut out = String::new();
    for (idx, layer) in net.layers().iter().enumerate() {
        if idx > 0 {
            out.push('\n');
        }
        for row in layer.row_iter() {
            let cells: Vec<String> = row.iter().map(render_number).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
    }
    out
}

pub fn save_model(net: &NeuralNet, path: impl AsRef<Path>) -> Result<()> {
    write_file(path.as_ref(), &format_model(net))
}

pub fn model_digest(net: &NeuralNet) -> String {
    let hash = Sha256::digest(format_model(net).as_bytes());
    hash.iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

/// Whether `bounds` were generated from `net`.
pub fn digest_matches(bounds: &LipschitzBounds, net: &NeuralNet) -> bool {
    bounds.model_digest == model_digest(net)
}

pub fn format_bounds(bounds: &LipschitzBounds) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "version {BOUNDS_FORMAT_VERSION}");
    let _ = writeln!(out, "dim {}", bounds.dim());
    let _ = writeln!(out, "gram {}", bounds.gram_iterations);
    let _ = writeln!(
        out,
        "sqrt {} {} {}",
        bounds.sqrt.err_tolerance.to_exact_string(),
        bounds.sqrt.max_iterations,
        bounds.sqrt.iterate_precision_places
    );
    let _ = writeln!(out, "model {}", bounds.model_digest);
    for (i, k, value) in bounds.pairs() {
        let _ = writeln!(out, "{i} {k} {}", value.to_exact_string());
    }
    out
}

pub fn save_bounds(bounds: &LipschitzBounds, path: impl AsRef<Path>) -> Result<()> {
    write_file(path.as_ref(), &format_bounds(bounds))
}

pub fn load_bounds(path: impl AsRef<Path>) -> Result<LipschitzBounds> {
    let path = path.as_ref();
    parse_bounds_inner(&read_file(path)?, Some(path.to_path_buf()))
}

pub fn parse_bounds(text: &str) -> Result<LipschitzBounds> {
    parse_bounds_inner(text, None)
}

fn parse_bounds_inner(text: &str, path: Option<PathBuf>) -> Result<LipschitzBounds> {
    let fail = |line: usize, reason: String| Error::BoundsFormat {
        path: path.clone(),
        line,
        reason,
    };
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
        .peekable();

    let header = |lines: &mut dyn Iterator<Item = (usize, &str)>, key: &str| -> Result<(usize, String)> {
        match lines.next() {
            Some((n, line)) => match line.split_once(' ') {
                Some((k, rest)) if k == key => Ok((n, rest.trim().to_string())),
                _ => Err(fail(n, format!("expected `{key}` header, found {line:?}"))),
            },
            None => Err(fail(0, format!("missing `{key}` header"))),
        }
    };

    let (n, version) = header(&mut lines, "version")?;
    if version != BOUNDS_FORMAT_VERSION.to_string() {
        return Err(fail(
            n,
            format!("unsupported version {version}, expected {BOUNDS_FORMAT_VERSION}"),
        ));
    }
    let (n, dim) = header(&mut lines, "dim")?;
    let dim: usize = dim.parse().map_err(|_| fail(n, format!("bad dimension {dim:?}")))?;
    if dim == 0 {
        return Err(fail(n, "dimension must be positive".into()));
    }
    let (n, gram) = header(&mut lines, "gram")?;
    let gram_iterations: usize = gram
        .parse()
        .map_err(|_| fail(n, format!("bad iteration count {gram:?}")))?;

    let mut sqrt = SqrtConfig::default();
    if lines.peek().is_some_and(|(_, l)| l.starts_with("sqrt ")) {
        let (n, rest) = header(&mut lines, "sqrt")?;
        let parts: Vec<&str> = rest.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(fail(
                n,
                format!("expected `sqrt <err> <iterations> <places>`, found {rest:?}"),
            ));
        }
        let err = Rational::parse_exact(parts[0]).map_err(|e| fail(n, e.to_string()))?;
        let iters = parts[1]
            .parse()
            .map_err(|_| fail(n, format!("bad iteration limit {:?}", parts[1])))?;
        let places = parts[2]
            .parse()
            .map_err(|_| fail(n, format!("bad precision {:?}", parts[2])))?;
        sqrt = SqrtConfig::new(err, iters, places).map_err(|e| fail(n, e.to_string()))?;
    }
    let (_, model_digest) = header(&mut lines, "model")?;

    let mut entries: HashMap<(usize, usize), Rational> = HashMap::new();
    for (n, line) in lines {
        let parts: Vec<&str> = line.split_whitespace().collect();
        if parts.len() != 3 {
            return Err(fail(n, format!("expected `i k num/den`, found {line:?}")));
        }
        let index = |s: &str| s.parse::<usize>().map_err(|_| fail(n, format!("bad index {s:?}")));
        let (i, k) = (index(parts[0])?, index(parts[1])?);
        if i >= dim || k >= dim || i == k {
            return Err(fail(n, format!("pair ({i}, {k}) invalid for dimension {dim}")));
        }
        let value = Rational::parse_exact(parts[2]).map_err(|e| fail(n, e.to_string()))?;
        if value.is_negative() {
            return Err(fail(n, format!("negative bound for pair ({i}, {k})")));
        }
        if entries.insert((i.min(k), i.max(k)), value).is_some() {
            return Err(fail(n, format!("duplicate pair ({i}, {k})")));
        }
    }
    let expected = dim * (dim - 1) / 2;
    if entries.len() != expected {
        return Err(fail(
            0,
            format!("found {} pairs, dimension {dim} needs {expected}", entries.len()),
        ));
    }
    let upper = upper_pairs(dim)
        .map(|p| entries.remove(&p).expect("all pairs present"))
        .collect();
    Ok(LipschitzBounds::from_upper(
        dim,
        upper,
        gram_iterations,
        sqrt,
        model_digest,
    ))
}
