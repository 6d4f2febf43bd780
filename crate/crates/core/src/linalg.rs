//! Exact vectors and matrices over [`Rational`].

use std::fmt;
use std::ops::Index;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::sqrt::{sqrt_ub, SqrtConfig};

/// A non-empty sequence of rationals.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Vector(Vec<Rational>);

impl Vector {
    pub fn new(elements: Vec<Rational>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::Empty("vector"));
        }
        Ok(Vector(elements))
    }

    pub fn from_integers(values: &[i64]) -> Result<Self> {
        Vector::new(values.iter().map(|&v| Rational::from(v)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    /// Always false; kept for API symmetry with slices.
    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn as_slice(&self) -> &[Rational] {
        &self.0
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Rational> {
        self.0.iter()
    }

    pub fn into_inner(self) -> Vec<Rational> {
        self.0
    }

    pub fn dot(&self, other: &Vector) -> Result<Rational> {
        check_len("dot", self.len(), other.len())?;
        Ok(dot_slices(&self.0, &other.0))
    }

    /// Componentwise `self - other`.
    pub fn minus(&self, other: &Vector) -> Result<Vector> {
        check_len("minus", self.len(), other.len())?;
        Ok(Vector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect()))
    }

    pub fn plus(&self, other: &Vector) -> Result<Vector> {
        check_len("plus", self.len(), other.len())?;
        Ok(Vector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect()))
    }

    /// Exact `sum v[i]^2`.
    pub fn sum_of_squares(&self) -> Rational {
        sum_of_squares(&self.0)
    }

    /// `r >= 0` with `r^2 >= sum v[i]^2`.
    pub fn l2_upper_bound(&self, cfg: &SqrtConfig) -> Rational {
        sqrt_ub(&self.sum_of_squares(), cfg)
    }

    pub fn map(&self, f: impl Fn(&Rational) -> Rational) -> Vector {
        Vector(self.0.iter().map(f).collect())
    }
}

impl Index<usize> for Vector {
    type Output = Rational;
    fn index(&self, i: usize) -> &Rational {
        &self.0[i]
    }
}

impl fmt::Debug for Vector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.0).finish()
    }
}

impl<'a> IntoIterator for &'a Vector {
    type Item = &'a Rational;
    type IntoIter = std::slice::Iter<'a, Rational>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

fn check_len(op: &'static str, left: usize, right: usize) -> Result<()> {
    if left != right {
        return Err(Error::DimensionMismatch { op, left, right });
    }
    Ok(())
}

pub(crate) fn dot_slices(a: &[Rational], b: &[Rational]) -> Rational {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn sum_of_squares(values: &[Rational]) -> Rational {
    values.iter().map(Rational::square).sum()
}

/// Dense row-major matrix with at least one row and one column.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<Rational>,
}

impl Matrix {
    pub fn from_rows(rows: Vec<Vec<Rational>>) -> Result<Self> {
        let n_rows = rows.len();
        if n_rows == 0 {
            return Err(Error::Empty("matrix"));
        }
        let cols = rows[0].len();
        if cols == 0 {
            return Err(Error::Empty("matrix row"));
        }
        let mut data = Vec::with_capacity(n_rows * cols);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != cols {
                return Err(Error::RaggedMatrix {
                    row: i,
                    expected: cols,
                    found: row.len(),
                });
            }
            data.extend(row);
        }
        Ok(Matrix {
            rows: n_rows,
            cols,
            data,
        })
    }

    pub fn from_vectors(rows: Vec<Vector>) -> Result<Self> {
        Matrix::from_rows(rows.into_iter().map(Vector::into_inner).collect())
    }

    pub fn from_integers(rows: &[&[i64]]) -> Result<Self> {
        Matrix::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&v| Rational::from(v)).collect())
                .collect(),
        )
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> Rational) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Empty("matrix"));
        }
        let data = (0..rows * cols).map(|k| f(k / cols, k % cols)).collect();
        Ok(Matrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Result<Self> {
        Matrix::from_fn(rows, cols, |_, _| Rational::zero())
    }

    pub fn identity(n: usize) -> Result<Self> {
        Matrix::from_fn(n, n, |i, j| if i == j { Rational::one() } else { Rational::zero() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_vector(&self, i: usize) -> Vector {
        Vector(self.row(i).to_vec())
    }

    pub fn row_iter(&self) -> impl Iterator<Item = &[Rational]> + '_ {
        self.data.chunks_exact(self.cols)
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.data[i * self.cols + j]
    }

    pub fn entries(&self) -> &[Rational] {
        &self.data
    }

    pub fn to_rows(&self) -> Vec<Vec<Rational>> {
        self.row_iter().map(<[Rational]>::to_vec).collect()
    }

    pub fn mv_product(&self, v: &Vector) -> Result<Vector> {
        check_len("mv_product", self.cols, v.len())?;
        Ok(Vector(
            self.row_iter().map(|row| dot_slices(row, v.as_slice())).collect(),
        ))
    }

    /// `M^T M` without forming the transpose product naively.
    ///
    /// The matrix is copied once into column-major order so each output
    /// entry is a dot product of two contiguous columns. Only the upper
    /// triangle is computed; the lower triangle is mirrored.
    pub fn mtm(&self) -> Matrix {
        let n = self.cols;
        let columns: Vec<Vec<Rational>> = (0..n)
            .map(|j| (0..self.rows).map(|i| self.get(i, j).clone()).collect())
            .collect();
        let upper: Vec<Vec<Rational>> = (0..n)
            .into_par_iter()
            .map(|i| (i..n).map(|j| dot_slices(&columns[i], &columns[j])).collect())
            .collect();
        let mut data = vec![Rational::zero(); n * n];
        for (i, row) in upper.into_iter().enumerate() {
            for (offset, value) in row.into_iter().enumerate() {
                let j = i + offset;
                if i != j {
                    data[j * n + i] = value.clone();
                }
                data[i * n + j] = value;
            }
        }
        Matrix { rows: n, cols: n, data }
    }

    pub fn is_symmetric(&self) -> bool {
        self.first_asymmetry().is_none()
    }

    fn first_asymmetry(&self) -> Option<(usize, usize)> {
        if !self.is_square() {
            return Some((0, 0));
        }
        (0..self.rows)
            .flat_map(|i| (i + 1..self.cols).map(move |j| (i, j)))
            .find(|&(i, j)| self.get(i, j) != self.get(j, i))
    }

    /// Exact `sum_ij M[i][j]^2`.
    pub fn sum_of_squares(&self) -> Rational {
        sum_of_squares(&self.data)
    }

    /// `r >= 0` with `r^2 >= ||M||_F^2`.
    pub fn frobenius_norm_upper_bound(&self, cfg: &SqrtConfig) -> Rational {
        sqrt_ub(&self.sum_of_squares(), cfg)
    }

    /// Entrywise exact division by a positive scale.
    pub fn matrix_div(&self, r: &Rational) -> Result<Matrix> {
        if !r.is_positive() {
            return Err(Error::NonPositiveDivisor(r.to_string()));
        }
        Ok(self.map(|x| x / r))
    }

    /// Split a symmetric matrix into its truncation `T` and error `E`,
    /// with `T + E = M` and every entry of `E` in `[0, 10^-places)`.
    pub fn truncate_with_error(&self, places: u32) -> Result<(Matrix, Matrix)> {
        if let Some((row, col)) = self.first_asymmetry() {
            return Err(Error::NotSymmetric { row, col });
        }
        let (t, e): (Vec<_>, Vec<_>) = self.data.iter().map(|x| x.truncate(places)).unzip();
        Ok((
            Matrix {
                rows: self.rows,
                cols: self.cols,
                data: t,
            },
            Matrix {
                rows: self.rows,
                cols: self.cols,
                data: e,
            },
        ))
    }

    pub fn is_zero_matrix(&self) -> bool {
        self.data.iter().all(Rational::is_zero)
    }

    pub fn map(&self, f: impl Fn(&Rational) -> Rational) -> Matrix {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(f).collect(),
        }
    }

    pub fn plus(&self, other: &Matrix) -> Result<Matrix> {
        check_len("plus (rows)", self.rows, other.rows)?;
        check_len("plus (cols)", self.cols, other.cols)?;
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        })
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.row_iter()).finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn v(values: &[i64]) -> Vector {
        Vector::from_integers(values).unwrap()
    }

    fn m(rows: &[&[i64]]) -> Matrix {
        Matrix::from_integers(rows).unwrap()
    }

    #[test]
    fn construction_invariants() {
        assert!(matches!(Vector::new(vec![]), Err(Error::Empty(_))));
        assert!(matches!(Matrix::from_rows(vec![]), Err(Error::Empty(_))));
        assert!(matches!(Matrix::from_rows(vec![vec![]]), Err(Error::Empty(_))));
        assert!(matches!(
            Matrix::from_integers(&[&[1, 2], &[3]]),
            Err(Error::RaggedMatrix {
                row: 1,
                expected: 2,
                found: 1
            })
        ));
    }

    #[test]
    fn dot_examples() {
        assert_eq!(v(&[1, 2]).dot(&v(&[3, 4])).unwrap(), Rational::from(11));
        assert_eq!(v(&[1]).dot(&v(&[0])).unwrap(), Rational::zero());
        assert_eq!(v(&[3, 4]).dot(&v(&[3, 4])).unwrap(), Rational::from(25));
        assert!(v(&[1]).dot(&v(&[1, 2])).is_err());
    }

    #[test]
    fn mv_product_examples() {
        assert_eq!(m(&[&[1, 0], &[0, 1]]).mv_product(&v(&[5, 7])).unwrap(), v(&[5, 7]));
        assert_eq!(m(&[&[1, 1]]).mv_product(&v(&[2, 3])).unwrap(), v(&[5]));
        assert_eq!(m(&[&[0, 0], &[0, 0]]).mv_product(&v(&[9, 9])).unwrap(), v(&[0, 0]));
        assert!(matches!(
            m(&[&[1, 1]]).mv_product(&v(&[2])),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn minus_examples() {
        assert_eq!(v(&[1, 0]).minus(&v(&[0, 1])).unwrap(), v(&[1, -1]));
        assert_eq!(v(&[2, 2]).minus(&v(&[2, 2])).unwrap(), v(&[0, 0]));
        assert_eq!(v(&[0]).minus(&v(&[5])).unwrap(), v(&[-5]));
        assert!(v(&[0]).minus(&v(&[5, 1])).is_err());
    }

    #[test]
    fn mtm_examples() {
        assert_eq!(m(&[&[1, 2]]).mtm(), m(&[&[1, 2], &[2, 4]]));
        let w = Matrix::from_rows(vec![vec![q(9, 10)]]).unwrap();
        assert_eq!(w.mtm(), Matrix::from_rows(vec![vec![q(81, 100)]]).unwrap());
        let id = Matrix::identity(2).unwrap();
        assert_eq!(id.mtm(), id);
        let tall = m(&[&[1, 2, 3], &[4, 5, 6]]);
        assert_eq!(tall.mtm(), m(&[&[17, 22, 27], &[22, 29, 36], &[27, 36, 45]]));
    }

    #[test]
    fn norm_examples() {
        let cfg = SqrtConfig::default();
        let r = m(&[&[3, 4]]).frobenius_norm_upper_bound(&cfg);
        assert!(r >= Rational::from(5) && r <= Rational::from(5) + Rational::ulp(10));
        assert_eq!(
            m(&[&[0, 0], &[0, 0]]).frobenius_norm_upper_bound(&cfg),
            Rational::zero()
        );
        assert!(Matrix::identity(2).unwrap().frobenius_norm_upper_bound(&cfg).square() >= Rational::from(2));

        let r = v(&[3, 4]).l2_upper_bound(&cfg);
        assert!(r >= Rational::from(5) && r <= Rational::from(5) + Rational::ulp(10));
        assert_eq!(v(&[0]).l2_upper_bound(&cfg), Rational::zero());
        assert!(v(&[-1, 1]).l2_upper_bound(&cfg).square() >= Rational::from(2));
    }

    #[test]
    fn matrix_div_examples() {
        assert_eq!(m(&[&[2, 4]]).matrix_div(&Rational::from(2)).unwrap(), m(&[&[1, 2]]));
        assert_eq!(m(&[&[0]]).matrix_div(&Rational::from(5)).unwrap(), m(&[&[0]]));
        assert_eq!(m(&[&[1]]).matrix_div(&Rational::one()).unwrap(), m(&[&[1]]));
        assert!(matches!(
            m(&[&[1]]).matrix_div(&Rational::zero()),
            Err(Error::NonPositiveDivisor(_))
        ));
        assert!(m(&[&[1]]).matrix_div(&Rational::from(-1)).is_err());
    }

    #[test]
    fn truncate_with_error_examples() {
        let third = Matrix::from_rows(vec![vec![q(1, 3)]]).unwrap();
        let (t, e) = third.truncate_with_error(2).unwrap();
        assert_eq!(t, Matrix::from_rows(vec![vec![q(33, 100)]]).unwrap());
        assert_eq!(e, Matrix::from_rows(vec![vec![q(1, 300)]]).unwrap());

        let id = Matrix::identity(2).unwrap();
        let (t, e) = id.truncate_with_error(16).unwrap();
        assert_eq!(t, id);
        assert!(e.is_zero_matrix());

        let thirds = Matrix::from_fn(2, 2, |_, _| q(1, 3)).unwrap();
        let (t, e) = thirds.truncate_with_error(2).unwrap();
        assert!(t.is_symmetric());
        assert!(e.entries().iter().all(|x| *x == q(1, 300)));
        assert_eq!(t.plus(&e).unwrap(), thirds);

        assert!(matches!(
            m(&[&[1, 2], &[3, 4]]).truncate_with_error(2),
            Err(Error::NotSymmetric { row: 0, col: 1 })
        ));
        assert!(m(&[&[1, 2]]).truncate_with_error(2).is_err());
    }

    #[test]
    fn zero_matrix_detection() {
        assert!(m(&[&[0, 0]]).is_zero_matrix());
        assert!(!m(&[&[0, 1]]).is_zero_matrix());
        let tiny = Rational::from_f32(f32::MIN_POSITIVE).unwrap();
        assert!(!Matrix::from_rows(vec![vec![tiny]]).unwrap().is_zero_matrix());
    }
}
