//! Integer symmetric bilinear forms and congruence.
//!
//! The congruence convention is fixed once for the whole crate: a base
//! change `U` acts by `A ↦ Uᵀ A U`, so the columns of `U` are the new basis
//! vectors written in the old basis. With this convention
//! `transform(A, U·V) = transform(transform(A, U), V)`.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::IntMatrix;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormError {
    #[error("a form needs at least one row")]
    Empty,
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },
    #[error("matrix is not symmetric (entry ({row}, {col}) differs from its transpose)")]
    NotSymmetric { row: usize, col: usize },
    #[error("matrix has determinant {det}, expected ±1")]
    NotUnimodular { det: BigInt },
    #[error("dimension mismatch: form has rank {form}, base change has size {base_change}")]
    DimensionMismatch { form: usize, base_change: usize },
    #[error("block sum of an empty list")]
    EmptyBlockSum,
    #[error("malformed integer entry {0:?}")]
    BadEntry(String),
}

/// An intersection form: a symmetric `n x n` integer matrix, `n ≥ 1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<String>>", into = "Vec<Vec<String>>")]
pub struct SymmetricForm(IntMatrix);

impl SymmetricForm {
    pub fn new(matrix: IntMatrix) -> Result<Self, FormError> {
        if matrix.rows() == 0 {
            return Err(FormError::Empty);
        }
        if !matrix.is_square() {
            return Err(FormError::NotSquare { rows: matrix.rows(), cols: matrix.cols() });
        }
        for i in 0..matrix.rows() {
            for j in 0..i {
                if matrix[(i, j)] != matrix[(j, i)] {
                    return Err(FormError::NotSymmetric { row: i, col: j });
                }
            }
        }
        Ok(SymmetricForm(matrix))
    }

    pub fn from_rows<T: Into<BigInt> + Clone>(rows: &[Vec<T>]) -> Result<Self, FormError> {
        let m = IntMatrix::from_rows(rows).ok_or(FormError::NotSquare {
            rows: rows.len(),
            cols: rows.first().map_or(0, |r| r.len()),
        })?;
        Self::new(m)
    }

    pub fn diagonal<T: Into<BigInt> + Clone>(entries: &[T]) -> Result<Self, FormError> {
        Self::new(IntMatrix::diagonal(entries))
    }

    /// The hyperbolic plane `[[0, 1], [1, 0]]`.
    pub fn hyperbolic() -> Self {
        SymmetricForm(IntMatrix::from_rows(&[vec![0, 1], vec![1, 0]]).unwrap())
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.0
    }

    pub fn entry(&self, i: usize, j: usize) -> &BigInt {
        &self.0[(i, j)]
    }

    pub fn determinant(&self) -> BigInt {
        self.0.determinant()
    }

    pub fn is_unimodular(&self) -> bool {
        self.determinant().abs().is_one()
    }

    pub fn principal_submatrix(&self, indices: &[usize]) -> Result<Self, FormError> {
        Self::new(self.0.principal_submatrix(indices))
    }

    /// `v · w` under this form.
    pub fn pair(&self, v: &[BigInt], w: &[BigInt]) -> BigInt {
        let n = self.dim();
        let mut acc = BigInt::zero();
        for i in 0..n {
            if v[i].is_zero() {
                continue;
            }
            let mut row = BigInt::zero();
            for j in 0..n {
                if !w[j].is_zero() {
                    row += &self.0[(i, j)] * &w[j];
                }
            }
            acc += &v[i] * row;
        }
        acc
    }

    pub fn negated(&self) -> Self {
        let mut m = self.0.clone();
        for i in 0..m.rows() {
            for j in 0..m.cols() {
                let v = -&m[(i, j)];
                m[(i, j)] = v;
            }
        }
        SymmetricForm(m)
    }
}

impl TryFrom<Vec<Vec<String>>> for SymmetricForm {
    type Error = FormError;

    fn try_from(rows: Vec<Vec<String>>) -> Result<Self, FormError> {
        let parsed = rows
            .iter()
            .map(|r| {
                r.iter()
                    .map(|s| s.parse::<BigInt>().map_err(|_| FormError::BadEntry(s.clone())))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_rows(&parsed)
    }
}

impl From<SymmetricForm> for Vec<Vec<String>> {
    fn from(f: SymmetricForm) -> Self {
        decimal_rows(&f.0)
    }
}

pub(crate) fn decimal_rows(m: &IntMatrix) -> Vec<Vec<String>> {
    m.to_rows().iter().map(|r| r.iter().map(|x| x.to_string()).collect()).collect()
}

impl fmt::Display for SymmetricForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// A square integer matrix of determinant ±1.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<String>>", into = "Vec<Vec<String>>")]
pub struct UnimodularMatrix(IntMatrix);

impl UnimodularMatrix {
    pub fn new(matrix: IntMatrix) -> Result<Self, FormError> {
        if matrix.rows() == 0 {
            return Err(FormError::Empty);
        }
        if !matrix.is_square() {
            return Err(FormError::NotSquare { rows: matrix.rows(), cols: matrix.cols() });
        }
        let det = matrix.determinant();
        if !det.abs().is_one() {
            return Err(FormError::NotUnimodular { det });
        }
        Ok(UnimodularMatrix(matrix))
    }

    pub fn from_rows<T: Into<BigInt> + Clone>(rows: &[Vec<T>]) -> Result<Self, FormError> {
        let m = IntMatrix::from_rows(rows).ok_or(FormError::NotSquare {
            rows: rows.len(),
            cols: rows.first().map_or(0, |r| r.len()),
        })?;
        Self::new(m)
    }

    pub fn identity(n: usize) -> Self {
        UnimodularMatrix(IntMatrix::identity(n))
    }

    pub fn dim(&self) -> usize {
        self.0.rows()
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.0
    }

    pub fn determinant(&self) -> BigInt {
        self.0.determinant()
    }

    pub fn compose(&self, other: &UnimodularMatrix) -> UnimodularMatrix {
        UnimodularMatrix(&self.0 * &other.0)
    }
}

impl TryFrom<Vec<Vec<String>>> for UnimodularMatrix {
    type Error = FormError;

    fn try_from(rows: Vec<Vec<String>>) -> Result<Self, FormError> {
        let parsed = rows
            .iter()
            .map(|r| {
                r.iter()
                    .map(|s| s.parse::<BigInt>().map_err(|_| FormError::BadEntry(s.clone())))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_rows(&parsed)
    }
}

impl From<UnimodularMatrix> for Vec<Vec<String>> {
    fn from(u: UnimodularMatrix) -> Self {
        decimal_rows(&u.0)
    }
}

impl fmt::Display for UnimodularMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Parity {
    Even,
    Odd,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FormInvariants {
    pub rank: usize,
    pub signature: i64,
    #[serde(with = "crate::decimal")]
    pub determinant: BigInt,
    pub parity: Parity,
}

/// Number of positive, negative and zero directions of a form.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Inertia {
    pub positive: usize,
    pub negative: usize,
    pub null: usize,
}

/// Exact inertia by symmetric elimination over the rationals.
///
/// A non-zero diagonal entry is used as a 1x1 pivot. When every remaining
/// diagonal entry is zero but an off-diagonal entry `b` is not, the block
/// `[[0, b], [b, 0]]` is used as a 2x2 pivot; it has one direction of each
/// sign.
pub fn inertia(a: &SymmetricForm) -> Inertia {
    let n = a.dim();
    let mut m: Vec<Vec<BigRational>> = (0..n)
        .map(|i| (0..n).map(|j| BigRational::from_integer(a.entry(i, j).clone())).collect())
        .collect();
    let mut remaining: Vec<usize> = (0..n).collect();
    let (mut positive, mut negative) = (0, 0);

    while !remaining.is_empty() {
        if let Some(pos) = remaining.iter().position(|&r| !m[r][r].is_zero()) {
            let r = remaining.remove(pos);
            let pivot = m[r][r].clone();
            if pivot.is_positive() {
                positive += 1;
            } else {
                negative += 1;
            }
            for &i in &remaining {
                if m[i][r].is_zero() {
                    continue;
                }
                let factor = &m[i][r] / &pivot;
                for &j in &remaining {
                    let delta = &factor * &m[r][j];
                    m[i][j] -= delta;
                }
            }
            continue;
        }
        let pair = remaining.iter().enumerate().find_map(|(x, &r)| {
            remaining[x + 1..].iter().find(|&&s| !m[r][s].is_zero()).map(|&s| (r, s))
        });
        let Some((r, s)) = pair else { break };
        remaining.retain(|&k| k != r && k != s);
        positive += 1;
        negative += 1;
        let b = m[r][s].clone();
        // Schur complement against [[0, b], [b, 0]], whose inverse is
        // [[0, 1/b], [1/b, 0]].
        let update: Vec<(usize, usize, BigRational)> = remaining
            .iter()
            .flat_map(|&i| remaining.iter().map(move |&j| (i, j)))
            .map(|(i, j)| {
                let delta = (&m[i][r] * &m[s][j] + &m[i][s] * &m[r][j]) / &b;
                (i, j, delta)
            })
            .collect();
        for (i, j, delta) in update {
            m[i][j] -= delta;
        }
    }

    Inertia { positive, negative, null: n - positive - negative }
}

pub fn parity(a: &SymmetricForm) -> Parity {
    let two = BigInt::from(2);
    if (0..a.dim()).all(|i| (a.entry(i, i) % &two).is_zero()) {
        Parity::Even
    } else {
        Parity::Odd
    }
}

pub fn invariants(a: &SymmetricForm) -> FormInvariants {
    let inertia = inertia(a);
    FormInvariants {
        rank: inertia.positive + inertia.negative,
        signature: inertia.positive as i64 - inertia.negative as i64,
        determinant: a.determinant(),
        parity: parity(a),
    }
}

/// Congruence `Uᵀ A U`.
pub fn transform(a: &SymmetricForm, u: &UnimodularMatrix) -> Result<SymmetricForm, FormError> {
    if a.dim() != u.dim() {
        return Err(FormError::DimensionMismatch { form: a.dim(), base_change: u.dim() });
    }
    let au = a.matrix() * u.matrix();
    let utau = &u.matrix().transpose() * &au;
    Ok(SymmetricForm(utau))
}

/// Orthogonal direct sum, blocks placed along the diagonal in order.
pub fn block_sum(forms: &[SymmetricForm]) -> Result<SymmetricForm, FormError> {
    if forms.is_empty() {
        return Err(FormError::EmptyBlockSum);
    }
    let blocks: Vec<&IntMatrix> = forms.iter().map(|f| f.matrix()).collect();
    Ok(SymmetricForm(IntMatrix::block_diagonal(&blocks)))
}
