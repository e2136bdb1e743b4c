//! Dense matrices over the integers.
//!
//! Everything here is exact. Determinant and rank first try a fraction-free
//! elimination in `i128` with overflow checks and fall back to `BigInt` when
//! an intermediate value does not fit.

use std::fmt;
use std::ops::{Index, IndexMut, Mul};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix { rows, cols, data: vec![BigInt::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = BigInt::one();
        }
        m
    }

    /// Builds a matrix from row vectors. Returns `None` if the rows are ragged.
    pub fn from_rows<T: Into<BigInt> + Clone>(rows: &[Vec<T>]) -> Option<Self> {
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != cols) {
            return None;
        }
        let data = rows.iter().flat_map(|r| r.iter().cloned().map(Into::into)).collect();
        Some(IntMatrix { rows: rows.len(), cols, data })
    }

    pub fn from_columns(n: usize, columns: &[Vec<BigInt>]) -> Self {
        let mut m = Self::zeros(n, columns.len());
        for (j, c) in columns.iter().enumerate() {
            assert_eq!(c.len(), n, "column length mismatch");
            for i in 0..n {
                m[(i, j)] = c[i].clone();
            }
        }
        m
    }

    pub fn diagonal<T: Into<BigInt> + Clone>(entries: &[T]) -> Self {
        let mut m = Self::zeros(entries.len(), entries.len());
        for (i, e) in entries.iter().enumerate() {
            m[(i, i)] = e.clone().into();
        }
        m
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

    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<BigInt> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn to_rows(&self) -> Vec<Vec<BigInt>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    /// Principal submatrix on the given (ordered) index list.
    pub fn principal_submatrix(&self, indices: &[usize]) -> Self {
        let mut m = Self::zeros(indices.len(), indices.len());
        for (a, &i) in indices.iter().enumerate() {
            for (b, &j) in indices.iter().enumerate() {
                m[(a, b)] = self[(i, j)].clone();
            }
        }
        m
    }

    pub fn block_diagonal(blocks: &[&IntMatrix]) -> Self {
        let rows = blocks.iter().map(|b| b.rows).sum();
        let cols = blocks.iter().map(|b| b.cols).sum();
        let mut m = Self::zeros(rows, cols);
        let (mut r0, mut c0) = (0, 0);
        for b in blocks {
            for i in 0..b.rows {
                for j in 0..b.cols {
                    m[(r0 + i, c0 + j)] = b[(i, j)].clone();
                }
            }
            r0 += b.rows;
            c0 += b.cols;
        }
        m
    }

    fn to_i128(&self) -> Option<Vec<i128>> {
        self.data.iter().map(|x| x.to_i64().map(i128::from)).collect()
    }

    pub fn determinant(&self) -> BigInt {
        assert!(self.is_square(), "determinant of a non-square matrix");
        if self.rows == 0 {
            return BigInt::one();
        }
        if let Some(small) = self.to_i128() {
            if let Some(d) = bareiss_i128(self.rows, self.cols, small).and_then(|r| r.det) {
                return BigInt::from(d);
            }
        }
        bareiss_big(self.rows, self.cols, self.data.clone()).det.unwrap_or_default()
    }

    pub fn rank(&self) -> usize {
        if let Some(small) = self.to_i128() {
            if let Some(r) = bareiss_i128(self.rows, self.cols, small) {
                return r.rank;
            }
        }
        bareiss_big(self.rows, self.cols, self.data.clone()).rank
    }

    /// Extends the columns of `self` (an `n x k` matrix) to an `n x n`
    /// unimodular matrix whose first `k` columns are exactly `self`.
    ///
    /// Returns `None` when the columns do not span a saturated sublattice,
    /// i.e. when no such extension exists.
    pub fn extend_to_unimodular(&self) -> Option<IntMatrix> {
        let (n, k) = (self.rows, self.cols);
        if k > n {
            return None;
        }
        // Row-reduce W to [I; 0] and keep R^{-1} up to date; then R^{-1}
        // has the original columns in front.
        let mut w = self.clone();
        let mut r_inv = IntMatrix::identity(n);
        for c in 0..k {
            loop {
                let pivot = (c..n)
                    .filter(|&i| !w[(i, c)].is_zero())
                    .min_by(|&a, &b| w[(a, c)].abs().cmp(&w[(b, c)].abs()));
                let Some(p) = pivot else { return None };
                if p != c {
                    w.swap_rows(p, c);
                    r_inv.swap_cols(p, c);
                }
                let mut done = true;
                for i in c + 1..n {
                    if w[(i, c)].is_zero() {
                        continue;
                    }
                    let q = w[(i, c)].div_floor(&w[(c, c)]);
                    w.row_sub_multiple(i, c, &q);
                    r_inv.col_add_multiple(i, c, &q);
                    if !w[(i, c)].is_zero() {
                        done = false;
                    }
                }
                if done {
                    break;
                }
            }
            if w[(c, c)].is_negative() {
                w.negate_row(c);
                r_inv.negate_col(c);
            }
            if !w[(c, c)].is_one() {
                return None;
            }
        }
        for c in (0..k).rev() {
            for i in 0..c {
                let q = w[(i, c)].clone();
                if !q.is_zero() {
                    w.row_sub_multiple(i, c, &q);
                    r_inv.col_add_multiple(i, c, &q);
                }
            }
        }
        Some(r_inv)
    }

    pub(crate) fn swap_rows(&mut self, a: usize, b: usize) {
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    pub(crate) fn swap_cols(&mut self, a: usize, b: usize) {
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    fn negate_row(&mut self, r: usize) {
        for j in 0..self.cols {
            let v = -&self[(r, j)];
            self[(r, j)] = v;
        }
    }

    fn negate_col(&mut self, c: usize) {
        for i in 0..self.rows {
            let v = -&self[(i, c)];
            self[(i, c)] = v;
        }
    }

    /// row[target] -= q * row[source]
    fn row_sub_multiple(&mut self, target: usize, source: usize, q: &BigInt) {
        for j in 0..self.cols {
            let v = &self[(source, j)] * q;
            self[(target, j)] -= v;
        }
    }

    /// col[target] += q * col[source]
    fn col_add_multiple(&mut self, source: usize, target: usize, q: &BigInt) {
        for i in 0..self.rows {
            let v = &self[(i, source)] * q;
            self[(i, target)] += v;
        }
    }
}

impl Index<(usize, usize)> for IntMatrix {
    type Output = BigInt;
    fn index(&self, (i, j): (usize, usize)) -> &BigInt {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for IntMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigInt {
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &IntMatrix {
    type Output = IntMatrix;
    fn mul(self, rhs: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, rhs.rows, "matrix product dimension mismatch");
        let mut out = IntMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = &rhs[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        out
    }
}

impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "[")?;
            for j in 0..self.cols {
                if j > 0 {
                    write!(f, ", ")?;
                }
                write!(f, "{}", self[(i, j)])?;
            }
            write!(f, "]")?;
        }
        write!(f, "]")
    }
}

struct Elimination<T> {
    rank: usize,
    /// Only meaningful for square inputs.
    det: Option<T>,
}

/// Fraction-free (Bareiss) elimination with full pivot search. Returns `None`
/// on overflow.
fn bareiss_i128(rows: usize, cols: usize, mut m: Vec<i128>) -> Option<Elimination<i128>> {
    let mut prev: i128 = 1;
    let mut sign: i128 = 1;
    let mut rank = 0;
    let mut row_used = vec![false; rows];
    for c in 0..cols {
        let Some(p) = (0..rows).find(|&r| !row_used[r] && m[r * cols + c] != 0) else {
            continue;
        };
        // Parity of the row permutation, counted against the natural order.
        let natural_pos = (0..rows).filter(|&r| !row_used[r] && r < p).count();
        if natural_pos % 2 == 1 {
            sign = -sign;
        }
        row_used[p] = true;
        rank += 1;
        let piv = m[p * cols + c];
        for r in 0..rows {
            if row_used[r] {
                continue;
            }
            let f = m[r * cols + c];
            for j in c + 1..cols {
                let a = m[r * cols + j].checked_mul(piv)?;
                let b = f.checked_mul(m[p * cols + j])?;
                m[r * cols + j] = a.checked_sub(b)? / prev;
            }
            m[r * cols + c] = 0;
        }
        prev = piv;
    }
    let det = if rows == cols {
        Some(if rank == rows { sign * prev } else { 0 })
    } else {
        None
    };
    Some(Elimination { rank, det })
}

fn bareiss_big(rows: usize, cols: usize, mut m: Vec<BigInt>) -> Elimination<BigInt> {
    let mut prev = BigInt::one();
    let mut sign = 1i32;
    let mut rank = 0;
    let mut row_used = vec![false; rows];
    for c in 0..cols {
        let Some(p) = (0..rows).find(|&r| !row_used[r] && !m[r * cols + c].is_zero()) else {
            continue;
        };
        let natural_pos = (0..rows).filter(|&r| !row_used[r] && r < p).count();
        if natural_pos % 2 == 1 {
            sign = -sign;
        }
        row_used[p] = true;
        rank += 1;
        let piv = m[p * cols + c].clone();
        for r in 0..rows {
            if row_used[r] {
                continue;
            }
            let f = m[r * cols + c].clone();
            for j in c + 1..cols {
                let v = (&m[r * cols + j] * &piv - &f * &m[p * cols + j]) / &prev;
                m[r * cols + j] = v;
            }
            m[r * cols + c] = BigInt::zero();
        }
        prev = piv;
    }
    let det = if rows == cols {
        Some(if rank == rows { prev * sign } else { BigInt::zero() })
    } else {
        None
    };
    Elimination { rank, det }
}
