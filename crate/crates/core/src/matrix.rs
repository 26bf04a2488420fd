//! Dense integer matrices with arbitrary-precision entries and the exact
//! normal forms used throughout the crate: Hermite form (row style, with a
//! unimodular transform), Smith form (with transforms on both sides),
//! fraction-free determinants, and unimodular inversion.
//!
//! Multipliers in Bezout identities and normal-form transforms grow quickly,
//! so every entry is a [`BigInt`]; no operation here can overflow.

use std::fmt;
use std::ops::{Index, IndexMut};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};

/// Extended Euclid: returns `(g, m, n)` with `g = gcd(a, b) >= 0` and
/// `a*m + b*n = g`. Returns `(0, 0, 0)` exactly when `a = b = 0`.
pub fn ext_gcd(a: &BigInt, b: &BigInt) -> (BigInt, BigInt, BigInt) {
    if a.is_zero() && b.is_zero() {
        return (BigInt::zero(), BigInt::zero(), BigInt::zero());
    }
    let (mut old_r, mut r) = (a.clone(), b.clone());
    let (mut old_s, mut s) = (BigInt::one(), BigInt::zero());
    let (mut old_t, mut t) = (BigInt::zero(), BigInt::one());
    while !r.is_zero() {
        let q = &old_r / &r;
        let next_r = &old_r - &q * &r;
        old_r = std::mem::replace(&mut r, next_r);
        let next_s = &old_s - &q * &s;
        old_s = std::mem::replace(&mut s, next_s);
        let next_t = &old_t - &q * &t;
        old_t = std::mem::replace(&mut t, next_t);
    }
    if old_r.is_negative() {
        (-old_r, -old_s, -old_t)
    } else {
        (old_r, old_s, old_t)
    }
}

/// A `rows x cols` integer matrix stored row-major.
#[derive(Clone, PartialEq, Eq)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<BigInt>,
}

impl IntMatrix {
    /// Builds a matrix from row-major entries; `entries.len()` must equal
    /// `rows * cols`.
    pub fn new(rows: usize, cols: usize, entries: Vec<BigInt>) -> Self {
        assert_eq!(
            entries.len(),
            rows * cols,
            "entry count {} does not match {}x{}",
            entries.len(),
            rows,
            cols
        );
        IntMatrix { rows, cols, entries }
    }

    /// The zero matrix of the given shape.
    pub fn zero(rows: usize, cols: usize) -> Self {
        IntMatrix::new(rows, cols, vec![BigInt::zero(); rows * cols])
    }

    /// The `n x n` identity.
    pub fn identity(n: usize) -> Self {
        let mut m = IntMatrix::zero(n, n);
        for i in 0..n {
            m[(i, i)] = BigInt::one();
        }
        m
    }

    /// Builds a matrix from rows of equal length.
    pub fn from_rows(rows: Vec<Vec<BigInt>>) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        for (i, r) in rows.iter().enumerate() {
            assert_eq!(r.len(), ncols, "row {i} has length {} != {ncols}", r.len());
        }
        IntMatrix::new(nrows, ncols, rows.into_iter().flatten().collect())
    }

    /// Convenience constructor from machine integers.
    pub fn from_i64(rows: &[&[i64]]) -> Self {
        IntMatrix::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| BigInt::from(x)).collect())
                .collect(),
        )
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

    /// Row `i` as a slice.
    pub fn row(&self, i: usize) -> &[BigInt] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    /// All rows as owned vectors.
    pub fn to_rows(&self) -> Vec<Vec<BigInt>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn transpose(&self) -> IntMatrix {
        let mut t = IntMatrix::zero(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    /// Matrix product `self * rhs`; panics if the inner dimensions differ.
    pub fn mul(&self, rhs: &IntMatrix) -> IntMatrix {
        assert_eq!(
            self.cols, rhs.rows,
            "cannot multiply {}x{} by {}x{}",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        let mut out = IntMatrix::zero(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let add = a * &rhs[(k, j)];
                    out[(i, j)] += add;
                }
            }
        }
        out
    }

    /// Row vector times matrix: returns `v * self` where `v.len() == rows`.
    pub fn mul_row_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(v.len(), self.rows, "vector length {} != rows {}", v.len(), self.rows);
        let mut out = vec![BigInt::zero(); self.cols];
        for (i, vi) in v.iter().enumerate() {
            if vi.is_zero() {
                continue;
            }
            for j in 0..self.cols {
                out[j] += vi * &self[(i, j)];
            }
        }
        out
    }

    /// Matrix times column vector: returns `self * v` where `v.len() == cols`.
    pub fn mul_col_vec(&self, v: &[BigInt]) -> Vec<BigInt> {
        assert_eq!(v.len(), self.cols, "vector length {} != cols {}", v.len(), self.cols);
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Zero::is_zero)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.entries.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.entries.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    fn negate_row(&mut self, r: usize) {
        for j in 0..self.cols {
            let v = -std::mem::take(&mut self[(r, j)]);
            self[(r, j)] = v;
        }
    }

    /// `row[dst] -= q * row[src]`.
    fn row_sub_mul(&mut self, dst: usize, src: usize, q: &BigInt) {
        if q.is_zero() {
            return;
        }
        for j in 0..self.cols {
            let delta = q * &self[(src, j)];
            self[(dst, j)] -= delta;
        }
    }

    /// `col[dst] -= q * col[src]`.
    fn col_sub_mul(&mut self, dst: usize, src: usize, q: &BigInt) {
        if q.is_zero() {
            return;
        }
        for i in 0..self.rows {
            let delta = q * &self[(i, src)];
            self[(i, dst)] -= delta;
        }
    }

    /// Replaces rows `a` and `b` by `(s*row_a + t*row_b, -bb*row_a + aa*row_b)`;
    /// the caller guarantees `s*aa_orig + t*bb_orig = g` so the 2x2 transform
    /// has determinant one.
    fn row_gcd_transform(&mut self, a: usize, b: usize, s: &BigInt, t: &BigInt, aa: &BigInt, bb: &BigInt) {
        for j in 0..self.cols {
            let x = self[(a, j)].clone();
            let y = self[(b, j)].clone();
            self[(a, j)] = s * &x + t * &y;
            self[(b, j)] = aa * &y - bb * &x;
        }
    }

    /// Row-style Hermite normal form: returns `(h, u)` with `u * self = h`,
    /// `u` unimodular, `h` in row echelon form with positive pivots and the
    /// entries above each pivot reduced into `[0, pivot)`.
    ///
    /// The Hermite form is the canonical representative of the row lattice:
    /// two matrices span the same lattice exactly when their forms agree
    /// (after discarding zero rows).
    pub fn hermite_normal_form(&self) -> (IntMatrix, IntMatrix) {
        let mut h = self.clone();
        let mut u = IntMatrix::identity(self.rows);
        let mut pivot_row = 0usize;
        for col in 0..h.cols {
            if pivot_row == h.rows {
                break;
            }
            let Some(first) = (pivot_row..h.rows).find(|&r| !h[(r, col)].is_zero()) else {
                continue;
            };
            h.swap_rows(pivot_row, first);
            u.swap_rows(pivot_row, first);
            for r in pivot_row + 1..h.rows {
                if h[(r, col)].is_zero() {
                    continue;
                }
                let a = h[(pivot_row, col)].clone();
                let b = h[(r, col)].clone();
                let (g, s, t) = ext_gcd(&a, &b);
                let aa = &a / &g;
                let bb = &b / &g;
                h.row_gcd_transform(pivot_row, r, &s, &t, &aa, &bb);
                u.row_gcd_transform(pivot_row, r, &s, &t, &aa, &bb);
            }
            if h[(pivot_row, col)].is_negative() {
                h.negate_row(pivot_row);
                u.negate_row(pivot_row);
            }
            let pivot = h[(pivot_row, col)].clone();
            for r in 0..pivot_row {
                let q = h[(r, col)].div_floor(&pivot);
                h.row_sub_mul(r, pivot_row, &q);
                u.row_sub_mul(r, pivot_row, &q);
            }
            pivot_row += 1;
        }
        (h, u)
    }

    /// Smith normal form: returns `(s, u, v)` with `u * self * v = s`,
    /// `u`, `v` unimodular and `s` diagonal with nonnegative entries
    /// `d_1 | d_2 | ...`. The pivot at each step is the smallest nonzero
    /// entry in absolute value (first in row-major order on ties), which
    /// makes the elimination deterministic.
    pub fn smith_normal_form(&self) -> (IntMatrix, IntMatrix, IntMatrix) {
        let mut s = self.clone();
        let mut u = IntMatrix::identity(self.rows);
        let mut v = IntMatrix::identity(self.cols);
        let n = self.rows.min(self.cols);
        let mut t = 0usize;
        while t < n {
            let Some((pi, pj)) = s.min_nonzero_in_block(t) else {
                break;
            };
            s.swap_rows(t, pi);
            u.swap_rows(t, pi);
            s.swap_cols(t, pj);
            v.swap_cols(t, pj);
            loop {
                // Clear the pivot column and row by division with remainder;
                // a nonzero remainder is strictly smaller than the pivot, so
                // re-picking the minimum makes this loop terminate.
                if s[(t, t)].is_negative() {
                    s.negate_row(t);
                    u.negate_row(t);
                }
                let mut clean = true;
                let pivot = s[(t, t)].clone();
                for r in t + 1..s.rows {
                    if s[(r, t)].is_zero() {
                        continue;
                    }
                    let q = s[(r, t)].div_floor(&pivot);
                    s.row_sub_mul(r, t, &q);
                    u.row_sub_mul(r, t, &q);
                    if !s[(r, t)].is_zero() {
                        clean = false;
                    }
                }
                let pivot = s[(t, t)].clone();
                for c in t + 1..s.cols {
                    if s[(t, c)].is_zero() {
                        continue;
                    }
                    let q = s[(t, c)].div_floor(&pivot);
                    s.col_sub_mul(c, t, &q);
                    v.col_sub_mul(c, t, &q);
                    if !s[(t, c)].is_zero() {
                        clean = false;
                    }
                }
                if clean {
                    // Enforce the divisibility chain: if some remaining entry
                    // is not divisible by the pivot, fold its row into row t
                    // and keep reducing.
                    let pivot = s[(t, t)].clone();
                    let bad = (t + 1..s.rows).find(|&i| {
                        (t + 1..s.cols).any(|j| !(&s[(i, j)] % &pivot).is_zero())
                    });
                    match bad {
                        Some(i) => {
                            let minus_one = -BigInt::one();
                            s.row_sub_mul(t, i, &minus_one);
                            u.row_sub_mul(t, i, &minus_one);
                        }
                        None => break,
                    }
                } else {
                    let (pi, pj) = s
                        .min_nonzero_in_block(t)
                        .expect("nonzero entry survives reduction");
                    s.swap_rows(t, pi);
                    u.swap_rows(t, pi);
                    s.swap_cols(t, pj);
                    v.swap_cols(t, pj);
                }
            }
            t += 1;
        }
        (s, u, v)
    }

    /// Position of the smallest nonzero entry (by absolute value, row-major
    /// on ties) in the block `self[t.., t..]`.
    fn min_nonzero_in_block(&self, t: usize) -> Option<(usize, usize)> {
        let mut best: Option<(usize, usize)> = None;
        for i in t..self.rows {
            for j in t..self.cols {
                if self[(i, j)].is_zero() {
                    continue;
                }
                match best {
                    Some((bi, bj)) if self[(bi, bj)].abs() <= self[(i, j)].abs() => {}
                    _ => best = Some((i, j)),
                }
            }
        }
        best
    }

    /// Determinant of a square matrix by fraction-free (Bareiss) elimination.
    pub fn det(&self) -> BigInt {
        assert!(self.is_square(), "determinant of a {}x{} matrix", self.rows, self.cols);
        let n = self.rows;
        if n == 0 {
            return BigInt::one();
        }
        let mut m = self.clone();
        let mut sign = 1i32;
        let mut prev = BigInt::one();
        for k in 0..n - 1 {
            if m[(k, k)].is_zero() {
                match (k + 1..n).find(|&r| !m[(r, k)].is_zero()) {
                    Some(r) => {
                        m.swap_rows(k, r);
                        sign = -sign;
                    }
                    None => return BigInt::zero(),
                }
            }
            for i in k + 1..n {
                for j in k + 1..n {
                    let num = &m[(i, j)] * &m[(k, k)] - &m[(i, k)] * &m[(k, j)];
                    m[(i, j)] = num / &prev; // exact by Sylvester's identity
                }
                m[(i, k)] = BigInt::zero();
            }
            prev = m[(k, k)].clone();
        }
        let d = m[(n - 1, n - 1)].clone();
        if sign < 0 {
            -d
        } else {
            d
        }
    }

    /// Inverse of a unimodular matrix, found by reducing to Hermite form
    /// (which is the identity exactly when `det = +-1`).
    ///
    /// Returns [`Error::NotUnimodular`] for square matrices with any other
    /// determinant.
    pub fn invert_unimodular(&self) -> Result<IntMatrix> {
        if !self.is_square() {
            return Err(Error::NotUnimodular(format!(
                "matrix is {}x{}, not square",
                self.rows, self.cols
            )));
        }
        let (h, u) = self.hermite_normal_form();
        if h != IntMatrix::identity(self.rows) {
            return Err(Error::NotUnimodular(format!(
                "determinant is {}, not +-1",
                self.det()
            )));
        }
        debug_assert_eq!(self.mul(&u), IntMatrix::identity(self.rows));
        Ok(u)
    }
}

impl Index<(usize, usize)> for IntMatrix {
    type Output = BigInt;

    fn index(&self, (i, j): (usize, usize)) -> &BigInt {
        assert!(i < self.rows && j < self.cols, "index ({i},{j}) out of bounds");
        &self.entries[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for IntMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut BigInt {
        assert!(i < self.rows && j < self.cols, "index ({i},{j}) out of bounds");
        &mut self.entries[i * self.cols + j]
    }
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for i in 0..self.rows {
            if i > 0 {
                write!(f, "; ")?;
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

#[cfg(test)]
mod tests {
    use super::*;

    fn big(x: i64) -> BigInt {
        BigInt::from(x)
    }

    /// gcd by plain remainder recursion, used as an independent oracle.
    fn naive_gcd(a: i64, b: i64) -> i64 {
        let (a, b) = (a.abs(), b.abs());
        if b == 0 {
            a
        } else {
            naive_gcd(b, a % b)
        }
    }

    #[test]
    fn ext_gcd_pinned_values() {
        assert_eq!(ext_gcd(&big(2), &big(3)), (big(1), big(-1), big(1)));
        assert_eq!(ext_gcd(&big(4), &big(6)), (big(2), big(-1), big(1)));
        assert_eq!(ext_gcd(&big(0), &big(5)), (big(5), big(0), big(1)));
        assert_eq!(ext_gcd(&big(0), &big(0)), (big(0), big(0), big(0)));
    }

    #[test]
    fn ext_gcd_matches_naive_gcd_exhaustively() {
        for a in -30i64..=30 {
            for b in -30i64..=30 {
                let (g, m, n) = ext_gcd(&big(a), &big(b));
                assert_eq!(g, big(naive_gcd(a, b)), "gcd({a},{b})");
                assert_eq!(big(a) * &m + big(b) * &n, g, "bezout({a},{b})");
                assert!(g >= BigInt::zero());
                if a == 0 && b == 0 {
                    assert_eq!((m, n), (big(0), big(0)));
                }
            }
        }
    }

    #[test]
    fn hermite_form_of_column_pair() {
        let m = IntMatrix::from_i64(&[&[4], &[6]]);
        let (h, u) = m.hermite_normal_form();
        assert_eq!(h, IntMatrix::from_i64(&[&[2], &[0]]));
        assert_eq!(u.mul(&m), h);
        assert_eq!(u.det().abs(), BigInt::one());
    }

    #[test]
    fn hermite_form_is_reduced_above_pivots() {
        let m = IntMatrix::from_i64(&[&[1, 7], &[0, 3]]);
        let (h, u) = m.hermite_normal_form();
        assert_eq!(h, IntMatrix::from_i64(&[&[1, 1], &[0, 3]]));
        assert_eq!(u.mul(&m), h);
    }

    #[test]
    fn hermite_form_fixes_identity_and_zero() {
        let id = IntMatrix::identity(3);
        let (h, u) = id.hermite_normal_form();
        assert_eq!(h, id);
        assert_eq!(u, id);
        let z = IntMatrix::zero(2, 3);
        let (h, _) = z.hermite_normal_form();
        assert_eq!(h, z);
    }

    #[test]
    fn hermite_form_canonicalizes_equal_lattices() {
        // {(1,0),(-1,2)} and {(1,0),(0,2)} span the same lattice.
        let a = IntMatrix::from_i64(&[&[1, 0], &[-1, 2]]);
        let b = IntMatrix::from_i64(&[&[1, 0], &[0, 2]]);
        assert_eq!(a.hermite_normal_form().0, b.hermite_normal_form().0);
    }

    #[test]
    fn smith_form_pinned_example() {
        // Independent oracle for the 2x2 case: the first invariant factor is
        // the gcd of the entries, and the product of both is |det|.
        let m = IntMatrix::from_i64(&[&[2, 4], &[6, 8]]);
        let (s, u, v) = m.smith_normal_form();
        assert_eq!(s, IntMatrix::from_i64(&[&[2, 0], &[0, 4]]));
        assert_eq!(u.mul(&m).mul(&v), s);
        assert_eq!(u.det().abs(), BigInt::one());
        assert_eq!(v.det().abs(), BigInt::one());
    }

    #[test]
    fn smith_form_first_factor_is_entry_gcd() {
        let m = IntMatrix::from_i64(&[&[6], &[10], &[15]]);
        let (s, u, v) = m.smith_normal_form();
        assert_eq!(s[(0, 0)], big(1));
        assert_eq!(u.mul(&m).mul(&v), s);
    }

    #[test]
    fn smith_form_of_zero_matrix() {
        let z = IntMatrix::zero(2, 2);
        let (s, _, _) = z.smith_normal_form();
        assert_eq!(s, z);
    }

    #[test]
    fn determinant_examples() {
        assert_eq!(IntMatrix::identity(4).det(), big(1));
        assert_eq!(IntMatrix::from_i64(&[&[2, 4], &[6, 8]]).det(), big(-8));
        assert_eq!(
            IntMatrix::from_i64(&[&[1, 2, 3], &[4, 5, 6], &[7, 8, 9]]).det(),
            big(0)
        );
        assert_eq!(IntMatrix::zero(0, 0).det(), big(1));
    }

    #[test]
    fn unimodular_inverse_round_trip() {
        let e = IntMatrix::from_i64(&[&[1, 1], &[0, 1]]);
        let d = e.invert_unimodular().unwrap();
        assert_eq!(d, IntMatrix::from_i64(&[&[1, -1], &[0, 1]]));
        assert_eq!(d.mul(&e), IntMatrix::identity(2));
        assert_eq!(e.mul(&d), IntMatrix::identity(2));
    }

    #[test]
    fn non_unimodular_matrix_is_rejected() {
        let m = IntMatrix::from_i64(&[&[2, 0], &[0, 1]]);
        match m.invert_unimodular() {
            Err(Error::NotUnimodular(_)) => {}
            other => panic!("expected NotUnimodular, got {other:?}"),
        }
    }

    #[test]
    fn identity_inverse_is_identity() {
        let id = IntMatrix::identity(3);
        assert_eq!(id.invert_unimodular().unwrap(), id);
    }
}
