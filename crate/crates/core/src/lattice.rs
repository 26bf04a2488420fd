//! Sublattices of `Z^n`: canonical bases, kernels of integer matrices,
//! saturation, and membership with explicit coordinates.
//!
//! A lattice is stored by its Hermite-form basis, so equality of lattices is
//! plain equality of the stored data.

use num_bigint::BigInt;
use num_traits::Zero;

use crate::matrix::IntMatrix;

/// A sublattice of `Z^ambient_rank`, stored as a Hermite-form basis with no
/// zero rows. The basis vectors are linearly independent over the rationals
/// and the representation is canonical: two lattices are equal exactly when
/// their stored bases are.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LatticeBasis {
    ambient_rank: usize,
    basis: IntMatrix,
}

impl LatticeBasis {
    /// The zero lattice in `Z^ambient_rank`.
    pub fn empty(ambient_rank: usize) -> Self {
        LatticeBasis {
            ambient_rank,
            basis: IntMatrix::zero(0, ambient_rank),
        }
    }

    /// All of `Z^ambient_rank`.
    pub fn full(ambient_rank: usize) -> Self {
        LatticeBasis {
            ambient_rank,
            basis: IntMatrix::identity(ambient_rank),
        }
    }

    /// The lattice spanned by the given vectors (not necessarily
    /// independent); the basis is canonicalized to Hermite form.
    pub fn from_rows(ambient_rank: usize, rows: Vec<Vec<BigInt>>) -> Self {
        for r in &rows {
            assert_eq!(r.len(), ambient_rank, "generator length != ambient rank");
        }
        LatticeBasis::from_span_matrix(&IntMatrix::new(
            rows.len(),
            ambient_rank,
            rows.into_iter().flatten().collect(),
        ))
    }

    /// The row lattice of a matrix.
    pub fn from_span_matrix(m: &IntMatrix) -> Self {
        let (h, _) = m.hermite_normal_form();
        let kept: Vec<Vec<BigInt>> = h
            .to_rows()
            .into_iter()
            .filter(|r| r.iter().any(|x| !x.is_zero()))
            .collect();
        LatticeBasis {
            ambient_rank: m.cols(),
            basis: IntMatrix::new(kept.len(), m.cols(), kept.into_iter().flatten().collect()),
        }
    }

    pub fn ambient_rank(&self) -> usize {
        self.ambient_rank
    }

    /// Number of basis vectors.
    pub fn rank(&self) -> usize {
        self.basis.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.rank() == 0
    }

    /// The Hermite-form basis, one vector per row.
    pub fn basis_matrix(&self) -> &IntMatrix {
        &self.basis
    }

    /// Basis vectors as owned rows.
    pub fn basis_rows(&self) -> Vec<Vec<BigInt>> {
        self.basis.to_rows()
    }

    /// Coordinates of `v` in the stored basis if `v` lies in the lattice.
    ///
    /// The basis is echelon, so back-substitution along pivot columns decides
    /// membership with exact divisions only.
    pub fn membership(&self, v: &[BigInt]) -> Option<Vec<BigInt>> {
        assert_eq!(v.len(), self.ambient_rank, "vector length != ambient rank");
        let mut residual = v.to_vec();
        let mut coords = Vec::with_capacity(self.rank());
        for i in 0..self.rank() {
            let row = self.basis.row(i);
            let p = row
                .iter()
                .position(|x| !x.is_zero())
                .expect("basis rows are nonzero");
            let (q, rem) = num_integer::div_rem(residual[p].clone(), row[p].clone());
            if !rem.is_zero() {
                return None;
            }
            if !q.is_zero() {
                for (rj, bj) in residual.iter_mut().zip(row) {
                    *rj -= &q * bj;
                }
            }
            coords.push(q);
        }
        if residual.iter().all(Zero::is_zero) {
            Some(coords)
        } else {
            None
        }
    }

    pub fn contains(&self, v: &[BigInt]) -> bool {
        self.membership(v).is_some()
    }

    /// True when every basis vector of `other` lies in `self`.
    pub fn contains_lattice(&self, other: &LatticeBasis) -> bool {
        (0..other.rank()).all(|i| self.contains(other.basis.row(i)))
    }
}

/// Basis of the integer kernel `{v in Z^cols : m * v = 0}`.
///
/// Reducing the transpose to Hermite form writes `u * m^T = h`; the rows of
/// `u` facing zero rows of `h` are a basis of the kernel, and the kernel of
/// an integer matrix is automatically saturated.
pub fn integer_kernel(m: &IntMatrix) -> LatticeBasis {
    let (h, u) = m.transpose().hermite_normal_form();
    let mut rows = Vec::new();
    for i in 0..h.rows() {
        if h.row(i).iter().all(Zero::is_zero) {
            rows.push(u.row(i).to_vec());
        }
    }
    LatticeBasis::from_rows(m.cols(), rows)
}

/// Saturation `{v in Z^n : k*v in L for some k > 0}` of a lattice, computed
/// as the kernel of the kernel: the integer kernel of a basis matrix is the
/// orthogonal complement, and taking it twice lands on the set of integer
/// points of the rational span.
pub fn saturate(l: &LatticeBasis) -> LatticeBasis {
    let orth = integer_kernel(l.basis_matrix());
    integer_kernel(orth.basis_matrix())
}

/// Integer solution `x` of `x * rows = v` if one exists; the rows need not
/// be independent. Solves `y * h = v` against the Hermite form `h` of `rows`
/// by back-substitution and pulls the answer back through the unimodular
/// transform.
pub fn coordinates_in_rows(rows: &IntMatrix, v: &[BigInt]) -> Option<Vec<BigInt>> {
    assert_eq!(v.len(), rows.cols(), "vector length != row length");
    let (h, u) = rows.hermite_normal_form();
    let mut residual = v.to_vec();
    let mut y = vec![BigInt::zero(); h.rows()];
    for i in 0..h.rows() {
        let row = h.row(i);
        let Some(p) = row.iter().position(|x| !x.is_zero()) else {
            break; // zero rows sit at the bottom
        };
        let (q, rem) = num_integer::div_rem(residual[p].clone(), row[p].clone());
        if !rem.is_zero() {
            return None;
        }
        if !q.is_zero() {
            for (rj, bj) in residual.iter_mut().zip(row) {
                *rj -= &q * bj;
            }
        }
        y[i] = q;
    }
    if residual.iter().all(Zero::is_zero) {
        Some(u.mul_row_vec(&y))
    } else {
        None
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn vecb(xs: &[i64]) -> Vec<BigInt> {
        xs.iter().map(|&x| BigInt::from(x)).collect()
    }

    #[test]
    fn kernel_of_rank_one_constraint() {
        let m = IntMatrix::from_i64(&[&[2, -3]]);
        let k = integer_kernel(&m);
        assert_eq!(k.basis_rows(), vec![vecb(&[3, 2])]);
    }

    #[test]
    fn kernel_of_identity_is_empty() {
        let k = integer_kernel(&IntMatrix::identity(3));
        assert!(k.is_empty());
        assert_eq!(k.ambient_rank(), 3);
    }

    #[test]
    fn kernel_of_diagonal_constraints_is_empty() {
        // Degree constraints 2d_x = 0 and 3d_y = 0 (with a padding row from a
        // constant term) admit only the zero grading.
        let m = IntMatrix::from_i64(&[&[2, 0], &[0, 3], &[0, 0]]);
        assert!(integer_kernel(&m).is_empty());
    }

    #[test]
    fn kernel_of_empty_constraint_is_everything() {
        let m = IntMatrix::zero(0, 2);
        let k = integer_kernel(&m);
        assert_eq!(k, LatticeBasis::full(2));
    }

    #[test]
    fn saturation_of_stretched_axis() {
        let l = LatticeBasis::from_rows(2, vec![vecb(&[2, 0])]);
        let s = saturate(&l);
        assert_eq!(s.basis_rows(), vec![vecb(&[1, 0])]);
    }

    #[test]
    fn saturation_is_idempotent_and_contains_the_lattice() {
        let l = LatticeBasis::from_rows(3, vec![vecb(&[2, 4, 6]), vecb(&[0, 6, 0])]);
        let s = saturate(&l);
        assert!(s.contains_lattice(&l));
        assert_eq!(saturate(&s), s);
        assert_eq!(s.rank(), l.rank());
    }

    #[test]
    fn saturation_of_trivial_lattices() {
        assert_eq!(saturate(&LatticeBasis::empty(3)), LatticeBasis::empty(3));
        assert_eq!(saturate(&LatticeBasis::full(3)), LatticeBasis::full(3));
    }

    #[test]
    fn membership_with_coordinates() {
        let l = LatticeBasis::from_rows(2, vec![vecb(&[1, 0]), vecb(&[-1, 2])]);
        // Canonical basis is {(1,0), (0,2)}.
        assert_eq!(l.basis_rows(), vec![vecb(&[1, 0]), vecb(&[0, 2])]);
        assert_eq!(l.membership(&vecb(&[0, 2])), Some(vecb(&[0, 1])));
        assert_eq!(l.membership(&vecb(&[0, 1])), None);
        assert_eq!(l.membership(&vecb(&[3, -4])), Some(vecb(&[3, -2])));
    }

    #[test]
    fn coordinates_against_the_given_generators() {
        // Same lattice, but coordinates relative to the raw generators.
        let rows = IntMatrix::from_i64(&[&[1, 0], &[-1, 2]]);
        let x = coordinates_in_rows(&rows, &vecb(&[0, 2])).unwrap();
        assert_eq!(x, vecb(&[1, 1]));
        assert_eq!(rows.mul_row_vec(&x), vecb(&[0, 2]));
        assert_eq!(coordinates_in_rows(&rows, &vecb(&[0, 1])), None);
    }

    #[test]
    fn coordinates_with_dependent_generators() {
        let rows = IntMatrix::from_i64(&[&[2, 0], &[3, 0], &[0, 5]]);
        let v = vecb(&[1, 5]);
        let x = coordinates_in_rows(&rows, &v).unwrap();
        assert_eq!(rows.mul_row_vec(&x), v);
        assert_eq!(coordinates_in_rows(&rows, &vecb(&[0, 1])), None);
    }

    #[test]
    fn kernel_vectors_annihilate_and_brute_force_agrees() {
        let m = IntMatrix::from_i64(&[&[1, 2, -1], &[2, 4, -2]]);
        let k = integer_kernel(&m);
        assert_eq!(k.rank(), 2);
        for row in k.basis_rows() {
            assert!(m.mul_col_vec(&row).iter().all(Zero::is_zero));
        }
        // Every small kernel vector must already lie in the computed lattice.
        for a in -4i64..=4 {
            for b in -4i64..=4 {
                for c in -4i64..=4 {
                    let v = vecb(&[a, b, c]);
                    let in_kernel = m.mul_col_vec(&v).iter().all(Zero::is_zero);
                    assert_eq!(in_kernel, k.contains(&v), "at ({a},{b},{c})");
                }
            }
        }
    }
}
