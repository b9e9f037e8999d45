//! Bit-packed GF(2) linear algebra: rank, deterministic solve, kernel bases.
//!
//! The dense kernel packs rows into machine words and eliminates in blocks of
//! 64 pivot columns with 8-bit combination tables; the bulk row updates are
//! data-parallel. Pivoting is deterministic (lowest column index, then lowest
//! row index), which pins the pivot-variable set and therefore the returned
//! particular solution and kernel basis exactly — any worker count produces
//! identical outputs.
//!
//! The sparse side keeps reduced pivot columns as sorted index lists; it is
//! used for rank bounds and membership tests on boundary matrices too large
//! (or too sparse) to be worth densifying.

mod dense;
mod sparse;

pub use dense::{BitMatrix, BitVec, Echelon};
pub use sparse::{Absorb, ColumnReducer, SparseBitMatrix};

use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub enum SolveStatus {
    Solvable,
    Inconsistent,
}

/// Outcome of a linear solve `A u = b` over GF(2).
#[derive(Clone, Debug)]
pub struct SolveOutcome {
    pub status: SolveStatus,
    /// Particular solution with free variables zero, when solvable.
    pub solution: Option<BitVec>,
    /// Rank of the coefficient matrix.
    pub rank: usize,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_identity_returns_rhs() {
        let mut a = BitMatrix::zeros(3, 3);
        for i in 0..3 {
            a.set(i, i, true);
        }
        let mut b = BitVec::zeros(3);
        b.set(0, true);
        b.set(2, true);
        let out = a.solve(&b);
        assert_eq!(out.status, SolveStatus::Solvable);
        assert_eq!(out.rank, 3);
        assert_eq!(out.solution.unwrap(), b);
    }

    #[test]
    fn free_variables_are_zeroed_under_the_pivot_rule() {
        // [1 1] u = [1]: pivot on column 0, column 1 free -> u = (1, 0).
        let mut a = BitMatrix::zeros(1, 2);
        a.set(0, 0, true);
        a.set(0, 1, true);
        let mut b = BitVec::zeros(1);
        b.set(0, true);
        let out = a.solve(&b);
        let u = out.solution.unwrap();
        assert!(u.get(0) && !u.get(1));
    }

    #[test]
    fn inconsistent_system_is_detected() {
        // Two equal rows with different right-hand sides.
        let mut a = BitMatrix::zeros(2, 1);
        a.set(0, 0, true);
        a.set(1, 0, true);
        let mut b = BitVec::zeros(2);
        b.set(0, true);
        let out = a.solve(&b);
        assert_eq!(out.status, SolveStatus::Inconsistent);
        assert!(out.solution.is_none());
        assert_eq!(out.rank, 1);
    }

    #[test]
    fn kernel_of_identity_is_empty_and_of_zero_is_full() {
        let mut id = BitMatrix::zeros(4, 4);
        for i in 0..4 {
            id.set(i, i, true);
        }
        assert!(id.kernel_basis().is_empty());

        let z = BitMatrix::zeros(3, 5);
        let basis = z.kernel_basis();
        assert_eq!(basis.len(), 5);
        for (i, v) in basis.iter().enumerate() {
            for j in 0..5 {
                assert_eq!(v.get(j), i == j);
            }
        }
    }

    #[test]
    fn kernel_of_single_row_spans_nullity_two() {
        let mut a = BitMatrix::zeros(1, 3);
        a.set(0, 0, true);
        a.set(0, 1, true);
        let basis = a.kernel_basis();
        assert_eq!(basis.len(), 2);
        for v in &basis {
            assert!(a.mul_vec(v).is_zero());
        }
        // Linear independence: distinct leading free columns by construction.
        assert_ne!(basis[0], basis[1]);
    }

    #[test]
    fn equal_rows_have_rank_one() {
        let mut a = BitMatrix::zeros(2, 2);
        for j in 0..2 {
            a.set(0, j, true);
            a.set(1, j, true);
        }
        assert_eq!(a.rank(), 1);
    }

    #[test]
    fn triple_construction_toggles_duplicates() {
        let a = BitMatrix::from_triples(2, 2, [(0, 0), (0, 0), (1, 1), (0, 1), (0, 1), (0, 1)]);
        assert!(!a.get(0, 0), "duplicate pair must cancel");
        assert!(a.get(1, 1));
        assert!(a.get(0, 1), "triple occurrence keeps the bit");
        // Order insensitivity.
        let b = BitMatrix::from_triples(2, 2, [(0, 1), (1, 1), (0, 0), (0, 1), (0, 1), (0, 0)]);
        assert_eq!(a, b);
    }

    #[test]
    fn bitvec_hex_round_trip() {
        let mut v = BitVec::zeros(70);
        v.set(0, true);
        v.set(64, true);
        v.set(69, true);
        let s = v.to_hex();
        let back = BitVec::from_hex(70, &s).unwrap();
        assert_eq!(v, back);
    }

    #[test]
    fn coordinate_text_round_trip() {
        let a = BitMatrix::from_triples(3, 4, [(0, 1), (2, 3), (1, 0)]);
        let text = a.to_coordinate_text();
        assert!(text.starts_with("3 4 3\n"));
        let b = BitMatrix::from_coordinate_text(&text).unwrap();
        assert_eq!(a, b);
    }
}
