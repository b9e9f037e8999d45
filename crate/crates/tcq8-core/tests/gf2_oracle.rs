//! Property tests pinning the blocked eliminator against a naive
//! single-bit reference implementation.

use proptest::prelude::*;

use tcq8_core::gf2::{BitMatrix, BitVec, SolveStatus, SparseBitMatrix};

/// Naive boolean-matrix rank, written independently of the bit-packed path.
fn naive_rank(rows: &[Vec<bool>]) -> usize {
    let mut m: Vec<Vec<bool>> = rows.to_vec();
    let n_cols = m.first().map_or(0, |r| r.len());
    let mut rank = 0;
    let mut used = vec![false; m.len()];
    for c in 0..n_cols {
        let Some(p) = (0..m.len()).find(|&r| !used[r] && m[r][c]) else {
            continue;
        };
        used[p] = true;
        rank += 1;
        let pivot_row = m[p].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r != p && !used[r] && row[c] {
                for (a, b) in row.iter_mut().zip(&pivot_row) {
                    *a ^= b;
                }
            }
        }
    }
    rank
}

fn to_bitmatrix(rows: &[Vec<bool>]) -> BitMatrix {
    let n_cols = rows.first().map_or(0, |r| r.len());
    let mut m = BitMatrix::zeros(rows.len(), n_cols);
    for (r, row) in rows.iter().enumerate() {
        for (c, &bit) in row.iter().enumerate() {
            if bit {
                m.set(r, c, true);
            }
        }
    }
    m
}

fn matrix_strategy(max: usize) -> impl Strategy<Value = Vec<Vec<bool>>> {
    (1..=max, 1..=max).prop_flat_map(|(r, c)| {
        proptest::collection::vec(proptest::collection::vec(any::<bool>(), c), r)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn blocked_rank_matches_naive_rank(rows in matrix_strategy(48)) {
        let m = to_bitmatrix(&rows);
        prop_assert_eq!(m.rank(), naive_rank(&rows));
    }

    #[test]
    fn rank_equals_rank_of_transpose(rows in matrix_strategy(64)) {
        let m = to_bitmatrix(&rows);
        prop_assert_eq!(m.rank(), m.transpose().rank());
    }

    #[test]
    fn sparse_rank_matches_dense_rank(rows in matrix_strategy(48)) {
        let m = to_bitmatrix(&rows);
        let mut triples = Vec::new();
        for (r, row) in rows.iter().enumerate() {
            for (c, &bit) in row.iter().enumerate() {
                if bit {
                    triples.push((r, c));
                }
            }
        }
        let s = SparseBitMatrix::from_triples(rows.len(), rows[0].len(), triples);
        prop_assert_eq!(s.rank(), m.rank());
    }

    #[test]
    fn solutions_verify_and_inconsistency_is_real(
        rows in matrix_strategy(32),
        rhs_bits in proptest::collection::vec(any::<bool>(), 32),
    ) {
        let m = to_bitmatrix(&rows);
        let mut b = BitVec::zeros(m.rows());
        for r in 0..m.rows() {
            if rhs_bits[r % rhs_bits.len()] {
                b.set(r, true);
            }
        }
        let out = m.solve(&b);
        match out.status {
            SolveStatus::Solvable => {
                let u = out.solution.unwrap();
                prop_assert_eq!(m.mul_vec(&u), b);
            }
            SolveStatus::Inconsistent => {
                // The augmented matrix must have strictly larger rank.
                let mut aug_rows = rows.clone();
                for (r, row) in aug_rows.iter_mut().enumerate() {
                    row.push(b.get(r));
                }
                prop_assert_eq!(naive_rank(&aug_rows), out.rank + 1);
            }
        }
    }

    #[test]
    fn kernel_vectors_are_independent_and_annihilated(rows in matrix_strategy(32)) {
        let m = to_bitmatrix(&rows);
        let basis = m.kernel_basis();
        prop_assert_eq!(basis.len(), m.cols() - m.rank());
        for v in &basis {
            prop_assert!(m.mul_vec(v).is_zero());
        }
        // Independence: stack the kernel vectors as rows; rank must be full.
        if !basis.is_empty() {
            let mut k = BitMatrix::zeros(basis.len(), m.cols());
            for (r, v) in basis.iter().enumerate() {
                for c in v.iter_ones() {
                    k.set(r, c, true);
                }
            }
            prop_assert_eq!(k.rank(), basis.len());
        }
    }

    #[test]
    fn solution_is_canonical_under_free_variable_zeroing(rows in matrix_strategy(24)) {
        // Solve A u = A e_0: the canonical solution depends only on the
        // pivot-column set, so solving twice must agree bit for bit.
        let m = to_bitmatrix(&rows);
        let mut e0 = BitVec::zeros(m.cols());
        e0.set(0, true);
        let b = m.mul_vec(&e0);
        let first = m.solve(&b);
        let second = m.solve(&b);
        prop_assert_eq!(first.status, SolveStatus::Solvable);
        prop_assert_eq!(first.solution, second.solution);
        prop_assert_eq!(first.rank, second.rank);
    }
}
