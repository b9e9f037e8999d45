//! Finitely generated chain complexes with exact integer homology.
//!
//! A [`ChainComplex`] stores one ordered cell list per dimension and sparse
//! boundary matrices `d_k : C_k -> C_{k-1}` (rows indexed by (k-1)-cells,
//! columns by k-cells). Construction validates `d_{k-1} . d_k = 0`; complexes
//! that only close up modulo 2 must be built with [`Coefficients::Mod2`].
//!
//! Integral homology goes through Smith normal form over arbitrary-precision
//! integers, so pivot growth can never overflow silently.

use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use std::fmt;

use crate::error::Error;
use crate::gf2::SparseBitMatrix;

/// Whether a complex is validated (and meaningful) over `Z` or only over `F_2`.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Coefficients {
    Integer,
    Mod2,
}

/// Sparse integer matrix in column-major CSC layout.
#[derive(Clone, Debug, Default)]
pub struct SparseIntMatrix {
    pub rows: usize,
    pub cols: usize,
    col_offsets: Vec<usize>,
    row_indices: Vec<u32>,
    values: Vec<i32>,
}

impl SparseIntMatrix {
    pub fn from_columns(rows: usize, columns: &[Vec<(u32, i32)>]) -> Self {
        let mut col_offsets = Vec::with_capacity(columns.len() + 1);
        let mut row_indices = Vec::new();
        let mut values = Vec::new();
        col_offsets.push(0);
        for col in columns {
            for &(r, v) in col {
                debug_assert!((r as usize) < rows);
                if v != 0 {
                    row_indices.push(r);
                    values.push(v);
                }
            }
            col_offsets.push(row_indices.len());
        }
        SparseIntMatrix { rows, cols: columns.len(), col_offsets, row_indices, values }
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = (u32, i32)> + '_ {
        let lo = self.col_offsets[j];
        let hi = self.col_offsets[j + 1];
        self.row_indices[lo..hi].iter().copied().zip(self.values[lo..hi].iter().copied())
    }

    pub fn nnz(&self) -> usize {
        self.row_indices.len()
    }

    /// Column supports after reduction mod 2 (even entries dropped).
    pub fn to_mod2(&self) -> SparseBitMatrix {
        let cols = (0..self.cols)
            .map(|j| {
                let mut c: Vec<u32> =
                    self.column(j).filter(|&(_, v)| v % 2 != 0).map(|(r, _)| r).collect();
                c.sort_unstable();
                c
            })
            .collect();
        SparseBitMatrix::from_sorted_columns(self.rows, cols)
    }

    pub fn to_dense_bigint(&self) -> Vec<Vec<BigInt>> {
        let mut dense = vec![vec![BigInt::zero(); self.cols]; self.rows];
        for j in 0..self.cols {
            for (r, v) in self.column(j) {
                dense[r as usize][j] = BigInt::from(v);
            }
        }
        dense
    }

    /// Coordinate text export: header `rows cols nnz`, then 1-based
    /// `row col value` lines in column order.
    pub fn to_coordinate_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!("{} {} {}\n", self.rows, self.cols, self.nnz()));
        for j in 0..self.cols {
            for (r, v) in self.column(j) {
                out.push_str(&format!("{} {} {}\n", r + 1, j + 1, v));
            }
        }
        out
    }
}

/// Free abelian group descriptor: `Z^r + Z_{d_1} + ...` with `d_1 | d_2 | ...`.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct AbelianGroup {
    pub free_rank: usize,
    pub torsion: Vec<u64>,
}

impl AbelianGroup {
    pub fn trivial() -> Self {
        AbelianGroup { free_rank: 0, torsion: Vec::new() }
    }

    pub fn free(rank: usize) -> Self {
        AbelianGroup { free_rank: rank, torsion: Vec::new() }
    }

    pub fn torsion_only(factors: &[u64]) -> Self {
        AbelianGroup { free_rank: 0, torsion: factors.to_vec() }
    }

    pub fn is_trivial(&self) -> bool {
        self.free_rank == 0 && self.torsion.is_empty()
    }
}

impl fmt::Display for AbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_trivial() {
            return write!(f, "0");
        }
        let mut parts = Vec::new();
        match self.free_rank {
            0 => {}
            1 => parts.push("Z".to_string()),
            r => parts.push(format!("Z^{r}")),
        }
        for d in &self.torsion {
            parts.push(format!("Z_{d}"));
        }
        write!(f, "{}", parts.join(" + "))
    }
}

/// A validated chain complex. Immutable once built.
#[derive(Debug)]
pub struct ChainComplex {
    boundaries: Vec<SparseIntMatrix>,
    labels: Option<Vec<Vec<String>>>,
    coefficients: Coefficients,
}

impl ChainComplex {
    /// Builds and validates a complex from per-dimension cell counts and
    /// boundary columns. `boundary_columns[k]` holds, for each k-cell, its
    /// boundary as `(index of (k-1)-cell, coefficient)` pairs; dimension 0
    /// must pass an empty list of columns' worth of zero boundaries
    /// implicitly (its entry is still present, with every column empty).
    pub fn new(
        cell_counts: &[usize],
        boundary_columns: Vec<Vec<Vec<(u32, i32)>>>,
        coefficients: Coefficients,
        labels: Option<Vec<Vec<String>>>,
    ) -> Result<Self, Error> {
        if cell_counts.is_empty() {
            return Err(Error::InvalidParameter("complex needs at least dimension 0".into()));
        }
        if boundary_columns.len() != cell_counts.len() {
            return Err(Error::InvalidParameter(format!(
                "{} dimensions but {} boundary blocks",
                cell_counts.len(),
                boundary_columns.len()
            )));
        }
        if let Some(ls) = &labels {
            if ls.len() != cell_counts.len()
                || ls.iter().zip(cell_counts).any(|(l, &n)| l.len() != n)
            {
                return Err(Error::InvalidParameter("label lists do not match cell counts".into()));
            }
        }
        let mut boundaries = Vec::with_capacity(cell_counts.len());
        for (k, cols) in boundary_columns.iter().enumerate() {
            if cols.len() != cell_counts[k] {
                return Err(Error::InvalidParameter(format!(
                    "dimension {k}: {} columns for {} cells",
                    cols.len(),
                    cell_counts[k]
                )));
            }
            let rows = if k == 0 { 0 } else { cell_counts[k - 1] };
            for (j, col) in cols.iter().enumerate() {
                if let Some(&(r, _)) = col.iter().find(|&&(r, _)| (r as usize) >= rows) {
                    return Err(Error::InvalidParameter(format!(
                        "dimension {k}, cell {j}: boundary row {r} out of range ({rows} rows)"
                    )));
                }
            }
            boundaries.push(SparseIntMatrix::from_columns(rows, cols));
        }
        let cx = ChainComplex { boundaries, labels, coefficients };
        cx.validate_d_squared()?;
        Ok(cx)
    }

    fn validate_d_squared(&self) -> Result<(), Error> {
        for k in 2..=self.top_dimension() {
            let dk = &self.boundaries[k];
            let dk1 = &self.boundaries[k - 1];
            let mod2 = matches!(self.coefficients, Coefficients::Mod2);
            let offenders = crate::bar::map_indices(dk.cols, |j| {
                let mut acc: Vec<(u32, i64)> = Vec::new();
                for (i, a) in dk.column(j) {
                    for (h, b) in dk1.column(i as usize) {
                        acc.push((h, a as i64 * b as i64));
                    }
                }
                acc.sort_unstable_by_key(|&(h, _)| h);
                let mut idx = 0;
                while idx < acc.len() {
                    let mut total = 0i64;
                    let h = acc[idx].0;
                    while idx < acc.len() && acc[idx].0 == h {
                        total += acc[idx].1;
                        idx += 1;
                    }
                    let bad = if mod2 { total % 2 != 0 } else { total != 0 };
                    if bad {
                        return Some(j);
                    }
                }
                None
            });
            if let Some(j) = offenders.iter().flatten().next() {
                return Err(Error::ConstructionRejected(format!(
                    "d.d != 0 at dimension {k}, cell {} ({})",
                    j,
                    self.label(k, *j)
                )));
            }
        }
        Ok(())
    }

    pub fn coefficients(&self) -> Coefficients {
        self.coefficients
    }

    pub fn top_dimension(&self) -> usize {
        self.boundaries.len() - 1
    }

    pub fn cell_count(&self, k: usize) -> usize {
        if k <= self.top_dimension() {
            self.boundaries[k].cols
        } else {
            0
        }
    }

    pub fn label(&self, k: usize, idx: usize) -> String {
        match &self.labels {
            Some(ls) => ls[k][idx].clone(),
            None => format!("c{k}_{idx}"),
        }
    }

    /// Boundary matrix `d_k` (for k = 0 this is the empty matrix).
    pub fn boundary(&self, k: usize) -> &SparseIntMatrix {
        &self.boundaries[k]
    }

    pub fn euler_characteristic(&self) -> i64 {
        (0..=self.top_dimension())
            .map(|k| {
                let n = self.cell_count(k) as i64;
                if k % 2 == 0 {
                    n
                } else {
                    -n
                }
            })
            .sum()
    }

    fn check_degree(&self, k: usize) -> Result<(), Error> {
        if k > self.top_dimension() {
            Err(Error::InvalidParameter(format!(
                "degree {k} out of range (top dimension {})",
                self.top_dimension()
            )))
        } else {
            Ok(())
        }
    }

    fn require_integer(&self, what: &str) -> Result<(), Error> {
        match self.coefficients {
            Coefficients::Integer => Ok(()),
            Coefficients::Mod2 => Err(Error::InvalidParameter(format!(
                "{what} needs an integer-validated complex; this one is mod-2 only"
            ))),
        }
    }

    /// `H_k = ker d_k / im d_{k+1}` via Smith normal form: free rank
    /// `|C_k| - rank d_k - rank d_{k+1}`, torsion = invariant factors > 1
    /// of `d_{k+1}`.
    pub fn homology_z(&self, k: usize) -> Result<AbelianGroup, Error> {
        self.require_integer("integral homology")?;
        self.check_degree(k)?;
        let rank_dk = snf_of_sparse(&self.boundaries[k]).rank;
        let (rank_dk1, torsion) = if k < self.top_dimension() {
            let snf = snf_of_sparse(&self.boundaries[k + 1]);
            (snf.rank, snf.torsion()?)
        } else {
            (0, Vec::new())
        };
        Ok(AbelianGroup {
            free_rank: self.cell_count(k) - rank_dk - rank_dk1,
            torsion,
        })
    }

    /// `H^k` with transposed boundaries: same free rank as `H_k`, torsion from
    /// the invariant factors of `d_k`.
    pub fn cohomology_z(&self, k: usize) -> Result<AbelianGroup, Error> {
        self.require_integer("integral cohomology")?;
        self.check_degree(k)?;
        let snf_dk = snf_of_sparse(&self.boundaries[k]);
        let rank_dk1 = if k < self.top_dimension() {
            snf_of_sparse(&self.boundaries[k + 1]).rank
        } else {
            0
        };
        Ok(AbelianGroup {
            free_rank: self.cell_count(k) - snf_dk.rank - rank_dk1,
            torsion: snf_dk.torsion()?,
        })
    }

    /// `dim_F2 H^k = dim ker(d_k mod 2) - rank(d_{k+1} mod 2)`.
    pub fn betti_f2(&self, k: usize) -> Result<usize, Error> {
        self.check_degree(k)?;
        let rank_dk = self.boundaries[k].to_mod2().rank();
        let rank_dk1 = if k < self.top_dimension() {
            self.boundaries[k + 1].to_mod2().rank()
        } else {
            0
        };
        Ok(self.cell_count(k) - rank_dk - rank_dk1)
    }
}

/// Result of a Smith normal form computation: the diagonal `d_1 | d_2 | ...`
/// (positive invariant factors) and the rank.
pub struct SmithNormalForm {
    pub diagonal: Vec<BigInt>,
    pub rank: usize,
}

impl SmithNormalForm {
    /// Invariant factors > 1, as u64 (the complexes here keep them tiny).
    pub fn torsion(&self) -> Result<Vec<u64>, Error> {
        self.diagonal
            .iter()
            .filter(|d| **d > BigInt::from(1))
            .map(|d| {
                u64::try_from(d.clone())
                    .map_err(|_| Error::Internal(format!("invariant factor {d} exceeds u64")))
            })
            .collect()
    }
}

fn snf_of_sparse(m: &SparseIntMatrix) -> SmithNormalForm {
    smith_normal_form_bigint(m.to_dense_bigint())
}

/// Smith normal form over `Z` for an i64 matrix (row-major).
pub fn smith_normal_form(matrix: &[Vec<i64>]) -> SmithNormalForm {
    let dense: Vec<Vec<BigInt>> =
        matrix.iter().map(|row| row.iter().map(|&v| BigInt::from(v)).collect()).collect();
    smith_normal_form_bigint(dense)
}

/// Textbook SNF with exact arbitrary-precision arithmetic. Pivot selection
/// takes a minimal-absolute-value entry of the trailing submatrix; row and
/// column reductions repeat until the pivot divides everything it touches.
pub fn smith_normal_form_bigint(mut m: Vec<Vec<BigInt>>) -> SmithNormalForm {
    let rows = m.len();
    let cols = if rows == 0 { 0 } else { m[0].len() };
    let bound = rows.min(cols);
    let mut diagonal = Vec::new();

    let mut t = 0;
    'outer: while t < bound {
        // Minimal nonzero |entry| in the trailing submatrix.
        let mut pivot: Option<(usize, usize)> = None;
        for i in t..rows {
            for j in t..cols {
                if !m[i][j].is_zero() {
                    match pivot {
                        Some((pi, pj)) if m[pi][pj].abs() <= m[i][j].abs() => {}
                        _ => pivot = Some((i, j)),
                    }
                }
            }
        }
        let Some((pi, pj)) = pivot else {
            break 'outer;
        };
        m.swap(t, pi);
        for row in m.iter_mut() {
            row.swap(t, pj);
        }

        loop {
            // Clear column t.
            let mut dirty = false;
            for i in t + 1..rows {
                if m[i][t].is_zero() {
                    continue;
                }
                let q = &m[i][t] / &m[t][t];
                if !q.is_zero() {
                    for j in t..cols {
                        let sub = &q * &m[t][j];
                        m[i][j] -= sub;
                    }
                }
                if !m[i][t].is_zero() {
                    // Remainder is smaller than the pivot; promote it.
                    m.swap(t, i);
                    dirty = true;
                }
            }
            if dirty {
                continue;
            }
            // Clear row t.
            for j in t + 1..cols {
                if m[t][j].is_zero() {
                    continue;
                }
                let q = &m[t][j] / &m[t][t];
                if !q.is_zero() {
                    for i in t..rows {
                        let sub = &q * &m[i][t];
                        m[i][j] -= sub;
                    }
                }
                if !m[t][j].is_zero() {
                    for row in m.iter_mut() {
                        row.swap(t, j);
                    }
                    dirty = true;
                    break;
                }
            }
            if dirty {
                continue;
            }
            // Pivot must divide the whole trailing block.
            for i in t + 1..rows {
                for j in t + 1..cols {
                    if !(&m[i][j] % &m[t][t]).is_zero() {
                        let add: Vec<BigInt> = m[i][t..].to_vec();
                        for (jj, v) in (t..cols).zip(add) {
                            m[t][jj] += v;
                        }
                        dirty = true;
                        break;
                    }
                }
                if dirty {
                    break;
                }
            }
            if !dirty {
                break;
            }
        }
        diagonal.push(m[t][t].abs());
        t += 1;
    }

    let rank = diagonal.len();
    SmithNormalForm { diagonal, rank }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn snf_diag(m: &[Vec<i64>]) -> Vec<u64> {
        smith_normal_form(m)
            .diagonal
            .iter()
            .map(|d| u64::try_from(d.clone()).unwrap())
            .collect()
    }

    #[test]
    fn snf_of_fujii_d2_is_2_2() {
        // Hand elimination: det = 4, gcd of entries 2, no unit factor.
        assert_eq!(snf_diag(&[vec![2, 2], vec![-2, 0]]), vec![2, 2]);
    }

    #[test]
    fn snf_of_identity_is_all_ones() {
        assert_eq!(
            snf_diag(&[vec![1, 0, 0], vec![0, 1, 0], vec![0, 0, 1]]),
            vec![1, 1, 1]
        );
    }

    #[test]
    fn snf_of_zero_matrix_has_rank_zero() {
        assert_eq!(smith_normal_form(&[vec![0, 0], vec![0, 0]]).rank, 0);
        assert_eq!(smith_normal_form(&[]).rank, 0);
    }

    #[test]
    fn snf_divisibility_chain_on_a_crooked_matrix() {
        // Oracle by minors: gcd of entries 2, gcd of 2x2 minors 4, |det| 624,
        // so the invariant factors are 2, 4/2, 624/4 = 2, 2, 156.
        let snf = smith_normal_form(&[vec![2, 4, 4], vec![-6, 6, 12], vec![10, 4, 16]]);
        let d: Vec<u64> = snf.diagonal.iter().map(|v| u64::try_from(v.clone()).unwrap()).collect();
        for w in d.windows(2) {
            assert_eq!(w[1] % w[0], 0, "diagonal {d:?} not in divisibility order");
        }
        assert_eq!(d, vec![2, 2, 156]);
    }

    fn circle() -> ChainComplex {
        // One vertex, one loop.
        ChainComplex::new(
            &[1, 1],
            vec![vec![vec![]], vec![vec![]]],
            Coefficients::Integer,
            None,
        )
        .unwrap()
    }

    #[test]
    fn circle_homology() {
        let c = circle();
        assert_eq!(c.homology_z(0).unwrap(), AbelianGroup::free(1));
        assert_eq!(c.homology_z(1).unwrap(), AbelianGroup::free(1));
        assert_eq!(c.betti_f2(0).unwrap(), 1);
    }

    #[test]
    fn degree_out_of_range_is_rejected() {
        let c = circle();
        assert!(c.homology_z(2).is_err());
        assert!(c.betti_f2(5).is_err());
    }

    #[test]
    fn d_squared_gate_rejects_bad_complex() {
        // d_2(f) = e, d_1(e) = b - a: composition is nonzero.
        let err = ChainComplex::new(
            &[2, 1, 1],
            vec![
                vec![vec![], vec![]],
                vec![vec![(0, -1), (1, 1)]],
                vec![vec![(0, 1)]],
            ],
            Coefficients::Integer,
            None,
        )
        .unwrap_err();
        assert!(matches!(err, Error::ConstructionRejected(_)));
    }

    #[test]
    fn mod2_gate_accepts_parity_only_complexes() {
        // Same shape as above but with an even composition: d_2(f) = 2e.
        let cx = ChainComplex::new(
            &[2, 1, 1],
            vec![
                vec![vec![], vec![]],
                vec![vec![(0, 1), (1, 1)]],
                vec![vec![(0, 2)]],
            ],
            Coefficients::Mod2,
            None,
        );
        // 2e is 0 mod 2, and d_1(e) = a + b pairs up mod 2 anyway.
        assert!(cx.is_ok());
        assert!(cx.unwrap().homology_z(0).is_err(), "integral homology must be refused");
    }

    #[test]
    fn coordinate_export_format() {
        let m = SparseIntMatrix::from_columns(2, &[vec![(0, 2), (1, -2)], vec![(0, 2)]]);
        assert_eq!(m.to_coordinate_text(), "2 2 3\n1 1 2\n2 1 -2\n1 2 2\n");
    }

    #[test]
    fn euler_characteristic_matches_betti_alternating_sum() {
        let c = circle();
        let chi: i64 = (0..=1)
            .map(|k| {
                let b = c.betti_f2(k).unwrap() as i64;
                if k % 2 == 0 {
                    b
                } else {
                    -b
                }
            })
            .sum();
        assert_eq!(c.euler_characteristic(), chi);
    }
}
