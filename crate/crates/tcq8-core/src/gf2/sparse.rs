//! Sparse GF(2) column reduction.
//!
//! Columns are sorted index lists; reduction pairs each stored pivot column
//! with its largest row index. Absorbing every column of a matrix yields its
//! exact rank; absorbing a subset certifies a rank lower bound, since stored
//! pivot columns with distinct lows are linearly independent members of the
//! column space. A reduce-only pass decides column-space membership.

use super::dense::BitMatrix;

/// Column-major sparse GF(2) matrix (sorted row indices per column).
#[derive(Clone, Debug)]
pub struct SparseBitMatrix {
    rows: usize,
    columns: Vec<Vec<u32>>,
}

impl SparseBitMatrix {
    pub fn from_sorted_columns(rows: usize, columns: Vec<Vec<u32>>) -> Self {
        debug_assert!(columns
            .iter()
            .all(|c| c.windows(2).all(|w| w[0] < w[1]) && c.iter().all(|&r| (r as usize) < rows)));
        SparseBitMatrix { rows, columns }
    }

    /// Order-insensitive triple construction; duplicates toggle.
    pub fn from_triples(
        rows: usize,
        cols: usize,
        triples: impl IntoIterator<Item = (usize, usize)>,
    ) -> Self {
        let mut columns = vec![Vec::new(); cols];
        for (r, c) in triples {
            columns[c].push(r as u32);
        }
        for col in &mut columns {
            col.sort_unstable();
            let mut out = Vec::with_capacity(col.len());
            let mut i = 0;
            while i < col.len() {
                let mut j = i;
                while j < col.len() && col[j] == col[i] {
                    j += 1;
                }
                if (j - i) % 2 == 1 {
                    out.push(col[i]);
                }
                i = j;
            }
            *col = out;
        }
        SparseBitMatrix { rows, columns }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.columns.len()
    }

    pub fn column(&self, j: usize) -> &[u32] {
        &self.columns[j]
    }

    pub fn nnz(&self) -> usize {
        self.columns.iter().map(|c| c.len()).sum()
    }

    pub fn rank(&self) -> usize {
        let mut reducer = ColumnReducer::new(self.rows);
        for col in &self.columns {
            reducer.absorb(col.clone());
        }
        reducer.pivot_count()
    }

    /// Coordinate text export, matching the integer layout (value 1 per entry).
    pub fn to_coordinate_text(&self) -> String {
        let mut out = format!("{} {} {}\n", self.rows, self.columns.len(), self.nnz());
        for (j, col) in self.columns.iter().enumerate() {
            for &r in col {
                out.push_str(&format!("{} {} 1\n", r + 1, j + 1));
            }
        }
        out
    }

    pub fn to_dense(&self) -> BitMatrix {
        let mut m = BitMatrix::zeros(self.rows, self.columns.len());
        for (j, col) in self.columns.iter().enumerate() {
            for &r in col {
                m.set(r as usize, j, true);
            }
        }
        m
    }

    /// Apply to a set of coordinates: `out = M * indicator(support)`, as a
    /// sorted support list.
    pub fn mul_support(&self, support: &[u32]) -> Vec<u32> {
        let mut acc: Vec<u32> = Vec::new();
        for &j in support {
            acc.extend_from_slice(&self.columns[j as usize]);
        }
        acc.sort_unstable();
        let mut out = Vec::new();
        let mut i = 0;
        while i < acc.len() {
            let mut j = i;
            while j < acc.len() && acc[j] == acc[i] {
                j += 1;
            }
            if (j - i) % 2 == 1 {
                out.push(acc[i]);
            }
            i = j;
        }
        out
    }
}

/// What happened to an absorbed column.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Absorb {
    /// The column reduced to zero (dependent on stored pivots).
    Zeroed,
    /// The column became a new pivot with the given low row.
    Pivot(u32),
    /// The per-column operation cap was hit; the column was dropped without
    /// being stored. Only rank *lower* bounds survive skips.
    Skipped,
}

/// Incremental column reducer with one stored reduced column per pivot row.
pub struct ColumnReducer {
    pivot_of_low: Vec<i32>,
    stored: Vec<Vec<u32>>,
    ops: u64,
}

fn xor_sorted(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => {
                out.push(a[i]);
                i += 1;
            }
            std::cmp::Ordering::Greater => {
                out.push(b[j]);
                j += 1;
            }
            std::cmp::Ordering::Equal => {
                i += 1;
                j += 1;
            }
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

impl ColumnReducer {
    pub fn new(rows: usize) -> Self {
        ColumnReducer { pivot_of_low: vec![-1; rows], stored: Vec::new(), ops: 0 }
    }

    pub fn pivot_count(&self) -> usize {
        self.stored.len()
    }

    /// Total merge work done so far (sum of merged lengths).
    pub fn ops_spent(&self) -> u64 {
        self.ops
    }

    pub fn absorb(&mut self, col: Vec<u32>) -> Absorb {
        self.absorb_capped(col, u64::MAX)
    }

    /// Reduce `col` against the stored pivots, giving up (without storing)
    /// once the merge work for this column exceeds `cap`.
    pub fn absorb_capped(&mut self, mut col: Vec<u32>, cap: u64) -> Absorb {
        let mut spent = 0u64;
        loop {
            let Some(&low) = col.last() else {
                return Absorb::Zeroed;
            };
            let p = self.pivot_of_low[low as usize];
            if p < 0 {
                self.pivot_of_low[low as usize] = self.stored.len() as i32;
                self.stored.push(col);
                return Absorb::Pivot(low);
            }
            let other = &self.stored[p as usize];
            spent += (col.len() + other.len()) as u64;
            if spent > cap {
                self.ops += spent;
                return Absorb::Skipped;
            }
            col = xor_sorted(&col, other);
            self.ops += spent;
            spent = 0;
        }
    }

    /// Reduce without storing; the residue is empty iff the column lies in
    /// the span of the stored pivots.
    pub fn reduce(&self, mut col: Vec<u32>) -> Vec<u32> {
        loop {
            let Some(&low) = col.last() else {
                return col;
            };
            let p = self.pivot_of_low[low as usize];
            if p < 0 {
                return col;
            }
            col = xor_sorted(&col, &self.stored[p as usize]);
        }
    }

    /// Memory currently held by stored columns, in entries.
    pub fn stored_entries(&self) -> usize {
        self.stored.iter().map(|c| c.len()).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sparse_rank_matches_dense_rank_on_small_cases() {
        let triples = [(0usize, 0usize), (1, 0), (0, 1), (1, 1), (2, 2)];
        let s = SparseBitMatrix::from_triples(3, 3, triples);
        assert_eq!(s.rank(), s.to_dense().rank());
        assert_eq!(s.rank(), 2);
    }

    #[test]
    fn duplicate_triples_toggle() {
        let s = SparseBitMatrix::from_triples(2, 1, [(0, 0), (0, 0), (1, 0)]);
        assert_eq!(s.column(0), &[1]);
    }

    #[test]
    fn membership_via_reduce() {
        // Columns (0,1) and (1,2); their sum (0,2) is in the span, (0,) is not.
        let mut red = ColumnReducer::new(3);
        red.absorb(vec![0, 1]);
        red.absorb(vec![1, 2]);
        assert!(red.reduce(vec![0, 2]).is_empty());
        assert!(!red.reduce(vec![0]).is_empty());
    }

    #[test]
    fn capped_absorb_skips_and_preserves_pivot_count() {
        let mut red = ColumnReducer::new(4);
        red.absorb(vec![0, 1, 2, 3]);
        red.absorb(vec![1, 2, 3]);
        let before = red.pivot_count();
        assert_eq!(red.absorb_capped(vec![2, 3], 1), Absorb::Skipped);
        assert_eq!(red.pivot_count(), before);
    }

    #[test]
    fn mul_support_applies_parity() {
        let s = SparseBitMatrix::from_triples(3, 2, [(0, 0), (1, 0), (1, 1), (2, 1)]);
        assert_eq!(s.mul_support(&[0, 1]), vec![0, 2]);
    }
}
