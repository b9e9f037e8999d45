//! Dense bit-packed matrices and the blocked canonical eliminator.

use serde::{Deserialize, Serialize};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use super::{SolveOutcome, SolveStatus};
use crate::error::Error;

const WORD_BITS: usize = 64;

/// Fixed-length bit vector, one bit per coordinate, packed into u64 words.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct BitVec {
    len: usize,
    words: Vec<u64>,
}

impl BitVec {
    pub fn zeros(len: usize) -> Self {
        BitVec { len, words: vec![0; len.div_ceil(WORD_BITS)] }
    }

    pub fn from_indices(len: usize, indices: impl IntoIterator<Item = usize>) -> Self {
        let mut v = Self::zeros(len);
        for i in indices {
            v.toggle(i);
        }
        v
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        debug_assert!(i < self.len);
        (self.words[i / WORD_BITS] >> (i % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, i: usize, value: bool) {
        debug_assert!(i < self.len);
        let w = &mut self.words[i / WORD_BITS];
        let mask = 1u64 << (i % WORD_BITS);
        if value {
            *w |= mask;
        } else {
            *w &= !mask;
        }
    }

    #[inline]
    pub fn toggle(&mut self, i: usize) {
        debug_assert!(i < self.len);
        self.words[i / WORD_BITS] ^= 1 << (i % WORD_BITS);
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn iter_ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    None
                } else {
                    let b = w.trailing_zeros() as usize;
                    w &= w - 1;
                    Some(wi * WORD_BITS + b)
                }
            })
        })
    }

    pub fn xor_assign(&mut self, other: &BitVec) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    /// Parity of the intersection with `other`.
    pub fn dot(&self, other: &BitVec) -> bool {
        debug_assert_eq!(self.len, other.len);
        let mut acc = 0u64;
        for (a, b) in self.words.iter().zip(&other.words) {
            acc ^= a & b;
        }
        acc.count_ones() % 2 == 1
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Mutable word access; callers must keep padding bits zero.
    pub fn words_mut(&mut self) -> &mut [u64] {
        &mut self.words
    }

    /// Hex serialization, least significant word first, zero-padded.
    pub fn to_hex(&self) -> String {
        let mut s = String::with_capacity(self.words.len() * 16);
        for w in &self.words {
            s.push_str(&format!("{w:016x}"));
        }
        s
    }

    pub fn from_hex(len: usize, hex: &str) -> Result<Self, Error> {
        let n_words = len.div_ceil(WORD_BITS);
        if hex.len() != n_words * 16 {
            return Err(Error::Parse(format!(
                "hex string of length {} does not match bit length {len}",
                hex.len()
            )));
        }
        let mut words = Vec::with_capacity(n_words);
        for chunk in hex.as_bytes().chunks(16) {
            let s = std::str::from_utf8(chunk).map_err(|_| Error::Parse("bad hex".into()))?;
            words.push(u64::from_str_radix(s, 16).map_err(|e| Error::Parse(e.to_string()))?);
        }
        // Padding bits must be zero.
        if len % WORD_BITS != 0 {
            let last = words[n_words - 1];
            if last >> (len % WORD_BITS) != 0 {
                return Err(Error::Parse("nonzero padding bits".into()));
            }
        }
        Ok(BitVec { len, words })
    }
}

/// Dense GF(2) matrix, row-major, bit-packed. Padding bits stay zero.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    words: usize,
    data: Vec<u64>,
}

/// Echelon data produced by [`BitMatrix::echelonize`]: pivots as
/// `(column, row)` in increasing column order.
#[derive(Clone, Debug)]
pub struct Echelon {
    pub pivots: Vec<(u32, u32)>,
    pub pivot_rows: Vec<bool>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let words = cols.div_ceil(WORD_BITS).max(1);
        BitMatrix { rows, cols, words, data: vec![0; rows * words] }
    }

    /// Order-insensitive construction: repeated triples toggle (mod 2).
    pub fn from_triples(
        rows: usize,
        cols: usize,
        triples: impl IntoIterator<Item = (usize, usize)>,
    ) -> Self {
        let mut m = Self::zeros(rows, cols);
        for (r, c) in triples {
            m.toggle(r, c);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn words_per_row(&self) -> usize {
        self.words
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        (self.data[r * self.words + c / WORD_BITS] >> (c % WORD_BITS)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        let w = &mut self.data[r * self.words + c / WORD_BITS];
        let mask = 1u64 << (c % WORD_BITS);
        if value {
            *w |= mask;
        } else {
            *w &= !mask;
        }
    }

    #[inline]
    pub fn toggle(&mut self, r: usize, c: usize) {
        self.data[r * self.words + c / WORD_BITS] ^= 1 << (c % WORD_BITS);
    }

    pub fn row(&self, r: usize) -> &[u64] {
        &self.data[r * self.words..(r + 1) * self.words]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [u64] {
        &mut self.data[r * self.words..(r + 1) * self.words]
    }

    pub fn set_row_bits(&mut self, r: usize, bits: impl IntoIterator<Item = usize>) {
        for c in bits {
            self.toggle(r, c);
        }
    }

    pub fn transpose(&self) -> BitMatrix {
        let mut t = BitMatrix::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            let row = self.row(r);
            for (wi, &w) in row.iter().enumerate() {
                let mut w = w;
                while w != 0 {
                    let b = w.trailing_zeros() as usize;
                    w &= w - 1;
                    t.toggle(wi * WORD_BITS + b, r);
                }
            }
        }
        t
    }

    /// Matrix-vector product over GF(2).
    pub fn mul_vec(&self, v: &BitVec) -> BitVec {
        assert_eq!(v.len(), self.cols);
        let mut out = BitVec::zeros(self.rows);
        for r in 0..self.rows {
            let mut acc = 0u64;
            for (a, b) in self.row(r).iter().zip(v.words()) {
                acc ^= a & b;
            }
            if acc.count_ones() % 2 == 1 {
                out.set(r, true);
            }
        }
        out
    }

    pub fn rank(&self) -> usize {
        let mut copy = self.clone();
        copy.echelonize(self.cols).pivots.len()
    }

    /// Solves `A u = b` on an internal copy; the returned solution is
    /// re-verified against `self` before returning.
    pub fn solve(&self, b: &BitVec) -> SolveOutcome {
        assert_eq!(
            b.len(),
            self.rows,
            "right-hand side length {} does not match {} rows",
            b.len(),
            self.rows
        );
        let mut aug = BitMatrix::zeros(self.rows, self.cols + 1);
        for r in 0..self.rows {
            aug.row_mut(r)[..self.words].copy_from_slice(self.row(r));
            if b.get(r) {
                aug.set(r, self.cols, true);
            }
        }
        let outcome = aug.solve_augmented_in_place(self.cols);
        if let Some(u) = &outcome.solution {
            let check = self.mul_vec(u);
            assert_eq!(&check, b, "solver returned an unverified solution");
        }
        outcome
    }

    /// Solves the system whose coefficient part is the first `n_unknowns`
    /// columns and whose right-hand side is the remaining column(s),
    /// eliminating in place. Callers keep responsibility for re-verifying the
    /// solution against their original (typically sparse) data.
    pub fn solve_augmented_in_place(&mut self, n_unknowns: usize) -> SolveOutcome {
        assert!(n_unknowns < self.cols || (n_unknowns == 0 && self.cols == 0));
        let ech = self.echelonize(n_unknowns);
        let rank = ech.pivots.len();
        // Non-pivot rows are fully reduced over the coefficient columns; any
        // residual bit in the augmented part certifies a row reading 0 = 1.
        for r in 0..self.rows {
            if ech.pivot_rows[r] {
                continue;
            }
            for c in n_unknowns..self.cols {
                if self.get(r, c) {
                    return SolveOutcome { status: SolveStatus::Inconsistent, solution: None, rank };
                }
            }
        }
        let mut u = BitVec::zeros(n_unknowns);
        for &(c, r) in ech.pivots.iter().rev() {
            let row = self.row(r as usize);
            let mut acc = 0u64;
            for (a, b) in row[..n_unknowns.div_ceil(WORD_BITS)].iter().zip(u.words()) {
                acc ^= a & b;
            }
            let mut bit = acc.count_ones() % 2 == 1;
            if self.get(r as usize, n_unknowns) {
                bit = !bit;
            }
            u.set(c as usize, bit);
        }
        SolveOutcome { status: SolveStatus::Solvable, solution: Some(u), rank }
    }

    /// Canonical kernel basis: one vector per free column, free coordinate 1,
    /// other free coordinates 0, pivot coordinates back-substituted.
    pub fn kernel_basis(&self) -> Vec<BitVec> {
        let mut copy = self.clone();
        let ech = copy.echelonize(self.cols);
        let mut is_pivot_col = vec![false; self.cols];
        for &(c, _) in &ech.pivots {
            is_pivot_col[c as usize] = true;
        }
        let mut basis = Vec::with_capacity(self.cols - ech.pivots.len());
        for f in 0..self.cols {
            if is_pivot_col[f] {
                continue;
            }
            let mut v = BitVec::zeros(self.cols);
            v.set(f, true);
            for &(c, r) in ech.pivots.iter().rev() {
                if (c as usize) > f {
                    continue;
                }
                if copy.row(r as usize).iter().zip(v.words()).fold(0u64, |acc, (a, b)| acc ^ (a & b)).count_ones() % 2 == 1 {
                    v.set(c as usize, true);
                }
            }
            debug_assert!(self.mul_vec(&v).is_zero());
            basis.push(v);
        }
        basis
    }

    /// In-place echelon form over columns `0..pivot_col_limit` with the
    /// deterministic pivot rule (lowest column, then lowest row). Pivot rows
    /// are frozen once chosen; every other row ends with zeros on all pivot
    /// columns. Blocked into 64-column windows; the bulk update applies 8-bit
    /// combination tables and may run row-parallel.
    pub fn echelonize(&mut self, pivot_col_limit: usize) -> Echelon {
        let rows = self.rows;
        let words = self.words;
        let mut pivots: Vec<(u32, u32)> = Vec::new();
        let mut is_pivot_row = vec![false; rows];
        if rows == 0 || pivot_col_limit == 0 {
            return Echelon { pivots, pivot_rows: is_pivot_row };
        }

        let mut cache: Vec<u64> = vec![0; rows];
        let mut sel: Vec<u64> = vec![0; rows];
        let mut active: Vec<u32> = (0..rows as u32).collect();
        // Reduced pivot rows for the current block, densely packed.
        let mut pivot_rows_buf: Vec<u64> = vec![0; 64 * words];
        // 8 tables x 256 entries x row suffix width.
        let mut tables: Vec<u64> = vec![0; 8 * 256 * words];

        let n_blocks = pivot_col_limit.div_ceil(WORD_BITS);
        for block in 0..n_blocks {
            if active.is_empty() {
                break;
            }
            let word_idx = block;
            let width = WORD_BITS.min(pivot_col_limit - block * WORD_BITS);
            // Active rows carry zeros on every column left of this block, so
            // pivot rows found here (and hence the table entries) have
            // support only in words word_idx.. .
            let suffix = words - word_idx;

            // Phase 1: pivot discovery on cached block words.
            for &r in &active {
                let r = r as usize;
                cache[r] = self.data[r * words + word_idx];
                sel[r] = 0;
            }
            let mut local: Vec<(usize, usize)> = Vec::new(); // (col-in-block, row)
            for c in 0..width {
                let mask = 1u64 << c;
                let mut found = usize::MAX;
                for &r in &active {
                    let r = r as usize;
                    if !is_pivot_row[r] && cache[r] & mask != 0 {
                        found = r;
                        break;
                    }
                }
                if found == usize::MAX {
                    continue;
                }
                let pr = found;
                let k = local.len();
                is_pivot_row[pr] = true;
                // Materialize the reduced pivot row: apply the in-block
                // eliminations its cache word has seen so far.
                {
                    let row = &mut self.data[pr * words + word_idx..(pr + 1) * words];
                    let mut s = sel[pr];
                    while s != 0 {
                        let j = s.trailing_zeros() as usize;
                        s &= s - 1;
                        let prow = &pivot_rows_buf[j * suffix..(j + 1) * suffix];
                        for (a, b) in row.iter_mut().zip(prow) {
                            *a ^= b;
                        }
                    }
                    pivot_rows_buf[k * suffix..(k + 1) * suffix].copy_from_slice(row);
                }
                let piv_word = cache[pr];
                debug_assert_eq!(piv_word & ((1 << c) - 1), 0, "pivot word has earlier bits");
                pivots.push(((block * WORD_BITS + c) as u32, pr as u32));
                local.push((c, pr));
                // Virtually eliminate column c from the remaining rows.
                for &r in &active {
                    let r = r as usize;
                    if !is_pivot_row[r] && cache[r] & mask != 0 {
                        cache[r] ^= piv_word;
                        sel[r] |= 1 << k;
                    }
                }
            }
            if local.is_empty() {
                continue;
            }

            // Phase 2: combination tables over the reduced pivot row suffixes.
            let n_local = local.len();
            let n_tables = n_local.div_ceil(8);
            for t in 0..n_tables {
                let base = t * 8;
                let table = &mut tables[t * 256 * suffix..(t + 1) * 256 * suffix];
                table[..suffix].iter_mut().for_each(|w| *w = 0);
                for idx in 1usize..256 {
                    let low = idx.trailing_zeros() as usize;
                    let rest = idx & (idx - 1);
                    if base + low < n_local {
                        for w in 0..suffix {
                            table[idx * suffix + w] =
                                table[rest * suffix + w] ^ pivot_rows_buf[(base + low) * suffix + w];
                        }
                    } else {
                        for w in 0..suffix {
                            table[idx * suffix + w] = table[rest * suffix + w];
                        }
                    }
                }
            }

            // Phase 3: bulk update of the active non-pivot rows.
            let tables_ref = &tables;
            let sel_ref = &sel;
            let is_pivot_ref = &is_pivot_row;
            let apply = |r: usize, row_suffix: &mut [u64]| {
                if is_pivot_ref[r] {
                    return;
                }
                let s = sel_ref[r];
                if s == 0 {
                    return;
                }
                for t in 0..n_tables {
                    let byte = ((s >> (t * 8)) & 0xff) as usize;
                    if byte == 0 {
                        continue;
                    }
                    let entry = &tables_ref[(t * 256 + byte) * suffix..(t * 256 + byte + 1) * suffix];
                    for (a, b) in row_suffix.iter_mut().zip(entry) {
                        *a ^= b;
                    }
                }
            };

            #[cfg(feature = "parallel")]
            {
                self.data
                    .par_chunks_mut(words)
                    .enumerate()
                    .for_each(|(r, row)| apply(r, &mut row[word_idx..]));
            }
            #[cfg(not(feature = "parallel"))]
            {
                for (r, row) in self.data.chunks_mut(words).enumerate() {
                    apply(r, &mut row[word_idx..]);
                }
            }

            active.retain(|&r| !is_pivot_row[r as usize]);
        }

        Echelon { pivots, pivot_rows: is_pivot_row }
    }

    /// Coordinate text (same layout as the integer chain-complex export, with
    /// value always 1).
    pub fn to_coordinate_text(&self) -> String {
        let mut entries = Vec::new();
        for r in 0..self.rows {
            for c in 0..self.cols {
                if self.get(r, c) {
                    entries.push((r, c));
                }
            }
        }
        let mut out = format!("{} {} {}\n", self.rows, self.cols, entries.len());
        for (r, c) in entries {
            out.push_str(&format!("{} {} 1\n", r + 1, c + 1));
        }
        out
    }

    pub fn from_coordinate_text(text: &str) -> Result<Self, Error> {
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| Error::Parse("empty coordinate text".into()))?;
        let dims: Vec<usize> = header
            .split_whitespace()
            .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad header {header:?}"))))
            .collect::<Result<_, _>>()?;
        if dims.len() != 3 {
            return Err(Error::Parse(format!("bad header {header:?}")));
        }
        let mut m = BitMatrix::zeros(dims[0], dims[1]);
        let mut count = 0usize;
        for line in lines {
            if line.trim().is_empty() {
                continue;
            }
            let parts: Vec<i64> = line
                .split_whitespace()
                .map(|t| t.parse().map_err(|_| Error::Parse(format!("bad line {line:?}"))))
                .collect::<Result<_, _>>()?;
            if parts.len() != 3 {
                return Err(Error::Parse(format!("bad line {line:?}")));
            }
            let (r, c, v) = (parts[0] as usize - 1, parts[1] as usize - 1, parts[2]);
            if r >= dims[0] || c >= dims[1] {
                return Err(Error::Parse(format!("entry out of range: {line:?}")));
            }
            if v % 2 != 0 {
                m.toggle(r, c);
            }
            count += 1;
        }
        if count != dims[2] {
            return Err(Error::Parse(format!("expected {} entries, saw {count}", dims[2])));
        }
        Ok(m)
    }
}
