//! Finite CW chain complexes of the spherical space forms `S^{4n+3}/H_m`.
//!
//! The complex has one cell in every dimension congruent to 0 or 3 mod 4 and
//! two cells (branches 1, 2) in dimensions congruent to 1 or 2, up to the top
//! dimension `4n+3`. With `a = 2^{m-1}` the boundaries are
//!
//! ```text
//!   d e^{4k}     = 4a * e^{4k-1}
//!   d e^{4k+1}_i = 0
//!   d e^{4k+2}_1 = a * e^{4k+1}_1 - 2 * e^{4k+1}_2
//!   d e^{4k+2}_2 = 2 * e^{4k+1}_1
//!   d e^{4k+3}   = 0
//! ```
//!
//! Every coefficient is even, so all mod-2 boundaries vanish and the F_2
//! Betti numbers equal the cell counts.

use serde::{Deserialize, Serialize};

use crate::complex::{AbelianGroup, ChainComplex, Coefficients};
use crate::error::Error;

/// A cell of the space-form complex: dimension `4k + residue`, with a branch
/// index only in residues 1 and 2.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct SpaceFormCell {
    pub block: u32,
    pub residue: u32,
    /// 1 or 2 for residues 1 and 2; None for residues 0 and 3.
    pub branch: Option<u32>,
}

impl SpaceFormCell {
    pub fn dimension(&self) -> usize {
        (4 * self.block + self.residue) as usize
    }

    pub fn label(&self) -> String {
        match self.branch {
            Some(b) => format!("e{}_{}", self.dimension(), b),
            None => format!("e{}", self.dimension()),
        }
    }
}

/// Cells of dimension `d`, in branch order.
pub fn cells_in_dimension(n: u32, d: usize) -> Vec<SpaceFormCell> {
    if d > 4 * n as usize + 3 {
        return Vec::new();
    }
    let block = (d / 4) as u32;
    let residue = (d % 4) as u32;
    match residue {
        0 | 3 => vec![SpaceFormCell { block, residue, branch: None }],
        _ => vec![
            SpaceFormCell { block, residue, branch: Some(1) },
            SpaceFormCell { block, residue, branch: Some(2) },
        ],
    }
}

/// Builds the validated integer chain complex of `S^{4n+3}/H_m`.
pub fn build_complex(n: u32, m: u32) -> Result<ChainComplex, Error> {
    if m < 2 {
        return Err(Error::InvalidParameter(format!("space form needs m >= 2, got {m}")));
    }
    if m > 20 || n > 16 {
        return Err(Error::InvalidParameter(format!(
            "parameters (n, m) = ({n}, {m}) out of supported range"
        )));
    }
    let top = 4 * n as usize + 3;
    let half = 1i32 << (m - 1);
    let full = 1i32 << (m + 1);

    let mut counts = Vec::with_capacity(top + 1);
    let mut labels = Vec::with_capacity(top + 1);
    let mut columns: Vec<Vec<Vec<(u32, i32)>>> = Vec::with_capacity(top + 1);
    for d in 0..=top {
        let cells = cells_in_dimension(n, d);
        counts.push(cells.len());
        labels.push(cells.iter().map(|c| c.label()).collect::<Vec<_>>());
        let cols = cells
            .iter()
            .map(|cell| match cell.residue {
                0 if cell.block > 0 => vec![(0u32, full)],
                2 => match cell.branch {
                    Some(1) => vec![(0, half), (1, -2)],
                    Some(2) => vec![(0, 2)],
                    _ => unreachable!(),
                },
                _ => Vec::new(),
            })
            .collect();
        columns.push(cols);
    }
    ChainComplex::new(&counts, columns, Coefficients::Integer, Some(labels))
}

/// Per-degree homology/cohomology tables of one space form.
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct HomologyTable {
    pub n: u32,
    pub m: u32,
    pub integral_homology: Vec<AbelianGroup>,
    pub integral_cohomology: Vec<AbelianGroup>,
    pub f2_cohomology_dims: Vec<usize>,
}

impl HomologyTable {
    pub fn render_text(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "S^{}/H_{} (n = {}, m = {})\n",
            4 * self.n + 3,
            self.m,
            self.n,
            self.m
        ));
        out.push_str("k   H_k(Z)        H^k(Z)        dim H^k(F2)\n");
        for k in 0..self.integral_homology.len() {
            out.push_str(&format!(
                "{:<3} {:<13} {:<13} {}\n",
                k,
                self.integral_homology[k].to_string(),
                self.integral_cohomology[k].to_string(),
                self.f2_cohomology_dims[k]
            ));
        }
        out
    }
}

/// Computes all three tables from the chain complex via Smith normal form
/// and mod-2 ranks.
pub fn homology_table(n: u32, m: u32) -> Result<HomologyTable, Error> {
    let cx = build_complex(n, m)?;
    let top = cx.top_dimension();
    let mut integral_homology = Vec::with_capacity(top + 1);
    let mut integral_cohomology = Vec::with_capacity(top + 1);
    let mut f2 = Vec::with_capacity(top + 1);
    for k in 0..=top {
        integral_homology.push(cx.homology_z(k)?);
        integral_cohomology.push(cx.cohomology_z(k)?);
        f2.push(cx.betti_f2(k)?);
    }
    Ok(HomologyTable { n, m, integral_homology, integral_cohomology, f2_cohomology_dims: f2 })
}

/// The closed-form tables, implemented literally as a case analysis so the
/// chain-level computation has an independent comparison point.
pub fn closed_form_table(n: u32, m: u32) -> HomologyTable {
    let top = 4 * n as usize + 3;
    let torsion_big = 1u64 << (m + 1);
    let mut integral_homology = Vec::with_capacity(top + 1);
    let mut integral_cohomology = Vec::with_capacity(top + 1);
    let mut f2 = Vec::with_capacity(top + 1);
    for k in 0..=top {
        let interior = k > 0 && k < top;
        integral_homology.push(if k == 0 || k == top {
            AbelianGroup::free(1)
        } else if k % 4 == 1 && interior {
            AbelianGroup::torsion_only(&[2, 2])
        } else if k % 4 == 3 && interior {
            AbelianGroup::torsion_only(&[torsion_big])
        } else {
            AbelianGroup::trivial()
        });
        integral_cohomology.push(if k == 0 || k == top {
            AbelianGroup::free(1)
        } else if k % 4 == 0 && interior {
            AbelianGroup::torsion_only(&[torsion_big])
        } else if k % 4 == 2 && interior {
            AbelianGroup::torsion_only(&[2, 2])
        } else {
            AbelianGroup::trivial()
        });
        f2.push(if (k % 4 == 1 || k % 4 == 2) && interior {
            2
        } else if k % 4 == 3 || k % 4 == 0 {
            1
        } else {
            0
        });
    }
    HomologyTable { n, m, integral_homology, integral_cohomology, f2_cohomology_dims: f2 }
}

/// Mismatches between the chain-level tables and the closed forms, reported
/// rather than hidden. An empty list is the expected outcome.
pub fn table_mismatches(computed: &HomologyTable, closed: &HomologyTable) -> Vec<String> {
    let mut out = Vec::new();
    for k in 0..computed.integral_homology.len() {
        if computed.integral_homology[k] != closed.integral_homology[k] {
            out.push(format!(
                "H_{k}: computed {} vs closed form {}",
                computed.integral_homology[k], closed.integral_homology[k]
            ));
        }
        if computed.integral_cohomology[k] != closed.integral_cohomology[k] {
            out.push(format!(
                "H^{k}: computed {} vs closed form {}",
                computed.integral_cohomology[k], closed.integral_cohomology[k]
            ));
        }
        if computed.f2_cohomology_dims[k] != closed.f2_cohomology_dims[k] {
            out.push(format!(
                "dim H^{k}(F2): computed {} vs closed form {}",
                computed.f2_cohomology_dims[k], closed.f2_cohomology_dims[k]
            ));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn n0_m2_cell_counts_and_boundaries() {
        let cx = build_complex(0, 2).unwrap();
        assert_eq!(
            (0..=3).map(|k| cx.cell_count(k)).collect::<Vec<_>>(),
            vec![1, 2, 2, 1]
        );
        // d2 in basis (e1_1, e1_2) x (e2_1, e2_2).
        let d2 = cx.boundary(2);
        let col0: Vec<_> = d2.column(0).collect();
        let col1: Vec<_> = d2.column(1).collect();
        assert_eq!(col0, vec![(0, 2), (1, -2)]);
        assert_eq!(col1, vec![(0, 2)]);
        // d1 = d3 = 0.
        assert_eq!(cx.boundary(1).nnz(), 0);
        assert_eq!(cx.boundary(3).nnz(), 0);
    }

    #[test]
    fn n1_m2_top_block_attaches_with_coefficient_8() {
        let cx = build_complex(1, 2).unwrap();
        let d4 = cx.boundary(4);
        let col: Vec<_> = d4.column(0).collect();
        assert_eq!(col, vec![(0, 8)]);
    }

    #[test]
    fn invalid_parameters_are_rejected() {
        assert!(build_complex(0, 1).is_err());
    }

    #[test]
    fn n0_m2_homology_matches_expected_groups() {
        let t = homology_table(0, 2).unwrap();
        assert_eq!(t.integral_homology[0], AbelianGroup::free(1));
        assert_eq!(t.integral_homology[1], AbelianGroup::torsion_only(&[2, 2]));
        assert_eq!(t.integral_homology[2], AbelianGroup::trivial());
        assert_eq!(t.integral_homology[3], AbelianGroup::free(1));
        assert_eq!(t.integral_cohomology[2], AbelianGroup::torsion_only(&[2, 2]));
        assert_eq!(t.integral_cohomology[3], AbelianGroup::free(1));
        assert_eq!(t.f2_cohomology_dims, vec![1, 2, 2, 1]);
    }

    #[test]
    fn n1_homology_has_z8_in_degree_3_and_cohomology_in_degree_4() {
        let t = homology_table(1, 2).unwrap();
        assert_eq!(t.integral_homology[3], AbelianGroup::torsion_only(&[8]));
        assert_eq!(t.integral_cohomology[4], AbelianGroup::torsion_only(&[8]));
        let t3 = homology_table(1, 3).unwrap();
        assert_eq!(t3.integral_homology[3], AbelianGroup::torsion_only(&[16]));
    }

    #[test]
    fn tables_match_closed_forms_up_to_n2_m4() {
        for n in 0..=2 {
            for m in 2..=4 {
                let computed = homology_table(n, m).unwrap();
                let closed = closed_form_table(n, m);
                let mismatches = table_mismatches(&computed, &closed);
                assert!(mismatches.is_empty(), "(n, m) = ({n}, {m}): {mismatches:?}");
            }
        }
    }

    #[test]
    fn all_boundaries_vanish_mod_2_so_f2_betti_equals_cell_counts() {
        for n in 0..=2u32 {
            let cx = build_complex(n, 2).unwrap();
            for k in 0..=cx.top_dimension() {
                assert_eq!(cx.boundary(k).to_mod2().nnz(), 0);
                assert_eq!(cx.betti_f2(k).unwrap(), cx.cell_count(k));
            }
        }
    }

    #[test]
    fn poincare_duality_over_f2() {
        let t = homology_table(1, 2).unwrap();
        let top = t.f2_cohomology_dims.len() - 1;
        for k in 0..=top {
            assert_eq!(t.f2_cohomology_dims[k], t.f2_cohomology_dims[top - k]);
        }
    }

    #[test]
    fn euler_characteristic_is_zero_for_odd_dimensional_manifolds() {
        for n in 0..=2u32 {
            let cx = build_complex(n, 2).unwrap();
            assert_eq!(cx.euler_characteristic(), 0);
            let betti_sum: i64 = (0..=cx.top_dimension())
                .map(|k| {
                    let b = cx.betti_f2(k).unwrap() as i64;
                    if k % 2 == 0 {
                        b
                    } else {
                        -b
                    }
                })
                .sum();
            assert_eq!(betti_sum, 0);
        }
    }
}
