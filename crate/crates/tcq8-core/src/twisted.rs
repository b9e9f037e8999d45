//! The twisted product complex `S^3 x_ad P^m(Q_8)`.
//!
//! Cells are pairs `[s|{w}]` of a base cell `s` of `S^3/Q_8` (in its
//! six-cell CW structure) and a normalized bar cell `w` of `Q_8` with
//! `dim w <= fiber cut-off`. The mod-2 boundary combines translate terms —
//! `[s'|{conj(w, g)}]` for finitely many `(s', g)` pairs depending on `s` —
//! with the fiber term `[s|{dw}]`.
//!
//! The translate data is a [`BoundaryRule`]. The published formula for the
//! top cell fails the mod-2 closure gates as printed, so the rule is data:
//! [`resolve_boundary_rule`] starts from the printed rule and searches the
//! finite space of summand reassignments and conjugator orientations,
//! accepting exactly those rules that satisfy both gates (even base
//! multiplicities, and `d . d = 0` through the checked dimension).

use serde::{Deserialize, Serialize};

use crate::bar::{map_indices, BarCells};
use crate::error::Error;
use crate::gf2::{BitMatrix, BitVec, SolveStatus, SparseBitMatrix};
use crate::group::{Element, QuaternionGroup};

/// Base cells of the six-cell CW structure on `S^3/Q_8`, in frozen order.
pub const BASE_COUNT: usize = 6;
pub const BASE_DIMS: [usize; BASE_COUNT] = [0, 1, 1, 2, 2, 3];
pub const BASE_LABELS: [&str; BASE_COUNT] = ["e0", "e1_1", "e1_2", "e2_1", "e2_2", "e3"];

pub const E0: usize = 0;
pub const E1_1: usize = 1;
pub const E1_2: usize = 2;
pub const E2_1: usize = 3;
pub const E2_2: usize = 4;
pub const E3: usize = 5;

/// Translate terms per base cell: `(target base cell, conjugating element)`.
/// Conjugation acts componentwise as `g^{-1} . g`. The fiber term `[s|{dw}]`
/// is always included when `include_fiber_term` is set (it always is for the
/// geometric rules; the flag exists so gate diagnostics can isolate terms).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BoundaryRule {
    pub terms: [Vec<(usize, Element)>; 6],
    pub include_fiber_term: bool,
    pub description: String,
}

impl BoundaryRule {
    /// The rule exactly as printed in the source formulas.
    pub fn verbatim(group: &QuaternionGroup) -> Self {
        let e = Element::IDENTITY;
        let x = group.x();
        let y = group.y();
        let xy = group.mul(x, y);
        BoundaryRule {
            terms: [
                vec![],
                vec![(E0, e), (E0, x)],
                vec![(E0, e), (E0, y)],
                vec![(E1_1, e), (E1_2, e), (E1_1, x), (E1_2, y)],
                vec![(E1_1, e), (E1_2, e), (E1_1, xy), (E1_2, x)],
                vec![(E2_1, e), (E2_2, e), (E2_1, xy), (E2_1, x)],
            ],
            include_fiber_term: true,
            description: "verbatim".to_string(),
        }
    }

    /// Mod-2 multiset of base targets per line, after cancelling repeated
    /// `(target, conjugation class)` terms. Conjugation by `g` and by
    /// `g * x^2` act identically (`x^2` is central), so terms are classed by
    /// the conjugator modulo the center.
    fn canonical_terms(&self, group: &QuaternionGroup) -> [Vec<(usize, usize)>; 6] {
        let center = Element { x_exp: 2, y_exp: 0 };
        let class_of = |g: Element| -> usize {
            let other = group.mul(g, center);
            group.index_of_element(g).min(group.index_of_element(other))
        };
        let mut out: [Vec<(usize, usize)>; 6] = Default::default();
        for s in 0..BASE_COUNT {
            let mut classed: Vec<(usize, usize)> =
                self.terms[s].iter().map(|&(t, g)| (t, class_of(g))).collect();
            classed.sort_unstable();
            // Cancel pairs mod 2.
            let mut reduced: Vec<(usize, usize)> = Vec::new();
            for term in classed.drain(..) {
                if reduced.last() == Some(&term) {
                    reduced.pop();
                } else {
                    reduced.push(term);
                }
            }
            out[s] = reduced;
        }
        out
    }

    /// Even-multiplicity gate: each line's surviving translate targets must
    /// cover every base cell an even number of times, matching the vanishing
    /// mod-2 boundary of the base complex.
    pub fn base_projection_is_even(&self, group: &QuaternionGroup) -> bool {
        let canon = self.canonical_terms(group);
        for line in canon.iter() {
            let mut count = [0usize; BASE_COUNT];
            for &(t, _) in line {
                count[t] += 1;
            }
            if count.iter().any(|&c| c % 2 != 0) {
                return false;
            }
        }
        true
    }
}

/// Outcome of the rule search: every candidate that passed both gates, plus
/// diagnostics about the printed rule.
#[derive(Clone, Debug)]
pub struct RuleResolution {
    pub accepted: BoundaryRule,
    pub passing_descriptions: Vec<String>,
    pub verbatim_passed: bool,
    pub verbatim_diagnostic: String,
}

/// Searches the documented variant space. Deterministic: candidates are
/// enumerated in a fixed order and the accepted rule is the passing candidate
/// with the fewest edits from the printed rule (ties broken by description).
pub fn resolve_boundary_rule(
    group: &QuaternionGroup,
    fiber_cutoff: usize,
    gate_dim: usize,
) -> Result<RuleResolution, Error> {
    let verbatim = BoundaryRule::verbatim(group);

    let verbatim_even = verbatim.base_projection_is_even(group);
    let verbatim_closed = verbatim_even
        && d_squared_holds(group, &verbatim, fiber_cutoff, gate_dim.min(4))
        && d_squared_holds(group, &verbatim, fiber_cutoff, gate_dim);
    let verbatim_diag = if verbatim_even {
        "printed rule passed the even-multiplicity gate".to_string()
    } else {
        "printed top-cell line projects to 3*e2_1 + e2_2, which is odd; one summand must move"
            .to_string()
    };

    // Variant space: each conjugated term may target either cell of its
    // dimension, with the conjugator possibly inverted. Plain (identity
    // conjugator) terms are fixed.
    let mut candidates: Vec<BoundaryRule> = Vec::new();
    let line_targets: [&[usize]; 6] = [
        &[],
        &[E0],
        &[E0],
        &[E1_1, E1_2],
        &[E1_1, E1_2],
        &[E2_1, E2_2],
    ];
    let mut variant_sets: Vec<Vec<Vec<(usize, Element)>>> = Vec::new();
    for s in 0..BASE_COUNT {
        let mut per_term: Vec<Vec<(usize, Element)>> = Vec::new();
        for &(t, g) in &verbatim.terms[s] {
            if g.is_identity() {
                per_term.push(vec![(t, g)]);
            } else {
                let mut opts = Vec::new();
                for &target in line_targets[s] {
                    for gg in [g, group.inv(g)] {
                        opts.push((target, gg));
                    }
                }
                per_term.push(opts);
            }
        }
        variant_sets.push(per_term);
    }
    // Cartesian product over all lines and terms.
    fn expand(
        sets: &[Vec<Vec<(usize, Element)>>],
        line: usize,
        term: usize,
        current: &mut Vec<Vec<(usize, Element)>>,
        out: &mut Vec<Vec<Vec<(usize, Element)>>>,
    ) {
        if line == sets.len() {
            out.push(current.clone());
            return;
        }
        if term == sets[line].len() {
            expand(sets, line + 1, 0, current, out);
            return;
        }
        for opt in &sets[line][term] {
            current[line].push(*opt);
            expand(sets, line, term + 1, current, out);
            current[line].pop();
        }
    }
    let mut assignments = Vec::new();
    expand(&variant_sets, 0, 0, &mut vec![Vec::new(); BASE_COUNT], &mut assignments);

    let mut seen = std::collections::HashSet::new();
    for assignment in assignments {
        let terms: [Vec<(usize, Element)>; 6] = assignment.try_into().expect("six lines");
        let rule = BoundaryRule {
            terms,
            include_fiber_term: true,
            description: String::new(),
        };
        let key: Vec<Vec<(usize, usize)>> = rule.canonical_terms(group).to_vec();
        if seen.insert(key) {
            candidates.push(rule);
        }
    }

    let edits = |rule: &BoundaryRule| -> usize {
        let mut n = 0;
        for s in 0..BASE_COUNT {
            for (a, b) in rule.terms[s].iter().zip(&verbatim.terms[s]) {
                if a != b {
                    n += 1;
                }
            }
        }
        n
    };

    let mut passing: Vec<BoundaryRule> = Vec::new();
    for mut rule in candidates {
        if !rule.base_projection_is_even(group) {
            continue;
        }
        if !d_squared_holds(group, &rule, fiber_cutoff, gate_dim.min(4)) {
            continue;
        }
        if !d_squared_holds(group, &rule, fiber_cutoff, gate_dim) {
            continue;
        }
        rule.description = describe_edits(group, &rule, &verbatim);
        passing.push(rule);
    }
    passing.sort_by_key(|r| (edits(r), r.description.clone()));

    let Some(accepted) = passing.first().cloned() else {
        return Err(Error::CertificateFailure(
            "no boundary-rule variant passes both gates; the cell model itself is in question"
                .into(),
        ));
    };
    Ok(RuleResolution {
        accepted,
        passing_descriptions: passing.iter().map(|r| r.description.clone()).collect(),
        verbatim_passed: verbatim_closed,
        verbatim_diagnostic: verbatim_diag,
    })
}

fn describe_edits(group: &QuaternionGroup, rule: &BoundaryRule, verbatim: &BoundaryRule) -> String {
    let mut edits = Vec::new();
    for s in 0..BASE_COUNT {
        for (a, b) in rule.terms[s].iter().zip(&verbatim.terms[s]) {
            if a != b {
                edits.push(format!(
                    "{}: conj-{} term {} -> {}",
                    BASE_LABELS[s],
                    b.1,
                    BASE_LABELS[b.0],
                    if a.1 == b.1 {
                        BASE_LABELS[a.0].to_string()
                    } else {
                        format!("{} (conj by {})", BASE_LABELS[a.0], a.1)
                    }
                ));
            }
        }
    }
    let _ = group;
    if edits.is_empty() {
        "verbatim".to_string()
    } else {
        edits.join("; ")
    }
}

/// Layout of one total dimension: which base cells contribute and at which
/// offset their fiber block starts.
#[derive(Clone, Debug, Default)]
struct Layout {
    offsets: [usize; BASE_COUNT],
    present: [bool; BASE_COUNT],
    total: usize,
}

fn layout_for(cells: &BarCells, fiber_cutoff: usize, d: usize) -> Layout {
    let mut layout = Layout::default();
    let mut acc = 0usize;
    for s in 0..BASE_COUNT {
        layout.offsets[s] = acc;
        if d >= BASE_DIMS[s] && d - BASE_DIMS[s] <= fiber_cutoff {
            layout.present[s] = true;
            acc += cells.cell_count(d - BASE_DIMS[s]);
        }
    }
    layout.total = acc;
    layout
}

/// Mod-2 boundary of one cell under a rule, as a sorted support list in the
/// (d-1)-layout. Duplicate targets cancel.
fn boundary_of_cell(
    cells: &BarCells,
    rule: &BoundaryRule,
    layout_below: &Layout,
    s: usize,
    fiber_dim: usize,
    fiber_idx: usize,
) -> Vec<u32> {
    let mut acc: Vec<u32> = Vec::new();
    for &(t, g) in &rule.terms[s] {
        debug_assert_eq!(BASE_DIMS[t] + 1, BASE_DIMS[s]);
        if !layout_below.present[t] {
            continue;
        }
        let image = cells.conj_tuple(fiber_dim, fiber_idx, g);
        acc.push((layout_below.offsets[t] + image) as u32);
    }
    if rule.include_fiber_term && fiber_dim > 0 && layout_below.present[s] {
        for face in cells.faces_mod2(fiber_dim, fiber_idx) {
            acc.push((layout_below.offsets[s] + face as usize) as u32);
        }
    }
    acc.sort_unstable();
    let mut out = Vec::with_capacity(acc.len());
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

/// Checks `d . d = 0` for all cells of total dimension <= `max_dim` without
/// materializing matrices.
pub fn d_squared_holds(
    group: &QuaternionGroup,
    rule: &BoundaryRule,
    fiber_cutoff: usize,
    max_dim: usize,
) -> bool {
    let cells = BarCells::new(group);
    let layouts: Vec<Layout> =
        (0..=max_dim).map(|d| layout_for(&cells, fiber_cutoff, d)).collect();
    for d in 2..=max_dim {
        let layout = &layouts[d];
        let below = &layouts[d - 1];
        let below2 = &layouts[d - 2];
        for s in 0..BASE_COUNT {
            if !layout.present[s] {
                continue;
            }
            let fiber_dim = d - BASE_DIMS[s];
            let n = cells.cell_count(fiber_dim);
            let bad = map_indices(n, |f| {
                let first = boundary_of_cell(&cells, rule, below, s, fiber_dim, f);
                let mut acc: Vec<u32> = Vec::new();
                for &c in &first {
                    let (t, tf) = decode_in_layout(below, c as usize);
                    let tdim = d - 1 - BASE_DIMS[t];
                    acc.extend(boundary_of_cell(&cells, rule, below2, t, tdim, tf));
                }
                acc.sort_unstable();
                let mut i = 0;
                while i + 1 < acc.len() {
                    if acc[i] == acc[i + 1] {
                        i += 2;
                    } else {
                        return true;
                    }
                }
                i != acc.len()
            });
            if bad.iter().any(|&b| b) {
                return false;
            }
        }
    }
    true
}

fn decode_in_layout(layout: &Layout, idx: usize) -> (usize, usize) {
    for s in (0..BASE_COUNT).rev() {
        if layout.present[s] && idx >= layout.offsets[s] {
            return (s, idx - layout.offsets[s]);
        }
    }
    panic!("index {idx} outside layout");
}

/// The built complex: mod-2 boundaries through `max_total_dim`, with the
/// frozen cell order (base cells in CW order, then fiber tuples
/// lexicographically).
pub struct TwistedComplex {
    cells: BarCells,
    rule: BoundaryRule,
    fiber_cutoff: usize,
    max_total_dim: usize,
    layouts: Vec<Layout>,
    boundaries: Vec<SparseBitMatrix>,
}

impl TwistedComplex {
    /// Builds the complex, re-running the `d . d = 0` gate on the built
    /// matrices (construction is rejected on the first offending cell).
    pub fn build(
        group: &QuaternionGroup,
        rule: BoundaryRule,
        fiber_cutoff: usize,
        max_total_dim: usize,
    ) -> Result<Self, Error> {
        let cx = Self::build_unchecked(group, rule, fiber_cutoff, max_total_dim)?;
        cx.verify_d_squared()?;
        Ok(cx)
    }

    /// Builds the boundary matrices without the closure gate. Needed to
    /// reproduce systems derived from printed formulas that do not close up;
    /// anything feeding the certificate goes through [`Self::build`].
    pub fn build_unchecked(
        group: &QuaternionGroup,
        rule: BoundaryRule,
        fiber_cutoff: usize,
        max_total_dim: usize,
    ) -> Result<Self, Error> {
        let cells = BarCells::new(group);
        let layouts: Vec<Layout> =
            (0..=max_total_dim).map(|d| layout_for(&cells, fiber_cutoff, d)).collect();
        let mut boundaries = Vec::with_capacity(max_total_dim + 1);
        boundaries.push(SparseBitMatrix::from_sorted_columns(0, vec![Vec::new(); layouts[0].total]));
        for d in 1..=max_total_dim {
            let layout = &layouts[d];
            let below = &layouts[d - 1];
            let mut columns: Vec<Vec<u32>> = Vec::with_capacity(layout.total);
            for s in 0..BASE_COUNT {
                if !layout.present[s] {
                    continue;
                }
                let fiber_dim = d - BASE_DIMS[s];
                let n = cells.cell_count(fiber_dim);
                let mut block =
                    map_indices(n, |f| boundary_of_cell(&cells, &rule, below, s, fiber_dim, f));
                columns.append(&mut block);
            }
            boundaries.push(SparseBitMatrix::from_sorted_columns(below.total, columns));
        }
        Ok(TwistedComplex { cells, rule, fiber_cutoff, max_total_dim, layouts, boundaries })
    }

    fn verify_d_squared(&self) -> Result<(), Error> {
        for d in 2..=self.max_total_dim {
            let dk = &self.boundaries[d];
            let dk1 = &self.boundaries[d - 1];
            let bad = map_indices(dk.cols(), |j| {
                let img = dk1.mul_support(dk.column(j));
                if img.is_empty() {
                    None
                } else {
                    Some(j)
                }
            });
            if let Some(j) = bad.iter().flatten().next() {
                return Err(Error::ConstructionRejected(format!(
                    "d.d != 0 at dimension {d}, cell {}",
                    self.label(d, *j)
                )));
            }
        }
        Ok(())
    }

    pub fn rule(&self) -> &BoundaryRule {
        &self.rule
    }

    pub fn fiber_cutoff(&self) -> usize {
        self.fiber_cutoff
    }

    pub fn max_total_dim(&self) -> usize {
        self.max_total_dim
    }

    pub fn cell_count(&self, d: usize) -> usize {
        if d <= self.max_total_dim {
            self.layouts[d].total
        } else {
            0
        }
    }

    pub fn boundary(&self, d: usize) -> &SparseBitMatrix {
        &self.boundaries[d]
    }

    /// Global index of `[base s | fiber cell]` in total dimension
    /// `BASE_DIMS[s] + fiber_dim`.
    pub fn index_of(&self, s: usize, fiber_dim: usize, fiber_idx: usize) -> usize {
        let d = BASE_DIMS[s] + fiber_dim;
        debug_assert!(self.layouts[d].present[s]);
        self.layouts[d].offsets[s] + fiber_idx
    }

    pub fn decode(&self, d: usize, idx: usize) -> (usize, usize) {
        decode_in_layout(&self.layouts[d], idx)
    }

    pub fn label(&self, d: usize, idx: usize) -> String {
        let (s, f) = self.decode(d, idx);
        let fiber_dim = d - BASE_DIMS[s];
        let letters: Vec<String> = self
            .cells
            .decode(fiber_dim, f)
            .iter()
            .map(|&dg| self.cells.letter_element(dg).to_string())
            .collect();
        format!("[{}|{}]", BASE_LABELS[s], letters.join(","))
    }

    pub fn bar_cells(&self) -> &BarCells {
        &self.cells
    }

    /// The degree-6 target cochain: value `x[h1] x[h2] y[h3]` on cells
    /// `[e3|{h1|h2|h3}]`, zero elsewhere. Returned as a sorted support list.
    pub fn target_cocycle(&self) -> Result<Vec<u32>, Error> {
        if self.max_total_dim < 6 || !self.layouts[6].present[E3] {
            return Err(Error::InvalidParameter(
                "target cochain needs the complex built through dimension 6".into(),
            ));
        }
        let mut support = Vec::new();
        let letters = self.cells.letters();
        for f in 0..self.cells.cell_count(3) {
            let digits = self.cells.decode(3, f);
            let val = |d: u8| self.cells.letter_element(d);
            let x_par = |g: Element| g.x_exp % 2 == 1;
            let y_par = |g: Element| g.y_exp % 2 == 1;
            if x_par(val(digits[0])) && x_par(val(digits[1])) && y_par(val(digits[2])) {
                support.push(self.index_of(E3, 3, f) as u32);
            }
        }
        let _ = letters;
        support.sort_unstable();
        Ok(support)
    }

    /// Checks that `w` (a support list in dimension `d`) is a cocycle by
    /// evaluating it on every (d+1)-cell boundary.
    pub fn is_cocycle(&self, d: usize, support: &[u32]) -> Result<bool, Error> {
        if d + 1 > self.max_total_dim {
            return Err(Error::InvalidParameter(format!(
                "cocycle check in degree {d} needs dimension {} built",
                d + 1
            )));
        }
        let indicator =
            BitVec::from_indices(self.cell_count(d), support.iter().map(|&i| i as usize));
        let dk1 = &self.boundaries[d + 1];
        let ok = map_indices(dk1.cols(), |j| {
            let mut parity = false;
            for &face in dk1.column(j) {
                if indicator.get(face as usize) {
                    parity = !parity;
                }
            }
            !parity
        });
        Ok(ok.iter().all(|&b| b))
    }

    /// Builds the augmented system `delta u = rhs` with unknowns the
    /// `d`-cells and one equation per (d+1)-cell.
    fn coboundary_system(&self, d: usize, rhs: &[u32]) -> BitMatrix {
        let unknowns = self.cell_count(d);
        let equations = self.cell_count(d + 1);
        let rhs_set = BitVec::from_indices(equations, rhs.iter().map(|&i| i as usize));
        let mut m = BitMatrix::zeros(equations, unknowns + 1);
        let dk1 = &self.boundaries[d + 1];
        for t in 0..equations {
            for &face in dk1.column(t) {
                m.set(t, face as usize, true);
            }
            if rhs_set.get(t) {
                m.set(t, unknowns, true);
            }
        }
        m
    }

    /// Solves `delta u = w` for `u` in degree `d` (the main solve uses
    /// `d = 5`). The witness is re-verified by direct evaluation on every
    /// (d+1)-cell against the sparse boundary data.
    pub fn solve_coboundary(&self, d: usize, w: &[u32]) -> Result<CoboundarySolve, Error> {
        let mut system = self.coboundary_system(d, w);
        let unknowns = self.cell_count(d);
        let outcome = system.solve_augmented_in_place(unknowns);
        drop(system);
        match outcome.status {
            SolveStatus::Inconsistent => Ok(CoboundarySolve {
                rank: outcome.rank,
                witness: None,
                verified: false,
            }),
            SolveStatus::Solvable => {
                let u = outcome.solution.expect("solvable outcome has a solution");
                let w_set = BitVec::from_indices(
                    self.cell_count(d + 1),
                    w.iter().map(|&i| i as usize),
                );
                let dk1 = &self.boundaries[d + 1];
                let ok = map_indices(dk1.cols(), |t| {
                    let mut parity = false;
                    for &face in dk1.column(t) {
                        if u.get(face as usize) {
                            parity = !parity;
                        }
                    }
                    parity == w_set.get(t)
                });
                if !ok.iter().all(|&b| b) {
                    return Err(Error::Internal(
                        "coboundary witness failed independent re-verification".into(),
                    ));
                }
                Ok(CoboundarySolve { rank: outcome.rank, witness: Some(u), verified: true })
            }
        }
    }

    /// Certifies that `delta u = w` has no solution in degree `d` by
    /// producing `z` with `z . delta(e_c) = 0` for every unknown `c` and
    /// `z . w = 1`; both properties are re-verified against the sparse data.
    pub fn refute_coboundary(&self, d: usize, w: &[u32]) -> Result<Option<BitVec>, Error> {
        let equations = self.cell_count(d + 1);
        let unknowns = self.cell_count(d);
        // Solve M z = e where M stacks delta^T (one row per unknown) over w.
        let dk1 = &self.boundaries[d + 1];
        let mut m = BitMatrix::zeros(unknowns + 1, equations + 1);
        for t in 0..equations {
            for &face in dk1.column(t) {
                m.set(face as usize, t, true);
            }
        }
        for &t in w {
            m.set(unknowns, t as usize, true);
        }
        m.set(unknowns, equations, true);
        let outcome = m.solve_augmented_in_place(equations);
        drop(m);
        match outcome.status {
            SolveStatus::Inconsistent => Ok(None),
            SolveStatus::Solvable => {
                let z = outcome.solution.expect("solvable outcome has a solution");
                // Re-verify: z kills every boundary column and pairs oddly
                // with w.
                let support: Vec<u32> = z.iter_ones().map(|i| i as u32).collect();
                let acc = dk1_transpose_apply(dk1, &support);
                if !acc.is_empty() {
                    return Err(Error::Internal("refutation witness does not kill the image".into()));
                }
                let w_set: std::collections::HashSet<u32> = w.iter().copied().collect();
                let pairing = support.iter().filter(|t| w_set.contains(t)).count();
                if pairing % 2 != 1 {
                    return Err(Error::Internal("refutation witness pairs evenly with w".into()));
                }
                Ok(Some(z))
            }
        }
    }

    /// The augmented system of the appendix algorithm: one equation per
    /// 4-cell, unknowns exactly the 3-cells appearing in some 4-cell
    /// boundary, right-hand side `x[h]` on `[e3|{h}]`.
    pub fn equation_a_system(&self) -> Result<EquationASystem, Error> {
        if self.max_total_dim < 4 {
            return Err(Error::InvalidParameter("equation (A) needs dimension 4 built".into()));
        }
        let d4 = &self.boundaries[4];
        let mut in_boundary = vec![false; self.cell_count(3)];
        for j in 0..d4.cols() {
            for &f in d4.column(j) {
                in_boundary[f as usize] = true;
            }
        }
        let variables: Vec<u32> =
            (0..self.cell_count(3) as u32).filter(|&c| in_boundary[c as usize]).collect();
        let var_index: std::collections::HashMap<u32, usize> =
            variables.iter().enumerate().map(|(i, &c)| (c, i)).collect();

        // RHS: 4-cells [e3|{h}] with odd x-exponent letter h.
        let mut rhs_cells = Vec::new();
        for letter in 0..self.cells.letters() {
            let g = self.cells.letter_element(letter as u8);
            if g.x_exp % 2 == 1 {
                rhs_cells.push(self.index_of(E3, 1, letter) as u32);
            }
        }
        let rhs_set: std::collections::HashSet<u32> = rhs_cells.iter().copied().collect();

        let n_vars = variables.len();
        let mut matrix = BitMatrix::zeros(d4.cols(), n_vars + 1);
        for t in 0..d4.cols() {
            for &f in d4.column(t) {
                matrix.set(t, var_index[&f], true);
            }
            if rhs_set.contains(&(t as u32)) {
                // Column indices of d4 run over all 4-cells in layout order,
                // so the equation index is the cell index itself.
                matrix.set(t, n_vars, true);
            }
        }
        Ok(EquationASystem { matrix, variables, rhs_support: rhs_cells })
    }
}

fn dk1_transpose_apply(dk1: &SparseBitMatrix, z_support: &[u32]) -> Vec<u32> {
    // XOR of boundary supports over the selected (d+1)-cells.
    let mut acc: Vec<u32> = Vec::new();
    for &t in z_support {
        acc.extend_from_slice(dk1.column(t as usize));
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

/// Result of the main coboundary solve.
pub struct CoboundarySolve {
    pub rank: usize,
    pub witness: Option<BitVec>,
    pub verified: bool,
}

/// The appendix augmented system.
pub struct EquationASystem {
    pub matrix: BitMatrix,
    /// Global 3-cell indices of the variables, in column order.
    pub variables: Vec<u32>,
    /// Global 4-cell indices carrying right-hand side 1.
    pub rhs_support: Vec<u32>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TwistedCellCounts {
    pub c3: usize,
    pub c4: usize,
    pub c5: usize,
    pub c6: usize,
    pub c7: usize,
}

impl TwistedComplex {
    pub fn counts(&self) -> TwistedCellCounts {
        TwistedCellCounts {
            c3: self.cell_count(3),
            c4: self.cell_count(4),
            c5: self.cell_count(5),
            c6: self.cell_count(6),
            c7: self.cell_count(7),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q8() -> QuaternionGroup {
        QuaternionGroup::new(2).unwrap()
    }

    // Gate dimension 5 is the first that discriminates the variant space:
    // cells [e3|{g}] pass any assignment because the conjugation orbits of
    // single letters pair up mod 2; two-letter fibers do not.
    fn accepted_rule(g: &QuaternionGroup) -> BoundaryRule {
        resolve_boundary_rule(g, 3, 5).unwrap().accepted
    }

    #[test]
    fn verbatim_rule_fails_the_even_multiplicity_gate() {
        let g = q8();
        let verbatim = BoundaryRule::verbatim(&g);
        assert!(!verbatim.base_projection_is_even(&g));
    }

    #[test]
    fn resolver_accepts_a_one_summand_repair() {
        let g = q8();
        let res = resolve_boundary_rule(&g, 3, 5).unwrap();
        assert!(!res.verbatim_passed);
        // Exactly one edit, and only on the top-cell line.
        let accepted = &res.accepted;
        let verbatim = BoundaryRule::verbatim(&g);
        for s in 0..BASE_COUNT {
            if s != E3 {
                assert_eq!(accepted.terms[s], verbatim.terms[s], "line {}", BASE_LABELS[s]);
            }
        }
        let diffs: Vec<_> = accepted.terms[E3]
            .iter()
            .zip(&verbatim.terms[E3])
            .filter(|(a, b)| a != b)
            .collect();
        assert_eq!(diffs.len(), 1, "one-summand repair expected: {}", accepted.description);
        // The repair moves the conj-by-xy translate from e2_1 to e2_2.
        let xy = g.mul(g.x(), g.y());
        assert!(accepted.terms[E3].contains(&(E2_2, xy)));
    }

    #[test]
    fn accepted_rule_passes_d_squared_through_dim_7_at_cutoff_5() {
        let g = q8();
        let rule = accepted_rule(&g);
        assert!(d_squared_holds(&g, &rule, 5, 7));
    }

    #[test]
    fn cell_counts_at_cutoff_5() {
        let g = q8();
        let cx = TwistedComplex::build(&g, accepted_rule(&g), 5, 7).unwrap();
        let counts = cx.counts();
        assert_eq!(counts.c3, 456);
        assert_eq!(counts.c4, 3192);
        assert_eq!(counts.c5, 22344);
        assert_eq!(counts.c6, 38759);
        assert_eq!(counts.c7, 36015);
    }

    #[test]
    fn boundary_of_e1_cell_with_central_fiber_vanishes() {
        let g = q8();
        let cx = TwistedComplex::build(&g, accepted_rule(&g), 3, 5).unwrap();
        // [e1_1|{x^2}]: the two translate terms coincide (x^2 is central) and
        // the bar boundary of a 1-cell is zero mod 2.
        let x2_letter = (g.index_of_element(Element { x_exp: 2, y_exp: 0 }) - 1) as usize;
        let idx = cx.index_of(E1_1, 1, x2_letter) - cx.layouts[2].offsets[E1_1];
        let col = cx.boundary(2).column(cx.layouts[2].offsets[E1_1] + idx);
        assert!(col.is_empty());
    }

    #[test]
    fn boundary_of_e1_cell_with_y_fiber_hits_two_base_cells() {
        let g = q8();
        let cx = TwistedComplex::build(&g, accepted_rule(&g), 3, 5).unwrap();
        let y_letter = (g.index_of_element(g.y()) - 1) as usize;
        let global = cx.index_of(E1_1, 1, y_letter);
        let col = cx.boundary(2).column(global);
        let labels: Vec<String> = col.iter().map(|&c| cx.label(1, c as usize)).collect();
        assert_eq!(labels, vec!["[e0|y]", "[e0|x^2*y]"]);
    }

    #[test]
    fn conjugation_is_a_chain_map_on_the_fiber() {
        let g = q8();
        let cells = BarCells::new(&g);
        for dim in 1..=3usize {
            let n = cells.cell_count(dim);
            // Deterministic stride keeps this quick while touching every
            // residue class.
            let step = (n / 97).max(1);
            for idx in (0..n).step_by(step) {
                for gi in 0..g.order() {
                    let by = g.element_of_index(gi);
                    let direct: Vec<u32> = cells
                        .faces_mod2(dim, cells.conj_tuple(dim, idx, by))
                        .into_iter()
                        .collect();
                    let mut mapped: Vec<u32> = cells
                        .faces_mod2(dim, idx)
                        .into_iter()
                        .map(|f| cells.conj_tuple(dim - 1, f as usize, by) as u32)
                        .collect();
                    mapped.sort_unstable();
                    assert_eq!(direct, mapped);
                }
            }
        }
    }

    #[test]
    fn target_cochain_has_support_64_and_value_1_on_xxy() {
        let g = q8();
        let cx = TwistedComplex::build(&g, accepted_rule(&g), 5, 7).unwrap();
        let w = cx.target_cocycle().unwrap();
        assert_eq!(w.len(), 64);
        let cells = cx.bar_cells();
        let xi = (g.index_of_element(g.x()) - 1) as u8;
        let yi = (g.index_of_element(g.y()) - 1) as u8;
        let f = cells.encode(&[xi, xi, yi]);
        let idx = cx.index_of(E3, 3, f) as u32;
        assert!(w.binary_search(&idx).is_ok());
        // All support cells sit on the e3 block.
        for &c in &w {
            let (s, _) = cx.decode(6, c as usize);
            assert_eq!(s, E3);
        }
    }

    #[test]
    fn target_cochain_is_a_cocycle_at_cutoff_3_truncation() {
        // Small smoke: at fiber cut-off 4 the complex holds dims 6 and 7 with
        // far fewer cells, and w must still be a cocycle.
        let g = q8();
        let cx = TwistedComplex::build(&g, accepted_rule(&g), 4, 7).unwrap();
        let w = cx.target_cocycle().unwrap();
        assert!(cx.is_cocycle(6, &w).unwrap());
    }

    #[test]
    fn equation_a_shape_and_rhs() {
        let g = q8();
        let cx = TwistedComplex::build(&g, accepted_rule(&g), 5, 7).unwrap();
        let sys = cx.equation_a_system().unwrap();
        assert_eq!(sys.matrix.rows(), 3192);
        assert!(sys.variables.len() <= 456);
        assert_eq!(sys.rhs_support.len(), 4);
    }

    #[test]
    fn refutation_returns_none_on_solvable_toy_systems() {
        // delta u = 0 is always solvable, so no refutation witness exists.
        let g = q8();
        let cx = TwistedComplex::build(&g, accepted_rule(&g), 3, 5).unwrap();
        let refuted = cx.refute_coboundary(3, &[]).unwrap();
        assert!(refuted.is_none());
    }
}
