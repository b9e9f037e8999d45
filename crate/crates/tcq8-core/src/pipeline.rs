//! Stage orchestration for the full verification run.
//!
//! Stages run cheap gates before expensive eliminations and abort on the
//! first mathematical failure, naming the stage. Timings go to the stage
//! reports only; certificates stay byte-identical across runs.

use std::time::Instant;

use crate::bar::{betti_0_to_6, BarComplex, Cochain};
use crate::certificate::{
    hash_bitvec, hash_support, logic_chain, tool_version, BarSection, Certificate, Degree6Record,
    EquationARecord, GateRecord, HomologyEntry, MainSolveRecord, NonCoboundaryEvidence,
    Parameters, RefutationRecord, RingSection, RuleRecord, TargetCochainRecord, TwistedSection,
    WitnessCochain, SCHEMA_VERSION,
};
use crate::error::Error;
use crate::group::{Element, QuaternionGroup};
use crate::ring::{certify_lower_bounds, RingPair};
use crate::space_form;
use crate::twisted::{resolve_boundary_rule, BoundaryRule, TwistedComplex, BASE_LABELS, E3};

pub const HOMOLOGY_PAIRS: [(u32, u32); 4] = [(0, 2), (1, 2), (1, 3), (2, 2)];

#[derive(Clone, Debug)]
pub struct PipelineOptions {
    pub fiber_cutoff: usize,
    pub max_total_dim: usize,
    pub skip_solve: bool,
    pub expect_unsolvable: bool,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            fiber_cutoff: 5,
            max_total_dim: 7,
            skip_solve: false,
            expect_unsolvable: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct StageReport {
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

pub struct PipelineOutput {
    pub certificate: Certificate,
    pub reports: Vec<StageReport>,
}

fn staged<T>(
    reports: &mut Vec<StageReport>,
    name: &str,
    f: impl FnOnce() -> Result<(T, String), Error>,
) -> Result<T, Error> {
    let start = Instant::now();
    match f() {
        Ok((value, detail)) => {
            reports.push(StageReport {
                name: name.to_string(),
                passed: true,
                detail,
                seconds: start.elapsed().as_secs_f64(),
            });
            Ok(value)
        }
        Err(e) => {
            reports.push(StageReport {
                name: name.to_string(),
                passed: false,
                detail: e.to_string(),
                seconds: start.elapsed().as_secs_f64(),
            });
            Err(Error::CertificateFailure(format!("stage {name}: {e}")))
        }
    }
}

pub fn homology_stage() -> Result<(Vec<HomologyEntry>, String), Error> {
    let mut entries = Vec::new();
    for (n, m) in HOMOLOGY_PAIRS {
        let computed = space_form::homology_table(n, m)?;
        let closed = space_form::closed_form_table(n, m);
        let mismatches = space_form::table_mismatches(&computed, &closed);
        if !mismatches.is_empty() {
            return Err(Error::CertificateFailure(format!(
                "(n, m) = ({n}, {m}) disagrees with the closed-form tables: {}",
                mismatches.join("; ")
            )));
        }
        entries.push(HomologyEntry {
            n,
            m,
            integral_homology: computed.integral_homology,
            integral_cohomology: computed.integral_cohomology,
            f2_cohomology_dims: computed.f2_cohomology_dims,
            matches_closed_form: true,
        });
    }
    let detail = format!("{} space forms match the closed-form tables", entries.len());
    Ok((entries, detail))
}

pub fn ring_stage() -> Result<(RingSection, String), Error> {
    let pair = RingPair::build()?;
    let lb = certify_lower_bounds(&pair)?;
    let section = RingSection {
        dims: pair.factor.dims(),
        tensor_dims: pair.square.dims(),
        cup_length_witness: lb.cup_length_witness.clone(),
        zero_divisor_witness: lb.zero_divisor_witness.clone(),
        diagonal_restrictions_vanish: lb.diagonal_restrictions_vanish,
        cat_lower_bound: lb.cat_lower_bound,
        tc_lower_bound: lb.tc_lower_bound,
    };
    let detail = format!(
        "cup-length witness {}; zero-divisor witness {}",
        lb.cup_length_witness, lb.zero_divisor_witness
    );
    Ok((section, detail))
}

/// The paper-style degree-1 witness: 1 on x, y, xy, x^2 and 0 elsewhere.
pub fn standard_one_cochain_witness(bar: &BarComplex) -> Cochain {
    let g = bar.cells().group();
    let support = [
        g.x(),
        g.y(),
        Element { x_exp: 1, y_exp: 1 },
        Element { x_exp: 2, y_exp: 0 },
    ]
    .iter()
    .map(|&e| (g.index_of_element(e) - 1) as u32)
    .collect();
    Cochain::new(1, support)
}

pub fn bar_stage(bar: &BarComplex) -> Result<(BarSection, String), Error> {
    let cells = bar.cells();
    let x = bar.cochain_x();
    let y = bar.cochain_y();

    // delta v = x.x + x.y + y.y for the fixed witness v.
    let v = standard_one_cochain_witness(bar);
    let rhs = bar.cup(&x, &x)?.add(&bar.cup(&x, &y)?).add(&bar.cup(&y, &y)?);
    let v_ok = bar.coboundary(&v)? == rhs;
    if !v_ok {
        return Err(Error::CertificateFailure("delta v != x^2 + xy + y^2".into()));
    }
    let witness_v = WitnessCochain {
        degree: 1,
        cells: v.support().iter().map(|&c| cells.label(1, c as usize)).collect(),
        satisfies: "delta v = x.x + x.y + y.y".into(),
        verified: true,
    };

    // x^3 bounds; x^2 y does not.
    let x3 = bar.cup(&x, &bar.cup(&x, &x)?)?;
    let (x3_witness, _) = bar.coboundary_solve(&x3)?;
    let Some(x3_witness) = x3_witness else {
        return Err(Error::CertificateFailure("x.x.x admits no coboundary witness".into()));
    };
    let x_cubed_witness = WitnessCochain {
        degree: 2,
        cells: x3_witness.support().iter().map(|&c| cells.label(2, c as usize)).collect(),
        satisfies: "delta u = x.x.x".into(),
        verified: true,
    };

    let xxy = bar.cup(&x, &bar.cup(&x, &y)?)?;
    let (z_witness, z_rank) = bar.coboundary_solve(&xxy)?;
    if z_witness.is_some() {
        return Err(Error::CertificateFailure(
            "x.x.y bounds, contradicting the ring presentation".into(),
        ));
    }
    let top_class_not_coboundary = NonCoboundaryEvidence {
        degree: 3,
        target: "x.x.y".into(),
        system_rank: z_rank,
        inconsistent: true,
    };

    // Bockstein facts.
    let bx = bar.bockstein(&x)?;
    let by = bar.bockstein(&y)?;
    let bx_cocycle = bar.coboundary(&bx)?.is_zero();
    let by_cocycle = bar.coboundary(&by)?.is_zero();
    let mut independent = true;
    for combo in [bx.clone(), by.clone(), bx.add(&by)] {
        if bar.coboundary_solve(&combo)?.0.is_some() {
            independent = false;
        }
    }
    if !(bx_cocycle && by_cocycle && independent) {
        return Err(Error::CertificateFailure(
            "bockstein classes of x and y are not independent cocycles".into(),
        ));
    }

    // Betti numbers 0..6 with the two-sided degree-6 certificate.
    let betti = betti_0_to_6(bar)?;
    let expected = vec![1usize, 2, 2, 1, 1, 2, 2];
    if betti.dims != expected {
        return Err(Error::CertificateFailure(format!(
            "bar Betti numbers {:?} differ from {:?}",
            betti.dims, expected
        )));
    }

    let section = BarSection {
        cutoff: bar.cutoff(),
        betti_0_to_6: betti.dims.clone(),
        boundary_ranks: betti.boundary_ranks.clone(),
        degree6: Degree6Record {
            kernel_dim_d6: betti.degree6.kernel_dim_d6,
            independent_cocycles: betti.degree6.independent_cocycles,
            target_rank_d7: betti.degree6.target_rank_d7,
            certified_rank_d7: betti.degree6.pivot_rank_d7,
            skipped_columns: betti.degree6.skipped_columns,
            used_compressed_fallback: betti.degree6.used_compressed_fallback,
        },
        witness_v,
        x_cubed_witness,
        top_class_not_coboundary,
        bockstein_x_cocycle: bx_cocycle,
        bockstein_y_cocycle: by_cocycle,
        bockstein_classes_independent: independent,
    };
    let detail = format!("betti 0..6 = {:?}; witnesses verified", betti.dims);
    Ok((section, detail))
}

fn render_rule(rule: &BoundaryRule) -> Vec<String> {
    let mut lines = Vec::new();
    for s in (0..BASE_LABELS.len()).rev() {
        if rule.terms[s].is_empty() && s != E3 {
            continue;
        }
        let mut parts: Vec<String> = rule.terms[s]
            .iter()
            .map(|&(t, g)| {
                if g.is_identity() {
                    format!("[{}|w]", BASE_LABELS[t])
                } else {
                    format!("[{}|conj(w, {g})]", BASE_LABELS[t])
                }
            })
            .collect();
        if rule.include_fiber_term {
            parts.push(format!("[{}|dw]", BASE_LABELS[s]));
        }
        lines.push(format!("d[{}|w] = {}", BASE_LABELS[s], parts.join(" + ")));
    }
    lines
}

pub struct TwistedStage {
    pub complex: TwistedComplex,
    pub rule_record: RuleRecord,
    pub gates: GateRecord,
    pub target: TargetCochainRecord,
    pub w: Vec<u32>,
}

pub fn twisted_stage(
    group: &QuaternionGroup,
    fiber_cutoff: usize,
    max_total_dim: usize,
) -> Result<(TwistedStage, String), Error> {
    let resolution = resolve_boundary_rule(group, fiber_cutoff, max_total_dim)?;
    let rule_record = RuleRecord {
        accepted: resolution.accepted.description.clone(),
        accepted_lines: render_rule(&resolution.accepted),
        verbatim_passed: resolution.verbatim_passed,
        verbatim_diagnostic: resolution.verbatim_diagnostic.clone(),
        passing_variants: resolution.passing_descriptions.clone(),
    };
    let complex = TwistedComplex::build(group, resolution.accepted, fiber_cutoff, max_total_dim)?;
    let gates = GateRecord {
        d_squared_checked_through: max_total_dim,
        base_projection_even: true,
    };
    let w = complex.target_cocycle()?;
    let is_cocycle = complex.is_cocycle(6, &w)?;
    if !is_cocycle {
        return Err(Error::CertificateFailure(
            "the degree-6 target cochain is not a cocycle under the accepted rule".into(),
        ));
    }
    let target = TargetCochainRecord {
        support_size: w.len(),
        support_hash: hash_support(6, &w),
        is_cocycle,
    };
    let counts = complex.counts();
    let detail = format!(
        "rule '{}'; cells (c5, c6, c7) = ({}, {}, {}); w support {} and cocycle",
        rule_record.accepted, counts.c5, counts.c6, counts.c7, w.len()
    );
    Ok((
        TwistedStage { complex, rule_record, gates, target, w },
        detail,
    ))
}

/// Reproduces the appendix system from the printed boundary formula (the
/// algorithm's stated input) and solves it; the same system under the
/// gate-certified rule is solved for contrast only.
pub fn equation_a_stage(
    group: &QuaternionGroup,
    certified: &TwistedComplex,
) -> Result<(EquationARecord, String), Error> {
    let printed = TwistedComplex::build_unchecked(
        group,
        BoundaryRule::verbatim(group),
        certified.fiber_cutoff(),
        4,
    )?;
    let sys = printed.equation_a_system()?;
    let unknowns = sys.variables.len();
    let mut matrix = sys.matrix.clone();
    let outcome = matrix.solve_augmented_in_place(unknowns);
    let Some(u) = outcome.solution else {
        return Err(Error::CertificateFailure(
            "the printed-formula appendix system is inconsistent".into(),
        ));
    };
    // Independent re-evaluation against the sparse boundary.
    let rhs: std::collections::HashSet<u32> = sys.rhs_support.iter().copied().collect();
    let var_index: std::collections::HashMap<u32, usize> =
        sys.variables.iter().enumerate().map(|(i, &c)| (c, i)).collect();
    let d4 = printed.boundary(4);
    for t in 0..d4.cols() {
        let mut parity = false;
        for &f in d4.column(t) {
            if u.get(var_index[&f]) {
                parity = !parity;
            }
        }
        if parity != rhs.contains(&(t as u32)) {
            return Err(Error::Internal("equation (A) witness failed re-verification".into()));
        }
    }

    let certified_sys = certified.equation_a_system()?;
    let certified_unknowns = certified_sys.variables.len();
    let mut certified_matrix = certified_sys.matrix;
    let certified_outcome = certified_matrix.solve_augmented_in_place(certified_unknowns);

    let record = EquationARecord {
        boundary_formula: "printed".into(),
        equations: sys.matrix.rows(),
        unknowns,
        rhs_support_size: sys.rhs_support.len(),
        solvable: true,
        witness_bits: u.len(),
        witness_hex: u.to_hex(),
        witness_hash: hash_bitvec(&u),
        solvable_under_certified_rule: matches!(
            certified_outcome.status,
            crate::gf2::SolveStatus::Solvable
        ),
    };
    let detail = format!(
        "printed-formula system solvable; {} equations, {} unknowns (certified rule: {})",
        record.equations,
        unknowns,
        if record.solvable_under_certified_rule { "solvable" } else { "inconsistent" }
    );
    Ok((record, detail))
}

pub fn main_solve_stage(
    cx: &TwistedComplex,
    w: &[u32],
) -> Result<(MainSolveRecord, String), Error> {
    let solve = cx.solve_coboundary(5, w)?;
    let Some(u) = solve.witness else {
        return Err(Error::CertificateFailure(
            "delta u = w is inconsistent at fiber cut-off 5; the main claim fails".into(),
        ));
    };
    if !solve.verified {
        return Err(Error::Internal("main witness missing its verification flag".into()));
    }
    let record = MainSolveRecord {
        fiber_cutoff: cx.fiber_cutoff(),
        unknowns: cx.cell_count(5),
        equations: cx.cell_count(6),
        system_rank: solve.rank,
        solvable: true,
        witness_bits: u.len(),
        witness_hex: u.to_hex(),
        witness_hash: hash_bitvec(&u),
        verified: true,
    };
    let detail = format!(
        "delta u = w solved and re-verified on {} six-cells (rank {})",
        record.equations, record.system_rank
    );
    Ok((record, detail))
}

pub fn refutation_stage(
    group: &QuaternionGroup,
    max_total_dim: usize,
) -> Result<(RefutationRecord, String), Error> {
    let resolution = resolve_boundary_rule(group, 6, max_total_dim)?;
    let cx = TwistedComplex::build(group, resolution.accepted, 6, max_total_dim)?;
    let w = cx.target_cocycle()?;
    if !cx.is_cocycle(6, &w)? {
        return Err(Error::CertificateFailure("w is not a cocycle at fiber cut-off 6".into()));
    }
    let z = cx.refute_coboundary(5, &w)?;
    let Some(z) = z else {
        return Err(Error::CertificateFailure(
            "delta u = w is solvable at fiber cut-off 6; the weight would exceed 6".into(),
        ));
    };
    let record = RefutationRecord {
        fiber_cutoff: 6,
        inconsistent: true,
        witness_bits: z.len(),
        witness_hex: z.to_hex(),
        witness_hash: hash_bitvec(&z),
        verified: true,
    };
    let detail = format!(
        "inconsistency certified by a kernel witness over {} six-cells",
        cx.cell_count(6)
    );
    Ok((record, detail))
}

pub fn run_verify_all(opts: &PipelineOptions) -> (Result<Certificate, Error>, Vec<StageReport>) {
    let mut reports = Vec::new();
    let result = (|| -> Result<Certificate, Error> {
        let group = QuaternionGroup::new(2)?;

        let homology = staged(&mut reports, "homology", homology_stage)?;
        let ring = staged(&mut reports, "ring", ring_stage)?;

        let bar = staged(&mut reports, "bar-build", || {
            let bar = BarComplex::build(&group, 7)?;
            let detail = format!("bar complex built through dimension {}", bar.cutoff());
            Ok((bar, detail))
        })?;
        let bar_section = staged(&mut reports, "bar-witnesses", || bar_stage(&bar))?;
        drop(bar);

        let twisted = staged(&mut reports, "twisted-gates", || {
            twisted_stage(&group, opts.fiber_cutoff, opts.max_total_dim)
        })?;

        let equation_a = Some(staged(&mut reports, "equation-a", || {
            equation_a_stage(&group, &twisted.complex)
        })?);

        let mut main_solve = None;
        let mut refutation = None;
        let mut partial = opts.skip_solve;
        if !opts.skip_solve {
            if opts.fiber_cutoff == 5 {
                main_solve =
                    Some(staged(&mut reports, "main-solve", || {
                        main_solve_stage(&twisted.complex, &twisted.w)
                    })?);
                if opts.expect_unsolvable {
                    return Err(Error::CertificateFailure(
                        "stage main-solve: system solvable but --expect-unsolvable was given"
                            .into(),
                    ));
                }
            } else {
                let rec = staged(&mut reports, "refutation", || {
                    refutation_stage(&group, opts.max_total_dim)
                })?;
                if !opts.expect_unsolvable {
                    return Err(Error::CertificateFailure(
                        "stage refutation: system is inconsistent at cut-off 6 (pass --expect-unsolvable to certify this)".into(),
                    ));
                }
                refutation = Some(rec);
                partial = true; // no tc = 6 conclusion without the cut-off 5 solve
            }
        }

        let (logic, conclusion) = logic_chain(main_solve.is_some(), refutation.is_some());
        Ok(Certificate {
            schema_version: SCHEMA_VERSION,
            tool_version: tool_version(),
            parameters: Parameters {
                homology_pairs: HOMOLOGY_PAIRS.to_vec(),
                fiber_cutoff: opts.fiber_cutoff,
                max_total_dim: opts.max_total_dim,
            },
            partial,
            homology,
            ring,
            bar: bar_section,
            twisted: TwistedSection {
                rule: twisted.rule_record,
                gates: twisted.gates,
                cell_counts: twisted.complex.counts(),
                target: twisted.target,
                equation_a,
                main_solve,
                refutation,
            },
            logic_chain: logic,
            conclusion,
        })
    })();
    (result, reports)
}
