//! `tcq8` — certifies TC(S^3/Q_8) = 6 by explicit chain-level computation.
//!
//! Exit codes: 0 all checks passed, 1 mathematical failure, 2 usage error.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use tcq8_core::certificate::{revalidate, Certificate};
use tcq8_core::error::Error;
use tcq8_core::group::QuaternionGroup;
use tcq8_core::pipeline::{self, PipelineOptions, StageReport};
use tcq8_core::twisted::{resolve_boundary_rule, BoundaryRule, TwistedComplex};
use tcq8_core::{ring, space_form};

#[derive(Parser)]
#[command(name = "tcq8", version, about = "Certified computation of TC(S^3/Q_8) = 6")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct TwistedParams {
    /// Fiber cut-off dimension (5 for the main solve, 6 for the refutation).
    #[arg(long = "fiber-dim", default_value_t = 5, value_parser = clap::value_parser!(usize))]
    fiber_dim: usize,
    /// Highest total dimension to build.
    #[arg(long = "max-total-dim", default_value_t = 7)]
    max_total_dim: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Run every stage and write the certificate.
    VerifyAll {
        #[command(flatten)]
        twisted: TwistedParams,
        /// Certificate output path.
        #[arg(long, default_value = "certificate.json")]
        out: PathBuf,
        /// Skip the heavy coboundary solve; the certificate is marked partial.
        #[arg(long)]
        skip_solve: bool,
        /// Require the solve to be inconsistent (used with --fiber-dim 6).
        #[arg(long)]
        expect_unsolvable: bool,
        /// Revalidate an existing certificate instead of recomputing.
        #[arg(long)]
        revalidate: Option<PathBuf>,
    },
    /// Print homology/cohomology tables of S^{4n+3}/H_m.
    Homology {
        #[arg(long, default_value_t = 0)]
        n: u32,
        #[arg(long, default_value_t = 2)]
        m: u32,
        /// Structured output instead of the text table.
        #[arg(long)]
        json: bool,
    },
    /// Verify the mod-2 ring relations by explicit bar-resolution witnesses.
    RingRelations,
    /// Verify the cup-length and zero-divisor lower bounds.
    LowerBound,
    /// Resolve the boundary rule, build the twisted complex and run its gates.
    Twisted {
        #[command(flatten)]
        twisted: TwistedParams,
    },
    /// Build and solve the appendix augmented system.
    SolveEqa {
        #[command(flatten)]
        twisted: TwistedParams,
    },
    /// Export a boundary matrix in coordinate text form.
    ExportMatrix {
        /// Which complex: space-form, bar, twisted or twisted-printed.
        #[arg(long)]
        target: String,
        /// Boundary dimension d (the matrix of d_d).
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 0)]
        n: u32,
        #[arg(long, default_value_t = 2)]
        m: u32,
        #[command(flatten)]
        twisted: TwistedParams,
        /// Output path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-check all witnesses in an existing certificate without solving.
    Revalidate {
        /// Certificate path.
        cert: PathBuf,
    },
}

fn main() {
    tcq8_core::init_workers_from_env();
    let cli = Cli::parse();
    std::process::exit(match dispatch(cli) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::InvalidParameter(_) | Error::Parse(_) => 2,
                _ => 1,
            }
        }
    });
}

fn print_reports(reports: &[StageReport]) {
    for r in reports {
        let mark = if r.passed { "ok  " } else { "FAIL" };
        println!("[{mark}] {:<14} {:>8.2}s  {}", r.name, r.seconds, r.detail);
    }
}

fn dispatch(cli: Cli) -> Result<bool, Error> {
    match cli.command {
        Command::VerifyAll { twisted, out, skip_solve, expect_unsolvable, revalidate: reval } => {
            if let Some(path) = reval {
                return run_revalidate(&path);
            }
            let opts = PipelineOptions {
                fiber_cutoff: twisted.fiber_dim,
                max_total_dim: twisted.max_total_dim,
                skip_solve,
                expect_unsolvable,
            };
            if !(opts.fiber_cutoff == 5 || opts.fiber_cutoff == 6) {
                return Err(Error::InvalidParameter("--fiber-dim must be 5 or 6".into()));
            }
            let (result, reports) = pipeline::run_verify_all(&opts);
            print_reports(&reports);
            match result {
                Ok(cert) => {
                    std::fs::write(&out, cert.to_json()?)?;
                    println!("certificate written to {}", out.display());
                    match cert.conclusion.tc {
                        Some(tc) => println!(
                            "conclusion: cat(X) = {}, TC(X) = {tc}",
                            cert.conclusion.cat.unwrap_or(0)
                        ),
                        None => println!(
                            "conclusion (partial): cat(X) = {}, {} <= TC(X) <= {}",
                            cert.conclusion.cat.unwrap_or(0),
                            cert.conclusion.tc_lower.unwrap_or(0),
                            cert.conclusion.tc_upper.unwrap_or(0)
                        ),
                    }
                    Ok(true)
                }
                Err(e) => {
                    eprintln!("{e}");
                    Ok(false)
                }
            }
        }
        Command::Homology { n, m, json } => {
            let table = space_form::homology_table(n, m)?;
            let closed = space_form::closed_form_table(n, m);
            let mismatches = space_form::table_mismatches(&table, &closed);
            if json {
                println!("{}", serde_json::to_string_pretty(&table)?);
            } else {
                print!("{}", table.render_text());
            }
            if mismatches.is_empty() {
                Ok(true)
            } else {
                for msg in mismatches {
                    eprintln!("closed-form mismatch: {msg}");
                }
                Ok(false)
            }
        }
        Command::RingRelations => {
            let group = QuaternionGroup::new(2)?;
            let bar = tcq8_core::bar::BarComplex::build(&group, 4)?;
            let (section, detail) = ring_relations_report(&bar)?;
            println!("{detail}");
            Ok(section)
        }
        Command::LowerBound => {
            let pair = ring::RingPair::build()?;
            let lb = ring::certify_lower_bounds(&pair)?;
            println!("cup-length witness: x * x * y = {}", lb.cup_length_witness);
            println!("zero-divisor product: xbar^3 * ybar^2 = {}", lb.zero_divisor_witness);
            println!(
                "diagonal restrictions vanish: {}",
                lb.diagonal_restrictions_vanish
            );
            println!("=> cat(X) >= {}, TC(X) >= {}", lb.cat_lower_bound, lb.tc_lower_bound);
            Ok(true)
        }
        Command::Twisted { twisted } => {
            if twisted.max_total_dim < 7 {
                return Err(Error::InvalidParameter(
                    "the twisted gates need --max-total-dim >= 7 (the cocycle check uses 7-cells)"
                        .into(),
                ));
            }
            let group = QuaternionGroup::new(2)?;
            let (stage, detail) =
                pipeline::twisted_stage(&group, twisted.fiber_dim, twisted.max_total_dim)?;
            println!("{detail}");
            println!("verbatim rule passed: {}", stage.rule_record.verbatim_passed);
            println!("diagnostic: {}", stage.rule_record.verbatim_diagnostic);
            for line in &stage.rule_record.accepted_lines {
                println!("  {line}");
            }
            Ok(true)
        }
        Command::SolveEqa { twisted } => {
            let group = QuaternionGroup::new(2)?;
            // The appendix system only needs dimensions up to 4, but the rule
            // gates still run through the discriminating dimension.
            let gate_dim = twisted.max_total_dim.max(5);
            let rule = resolve_boundary_rule(&group, twisted.fiber_dim, gate_dim)?.accepted;
            let certified = TwistedComplex::build(&group, rule, twisted.fiber_dim, 4)?;
            let (record, detail) = pipeline::equation_a_stage(&group, &certified)?;
            println!("{detail}");
            println!(
                "unknowns/equations: {}/{}; rhs ones: {}",
                record.unknowns, record.equations, record.rhs_support_size
            );
            Ok(record.solvable)
        }
        Command::ExportMatrix { target, dim, n, m, twisted, out } => {
            let text = export_matrix(&target, dim, n, m, &twisted)?;
            match out {
                Some(path) => {
                    std::fs::write(&path, text)?;
                    println!("matrix written to {}", path.display());
                }
                None => print!("{text}"),
            }
            Ok(true)
        }
        Command::Revalidate { cert } => run_revalidate(&cert),
    }
}

fn run_revalidate(path: &PathBuf) -> Result<bool, Error> {
    let text = std::fs::read_to_string(path)?;
    let cert = Certificate::from_json(&text)?;
    let checks = revalidate(&cert)?;
    let mut all = true;
    for (name, ok) in &checks {
        println!("[{}] {name}", if *ok { "ok  " } else { "FAIL" });
        all &= ok;
    }
    Ok(all)
}

fn ring_relations_report(bar: &tcq8_core::bar::BarComplex) -> Result<(bool, String), Error> {
    let x = bar.cochain_x();
    let y = bar.cochain_y();
    let v = pipeline::standard_one_cochain_witness(bar);
    let rhs = bar.cup(&x, &x)?.add(&bar.cup(&x, &y)?).add(&bar.cup(&y, &y)?);
    let v_ok = bar.coboundary(&v)? == rhs;
    let x3 = bar.cup(&x, &bar.cup(&x, &x)?)?;
    let (x3_witness, _) = bar.coboundary_solve(&x3)?;
    let xxy = bar.cup(&x, &bar.cup(&x, &y)?)?;
    let (z_witness, _) = bar.coboundary_solve(&xxy)?;
    let ok = v_ok && x3_witness.is_some() && z_witness.is_none();
    let detail = format!(
        "delta v = x.x + x.y + y.y: {}\nx.x.x bounds: {}\nx.x.y bounds: {} (must not)",
        v_ok,
        x3_witness.is_some(),
        z_witness.is_some()
    );
    Ok((ok, detail))
}

fn export_matrix(
    target: &str,
    dim: usize,
    n: u32,
    m: u32,
    twisted: &TwistedParams,
) -> Result<String, Error> {
    match target {
        "space-form" => {
            let cx = space_form::build_complex(n, m)?;
            if dim > cx.top_dimension() {
                return Err(Error::InvalidParameter(format!(
                    "dimension {dim} exceeds top dimension {}",
                    cx.top_dimension()
                )));
            }
            Ok(cx.boundary(dim).to_coordinate_text())
        }
        "bar" => {
            let group = QuaternionGroup::new(m)?;
            let bar = tcq8_core::bar::BarComplex::build(&group, dim)?;
            Ok(bar.complex().boundary(dim).to_coordinate_text())
        }
        "twisted" | "twisted-printed" => {
            let group = QuaternionGroup::new(2)?;
            let max_dim = twisted.max_total_dim.max(dim);
            let cx = if target == "twisted" {
                let rule = resolve_boundary_rule(&group, twisted.fiber_dim, max_dim)?.accepted;
                TwistedComplex::build(&group, rule, twisted.fiber_dim, max_dim)?
            } else {
                TwistedComplex::build_unchecked(
                    &group,
                    BoundaryRule::verbatim(&group),
                    twisted.fiber_dim,
                    max_dim,
                )?
            };
            if dim > cx.max_total_dim() {
                return Err(Error::InvalidParameter(format!("dimension {dim} not built")));
            }
            Ok(cx.boundary(dim).to_coordinate_text())
        }
        other => Err(Error::InvalidParameter(format!(
            "unknown target {other:?} (expected space-form, bar, twisted or twisted-printed)"
        ))),
    }
}
