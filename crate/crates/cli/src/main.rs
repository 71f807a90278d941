use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use biquad::forms::{witness_quadruple, FormsError};
use biquad::quad::quad_data;
use biquad::{
    decompositions, escalate_quadruple, fields_up_to, is_indecomposable, pell_solvable, sqrt_in_ring, square_parts,
    unit_report, AlgebraicNumber, FieldSpec, UnitCase, Verdict,
};
use biquad_cli::config::{resolve_workers, FieldSelection, Format, RunConfig};
use biquad_cli::report::field_record;
use biquad_cli::{sweep, verify};
use clap::{Parser, Subcommand};
use serde_json::json;

const DEFAULT_BUDGET: u64 = 1 << 36;

#[derive(Parser)]
#[command(name = "biquad", version, about = "Indecomposables, squares and escalations in real biquadratic fields")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Basis, distinguished elements, units, quadruple and verdict for one field.
    FieldReport {
        field: String,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Include wall-clock time in the record.
        #[arg(long)]
        timing: bool,
    },
    /// Continued fraction and unit data of Q(sqrt n), as JSON.
    Quad { n: u64 },
    /// Unit report for one field, or a CSV table over a range of fields.
    Units {
        field: Option<String>,
        #[arg(long)]
        max_t: Option<u64>,
        #[arg(long, default_value_t = 0)]
        min_t: u64,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Decompositions alpha = beta + gamma into totally positive integers.
    Decompose {
        field: String,
        element: String,
        /// Also list 0 + alpha.
        #[arg(long)]
        with_zero: bool,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
    },
    /// Whether the element is not a sum of two totally positive integers.
    Indecomposable {
        field: String,
        element: String,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
    },
    /// Square roots of the element in the ring of integers.
    IsSquare { field: String, element: String },
    /// Squares w^2 with alpha - w^2 totally nonnegative.
    SquareParts {
        field: String,
        element: String,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
    },
    /// Looks for a singular Gram matrix with the given diagonal.
    Escalate {
        field: String,
        /// Four diagonal entries separated by ';'.
        #[arg(long)]
        diag: String,
        /// Also write the full run as JSON here.
        #[arg(long)]
        json: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
    },
    /// The quadruple chosen for a field, and which branch chose it.
    Witness {
        field: String,
        /// Run the escalation when the branch relies on it.
        #[arg(long)]
        escalate: bool,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
    },
    /// Escalates all seven listed quadruples.
    VerifyTable1 {
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Recomputes a lemma's lists and diffs them against the embedded ones.
    VerifyLemma {
        /// One of trivdecomp-2, trivdecomp-3, trivdecomp-5, 10and8, 2coeff, 5coeff,
        /// table1, appendixA, nonsquareM, nonsquareS.
        lemma: String,
        #[arg(long)]
        s: Option<u64>,
        /// Restrict to these fields, e.g. --field 2,3 --field 5,13.
        #[arg(long)]
        field: Vec<String>,
        #[arg(long, default_value_t = 300)]
        max_t: u64,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Field reports over a range, checkpointed to a JSON-lines file.
    Sweep {
        #[arg(long)]
        max_t: Option<u64>,
        #[arg(long, default_value_t = 0)]
        min_t: u64,
        /// Explicit fields instead of a range.
        #[arg(long)]
        field: Vec<String>,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        csv: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_BUDGET)]
        budget: u64,
        #[arg(long, default_value_t = 40)]
        max_trace: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Defaults to $BIQUAD_WORKERS, then to the number of cores.
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        timing: bool,
        /// Ignore an existing checkpoint.
        #[arg(long)]
        fresh: bool,
        #[arg(long)]
        quiet: bool,
    },
}

fn field(text: &str) -> Result<Arc<FieldSpec>> {
    FieldSpec::parse(text).with_context(|| format!("bad field {text:?}"))
}

fn element(f: &Arc<FieldSpec>, text: &str) -> Result<AlgebraicNumber> {
    AlgebraicNumber::parse(f, text).with_context(|| format!("bad element {text:?}"))
}

fn pretty(v: &[AlgebraicNumber]) -> Vec<String> {
    v.iter().map(|x| x.pretty()).collect()
}

fn print_json(v: &impl serde::Serialize) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn pair(text: &str) -> Result<(u64, u64)> {
    let f = field(text)?;
    Ok((f.m(), f.s()))
}

fn report_checks(checks: &[verify::Check], format: Format) -> Result<bool> {
    match format {
        Format::Json => print_json(&checks)?,
        Format::Text => print!("{}", verify::render_text(checks, 12)),
        Format::Csv => {
            let mut w = csv::Writer::from_writer(std::io::stdout());
            w.write_record(["lemma", "context", "relation", "ok", "expected", "computed"])?;
            for c in checks {
                w.write_record([
                    c.lemma.as_str(),
                    &c.context,
                    &c.relation.to_string(),
                    if c.ok { "true" } else { "false" },
                    &c.expected.join(" | "),
                    &c.computed.join(" | "),
                ])?;
            }
            w.flush()?;
        }
    }
    Ok(checks.iter().all(|c| c.ok))
}

fn run(cli: Cli) -> Result<bool> {
    match cli.cmd {
        Cmd::FieldReport { field: f, budget, format, timing } => {
            let f = field(&f)?;
            let rec = field_record(&f, budget, "", timing);
            match format {
                Format::Json => print_json(&rec)?,
                Format::Text => print!("{}", rec.render_text()),
                Format::Csv => {
                    let mut w = csv::Writer::from_writer(std::io::stdout());
                    w.write_record(biquad_cli::report::CSV_COLUMNS)?;
                    w.write_record(rec.csv_row())?;
                    w.flush()?;
                }
            }
            return Ok(rec.status == biquad_cli::report::Status::Certified);
        }
        Cmd::Quad { n } => {
            let d = quad_data(n)?;
            let pell: serde_json::Map<String, serde_json::Value> = [-1i64, 2, -2]
                .iter()
                .map(|&c| Ok((c.to_string(), json!(pell_solvable(n, c)?))))
                .collect::<Result<_>>()?;
            print_json(&json!({
                "n": n,
                "omega": d.omega,
                "u0": d.u0,
                "period": d.period,
                "fundamental_unit": d.fundamental_unit,
                "fu_norm": d.unit_norm,
                "pell": pell,
            }))?;
        }
        Cmd::Units { field: Some(f), .. } => {
            let f = field(&f)?;
            print_json(&unit_report(&f)?)?;
        }
        Cmd::Units { field: None, max_t, min_t, csv } => {
            let Some(max_t) = max_t else { bail!("give a field or --max-t") };
            let fields: Vec<_> = fields_up_to(max_t).into_iter().filter(|f| f.t() >= min_t).collect();
            let mut rows = Vec::new();
            for f in &fields {
                let r = unit_report(f)?;
                let two = match &r.case {
                    UnitCase::CaseII { two_eps_square, .. } => two_eps_square.to_string(),
                    _ => String::new(),
                };
                let tp: Vec<_> = r.classes.iter().filter(|c| c.totally_positive).map(|c| c.label.as_str()).collect();
                let sq: Vec<_> = r.classes.iter().filter(|c| c.square).map(|c| c.label.as_str()).collect();
                rows.push(vec![
                    "1".to_string(),
                    r.m.to_string(),
                    r.s.to_string(),
                    r.t.to_string(),
                    r.eps_norms[0].to_string(),
                    r.eps_norms[1].to_string(),
                    r.eps_norms[2].to_string(),
                    tp.join(" "),
                    sq.join(" "),
                    r.case.name().to_string(),
                    two,
                ]);
            }
            let header = [
                "csv_version", "m", "s", "t", "norm_m", "norm_s", "norm_t", "totally_positive", "squares", "case",
                "two_eps_square",
            ];
            let mut w: csv::Writer<Box<dyn std::io::Write>> = match csv {
                Some(p) => csv::Writer::from_writer(Box::new(std::fs::File::create(p)?)),
                None => csv::Writer::from_writer(Box::new(std::io::stdout())),
            };
            w.write_record(header)?;
            for r in rows {
                w.write_record(r)?;
            }
            w.flush()?;
        }
        Cmd::Decompose { field: f, element: e, with_zero, budget } => {
            let f = field(&f)?;
            let d = decompositions(&element(&f, &e)?, with_zero, budget)?;
            let pairs: Vec<[String; 2]> = d.pairs.iter().map(|(a, b)| [a.pretty(), b.pretty()]).collect();
            print_json(&pairs)?;
        }
        Cmd::Indecomposable { field: f, element: e, budget } => {
            let f = field(&f)?;
            let x = element(&f, &e)?;
            print_json(&json!({ "element": x.pretty(), "indecomposable": is_indecomposable(&x, budget)? }))?;
        }
        Cmd::IsSquare { field: f, element: e } => {
            let f = field(&f)?;
            let roots = match sqrt_in_ring(&element(&f, &e)?) {
                Some(w) if w.is_zero() => vec![w],
                Some(w) => {
                    let mut v = vec![-&w, w];
                    v.sort();
                    v
                }
                None => vec![],
            };
            print_json(&pretty(&roots))?;
        }
        Cmd::SquareParts { field: f, element: e, budget } => {
            let f = field(&f)?;
            print_json(&pretty(&square_parts(&element(&f, &e)?, budget)?))?;
        }
        Cmd::Escalate { field: f, diag, json: out, budget } => {
            let f = field(&f)?;
            let parts: Vec<AlgebraicNumber> =
                diag.split(';').map(|s| element(&f, s.trim())).collect::<Result<_>>()?;
            let Ok(d) = <[AlgebraicNumber; 4]>::try_from(parts) else { bail!("--diag needs exactly four entries") };
            let run = escalate_quadruple(&d, budget)?;
            let sizes: Vec<usize> = run.rho_sets.iter().map(|v| v.len()).collect();
            println!("verdict: {}", run.verdict.name());
            println!("candidates examined: {}", run.candidates_examined);
            println!("pair set sizes: {sizes:?}");
            if let Verdict::SingularWitness { matrix } = &run.verdict {
                for row in matrix.rows() {
                    println!("  [{}]", pretty(&row).join(", "));
                }
            }
            if let Some(p) = out {
                std::fs::write(&p, serde_json::to_string_pretty(&run)?)?;
            }
            return Ok(matches!(run.verdict, Verdict::NoSingularMatrix));
        }
        Cmd::Witness { field: f, escalate, budget } => {
            let f = field(&f)?;
            match witness_quadruple(&f) {
                Err(FormsError::NoRecipe(_)) => {
                    println!("inconclusive: no quadruple recipe covers {}", f.describe());
                    return Ok(false);
                }
                Err(e) => return Err(e.into()),
                Ok(w) => {
                    println!("branch: {:?}", w.branch);
                    println!("diagonal: {}", pretty(&w.diagonal).join("; "));
                    if let Some(u) = &w.units {
                        println!("unit case: {}", u.case.name());
                    }
                    if !w.branch.needs_escalation() {
                        println!("certified by units; no escalation needed");
                    } else if escalate {
                        let run = escalate_quadruple(&w.diagonal, budget)?;
                        match run.verdict {
                            Verdict::NoSingularMatrix => println!("verdict: NoSingularMatrix"),
                            ref v => {
                                println!("verdict: {} (inconclusive)", v.name());
                                return Ok(false);
                            }
                        }
                    }
                }
            }
        }
        Cmd::VerifyTable1 { budget, format } => {
            return report_checks(&verify::table(budget)?, format);
        }
        Cmd::VerifyLemma { lemma, s, field: fields, max_t, budget, format } => {
            let params = verify::Params {
                s,
                fields: fields.iter().map(|f| pair(f)).collect::<Result<_>>()?,
                max_t,
                budget,
            };
            return report_checks(&verify::run(&lemma, &params)?, format);
        }
        Cmd::Sweep { max_t, min_t, field: fields, out, csv, budget, max_trace, seed, workers, timing, fresh, quiet } => {
            let selection = if !fields.is_empty() {
                FieldSelection::List(fields.iter().map(|f| pair(f)).collect::<Result<_>>()?)
            } else if let Some(max_t) = max_t {
                FieldSelection::Range { min_t, max_t }
            } else {
                bail!("give --max-t or --field");
            };
            let cfg = RunConfig {
                fields: selection,
                budget,
                max_trace,
                workers: resolve_workers(workers),
                format: Format::Json,
                seed,
                output: Some(out.clone()),
            };
            let records = sweep::run_sweep(&cfg, &out, fresh, timing, |r| {
                if !quiet {
                    eprintln!("({},{}) {:?}", r.m, r.s, r.status);
                }
            })?;
            if let Some(p) = csv {
                sweep::write_csv(&p, &records)?;
            }
            let open = records.iter().filter(|r| r.status != biquad_cli::report::Status::Certified).count();
            eprintln!("{} fields, {} inconclusive, config {}", records.len(), open, cfg.hash());
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    // die quietly when piped into `head`
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
