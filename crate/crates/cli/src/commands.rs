use std::io::Write;
use std::ops::RangeInclusive;

use conflictfree::baselines::{random_order, simultaneous_renormalization, uniform_random};
use conflictfree::bench::{format_summary, records_to_csv, run_benchmark, summarize, Family, Method};
use conflictfree::io::matrix_to_csv;
use conflictfree::minloss::{convexity_check, kkt_verify, min_loss_value};
use conflictfree::multiplayer::{feasibility_verdict, solve_multi_min_loss};
use conflictfree::oracle::{solve_min_loss, OracleOptions};
use conflictfree::sample::sample_joint;
use conflictfree::{
    construct_zero_loss, loss, optimal_satisfaction_matrix, Branch, Error, JointSelectionMatrix, ProblemInstance,
};
use serde_json::{json, Value};

use crate::input::{parse_document, parse_players, read_source, require_instance};
use crate::{BaselineMethod, Failure, Format};

const ZERO_LOSS_TOL: f64 = 1e-12;
const ORACLE_GAP_TOL: f64 = 1e-6;

/// Writes to stdout; a closed pipe (e.g. `| head`) ends output quietly.
fn emit(text: &str) -> Result<(), Failure> {
    let mut out = std::io::stdout().lock();
    match out.write_all(text.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(Failure::io(format!("stdout: {e}"))),
        _ => Ok(()),
    }
}

fn print_json(v: &Value) -> Result<(), Failure> {
    emit(&(serde_json::to_string_pretty(v).expect("json value serializes") + "\n"))
}

/// Matrix rows preceded by `#` comment lines, which the CSV reader skips.
fn print_matrix_csv(comments: &[(&str, String)], m: &JointSelectionMatrix) -> Result<(), Failure> {
    let mut s = String::new();
    for (k, v) in comments {
        s.push_str(&format!("# {k}={v}\n"));
    }
    s.push_str(&matrix_to_csv(m));
    emit(&s)
}

fn join(xs: &[f64]) -> String {
    xs.iter().map(f64::to_string).collect::<Vec<_>>().join(";")
}

fn unit_total(inst: &ProblemInstance) -> bool {
    (inst.total() - 1.0).abs() <= 1e-9
}

pub fn construct(path: &str, format: Format, require_zero_loss: bool) -> Result<(), Failure> {
    let doc = parse_document(&read_source(path)?)?;
    let inst = require_instance(&doc)?;
    if require_zero_loss && !inst.is_zero_loss_feasible() {
        let arm = inst.argmax_popularity();
        return Err(Failure::Unsatisfied(json!({
            "kind": "zero_loss_infeasible",
            "message": format!("arm {arm} has popularity {} above total {}", inst.popularity()[arm], inst.total()),
            "arm": arm,
            "popularity": inst.popularity()[arm],
        })));
    }
    // Sub-instances with a total other than 1 only have the zero-loss construction.
    let (matrix, loss, branch, certificate) = if unit_total(inst) {
        let out = optimal_satisfaction_matrix(inst)?;
        (out.matrix, out.loss, out.branch, out.certificate)
    } else if inst.is_zero_loss_feasible() {
        let m = construct_zero_loss(inst)?;
        let l = loss(&m, inst)?;
        (m, l, Branch::ZeroLoss, None)
    } else {
        return Err(Error::NotApplicable("minimum-loss construction requires total 1".into()).into());
    };
    match format {
        Format::Json => print_json(&json!({
            "a": inst.a(),
            "b": inst.b(),
            "total": inst.total(),
            "popularity": inst.popularity(),
            "branch": branch,
            "loss": loss,
            "matrix": matrix,
            "certificate": certificate,
        }))?,
        Format::Csv => print_matrix_csv(
            &[("branch", branch.as_str().into()), ("loss", format!("{loss:e}")), ("popularity", join(inst.popularity()))],
            &matrix,
        )?,
    }
    Ok(())
}

pub fn baseline(path: &str, method: BaselineMethod, fallback_uniform: bool, format: Format) -> Result<(), Failure> {
    let doc = parse_document(&read_source(path)?)?;
    let inst = require_instance(&doc)?;
    let mut degenerate = false;
    let mut fallback = false;
    let (name, matrix) = match method {
        BaselineMethod::Uniform => ("uniform", uniform_random(inst.n())?),
        BaselineMethod::Renorm => match simultaneous_renormalization(inst) {
            Err(Error::DegenerateProduct) if fallback_uniform => {
                fallback = true;
                ("renorm", uniform_random(inst.n())?)
            }
            other => ("renorm", other?),
        },
        BaselineMethod::Order => {
            let r = random_order(inst)?;
            degenerate = r.degenerate;
            ("order", r.matrix)
        }
    };
    let l = loss(&matrix, inst)?;
    match format {
        Format::Json => print_json(&json!({
            "method": name,
            "loss": l,
            "degenerate": degenerate,
            "fallback_uniform": fallback,
            "matrix": matrix,
        }))?,
        Format::Csv => print_matrix_csv(&[("method", name.into()), ("loss", format!("{l:e}"))], &matrix)?,
    }
    Ok(())
}

pub fn bench(
    families: &[Family],
    ns: RangeInclusive<usize>,
    methods: &[Method],
    out: Option<&str>,
    format: Format,
    summary: bool,
) -> Result<(), Failure> {
    if ns.start() < &2 || ns.is_empty() {
        return Err(Error::Parse(format!("bad arm range {}..={}", ns.start(), ns.end())).into());
    }
    let records = run_benchmark(families, ns, methods);
    let text = match format {
        Format::Csv => records_to_csv(&records),
        Format::Json => serde_json::to_string_pretty(&records).expect("records serialize") + "\n",
    };
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Failure::io(format!("{path}: {e}")))?,
        None => emit(&text)?,
    }
    if summary {
        eprint!("{}", format_summary(&summarize(&records)));
    }
    Ok(())
}

pub struct Checks {
    pub kkt: bool,
    pub oracle: bool,
    pub convexity: bool,
    pub trials: usize,
    pub seed: u64,
}

pub fn verify(path: &str, checks: Checks, format: Format) -> Result<(), Failure> {
    let doc = parse_document(&read_source(path)?)?;
    let inst = require_instance(&doc)?;
    let matrix = match &doc.matrix {
        Some(m) => m.clone(),
        None => optimal_satisfaction_matrix(inst)?.matrix,
    };
    matrix.check_invariants()?;
    let l = loss(&matrix, inst)?;
    let mut rows: Vec<(&str, f64, bool)> = vec![("loss", l, true)];
    let mut report = json!({ "n": inst.n(), "loss": l, "popularity": inst.popularity() });
    if unit_total(inst) {
        let best = min_loss_value(inst);
        report["min_loss"] = json!(best);
        report["optimality_gap"] = json!(l - best);
    }

    if checks.kkt {
        let (value, passed) = if inst.is_zero_loss_feasible() {
            report["kkt"] = json!({ "applicable": false, "zero_loss": l <= ZERO_LOSS_TOL });
            (l, l <= ZERO_LOSS_TOL)
        } else {
            let c = kkt_verify(inst, &matrix)?;
            let v = c.residuals.max();
            let ok = c.is_valid();
            report["kkt"] = json!({ "applicable": true, "valid": ok, "certificate": c });
            (v, ok)
        };
        rows.push(("kkt", value, passed));
    }
    if checks.oracle {
        let o = solve_min_loss(inst, OracleOptions::default())?;
        let gap = (l - o.loss).abs();
        let ok = o.converged && gap <= ORACLE_GAP_TOL;
        report["oracle"] = json!({
            "loss": o.loss,
            "gap": gap,
            "iterations": o.iterations,
            "converged": o.converged,
            "passed": ok,
        });
        rows.push(("oracle_gap", gap, ok));
    }
    if checks.convexity {
        let r = convexity_check(inst.n(), checks.trials, checks.seed)?;
        rows.push(("convexity_min_quadratic_form", r.min_quadratic_form, r.passed));
        report["convexity"] = json!(r);
    }

    match format {
        Format::Json => print_json(&report)?,
        Format::Csv => {
            let mut t = String::from("check,value,passed\n");
            for (name, v, ok) in &rows {
                t.push_str(&format!("{name},{v:e},{ok}\n"));
            }
            emit(&t)?;
        }
    }
    let failed: Vec<&str> = rows.iter().filter(|r| !r.2).map(|r| r.0).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Unsatisfied(json!({ "kind": "verification_failed", "failed": failed })))
    }
}

pub fn sample(path: &str, seed: u64, draws: u64, format: Format) -> Result<(), Failure> {
    let doc = parse_document(&read_source(path)?)?;
    let matrix = match (doc.matrix, &doc.instance) {
        (Some(m), _) => m,
        (None, Some(inst)) => optimal_satisfaction_matrix(inst)?.matrix,
        (None, None) => unreachable!("parse_document rejects empty documents"),
    };
    let counts = sample_joint(&matrix, seed, draws)?;
    let n = counts.n;
    match format {
        Format::Json => {
            let rows: Vec<&[u64]> = counts.counts.chunks(n).collect();
            let fa = counts.row_frequencies();
            let fb = counts.col_frequencies();
            let dev = fa
                .iter()
                .zip(matrix.row_sums())
                .chain(fb.iter().zip(matrix.col_sums()))
                .map(|(f, p)| (f - p).abs())
                .fold(0.0, f64::max);
            print_json(&json!({
                "seed": seed,
                "draws": draws,
                "diagonal_hits": counts.diagonal_hits(),
                "counts": rows,
                "row_frequencies": fa,
                "col_frequencies": fb,
                "max_marginal_deviation": dev,
            }))?;
        }
        Format::Csv => {
            let mut t = String::new();
            for row in counts.counts.chunks(n) {
                t.push_str(&(row.iter().map(u64::to_string).collect::<Vec<_>>().join(",") + "\n"));
            }
            emit(&t)?;
        }
    }
    Ok(())
}

pub fn feasibility(path: &str, players: Option<usize>, oracle: bool, format: Format) -> Result<(), Failure> {
    let prefs = parse_players(&read_source(path)?)?;
    if let Some(m) = players {
        if m != prefs.players() {
            return Err(Error::DimensionMismatch { expected: m, got: prefs.players() }.into());
        }
    }
    let verdict = feasibility_verdict(&prefs)?;
    let best = if oracle { Some(solve_multi_min_loss(&prefs, OracleOptions::default())?) } else { None };
    match format {
        Format::Json => print_json(&json!({
            "players": prefs.players(),
            "arms": prefs.arms(),
            "verdict": verdict,
            "popularity": prefs.popularity(),
            "max_popularity": prefs.max_popularity(),
            "oracle": best.as_ref().map(|r| json!({
                "loss": r.loss,
                "iterations": r.iterations,
                "converged": r.converged,
            })),
        }))?,
        Format::Csv => {
            let ol = best.map(|r| format!("{:e}", r.loss)).unwrap_or_default();
            emit(&format!("verdict,max_popularity,oracle_loss\n{},{},{ol}\n", verdict.as_str(), prefs.max_popularity()))?;
        }
    }
    Ok(())
}
