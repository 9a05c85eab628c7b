use std::collections::BTreeMap;

use opuc_core::asymptotics::linear_fit;
use serde::Serialize;
use serde_json::json;

use crate::config::Loaded;
use crate::error::{CliError, CliResult};
use crate::oracle::estimated_rho;
use crate::table::{number, pretty, read_table, write, write_table, Table};

/// Errors below this are treated as rounding noise and left out of slope fits.
const NOISE_FLOOR: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, Serialize)]
pub struct SlopeTest {
    pub name: &'static str,
    pub degrees: [usize; 2],
    pub points: usize,
    pub slope: Option<f64>,
    pub bound: f64,
    pub status: Status,
    pub detail: String,
}

/// Fits `log err` against `n` over `degrees` and requires the slope to be at most `bound`.
pub fn slope_test(name: &'static str, degrees: [usize; 2], n: &[usize], err: &[f64], bound: f64) -> SlopeTest {
    let window: Vec<(usize, f64)> =
        n.iter().zip(err).filter(|(&k, _)| k >= degrees[0] && k <= degrees[1]).map(|(&k, &e)| (k, e)).collect();
    let mut test = SlopeTest { name, degrees, points: 0, slope: None, bound, status: Status::Skipped, detail: String::new() };
    if window.is_empty() {
        test.detail = format!("no degrees in [{}, {}]", degrees[0], degrees[1]);
        return test;
    }
    let max = window.iter().map(|p| p.1).fold(0.0, f64::max);
    if max <= NOISE_FLOOR {
        test.status = Status::Pass;
        test.detail = format!("all errors at rounding level (max {max:.3e})");
        return test;
    }
    let (x, y): (Vec<f64>, Vec<f64>) =
        window.iter().filter(|p| p.1 > NOISE_FLOOR).map(|&(k, e)| (k as f64, e.ln())).unzip();
    test.points = x.len();
    if x.len() < 3 {
        test.detail = format!("only {} errors above {NOISE_FLOOR:e}", x.len());
        return test;
    }
    let slope = linear_fit(&x, &y).map(|f| f.0).unwrap_or(f64::NAN);
    test.slope = Some(slope);
    if slope <= bound {
        test.status = Status::Pass;
        test.detail = format!("slope {slope:.4} <= {bound:.4}");
    } else {
        test.status = Status::Fail;
        test.detail = format!("slope {slope:.4} exceeds bound {bound:.4}; the declared rho is inconsistent with the observed decay");
    }
    test
}

fn by_degree(t: &Table) -> CliResult<BTreeMap<usize, Vec<f64>>> {
    let i = t.columns.iter().position(|c| c == "n").ok_or_else(|| CliError::MissingInput("column n".into()))?;
    Ok(t.rows.iter().map(|r| (r[i] as usize, r.clone())).collect())
}

fn col(t: &Table, name: &str) -> CliResult<usize> {
    t.columns.iter().position(|c| c == name).ok_or_else(|| CliError::MissingInput(format!("column {name}")))
}

/// Returns whether every test passed.
pub fn cmd_compare(l: &Loaded) -> CliResult<bool> {
    let dir = &l.config.outputs;
    let fmt = l.config.format;
    let alpha = read_table(dir, "alpha", fmt)?;
    let kappa = read_table(dir, "kappa", fmt)?;
    let pred = read_table(dir, "predict_scattering", fmt)?;
    let alpha_rows = by_degree(&alpha)?;
    let kappa_rows = by_degree(&kappa)?;
    let (are, aim) = (col(&alpha, "re")?, col(&alpha, "im")?);
    let kdef = col(&kappa, "kappa_sq_relative_deficit")?;
    let p = [
        col(&pred, "alpha_l1_re")?,
        col(&pred, "alpha_l1_im")?,
        col(&pred, "alpha_l2_re")?,
        col(&pred, "alpha_l2_im")?,
        col(&pred, "kappa_sq_relative_deficit_l1")?,
        col(&pred, "kappa_sq_relative_deficit_l2")?,
    ];

    let mut report = Table::new(&["n", "alpha_err_l1", "alpha_err_l2", "deficit_err_l1", "deficit_err_l2"]);
    let mut degrees = Vec::new();
    let (mut ea, mut ek) = (Vec::new(), Vec::new());
    for (n, row) in by_degree(&pred)? {
        let a = alpha_rows.get(&n).ok_or_else(|| CliError::MissingInput(format!("alpha for n = {n}")))?;
        let k = kappa_rows.get(&n).ok_or_else(|| CliError::MissingInput(format!("kappa for n = {n}")))?;
        let err = |re: f64, im: f64| (a[are] - re).hypot(a[aim] - im);
        let e = [err(row[p[0]], row[p[1]]), err(row[p[2]], row[p[3]]), (k[kdef] - row[p[4]]).abs(), (k[kdef] - row[p[5]]).abs()];
        report.push(vec![n as f64, e[0], e[1], e[2], e[3]]);
        degrees.push(n);
        ea.push(e[0]);
        ek.push(e[2]);
    }

    let rho = l.rho(estimated_rho(l)?);
    let log_rho = if rho > 0.0 { rho.ln() } else { f64::NEG_INFINITY };
    let tests = vec![
        slope_test("alpha_error_slope", [4, 16], &degrees, &ea, 3.0 * log_rho + 0.2),
        slope_test("kappa_deficit_slope", [4, 14], &degrees, &ek, 4.0 * log_rho + 0.3),
    ];
    let passed = tests.iter().all(|t| t.status != Status::Fail);
    for t in &tests {
        let tag = match t.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skipped => "SKIP",
        };
        println!("{tag} {}: {}", t.name, t.detail);
    }
    println!("{}", if passed { "PASS" } else { "FAIL" });

    let manifest = l.manifest("compare");
    let doc = json!({
        "manifest": manifest,
        "rho": number(rho),
        "verdict": if passed { "pass" } else { "fail" },
        "tests": tests,
    });
    write_table(dir, "compare", fmt, &report, &manifest)?;
    write(&dir.join("compare_report.json"), &pretty(&doc))?;
    Ok(passed)
}
