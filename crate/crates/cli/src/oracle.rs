use opuc_core::asymptotics::linear_fit;
use opuc_core::oracle::{default_quadrature_size, moments, szego_recurrence, OpucResult};
use opuc_core::szego::SzegoData;
use opuc_core::weights::WeightSpec;
use opuc_core::zeros::{class_of, default_margin, roots, ZeroClass};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::Loaded;
use crate::error::CliResult;
use crate::table::{number, pretty, write, write_table, Table};

/// Degree the recurrence is carried to so that `kappa_n^2 / kappa_inf^2` is resolved at every requested `n`.
pub fn far_degree(weight: &WeightSpec, n_max: usize) -> usize {
    match weight {
        WeightSpec::Analytic(_) => 3 * n_max + 40,
        WeightSpec::ZeroModified(_) => n_max + 1,
    }
}

pub fn run_oracle(l: &Loaded) -> CliResult<OpucResult> {
    let n_far = far_degree(&l.weight, l.n_max());
    let n_quad = l.config.n_quad.unwrap_or_else(|| default_quadrature_size(&l.weight, n_far));
    let d = moments(&l.weight, n_far, n_quad)?;
    Ok(szego_recurrence(&d, n_far)?)
}

pub fn estimated_rho(l: &Loaded) -> CliResult<f64> {
    let base = l.weight.base();
    let sz = SzegoData::from_weight(base, 256)?;
    Ok(sz.rho)
}

/// `exp` of the slope of `log|alpha_n|` over the upper half of the degrees above the noise floor.
pub fn verblunsky_rho(o: &OpucResult, n_max: usize) -> Option<f64> {
    let pts: Vec<(f64, f64)> = (1..n_max.min(o.alpha.len()))
        .filter(|&n| o.alpha[n].norm() > 1e-13)
        .map(|n| (n as f64, o.alpha[n].norm().ln()))
        .collect();
    let upper = &pts[pts.len() / 2..];
    if upper.len() < 3 {
        return None;
    }
    let (x, y): (Vec<f64>, Vec<f64>) = upper.iter().cloned().unzip();
    linear_fit(&x, &y).ok().map(|(slope, _)| slope.exp())
}

fn class_name(c: ZeroClass) -> &'static str {
    match c {
        ZeroClass::Interior => "interior",
        ZeroClass::Band => "band",
        ZeroClass::Other => "other",
    }
}

pub fn class_code(c: ZeroClass) -> f64 {
    match c {
        ZeroClass::Interior => 0.0,
        ZeroClass::Band => 1.0,
        ZeroClass::Other => 2.0,
    }
}

pub fn cmd_oracle(l: &Loaded) -> CliResult<()> {
    let o = run_oracle(l)?;
    let n_max = l.n_max();
    let rho = l.rho(estimated_rho(l)?);
    let margin = default_margin(rho);
    let manifest = l.manifest("oracle");
    let dir = &l.config.outputs;

    let mut alpha = Table::new(&["n", "re", "im", "abs"]);
    for n in 0..=n_max {
        let a = o.alpha[n];
        alpha.push(vec![n as f64, a.re, a.im, a.norm()]);
    }
    let mut kappa = Table::new(&["n", "kappa", "kappa_sq_relative_deficit"]);
    let mut logdet = Table::new(&["n", "log_det"]);
    for n in 0..=n_max {
        kappa.push(vec![n as f64, o.kappa[n], o.kappa_sq_relative_deficit(n)]);
        logdet.push(vec![n as f64, o.log_det[n]]);
    }

    let zero_sets = l
        .config
        .n_list
        .par_iter()
        .map(|&n| roots(&o.phi_monic[n]).map(|z| (n, z)))
        .collect::<opuc_core::Result<Vec<_>>>()?;
    let mut zeros = Table::new(&["n", "re", "im", "abs", "class"]);
    let mut phi_files = Vec::new();
    for (n, zs) in &zero_sets {
        let listed: Vec<Value> = zs
            .zeros
            .iter()
            .map(|z| {
                let c = class_of(*z, rho, margin);
                zeros.push(vec![*n as f64, z.re, z.im, z.norm(), class_code(c)]);
                json!({ "re": number(z.re), "im": number(z.im), "class": class_name(c) })
            })
            .collect();
        let coeffs: Vec<Value> = o.phi_monic[*n].iter().map(|c| json!({ "re": number(c.re), "im": number(c.im) })).collect();
        let doc = json!({
            "manifest": manifest,
            "n": n,
            "kappa": number(o.kappa[*n]),
            "norm_sq": number(o.norm_sq[*n]),
            "log_det": number(o.log_det[*n]),
            "coefficients": coeffs,
            "zeros": listed,
            "root_residual": number(zs.residual),
        });
        phi_files.push((format!("phi_{n}.json"), pretty(&doc)));
    }

    let summary = json!({
        "manifest": manifest,
        "n_max": n_max,
        "far_degree": o.n_max,
        "rho": number(rho),
        "rho_declared": l.weight.base().rho_declared.map(number),
        "rho_from_log_weight": number(estimated_rho(l)?),
        "rho_from_verblunsky": verblunsky_rho(&o, o.n_max).map(number),
        "zero_class_margin": number(margin),
    });

    write_table(dir, "alpha", l.config.format, &alpha, &manifest)?;
    write_table(dir, "kappa", l.config.format, &kappa, &manifest)?;
    write_table(dir, "logdet", l.config.format, &logdet, &manifest)?;
    write_table(dir, "oracle_zeros", l.config.format, &zeros, &manifest)?;
    for (name, body) in phi_files {
        write(&dir.join(name), &body)?;
    }
    write(&dir.join("oracle_summary.json"), &pretty(&summary))
}
