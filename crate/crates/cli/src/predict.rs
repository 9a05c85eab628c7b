use clap::ValueEnum;
use opuc_core::asymptotics::{
    dominant_pole_zeros, kappa_zero_weight, level_curve, saddle_solve, verblunsky_essential_asymptote,
    verblunsky_pole_asymptote, zero_weight_roots, zero_weight_verblunsky, PolePrescription,
};
use opuc_core::canonical::{
    default_lens_radius, default_scattering_order, kappa_estimate, kappa_relative_deficit, neumann_solve,
    verblunsky_estimate, Fidelity,
};
use opuc_core::szego::{ModifiedSzegoData, SzegoData};
use opuc_core::weights::{AnalyticWeightSpec, WeightSpec};
use opuc_core::Complex64;
use rayon::prelude::*;
use serde_json::json;

use crate::config::Loaded;
use crate::error::{CliError, CliResult};
use crate::table::{pretty, write, write_table, Table};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Scattering,
    Poles,
    Essential,
    #[value(name = "zero-weight")]
    ZeroWeight,
}

impl Method {
    pub fn stem(self) -> &'static str {
        match self {
            Method::Scattering => "scattering",
            Method::Poles => "poles",
            Method::Essential => "essential",
            Method::ZeroWeight => "zero-weight",
        }
    }
}

/// Resolution of the polar grid used for level curves.
const LEVEL_CURVE_RESOLUTION: usize = 400;

pub fn cmd_predict(l: &Loaded, method: Method) -> CliResult<()> {
    match method {
        Method::Scattering => scattering(l),
        Method::Poles => poles(l),
        Method::Essential => essential(l),
        Method::ZeroWeight => zero_weight(l),
    }
}

fn analytic<'a>(l: &'a Loaded, method: Method) -> CliResult<&'a AnalyticWeightSpec> {
    match &l.weight {
        WeightSpec::Analytic(a) => Ok(a),
        WeightSpec::ZeroModified(_) => Err(CliError::MissingMetadata(format!(
            "method {} needs a weight without zeros on the circle",
            method.stem()
        ))),
    }
}

fn zero_list(rows: &[(usize, Vec<Complex64>)]) -> Table {
    let mut t = Table::new(&["n", "re", "im", "abs"]);
    for (n, zs) in rows {
        for z in zs {
            t.push(vec![*n as f64, z.re, z.im, z.norm()]);
        }
    }
    t
}

fn scattering(l: &Loaded) -> CliResult<()> {
    let spec = analytic(l, Method::Scattering)?;
    let n_max = l.n_max();
    let sz = SzegoData::from_weight(spec, default_scattering_order(n_max))?;
    let rho = l.rho(sz.rho);
    let r = l.config.r.unwrap_or_else(|| default_lens_radius(rho));
    if !(r > rho && r < 1.0) {
        return Err(CliError::Validation(format!("lens radius r = {r} must lie in (rho, 1) = ({rho}, 1)")));
    }
    let level2 = Fidelity::Level2 { n_terms: l.config.k };
    let rows = l
        .config
        .n_list
        .par_iter()
        .map(|&n| -> opuc_core::Result<(Vec<f64>, serde_json::Value)> {
            let a1 = verblunsky_estimate(n, &sz, Fidelity::Level1, r)?;
            let a2 = verblunsky_estimate(n, &sz, level2, r)?;
            let row = vec![
                n as f64,
                a1.re,
                a1.im,
                a2.re,
                a2.im,
                kappa_relative_deficit(n, &sz, Fidelity::Level1, r)?,
                kappa_relative_deficit(n, &sz, level2, r)?,
                kappa_estimate(n, &sz, Fidelity::Level1, r)?.sqrt(),
                kappa_estimate(n, &sz, level2, r)?.sqrt(),
            ];
            let summary = serde_json::to_value(neumann_solve(n, &sz, l.config.k, r)?.summary()).expect("summary serializes");
            Ok((row, summary))
        })
        .collect::<opuc_core::Result<Vec<_>>>()?;

    let mut table = Table::new(&[
        "n",
        "alpha_l1_re",
        "alpha_l1_im",
        "alpha_l2_re",
        "alpha_l2_im",
        "kappa_sq_relative_deficit_l1",
        "kappa_sq_relative_deficit_l2",
        "kappa_l1",
        "kappa_l2",
    ]);
    let mut summaries = Vec::new();
    for (row, s) in rows {
        table.push(row);
        summaries.push(s);
    }
    let mut s_table = Table::new(&["k", "re", "im"]);
    let order = sz.order() as i64;
    for k in -order..=order {
        let c = sz.scattering.coeff(k);
        s_table.push(vec![k as f64, c.re, c.im]);
    }
    let manifest = l.manifest("predict scattering");
    let dir = &l.config.outputs;
    write_table(dir, "predict_scattering", l.config.format, &table, &manifest)?;
    write_table(dir, "scattering_coefficients", l.config.format, &s_table, &manifest)?;
    let doc = json!({ "manifest": manifest, "r": r, "tau": sz.tau, "rho": rho, "entries": summaries });
    write(&dir.join("smatrix.json"), &pretty(&doc))
}

fn poles(l: &Loaded) -> CliResult<()> {
    let spec = analytic(l, Method::Poles)?;
    let p = PolePrescription::from_spec(spec)?;
    let sz = SzegoData::from_weight(spec, default_scattering_order(l.n_max()))?;
    let rows = l
        .config
        .n_list
        .par_iter()
        .map(|&n| -> opuc_core::Result<(usize, Complex64, Vec<Complex64>)> {
            Ok((n, verblunsky_pole_asymptote(&p, &sz, n)?, dominant_pole_zeros(&p, &sz, n)?))
        })
        .collect::<opuc_core::Result<Vec<_>>>()?;
    let mut table = Table::new(&["n", "alpha_re", "alpha_im"]);
    for (n, a, _) in &rows {
        table.push(vec![*n as f64, a.re, a.im]);
    }
    let zeros: Vec<(usize, Vec<Complex64>)> = rows.into_iter().map(|(n, _, z)| (n, z)).collect();
    let manifest = l.manifest("predict poles");
    let dir = &l.config.outputs;
    write_table(dir, "predict_poles", l.config.format, &table, &manifest)?;
    write_table(dir, "predicted_zeros_poles", l.config.format, &zero_list(&zeros), &manifest)
}

fn essential(l: &Loaded) -> CliResult<()> {
    let spec = analytic(l, Method::Essential)?;
    let sign = spec
        .essential_sign
        .ok_or_else(|| CliError::MissingMetadata("method essential needs an essential or inverse_essential weight".into()))?;
    let rho = spec
        .rho_declared
        .ok_or_else(|| CliError::MissingMetadata("method essential needs the radius rho".into()))?;
    let sz = SzegoData::from_weight(spec, default_scattering_order(l.n_max()))?;
    let rows = l
        .config
        .n_list
        .par_iter()
        .map(|&n| -> opuc_core::Result<(Vec<f64>, Table)> {
            let saddle = saddle_solve(rho, n, sign)?;
            let alpha = if sign == 1.0 {
                verblunsky_essential_asymptote(&saddle, &sz)?
            } else {
                Complex64::new(f64::NAN, f64::NAN)
            };
            let curve = level_curve(&saddle, &sz, LEVEL_CURVE_RESOLUTION)?;
            let mut t = Table::new(&["re", "im", "component_id"]);
            for (id, comp) in curve.components.iter().enumerate() {
                for z in comp {
                    t.push(vec![z.re, z.im, id as f64]);
                }
            }
            let row = vec![
                n as f64,
                saddle.t_plus.re,
                saddle.t_plus.im,
                saddle.residual_plus,
                alpha.re,
                alpha.im,
                curve.component_count() as f64,
            ];
            Ok((row, t))
        })
        .collect::<opuc_core::Result<Vec<_>>>()?;
    let mut table = Table::new(&["n", "t_plus_re", "t_plus_im", "saddle_residual", "alpha_re", "alpha_im", "components"]);
    let manifest = l.manifest("predict essential");
    let dir = &l.config.outputs;
    let last = rows.len() - 1;
    for (i, (row, curve)) in rows.into_iter().enumerate() {
        let n = row[0] as usize;
        table.push(row);
        write_table(dir, &format!("levelcurve_{n}"), l.config.format, &curve, &manifest)?;
        if i == last {
            write_table(dir, "levelcurve", l.config.format, &curve, &manifest)?;
        }
    }
    write_table(dir, "predict_essential", l.config.format, &table, &manifest)
}

fn zero_weight(l: &Loaded) -> CliResult<()> {
    let spec = match &l.weight {
        WeightSpec::ZeroModified(z) => z,
        WeightSpec::Analytic(_) => {
            return Err(CliError::MissingMetadata("method zero-weight needs a zero_modified weight".into()))
        }
    };
    let base = SzegoData::from_weight(&spec.base, 64)?;
    let msz = ModifiedSzegoData::new(spec, base)?;
    let rows = l
        .config
        .n_list
        .par_iter()
        .map(|&n| -> opuc_core::Result<(Vec<f64>, Vec<Complex64>)> {
            let a = zero_weight_verblunsky(&msz, n)?;
            let k = kappa_zero_weight(&msz, n)?;
            Ok((vec![n as f64, a.re, a.im, k], zero_weight_roots(&msz, n)?))
        })
        .collect::<opuc_core::Result<Vec<_>>>()?;
    let mut table = Table::new(&["n", "alpha_re", "alpha_im", "kappa_sq_prev"]);
    let mut zeros = Vec::new();
    for (row, z) in rows {
        zeros.push((row[0] as usize, z));
        table.push(row);
    }
    let manifest = l.manifest("predict zero-weight");
    let dir = &l.config.outputs;
    write_table(dir, "predict_zero-weight", l.config.format, &table, &manifest)?;
    write_table(dir, "predicted_zeros_zero-weight", l.config.format, &zero_list(&zeros), &manifest)
}
