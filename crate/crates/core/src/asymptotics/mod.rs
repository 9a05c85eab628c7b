//! Closed-form asymptotic predictors for `Phi_n`, `alpha_n`, `kappa_n` and Toeplitz determinants.

mod essential;
mod poles;
mod zero_weight;

pub use essential::{level_curve, saddle_solve, verblunsky_essential_asymptote, LevelCurve, SaddleData};
pub use poles::{
    dominant_pole_phi, dominant_pole_zeros, residue_predictor, verblunsky_pole_asymptote, DominantPolePrediction, Pole, PolePrescription,
    ResidueForm, ResiduePrediction,
};
pub use zero_weight::{
    fisher_hartwig_fit, kappa_zero_weight, zero_weight_phi, zero_weight_roots, zero_weight_verblunsky, FisherHartwigFit,
};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::zeros::roots;

/// Ordinary least squares `y = slope x + intercept`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::TooFewPoints(format!("linear fit needs at least 2 points, got {}", x.len())));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("linear fit abscissae are all equal".into()));
    }
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

/// Numerator `sum_k c_k prod_{j != k} (a_j - z)` of `sum_k c_k / (a_k - z)`, ascending, with
/// negligible leading coefficients removed.
fn partial_fraction_numerator(c: &[Complex64], a: &[Complex64]) -> Vec<Complex64> {
    let mut acc = vec![Complex64::new(0.0, 0.0); a.len().max(1)];
    for k in 0..a.len() {
        let mut p = vec![c[k]];
        for (j, &aj) in a.iter().enumerate() {
            if j == k {
                continue;
            }
            let mut next = vec![Complex64::new(0.0, 0.0); p.len() + 1];
            for (i, &v) in p.iter().enumerate() {
                next[i] += aj * v;
                next[i + 1] -= v;
            }
            p = next;
        }
        for (i, v) in p.into_iter().enumerate() {
            acc[i] += v;
        }
    }
    let scale = acc.iter().map(|v| v.norm()).fold(0.0, f64::max);
    while acc.len() > 1 && acc.last().unwrap().norm() <= 1e-12 * scale {
        acc.pop();
    }
    acc
}

/// Finite roots of `sum_k c_k / (a_k - z)`.
fn partial_fraction_roots(c: &[Complex64], a: &[Complex64]) -> Result<Vec<Complex64>> {
    let p = partial_fraction_numerator(c, a);
    if p.len() < 2 {
        return Ok(Vec::new());
    }
    Ok(roots(&p)?.zeros)
}
