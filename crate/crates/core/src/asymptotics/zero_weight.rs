use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use super::{linear_fit, partial_fraction_roots};
use crate::error::{Error, Result};
use crate::szego::{ModifiedSzegoData, Side};

fn fraction_terms(msz: &ModifiedSzegoData, n: usize) -> (Vec<Complex64>, Vec<Complex64>) {
    let mut c = Vec::new();
    let mut a = Vec::new();
    for (cz, th) in msz.spec.zeros.iter().zip(&msz.theta) {
        if cz.beta == 0.0 {
            continue;
        }
        let ak = cz.point();
        c.push(cz.beta * th.value * ak.powu(n as u32 + 1));
        a.push(ak);
    }
    (c, a)
}

/// `Phi_n(z) ~ (D_i(W; 0)/D_i(W; z)) (1/n) sum_k beta_k theta_k a_k^{n+1} / (a_k - z)`.
pub fn zero_weight_phi(msz: &ModifiedSzegoData, n: usize, z: Complex64) -> Result<Complex64> {
    if n == 0 {
        return Err(Error::InvalidParameter("zero-weight predictor needs n >= 1".into()));
    }
    let (c, a) = fraction_terms(msz, n);
    if a.iter().any(|ak| (ak - z).norm() < 1e-12) {
        return Err(Error::NearSingularity(z));
    }
    let sum: Complex64 = c.iter().zip(&a).map(|(ck, ak)| ck / (ak - z)).sum();
    let zero = Complex64::new(0.0, 0.0);
    let ratio = msz.modified_szego(zero, Side::Interior)? / msz.modified_szego(z, Side::Interior)?;
    Ok(ratio * sum / n as f64)
}

/// Roots of `sum_k beta_k theta_k a_k^{n+1} / (a_k - z)`; at most `m - 1` of them.
pub fn zero_weight_roots(msz: &ModifiedSzegoData, n: usize) -> Result<Vec<Complex64>> {
    let (c, a) = fraction_terms(msz, n);
    partial_fraction_roots(&c, &a)
}

/// `alpha_n ~ -conj(Phi_{n+1}(0))` with `Phi_{n+1}(0)` from [`zero_weight_phi`].
pub fn zero_weight_verblunsky(msz: &ModifiedSzegoData, n: usize) -> Result<Complex64> {
    Ok(-zero_weight_phi(msz, n + 1, Complex64::new(0.0, 0.0))?.conj())
}

/// `kappa_{n-1}^2 ~ (tau^2 / 2 pi) (1 - (1/n) sum_k beta_k^2)`.
pub fn kappa_zero_weight(msz: &ModifiedSzegoData, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParameter("kappa law needs n >= 1".into()));
    }
    let tau = msz.base.tau;
    Ok(tau * tau / (2.0 * PI) * (1.0 - msz.spec.beta_square_sum() / n as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FisherHartwigFit {
    /// Slope against `log n`, estimating `sum_k beta_k^2`.
    pub exponent: f64,
    /// Intercept, estimating `log` of the multiplicative constant.
    pub log_constant: f64,
    pub points_used: usize,
}

/// Least-squares fit of `log D_n - n log G[2 pi w]` against `log n` over the upper half of the degrees.
pub fn fisher_hartwig_fit(degrees: &[usize], log_det: &[f64], log_g2pi: f64) -> Result<FisherHartwigFit> {
    if degrees.len() != log_det.len() {
        return Err(Error::InvalidParameter("degrees and log-determinants differ in length".into()));
    }
    if degrees.len() < 8 {
        return Err(Error::TooFewPoints(format!("Fisher-Hartwig fit needs at least 8 points, got {}", degrees.len())));
    }
    if degrees.iter().any(|&n| n == 0) {
        return Err(Error::InvalidParameter("degrees must be positive".into()));
    }
    let mut pts: Vec<(usize, f64)> = degrees.iter().copied().zip(log_det.iter().copied()).collect();
    pts.sort_by_key(|p| p.0);
    let upper = &pts[pts.len() / 2..];
    let x: Vec<f64> = upper.iter().map(|p| (p.0 as f64).ln()).collect();
    let y: Vec<f64> = upper.iter().map(|p| p.1 - p.0 as f64 * log_g2pi).collect();
    let (exponent, log_constant) = linear_fit(&x, &y)?;
    Ok(FisherHartwigFit { exponent, log_constant, points_used: upper.len() })
}
