//! Ground-truth OPUC from trigonometric moments via the Szegő recurrence.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::laurent::fft_forward;
use crate::weights::{Weight, WeightSpec};

/// Trigonometric moments `d_k = oint z^{-k} W(z) |dz|`, `|k| <= max_k`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Moments {
    max_k: usize,
    values: Vec<Complex64>,
}

impl Moments {
    pub fn from_values(nonnegative: &[Complex64]) -> Self {
        let max_k = nonnegative.len() - 1;
        let mut values = vec![Complex64::new(0.0, 0.0); 2 * max_k + 1];
        for (k, &v) in nonnegative.iter().enumerate() {
            values[max_k + k] = v;
            values[max_k - k] = v.conj();
        }
        values[max_k].im = 0.0;
        Moments { max_k, values }
    }

    pub fn max_k(&self) -> usize {
        self.max_k
    }

    pub fn get(&self, k: i64) -> Complex64 {
        self.values[(k + self.max_k as i64) as usize]
    }
}

/// Quadrature size used when the caller does not choose one.
pub fn default_quadrature_size(weight: &WeightSpec, max_k: usize) -> usize {
    let floor = match weight {
        WeightSpec::Analytic(_) => 1 << 12,
        WeightSpec::ZeroModified(_) => 1 << 16,
    };
    (8 * max_k.max(1)).next_power_of_two().max(floor)
}

/// Trapezoidal moments on `n_quad` equispaced angles.
pub fn moments(weight: &dyn Weight, max_k: usize, n_quad: usize) -> Result<Moments> {
    if n_quad < 8 * max_k {
        return Err(Error::InvalidParameter(format!("N_quad = {n_quad} < 8 * max_k = {}", 8 * max_k)));
    }
    let mut buf = Vec::with_capacity(n_quad);
    for j in 0..n_quad {
        let v = weight.value(2.0 * PI * j as f64 / n_quad as f64);
        if !v.is_finite() {
            return Err(Error::NonFinite("weight sample"));
        }
        buf.push(Complex64::new(v, 0.0));
    }
    fft_forward(&mut buf);
    let scale = 2.0 * PI / n_quad as f64;
    let nonneg: Vec<Complex64> = (0..=max_k)
        .map(|k| {
            let plus = buf[k % n_quad];
            let minus = buf[(n_quad - k % n_quad) % n_quad];
            0.5 * (plus + minus.conj()) * scale
        })
        .collect();
    Ok(Moments::from_values(&nonneg))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OpucResult {
    pub n_max: usize,
    /// `alpha_0 .. alpha_{n_max - 1}`
    pub alpha: Vec<Complex64>,
    /// `kappa_0 .. kappa_{n_max}`
    pub kappa: Vec<f64>,
    /// `1/kappa_n^2 = ||Phi_n||^2`
    pub norm_sq: Vec<f64>,
    /// Ascending monic coefficients of `Phi_0 .. Phi_{n_max}`.
    pub phi_monic: Vec<Vec<Complex64>>,
    /// `log D_0 .. log D_{n_max}`
    pub log_det: Vec<f64>,
}

pub fn szego_recurrence(d: &Moments, n_max: usize) -> Result<OpucResult> {
    if d.max_k() < n_max {
        return Err(Error::InvalidParameter(format!(
            "moments cover |k| <= {} but degree {n_max} was requested",
            d.max_k()
        )));
    }
    let d0 = d.get(0).re;
    if !(d0 > 0.0) {
        return Err(Error::PositivityLoss { degree: 0, modulus: f64::NAN });
    }
    let mut alpha = Vec::with_capacity(n_max);
    let mut norm_sq = vec![d0];
    let mut phi = vec![vec![Complex64::new(1.0, 0.0)]];
    for n in 0..n_max {
        let cur = &phi[n];
        let e = norm_sq[n];
        // conj(alpha_n) = <z Phi_n, 1> / ||Phi_n||^2
        let mut inner = Complex64::new(0.0, 0.0);
        for (j, c) in cur.iter().enumerate() {
            inner += c * d.get(-(j as i64 + 1));
        }
        let alpha_bar = inner / e;
        let a = alpha_bar.conj();
        let modulus = a.norm();
        if !(modulus < 1.0) || !modulus.is_finite() {
            return Err(Error::PositivityLoss { degree: n, modulus });
        }
        let mut next = vec![Complex64::new(0.0, 0.0); n + 2];
        for (j, c) in cur.iter().enumerate() {
            next[j + 1] += c;
            // Phi_n^* has coefficient conj(c_{n-j}) at z^j
            next[j] -= alpha_bar * cur[n - j].conj();
        }
        alpha.push(a);
        norm_sq.push(e * (1.0 - modulus * modulus));
        phi.push(next);
    }
    let kappa = norm_sq.iter().map(|e| 1.0 / e.sqrt()).collect();
    let mut log_det = Vec::with_capacity(n_max + 1);
    let mut acc = 0.0;
    for e in &norm_sq {
        acc += e.ln();
        log_det.push(acc);
    }
    Ok(OpucResult { n_max, alpha, kappa, norm_sq, phi_monic: phi, log_det })
}

impl OpucResult {
    pub fn phi(&self, n: usize, z: Complex64) -> Complex64 {
        horner(&self.phi_monic[n], z)
    }

    /// `Phi_n^*(z) = z^n conj(Phi_n(1/conj z))`.
    pub fn phi_star(&self, n: usize, z: Complex64) -> Complex64 {
        let c = &self.phi_monic[n];
        let rev: Vec<Complex64> = c.iter().rev().map(|v| v.conj()).collect();
        horner(&rev, z)
    }

    /// `kappa_n^2 / kappa_{n_max}^2 - 1`, accumulated from `log(1 - |alpha_j|^2)` to avoid cancellation.
    pub fn kappa_sq_relative_deficit(&self, n: usize) -> f64 {
        let s: f64 = self.alpha[n..].iter().map(|a| (-a.norm_sqr()).ln_1p()).sum();
        s.exp_m1()
    }
}

pub(crate) fn horner(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

/// `log D_n` from the `kappa`-product.
pub fn toeplitz_determinants(r: &OpucResult) -> Vec<f64> {
    r.log_det.clone()
}

/// `log det [d_{j-i}]_{i,j=0..n}` by dense LU; meant as a cross-check for small `n`.
pub fn direct_log_det(d: &Moments, n: usize) -> Result<f64> {
    if n > 8 {
        return Err(Error::InvalidParameter("dense determinant cross-check is limited to n <= 8".into()));
    }
    let m = DMatrix::from_fn(n + 1, n + 1, |i, j| d.get(j as i64 - i as i64));
    let det = m.lu().determinant();
    if !(det.re > 0.0) {
        return Err(Error::PositivityLoss { degree: n, modulus: det.norm() });
    }
    Ok(det.re.ln())
}
