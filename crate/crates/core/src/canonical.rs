//! Canonical Neumann-series representation of `Phi_n` through the scattering function.
//!
//! The operators `M^i_n` and `M^e_n` are realised on Laurent coefficients: multiplication
//! by `sigma_n = z^n S` (or `sigma_n^{-1}`) followed by exact Riesz projections. Each
//! application yields two branches, valid inside and outside its splitting circle.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::laurent::{Annulus, LaurentSeries, Part};
use crate::szego::SzegoData;

/// Coefficients of `S` beyond this relative size are treated as zero.
const SYMBOL_CHOP: f64 = 1e-16;
/// Extra coefficients kept beyond the shift by `n`.
const ORDER_MARGIN: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Inner,
    Outer,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PiecewiseSeries {
    pub inner: LaurentSeries,
    pub outer: LaurentSeries,
    pub circle_radius: f64,
}

impl PiecewiseSeries {
    pub fn constant(c: Complex64, circle_radius: f64) -> Self {
        PiecewiseSeries {
            inner: LaurentSeries::constant(c, Annulus { inner: 0.0, outer: circle_radius }),
            outer: LaurentSeries::constant(c, Annulus { inner: circle_radius, outer: f64::INFINITY }),
            circle_radius,
        }
    }

    pub fn branch(&self, b: Branch) -> &LaurentSeries {
        match b {
            Branch::Inner => &self.inner,
            Branch::Outer => &self.outer,
        }
    }

    pub fn evaluate(&self, z: Complex64, b: Branch) -> Result<Complex64> {
        self.branch(b).evaluate(z)
    }

    fn add(&self, other: &PiecewiseSeries) -> Result<PiecewiseSeries> {
        Ok(PiecewiseSeries {
            inner: self.inner.add(&other.inner)?.with_annulus(self.inner.annulus()),
            outer: self.outer.add(&other.outer)?.with_annulus(self.outer.annulus()),
            circle_radius: self.circle_radius,
        })
    }

    pub fn l1_norm(&self) -> f64 {
        self.inner.l1_norm() + self.outer.l1_norm()
    }
}

/// Lens radius `(rho + 1)/2`, capped at 0.85.
pub fn default_lens_radius(rho: f64) -> f64 {
    let r = (0.5 * (rho + 1.0)).min(0.85);
    if r > rho {
        r
    } else {
        0.5 * (rho + 1.0)
    }
}

/// Default truncation order for `S`: `4 (n_max + 1) + 64`.
pub fn default_scattering_order(n_max: usize) -> usize {
    4 * (n_max + 1) + 64
}

/// `M^i_n` and `M^e_n` for a fixed degree.
#[derive(Debug, Clone)]
pub struct NeumannOperators {
    pub n: usize,
    pub r: f64,
    tau_sq: f64,
    sigma: LaurentSeries,
    sigma_inv: LaurentSeries,
    order: usize,
}

impl NeumannOperators {
    pub fn new(n: usize, sz: &SzegoData, r: f64) -> Result<Self> {
        if n + ORDER_MARGIN > sz.order() {
            return Err(Error::Truncation { order: sz.order(), degree: n });
        }
        if !(r > sz.rho && r < 1.0) {
            return Err(Error::InvalidParameter(format!("lens radius {r} must lie in (rho, 1) = ({}, 1)", sz.rho)));
        }
        let order = sz.order() + n;
        let s = sz.scattering.chop_tails(SYMBOL_CHOP);
        let s_inv = sz.scattering_inv.chop_tails(SYMBOL_CHOP);
        Ok(NeumannOperators {
            n,
            r,
            tau_sq: sz.tau * sz.tau,
            sigma: s.shift(n as i64, order),
            sigma_inv: s_inv.shift(-(n as i64), order),
            order,
        })
    }

    fn split(&self, h: &LaurentSeries, inner_scale: f64, outer_scale: f64, radius: f64) -> PiecewiseSeries {
        PiecewiseSeries {
            inner: h
                .riesz_project(Part::Plus)
                .scale(Complex64::new(inner_scale, 0.0))
                .with_annulus(Annulus { inner: 0.0, outer: radius }),
            outer: h
                .riesz_project(Part::Minus)
                .scale(Complex64::new(outer_scale, 0.0))
                .with_annulus(Annulus { inner: radius, outer: f64::INFINITY }),
            circle_radius: radius,
        }
    }

    /// `M^i_n(f)`: inner `-tau^{-2} P_+(sigma_n f)`, outer `tau^{-2} P_-(sigma_n f)`, split at `r`.
    pub fn interior(&self, f: &LaurentSeries) -> Result<PiecewiseSeries> {
        let h = self.sigma.convolve(&f.clone().with_annulus(Annulus::everywhere()), self.order)?;
        let t = 1.0 / self.tau_sq;
        Ok(self.split(&h, -t, t, self.r))
    }

    /// `M^e_n(f)`: inner `tau^2 P_+(sigma_n^{-1} f)`, outer `-tau^2 P_-(sigma_n^{-1} f)`, split at `1/r`.
    pub fn exterior(&self, f: &LaurentSeries) -> Result<PiecewiseSeries> {
        let h = self.sigma_inv.convolve(&f.clone().with_annulus(Annulus::everywhere()), self.order)?;
        Ok(self.split(&h, self.tau_sq, -self.tau_sq, 1.0 / self.r))
    }
}

pub fn apply_m_interior(f: &LaurentSeries, n: usize, sz: &SzegoData, r: f64) -> Result<PiecewiseSeries> {
    NeumannOperators::new(n, sz, r)?.interior(f)
}

pub fn apply_m_exterior(f: &LaurentSeries, n: usize, sz: &SzegoData, r: f64) -> Result<PiecewiseSeries> {
    NeumannOperators::new(n, sz, r)?.exterior(f)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailBounds {
    pub s11: f64,
    pub s12: f64,
    pub s21: f64,
    pub s22: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SMatrixEntries {
    pub n: usize,
    pub n_terms: usize,
    pub r: f64,
    pub tau: f64,
    /// Split at `1/r`.
    pub s11: PiecewiseSeries,
    /// Split at `r`.
    pub s12: PiecewiseSeries,
    /// Split at `1/r`.
    pub s21: PiecewiseSeries,
    /// Split at `r`.
    pub s22: PiecewiseSeries,
    /// `f^(0) .. f^(2N+1)`
    pub f: Vec<PiecewiseSeries>,
    /// `g^(0) .. g^(2N+1)`
    pub g: Vec<PiecewiseSeries>,
    /// Truncation scale `C r^{(2N+2)n}` or `C r^{(2N+3)n}` with `C = 1`; divide by `||z| - r|`.
    pub tail_bound: TailBounds,
}

/// Metadata for reproducibility manifests.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SMatrixSummary {
    pub n: usize,
    pub r: f64,
    pub n_terms: usize,
    pub tail_bound: TailBounds,
}

impl SMatrixEntries {
    pub fn summary(&self) -> SMatrixSummary {
        SMatrixSummary { n: self.n, r: self.r, n_terms: self.n_terms, tail_bound: self.tail_bound }
    }

    /// `S_22(n; 0) - 1`, summed from the iterates so that no cancellation occurs.
    pub fn s22_correction_at_zero(&self) -> Complex64 {
        self.g.iter().skip(2).step_by(2).map(|g| g.inner.coeff(0)).sum()
    }
}

fn check_growth(iterates: &[PiecewiseSeries], name: &str) -> Result<()> {
    for k in 1..iterates.len().saturating_sub(2) {
        let a = iterates[k].l1_norm();
        let b = iterates[k + 2].l1_norm();
        if a > 1e-280 && b >= a {
            return Err(Error::NonConvergence(format!(
                "Neumann iterate {name}^({}) does not contract (|{name}^({})| = {b:e} >= {a:e})",
                k + 2,
                k + 2
            )));
        }
    }
    Ok(())
}

/// Sums `N_terms` terms of each Neumann series for `S_ij(n; .)`.
pub fn neumann_solve(n: usize, sz: &SzegoData, n_terms: usize, r: f64) -> Result<SMatrixEntries> {
    if n == 0 || n_terms == 0 {
        return Err(Error::InvalidParameter("neumann_solve needs n >= 1 and N_terms >= 1".into()));
    }
    let ops = NeumannOperators::new(n, sz, r)?;
    let one = Complex64::new(1.0, 0.0);
    let count = 2 * n_terms;

    let mut f = vec![PiecewiseSeries::constant(one, 1.0 / r)];
    let mut g = vec![PiecewiseSeries::constant(one, r)];
    for k in 1..count {
        // f alternates M^i on an inner branch and M^e on an outer one; g is the mirror image
        let fk = if k % 2 == 1 { ops.interior(&f[k - 1].inner)? } else { ops.exterior(&f[k - 1].outer)? };
        let gk = if k % 2 == 1 { ops.exterior(&g[k - 1].outer)? } else { ops.interior(&g[k - 1].inner)? };
        f.push(fk);
        g.push(gk);
    }
    check_growth(&f, "f")?;
    check_growth(&g, "g")?;

    let sum = |items: Vec<&PiecewiseSeries>, radius: f64| -> Result<PiecewiseSeries> {
        let mut acc = PiecewiseSeries::constant(Complex64::new(0.0, 0.0), radius);
        for p in items {
            let p = PiecewiseSeries {
                inner: p.inner.clone().with_annulus(acc.inner.annulus()),
                outer: p.outer.clone().with_annulus(acc.outer.annulus()),
                circle_radius: radius,
            };
            acc = acc.add(&p)?;
        }
        Ok(acc)
    };
    let s11 = sum(f.iter().step_by(2).collect(), 1.0 / r)?;
    let s12 = sum(f.iter().skip(1).step_by(2).collect(), r)?;
    let s21 = sum(g.iter().skip(1).step_by(2).collect(), 1.0 / r)?;
    let s22 = sum(g.iter().step_by(2).collect(), r)?;
    let big_n = (n_terms - 1) as f64;
    let nf = n as f64;
    let even = r.powf((2.0 * big_n + 2.0) * nf);
    let odd = r.powf((2.0 * big_n + 3.0) * nf);
    Ok(SMatrixEntries {
        n,
        n_terms,
        r,
        tau: sz.tau,
        s11,
        s12,
        s21,
        s22,
        f,
        g,
        tail_bound: TailBounds { s11: even, s12: odd, s21: odd, s22: even },
    })
}

const REGION_TOL: f64 = 1e-8;

/// `Phi_n(z)` from the region-wise representation.
pub fn reconstruct_phi(e: &SMatrixEntries, sz: &SzegoData, z: Complex64) -> Result<Complex64> {
    let m = z.norm();
    let r = e.r;
    if (m - r).abs() < REGION_TOL || (m - 1.0 / r).abs() < REGION_TOL {
        return Err(Error::AmbiguousRegion(z));
    }
    let tau = e.tau;
    let zn = z.powu(e.n as u32);
    if m > 1.0 / r {
        Ok(zn * sz.d_e(z)? * e.s11.outer.evaluate(z)? / tau)
    } else if m > r {
        let first = zn * sz.d_e(z)? * e.s11.inner.evaluate(z)? / tau;
        let second = tau * e.s12.outer.evaluate(z)? / sz.d_i(z)?;
        Ok(first - second)
    } else {
        Ok(-tau * e.s12.inner.evaluate(z)? / sz.d_i(z)?)
    }
}

/// Two fidelity levels of an estimate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Fidelity {
    /// Closed form in the coefficients of `S`.
    Level1,
    /// From the Neumann series at degree `n + 1`.
    Level2 { n_terms: usize },
}

/// Estimate of `alpha_n`.
pub fn verblunsky_estimate(n: usize, sz: &SzegoData, fidelity: Fidelity, r: f64) -> Result<Complex64> {
    if n + 1 > sz.order() {
        return Err(Error::Truncation { order: sz.order(), degree: n + 1 });
    }
    match fidelity {
        Fidelity::Level1 => Ok(-sz.scattering_inv.coeff(n as i64 + 1)),
        Fidelity::Level2 { n_terms } => {
            let e = neumann_solve(n + 1, sz, n_terms, r)?;
            Ok((sz.tau * sz.tau * e.s12.inner.coeff(0)).conj())
        }
    }
}

/// Estimate of `kappa_n^2`.
pub fn kappa_estimate(n: usize, sz: &SzegoData, fidelity: Fidelity, r: f64) -> Result<f64> {
    let limit = sz.tau * sz.tau / (2.0 * PI);
    Ok(limit * (1.0 + kappa_relative_deficit(n, sz, fidelity, r)?))
}

/// `kappa_n^2 / kappa_inf^2 - 1` as predicted, computed without cancellation.
pub fn kappa_relative_deficit(n: usize, sz: &SzegoData, fidelity: Fidelity, r: f64) -> Result<f64> {
    if n + 1 > sz.order() {
        return Err(Error::Truncation { order: sz.order(), degree: n + 1 });
    }
    match fidelity {
        Fidelity::Level1 => Ok(-sz.negative_tail_energy(n)),
        Fidelity::Level2 { n_terms } => Ok(neumann_solve(n + 1, sz, n_terms, r)?.s22_correction_at_zero().re),
    }
}
