//! Two-sided truncated Laurent series and circle grids.
//!
//! A [`LaurentSeries`] stores coefficients `c_{-K..=K}` together with the
//! annulus in which the represented function is declared analytic. Grids
//! sample on circles `|z| = r` and coefficients are recovered with an FFT.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::Serialize;

use crate::error::{Error, Result};

/// Open annulus `inner < |z| < outer`. `outer` may be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Annulus {
    pub inner: f64,
    pub outer: f64,
}

impl Annulus {
    pub fn new(inner: f64, outer: f64) -> Result<Self> {
        if !(inner >= 0.0 && outer > inner) {
            return Err(Error::InvalidParameter(format!("annulus ({inner}, {outer})")));
        }
        Ok(Annulus { inner, outer })
    }

    pub fn everywhere() -> Self {
        Annulus { inner: 0.0, outer: f64::INFINITY }
    }

    pub fn contains(&self, z: Complex64) -> bool {
        let m = z.norm();
        m > self.inner && m < self.outer
    }

    pub fn intersect(&self, other: &Annulus) -> Result<Annulus> {
        let inner = self.inner.max(other.inner);
        let outer = self.outer.min(other.outer);
        if outer <= inner {
            return Err(Error::DisjointAnnuli(self.inner, self.outer, other.inner, other.outer));
        }
        Ok(Annulus { inner, outer })
    }
}

/// Which half of the coefficient sequence a Riesz projection keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Part {
    /// `k >= 0`
    Plus,
    /// `k < 0`
    Minus,
}

/// Equispaced nodes `radius * exp(2 pi i j / size)` on a circle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CircleGrid {
    pub radius: f64,
    pub size: usize,
}

impl CircleGrid {
    pub fn new(radius: f64, size: usize) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(Error::InvalidParameter(format!("grid radius {radius}")));
        }
        if !size.is_power_of_two() {
            return Err(Error::InvalidParameter(format!("grid size {size} is not a power of two")));
        }
        Ok(CircleGrid { radius, size })
    }

    /// Grid size `max(256, 8 (K + 1))` rounded up to a power of two.
    pub fn default_size(order: usize) -> usize {
        (8 * (order + 1)).max(256).next_power_of_two()
    }

    pub fn for_order(radius: f64, order: usize) -> Result<Self> {
        Self::new(radius, Self::default_size(order))
    }

    pub fn angle(&self, j: usize) -> f64 {
        2.0 * PI * j as f64 / self.size as f64
    }

    pub fn node(&self, j: usize) -> Complex64 {
        Complex64::from_polar(self.radius, self.angle(j))
    }

    pub fn nodes(&self) -> Vec<Complex64> {
        (0..self.size).map(|j| self.node(j)).collect()
    }

    pub fn sample<F: Fn(Complex64) -> Complex64>(&self, f: F) -> Vec<Complex64> {
        (0..self.size).map(|j| f(self.node(j))).collect()
    }
}

/// Forward DFT, `X_k = sum_j x_j e^{-2 pi i jk/N}`.
pub(crate) fn fft_forward(data: &mut [Complex64]) {
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(data.len()).process(data);
}

/// Unnormalized inverse DFT, `x_j = sum_k X_k e^{2 pi i jk/N}`.
pub(crate) fn fft_inverse(data: &mut [Complex64]) {
    let mut planner = FftPlanner::new();
    planner.plan_fft_inverse(data.len()).process(data);
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LaurentSeries {
    coeffs: Vec<Complex64>,
    annulus: Annulus,
    real_on_circle: bool,
}

impl LaurentSeries {
    /// Builds a series from `2K + 1` coefficients ordered `c_{-K}, ..., c_K`.
    pub fn new(coeffs: Vec<Complex64>, annulus: Annulus) -> Result<Self> {
        if coeffs.len() % 2 == 0 {
            return Err(Error::InvalidParameter(format!(
                "coefficient array of even length {}",
                coeffs.len()
            )));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite("Laurent coefficients"));
        }
        Ok(LaurentSeries { coeffs, annulus, real_on_circle: false })
    }

    pub fn zeros(order: usize, annulus: Annulus) -> Self {
        LaurentSeries { coeffs: vec![Complex64::new(0.0, 0.0); 2 * order + 1], annulus, real_on_circle: false }
    }

    pub fn constant(c: Complex64, annulus: Annulus) -> Self {
        LaurentSeries { coeffs: vec![c], annulus, real_on_circle: c.im == 0.0 }
    }

    pub fn from_fn<F: FnMut(i64) -> Complex64>(order: usize, annulus: Annulus, mut f: F) -> Self {
        let k = order as i64;
        let coeffs = (-k..=k).map(&mut f).collect();
        LaurentSeries { coeffs, annulus, real_on_circle: false }
    }

    /// Coefficients `c_k = r^{-k} FFT(samples)_k / N` of samples on `grid`.
    pub fn from_samples(grid: &CircleGrid, samples: &[Complex64], order: usize, annulus: Annulus) -> Result<Self> {
        let n = grid.size;
        if samples.len() != n {
            return Err(Error::InvalidParameter(format!(
                "{} samples for a grid of {} nodes",
                samples.len(),
                n
            )));
        }
        if n < 2 * order + 2 {
            return Err(Error::InsufficientSamples { nodes: n, order });
        }
        if samples.iter().any(|s| !s.is_finite()) {
            return Err(Error::NonFinite("grid samples"));
        }
        let mut buf = samples.to_vec();
        fft_forward(&mut buf);
        let scale = 1.0 / n as f64;
        let k = order as i64;
        let coeffs = (-k..=k)
            .map(|idx| {
                let bin = idx.rem_euclid(n as i64) as usize;
                buf[bin] * scale * grid.radius.powi(-idx as i32)
            })
            .collect();
        Ok(LaurentSeries { coeffs, annulus, real_on_circle: false })
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() / 2
    }

    pub fn annulus(&self) -> Annulus {
        self.annulus
    }

    pub fn is_real_on_circle(&self) -> bool {
        self.real_on_circle
    }

    /// Coefficient `c_k`; zero outside the stored range.
    pub fn coeff(&self, k: i64) -> Complex64 {
        let order = self.order() as i64;
        if k.abs() > order {
            Complex64::new(0.0, 0.0)
        } else {
            self.coeffs[(k + order) as usize]
        }
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn with_annulus(mut self, annulus: Annulus) -> Self {
        self.annulus = annulus;
        self
    }

    /// Enforces `c_{-k} = conj(c_k)` by averaging and tags the series.
    pub fn symmetrized(mut self) -> Self {
        let k = self.order();
        for j in 1..=k {
            let avg = 0.5 * (self.coeffs[k + j] + self.coeffs[k - j].conj());
            self.coeffs[k + j] = avg;
            self.coeffs[k - j] = avg.conj();
        }
        self.coeffs[k] = Complex64::new(self.coeffs[k].re, 0.0);
        self.real_on_circle = true;
        self
    }

    /// Largest `|c_{-k} - conj(c_k)|` over the stored range.
    pub fn symmetry_defect(&self) -> f64 {
        let k = self.order() as i64;
        (0..=k).map(|j| (self.coeff(-j) - self.coeff(j).conj()).norm()).fold(0.0, f64::max)
    }

    /// Zeroes coefficients whose weighted size at radius `r` is below `tol` times the largest.
    ///
    /// Only tail entries (beyond the last significant index on each side) are removed,
    /// which keeps roundoff from being amplified by `r^k` far from the unit circle.
    pub fn chop_tails(&self, tol: f64) -> Self {
        let order = self.order() as i64;
        let max = self.coeffs.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let floor = tol * max;
        let mut out = self.clone();
        if max == 0.0 {
            return out;
        }
        let last_pos = (0..=order).rev().find(|&k| self.coeff(k).norm() > floor).unwrap_or(0);
        let last_neg = (1..=order).rev().find(|&k| self.coeff(-k).norm() > floor).unwrap_or(0);
        for k in (last_pos + 1)..=order {
            out.coeffs[(k + order) as usize] = Complex64::new(0.0, 0.0);
        }
        for k in (last_neg + 1)..=order {
            out.coeffs[(order - k) as usize] = Complex64::new(0.0, 0.0);
        }
        out
    }

    /// Horner evaluation of both one-sided parts.
    pub fn evaluate(&self, z: Complex64) -> Result<Complex64> {
        let order = self.order() as i64;
        let has_negative = (1..=order).any(|k| self.coeff(-k) != Complex64::new(0.0, 0.0));
        if z == Complex64::new(0.0, 0.0) {
            if self.annulus.inner == 0.0 && !has_negative {
                return Ok(self.coeff(0));
            }
            return Err(Error::OutOfDomain { z, inner: self.annulus.inner, outer: self.annulus.outer });
        }
        if !self.annulus.contains(z) {
            return Err(Error::OutOfDomain { z, inner: self.annulus.inner, outer: self.annulus.outer });
        }
        Ok(self.evaluate_unchecked(z))
    }

    pub(crate) fn evaluate_unchecked(&self, z: Complex64) -> Complex64 {
        let order = self.order() as i64;
        let mut plus = Complex64::new(0.0, 0.0);
        for k in (0..=order).rev() {
            plus = plus * z + self.coeff(k);
        }
        if order == 0 {
            return plus;
        }
        let w = z.inv();
        let mut minus = Complex64::new(0.0, 0.0);
        for k in (1..=order).rev() {
            minus = (minus + self.coeff(-k)) * w;
        }
        plus + minus
    }

    /// Values on every node of `grid` via one inverse FFT.
    pub fn sample_on(&self, grid: &CircleGrid) -> Result<Vec<Complex64>> {
        let n = grid.size;
        let order = self.order();
        if n < 2 * order + 1 {
            return Err(Error::InsufficientSamples { nodes: n, order });
        }
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        let k = order as i64;
        for idx in -k..=k {
            let bin = idx.rem_euclid(n as i64) as usize;
            buf[bin] += self.coeff(idx) * grid.radius.powi(idx as i32);
        }
        fft_inverse(&mut buf);
        Ok(buf)
    }

    pub fn riesz_project(&self, part: Part) -> Self {
        let order = self.order() as i64;
        let mut out = self.clone();
        for k in -order..=order {
            let keep = match part {
                Part::Plus => k >= 0,
                Part::Minus => k < 0,
            };
            if !keep {
                out.coeffs[(k + order) as usize] = Complex64::new(0.0, 0.0);
            }
        }
        out.annulus = match part {
            Part::Plus => Annulus { inner: 0.0, outer: self.annulus.outer },
            Part::Minus => Annulus { inner: self.annulus.inner, outer: f64::INFINITY },
        };
        out.real_on_circle = false;
        out
    }

    /// Index range `[lo, hi]` of nonzero coefficients, or `None` for the zero series.
    fn support(&self) -> Option<(i64, i64)> {
        let order = self.order() as i64;
        let zero = Complex64::new(0.0, 0.0);
        let lo = (-order..=order).find(|&k| self.coeff(k) != zero)?;
        let hi = (-order..=order).rev().find(|&k| self.coeff(k) != zero)?;
        Some((lo, hi))
    }

    /// Cauchy product truncated to `[-order_out, order_out]`.
    pub fn convolve(&self, other: &LaurentSeries, order_out: usize) -> Result<LaurentSeries> {
        let annulus = self.annulus.intersect(&other.annulus)?;
        let mut out = LaurentSeries::zeros(order_out, annulus);
        let (Some((alo, ahi)), Some((blo, bhi))) = (self.support(), other.support()) else {
            return Ok(out);
        };
        let ko = order_out as i64;
        for i in alo..=ahi {
            let a = self.coeff(i);
            if a == Complex64::new(0.0, 0.0) {
                continue;
            }
            let jlo = blo.max(-ko - i);
            let jhi = bhi.min(ko - i);
            for j in jlo..=jhi {
                out.coeffs[(i + j + ko) as usize] += a * other.coeff(j);
            }
        }
        Ok(out)
    }

    /// Multiplies by `z^n`, keeping order `order_out`.
    pub fn shift(&self, n: i64, order_out: usize) -> LaurentSeries {
        LaurentSeries::from_fn(order_out, self.annulus, |k| self.coeff(k - n))
    }

    /// Re-indexes to a new truncation order, padding with zeros or dropping tails.
    pub fn resized(&self, order: usize) -> LaurentSeries {
        let mut out = LaurentSeries::from_fn(order, self.annulus, |k| self.coeff(k));
        out.real_on_circle = self.real_on_circle;
        out
    }

    pub fn scale(&self, c: Complex64) -> LaurentSeries {
        let mut out = self.clone();
        for v in &mut out.coeffs {
            *v *= c;
        }
        out.real_on_circle = self.real_on_circle && c.im == 0.0;
        out
    }

    /// Sum of two series; the result has the larger order and the intersected annulus.
    pub fn add(&self, other: &LaurentSeries) -> Result<LaurentSeries> {
        let annulus = self.annulus.intersect(&other.annulus)?;
        let order = self.order().max(other.order());
        Ok(LaurentSeries::from_fn(order, annulus, |k| self.coeff(k) + other.coeff(k)))
    }

    /// `sum |c_k|` — the Wiener-algebra norm on the unit circle.
    pub fn l1_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.norm()).sum()
    }
}
