//! Szegő functions, the scattering function `S = D_i D_e`, and their
//! modifications for weights with zeros on the circle.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::laurent::{Annulus, CircleGrid, LaurentSeries};
use crate::weights::{
    annulus_for, estimate_rho, log_weight_coefficients, AnalyticWeightSpec, LogContinuation, ZeroModifiedWeightSpec,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Interior,
    Exterior,
}

const TAIL_CHOP: f64 = 1e-17;

#[derive(Debug, Clone)]
pub struct SzegoData {
    pub log_weight: LaurentSeries,
    pub tau: f64,
    pub geometric_mean: f64,
    pub scattering: LaurentSeries,
    pub scattering_inv: LaurentSeries,
    pub rho: f64,
    pub continuation: Option<LogContinuation>,
    log_weight_chopped: LaurentSeries,
}

/// Builds `S` and `1/S` to order `order` from the coefficients of `log w`.
pub fn scattering(log_weight: &LaurentSeries, order: usize) -> Result<SzegoData> {
    let l0 = log_weight.coeff(0).re;
    let exponent = LaurentSeries::from_fn(log_weight.order(), Annulus::everywhere(), |k| match k.signum() {
        1 => log_weight.coeff(k),
        -1 => -log_weight.coeff(k),
        _ => Complex64::new(0.0, 0.0),
    });
    let size = CircleGrid::default_size(order).max((2 * log_weight.order() + 2).next_power_of_two());
    let grid = CircleGrid::new(1.0, size)?;
    let e = exponent.sample_on(&grid)?;
    if e.iter().any(|v| !v.is_finite() || v.re.abs() > 700.0) {
        return Err(Error::Overflow);
    }
    let rho = log_weight.annulus().inner;
    let annulus = annulus_for(rho);
    let s: Vec<Complex64> = e.iter().map(|v| v.exp()).collect();
    let s_inv: Vec<Complex64> = e.iter().map(|v| (-v).exp()).collect();
    let scattering = LaurentSeries::from_samples(&grid, &s, order, annulus)?;
    let scattering_inv = LaurentSeries::from_samples(&grid, &s_inv, order, annulus)?;
    Ok(SzegoData {
        log_weight: log_weight.clone(),
        tau: (-l0 / 2.0).exp(),
        geometric_mean: l0.exp(),
        scattering,
        scattering_inv,
        rho,
        continuation: None,
        log_weight_chopped: log_weight.chop_tails(TAIL_CHOP),
    })
}

impl SzegoData {
    /// Full pipeline for an analytic weight: `log w` coefficients, `S`, `1/S`,
    /// and the declared continuation when available.
    pub fn from_weight(spec: &AnalyticWeightSpec, order: usize) -> Result<SzegoData> {
        let l_order = order.max(256);
        let grid = CircleGrid::default_size(l_order).max(2048);
        let l = log_weight_coefficients(spec, l_order, grid)?;
        let rho = spec.rho_declared.unwrap_or_else(|| estimate_rho(&l, None).rho);
        let l = l.with_annulus(annulus_for(rho));
        let mut d = scattering(&l, order)?;
        d.continuation = spec.continuation.clone();
        Ok(d)
    }

    pub fn order(&self) -> usize {
        self.scattering.order()
    }

    /// `L_0/2 + h_+(z)` from the continuation or the truncated series.
    fn log_di(&self, z: Complex64) -> Complex64 {
        let l0 = self.log_weight.coeff(0).re;
        match &self.continuation {
            Some(c) => 0.5 * l0 + (c.plus)(z),
            None => {
                let l = &self.log_weight_chopped;
                let mut acc = Complex64::new(0.0, 0.0);
                for k in (1..=l.order() as i64).rev() {
                    acc = (acc + l.coeff(k)) * z;
                }
                0.5 * l0 + acc
            }
        }
    }

    /// `-L_0/2 - h_-(z)`.
    fn log_de(&self, z: Complex64) -> Complex64 {
        let l0 = self.log_weight.coeff(0).re;
        match &self.continuation {
            Some(c) => -0.5 * l0 - c.minus(z),
            None => {
                let l = &self.log_weight_chopped;
                let w = z.inv();
                let mut acc = Complex64::new(0.0, 0.0);
                for k in (1..=l.order() as i64).rev() {
                    acc = (acc + l.coeff(-k)) * w;
                }
                -0.5 * l0 - acc
            }
        }
    }

    /// `D_i(w; z)` for `|z| < 1/rho` or `D_e(w; z)` for `|z| > rho`.
    pub fn szego_function(&self, z: Complex64, side: Side) -> Result<Complex64> {
        if !z.is_finite() {
            return Err(Error::NonFinite("evaluation point"));
        }
        let m = z.norm();
        match side {
            Side::Interior => {
                if self.rho > 0.0 && m >= 1.0 / self.rho {
                    return Err(Error::OutOfDomain { z, inner: 0.0, outer: 1.0 / self.rho });
                }
                Ok(self.log_di(z).exp())
            }
            Side::Exterior => {
                if m <= self.rho || m == 0.0 {
                    return Err(Error::OutOfDomain { z, inner: self.rho, outer: f64::INFINITY });
                }
                Ok(self.log_de(z).exp())
            }
        }
    }

    pub fn d_i(&self, z: Complex64) -> Result<Complex64> {
        self.szego_function(z, Side::Interior)
    }

    pub fn d_e(&self, z: Complex64) -> Result<Complex64> {
        self.szego_function(z, Side::Exterior)
    }

    fn require_continuation(&self) -> Result<&LogContinuation> {
        self.continuation
            .as_ref()
            .ok_or_else(|| Error::MissingMetadata("closed-form continuation of log w".into()))
    }

    /// `D_i` continued past `|z| = 1/rho` through the declared continuation.
    pub fn d_i_continued(&self, z: Complex64) -> Result<Complex64> {
        self.require_continuation()?;
        Ok(self.log_di(z).exp())
    }

    /// `D_e` continued inside `|z| = rho` through the declared continuation.
    pub fn d_e_continued(&self, z: Complex64) -> Result<Complex64> {
        self.require_continuation()?;
        Ok(self.log_de(z).exp())
    }

    /// `log S(w; z)` through the declared continuation (imaginary part modulo `2 pi`).
    pub fn log_scattering_continued(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.require_continuation()?.log_scattering(z))
    }

    pub fn scattering_continued(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.log_scattering_continued(z)?.exp())
    }

    /// `S(w; z)` in the annulus `rho < |z| < 1/rho`.
    pub fn scattering_at(&self, z: Complex64) -> Result<Complex64> {
        if self.continuation.is_some() {
            if self.rho > 0.0 && !(z.norm() > self.rho && z.norm() < 1.0 / self.rho) {
                return Err(Error::OutOfDomain { z, inner: self.rho, outer: 1.0 / self.rho });
            }
            return self.scattering_continued(z);
        }
        Ok(self.d_i(z)? * self.d_e(z)?)
    }

    /// `sum_k S_{k+m} conj(S_k) - delta_{m0}`.
    pub fn parseval_defect(&self, m: i64) -> Complex64 {
        let k = self.order() as i64;
        let mut acc = Complex64::new(0.0, 0.0);
        for j in -k..=k {
            acc += self.scattering.coeff(j + m) * self.scattering.coeff(j).conj();
        }
        if m == 0 {
            acc -= 1.0;
        }
        acc
    }

    /// `sum_{k <= -n-1} |S_k|^2`, the tail that separates `kappa_n^2` from its limit.
    pub fn negative_tail_energy(&self, n: usize) -> f64 {
        let k = self.order() as i64;
        (n as i64 + 1..=k).map(|j| self.scattering.coeff(-j).norm_sqr()).sum()
    }
}

/// Branch-fixed `log(z - a)` with argument in `(arg a - 2 pi, arg a)`.
fn log_branch(z: Complex64, a: Complex64) -> Option<Complex64> {
    let v = z - a;
    if v.norm() == 0.0 {
        return None;
    }
    let phi = (v / a).arg();
    let arg = a.arg() + phi - if phi > 0.0 { 2.0 * PI } else { 0.0 };
    Some(Complex64::new(v.norm().ln(), arg))
}

const CUT_TOL: f64 = 1e-10;

fn on_cut(z: Complex64, a: Complex64) -> bool {
    let v = (z - a) / a;
    v.norm() == 0.0 || (v.arg().abs() < CUT_TOL && v.re > 0.0)
}

/// One-sided limits defining a constant `theta_k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThetaConstant {
    pub value: Complex64,
    pub from_positive_side: Complex64,
    pub from_negative_side: Complex64,
    pub discrepancy: f64,
}

#[derive(Debug, Clone)]
pub struct ModifiedSzegoData {
    pub base: SzegoData,
    pub spec: ZeroModifiedWeightSpec,
    /// `q(0)^2 = prod (-a_k)^{beta_k}`.
    pub q0_sq: Complex64,
    pub theta: Vec<ThetaConstant>,
    pub delta: f64,
}

impl ModifiedSzegoData {
    pub fn new(spec: &ZeroModifiedWeightSpec, base: SzegoData) -> Result<Self> {
        let points = spec.points();
        let mut min_gap = f64::INFINITY;
        for (i, a) in points.iter().enumerate() {
            for b in &points[i + 1..] {
                min_gap = min_gap.min((a - b).norm());
            }
        }
        let delta = 0.1f64.min(min_gap / 3.0).min(1.0 - base.rho - 0.01);
        let mut out = ModifiedSzegoData {
            base,
            spec: spec.clone(),
            q0_sq: Complex64::new(1.0, 0.0),
            theta: Vec::new(),
            delta,
        };
        out.q0_sq = out.log_q_sq(Complex64::new(0.0, 0.0))?.exp();
        out.theta = out.theta_constants()?;
        Ok(out)
    }

    /// `log q(z)^2 = sum beta_k log(z - a_k)` on the fixed branch.
    fn log_q_sq(&self, z: Complex64) -> Result<Complex64> {
        let mut acc = Complex64::new(0.0, 0.0);
        for cz in &self.spec.zeros {
            if cz.beta == 0.0 {
                continue;
            }
            let a = cz.point();
            if on_cut(z, a) {
                return Err(Error::CutAmbiguity(z));
            }
            acc += cz.beta * log_branch(z, a).ok_or(Error::CutAmbiguity(z))?;
        }
        Ok(acc)
    }

    pub fn modified_szego(&self, z: Complex64, side: Side) -> Result<Complex64> {
        match side {
            Side::Interior => {
                let di = self.base.szego_function(z, Side::Interior)?;
                Ok(di * (self.log_q_sq(z)? - self.log_q_sq(Complex64::new(0.0, 0.0))?).exp())
            }
            Side::Exterior => {
                let de = self.base.szego_function(z, Side::Exterior)?;
                let reflected = self.log_q_sq(z.conj().inv())?.exp().conj();
                Ok(de / (self.q0_sq * reflected))
            }
        }
    }

    /// `S(W; z)` for `z` in the annulus off every cut.
    pub fn scattering(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.modified_szego(z, Side::Interior)? * self.modified_szego(z, Side::Exterior)?)
    }

    /// `S(W; z)` on the unit circle, where both cut systems meet only at the `a_k`.
    fn scattering_on_circle(&self, z: Complex64) -> Result<Complex64> {
        let sw = self.base.scattering.evaluate(z)?;
        let q = self.log_q_sq(z)?;
        let q_reflected = self.log_q_sq(z.conj().inv())?.conj();
        Ok(sw * (q - q_reflected).exp() / (self.q0_sq * self.q0_sq))
    }

    fn theta_constants(&self) -> Result<Vec<ThetaConstant>> {
        let eps = self.delta * 1e-5;
        let mut out = Vec::with_capacity(self.spec.zeros.len());
        for (idx, cz) in self.spec.zeros.iter().enumerate() {
            let a = cz.point();
            let plus = Complex64::from_polar(1.0, PI * cz.beta);
            let minus = plus.conj();
            let side = |sign: f64, e: f64| -> Result<Complex64> {
                let z = a * Complex64::from_polar(1.0, sign * e);
                let phase = if sign > 0.0 { plus } else { minus };
                Ok(phase * self.scattering_on_circle(z)?)
            };
            let richardson = |sign: f64| -> Result<Complex64> { Ok(2.0 * side(sign, eps / 2.0)? - side(sign, eps)?) };
            let p = richardson(1.0)?;
            let m = richardson(-1.0)?;
            let discrepancy = (p - m).norm();
            if discrepancy > 1e-6 {
                return Err(Error::BranchConfiguration { index: idx + 1, discrepancy });
            }
            let v = 0.5 * (p + m);
            out.push(ThetaConstant { value: v / v.norm(), from_positive_side: p, from_negative_side: m, discrepancy });
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::{bernstein_szego, essential, inverse_essential, lebesgue, rational_modulus, zero_modified, CircleZero, Weight};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn bs2() -> SzegoData {
        SzegoData::from_weight(&bernstein_szego(c(2.0, 0.0)).unwrap(), 64).unwrap()
    }

    fn bs2_series_only() -> SzegoData {
        let mut d = bs2();
        d.continuation = None;
        d
    }

    #[test]
    fn lebesgue_is_trivial() {
        let d = SzegoData::from_weight(&lebesgue(), 16).unwrap();
        assert_eq!(d.tau, 1.0);
        assert!((d.scattering.coeff(0) - 1.0).norm() < 1e-15);
        for k in 1..=16 {
            assert!(d.scattering.coeff(k).norm() < 1e-15 && d.scattering.coeff(-k).norm() < 1e-15);
        }
        let z = c(0.3, 0.2);
        assert!((d.d_i(z).unwrap() - 1.0).norm() < 1e-15);
        assert!((d.d_e(z).unwrap() - 1.0).norm() < 1e-15);
    }

    #[test]
    fn bernstein_szego_closed_forms() {
        for d in [bs2(), bs2_series_only()] {
            assert!((d.d_i(c(0.4, 0.0)).unwrap() - 0.8).norm() < 1e-12);
            assert!((d.d_e(c(2.0, 0.0)).unwrap() - 4.0 / 3.0).norm() < 1e-12);
            let lhs = d.d_i(c(3.0, 0.0).conj().inv()).unwrap().conj();
            assert!((lhs - 1.0 / d.d_e(c(3.0, 0.0)).unwrap()).norm() < 1e-10);
            assert!((d.tau - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn scattering_coefficients_of_bernstein_szego() {
        // 1/S = (2z - 1)/(z (2 - z)) = -1/(2z) + (3/4)/(1 - z/2)
        let d = bs2();
        for k in 0..=40 {
            assert!((d.scattering_inv.coeff(k) - 0.75 * 0.5f64.powi(k as i32)).norm() < 1e-13);
        }
        assert!((d.scattering_inv.coeff(-1) + 0.5).norm() < 1e-13);
        for k in 2..=40 {
            assert!(d.scattering_inv.coeff(-k).norm() < 1e-13);
        }
        for k in -64..=64 {
            assert!((d.scattering_inv.coeff(k) - d.scattering.coeff(-k).conj()).norm() < 1e-13);
        }
    }

    #[test]
    fn unimodular_on_circle() {
        let d = bs2();
        for j in 0..64 {
            let z = Complex64::from_polar(1.0, 2.0 * PI * j as f64 / 64.0);
            assert!((d.scattering.evaluate(z).unwrap().norm() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn parseval_family() {
        let d = bs2();
        for m in -2..=2 {
            assert!(d.parseval_defect(m).norm() < 1e-8);
        }
        assert!((d.tau * d.tau - 1.0 / d.geometric_mean).abs() < 1e-12);
    }

    #[test]
    fn domain_errors() {
        let d = bs2_series_only();
        assert!(d.d_i(c(2.5, 0.0)).is_err());
        assert!(d.d_e(c(0.3, 0.0)).is_err());
        assert!(d.d_i_continued(c(0.1, 0.0)).is_err());
    }

    #[test]
    fn boundary_identities_on_catalog() {
        let weights = [
            lebesgue(),
            bernstein_szego(c(2.0, 0.0)).unwrap(),
            bernstein_szego(c(1.2, 1.1)).unwrap(),
            rational_modulus(&[(c(2.0, 0.0), 1), (c(-2.0, 0.0), 1)]).unwrap(),
            essential(0.5).unwrap(),
            inverse_essential(0.5).unwrap(),
        ];
        for w in &weights {
            let mut d = SzegoData::from_weight(w, 128).unwrap();
            for with_cont in [true, false] {
                if !with_cont {
                    d.continuation = None;
                }
                for j in 0..128 {
                    let t = 2.0 * PI * (j as f64 + 0.5) / 128.0;
                    let z = Complex64::from_polar(1.0, t);
                    let wv = w.value(t);
                    let de = d.d_e(z).unwrap();
                    let di = d.d_i(z).unwrap();
                    assert!((wv * de.norm_sqr() - 1.0).abs() < 1e-9, "{}", w.label);
                    assert!((di / de - wv).norm() < 1e-9 * wv.max(1.0), "{}", w.label);
                }
            }
        }
    }

    #[test]
    fn modified_reduces_to_base_when_beta_vanishes() {
        let base = bernstein_szego(c(2.0, 0.0)).unwrap();
        let spec = zero_modified(base.clone(), vec![CircleZero { angle: 1.0, beta: 0.0 }]).unwrap();
        let sz = SzegoData::from_weight(&base, 64).unwrap();
        let m = ModifiedSzegoData::new(&spec, sz.clone()).unwrap();
        let z = c(0.3, -0.4);
        assert_eq!(m.modified_szego(z, Side::Interior).unwrap(), sz.d_i(z).unwrap());
        let z = c(1.3, 0.4);
        assert_eq!(m.modified_szego(z, Side::Exterior).unwrap(), sz.d_e(z).unwrap());
        let a = Complex64::from_polar(1.0, 1.0);
        assert!((m.theta[0].value - sz.scattering.evaluate(a).unwrap()).norm() < 1e-9);
    }

    fn single_zero(beta: f64) -> ModifiedSzegoData {
        let spec = zero_modified(lebesgue(), vec![CircleZero { angle: 0.0, beta }]).unwrap();
        ModifiedSzegoData::new(&spec, SzegoData::from_weight(&lebesgue(), 16).unwrap()).unwrap()
    }

    #[test]
    fn single_zero_normalisation_and_jumps() {
        let m = single_zero(0.5);
        assert!((m.modified_szego(c(0.0, 0.0), Side::Interior).unwrap() - 1.0).norm() < 1e-15);
        assert!((m.q0_sq.norm() - 1.0).abs() < 1e-15);
        // tau = D_e(W; infinity)
        assert!((m.modified_szego(c(1e9, 0.0), Side::Exterior).unwrap() - 1.0).norm() < 1e-8);
        let e = 1e-9;
        let up = m.modified_szego(Complex64::from_polar(1.2, e), Side::Interior).unwrap();
        let down = m.modified_szego(Complex64::from_polar(1.2, -e), Side::Interior).unwrap();
        assert!((up / down + 1.0).norm() < 1e-7);
        let up = m.modified_szego(Complex64::from_polar(0.8, e), Side::Exterior).unwrap();
        let down = m.modified_szego(Complex64::from_polar(0.8, -e), Side::Exterior).unwrap();
        assert!((up / down + 1.0).norm() < 1e-7);
        assert!(matches!(m.modified_szego(c(1.2, 0.0), Side::Interior), Err(Error::CutAmbiguity(_))));
        assert!(matches!(m.modified_szego(c(0.8, 0.0), Side::Exterior), Err(Error::CutAmbiguity(_))));
    }

    #[test]
    fn theta_constants_are_unimodular() {
        for beta in [0.25, 0.5, 1.3] {
            let m = single_zero(beta);
            let t = m.theta[0];
            assert!((t.from_positive_side.norm() - 1.0).abs() < 1e-10);
            assert!(t.discrepancy < 1e-6);
        }
        let spec = zero_modified(
            lebesgue(),
            vec![CircleZero { angle: 0.0, beta: 0.5 }, CircleZero { angle: PI, beta: 0.5 }],
        )
        .unwrap();
        let m = ModifiedSzegoData::new(&spec, SzegoData::from_weight(&lebesgue(), 16).unwrap()).unwrap();
        assert!((m.theta[0].value - 1.0).norm() < 1e-6);
        assert!((m.theta[1].value - 1.0).norm() < 1e-6);
    }

    #[test]
    fn modified_boundary_factorisation() {
        let base = bernstein_szego(c(2.0, 0.0)).unwrap();
        let spec = zero_modified(
            base.clone(),
            vec![CircleZero { angle: 0.3, beta: 0.7 }, CircleZero { angle: 2.5, beta: 0.25 }],
        )
        .unwrap();
        let m = ModifiedSzegoData::new(&spec, SzegoData::from_weight(&base, 64).unwrap()).unwrap();
        for j in 0..50 {
            let t = 2.0 * PI * (j as f64 + 0.37) / 50.0;
            let z = Complex64::from_polar(1.0, t);
            let ratio = m.modified_szego(z, Side::Interior).unwrap() / m.modified_szego(z, Side::Exterior).unwrap();
            assert!((ratio - spec.value(t)).norm() < 1e-10);
        }
    }
}
