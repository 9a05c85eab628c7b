//! Orthogonality weights on the unit circle.
//!
//! An analytic weight is a pointwise evaluator `theta -> w(e^{i theta})` plus
//! optional metadata: the Nevai–Totik radius, the singularities of `D_e`, and
//! a closed-form continuation of `h_+(z) = sum_{k>=1} L_k z^k`. Zero-modified
//! weights multiply a base weight by `prod |z - a_k|^{2 beta_k}`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::laurent::{Annulus, CircleGrid, LaurentSeries};

pub trait Weight: Send + Sync {
    fn value(&self, theta: f64) -> f64;
}

pub type ComplexMap = Arc<dyn Fn(Complex64) -> Complex64 + Send + Sync>;

/// Closed-form continuation of the positive-index part of `log w`.
#[derive(Clone)]
pub struct LogContinuation {
    /// `L_0`, the mean of `log w` on the circle.
    pub log_mean: f64,
    /// `h_+(z) = sum_{k>=1} L_k z^k`, defined modulo `2 pi i` off the disk `|z| < 1/rho`.
    pub plus: ComplexMap,
}

impl LogContinuation {
    /// `h_-(z) = sum_{k>=1} L_{-k} z^{-k} = conj(h_+(1/conj z))`.
    pub fn minus(&self, z: Complex64) -> Complex64 {
        (self.plus)(z.conj().inv()).conj()
    }

    /// `log S(w; z) = h_+(z) - h_-(z)`.
    pub fn log_scattering(&self, z: Complex64) -> Complex64 {
        (self.plus)(z) - self.minus(z)
    }
}

impl fmt::Debug for LogContinuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LogContinuation").field("log_mean", &self.log_mean).finish_non_exhaustive()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SingularityKind {
    Pole,
    Essential,
}

/// A singularity of `D_e(w; .)` inside the unit disk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Singularity {
    pub location: Complex64,
    pub kind: SingularityKind,
    pub multiplicity: u32,
    /// `lim (z - a)^m D_e(w; z)` for poles.
    pub de_coefficient: Option<Complex64>,
}

/// Complex parameter accepted either as a bare number or as `[re, im]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ComplexParam {
    Real(f64),
    Pair([f64; 2]),
}

impl ComplexParam {
    pub fn value(&self) -> Complex64 {
        match *self {
            ComplexParam::Real(x) => Complex64::new(x, 0.0),
            ComplexParam::Pair([re, im]) => Complex64::new(re, im),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalFactor {
    pub c: ComplexParam,
    #[serde(default = "one")]
    pub multiplicity: u32,
}

fn one() -> u32 {
    1
}

/// A zero `a = e^{i angle}` of order `2 beta` on the unit circle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircleZero {
    pub angle: f64,
    pub beta: f64,
}

impl CircleZero {
    pub fn point(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.angle)
    }
}

/// Serializable description of a catalog weight.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WeightDef {
    Lebesgue,
    BernsteinSzego { c: ComplexParam },
    RationalModulus { factors: Vec<RationalFactor> },
    Essential { rho: f64 },
    InverseEssential { rho: f64 },
    ZeroModified { base: Box<WeightDef>, zeros: Vec<CircleZero> },
}

/// Either kind of weight the toolkit handles.
#[derive(Debug, Clone)]
pub enum WeightSpec {
    Analytic(AnalyticWeightSpec),
    ZeroModified(ZeroModifiedWeightSpec),
}

impl WeightSpec {
    pub fn from_def(def: &WeightDef) -> Result<Self> {
        match def {
            WeightDef::ZeroModified { base, zeros } => {
                let base = match Self::from_def(base)? {
                    WeightSpec::Analytic(a) => a,
                    WeightSpec::ZeroModified(_) => {
                        return Err(Error::InvalidParameter("nested zero modification".into()))
                    }
                };
                Ok(WeightSpec::ZeroModified(zero_modified(base, zeros.clone())?))
            }
            WeightDef::Lebesgue => Ok(WeightSpec::Analytic(lebesgue())),
            WeightDef::BernsteinSzego { c } => Ok(WeightSpec::Analytic(bernstein_szego(c.value())?)),
            WeightDef::RationalModulus { factors } => {
                let f: Vec<(Complex64, u32)> = factors.iter().map(|f| (f.c.value(), f.multiplicity)).collect();
                Ok(WeightSpec::Analytic(rational_modulus(&f)?))
            }
            WeightDef::Essential { rho } => Ok(WeightSpec::Analytic(essential(*rho)?)),
            WeightDef::InverseEssential { rho } => Ok(WeightSpec::Analytic(inverse_essential(*rho)?)),
        }
    }

    pub fn base(&self) -> &AnalyticWeightSpec {
        match self {
            WeightSpec::Analytic(a) => a,
            WeightSpec::ZeroModified(z) => &z.base,
        }
    }
}

impl Weight for WeightSpec {
    fn value(&self, theta: f64) -> f64 {
        match self {
            WeightSpec::Analytic(a) => a.value(theta),
            WeightSpec::ZeroModified(z) => z.value(theta),
        }
    }
}

#[derive(Clone)]
pub struct AnalyticWeightSpec {
    pub label: String,
    evaluator: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    pub rho_declared: Option<f64>,
    pub singularities: Vec<Singularity>,
    pub continuation: Option<LogContinuation>,
    /// Set for the essential family: `+1` for `w`, `-1` for `1/w`.
    pub essential_sign: Option<f64>,
}

impl fmt::Debug for AnalyticWeightSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AnalyticWeightSpec")
            .field("label", &self.label)
            .field("rho_declared", &self.rho_declared)
            .field("singularities", &self.singularities)
            .field("continuation", &self.continuation.is_some())
            .finish()
    }
}

impl AnalyticWeightSpec {
    /// A weight known only through its values on the circle.
    pub fn custom<F>(label: impl Into<String>, evaluator: F) -> Self
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        AnalyticWeightSpec {
            label: label.into(),
            evaluator: Arc::new(evaluator),
            rho_declared: None,
            singularities: Vec::new(),
            continuation: None,
            essential_sign: None,
        }
    }

    pub fn with_rho(mut self, rho: f64) -> Self {
        self.rho_declared = Some(rho);
        self
    }
}

impl Weight for AnalyticWeightSpec {
    fn value(&self, theta: f64) -> f64 {
        (self.evaluator)(theta)
    }
}

#[derive(Debug, Clone)]
pub struct ZeroModifiedWeightSpec {
    pub base: AnalyticWeightSpec,
    pub zeros: Vec<CircleZero>,
}

impl ZeroModifiedWeightSpec {
    pub fn points(&self) -> Vec<Complex64> {
        self.zeros.iter().map(CircleZero::point).collect()
    }

    pub fn beta_square_sum(&self) -> f64 {
        self.zeros.iter().map(|z| z.beta * z.beta).sum()
    }
}

impl Weight for ZeroModifiedWeightSpec {
    fn value(&self, theta: f64) -> f64 {
        let log_mod: f64 = self
            .zeros
            .iter()
            .map(|z| 2.0 * z.beta * (2.0 * ((theta - z.angle) / 2.0).sin()).abs().ln())
            .sum();
        self.base.value(theta) * log_mod.exp()
    }
}

pub fn lebesgue() -> AnalyticWeightSpec {
    let mut w = AnalyticWeightSpec::custom("lebesgue", |_| 1.0);
    w.rho_declared = Some(0.0);
    w.continuation = Some(LogContinuation { log_mean: 0.0, plus: Arc::new(|_| Complex64::new(0.0, 0.0)) });
    w
}

/// `w(z) = |1 - z/c|^2`, `|c| > 1`.
pub fn bernstein_szego(c: Complex64) -> Result<AnalyticWeightSpec> {
    let mut w = rational_modulus(&[(c, 1)])?;
    w.label = format!("bernstein_szego({c})");
    Ok(w)
}

/// `w(z) = prod_j |1 - z/c_j|^{2 m_j}`, every `|c_j| > 1`.
pub fn rational_modulus(factors: &[(Complex64, u32)]) -> Result<AnalyticWeightSpec> {
    if factors.is_empty() {
        return Err(Error::InvalidParameter("rational modulus weight needs at least one factor".into()));
    }
    for &(c, m) in factors {
        if !(c.norm() > 1.0) || !c.is_finite() {
            return Err(Error::InvalidParameter(format!("factor parameter {c} must satisfy |c| > 1")));
        }
        if m == 0 {
            return Err(Error::InvalidParameter("factor multiplicity must be positive".into()));
        }
    }
    let fs: Vec<(Complex64, u32)> = factors.to_vec();
    let eval_fs = fs.clone();
    let evaluator = move |theta: f64| {
        let z = Complex64::from_polar(1.0, theta);
        eval_fs.iter().map(|&(c, m)| (1.0 - z / c).norm_sqr().powi(m as i32)).product()
    };
    let plus_fs = fs.clone();
    let plus = move |z: Complex64| -> Complex64 {
        plus_fs.iter().map(|&(c, m)| m as f64 * (1.0 - z / c).ln()).sum()
    };
    let poles: Vec<(Complex64, u32)> = fs.iter().map(|&(c, m)| (c.conj().inv(), m)).collect();
    let rho = poles.iter().map(|(a, _)| a.norm()).fold(0.0, f64::max);
    let singularities = poles
        .iter()
        .enumerate()
        .map(|(j, &(a, m))| {
            // D_e(z) = prod_i (z / (z - a_i))^{m_i}
            let mut coef = a.powi(m as i32);
            for (i, &(b, mb)) in poles.iter().enumerate() {
                if i != j {
                    coef *= (a / (a - b)).powi(mb as i32);
                }
            }
            Singularity { location: a, kind: SingularityKind::Pole, multiplicity: m, de_coefficient: Some(coef) }
        })
        .collect();
    let label = format!("rational_modulus({})", fs.len());
    Ok(AnalyticWeightSpec {
        label,
        evaluator: Arc::new(evaluator),
        rho_declared: Some(rho),
        singularities,
        continuation: Some(LogContinuation { log_mean: 0.0, plus: Arc::new(plus) }),
        essential_sign: None,
    })
}

fn essential_family(rho: f64, sign: f64) -> Result<AnalyticWeightSpec> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::InvalidParameter(format!("rho = {rho} must lie in (0, 1)")));
    }
    let evaluator = move |theta: f64| {
        let z = Complex64::from_polar(1.0, theta);
        (sign * 2.0 * (1.0 / (rho - z)).re).exp()
    };
    let plus = move |z: Complex64| sign * z / (rho * z - 1.0);
    let label = if sign > 0.0 { format!("essential({rho})") } else { format!("inverse_essential({rho})") };
    Ok(AnalyticWeightSpec {
        label,
        evaluator: Arc::new(evaluator),
        rho_declared: Some(rho),
        singularities: vec![Singularity {
            location: Complex64::new(rho, 0.0),
            kind: SingularityKind::Essential,
            multiplicity: 1,
            de_coefficient: None,
        }],
        continuation: Some(LogContinuation { log_mean: 0.0, plus: Arc::new(plus) }),
        essential_sign: Some(sign),
    })
}

/// `w(z) = |exp(1/(rho - z))|^2`.
pub fn essential(rho: f64) -> Result<AnalyticWeightSpec> {
    essential_family(rho, 1.0)
}

/// Reciprocal of [`essential`].
pub fn inverse_essential(rho: f64) -> Result<AnalyticWeightSpec> {
    essential_family(rho, -1.0)
}

pub fn zero_modified(base: AnalyticWeightSpec, zeros: Vec<CircleZero>) -> Result<ZeroModifiedWeightSpec> {
    for z in &zeros {
        if !(z.beta >= 0.0) || !z.angle.is_finite() {
            return Err(Error::InvalidParameter(format!("circle zero {z:?}")));
        }
    }
    for (i, a) in zeros.iter().enumerate() {
        for b in &zeros[i + 1..] {
            if (a.point() - b.point()).norm() < 1e-12 {
                return Err(Error::InvalidParameter("circle zeros must be distinct".into()));
            }
        }
    }
    Ok(ZeroModifiedWeightSpec { base, zeros })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeightDiagnostics {
    pub min_value: f64,
    pub argmin_angle: f64,
    pub winding_number: i64,
    /// Largest negative excursion of the weight (0 for a positive weight).
    pub positivity_defect: f64,
    pub positive: bool,
}

impl WeightDiagnostics {
    pub fn is_valid(&self) -> bool {
        self.positive && self.winding_number == 0
    }
}

pub fn validate(weight: &dyn Weight, grid_size: usize) -> Result<WeightDiagnostics> {
    if grid_size < 64 {
        return Err(Error::InvalidParameter(format!("validation grid of {grid_size} < 64 nodes")));
    }
    let mut min_value = f64::INFINITY;
    let mut argmin_angle = 0.0;
    let mut total_turn = 0.0;
    let mut prev_arg: Option<f64> = None;
    let mut first_arg = 0.0;
    for j in 0..grid_size {
        let theta = 2.0 * PI * j as f64 / grid_size as f64;
        let v = weight.value(theta);
        if !v.is_finite() {
            return Err(Error::NonFinite("weight sample"));
        }
        if v < min_value {
            min_value = v;
            argmin_angle = theta;
        }
        let arg = Complex64::new(v, 0.0).arg();
        match prev_arg {
            Some(p) => total_turn += wrap_angle(arg - p),
            None => first_arg = arg,
        }
        prev_arg = Some(arg);
    }
    if let Some(p) = prev_arg {
        total_turn += wrap_angle(first_arg - p);
    }
    Ok(WeightDiagnostics {
        min_value,
        argmin_angle,
        winding_number: (total_turn / (2.0 * PI)).round() as i64,
        positivity_defect: (-min_value).max(0.0),
        positive: min_value > 0.0,
    })
}

fn wrap_angle(a: f64) -> f64 {
    (a + PI).rem_euclid(2.0 * PI) - PI
}

/// Laurent coefficients `L_k` of `log w` on the unit circle, symmetrized.
///
/// The annulus is `(rho, 1/rho)` with the declared radius when present,
/// otherwise with the estimate from the coefficients themselves.
pub fn log_weight_coefficients(spec: &AnalyticWeightSpec, order: usize, grid_size: usize) -> Result<LaurentSeries> {
    let grid = CircleGrid::new(1.0, grid_size)?;
    let mut samples = Vec::with_capacity(grid_size);
    for j in 0..grid_size {
        let v = spec.value(grid.angle(j));
        if !v.is_finite() {
            return Err(Error::NonFinite("weight sample"));
        }
        if v <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "weight is not positive at angle {}",
                grid.angle(j)
            )));
        }
        samples.push(Complex64::new(v.ln(), 0.0));
    }
    let l = LaurentSeries::from_samples(&grid, &samples, order, Annulus::everywhere())?.symmetrized();
    let rho = match spec.rho_declared {
        Some(r) => r,
        None => estimate_rho(&l, None).rho,
    };
    Ok(l.with_annulus(annulus_for(rho)))
}

pub(crate) fn annulus_for(rho: f64) -> Annulus {
    if rho > 0.0 {
        Annulus { inner: rho, outer: 1.0 / rho }
    } else {
        Annulus::everywhere()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RhoEstimate {
    /// Declared radius when available, otherwise the estimate.
    pub rho: f64,
    pub estimate: f64,
    pub declared: Option<f64>,
    pub entire: bool,
}

/// Decay-rate estimate of the Nevai–Totik radius from `|L_k|`.
///
/// Fits `log|L_k| = a + b k + c log k` over the upper half of the indices whose
/// coefficients clear the noise floor; the `log k` term absorbs algebraic prefactors.
pub fn estimate_rho(log_weight: &LaurentSeries, declared: Option<f64>) -> RhoEstimate {
    let order = log_weight.order() as i64;
    let mags: Vec<(i64, f64)> = (1..=order).map(|k| (k, log_weight.coeff(k).norm())).collect();
    let max = mags.iter().map(|&(_, m)| m).fold(0.0, f64::max);
    let floor = (1e-13 * max).max(1e-15);
    let reliable: Vec<(i64, f64)> = mags.into_iter().filter(|&(_, m)| m > floor).collect();
    let entire_result = |declared: Option<f64>| RhoEstimate {
        rho: declared.unwrap_or(0.0),
        estimate: 0.0,
        declared,
        entire: true,
    };
    if reliable.len() < 3 {
        return entire_result(declared);
    }
    let k_max = reliable.last().map(|&(k, _)| k).unwrap_or(0);
    let mut window: Vec<(i64, f64)> = reliable.iter().copied().filter(|&(k, _)| 2 * k >= k_max).collect();
    if window.len() < 4 {
        window = reliable;
    }
    let with_log = window.len() >= 4;
    let cols = if with_log { 3 } else { 2 };
    let design = DMatrix::from_fn(window.len(), cols, |i, j| match j {
        0 => 1.0,
        1 => window[i].0 as f64,
        _ => (window[i].0 as f64).ln(),
    });
    let rhs = DVector::from_iterator(window.len(), window.iter().map(|&(_, m)| m.ln()));
    let slope = design
        .clone()
        .svd(true, true)
        .solve(&rhs, 1e-14)
        .map(|sol| sol[1])
        .unwrap_or(f64::NEG_INFINITY);
    let estimate = slope.exp().min(1.0);
    RhoEstimate { rho: declared.unwrap_or(estimate), estimate, declared, entire: false }
}
