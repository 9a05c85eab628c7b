use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use super::partial_fraction_roots;
use crate::error::{Error, Result};
use crate::szego::SzegoData;
use crate::weights::{AnalyticWeightSpec, Singularity, SingularityKind};

const MODULUS_TIE: f64 = 1e-9;
const RESIDUE_NODES: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Pole {
    pub location: Complex64,
    pub multiplicity: u32,
    /// `lim_{z -> a} (z - a)^m D_e(w; z)`.
    pub de_coefficient: Complex64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PolePrescription {
    pub poles: Vec<Pole>,
    /// Indices into `poles` of the dominant subset, the first one being `a_1`.
    pub dominant: Vec<usize>,
    /// Common modulus of the dominant poles.
    pub rho: f64,
    pub ell: usize,
    /// Multiplicity shared by the dominant poles.
    pub m: u32,
    /// `(arg a_k - arg a_1) / 2 pi` for the dominant poles.
    pub theta_args: Vec<f64>,
}

impl PolePrescription {
    pub fn new(poles: Vec<Pole>) -> Result<Self> {
        for p in &poles {
            if !(p.location.norm() < 1.0) || p.multiplicity == 0 || !p.de_coefficient.is_finite() {
                return Err(Error::InvalidParameter(format!("invalid pole {p:?}")));
            }
        }
        let rho = poles.iter().map(|p| p.location.norm()).fold(0.0, f64::max);
        let top: Vec<usize> =
            (0..poles.len()).filter(|&i| poles[i].location.norm() >= rho * (1.0 - MODULUS_TIE)).collect();
        let m = top.iter().map(|&i| poles[i].multiplicity).max().unwrap_or(0);
        let dominant: Vec<usize> = top.into_iter().filter(|&i| poles[i].multiplicity == m).collect();
        let arg1 = dominant.first().map(|&i| poles[i].location.arg()).unwrap_or(0.0);
        let theta_args = dominant.iter().map(|&i| (poles[i].location.arg() - arg1) / (2.0 * PI)).collect();
        Ok(PolePrescription { ell: dominant.len(), poles, dominant, rho, m, theta_args })
    }

    /// Pole data declared by a weight; weights without singularities give an empty prescription.
    pub fn from_spec(spec: &AnalyticWeightSpec) -> Result<Self> {
        Self::from_singularities(&spec.singularities)
    }

    pub fn from_singularities(sing: &[Singularity]) -> Result<Self> {
        let mut poles = Vec::with_capacity(sing.len());
        for s in sing {
            if s.kind != SingularityKind::Pole {
                return Err(Error::MissingMetadata("pole data (weight has a non-polar singularity)".into()));
            }
            let de_coefficient = s
                .de_coefficient
                .ok_or_else(|| Error::MissingMetadata(format!("D_e coefficient at {}", s.location)))?;
            poles.push(Pole { location: s.location, multiplicity: s.multiplicity, de_coefficient });
        }
        Self::new(poles)
    }

    pub fn dominant_poles(&self) -> impl Iterator<Item = &Pole> {
        self.dominant.iter().map(move |&i| &self.poles[i])
    }

    /// Whether `theta_k` is a rational number with denominator at most `max_den`, for each dominant pole.
    pub fn theta_is_rational(&self, max_den: u32) -> Vec<bool> {
        self.theta_args
            .iter()
            .map(|&t| (1..=max_den).any(|q| ((t * q as f64) - (t * q as f64).round()).abs() < 1e-9))
            .collect()
    }

    fn require_dominant(&self) -> Result<()> {
        if self.ell == 0 {
            return Err(Error::MissingMetadata("dominant pole data".into()));
        }
        Ok(())
    }
}

fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    (0..k).fold(1.0, |acc, j| acc * (n - j) as f64 / (j + 1) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ResidueForm {
    /// Interior form for `|z| < rho/2`, annulus form otherwise.
    Auto,
    Interior,
    Annulus,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResiduePrediction {
    pub value: Complex64,
    pub form: ResidueForm,
}

/// `(D_i(0)/D_i(z)) sum_k res_{t=a_k} S(t) t^n / (t - z)`, plus `z^n D_e(z)/tau` in the annulus form.
///
/// Residues come from a 64-point trapezoid rule on circles of radius `min(delta/2, 0.05)`,
/// `delta` being the distance from `a_k` to the nearest other pole or to `z`.
pub fn residue_predictor(
    p: &PolePrescription,
    sz: &SzegoData,
    n: usize,
    z: Complex64,
    form: ResidueForm,
) -> Result<ResiduePrediction> {
    let form = match form {
        ResidueForm::Auto if z.norm() < 0.5 * p.rho => ResidueForm::Interior,
        ResidueForm::Auto => ResidueForm::Annulus,
        f => f,
    };
    let mut total = Complex64::new(0.0, 0.0);
    for (k, pole) in p.poles.iter().enumerate() {
        let a = pole.location;
        let dz = (z - a).norm();
        if dz < 1e-8 {
            return Err(Error::NearSingularity(z));
        }
        let sep = p
            .poles
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != k)
            .map(|(_, q)| (q.location - a).norm())
            .fold(dz, f64::min);
        let radius = (0.5 * sep).min(0.05);
        let mut acc = Complex64::new(0.0, 0.0);
        for j in 0..RESIDUE_NODES {
            let e = Complex64::from_polar(radius, 2.0 * PI * (j as f64 + 0.5) / RESIDUE_NODES as f64);
            let t = a + e;
            let s = sz.scattering_continued(t)?;
            acc += s * t.powu(n as u32) / (t - z) * e;
        }
        total += acc / RESIDUE_NODES as f64;
    }
    let mut value = if p.poles.is_empty() { total } else { total * sz.d_i(Complex64::new(0.0, 0.0))? / sz.d_i(z)? };
    if form == ResidueForm::Annulus {
        let de = if sz.continuation.is_some() { sz.d_e_continued(z)? } else { sz.d_e(z)? };
        value += z.powu(n as u32) * de / sz.tau;
    }
    Ok(ResiduePrediction { value, form })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DominantPolePrediction {
    /// Predicted `Phi_n(z)`.
    pub value: Complex64,
    /// `sum_k e^{2 pi i (n-m+1) theta_k} D_i(a_k) D^_e(a_k) / (a_k - z)`, equal to
    /// `value * tau * D_i(z) * a_1^{-(n-m+1)} / C(n, m-1)`.
    pub normalized: Complex64,
}

fn dominant_weights(p: &PolePrescription, sz: &SzegoData, n: usize) -> Result<Vec<(Complex64, Complex64)>> {
    p.require_dominant()?;
    let m = p.m as usize;
    if n + 1 < m {
        return Err(Error::InvalidParameter(format!("degree {n} below pole multiplicity {m}")));
    }
    let e = (n + 1 - m) as f64;
    p.dominant
        .iter()
        .zip(&p.theta_args)
        .map(|(&i, &theta)| {
            let pole = &p.poles[i];
            let phase = Complex64::from_polar(1.0, 2.0 * PI * e * theta);
            Ok((pole.location, phase * sz.d_i(pole.location)? * pole.de_coefficient))
        })
        .collect()
}

/// Dominant-pole predictor `(D_i(0)/D_i(z)) sum_k C(n, m-1) a_k^{n-m+1} D_i(a_k) D^_e(a_k) / (a_k - z)`.
pub fn dominant_pole_phi(p: &PolePrescription, sz: &SzegoData, n: usize, z: Complex64, eps: f64) -> Result<DominantPolePrediction> {
    let terms = dominant_weights(p, sz, n)?;
    if terms.iter().any(|(a, _)| (a - z).norm() < eps) {
        return Err(Error::NearSingularity(z));
    }
    let normalized: Complex64 = terms.iter().map(|(a, c)| c / (a - z)).sum();
    let a1 = terms[0].0;
    let m = p.m as u64;
    let scale = binomial(n as u64, m - 1) * a1.powu((n as u64 + 1 - m) as u32);
    let value = normalized * scale * sz.d_i(Complex64::new(0.0, 0.0))? / sz.d_i(z)?;
    Ok(DominantPolePrediction { value, normalized })
}

/// Zeros of the dominant-pole predictor: at most `ell - 1` of them.
pub fn dominant_pole_zeros(p: &PolePrescription, sz: &SzegoData, n: usize) -> Result<Vec<Complex64>> {
    let terms = dominant_weights(p, sz, n)?;
    let a: Vec<Complex64> = terms.iter().map(|t| t.0).collect();
    let c: Vec<Complex64> = terms.iter().map(|t| t.1).collect();
    partial_fraction_roots(&c, &a)
}

/// `alpha_n ~ -sum_k C(n+1, m-1) conj(a_k^{n-m+1} D_i(a_k) D^_e(a_k))` over the dominant poles.
pub fn verblunsky_pole_asymptote(p: &PolePrescription, sz: &SzegoData, n: usize) -> Result<Complex64> {
    p.require_dominant()?;
    let m = p.m as u64;
    if n as u64 + 1 < m {
        return Err(Error::InvalidParameter(format!("degree {n} below pole multiplicity {m}")));
    }
    let b = binomial(n as u64 + 1, m - 1);
    let mut acc = Complex64::new(0.0, 0.0);
    for pole in p.dominant_poles() {
        let a = pole.location;
        acc += (a.powu((n as u64 + 1 - m) as u32) * sz.d_i(a)? * pole.de_coefficient).conj();
    }
    Ok(-b * acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{moments, szego_recurrence, OpucResult};
    use crate::weights::{bernstein_szego, essential, lebesgue, rational_modulus};
    use crate::zeros::roots;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn setup(spec: &AnalyticWeightSpec, n_max: usize) -> (PolePrescription, SzegoData, OpucResult) {
        let sz = SzegoData::from_weight(spec, 128).unwrap();
        let o = szego_recurrence(&moments(spec, n_max, 4096).unwrap(), n_max).unwrap();
        (PolePrescription::from_spec(spec).unwrap(), sz, o)
    }

    #[test]
    fn lebesgue_predicts_nothing_inside() {
        let spec = lebesgue();
        let (p, sz, _) = setup(&spec, 4);
        assert_eq!(p.ell, 0);
        let r = residue_predictor(&p, &sz, 10, c(0.3, 0.1), ResidueForm::Interior).unwrap();
        assert_eq!(r.value, c(0.0, 0.0));
        assert!(dominant_pole_phi(&p, &sz, 5, c(0.1, 0.0), 1e-3).is_err());
    }

    #[test]
    fn essential_weight_has_no_pole_data() {
        assert!(matches!(PolePrescription::from_spec(&essential(0.5).unwrap()), Err(Error::MissingMetadata(_))));
    }

    #[test]
    fn dominance_rules() {
        let pole = |re: f64, im: f64, m: u32| Pole { location: c(re, im), multiplicity: m, de_coefficient: c(1.0, 0.0) };
        let p = PolePrescription::new(vec![pole(0.5, 0.0, 1), pole(-0.5, 0.0, 2), pole(0.2, 0.0, 3)]).unwrap();
        assert_eq!((p.ell, p.m, p.dominant.clone()), (1, 2, vec![1]));
        let p = PolePrescription::new(vec![pole(0.5, 0.0, 1), pole(0.0, 0.5, 1), pole(-0.5, 0.0, 1)]).unwrap();
        assert_eq!(p.ell, 3);
        assert!((p.theta_args[1] - 0.25).abs() < 1e-15 && (p.theta_args[2] - 0.5).abs() < 1e-15);
        assert!(p.theta_is_rational(8).iter().all(|&b| b));
    }

    #[test]
    fn interior_residue_matches_oracle() {
        let spec = bernstein_szego(c(2.0, 0.0)).unwrap();
        let (p, sz, o) = setup(&spec, 20);
        let z = c(0.2, 0.0);
        let r = residue_predictor(&p, &sz, 12, z, ResidueForm::Auto).unwrap();
        assert_eq!(r.form, ResidueForm::Interior);
        let closed = (1.0 / (1.0 - 0.1)) * 0.375 * 0.5f64.powi(12) / (0.5 - 0.2);
        assert!((r.value - closed).norm() < 1e-12 * closed);
        let want = o.phi(12, z);
        assert!((r.value - want).norm() <= 1e-3 * want.norm());
    }

    #[test]
    fn annulus_residue_matches_oracle() {
        let spec = bernstein_szego(c(2.0, 0.0)).unwrap();
        let (p, sz, o) = setup(&spec, 20);
        let z = c(0.45, 0.0);
        let r = residue_predictor(&p, &sz, 16, z, ResidueForm::Auto).unwrap();
        assert_eq!(r.form, ResidueForm::Annulus);
        let want = o.phi(16, z);
        assert!((r.value - want).norm() <= 1e-3 * want.norm());
        assert!(residue_predictor(&p, &sz, 16, c(0.5, 0.0), ResidueForm::Auto).is_err());
    }

    #[test]
    fn quadrature_residues_equal_closed_forms() {
        for cc in [1.5, 2.0, 3.0] {
            let spec = bernstein_szego(c(cc, 0.0)).unwrap();
            let (p, sz, _) = setup(&spec, 4);
            let a = 1.0 / cc;
            for (n, z) in [(5usize, c(0.1, 0.05)), (9, c(-0.2, 0.0)), (14, c(0.0, 0.15))] {
                let q = residue_predictor(&p, &sz, n, z, ResidueForm::Interior).unwrap().value;
                let d = dominant_pole_phi(&p, &sz, n, z, 1e-6).unwrap().value;
                let want = (1.0 / (1.0 - z / cc)) * (1.0 - a * a) * a.powi(n as i32 + 1) / (a - z);
                assert!((q - want).norm() < 1e-9 * want.norm(), "c={cc}");
                assert!((d - want).norm() < 1e-12 * want.norm(), "c={cc}");
            }
        }
    }

    #[test]
    fn dominant_prediction_at_origin() {
        let spec = bernstein_szego(c(2.0, 0.0)).unwrap();
        let (p, sz, o) = setup(&spec, 20);
        let d = dominant_pole_phi(&p, &sz, 10, c(0.0, 0.0), 1e-6).unwrap();
        assert!((d.value.re - 0.75 * 2f64.powi(-10)).abs() < 1e-15);
        let want = o.phi(10, c(0.0, 0.0));
        assert!((d.value - want).norm() <= 1e-6 * want.norm());
        assert!(dominant_pole_zeros(&p, &sz, 10).unwrap().is_empty());
    }

    #[test]
    fn normalized_form_is_rescaled_raw_form() {
        let spec = rational_modulus(&[(c(1.6, 1.2), 2), (c(-2.0, 0.0), 1)]).unwrap();
        let sz = SzegoData::from_weight(&spec, 64).unwrap();
        let p = PolePrescription::from_spec(&spec).unwrap();
        assert_eq!((p.ell, p.m), (1, 2));
        for n in [6usize, 11] {
            for z in [c(0.1, 0.2), c(-0.3, 0.1)] {
                let d = dominant_pole_phi(&p, &sz, n, z, 1e-6).unwrap();
                let a1 = p.poles[p.dominant[0]].location;
                let back = d.value * sz.tau * sz.d_i(z).unwrap() / a1.powu(n as u32 - 1) / binomial(n as u64, 1);
                assert!((back - d.normalized).norm() < 1e-12 * d.normalized.norm());
            }
        }
    }

    #[test]
    fn pole_verblunsky_asymptote() {
        let spec = bernstein_szego(c(2.0, 0.0)).unwrap();
        let (p, sz, o) = setup(&spec, 24);
        for n in 0..20 {
            let v = verblunsky_pole_asymptote(&p, &sz, n).unwrap();
            let closed = -0.75 * 0.5f64.powi(n as i32 + 1);
            assert!((v - closed).norm() < 1e-14 * closed.abs());
            let level1 = -sz.scattering_inv.coeff(n as i64 + 1);
            assert!((v - level1).norm() < 1e-15);
            let gap = (o.alpha[n] - v).norm();
            assert!(gap <= 2.0 * 4f64.powi(-(n as i32) - 2) * v.norm() + 1e-16, "n={n}");
        }
    }

    #[test]
    fn symmetric_poles_alternate_with_parity() {
        let spec = rational_modulus(&[(c(2.0, 0.0), 1), (c(-2.0, 0.0), 1)]).unwrap();
        let (p, sz, o) = setup(&spec, 32);
        assert_eq!(p.ell, 2);
        for n in 10..=30 {
            let predicted = dominant_pole_zeros(&p, &sz, n).unwrap();
            let oracle = roots(&o.phi_monic[n]).unwrap();
            let inner: Vec<_> = oracle.zeros.iter().filter(|z| z.norm() <= 0.3).collect();
            if n % 2 == 1 {
                assert_eq!(predicted.len(), 1);
                assert!(predicted[0].norm() < 1e-12);
                assert_eq!(inner.len(), 1, "n={n}");
                assert!((inner[0] - predicted[0]).norm() < 1e-8);
            } else {
                assert!(predicted.is_empty());
                assert!(inner.is_empty(), "n={n}");
            }
        }
    }
}
