//! Zeros of polynomials: companion eigenvalues, classification against the critical circle,
//! angular equidistribution statistics and matching of predicted to computed zeros.

use std::f64::consts::PI;

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

const CLUSTER_TOL: f64 = 1e-7;
const NEWTON_STEPS: usize = 3;

/// A root together with how many computed roots collapsed onto it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Cluster {
    pub value: Complex64,
    pub multiplicity: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ZeroSet {
    pub n: usize,
    /// All `n` roots, repeated according to multiplicity.
    pub zeros: Vec<Complex64>,
    pub clusters: Vec<Cluster>,
    /// `max |p(root)|` after refinement.
    pub residual: f64,
}

/// Horner evaluation of `p` and `p'`, coefficients in ascending order.
fn eval_with_derivative(coeffs: &[Complex64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(0.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &c in coeffs.iter().rev() {
        dp = dp * z + p;
        p = p * z + c;
    }
    (p, dp)
}

/// Parlett–Reinsch balancing with radix 2.
fn balance(m: &mut DMatrix<Complex64>) {
    let n = m.nrows();
    let radix = 2.0f64;
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += m[(j, i)].norm();
                    r += m[(i, j)].norm();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut cc = c;
            let mut rr = r;
            while cc < rr / radix {
                cc *= radix;
                rr /= radix;
                f *= radix;
            }
            while cc >= rr * radix {
                cc /= radix;
                rr *= radix;
                f /= radix;
            }
            if (cc + rr) / f < 0.95 * s {
                done = false;
                for j in 0..n {
                    m[(i, j)] /= f;
                    m[(j, i)] *= f;
                }
            }
        }
    }
}

/// Roots of `sum_k coeffs[k] z^k` (ascending order; the leading coefficient must be nonzero).
pub fn roots(coeffs: &[Complex64]) -> Result<ZeroSet> {
    if coeffs.len() < 2 {
        return Err(Error::InvalidParameter("polynomial degree must be at least 1".into()));
    }
    if coeffs.iter().any(|c| !c.is_finite()) {
        return Err(Error::NonFinite("polynomial coefficients"));
    }
    let lead = *coeffs.last().unwrap();
    if lead == Complex64::new(0.0, 0.0) {
        return Err(Error::InvalidParameter("leading coefficient is zero".into()));
    }
    let monic: Vec<Complex64> = coeffs.iter().map(|c| c / lead).collect();
    let n = monic.len() - 1;
    let zero_roots = monic.iter().take_while(|c| **c == Complex64::new(0.0, 0.0)).count();
    let reduced = &monic[zero_roots..];
    let d = reduced.len() - 1;

    let mut found = vec![Complex64::new(0.0, 0.0); zero_roots];
    if d == 1 {
        found.push(-reduced[0]);
    } else if d > 1 {
        let mut m = DMatrix::<Complex64>::zeros(d, d);
        for i in 1..d {
            m[(i, i - 1)] = Complex64::new(1.0, 0.0);
        }
        for i in 0..d {
            m[(i, d - 1)] = -reduced[i];
        }
        balance(&mut m);
        let schur = Schur::try_new(m, f64::EPSILON, 1000 * d)
            .ok_or_else(|| Error::NonConvergence("companion Schur decomposition".into()))?;
        let eig = schur.eigenvalues().ok_or_else(|| Error::NonConvergence("companion eigenvalues".into()))?;
        for mut z in eig.iter().copied() {
            for _ in 0..NEWTON_STEPS {
                let (p, dp) = eval_with_derivative(reduced, z);
                if dp == Complex64::new(0.0, 0.0) {
                    break;
                }
                let candidate = z - p / dp;
                if candidate.is_finite() && eval_with_derivative(reduced, candidate).0.norm() < p.norm() {
                    z = candidate;
                } else {
                    break;
                }
            }
            found.push(z);
        }
    }
    let residual = found.iter().map(|&z| eval_with_derivative(&monic, z).0.norm()).fold(0.0, f64::max);
    Ok(ZeroSet { n, clusters: cluster(&found), zeros: found, residual })
}

fn cluster(zs: &[Complex64]) -> Vec<Cluster> {
    let mut out: Vec<(Complex64, usize)> = Vec::new();
    for &z in zs {
        match out.iter_mut().find(|(c, _)| (*c - z).norm() <= CLUSTER_TOL) {
            Some(entry) => {
                let k = entry.1 as f64;
                entry.0 = (entry.0 * k + z) / (k + 1.0);
                entry.1 += 1;
            }
            None => out.push((z, 1)),
        }
    }
    out.into_iter().map(|(value, multiplicity)| Cluster { value, multiplicity }).collect()
}

/// Default band half-width `0.15 rho`.
pub fn default_margin(rho: f64) -> f64 {
    0.15 * rho
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroClass {
    Interior,
    Band,
    Other,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub rho: f64,
    pub margin: f64,
    pub interior: Vec<Complex64>,
    pub band: Vec<Complex64>,
    pub other: Vec<Complex64>,
    pub mean_band_modulus: Option<f64>,
    /// `max |z| - min |z|` over the band.
    pub modulus_spread: Option<f64>,
    /// Cyclic gaps between band zeros sorted by argument.
    pub sorted_gaps: Vec<f64>,
    /// Set when `rho = 0` or fewer than four zeros fall in the band.
    pub no_band: bool,
}

pub fn class_of(z: Complex64, rho: f64, margin: f64) -> ZeroClass {
    let m = z.norm();
    if (m - rho).abs() <= margin {
        ZeroClass::Band
    } else if m <= rho - margin {
        ZeroClass::Interior
    } else {
        ZeroClass::Other
    }
}

fn cyclic_gaps(zs: &[Complex64]) -> Vec<f64> {
    let mut args: Vec<f64> = zs.iter().map(|z| z.arg()).collect();
    args.sort_by(f64::total_cmp);
    let k = args.len();
    (0..k)
        .map(|i| if i + 1 < k { args[i + 1] - args[i] } else { args[0] + 2.0 * PI - args[k - 1] })
        .collect()
}

pub fn classify(zs: &ZeroSet, rho: f64, margin: f64) -> Classification {
    let mut interior = Vec::new();
    let mut band = Vec::new();
    let mut other = Vec::new();
    for &z in &zs.zeros {
        match class_of(z, rho, margin) {
            ZeroClass::Interior => interior.push(z),
            ZeroClass::Band => band.push(z),
            ZeroClass::Other => other.push(z),
        }
    }
    let no_band = rho == 0.0 || band.len() < 4;
    let (mean, spread) = if band.is_empty() {
        (None, None)
    } else {
        let mods: Vec<f64> = band.iter().map(|z| z.norm()).collect();
        let mean = mods.iter().sum::<f64>() / mods.len() as f64;
        let lo = mods.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = mods.iter().cloned().fold(0.0, f64::max);
        (Some(mean), Some(hi - lo))
    };
    let sorted_gaps = if band.len() >= 2 { cyclic_gaps(&band) } else { Vec::new() };
    Classification {
        rho,
        margin,
        interior,
        band,
        other,
        mean_band_modulus: mean,
        modulus_spread: spread,
        sorted_gaps,
        no_band,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquidistributionReport {
    pub n: usize,
    pub band_count: usize,
    /// `max |gap - 2 pi/n| / (2 pi/n)`.
    pub max_relative_gap_deviation: f64,
    /// Fraction of gaps whose relative deviation is at most `tolerance`.
    pub fraction_within_tolerance: f64,
    pub tolerance: f64,
    /// Mean band modulus minus `rho (1 + log C(n, m-1) / n)`.
    pub modulus_offset: f64,
}

fn log_binomial(n: usize, k: usize) -> f64 {
    (0..k).map(|j| ((n - j) as f64 / (j + 1) as f64).ln()).sum()
}

pub fn equidistribution_check(class: &Classification, n: usize, m: usize, tolerance: f64) -> Result<EquidistributionReport> {
    if class.band.len() < 4 || class.rho == 0.0 {
        return Err(Error::TooFewPoints(format!("no band: {} band zeros", class.band.len())));
    }
    if m == 0 || m > n + 1 {
        return Err(Error::InvalidParameter(format!("multiplicity {m} for degree {n}")));
    }
    let ideal = 2.0 * PI / n as f64;
    let devs: Vec<f64> = class.sorted_gaps.iter().map(|g| (g - ideal).abs() / ideal).collect();
    let max_dev = devs.iter().cloned().fold(0.0, f64::max);
    let within = devs.iter().filter(|&&d| d <= tolerance).count() as f64 / devs.len() as f64;
    let predicted = class.rho * (1.0 + log_binomial(n, m - 1) / n as f64);
    Ok(EquidistributionReport {
        n,
        band_count: class.band.len(),
        max_relative_gap_deviation: max_dev,
        fraction_within_tolerance: within,
        tolerance,
        modulus_offset: class.mean_band_modulus.unwrap_or(f64::NAN) - predicted,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Pair {
    pub predicted: usize,
    pub actual: usize,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Matching {
    pub pairs: Vec<Pair>,
    pub unmatched_predicted: Vec<usize>,
    pub unmatched_actual: Vec<usize>,
}

impl Matching {
    pub fn total_distance(&self) -> f64 {
        self.pairs.iter().map(|p| p.distance).sum()
    }
}

const EXACT_LIMIT: usize = 12;

/// Pairs every element of the shorter list with a distinct element of the longer one.
///
/// Optimal (minimum total distance) when the shorter list has at most 12 entries,
/// greedy closest-pair-first otherwise.
pub fn match_zeros(predicted: &[Complex64], actual: &[Complex64]) -> Matching {
    let swap = predicted.len() > actual.len();
    let (short, long) = if swap { (actual, predicted) } else { (predicted, actual) };
    let assigned: Vec<(usize, usize)> = if short.len() <= EXACT_LIMIT {
        exact_assignment(short, long)
    } else {
        greedy_assignment(short, long)
    };
    let mut pairs: Vec<Pair> = assigned
        .into_iter()
        .map(|(s, l)| {
            let (p, a) = if swap { (l, s) } else { (s, l) };
            Pair { predicted: p, actual: a, distance: (predicted[p] - actual[a]).norm() }
        })
        .collect();
    pairs.sort_by_key(|p| p.predicted);
    let unmatched_predicted = (0..predicted.len()).filter(|i| !pairs.iter().any(|p| p.predicted == *i)).collect();
    let unmatched_actual = (0..actual.len()).filter(|i| !pairs.iter().any(|p| p.actual == *i)).collect();
    Matching { pairs, unmatched_predicted, unmatched_actual }
}

fn exact_assignment(short: &[Complex64], long: &[Complex64]) -> Vec<(usize, usize)> {
    let s = short.len();
    let full = (1usize << s) - 1;
    let states = 1usize << s;
    // best[i][mask]: minimal cost having seen i elements of `long` and used `mask` of `short`
    let mut best = vec![vec![f64::INFINITY; states]; long.len() + 1];
    best[0][0] = 0.0;
    for (i, &l) in long.iter().enumerate() {
        for mask in 0..states {
            let cur = best[i][mask];
            if !cur.is_finite() {
                continue;
            }
            if cur < best[i + 1][mask] {
                best[i + 1][mask] = cur;
            }
            for (j, &sv) in short.iter().enumerate() {
                if mask & (1 << j) == 0 {
                    let next = mask | (1 << j);
                    let cost = cur + (sv - l).norm();
                    if cost < best[i + 1][next] {
                        best[i + 1][next] = cost;
                    }
                }
            }
        }
    }
    let mut out = Vec::with_capacity(s);
    let mut mask = full;
    for i in (0..long.len()).rev() {
        let cur = best[i + 1][mask];
        if best[i][mask] == cur {
            continue;
        }
        for j in 0..s {
            if mask & (1 << j) != 0 {
                let prev = mask & !(1 << j);
                if best[i][prev] + (short[j] - long[i]).norm() == cur {
                    out.push((j, i));
                    mask = prev;
                    break;
                }
            }
        }
    }
    out
}

fn greedy_assignment(short: &[Complex64], long: &[Complex64]) -> Vec<(usize, usize)> {
    let mut cand: Vec<(f64, usize, usize)> = Vec::with_capacity(short.len() * long.len());
    for (i, &a) in short.iter().enumerate() {
        for (j, &b) in long.iter().enumerate() {
            cand.push(((a - b).norm(), i, j));
        }
    }
    cand.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut used_s = vec![false; short.len()];
    let mut used_l = vec![false; long.len()];
    let mut out = Vec::new();
    for (_, i, j) in cand {
        if !used_s[i] && !used_l[j] {
            used_s[i] = true;
            used_l[j] = true;
            out.push((i, j));
        }
    }
    out
}

/// Ascending coefficients of `prod (z - r_k)`.
pub fn poly_from_roots(rs: &[Complex64]) -> Vec<Complex64> {
    let mut p = vec![Complex64::new(1.0, 0.0)];
    for &r in rs {
        let mut next = vec![Complex64::new(0.0, 0.0); p.len() + 1];
        for (k, &c) in p.iter().enumerate() {
            next[k + 1] += c;
            next[k] -= r * c;
        }
        p = next;
    }
    p
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn monomial_has_n_fold_root_at_origin() {
        let mut p = vec![c(0.0, 0.0); 7];
        p.push(c(1.0, 0.0));
        let zs = roots(&p).unwrap();
        assert_eq!(zs.zeros.len(), 7);
        assert_eq!(zs.clusters.len(), 1);
        assert_eq!(zs.clusters[0].multiplicity, 7);
        assert_eq!(zs.residual, 0.0);
    }

    #[test]
    fn linear_and_errors() {
        let zs = roots(&[c(0.4, 0.0), c(1.0, 0.0)]).unwrap();
        assert!((zs.zeros[0] + 0.4).norm() < 1e-16);
        assert!(roots(&[c(1.0, 0.0)]).is_err());
        assert!(roots(&[c(1.0, 0.0), c(0.0, 0.0)]).is_err());
        assert!(roots(&[c(f64::NAN, 0.0), c(1.0, 0.0)]).is_err());
    }

    #[test]
    fn round_trip_degree_eight() {
        let known: Vec<Complex64> = (0..8).map(|k| Complex64::from_polar(0.3 + 0.08 * k as f64, 0.9 * k as f64 + 0.2)).collect();
        let zs = roots(&poly_from_roots(&known)).unwrap();
        let m = match_zeros(&known, &zs.zeros);
        assert_eq!(m.pairs.len(), 8);
        assert!(m.pairs.iter().all(|p| p.distance < 1e-9));
    }

    #[test]
    fn vieta_and_residual_on_degree_sixty() {
        let known: Vec<Complex64> = (0..60).map(|k| Complex64::from_polar(0.5 * (1.0 + 0.002 * k as f64), 0.1047 * k as f64 + 0.01)).collect();
        let p = poly_from_roots(&known);
        let zs = roots(&p).unwrap();
        let sum: Complex64 = zs.zeros.iter().sum();
        assert!((sum + p[59]).norm() < 1e-8);
        let scale = p.iter().map(|c| c.norm()).fold(0.0, f64::max);
        assert!(zs.residual <= 1e-8 * scale);
    }

    #[test]
    fn classification_and_gaps() {
        let n = 20;
        let zs: Vec<Complex64> = (0..n).map(|k| Complex64::from_polar(0.5, 2.0 * PI * k as f64 / n as f64)).collect();
        let set = ZeroSet { n, zeros: zs, clusters: Vec::new(), residual: 0.0 };
        let cl = classify(&set, 0.5, default_margin(0.5));
        assert_eq!(cl.band.len(), 20);
        assert!(cl.interior.is_empty());
        let rep = equidistribution_check(&cl, n, 1, 0.15).unwrap();
        assert!(rep.max_relative_gap_deviation < 1e-12);
        assert_eq!(rep.fraction_within_tolerance, 1.0);
        assert!(rep.modulus_offset.abs() < 1e-15);
        let origin = ZeroSet { n: 5, zeros: vec![c(0.0, 0.0); 5], clusters: Vec::new(), residual: 0.0 };
        let cl = classify(&origin, 0.0, 0.0);
        assert!(cl.no_band);
        assert!(equidistribution_check(&cl, 5, 1, 0.15).is_err());
    }

    #[test]
    fn matching_reports_surplus() {
        let p = [c(0.0, 0.0)];
        let a = [c(0.3, 0.0), c(0.05, 0.0), c(-1.0, 0.0)];
        let m = match_zeros(&p, &a);
        assert_eq!(m.pairs, vec![Pair { predicted: 0, actual: 1, distance: 0.05 }]);
        assert_eq!(m.unmatched_actual, vec![0, 2]);
        let m = match_zeros(&a, &p);
        assert_eq!(m.pairs[0].predicted, 1);
        assert_eq!(m.unmatched_predicted, vec![0, 2]);
    }

    #[test]
    fn exact_beats_greedy() {
        let p = [c(0.0, 0.0), c(1.0, 0.0)];
        let a = [c(0.6, 0.0), c(-0.45, 0.0)];
        let exact = match_zeros(&p, &a);
        let greedy = greedy_assignment(&p, &a);
        let greedy_cost: f64 = greedy.iter().map(|&(i, j)| (p[i] - a[j]).norm()).sum();
        assert!(exact.total_distance() <= greedy_cost);
        assert!((exact.total_distance() - 0.85).abs() < 1e-15);
    }

    fn sorted(mut v: Vec<f64>) -> Vec<f64> {
        v.sort_by(f64::total_cmp);
        v
    }

    proptest! {
        #[test]
        fn identical_lists_match_exactly(pts in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..10)) {
            let zs: Vec<Complex64> = pts.iter().map(|&(a, b)| c(a, b)).collect();
            let m = match_zeros(&zs, &zs);
            prop_assert!(m.pairs.iter().all(|p| p.distance == 0.0));
        }

        #[test]
        fn matching_is_permutation_invariant(
            pts in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2..9),
            other in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2..9),
            rot in 0usize..8,
        ) {
            let p: Vec<Complex64> = pts.iter().map(|&(a, b)| c(a, b)).collect();
            let a: Vec<Complex64> = other.iter().map(|&(x, y)| c(x, y)).collect();
            let mut q = p.clone();
            q.rotate_left(rot % p.len());
            q.reverse();
            let d1 = sorted(match_zeros(&p, &a).pairs.iter().map(|x| x.distance).collect());
            let d2 = sorted(match_zeros(&q, &a).pairs.iter().map(|x| x.distance).collect());
            let s1: f64 = d1.iter().sum();
            let s2: f64 = d2.iter().sum();
            prop_assert!((s1 - s2).abs() < 1e-12);
        }

        #[test]
        fn conjugate_symmetric_roots(re in prop::collection::vec(-0.9f64..0.9, 1..5), pairs in prop::collection::vec((-0.9f64..0.9, 0.05f64..0.9), 1..5)) {
            let mut known: Vec<Complex64> = re.iter().map(|&x| c(x, 0.0)).collect();
            for &(a, b) in &pairs {
                known.push(c(a, b));
                known.push(c(a, -b));
            }
            let mut p = poly_from_roots(&known);
            for v in &mut p {
                v.im = 0.0;
            }
            let zs = roots(&p).unwrap();
            for z in &zs.zeros {
                let partner = zs.zeros.iter().map(|w| (w - z.conj()).norm()).fold(f64::INFINITY, f64::min);
                prop_assert!(partner < 1e-6);
            }
        }
    }
}
