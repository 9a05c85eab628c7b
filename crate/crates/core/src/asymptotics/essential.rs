use std::collections::HashMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::szego::SzegoData;
use crate::zeros::roots;

/// Saddle points of `(n+1) log t + log S(w; t)` for `w = |exp(1/(rho - z))|^{2s}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SaddleData {
    pub rho: f64,
    pub n: usize,
    /// `+1` for the essential weight, `-1` for its reciprocal.
    pub sign: f64,
    pub t_plus: Complex64,
    pub t_minus: Complex64,
    pub residual_plus: f64,
    pub residual_minus: f64,
}

impl SaddleData {
    /// `1/t - s/(n+1) (1/(rho t - 1)^2 + 1/(t - rho)^2)`.
    pub fn equation(&self, t: Complex64) -> Complex64 {
        saddle_equation(self.rho, self.n, self.sign, t)
    }

    /// `Psi_n(t) = log t + (1/n) log S(w; t)`.
    pub fn psi(&self, sz: &SzegoData, t: Complex64) -> Result<Complex64> {
        Ok(t.ln() + sz.log_scattering_continued(t)? / self.n as f64)
    }

    /// Right-hand side `(1/n) log(rho^{3/4} / (2 sqrt(pi) n^{3/4}))` of the level-curve equation.
    pub fn level(&self) -> f64 {
        let n = self.n as f64;
        (self.rho.powf(0.75) / (2.0 * PI.sqrt() * n.powf(0.75))).ln() / n
    }

    /// `Re(Psi_n(z) - Psi_n(t_+)) - level`; the level curve is its zero set.
    pub fn level_function(&self, sz: &SzegoData, z: Complex64) -> Result<f64> {
        Ok(self.psi(sz, z)?.re - self.psi(sz, self.t_plus)?.re - self.level())
    }
}

fn saddle_equation(rho: f64, n: usize, s: f64, t: Complex64) -> Complex64 {
    let a = rho * t - 1.0;
    let b = t - rho;
    t.inv() - s / (n as f64 + 1.0) * ((a * a).inv() + (b * b).inv())
}

fn poly_mul(p: &[f64], q: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; p.len() + q.len() - 1];
    for (i, a) in p.iter().enumerate() {
        for (j, b) in q.iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    out
}

/// Roots of `(n+1)(rho t - 1)^2 (t - rho)^2 - s t ((t - rho)^2 + (rho t - 1)^2)`,
/// the cleared form of the saddle equation, nearest to the seeds
/// `rho + sqrt(rho/(n+1))` and `rho - sqrt(rho/(n+1))` (`rho +- i sqrt(rho/(n+1))` when `s = -1`).
pub fn saddle_solve(rho: f64, n: usize, sign: f64) -> Result<SaddleData> {
    if !(rho > 0.0 && rho < 1.0) {
        return Err(Error::InvalidParameter(format!("rho = {rho} must lie in (0, 1)")));
    }
    if n < 2 {
        return Err(Error::InvalidParameter("saddle points need n >= 2".into()));
    }
    if sign != 1.0 && sign != -1.0 {
        return Err(Error::InvalidParameter(format!("sign {sign} must be +1 or -1")));
    }
    let a = [1.0, -2.0 * rho, rho * rho];
    let b = [rho * rho, -2.0 * rho, 1.0];
    let ab = poly_mul(&a, &b);
    let apb: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
    let mut p: Vec<f64> = ab.iter().map(|v| (n as f64 + 1.0) * v).collect();
    for (k, v) in apb.iter().enumerate() {
        p[k + 1] -= sign * v;
    }
    let pc: Vec<Complex64> = p.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let candidates = roots(&pc)?.zeros;

    let q = (rho / (n as f64 + 1.0)).sqrt();
    let (seed_plus, seed_minus) = if sign > 0.0 {
        (Complex64::new(rho + q, 0.0), Complex64::new(rho - q, 0.0))
    } else {
        (Complex64::new(rho, q), Complex64::new(rho, -q))
    };
    let polish = |mut t: Complex64| -> Complex64 {
        for _ in 0..8 {
            let (mut v, mut d) = (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0));
            for &c in pc.iter().rev() {
                d = d * t + v;
                v = v * t + c;
            }
            if d.norm() == 0.0 {
                break;
            }
            let step = v / d;
            t -= step;
            if step.norm() <= 1e-17 * t.norm() {
                break;
            }
        }
        if sign > 0.0 && t.im.abs() < 1e-12 {
            t.im = 0.0;
        }
        t
    };
    let nearest = |seed: Complex64| -> Complex64 {
        let t = candidates.iter().copied().min_by(|x, y| (x - seed).norm().total_cmp(&(y - seed).norm())).unwrap();
        polish(t)
    };
    let t_plus = nearest(seed_plus);
    let t_minus = nearest(seed_minus);
    let residual_plus = saddle_equation(rho, n, sign, t_plus).norm();
    let residual_minus = saddle_equation(rho, n, sign, t_minus).norm();
    if !(residual_plus <= 1e-10 && residual_minus <= 1e-10) {
        return Err(Error::NonConvergence(format!("saddle equation residual {residual_plus:e}")));
    }
    Ok(SaddleData { rho, n, sign, t_plus, t_minus, residual_plus, residual_minus })
}

/// `alpha_n ~ -(1/(2 sqrt(pi))) t_+^n S(w; t_+) (rho/n)^{3/4}` for the essential weight (`s = +1`).
pub fn verblunsky_essential_asymptote(saddle: &SaddleData, sz: &SzegoData) -> Result<Complex64> {
    if saddle.sign != 1.0 {
        return Err(Error::InvalidParameter("the Verblunsky asymptote is stated for the essential weight only".into()));
    }
    let n = saddle.n as f64;
    let t = saddle.t_plus;
    let log_mag = n * t.ln() + sz.log_scattering_continued(t)?;
    Ok(-log_mag.exp() * (saddle.rho / n).powf(0.75) / (2.0 * PI.sqrt()))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelCurve {
    pub level: f64,
    /// Ordered points of each connected component.
    pub components: Vec<Vec<Complex64>>,
    pub closed: Vec<bool>,
    pub r_min: f64,
    pub r_max: f64,
    pub resolution: usize,
}

impl LevelCurve {
    pub fn component_count(&self) -> usize {
        self.components.len()
    }

    /// Distance from `z` to the nearest polyline segment.
    pub fn distance(&self, z: Complex64) -> f64 {
        let mut best = f64::INFINITY;
        for (pts, &closed) in self.components.iter().zip(&self.closed) {
            let k = pts.len();
            if k == 1 {
                best = best.min((pts[0] - z).norm());
            }
            let segs = if closed { k } else { k.saturating_sub(1) };
            for i in 0..segs {
                best = best.min(segment_distance(z, pts[i], pts[(i + 1) % k]));
            }
        }
        best
    }
}

fn segment_distance(z: Complex64, a: Complex64, b: Complex64) -> f64 {
    let d = b - a;
    let len2 = d.norm_sqr();
    if len2 == 0.0 {
        return (z - a).norm();
    }
    let u = (((z - a) * d.conj()).re / len2).clamp(0.0, 1.0);
    (z - (a + d * u)).norm()
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.0[ra] = rb;
        }
    }
}

/// Marching-squares extraction of `Re(Psi_n(z) - Psi_n(t_+)) = level` on a polar grid
/// with `resolution` nodes in each direction.
pub fn level_curve(saddle: &SaddleData, sz: &SzegoData, resolution: usize) -> Result<LevelCurve> {
    if resolution < 8 {
        return Err(Error::InvalidParameter("level-curve resolution must be at least 8".into()));
    }
    let rho = saddle.rho;
    let psi_plus = saddle.psi(sz, saddle.t_plus)?.re;
    let level = saddle.level();
    let e_c = (psi_plus + level).exp();
    let r_min = 0.5 * rho.min(e_c);
    let r_max = (1.25 * saddle.t_plus.norm().max(e_c).max(rho)).min(0.5 * (rho + 1.0 / rho));
    let nr = resolution;
    let nt = resolution;
    let dtheta = 2.0 * PI / nt as f64;
    let radius = |u: f64| r_min + (r_max - r_min) * u / (nr - 1) as f64;
    let point = |ir: f64, jt: f64| Complex64::from_polar(radius(ir), (jt + 0.5) * dtheta);
    let f = |z: Complex64| -> f64 {
        let v = z.norm().ln() + sz.log_scattering_continued(z).map(|l| l.re).unwrap_or(f64::NAN) / saddle.n as f64
            - psi_plus
            - level;
        if v.is_nan() {
            f64::MAX
        } else {
            v
        }
    };
    let mut vals = vec![0.0; nr * nt];
    for i in 0..nr {
        for j in 0..nt {
            vals[i * nt + j] = f(point(i as f64, j as f64));
        }
    }
    let val = |i: usize, j: usize| vals[i * nt + (j % nt)];
    let positive = |v: f64| v > 0.0;

    // edge ids: radial (i,j)-(i+1,j) first, then angular (i,j)-(i,j+1)
    let radial = |i: usize, j: usize| i * nt + (j % nt);
    let angular = |i: usize, j: usize| (nr - 1) * nt + i * nt + (j % nt);
    let mut crossings: HashMap<usize, Complex64> = HashMap::new();
    let mut crossing = |id: usize, start: (f64, f64), end: (f64, f64), fs: f64| -> Complex64 {
        *crossings.entry(id).or_insert_with(|| {
            let at = |u: f64| point(start.0 + (end.0 - start.0) * u, start.1 + (end.1 - start.1) * u);
            let (mut lo, mut hi) = (0.0, 1.0);
            let sign_lo = positive(fs);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if positive(f(at(mid))) == sign_lo {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            at(0.5 * (lo + hi))
        })
    };

    let mut adjacency: HashMap<usize, Vec<usize>> = HashMap::new();
    let mut link = |a: usize, b: usize| {
        adjacency.entry(a).or_default().push(b);
        adjacency.entry(b).or_default().push(a);
    };
    for i in 0..nr - 1 {
        for j in 0..nt {
            let corners = [val(i, j), val(i + 1, j), val(i + 1, j + 1), val(i, j + 1)];
            let s: Vec<bool> = corners.iter().map(|&v| positive(v)).collect();
            let (fi, fj) = (i as f64, j as f64);
            let edges = [
                (radial(i, j), (fi, fj), (fi + 1.0, fj), corners[0], s[0] != s[1]),
                (angular(i + 1, j), (fi + 1.0, fj), (fi + 1.0, fj + 1.0), corners[1], s[1] != s[2]),
                (radial(i, j + 1), (fi + 1.0, fj + 1.0), (fi, fj + 1.0), corners[2], s[2] != s[3]),
                (angular(i, j), (fi, fj + 1.0), (fi, fj), corners[3], s[3] != s[0]),
            ];
            let crossed: Vec<usize> = (0..4).filter(|&e| edges[e].4).collect();
            for &e in &crossed {
                let (id, a, b, fa, _) = edges[e];
                crossing(id, a, b, fa);
            }
            match crossed.len() {
                2 => link(edges[crossed[0]].0, edges[crossed[1]].0),
                4 => {
                    let center = positive(f(point(fi + 0.5, fj + 0.5)));
                    if center == s[0] {
                        link(edges[0].0, edges[1].0);
                        link(edges[2].0, edges[3].0);
                    } else {
                        link(edges[3].0, edges[0].0);
                        link(edges[1].0, edges[2].0);
                    }
                }
                _ => {}
            }
        }
    }
    if adjacency.is_empty() {
        return Err(Error::NonConvergence("level curve not found in the search annulus".into()));
    }

    let mut ids: Vec<usize> = adjacency.keys().copied().collect();
    ids.sort_unstable();
    let index: HashMap<usize, usize> = ids.iter().enumerate().map(|(k, &id)| (id, k)).collect();
    let mut uf = UnionFind((0..ids.len()).collect());
    for (&a, nbrs) in &adjacency {
        for &b in nbrs {
            uf.union(index[&a], index[&b]);
        }
    }
    let mut groups: HashMap<usize, Vec<usize>> = HashMap::new();
    for &id in &ids {
        let root = uf.find(index[&id]);
        groups.entry(root).or_default().push(id);
    }
    let mut groups: Vec<Vec<usize>> = groups.into_values().collect();
    groups.sort_by_key(|g| g[0]);

    let mut components = Vec::with_capacity(groups.len());
    let mut closed = Vec::with_capacity(groups.len());
    for g in groups {
        let start = g.iter().copied().find(|id| adjacency[id].len() == 1);
        let is_closed = start.is_none();
        let mut cur = start.unwrap_or(g[0]);
        let mut prev = usize::MAX;
        let mut pts = Vec::with_capacity(g.len());
        let mut seen = std::collections::HashSet::new();
        loop {
            seen.insert(cur);
            pts.push(crossings[&cur]);
            let next = adjacency[&cur].iter().copied().find(|&nb| nb != prev && !seen.contains(&nb));
            match next {
                Some(nb) => {
                    prev = cur;
                    cur = nb;
                }
                None => break,
            }
        }
        components.push(pts);
        closed.push(is_closed);
    }
    Ok(LevelCurve { level, components, closed, r_min, r_max, resolution })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::{moments, szego_recurrence};
    use crate::weights::{essential, inverse_essential};

    fn ess(sign: f64) -> SzegoData {
        let spec = if sign > 0.0 { essential(0.5) } else { inverse_essential(0.5) }.unwrap();
        SzegoData::from_weight(&spec, 64).unwrap()
    }

    #[test]
    fn saddle_at_thirty() {
        let s = saddle_solve(0.5, 30, 1.0).unwrap();
        let seed = 0.5 + (0.5f64 / 31.0).sqrt();
        assert!((seed - 0.6270).abs() < 1e-4);
        assert!(s.residual_plus <= 1e-12);
        assert!(s.t_plus.im == 0.0 && s.t_plus.re > 0.5);
        assert!((s.t_plus.re - seed).abs() <= 1.0 / 30.0);
        assert!(s.t_minus.re < 0.5);
    }

    #[test]
    fn saddle_small_degree() {
        // below n = 7 the pair near rho + sqrt(rho/(n+1)) is complex conjugate
        let s = saddle_solve(0.5, 2, 1.0).unwrap();
        assert!(s.t_plus.re > 0.5 && s.t_plus.re < 1.0);
        assert!((s.t_plus - s.t_minus.conj()).norm() > 0.1);
        assert!(s.residual_plus <= 1e-12);
        assert!(saddle_solve(0.5, 1, 1.0).is_err());
        assert!(saddle_solve(1.5, 10, 1.0).is_err());
    }

    #[test]
    fn saddle_scaling() {
        for n in [100usize, 200, 500, 1000] {
            let s = saddle_solve(0.5, n, 1.0).unwrap();
            let ratio = (s.t_plus.re - 0.5) * ((n + 1) as f64).sqrt() / 0.5f64.sqrt();
            assert!((0.9..=1.1).contains(&ratio), "n={n} ratio={ratio}");
            assert!(s.residual_plus <= 1e-12);
        }
        let s = saddle_solve(0.5, 5000, 1.0).unwrap();
        let ratio = (s.t_plus.re - 0.5) * 5001f64.sqrt() / 0.5f64.sqrt();
        assert!((ratio - 1.0).abs() <= 0.02);
    }

    #[test]
    fn inverse_weight_saddles_are_conjugate() {
        let s = saddle_solve(0.5, 30, -1.0).unwrap();
        assert!(s.t_plus.im > 0.0);
        assert!((s.t_plus - s.t_minus.conj()).norm() < 1e-10);
        assert!(s.residual_plus <= 1e-12 && s.residual_minus <= 1e-12);
    }

    #[test]
    fn level_curves_and_component_counts() {
        for (sign, count) in [(1.0, 1usize), (-1.0, 2)] {
            let sz = ess(sign);
            let s = saddle_solve(0.5, 30, sign).unwrap();
            let lc = level_curve(&s, &sz, 400).unwrap();
            assert_eq!(lc.component_count(), count, "sign={sign}");
            let level = (1.0 / 30.0) * ((1.0 / (2.0 * PI.sqrt())) * 0.5f64.powf(0.75) / 30f64.powf(0.75)).ln();
            assert!((lc.level - level).abs() < 1e-15);
            for pts in &lc.components {
                for &z in pts.iter().filter(|z| (*z - 0.5).norm() > 0.05) {
                    assert!(s.level_function(&sz, z).unwrap().abs() <= 1e-8);
                }
            }
        }
    }

    #[test]
    fn essential_verblunsky_asymptote() {
        let spec = essential(0.5).unwrap();
        let sz = SzegoData::from_weight(&spec, 64).unwrap();
        let o = szego_recurrence(&moments(&spec, 61, 4096).unwrap(), 61).unwrap();
        let mut prev = f64::INFINITY;
        for n in 5..=60 {
            let s = saddle_solve(0.5, n, 1.0).unwrap();
            let a = verblunsky_essential_asymptote(&s, &sz).unwrap();
            if n >= 8 {
                assert!(s.t_plus.im == 0.0);
                assert!(a.im.abs() <= 1e-12 * a.re.abs() && a.re < 0.0, "n={n} a={a}");
            }
            assert!(a.norm() < prev);
            prev = a.norm();
            if n >= 20 {
                let ratio = (o.alpha[n] / a - 1.0).norm();
                assert!(ratio <= 3.0 / (n as f64).sqrt(), "n={n} ratio={ratio}");
            }
        }
        let s = saddle_solve(0.5, 30, -1.0).unwrap();
        assert!(verblunsky_essential_asymptote(&s, &ess(-1.0)).is_err());
    }

    #[test]
    fn segment_distance_basics() {
        let a = Complex64::new(0.0, 0.0);
        let b = Complex64::new(1.0, 0.0);
        assert!((segment_distance(Complex64::new(0.5, 0.3), a, b) - 0.3).abs() < 1e-15);
        assert!((segment_distance(Complex64::new(2.0, 0.0), a, b) - 1.0).abs() < 1e-15);
    }
}
