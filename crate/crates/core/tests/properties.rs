use std::f64::consts::PI;

use num_complex::Complex64;
use opuc_core::canonical::{default_lens_radius, neumann_solve, reconstruct_phi};
use opuc_core::oracle::{moments, szego_recurrence};
use opuc_core::szego::SzegoData;
use opuc_core::weights::{rational_modulus, AnalyticWeightSpec};
use opuc_core::zeros::roots;
use proptest::prelude::*;

fn weight(modulus: f64, angle: f64, second: Option<(f64, f64)>) -> AnalyticWeightSpec {
    let mut f = vec![(Complex64::from_polar(modulus, angle), 1)];
    if let Some((m, a)) = second {
        f.push((Complex64::from_polar(m, a), 1));
    }
    rational_modulus(&f).unwrap()
}

fn params() -> impl Strategy<Value = AnalyticWeightSpec> {
    (1.6f64..4.0, -PI..PI, prop::option::of((2.5f64..5.0, -PI..PI))).prop_map(|(m, a, s)| weight(m, a, s))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn verblunsky_coefficients_in_disk_and_kappa_increasing(spec in params()) {
        let o = szego_recurrence(&moments(&spec, 30, 4096).unwrap(), 30).unwrap();
        prop_assert!(o.alpha.iter().all(|a| a.norm() < 1.0));
        for n in 0..30 {
            prop_assert!(o.kappa[n + 1] >= o.kappa[n] && o.kappa[n] > 0.0);
            let step = o.log_det[n + 1] - o.log_det[n];
            prop_assert!((step + 2.0 * o.kappa[n + 1].ln()).abs() < 1e-10);
        }
    }

    #[test]
    fn scattering_is_unimodular_with_parseval(spec in params()) {
        let sz = SzegoData::from_weight(&spec, 96).unwrap();
        for k in 0..32 {
            let z = Complex64::from_polar(1.0, 2.0 * PI * k as f64 / 32.0 + 0.1);
            prop_assert!((sz.scattering.evaluate(z).unwrap().norm() - 1.0).abs() < 1e-10);
        }
        for m in -2..=2 {
            prop_assert!(sz.parseval_defect(m).norm() < 1e-8);
        }
    }

    #[test]
    fn canonical_reconstruction_matches_oracle(spec in params(), n in 6usize..14) {
        let o = szego_recurrence(&moments(&spec, 14, 4096).unwrap(), 14).unwrap();
        let sz = SzegoData::from_weight(&spec, 96).unwrap();
        let r = default_lens_radius(sz.rho);
        let e = neumann_solve(n, &sz, 3, r).unwrap();
        for z in [Complex64::new(0.05, 0.02), Complex64::new(0.0, 1.0), Complex64::new(-1.1, 2.0)] {
            let want = o.phi(n, z);
            let got = reconstruct_phi(&e, &sz, z).unwrap();
            prop_assert!((got - want).norm() <= 1e-6 * want.norm().max(1e-300), "z={} got={} want={}", z, got, want);
        }
    }

    #[test]
    fn real_weights_have_conjugate_symmetric_zeros(m in 1.6f64..4.0, sign in prop::bool::ANY, n in 8usize..30) {
        let c = if sign { m } else { -m };
        let spec = rational_modulus(&[(Complex64::new(c, 0.0), 1), (Complex64::new(0.0, 3.0), 1), (Complex64::new(0.0, -3.0), 1)]).unwrap();
        let o = szego_recurrence(&moments(&spec, n, 4096).unwrap(), n).unwrap();
        prop_assert!(o.phi_monic[n].iter().all(|c| c.im.abs() < 1e-13));
        // drop the rounding-level imaginary parts, which clustered zeros amplify
        let real: Vec<Complex64> = o.phi_monic[n].iter().map(|c| Complex64::new(c.re, 0.0)).collect();
        let zs = roots(&real).unwrap();
        let sum: Complex64 = zs.zeros.iter().sum();
        prop_assert!((sum + real[n - 1]).norm() < 1e-8);
        for z in &zs.zeros {
            let partner = zs.zeros.iter().map(|w| (w - z.conj()).norm()).fold(f64::INFINITY, f64::min);
            prop_assert!(partner < 1e-8, "z={} partner distance {:e}", z, partner);
        }
    }
}
