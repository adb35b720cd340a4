use std::f64::consts::E;

use nalgebra::Matrix3;
use num_complex::Complex64;
use proptest::prelude::*;
use wpe_core::model::Parity;
use wpe_core::stability::{
    characteristic_cubic, cubic_roots, discriminant, lowmem_eigenvalues, omega_onset, r_critical,
    stability_report, CubicCoeffs, Verdict,
};
use wpe_core::Params;

fn params(sigma: f64, r: f64, a: f64, b: f64) -> Params {
    Params::new(sigma, r, a, b).unwrap()
}

fn sorted(mut z: Vec<Complex64>) -> Vec<Complex64> {
    z.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    z
}

/// Eigenvalues of the companion matrix of λ³ + a1λ² + a2λ + a3.
fn companion_roots(c: &CubicCoeffs) -> Vec<Complex64> {
    let m = Matrix3::new(0.0, 0.0, -c.a3, 1.0, 0.0, -c.a2, 0.0, 1.0, -c.a1);
    let ev = m.complex_eigenvalues();
    sorted(ev.iter().map(|z| Complex64::new(z.re, z.im)).collect())
}

fn scale(c: &CubicCoeffs) -> f64 {
    1.0 + c.a1.abs() + c.a2.abs().sqrt() + c.a3.abs().cbrt()
}

#[test]
fn companion_matrix_agreement_on_model_cubics() {
    for &(sigma, r, a, b) in &[
        (10.0, 10.0, 1.0, 5.0),
        (8.0, 15.0, 1.0, 5.0),
        (20.0, 15.0, 1.0, 5.0),
        (4.5, 19.5, 1.0, 5.0),
        (35.0, 35.0, 2.0, 0.5),
        (10.0, 2.0, 1.0, 5.0),
    ] {
        let p = params(sigma, r, a, b);
        for parity in [Parity::Peak, Parity::Trough] {
            let c = characteristic_cubic(&p, parity);
            let ours = sorted(cubic_roots(&c).to_vec());
            let oracle = companion_roots(&c);
            for (x, y) in ours.iter().zip(&oracle) {
                assert!((x - y).norm() < 1e-9 * scale(&c), "{p:?} {parity:?}: {x} vs {y}");
            }
        }
    }
}

#[test]
fn boundary_point_examples() {
    let p = params(10.0, 10.0, 1.0, 5.0);
    assert!((r_critical(&p) - 61.0 / 11.0).abs() < 1e-14);
    assert!((omega_onset(&p) - (50.0f64 / 11.0).sqrt()).abs() < 1e-14);
    assert_eq!(stability_report(&p, 0).verdict, Verdict::Unstable);
    assert_eq!(stability_report(&p, 1).verdict, Verdict::Unstable);
    assert_eq!(stability_report(&p.with_r(2.0).unwrap(), 1).verdict, Verdict::Stable);
}

/// Trough max real part as a function of r.
fn trough_growth(template: &Params, r: f64) -> f64 {
    stability_report(&template.with_r(r).unwrap(), 1).max_real_part()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10_000))]

    #[test]
    fn vieta_and_root_structure(
        a1 in -10.0f64..10.0,
        a2 in -10.0f64..10.0,
        a3 in -10.0f64..10.0,
    ) {
        let c = CubicCoeffs::new(a1, a2, a3).unwrap();
        let z = cubic_roots(&c);
        let s = scale(&c);
        let sum = z[0] + z[1] + z[2];
        let pair = z[0] * z[1] + z[0] * z[2] + z[1] * z[2];
        let prod = z[0] * z[1] * z[2];
        prop_assert!((sum + a1).norm() < 1e-8 * s);
        prop_assert!((pair - a2).norm() < 1e-8 * s * s);
        prop_assert!((prod + a3).norm() < 1e-8 * s * s * s);

        let d = discriminant(&c);
        let n_real = z.iter().filter(|w| w.im == 0.0).count();
        // Skip near-degenerate cubics where the sign of Δ is round-off.
        if d.abs() > 1e-6 * s.powi(6) {
            if d > 0.0 {
                prop_assert_eq!(n_real, 3, "Δ = {} roots {:?}", d, z);
            } else {
                prop_assert_eq!(n_real, 1, "Δ = {} roots {:?}", d, z);
                let complex: Vec<_> = z.iter().filter(|w| w.im != 0.0).collect();
                prop_assert_eq!(*complex[0], complex[1].conj());
            }
            let oracle = companion_roots(&c);
            for (x, y) in sorted(z.to_vec()).iter().zip(&oracle) {
                prop_assert!((x - y).norm() < 1e-8 * s, "{} vs {}", x, y);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1_000))]

    #[test]
    fn even_k_always_unstable(
        sigma in 0.01f64..50.0,
        r in 0.0f64..50.0,
        a in 0.01f64..5.0,
        b in 0.01f64..20.0,
        k in -20i64..20,
    ) {
        let p = params(sigma, r, a, b);
        let rep = stability_report(&p, 2 * k);
        prop_assert_eq!(rep.verdict, Verdict::Unstable);
        prop_assert!(rep.eigenvalues.iter().any(|z| z.im == 0.0 && z.re > 0.0));
    }

    #[test]
    fn trough_boundary_is_sharp(
        sigma in 0.1f64..50.0,
        a in 0.05f64..3.0,
        b in 0.05f64..10.0,
    ) {
        let p = params(sigma, 1.0, a, b);
        let rc = r_critical(&p);
        let (mut lo, mut hi) = (0.0, 2.0 * rc + 1.0);
        prop_assert!(trough_growth(&p, lo) < 0.0);
        prop_assert!(trough_growth(&p, hi) > 0.0);
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if trough_growth(&p, mid) > 0.0 { hi = mid } else { lo = mid }
        }
        prop_assert!((0.5 * (lo + hi) - rc).abs() <= 1e-6 * rc, "bisection {} vs r_c {}", lo, rc);
    }

    #[test]
    fn onset_pair_is_purely_imaginary(
        sigma in 0.1f64..50.0,
        a in 0.05f64..3.0,
        b in 0.05f64..10.0,
    ) {
        let p0 = params(sigma, 1.0, a, b);
        let p = p0.with_r(r_critical(&p0)).unwrap();
        let w = omega_onset(&p);
        let rep = stability_report(&p, 1);
        let pair: Vec<_> = rep.eigenvalues.iter().filter(|z| z.im > 0.0).collect();
        prop_assert_eq!(pair.len(), 1);
        prop_assert!((pair[0].im - w).abs() < 1e-6 * (1.0 + w));
        prop_assert!(pair[0].re.abs() < 1e-6 * (1.0 + w));
    }

    #[test]
    fn lowmem_eigenvalues_solve_the_quadratic(
        sigma in 0.01f64..50.0,
        r in 0.0f64..50.0,
        a in 0.0f64..5.0,
        b in 0.01f64..20.0,
        k in -5i64..5,
    ) {
        let p = params(sigma, r, a, b);
        let parity = Parity::of(k);
        let [l1, l2] = lowmem_eigenvalues(&p, parity);
        // Jacobian [[0, 1], [σAB(−1)^k, σ(r/e − 1)]].
        let trace = sigma * (r / E - 1.0);
        let det = -sigma * a * b * parity.sign();
        let s = 1.0 + trace.abs() + det.abs();
        prop_assert!((l1 + l2 - trace).norm() <= 1e-12 * s);
        prop_assert!((l1 * l2 - det).norm() <= 1e-12 * s * s);
        for l in [l1, l2] {
            prop_assert!((l * l - trace * l + det).norm() <= 1e-12 * s * s);
        }
    }

    #[test]
    fn r_critical_depends_on_product_ab(
        sigma in 0.01f64..50.0,
        a in 0.01f64..5.0,
        b in 0.01f64..20.0,
    ) {
        let p = params(sigma, 1.0, a, b);
        let q = params(sigma, 1.0, 2.0 * a, 0.5 * b);
        prop_assert!((r_critical(&p) - r_critical(&q)).abs() <= 1e-12 * r_critical(&p));
    }
}
