use std::f64::consts::{PI, TAU};

use approx::assert_relative_eq;
use charged_drops::energies::elastica_energy;
use charged_drops::geometry::{FourierCoeffs, FourierCurve};
use charged_drops::stability::{
    constrained_quadratic_form, deficit_experiment, project_constraints, pure_mode_deficit, quadratic_form_spectrum,
    richardson_quadratic, spectrum_coefficient, taylor_consistency, taylor_elastica_deficit, taylor_perimeter_deficit,
    w22_norm, DeficitConfig,
};
use proptest::prelude::*;

/// `phi, phi', phi''` of the series at `theta`.
fn derivatives(c: &FourierCoeffs, theta: f64) -> (f64, f64, f64) {
    let (mut p, mut d1, mut d2) = (c.a0, 0.0, 0.0);
    for (i, (a, b)) in c.a.iter().zip(&c.b).enumerate() {
        let k = (i + 1) as f64;
        let (s, co) = (k * theta).sin_cos();
        p += a * co + b * s;
        d1 += k * (b * co - a * s);
        d2 -= k * k * (a * co + b * s);
    }
    (p, d1, d2)
}

/// Midpoint rule for `int_0^{2 pi} f(phi, phi', phi'')`, exact for the
/// low-degree trigonometric integrands used here.
fn integrate(c: &FourierCoeffs, f: impl Fn(f64, f64, f64) -> f64) -> f64 {
    let n = 512;
    let w = TAU / n as f64;
    (0..n)
        .map(|j| {
            let (p, d1, d2) = derivatives(c, (j as f64 + 0.5) * w);
            f(p, d1, d2)
        })
        .sum::<f64>()
        * w
}

/// Modes 2..=8 with sum |c| below 0.085, inside the projectable bound.
fn high_modes() -> impl Strategy<Value = FourierCoeffs> {
    (prop::collection::vec(-0.006..0.006f64, 7), prop::collection::vec(-0.006..0.006f64, 7)).prop_map(|(a, b)| {
        let mut c = FourierCoeffs::zeros(8);
        c.a[1..].copy_from_slice(&a);
        c.b[1..].copy_from_slice(&b);
        c
    })
}

#[test]
fn spectrum_vanishes_only_at_the_translation_mode() {
    let s = quadratic_form_spectrum(64);
    assert_eq!(s.len(), 65);
    for (k, v) in s {
        // (k^2 - 1)(k^2 - 3/2) is the factored form
        let kf = k as f64;
        assert_relative_eq!(v, (kf * kf - 1.0) * (kf * kf - 1.5), epsilon = 1e-12);
        if k == 1 {
            assert_eq!(v, 0.0);
        } else {
            assert!(v > 0.0, "k = {k}");
        }
    }
    assert_eq!(spectrum_coefficient(0.0), 1.5);
    assert_eq!(spectrum_coefficient(2.0), 7.5);
}

#[test]
fn taylor_consistency_for_low_modes() {
    for k in 2..=5 {
        let coarse = taylor_consistency(k, 1e-3).unwrap();
        assert!(coarse.rel_error <= 0.02, "{coarse:?}");
        let fine = taylor_consistency(k, 1e-4).unwrap();
        assert!(fine.rel_error <= 2e-4, "{fine:?}");
        assert_relative_eq!(fine.richardson, fine.predicted, max_relative = 2e-4);
        assert_relative_eq!(fine.predicted, PI * spectrum_coefficient(k as f64), max_relative = 1e-15);
    }
    // the k = 2 coefficient in the real cosine normalization
    let c = taylor_consistency(2, 1e-3).unwrap();
    assert_relative_eq!(c.richardson, 7.5 * PI, max_relative = 1e-4);
}

#[test]
fn perimeter_expansion_matches_the_exact_perimeter() {
    let t = 1e-3;
    let per = |s: f64| -> charged_drops::Result<f64> {
        let p = project_constraints(&FourierCoeffs::cosine(2, s, 2))?;
        Ok(p.curve()?.perimeter() - TAU)
    };
    let limit = richardson_quadratic(per, t).unwrap();
    assert_relative_eq!(limit, 1.5 * PI, max_relative = 0.01);
    let p = project_constraints(&FourierCoeffs::cosine(2, t, 2)).unwrap();
    assert_relative_eq!(taylor_perimeter_deficit(&p.coeffs, 1.0) / (t * t), 1.5 * PI, max_relative = 1e-4);
}

#[test]
fn pure_mode_volume_correction() {
    // a0 + (a0^2 + t^2 / 2) / 2 = 0
    let t = 0.05;
    let p = project_constraints(&FourierCoeffs::cosine(2, t, 2)).unwrap();
    let exact = -1.0 + (1.0 - t * t / 2.0).sqrt();
    assert_relative_eq!(p.coeffs.a0, exact, max_relative = 1e-10);
    // the first modes stay at zero by symmetry, up to rounding
    assert!(p.coeffs.a[0].abs() <= 1e-15 && p.coeffs.b[0].abs() <= 1e-15);
    assert_eq!(project_constraints(&FourierCoeffs::zeros(3)).unwrap().coeffs, FourierCoeffs::zeros(3));
}

#[test]
fn pure_mode_deficit_is_positive_and_quadratic() {
    for k in 2..=6 {
        let d = pure_mode_deficit(k, 0.01).unwrap();
        assert!(d.exact > 0.0 && d.prediction > 0.0);
        assert_relative_eq!(d.exact, d.prediction, max_relative = 0.2);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn projection_is_idempotent(c in high_modes(), a1 in -0.005..0.005f64, b1 in -0.005..0.005f64) {
        let mut c = c;
        c.a[0] = a1;
        c.b[0] = b1;
        let once = project_constraints(&c).unwrap();
        prop_assert!(once.volume_residual.abs() <= 1e-12);
        prop_assert!(once.barycenter_residual <= 1e-12);
        let twice = project_constraints(&once.coeffs).unwrap();
        prop_assert!((twice.coeffs.a0 - once.coeffs.a0).abs() <= 1e-12);
        for (x, y) in twice.coeffs.a.iter().chain(&twice.coeffs.b).zip(once.coeffs.a.iter().chain(&once.coeffs.b)) {
            prop_assert!((x - y).abs() <= 1e-12);
        }
        // higher modes are untouched
        prop_assert_eq!(&once.coeffs.a[1..], &c.a[1..]);
        prop_assert_eq!(&once.coeffs.b[1..], &c.b[1..]);
    }

    #[test]
    fn quadratic_form_against_direct_integration(c in high_modes(), a0 in -0.01..0.01f64) {
        let mut c = c;
        c.a0 = a0;
        let direct = integrate(&c, |p, d1, d2| d2 * d2 + 1.5 * p * p + 1.5 * d1 * d1 + 4.0 * p * d2);
        prop_assert!((constrained_quadratic_form(&c) - direct).abs() <= 1e-12 * (1.0 + direct.abs()));
        let unconstrained = integrate(&c, |p, d1, d2| d2 * d2 + p * p + 1.5 * d1 * d1 - p + 4.0 * p * d2);
        prop_assert!((taylor_elastica_deficit(&c, 1.0) - unconstrained).abs() <= 1e-12 * (1.0 + unconstrained.abs()));
        let w22 = integrate(&c, |p, d1, d2| p * p + d1 * d1 + d2 * d2).sqrt();
        prop_assert!((w22_norm(&c) - w22).abs() <= 1e-12);
    }

    #[test]
    fn form_dominates_the_smallest_coefficient(c in high_modes()) {
        let mass: f64 = c.a.iter().chain(&c.b).map(|x| x * x).sum();
        prop_assume!(mass > 0.0);
        let form = constrained_quadratic_form(&c);
        prop_assert!(form >= 7.5 * PI * mass * (1.0 - 1e-12));
    }

    #[test]
    fn unconstrained_expansion_tracks_the_exact_elastica(c in high_modes(), r in 0.5..2.0f64) {
        // the remainder is small relative to the quadratic term once
        // k_max^2 sum |a| is small; mixed modes can make it non-monotone in s
        let scale: f64 = c.a.iter().chain(&c.b).map(|x| x.abs()).sum();
        prop_assume!(scale > 1e-6);
        let eps = 0.05;
        let mut cs = c.clone();
        cs.a.iter_mut().chain(cs.b.iter_mut()).for_each(|x| *x *= eps / (64.0 * scale));
        let exact = elastica_energy(&FourierCurve::new(r, [0.0, 0.0], cs.clone()).unwrap()).unwrap() - TAU / r;
        let taylor = taylor_elastica_deficit(&cs, r);
        prop_assert!((exact - taylor).abs() <= eps * taylor.abs(), "{} vs {}", exact, taylor);
    }
}

#[test]
fn deficit_experiment_is_positive_and_reproducible() {
    let cfg = DeficitConfig::new(60, 7);
    let rep = deficit_experiment(&cfg).unwrap();
    assert_eq!(rep.samples.len(), 60);
    for (i, s) in rep.samples.iter().enumerate() {
        assert_eq!(s.trial, i);
        assert!(s.exact_deficit > 0.0, "{s:?}");
        assert!(s.perimeter_deficit >= 0.0, "{s:?}");
        assert!(s.ratio_c0 > 0.0 && s.ratio_c1 > 0.0, "{s:?}");
    }
    assert!(rep.c0.min > 0.0 && rep.c0.p05 >= rep.c0.min);
    assert_eq!(rep.c0.count, 60);
    let again = deficit_experiment(&cfg).unwrap();
    assert_eq!(rep, again);
    // trials depend only on their index
    let prefix = deficit_experiment(&DeficitConfig::new(20, 7)).unwrap();
    assert_eq!(&rep.samples[..20], &prefix.samples[..]);
}

#[test]
fn deficit_config_is_validated() {
    let mut c = DeficitConfig::new(5, 1);
    c.modes = [1, 4];
    assert!(deficit_experiment(&c).is_err());
    let mut c = DeficitConfig::new(5, 1);
    c.norms = vec![0.2];
    assert!(deficit_experiment(&c).is_err());
    assert!(deficit_experiment(&DeficitConfig::new(0, 1)).is_err());
}
