use std::f64::consts::PI;

use approx::assert_relative_eq;
use charged_drops::geometry::{
    asymmetry, symmetric_difference, symmetric_difference_with_ball, FourierCoeffs, FourierCurve,
};
use proptest::prelude::*;

/// Small smooth perturbations: modes 1..=6 with sum |c| < 0.3.
fn coeffs() -> impl Strategy<Value = FourierCoeffs> {
    (
        -0.05..0.05f64,
        prop::collection::vec(-0.025..0.025f64, 6),
        prop::collection::vec(-0.025..0.025f64, 6),
    )
        .prop_map(|(a0, a, b)| FourierCoeffs { a0, a, b })
}

fn center() -> impl Strategy<Value = [f64; 2]> {
    (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(x, y)| [x, y])
}

/// Independent oracles: the polar area `1/2 int r^2` and the arc length
/// `int sqrt(r^2 + r'^2)` by a dense midpoint rule on the raw series.
fn oracle_area_perimeter(r0: f64, c: &FourierCoeffs) -> (f64, f64) {
    let n = 20_000;
    let (mut area, mut per) = (0.0, 0.0);
    for j in 0..n {
        let t = (j as f64 + 0.5) * 2.0 * PI / n as f64;
        let (mut r, mut dr) = (1.0 + c.a0, 0.0);
        for (i, (a, b)) in c.a.iter().zip(&c.b).enumerate() {
            let k = (i + 1) as f64;
            r += a * (k * t).cos() + b * (k * t).sin();
            dr += k * (b * (k * t).cos() - a * (k * t).sin());
        }
        area += 0.5 * (r0 * r).powi(2);
        per += r0 * r.hypot(dr);
    }
    let w = 2.0 * PI / n as f64;
    (area * w, per * w)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn area_and_perimeter_match_direct_quadrature(c in coeffs(), r0 in 0.2..5.0f64) {
        let curve = FourierCurve::new(r0, [0.0, 0.0], c.clone()).unwrap();
        let (a, p) = oracle_area_perimeter(r0, &c);
        prop_assert!((curve.area() - a).abs() <= 1e-10 * a);
        prop_assert!((curve.perimeter() - p).abs() <= 1e-10 * p);
    }

    #[test]
    fn scaling_multiplies_area_and_perimeter(c in coeffs(), s in 0.1..10.0f64) {
        let curve = FourierCurve::new(1.3, [0.2, -0.1], c).unwrap();
        let big = curve.scaled(s).unwrap();
        prop_assert!((big.area() - s * s * curve.area()).abs() <= 1e-12 * big.area());
        prop_assert!((big.perimeter() - s * curve.perimeter()).abs() <= 1e-12 * big.perimeter());
    }

    #[test]
    fn translation_leaves_geometry_unchanged(c1 in coeffs(), c2 in coeffs(), shift in center()) {
        let e = FourierCurve::new(1.0, [0.0, 0.0], c1).unwrap();
        let f = FourierCurve::new(0.9, [0.0, 0.0], c2).unwrap();
        let (et, ft) = (e.translated(shift), f.translated(shift));
        prop_assert!((et.area() - e.area()).abs() <= 1e-12);
        prop_assert!((et.perimeter() - e.perimeter()).abs() <= 1e-12);
        let d = symmetric_difference(&e, &f).unwrap();
        let dt = symmetric_difference(&et, &ft).unwrap();
        prop_assert!((d - dt).abs() <= 1e-12, "{} vs {}", d, dt);
        let a = asymmetry(&e).unwrap().value;
        let at = asymmetry(&et).unwrap().value;
        prop_assert!((a - at).abs() <= 1e-12, "{} vs {}", a, at);
    }

    #[test]
    fn asymmetry_is_at_most_the_distance_to_any_equal_ball(c in coeffs(), x in center()) {
        let e = FourierCurve::new(1.0, [0.0, 0.0], c).unwrap();
        let rho = (e.area() / PI).sqrt();
        let a = asymmetry(&e).unwrap().value;
        let at_barycenter = symmetric_difference_with_ball(&e, e.barycenter(), rho).unwrap();
        let centered = symmetric_difference_with_ball(&e, [0.0, 0.0], rho).unwrap();
        let elsewhere = symmetric_difference_with_ball(&e, [0.1 * x[0], 0.1 * x[1]], rho).unwrap();
        prop_assert!(a <= at_barycenter + 1e-12);
        prop_assert!(a <= centered + 1e-12);
        prop_assert!(a <= elsewhere + 1e-12);
        prop_assert!(a >= 0.0);
    }

    #[test]
    fn pure_mode_area_closed_form(k in 1usize..=16, a in -0.04..0.04f64, b in -0.04..0.04f64, r0 in 0.5..3.0f64) {
        let mut c = FourierCoeffs::zeros(k);
        c.a[k - 1] = a;
        c.b[k - 1] = b;
        let curve = FourierCurve::new(r0, [0.0, 0.0], c).unwrap().with_samples(4 * k.max(2) + 4).unwrap();
        let exact = PI * r0 * r0 * (1.0 + 0.5 * (a * a + b * b));
        prop_assert!((curve.area() - exact).abs() <= 1e-12 * exact);
    }
}

#[test]
fn symmetric_difference_of_concentric_disks() {
    let a = FourierCurve::circle(1.0, [0.0, 0.0]).unwrap();
    let b = FourierCurve::circle(0.6, [0.0, 0.0]).unwrap();
    assert_relative_eq!(symmetric_difference(&a, &b).unwrap(), PI * (1.0 - 0.36), max_relative = 1e-12);
}

#[test]
fn symmetric_difference_of_shifted_unit_disks() {
    // |B1 delta B1(d)| = 2 (pi - lens), lens = 2 acos(d/2) - (d/2) sqrt(4 - d^2)
    let d: f64 = 0.7;
    let lens = 2.0 * (d / 2.0).acos() - 0.5 * d * (4.0 - d * d).sqrt();
    let a = FourierCurve::circle(1.0, [0.0, 0.0]).unwrap();
    assert_relative_eq!(
        symmetric_difference_with_ball(&a, [d, 0.0], 1.0).unwrap(),
        2.0 * (PI - lens),
        max_relative = 1e-9
    );
}

#[test]
fn a_circle_has_zero_asymmetry() {
    let c = FourierCurve::circle(2.0, [1.0, -3.0]).unwrap();
    assert!(asymmetry(&c).unwrap().value < 1e-12);
}

#[test]
fn non_graphs_are_rejected() {
    let c = FourierCoeffs::cosine(3, 1.2, 3);
    assert!(FourierCurve::new(1.0, [0.0, 0.0], c).is_err());
    assert!(FourierCurve::new(-1.0, [0.0, 0.0], FourierCoeffs::zeros(2)).is_err());
}
