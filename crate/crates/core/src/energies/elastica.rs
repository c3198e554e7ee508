//! Bending energy of radial graphs and its partial derivatives.

use crate::geometry::{CurveSamples, FourierCurve};
use crate::error::Result;

/// `N^2 / D^{5/2}` with `N = 2q^2 + p^2 - p s`, `D = q^2 + p^2`, where
/// `p = 1 + phi`, `q = phi'`, `s = phi''`.
#[inline]
pub fn integrand(p: f64, q: f64, s: f64) -> f64 {
    let n = 2.0 * q * q + p * p - p * s;
    let d = q * q + p * p;
    n * n / (d * d * d.sqrt())
}

/// Partial derivatives of [`integrand`] with respect to `(p, q, s)`.
#[inline]
pub fn integrand_partials(p: f64, q: f64, s: f64) -> [f64; 3] {
    let n = 2.0 * q * q + p * p - p * s;
    let d = q * q + p * p;
    let d52 = d * d * d.sqrt();
    let d72 = d52 * d;
    [
        2.0 * n * (2.0 * p - s) / d52 - 5.0 * n * n * p / d72,
        8.0 * n * q / d52 - 5.0 * n * n * q / d72,
        -2.0 * n * p / d52,
    ]
}

/// `(1/R) int N^2 / D^{5/2}` on sampled values.
pub fn elastica_from_samples(s: &CurveSamples, base_radius: f64) -> f64 {
    let sum: f64 = (0..s.len())
        .map(|j| integrand(s.rho[j], s.d1[j], s.d2[j]))
        .sum();
    s.weight() * sum / base_radius
}

/// Integral of squared curvature along the boundary of a radial graph.
pub fn elastica_energy(curve: &FourierCurve) -> Result<f64> {
    let s = curve.samples();
    s.check_graph()?;
    Ok(elastica_from_samples(&s, curve.base_radius()))
}
