//! The unit-area planar annulus family `r -> B_{sqrt(1 + r^2)} \ B_r`:
//! uncharged energy `f_lambda`, its minimizer, the Riesz energy `g` and the
//! charged objective `h = f_lambda + Q g`.

use std::collections::HashMap;
use std::f64::consts::{PI, TAU};
use std::sync::{Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::energies::riesz::radial::{self, Pair};
use crate::error::{ensure, Error, Result};
use crate::geometry::{AnnulusSpec, Dim};
use crate::quadrature::{bisect, golden_section, Estimate};

/// Relative accuracy used for `g` and `g'`.
const G_TOL: f64 = 1e-11;

/// Inner/outer radius parametrization at area `pi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnulusFamily;

impl AnnulusFamily {
    pub fn outer(r: f64) -> f64 {
        (1.0 + r * r).sqrt()
    }

    pub fn spec(r: f64) -> Result<AnnulusSpec> {
        AnnulusSpec::unit_area(r)
    }
}

fn check_r(r: f64) -> Result<()> {
    ensure(r > 0.0 && r.is_finite(), || format!("inner radius must be positive, got {r}"))
}

/// `2 pi [lambda (r + sqrt(1 + r^2)) + 1/r + 1/sqrt(1 + r^2)]`.
pub fn f_lambda(lambda: f64, r: f64) -> Result<f64> {
    check_r(r)?;
    ensure(lambda >= 0.0, || format!("lambda must be non-negative, got {lambda}"))?;
    let s = AnnulusFamily::outer(r);
    Ok(TAU * (lambda * (r + s) + 1.0 / r + 1.0 / s))
}

/// `d f_lambda / dr` divided by `2 pi`.
fn el(lambda: f64, r: f64) -> f64 {
    let s2 = 1.0 + r * r;
    let s = s2.sqrt();
    lambda * (1.0 + r / s) - 1.0 / (r * r) - r / (s2 * s)
}

/// `f_lambda'(r)`.
pub fn f_lambda_prime(lambda: f64, r: f64) -> f64 {
    TAU * el(lambda, r)
}

/// `f_lambda''(r)`.
pub fn f_lambda_second(lambda: f64, r: f64) -> f64 {
    let s2 = 1.0 + r * r;
    let s = s2.sqrt();
    TAU * (lambda / (s2 * s) + 2.0 / (r * r * r) + (2.0 * r * r - 1.0) / (s2 * s2 * s))
}

/// Unique minimizer of `f_lambda` from bisection on the Euler-Lagrange
/// equation, starting from `[r0/8, 8 r0]`, `r0 = lambda^{-1/2}`, doubled
/// until it brackets a sign change.
pub fn r_lambda(lambda: f64) -> Result<f64> {
    ensure(lambda > 0.0 && lambda.is_finite(), || {
        format!("lambda must be positive, got {lambda}")
    })?;
    let r0 = lambda.sqrt().recip();
    let (mut lo, mut hi) = (r0 / 8.0, 8.0 * r0);
    for _ in 0..200 {
        if el(lambda, lo) < 0.0 && el(lambda, hi) > 0.0 {
            return bisect(|r| el(lambda, r), lo, hi, 1e-15 * hi);
        }
        lo /= 2.0;
        hi *= 2.0;
    }
    Err(Error::NoConvergence(format!("no bracket for r_lambda at lambda = {lambda}")))
}

/// The same minimizer through `U = sqrt(1 + r^{-2})`, the root `U > 1` of
/// `U^4 - U^3 - lambda U^2 + U - 1`.
pub fn r_lambda_quartic(lambda: f64) -> Result<f64> {
    ensure(lambda > 0.0, || format!("lambda must be positive, got {lambda}"))?;
    let p = |u: f64| (((u - 1.0) * u - lambda) * u + 1.0) * u - 1.0;
    // p(1) = -lambda < 0 and p grows like U^4
    let mut hi = 2.0;
    while p(hi) <= 0.0 {
        hi *= 2.0;
    }
    let u = bisect(p, 1.0, hi, 1e-16)?;
    // U^2 - 1 loses digits when U is near 1, i.e. for large r
    let um1 = u - 1.0;
    Ok(1.0 / (um1 * (u + 1.0)).sqrt())
}

/// `(rounded r, alpha bits) -> (g, g')`
type GCache = Mutex<HashMap<(i64, u64), (Estimate, Estimate)>>;

fn g_cache() -> &'static GCache {
    static CACHE: OnceLock<GCache> = OnceLock::new();
    CACHE.get_or_init(Default::default)
}

/// Round `r` to the cache grid of `1e-12`; `g` is always evaluated there
/// so results do not depend on the cache contents.
fn snap(r: f64) -> (i64, f64) {
    let k = (r * 1e12).round() as i64;
    (k, k as f64 * 1e-12)
}

fn family_pairs(r: f64) -> [Pair; 3] {
    let s = AnnulusFamily::outer(r);
    [
        Pair { a: s, b: s, weight: 1.0 },
        Pair { a: s, b: r, weight: -2.0 },
        Pair { a: r, b: r, weight: 1.0 },
    ]
}

fn g_and_derivative(r: f64, alpha: f64) -> Result<(Estimate, Estimate)> {
    check_r(r)?;
    ensure(alpha > 0.0 && alpha < 2.0, || format!("alpha must lie in (0, 2), got {alpha}"))?;
    let (key, r) = snap(r);
    if let Some(v) = g_cache().lock().unwrap().get(&(key, alpha.to_bits())) {
        return Ok(*v);
    }
    let s = AnnulusFamily::outer(r);
    let g = radial::concentric(Dim::Two, alpha, &family_pairs(r), G_TOL)?;
    // dV/dr_k = 2 s_k sum_j s_j dX(r_k, r_j)/da, and dr_out/dr = r/s
    let ds = r / s;
    let dpairs = [
        Pair { a: s, b: s, weight: 2.0 * ds },
        Pair { a: s, b: r, weight: -2.0 * ds },
        Pair { a: r, b: s, weight: -2.0 },
        Pair { a: r, b: r, weight: 2.0 },
    ];
    let dg = radial::concentric_da(Dim::Two, alpha, &dpairs, G_TOL)?;
    let mut cache = g_cache().lock().unwrap();
    if cache.len() > 100_000 {
        cache.clear();
    }
    cache.insert((key, alpha.to_bits()), (g, dg));
    Ok((g, dg))
}

/// Riesz energy of the centered unit-area annulus with inner radius `r`.
pub fn g_riesz(r: f64, alpha: f64) -> Result<f64> {
    Ok(g_and_derivative(r, alpha)?.0.value)
}

/// `g` with its quadrature error estimate.
pub fn g_riesz_estimate(r: f64, alpha: f64) -> Result<Estimate> {
    Ok(g_and_derivative(r, alpha)?.0)
}

/// `g'(r)` from the radial derivative of the covariogram.
pub fn g_riesz_prime(r: f64, alpha: f64) -> Result<f64> {
    Ok(g_and_derivative(r, alpha)?.1.value)
}

/// `h_{lambda,Q}(r) = f_lambda(r) + Q g(r)`.
pub fn h_charged(lambda: f64, q: f64, alpha: f64, r: f64) -> Result<f64> {
    let f = f_lambda(lambda, r)?;
    if q == 0.0 {
        return Ok(f);
    }
    Ok(f + q * g_riesz(r, alpha)?)
}

/// `h'_{lambda,Q}(r)`.
pub fn h_charged_prime(lambda: f64, q: f64, alpha: f64, r: f64) -> Result<f64> {
    let f = f_lambda_prime(lambda, r);
    if q == 0.0 {
        return Ok(f);
    }
    Ok(f + q * g_riesz_prime(r, alpha)?)
}

/// Minimizer of `h_{lambda,Q}` over the unit-area annulus family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimalAnnulus {
    pub r_star: f64,
    pub lambda: f64,
    #[serde(rename = "Q")]
    pub q: f64,
    pub alpha: f64,
    pub energy: f64,
    /// `r_star - r_lambda`
    pub shift: f64,
    /// `h'(r_star)`
    pub derivative: f64,
    /// Bracket of the final search.
    pub bracket: [f64; 2],
}

/// Golden-section search on a bracket around `r_lambda`, widened until the
/// minimum is interior, then polished by bisection on `h'`.
pub fn optimal_charged_annulus(lambda: f64, q: f64, alpha: f64) -> Result<OptimalAnnulus> {
    ensure(lambda > 0.0, || format!("lambda must be positive, got {lambda}"))?;
    ensure(q >= 0.0 && q.is_finite(), || format!("Q must be non-negative, got {q}"))?;
    ensure(alpha > 0.0 && alpha < 2.0, || format!("alpha must lie in (0, 2), got {alpha}"))?;
    let r0 = r_lambda(lambda)?;
    if q == 0.0 {
        let e = f_lambda(lambda, r0)?;
        return Ok(OptimalAnnulus {
            r_star: r0,
            lambda,
            q,
            alpha,
            energy: e,
            shift: 0.0,
            derivative: f_lambda_prime(lambda, r0),
            bracket: [r0, r0],
        });
    }
    let h = |r: f64| h_charged(lambda, q, alpha, r);
    // the charge pushes the minimizer outward, so r_lambda is a left end
    let lo = r0;
    let mut hi = 2.0 * r0;
    let mut widen = 0;
    while h_charged_prime(lambda, q, alpha, hi)? <= 0.0 {
        hi *= 2.0;
        widen += 1;
        if widen > 60 {
            return Err(Error::NoConvergence("h' stays negative".into()));
        }
    }
    let m = golden_section(h, lo, hi, 1e-6 * r0)?;
    let dh = |r: f64| h_charged_prime(lambda, q, alpha, r).unwrap_or(f64::NAN);
    // bracket the root of h' around the golden estimate with doubling steps
    let mut step = 1e-4 * m.x;
    let (mut a, mut b) = ((m.x - step).max(lo), (m.x + step).min(hi));
    while dh(a) > 0.0 && a > lo {
        step *= 2.0;
        a = (m.x - step).max(lo);
    }
    let mut step = 1e-4 * m.x;
    while dh(b) < 0.0 && b < hi {
        step *= 2.0;
        b = (m.x + step).min(hi);
    }
    let r_star = if dh(a) >= 0.0 {
        a
    } else {
        bisect(dh, a, b, 1e-14 * b)?
    };
    let energy = h(r_star)?;
    Ok(OptimalAnnulus {
        r_star,
        lambda,
        q,
        alpha,
        energy,
        shift: r_star - r0,
        derivative: h_charged_prime(lambda, q, alpha, r_star)?,
        bracket: [lo, hi],
    })
}

/// Riesz energy of the thin shell `B_1 \ B_{1 - eps}` and its rate
/// envelope: `eps^2` (`alpha > 1`), `eps^2 |ln eps|` (`alpha = 1`),
/// `eps^{1 + alpha}` (`alpha < 1`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShellRate {
    pub value: f64,
    pub error: f64,
    pub rate: f64,
}

pub fn shell_riesz_rate(eps: f64, alpha: f64, dim: Dim) -> Result<ShellRate> {
    ensure(eps > 0.0 && eps <= 0.5, || format!("epsilon must lie in (0, 1/2], got {eps}"))?;
    ensure(alpha > 0.0 && alpha < dim.get() as f64, || {
        format!("alpha must lie in (0, {dim}), got {alpha}")
    })?;
    let shell = AnnulusSpec::centered(dim, 1.0 - eps, 1.0)?;
    let v = crate::energies::riesz::riesz_annulus(&shell, alpha, 1e-10)?;
    let rate = if alpha > 1.0 {
        eps * eps
    } else if alpha == 1.0 {
        eps * eps * eps.ln().abs()
    } else {
        eps.powf(1.0 + alpha)
    };
    Ok(ShellRate {
        value: v.value,
        error: v.error,
        rate,
    })
}

/// Riesz energy of the spatial shell `B_{R + delta} \ B_R` with volume `|B_1|`.
pub fn large_shell_riesz(radius: f64, alpha: f64) -> Result<Estimate> {
    ensure(radius > 0.0, || format!("radius must be positive, got {radius}"))?;
    let outer = (radius.powi(3) + 1.0).cbrt();
    let shell = AnnulusSpec::centered(Dim::Three, radius, outer)?;
    crate::energies::riesz::riesz_annulus(&shell, alpha, 1e-10)
}

/// Lower bound `2 pi (2 sqrt(lambda) + lambda)` for `min_r f_lambda`.
pub fn f_lambda_lower_bound(lambda: f64) -> f64 {
    2.0 * PI * (2.0 * lambda.sqrt() + lambda)
}
