//! Explicit lower bounds for connected sets and disconnected competitors.
//!
//! A minimizer must be connected, so a family of far-apart annuli (or
//! shells) whose energy sits strictly below every connected set's lower
//! bound proves that no minimizer exists.

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::energies::riesz::riesz_annulus;
use crate::error::{ensure, invalid, Result};
use crate::geometry::{AnnulusSpec, Dim};
use crate::quadrature::{bisect, Estimate};

/// Relative accuracy of competitor Riesz energies.
const COMPETITOR_TOL: f64 = 1e-8;

/// Relative safety margin on the minimized lower bounds, far above the
/// error of locating the minimum of a smooth convex function.
const BOUND_MARGIN: f64 = 1e-9;

/// Search grid for the competitor families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CertificateSearch {
    pub n_max: usize,
    /// Log-spaced radii per component count.
    pub r_points: usize,
    /// The radius grid spans `[seed / span, seed * span]`.
    pub r_span: f64,
}

impl Default for CertificateSearch {
    fn default() -> Self {
        Self {
            n_max: 64,
            r_points: 32,
            r_span: 32.0,
        }
    }
}

impl CertificateSearch {
    fn validate(&self) -> Result<()> {
        ensure(self.n_max >= 2, || "n_max must be at least 2".into())?;
        ensure(self.r_points >= 2, || "r_points must be at least 2".into())?;
        ensure(self.r_span > 1.0, || "r_span must exceed 1".into())
    }
}

/// Minimum over `d >= 2` of a convex function with increasing derivative
/// `df`, returned with the safety margin already subtracted.
fn convex_min_from_two(f: impl Fn(f64) -> f64, df: impl Fn(f64) -> f64) -> Result<f64> {
    if df(2.0) >= 0.0 {
        return Ok(f(2.0) * (1.0 - BOUND_MARGIN));
    }
    let mut hi = 4.0;
    while df(hi) < 0.0 {
        hi *= 2.0;
        if hi > 1e300 {
            // the infimum is approached only as d grows without bound
            return Ok(0.0);
        }
    }
    let d = bisect(&df, hi / 2.0, hi, 1e-14 * hi)?;
    Ok(f(d) * (1.0 - BOUND_MARGIN))
}

/// `min_{d >= 2} 2 lambda d + 4 pi / d + Q pi^2 d^{alpha - 2}`: perimeter at
/// least twice the diameter, bending at least `4 pi / d`, and a kernel no
/// smaller than `d^{alpha - 2}` on a connected planar set of area `pi`.
pub fn connected_lower_bound_2d(lambda: f64, q: f64, alpha: f64) -> Result<f64> {
    ensure(alpha > 0.0 && alpha < 2.0, || format!("alpha must lie in (0, 2), got {alpha}"))?;
    ensure(lambda >= 0.0 && q >= 0.0, || "lambda and Q must be non-negative".into())?;
    if lambda == 0.0 && q == 0.0 {
        return Err(invalid("the bound degenerates when lambda = Q = 0"));
    }
    let c = q * PI * PI;
    convex_min_from_two(
        |d| 2.0 * lambda * d + 2.0 * TAU / d + c * d.powf(alpha - 2.0),
        |d| 2.0 * lambda - 2.0 * TAU / (d * d) + c * (alpha - 2.0) * d.powf(alpha - 3.0),
    )
}

/// `min_{d >= 2} pi sqrt(lambda) d + Q (4 pi / 3)^2 d^{alpha - 3}`.
///
/// `lambda P + W >= 2 sqrt(lambda P W)` and the diameter inequality
/// `d <= (2 / pi) sqrt(P W)` give the first term; the kernel is at least
/// `d^{alpha - 3}` on a connected body of volume `4 pi / 3`, whose diameter
/// is at least 2.
pub fn connected_lower_bound_3d(lambda: f64, q: f64, alpha: f64) -> Result<f64> {
    ensure(alpha > 0.0 && alpha < 3.0, || format!("alpha must lie in (0, 3), got {alpha}"))?;
    ensure(lambda >= 0.0 && q >= 0.0, || "lambda and Q must be non-negative".into())?;
    if lambda == 0.0 && q == 0.0 {
        return Err(invalid("the bound degenerates when lambda = Q = 0"));
    }
    let a = PI * lambda.sqrt();
    let c = q * (4.0 * PI / 3.0).powi(2);
    convex_min_from_two(
        |d| a * d + c * d.powf(alpha - 3.0),
        |d| a + c * (alpha - 3.0) * d.powf(alpha - 4.0),
    )
}

/// Energy of a disconnected competitor, an upper bound once its error is added.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Competitor {
    pub n: usize,
    /// Outer radius of each annulus (plane) or inner radius of each shell (space).
    pub radius: f64,
    pub energy: f64,
    pub error: f64,
}

impl Competitor {
    pub fn upper(&self) -> f64 {
        self.energy + self.error
    }
}

fn check_common(n: usize, lambda: f64, q: f64) -> Result<()> {
    ensure(n >= 2, || format!("need at least two components, got {n}"))?;
    ensure(lambda >= 0.0 && q >= 0.0, || "lambda and Q must be non-negative".into())
}

/// Inner radius of a planar annulus of outer radius `r` and area `pi / n`.
fn planar_inner(n: usize, r: f64) -> Result<f64> {
    let s = r * r - 1.0 / n as f64;
    ensure(s > 0.0, || format!("outer radius {r} too small for area pi/{n}"))?;
    Ok(s.sqrt())
}

/// Perimeter and bending of `n` planar annuli; no Riesz term.
fn planar_local(n: usize, r: f64, lambda: f64) -> Result<f64> {
    let ri = planar_inner(n, r)?;
    Ok(n as f64 * TAU * (lambda * (ri + r) + 1.0 / ri + 1.0 / r))
}

/// `n` far-apart annuli of outer radius `r`, each of area `pi / n`. The
/// pairwise interactions are dropped since the components can be moved
/// arbitrarily far apart.
pub fn competitor_multi_annuli_2d(n: usize, r: f64, lambda: f64, q: f64, alpha: f64) -> Result<Competitor> {
    check_common(n, lambda, q)?;
    ensure(alpha > 0.0 && alpha < 2.0, || format!("alpha must lie in (0, 2), got {alpha}"))?;
    let local = planar_local(n, r, lambda)?;
    let v = if q > 0.0 {
        single_annulus_riesz(Dim::Two, planar_inner(n, r)?, r, alpha)?
    } else {
        Estimate::ZERO
    };
    let nq = n as f64 * q;
    Ok(Competitor {
        n,
        radius: r,
        energy: local + nq * v.value,
        error: nq * v.error,
    })
}

fn single_annulus_riesz(dim: Dim, r_in: f64, r_out: f64, alpha: f64) -> Result<Estimate> {
    let spec = AnnulusSpec::centered(dim, r_in, r_out)?;
    riesz_annulus(&spec, alpha, COMPETITOR_TOL)
}

/// Outer radius of a shell of inner radius `r` and volume `|B_1| / n`.
fn shell_outer(n: usize, r: f64) -> f64 {
    (r.powi(3) + 1.0 / n as f64).cbrt()
}

fn spatial_local(n: usize, r: f64, lambda: f64) -> f64 {
    let ro = shell_outer(n, r);
    n as f64 * (lambda * 2.0 * TAU * (r * r + ro * ro) + 4.0 * TAU)
}

/// `n` far-apart spherical shells of inner radius `r` with total volume `|B_1|`.
pub fn competitor_shells_3d(n: usize, r: f64, lambda: f64, q: f64, alpha: f64) -> Result<Competitor> {
    check_common(n, lambda, q)?;
    ensure(r > 0.0, || format!("inner radius must be positive, got {r}"))?;
    ensure(alpha > 0.0 && alpha < 3.0, || format!("alpha must lie in (0, 3), got {alpha}"))?;
    let local = spatial_local(n, r, lambda);
    let v = if q > 0.0 {
        single_annulus_riesz(Dim::Three, r, shell_outer(n, r), alpha)?
    } else {
        Estimate::ZERO
    };
    let nq = n as f64 * q;
    Ok(Competitor {
        n,
        radius: r,
        energy: local + nq * v.value,
        error: nq * v.error,
    })
}

/// Outcome of a certificate search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub certified: bool,
    /// Best competitor found, if any was evaluated.
    pub witness: Option<Competitor>,
    pub lower_bound: f64,
    /// `lower_bound - (energy + error)` of the witness; positive when certified.
    pub margin: f64,
    pub dim: Dim,
}

fn log_grid(lo: f64, hi: f64, n: usize) -> impl Iterator<Item = f64> {
    let step = (hi / lo).ln() / (n - 1) as f64;
    (0..n).map(move |i| lo * (step * i as f64).exp())
}

/// Seed radius from the scaling argument: `(Q / (N^2 lambda))^{1/(3-alpha)}`
/// but never below `max(1, lambda^{-1/2})`.
pub fn planar_seed_radius(n: usize, lambda: f64, q: f64, alpha: f64) -> f64 {
    let opt = (q / ((n * n) as f64 * lambda)).powf(1.0 / (3.0 - alpha));
    opt.max(1.0).max(lambda.sqrt().recip())
}

/// Seed inner radius of the shell competitor: `lambda^{-1/2}`.
pub fn spatial_seed_radius(lambda: f64) -> f64 {
    lambda.sqrt().recip()
}

/// Candidates evaluated together; fixed so the outcome ignores the pool size.
const BATCH: usize = 8;

/// Best-first minimization over the `(n, r)` grid. `floor` must bound the
/// competitor energy from below, so candidates are visited by increasing
/// floor and the walk stops once the floor reaches the best upper value.
/// The witness is the same as for an exhaustive scan.
fn search<L, E>(
    search: &CertificateSearch,
    lower_bound: f64,
    dim: Dim,
    seed: impl Fn(usize) -> f64,
    min_radius: impl Fn(usize) -> f64,
    floor: L,
    eval: E,
) -> Result<Certificate>
where
    L: Fn(usize, f64) -> Result<f64>,
    E: Fn(usize, f64) -> Result<Competitor> + Sync,
{
    search.validate()?;
    let mut candidates = Vec::new();
    for n in 2..=search.n_max {
        let s = seed(n);
        let lo = (s / search.r_span).max(min_radius(n));
        let hi = (s * search.r_span).max(lo * 2.0);
        for r in log_grid(lo, hi, search.r_points) {
            let f = floor(n, r)?;
            if f < lower_bound {
                candidates.push((f, n, r));
            }
        }
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut witness: Option<Competitor> = None;
    for batch in candidates.chunks(BATCH) {
        let live: Vec<_> = batch
            .iter()
            .filter(|(f, _, _)| witness.is_none_or(|w| *f < w.upper()))
            .collect();
        if live.is_empty() {
            break;
        }
        let evaluated: Vec<Result<Competitor>> = live.par_iter().map(|&&(_, n, r)| eval(n, r)).collect();
        for c in evaluated {
            let c = c?;
            if witness.is_none_or(|w| c.upper() < w.upper()) {
                witness = Some(c);
            }
        }
    }
    let margin = witness.map_or(f64::NEG_INFINITY, |w| lower_bound - w.upper());
    Ok(Certificate {
        certified: margin > 0.0,
        witness,
        lower_bound,
        margin,
        dim,
    })
}

/// `Q n |E|^2 d^{alpha - d}` for `n` components of measure `|E|` and
/// diameter at most `diam`: the kernel never drops below its value at the
/// diameter.
fn riesz_floor(n: usize, q: f64, measure: f64, diam: f64, alpha: f64, dim: Dim) -> f64 {
    let d = match dim {
        Dim::Two => 2.0,
        Dim::Three => 3.0,
    };
    n as f64 * q * measure * measure * diam.powf(alpha - d)
}

/// Planar non-existence certificate for `alpha in (1, 2)`.
pub fn nonexistence_certificate_2d(
    lambda: f64,
    q: f64,
    alpha: f64,
    grid: &CertificateSearch,
) -> Result<Certificate> {
    ensure(alpha > 1.0 && alpha < 2.0, || format!("the planar certificate needs alpha in (1, 2), got {alpha}"))?;
    ensure(lambda > 0.0 && q > 0.0, || "lambda and Q must be positive".into())?;
    let lb = connected_lower_bound_2d(lambda, q, alpha)?;
    search(
        grid,
        lb,
        Dim::Two,
        |n| planar_seed_radius(n, lambda, q, alpha),
        |n| (1.0 / n as f64).sqrt() * (1.0 + 1e-6),
        |n, r| Ok(planar_local(n, r, lambda)? + riesz_floor(n, q, PI / n as f64, 2.0 * r, alpha, Dim::Two)),
        |n, r| competitor_multi_annuli_2d(n, r, lambda, q, alpha),
    )
}

/// Spatial non-existence certificate for `alpha in (2, 3)`.
pub fn nonexistence_certificate_3d(
    lambda: f64,
    q: f64,
    alpha: f64,
    grid: &CertificateSearch,
) -> Result<Certificate> {
    ensure(alpha > 2.0 && alpha < 3.0, || format!("the spatial certificate needs alpha in (2, 3), got {alpha}"))?;
    ensure(lambda > 0.0 && q > 0.0, || "lambda and Q must be positive".into())?;
    let lb = connected_lower_bound_3d(lambda, q, alpha)?;
    search(
        grid,
        lb,
        Dim::Three,
        |_| spatial_seed_radius(lambda),
        |_| 0.0,
        |n, r| {
            let vol = 4.0 * PI / (3.0 * n as f64);
            Ok(spatial_local(n, r, lambda) + riesz_floor(n, q, vol, 2.0 * shell_outer(n, r), alpha, Dim::Three))
        },
        |n, r| competitor_shells_3d(n, r, lambda, q, alpha),
    )
}

/// Dispatch on the dimension.
pub fn nonexistence_certificate(
    lambda: f64,
    q: f64,
    alpha: f64,
    dim: Dim,
    grid: &CertificateSearch,
) -> Result<Certificate> {
    match dim {
        Dim::Two => nonexistence_certificate_2d(lambda, q, alpha, grid),
        Dim::Three => nonexistence_certificate_3d(lambda, q, alpha, grid),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn am_gm_closed_form() {
        let lb = connected_lower_bound_2d(1.0, 0.0, 1.0).unwrap();
        let exact = 4.0 * TAU.sqrt();
        assert!(lb <= exact && (lb - exact).abs() < 1e-8 * exact, "{lb}");
        assert!(connected_lower_bound_2d(0.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn two_annuli_closed_form() {
        let c = competitor_multi_annuli_2d(2, 1.0, 1.0, 0.0, 1.5).unwrap();
        let h = 0.5f64.sqrt();
        let e = 2.0 * (TAU * (h + 1.0) + TAU * (2f64.sqrt() + 1.0));
        assert!((c.energy - e).abs() < 1e-10);
        assert!(competitor_multi_annuli_2d(4, 0.5, 1.0, 0.0, 1.5).is_err());
    }

    #[test]
    fn small_charge_is_not_certified() {
        let g = CertificateSearch::default();
        assert!(!nonexistence_certificate_2d(1.0, 0.01, 1.5, &g).unwrap().certified);
        assert!(!nonexistence_certificate_3d(1.0, 0.1, 2.5, &g).unwrap().certified);
    }
}
