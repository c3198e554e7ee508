//! Symmetric differences between radial graphs and balls, and the
//! translation-minimized asymmetry.

use std::f64::consts::{FRAC_1_SQRT_2 as H, PI, TAU};

use serde::{Deserialize, Serialize};

use super::{FourierCurve, ModeTable};
use crate::error::{ensure, Result};
use crate::quadrature::{bisect, integrate_pieces, Tolerance};

const DETECT: usize = 2048;

/// Integral over `[0, 2 pi]` of a function that is smooth apart from kinks
/// at the zeros of the `switches`. Zeros are bracketed on a uniform grid
/// and refined before adaptive integration.
fn integrate_with_kinks<F, S>(f: F, switches: &[S], grid: usize) -> Result<f64>
where
    F: Fn(f64) -> f64,
    S: Fn(f64) -> f64,
{
    let mut breaks: Vec<f64> = (0..=64).map(|j| TAU * j as f64 / 64.0).collect();
    for s in switches {
        let mut prev = s(0.0);
        for j in 1..=grid {
            let t = TAU * j as f64 / grid as f64;
            let cur = s(t);
            if prev.signum() != cur.signum() && prev != 0.0 && cur != 0.0 {
                let t0 = TAU * (j - 1) as f64 / grid as f64;
                if let Ok(root) = bisect(s, t0, t, 1e-15) {
                    breaks.push(root);
                }
            }
            prev = cur;
        }
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let tol = Tolerance::rel(1e-12).with_abs(1e-15);
    Ok(integrate_pieces(f, &breaks, tol)?.value)
}

/// `|A delta B|` for two radial graphs sharing a center:
/// `(1/2) int |r_a^2 - r_b^2|`.
pub fn symmetric_difference(a: &FourierCurve, b: &FourierCurve) -> Result<f64> {
    ensure(a.center() == b.center(), || {
        format!(
            "curves have different centers {:?} and {:?}; translate one first",
            a.center(),
            b.center()
        )
    })?;
    let g = |t: f64| a.radius_at(t).powi(2) - b.radius_at(t).powi(2);
    integrate_with_kinks(|t| 0.5 * g(t).abs(), &[g], DETECT)
}

/// `|E intersect B_rho(x)|` for a radial graph `E`, in polar coordinates
/// about the curve's center.
pub fn intersection_with_ball(curve: &FourierCurve, x: [f64; 2], rho: f64) -> Result<f64> {
    let c = curve.center();
    intersection_tabulated(curve, &boundary_table(curve), [x[0] - c[0], x[1] - c[1]], rho)
}

/// Boundary radii on the detection grid.
fn boundary_table(curve: &FourierCurve) -> Vec<f64> {
    let table = ModeTable::new(DETECT, curve.order());
    let s = table.synthesize(curve.coeffs());
    s.rho.iter().map(|r| curve.base_radius() * r).collect()
}

/// Same as [`intersection_with_ball`] with the ball center `v` given
/// relative to the curve center.
fn intersection_tabulated(curve: &FourierCurve, radii: &[f64], v: [f64; 2], rho: f64) -> Result<f64> {
    let vv = v[0] * v[0] + v[1] * v[1];
    // ray s e^{it} meets the ball for s in [uv - sqrt(disc), uv + sqrt(disc)]
    let ray = move |t: f64| {
        let uv = v[0] * t.cos() + v[1] * t.sin();
        (uv, uv * uv - vv + rho * rho)
    };
    let inside = move |t: f64| {
        let (uv, disc) = ray(t);
        if disc <= 0.0 {
            return 0.0;
        }
        let sq = disc.sqrt();
        let (s1, s2) = ((uv - sq).max(0.0), uv + sq);
        let top = curve.radius_at(t).min(s2);
        if top > s1 {
            0.5 * (top * top - s1 * s1)
        } else {
            0.0
        }
    };
    let r_grid = move |t: f64| {
        let j = (t / TAU * DETECT as f64).round() as usize;
        if j < DETECT && (TAU * j as f64 / DETECT as f64 - t).abs() < 1e-12 {
            radii[j]
        } else {
            curve.radius_at(t)
        }
    };
    let top_switch = |t: f64| {
        let (uv, disc) = ray(t);
        r_grid(t) - (uv + disc.max(0.0).sqrt())
    };
    let low_switch = |t: f64| {
        let (uv, disc) = ray(t);
        uv - disc.max(0.0).sqrt()
    };
    let disc_switch = |t: f64| ray(t).1;
    let switches: [&dyn Fn(f64) -> f64; 3] = [&top_switch, &low_switch, &disc_switch];
    integrate_with_kinks(inside, &switches, DETECT)
}

/// `|E delta B_rho(x)|`.
pub fn symmetric_difference_with_ball(curve: &FourierCurve, x: [f64; 2], rho: f64) -> Result<f64> {
    let inter = intersection_with_ball(curve, x, rho)?;
    Ok((curve.area() + PI * rho * rho - 2.0 * inter).max(0.0))
}

/// Minimal symmetric difference with a same-area ball and its center.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Asymmetry {
    pub value: f64,
    pub center: [f64; 2],
}

/// `min_x |E delta B(x)|` over translations of the ball with `|B| = |E|`.
/// A 5x5 grid of spacing `R/4` around the barycenter seeds a compass
/// search that stops at step `1e-6 R`.
pub fn asymmetry(curve: &FourierCurve) -> Result<Asymmetry> {
    let area = curve.area();
    let rho = (area / PI).sqrt();
    let scale = curve.base_radius();
    let radii = boundary_table(curve);
    let j = |x: [f64; 2]| -> Result<f64> {
        Ok((2.0 * (area - intersection_tabulated(curve, &radii, x, rho)?)).max(0.0))
    };
    // the search runs relative to the curve center, so it is exactly translation invariant
    let bary = curve.barycenter_offset();
    let mut best = (j(bary)?, bary);
    for i in -2..=2 {
        for k in -2..=2 {
            if i == 0 && k == 0 {
                continue;
            }
            let x = [bary[0] + 0.25 * scale * i as f64, bary[1] + 0.25 * scale * k as f64];
            let v = j(x)?;
            if v < best.0 {
                best = (v, x);
            }
        }
    }
    let mut step = 0.125 * scale;
    const DIRS: [[f64; 2]; 8] = [
        [1.0, 0.0],
        [-1.0, 0.0],
        [0.0, 1.0],
        [0.0, -1.0],
        [H, H],
        [-H, H],
        [H, -H],
        [-H, -H],
    ];
    while step > 1e-6 * scale {
        let mut moved = false;
        for d in DIRS {
            let x = [best.1[0] + step * d[0], best.1[1] + step * d[1]];
            let v = j(x)?;
            if v < best.0 {
                best = (v, x);
                moved = true;
                break;
            }
        }
        if !moved {
            step *= 0.5;
        }
    }
    let c = curve.center();
    Ok(Asymmetry {
        value: best.0,
        center: [c[0] + best.1[0], c[1] + best.1[1]],
    })
}

/// Pixel-counting estimate of `|E delta B_rho(x)|` on a `res x res`
/// raster covering both sets.
pub fn raster_symmetric_difference(curve: &FourierCurve, x: [f64; 2], rho: f64, res: usize) -> f64 {
    let c = curve.center();
    let rc = curve.max_radius_bound();
    let lo = [(c[0] - rc).min(x[0] - rho), (c[1] - rc).min(x[1] - rho)];
    let hi = [(c[0] + rc).max(x[0] + rho), (c[1] + rc).max(x[1] + rho)];
    let side = (hi[0] - lo[0]).max(hi[1] - lo[1]);
    let h = side / res as f64;
    let mut count = 0usize;
    for iy in 0..res {
        let py = lo[1] + (iy as f64 + 0.5) * h;
        for ix in 0..res {
            let px = lo[0] + (ix as f64 + 0.5) * h;
            let in_e = curve.contains_point(px, py);
            let in_b = (px - x[0]).hypot(py - x[1]) < rho;
            if in_e != in_b {
                count += 1;
            }
        }
    }
    count as f64 * h * h
}
