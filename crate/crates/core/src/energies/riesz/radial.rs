//! Riesz energies of unions and differences of round balls through the
//! covariogram: `int int_{B_a x B_b(c)} |x - y|^{alpha - d}` equals
//! `int |z|^{alpha - d} L(a, b, |c - z|) dz`, where `L` is the measure of
//! the intersection of two balls at the given center distance.

use std::f64::consts::PI;

use crate::error::Result;
use crate::geometry::Dim;
use crate::quadrature::{breakpoints, gauss_kronrod, integrate_pieces, Estimate, Tolerance};

/// Measure of `B_a(0) intersect B_b(u e)`.
pub fn lens(dim: Dim, a: f64, b: f64, u: f64) -> f64 {
    let u = u.abs();
    if u >= a + b {
        return 0.0;
    }
    let m = a.min(b);
    if u <= (a - b).abs() {
        return dim.unit_ball_volume() * m.powi(dim.get() as i32);
    }
    match dim {
        Dim::Two => {
            let d1 = (u * u + a * a - b * b) / (2.0 * u);
            let d2 = u - d1;
            let seg = |r: f64, d: f64| {
                let c = (d / r).clamp(-1.0, 1.0);
                r * r * c.acos() - d * (r * r - d * d).max(0.0).sqrt()
            };
            seg(a, d1) + seg(b, d2)
        }
        Dim::Three => {
            let s = a + b - u;
            PI * s * s * (u * u + 2.0 * u * (a + b) - 3.0 * (a - b) * (a - b)) / (12.0 * u)
        }
    }
}

/// `d/da` of [`lens`]: the measure of the part of the sphere of radius `a`
/// lying inside the other ball.
pub fn lens_da(dim: Dim, a: f64, b: f64, u: f64) -> f64 {
    let u = u.abs();
    if u >= a + b || u <= a - b {
        return 0.0;
    }
    if u <= b - a {
        return dim.unit_sphere_area() * a.powi(dim.get() as i32 - 1);
    }
    let cos_psi = ((u * u + a * a - b * b) / (2.0 * u * a)).clamp(-1.0, 1.0);
    match dim {
        Dim::Two => 2.0 * a * cos_psi.acos(),
        Dim::Three => 2.0 * PI * a * a * (1.0 - cos_psi),
    }
}

/// One term `weight * X(a, b)` of a concentric covariogram sum.
#[derive(Debug, Clone, Copy)]
pub struct Pair {
    pub a: f64,
    pub b: f64,
    pub weight: f64,
}

/// Sum of `weight * int |z|^{alpha - d} K(a, b, |z|) dz` over concentric
/// pairs with a common kernel `K` (the lens or its radial derivative).
fn concentric_with<K>(dim: Dim, alpha: f64, pairs: &[Pair], kernel: K, rel: f64) -> Result<Estimate>
where
    K: Fn(Dim, f64, f64, f64) -> f64,
{
    let pairs: Vec<Pair> = pairs.iter().copied().filter(|p| p.weight != 0.0).collect();
    if pairs.is_empty() {
        return Ok(Estimate::ZERO);
    }
    let top = pairs.iter().map(|p| p.a + p.b).fold(0.0, f64::max);
    let mut inner: Vec<f64> = pairs
        .iter()
        .flat_map(|p| [(p.a - p.b).abs(), p.a + p.b])
        .collect();
    inner.retain(|&x| x > 0.0);
    let breaks = breakpoints(0.0, top, inner);
    let gamma = |rho: f64| -> f64 {
        pairs
            .iter()
            .map(|p| p.weight * kernel(dim, p.a, p.b, rho))
            .sum()
    };
    // size of the individual terms sets the roundoff floor of the combination
    let scale: f64 = pairs
        .iter()
        .map(|p| {
            let m = p.a.min(p.b);
            p.weight.abs() * dim.unit_ball_volume() * m.powi(dim.get() as i32) * (p.a + p.b).powf(alpha)
                / alpha
        })
        .sum();
    let tol = Tolerance {
        rel,
        abs: 1e-15 * scale,
        max_intervals: 20_000,
    };
    let first = breaks[1];
    // u = rho^alpha removes the rho^{alpha - 1} singularity on the first piece
    let head = integrate_pieces(
        |u: f64| gamma(u.powf(alpha.recip())) / alpha,
        &[0.0, first.powf(alpha)],
        tol,
    )?;
    let tail = integrate_pieces(|rho: f64| rho.powf(alpha - 1.0) * gamma(rho), &breaks[1..], tol)?;
    let total = (head + tail).scale(dim.unit_sphere_area());
    Ok(Estimate {
        value: total.value,
        error: total.error + 1e-15 * scale * dim.unit_sphere_area(),
    })
}

/// `sum weight * int int_{B_a x B_b} |x - y|^{alpha - d}` for concentric balls.
pub fn concentric(dim: Dim, alpha: f64, pairs: &[Pair], rel: f64) -> Result<Estimate> {
    concentric_with(dim, alpha, pairs, lens, rel)
}

/// Derivative of [`concentric`] with respect to the first radius of every pair.
pub fn concentric_da(dim: Dim, alpha: f64, pairs: &[Pair], rel: f64) -> Result<Estimate> {
    concentric_with(dim, alpha, pairs, lens_da, rel)
}

/// `int int_{B_a(0) x B_b(t e)} |x - y|^{alpha - d}` for center distance `t > 0`.
pub fn offset_pair(dim: Dim, alpha: f64, a: f64, b: f64, t: f64, rel: f64) -> Result<Estimate> {
    if t == 0.0 {
        return concentric(dim, alpha, &[Pair { a, b, weight: 1.0 }], rel);
    }
    let kinks = [(a - b).abs(), a + b];
    // the full lens sets the absolute scale; near tangency the lens is
    // roundoff noise and only the absolute floor can be met
    let lens_scale = dim.unit_ball_volume() * a.min(b).powi(dim.get() as i32);
    let inner_tol = |width: f64| Tolerance::rel(1e-12).with_abs(1e-12 * lens_scale * width);
    let shell = |rho: f64| -> f64 {
        if rho <= 0.0 {
            return dim.unit_sphere_area() * lens(dim, a, b, t);
        }
        match dim {
            Dim::Two => {
                let u = |phi: f64| (rho * rho + t * t - 2.0 * rho * t * phi.cos()).max(0.0).sqrt();
                let cuts = kinks.iter().filter_map(|&u0| {
                    let c = (rho * rho + t * t - u0 * u0) / (2.0 * rho * t);
                    (c.abs() < 1.0).then(|| c.acos())
                });
                let br = breakpoints(0.0, PI, cuts);
                2.0 * integrate_pieces(|phi| lens(dim, a, b, u(phi)), &br, inner_tol(PI))
                    .map(|e| e.value)
                    .unwrap_or(f64::NAN)
            }
            Dim::Three => {
                let (lo, hi) = ((rho - t).abs(), rho + t);
                if hi - lo < 1e-6 * hi {
                    // a thin shell: one panel is accurate to roundoff
                    let g = gauss_kronrod(&mut |u: f64| u * lens(dim, a, b, u), lo, hi);
                    return 2.0 * PI / (rho * t) * g.value;
                }
                let br = breakpoints(lo, hi, kinks);
                2.0 * PI / (rho * t)
                    * integrate_pieces(|u| u * lens(dim, a, b, u), &br, inner_tol(hi * (hi - lo)))
                        .map(|e| e.value)
                        .unwrap_or(f64::NAN)
            }
        }
    };
    let lower = (t - a - b).max(0.0);
    let upper = t + a + b;
    let outer_kinks = kinks
        .iter()
        .flat_map(|&u0| [(u0 - t).abs(), u0 + t])
        .chain(std::iter::once(t));
    let breaks = breakpoints(lower, upper, outer_kinks);
    let scale = dim.unit_sphere_area()
        * dim.unit_ball_volume()
        * a.min(b).powi(dim.get() as i32)
        * upper.powf(alpha)
        / alpha;
    let tol = Tolerance {
        rel,
        abs: 1e-15 * scale,
        max_intervals: 4000,
    };
    let body = |rho: f64| rho.powf(alpha - 1.0) * shell(rho);
    let est = if lower == 0.0 {
        let head = integrate_pieces(
            |u: f64| shell(u.powf(alpha.recip())) / alpha,
            &[0.0, breaks[1].powf(alpha)],
            tol,
        )?;
        head + integrate_pieces(body, &breaks[1..], tol)?
    } else {
        integrate_pieces(body, &breaks, tol)?
    };
    if !est.value.is_finite() {
        return Err(crate::error::Error::NoConvergence(
            "inner angular integral failed".into(),
        ));
    }
    Ok(Estimate {
        value: est.value,
        error: est.error + 1e-12 * est.value.abs(),
    })
}

/// A signed ball: `+1` for a filled region, `-1` for a hole.
#[derive(Debug, Clone, Copy)]
pub struct SignedBall {
    pub center: [f64; 3],
    pub radius: f64,
    pub sign: f64,
}

/// Riesz energy of `sum_i sign_i 1_{B_i}` (a union of balls minus holes).
pub fn signed_balls(dim: Dim, alpha: f64, balls: &[SignedBall], rel: f64) -> Result<Estimate> {
    let mut groups: Vec<([f64; 3], Vec<SignedBall>)> = Vec::new();
    for b in balls {
        match groups.iter_mut().find(|(c, _)| *c == b.center) {
            Some((_, g)) => g.push(*b),
            None => groups.push((b.center, vec![*b])),
        }
    }
    let mut total = Estimate::ZERO;
    for (_, g) in &groups {
        let pairs: Vec<Pair> = g
            .iter()
            .flat_map(|x| {
                g.iter().map(move |y| Pair {
                    a: x.radius,
                    b: y.radius,
                    weight: x.sign * y.sign,
                })
            })
            .collect();
        total = total + concentric(dim, alpha, &pairs, rel)?;
    }
    for (i, (ci, gi)) in groups.iter().enumerate() {
        for (cj, gj) in groups.iter().skip(i + 1) {
            let t = ((ci[0] - cj[0]).powi(2) + (ci[1] - cj[1]).powi(2) + (ci[2] - cj[2]).powi(2)).sqrt();
            for x in gi {
                for y in gj {
                    let e = offset_pair(dim, alpha, x.radius, y.radius, t, rel)?;
                    total = total + e.scale(2.0 * x.sign * y.sign);
                }
            }
        }
    }
    Ok(total)
}
