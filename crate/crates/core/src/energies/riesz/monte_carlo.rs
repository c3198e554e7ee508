//! Sampling estimator used as an independent check of the quadratures.
//!
//! With `X` uniform on `E` and `Z` drawn with density proportional to
//! `|z|^{alpha - d}` on `|z| < D` (`D` at least the diameter),
//! `V = |E| c P(X + Z in E)` where `c = |S^{d-1}| D^alpha / alpha`. The
//! estimator is a scaled Bernoulli mean, so its variance is finite for
//! every `alpha in (0, d)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{ensure, Result};
use crate::geometry::{Dim, Point, Region};
use crate::quadrature::Estimate;

const CHUNK: u64 = 1 << 16;

fn uniform_in<R: Region + ?Sized, G: Rng>(region: &R, lo: &Point, hi: &Point, rng: &mut G) -> Point {
    let d = region.dim().get();
    loop {
        let mut p = [0.0; 3];
        for k in 0..d {
            p[k] = lo[k] + (hi[k] - lo[k]) * rng.random::<f64>();
        }
        if region.contains(&p) {
            return p;
        }
    }
}

fn direction<G: Rng>(dim: Dim, rng: &mut G) -> Point {
    match dim {
        Dim::Two => {
            let t = std::f64::consts::TAU * rng.random::<f64>();
            [t.cos(), t.sin(), 0.0]
        }
        Dim::Three => {
            let z = 2.0 * rng.random::<f64>() - 1.0;
            let t = std::f64::consts::TAU * rng.random::<f64>();
            let s = (1.0 - z * z).max(0.0).sqrt();
            [s * t.cos(), s * t.sin(), z]
        }
    }
}

/// Monte Carlo estimate of the Riesz energy with its standard error.
/// Chunks use independent streams of a seeded generator and are reduced in
/// index order, so the result depends only on `samples` and `seed`.
pub fn riesz_monte_carlo<R: Region + ?Sized>(
    region: &R,
    alpha: f64,
    samples: u64,
    seed: u64,
) -> Result<Estimate> {
    let dim = region.dim();
    ensure(alpha > 0.0 && alpha < dim.get() as f64, || {
        format!("alpha = {alpha} outside (0, {dim})")
    })?;
    ensure(samples > 1, || "need at least two samples".into())?;
    let (lo, hi) = region.bounds();
    let reach = region.diameter_bound();
    let chunks = samples.div_ceil(CHUNK);
    let hits: u64 = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(c);
            let n = CHUNK.min(samples - c * CHUNK);
            let mut hits = 0u64;
            for _ in 0..n {
                let x = uniform_in(region, &lo, &hi, &mut rng);
                let r = reach * rng.random::<f64>().powf(alpha.recip());
                let u = direction(dim, &mut rng);
                let y = [x[0] + r * u[0], x[1] + r * u[1], x[2] + r * u[2]];
                if region.contains(&y) {
                    hits += 1;
                }
            }
            hits
        })
        .collect::<Vec<_>>()
        .into_iter()
        .sum();
    let p = hits as f64 / samples as f64;
    let c = region.measure() * dim.unit_sphere_area() * reach.powf(alpha) / alpha;
    Ok(Estimate {
        value: c * p,
        error: c * (p * (1.0 - p) / (samples - 1) as f64).sqrt(),
    })
}
