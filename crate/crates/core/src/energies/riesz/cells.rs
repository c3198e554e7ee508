//! Cell quadrature for planar regions.
//!
//! The region is represented by coverage weights `w_p` on a square grid of
//! side `h`; the energy is `h^{2+alpha} sum_{p,q} w_p w_q K(q - p)` where
//! `K(m)` is the exact interaction of two unit cells at lattice offset `m`
//! (computed by quadrature near the diagonal and by a moment expansion
//! farther out). The double sum is an FFT convolution.

use std::collections::HashMap;
use std::f64::consts::FRAC_PI_2;
use std::sync::{Arc, Mutex, OnceLock};

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::geometry::{Boundary, Configuration, FourierCurve};
use crate::quadrature::{integrate, Estimate, Tolerance};

/// Offsets with `max(|m1|, |m2|) <= NEAR` use the exact cell-pair integral.
const NEAR: usize = 8;

/// Signed integral of `(A1 + B1 x)(A2 + B2 y) |(x, y)|^{alpha - 2}` over
/// `[0, X] x [0, Y]`, in polar coordinates with the radial part exact.
fn corner_rect(alpha: f64, x: f64, y: f64, a1: f64, b1: f64, a2: f64, b2: f64) -> f64 {
    if x <= 0.0 || y <= 0.0 {
        return 0.0;
    }
    let radial = |t: f64, p: f64| {
        let (s, c) = t.sin_cos();
        a1 * a2 * p.powf(alpha) / alpha
            + (b1 * a2 * c + a1 * b2 * s) * p.powf(alpha + 1.0) / (alpha + 1.0)
            + b1 * b2 * c * s * p.powf(alpha + 2.0) / (alpha + 2.0)
    };
    let split = y.atan2(x);
    // cancellation between the polynomial terms can defeat a pure relative target
    let size = (a1.abs() + b1.abs() * x) * (a2.abs() + b2.abs() * y) * x.hypot(y).powf(alpha) / alpha;
    let tol = Tolerance::rel(1e-14).with_abs(1e-15 * size);
    let lower = integrate(|t| radial(t, x / t.cos()), 0.0, split, tol);
    let upper = integrate(|t| radial(t, y / t.sin()), split, FRAC_PI_2, tol);
    lower.map(|e| e.value).unwrap_or(f64::NAN) + upper.map(|e| e.value).unwrap_or(f64::NAN)
}

/// `int_{[-1,1]^2} (1 - |w1|)(1 - |w2|) |m + w|^{alpha - 2} dw`: the mean
/// kernel between two unit cells whose corners differ by `m`.
pub fn cell_pair(alpha: f64, m: [i64; 2]) -> f64 {
    let c = [-(m[0] as f64), -(m[1] as f64)];
    let mut total = 0.0;
    for (s1, x0, x1) in [(-1.0, -1.0, 0.0), (1.0, 0.0, 1.0)] {
        for (s2, y0, y1) in [(-1.0, -1.0, 0.0), (1.0, 0.0, 1.0)] {
            // tent weights restricted to one quadrant are a bilinear polynomial
            let corner = |xe: f64, ye: f64| {
                let (dx, dy) = (xe - c[0], ye - c[1]);
                if dx == 0.0 || dy == 0.0 {
                    return 0.0;
                }
                let (sx, sy) = (dx.signum(), dy.signum());
                let a1 = 1.0 - s1 * c[0];
                let b1 = -s1 * sx;
                let a2 = 1.0 - s2 * c[1];
                let b2 = -s2 * sy;
                sx * sy * corner_rect(alpha, dx.abs(), dy.abs(), a1, b1, a2, b2)
            };
            total += corner(x1, y1) - corner(x0, y1) - corner(x1, y0) + corner(x0, y0);
        }
    }
    total
}

/// Moment expansion `|m|^p (1 + p^2 / (12 |m|^2))`, `p = alpha - 2`.
fn cell_pair_far(alpha: f64, m: [i64; 2]) -> f64 {
    let r2 = (m[0] * m[0] + m[1] * m[1]) as f64;
    let p = alpha - 2.0;
    r2.powf(0.5 * p) * (1.0 + p * p / (12.0 * r2))
}

struct NearTable {
    values: Vec<f64>,
}

impl NearTable {
    fn new(alpha: f64) -> Self {
        let mut values = vec![0.0; (NEAR + 1) * (NEAR + 1)];
        for i in 0..=NEAR {
            for j in 0..=i {
                let v = cell_pair(alpha, [i as i64, j as i64]);
                values[i * (NEAR + 1) + j] = v;
                values[j * (NEAR + 1) + i] = v;
            }
        }
        Self { values }
    }

    fn get(&self, alpha: f64, m: [i64; 2]) -> f64 {
        let (a, b) = (m[0].unsigned_abs() as usize, m[1].unsigned_abs() as usize);
        if a <= NEAR && b <= NEAR {
            self.values[a * (NEAR + 1) + b]
        } else {
            cell_pair_far(alpha, m)
        }
    }
}

fn near_table(alpha: f64) -> Arc<NearTable> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Arc<NearTable>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(Default::default);
    if let Some(t) = cache.lock().unwrap().get(&alpha.to_bits()) {
        return t.clone();
    }
    let t = Arc::new(NearTable::new(alpha));
    cache.lock().unwrap().insert(alpha.to_bits(), t.clone());
    t
}

/// In-place 2D FFT of an `n x n` row-major array.
fn fft2(data: &mut [Complex64], n: usize, inverse: bool) {
    let mut planner = FftPlanner::new();
    let fft = if inverse {
        planner.plan_fft_inverse(n)
    } else {
        planner.plan_fft_forward(n)
    };
    fft.process(data);
    transpose(data, n);
    fft.process(data);
    transpose(data, n);
}

fn transpose(data: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in i + 1..n {
            data.swap(i * n + j, j * n + i);
        }
    }
}

/// Spectrum of the cell kernel on the zero-padded grid of an `n x n` raster.
pub struct CellKernel {
    n: usize,
    alpha: f64,
    spectrum: Arc<Vec<Complex64>>,
}

type SpectrumCache = Mutex<HashMap<(usize, u64), Arc<Vec<Complex64>>>>;

impl CellKernel {
    pub fn new(n: usize, alpha: f64) -> Self {
        static CACHE: OnceLock<SpectrumCache> = OnceLock::new();
        let cache = CACHE.get_or_init(Default::default);
        let key = (n, alpha.to_bits());
        if let Some(s) = cache.lock().unwrap().get(&key) {
            return Self {
                n,
                alpha,
                spectrum: s.clone(),
            };
        }
        let table = near_table(alpha);
        let big = 2 * n;
        let mut k = vec![Complex64::new(0.0, 0.0); big * big];
        for iy in 0..big {
            let my = if iy < n { iy as i64 } else if iy > n { iy as i64 - big as i64 } else { continue };
            for ix in 0..big {
                let mx = if ix < n { ix as i64 } else if ix > n { ix as i64 - big as i64 } else { continue };
                k[iy * big + ix].re = table.get(alpha, [mx, my]);
            }
        }
        fft2(&mut k, big, false);
        let spectrum = Arc::new(k);
        let mut guard = cache.lock().unwrap();
        if guard.len() > 6 {
            guard.clear();
        }
        guard.insert(key, spectrum.clone());
        Self { n, alpha, spectrum }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// `u_p = sum_q K(q - p) w_q` for row-major weights `w`.
    pub fn potential(&self, w: &[f64]) -> Vec<f64> {
        let (n, big) = (self.n, 2 * self.n);
        assert_eq!(w.len(), n * n);
        let mut buf = vec![Complex64::new(0.0, 0.0); big * big];
        for iy in 0..n {
            for ix in 0..n {
                buf[iy * big + ix].re = w[iy * n + ix];
            }
        }
        fft2(&mut buf, big, false);
        for (b, k) in buf.iter_mut().zip(self.spectrum.iter()) {
            *b *= k;
        }
        fft2(&mut buf, big, true);
        let norm = (big * big) as f64;
        let mut u = vec![0.0; n * n];
        for iy in 0..n {
            for ix in 0..n {
                u[iy * n + ix] = buf[iy * big + ix].re / norm;
            }
        }
        u
    }
}

/// A filled (`sign = 1`) or removed (`sign = -1`) star-shaped piece.
#[derive(Debug, Clone)]
pub enum Piece {
    Curve(FourierCurve),
    Disk { center: [f64; 2], radius: f64 },
}

impl Piece {
    pub fn center(&self) -> [f64; 2] {
        match self {
            Piece::Curve(c) => c.center(),
            Piece::Disk { center, .. } => *center,
        }
    }

    /// Radius bounds `(inner, outer)`.
    fn radius_bounds(&self) -> (f64, f64) {
        match self {
            Piece::Curve(c) => (c.min_sampled_radius(), c.max_radius_bound()),
            Piece::Disk { radius, .. } => (*radius, *radius),
        }
    }

    fn radius_and_slope(&self, theta: f64) -> (f64, f64) {
        match self {
            Piece::Curve(c) => {
                let (p, d1, _) = c.coeffs().eval(theta);
                (c.base_radius() * (1.0 + p), c.base_radius() * d1)
            }
            Piece::Disk { radius, .. } => (*radius, 0.0),
        }
    }

    fn from_boundary(b: &Boundary) -> Result<Self> {
        match b {
            Boundary::Curve(c) => Ok(Piece::Curve(c.clone())),
            Boundary::Sphere(s) if s.dim == crate::geometry::Dim::Two => Ok(Piece::Disk {
                center: [s.center[0], s.center[1]],
                radius: s.radius,
            }),
            Boundary::Sphere(_) => Err(Error::InvalidInput(
                "cell quadrature handles planar shapes only".into(),
            )),
        }
    }
}

/// Fraction of the square `[-1/2, 1/2]^2` lying in `{x . n < t - (c1 + c2)/2}`
/// for a unit normal with `c1 = max(|n_x|, |n_y|)`, `c2 = min(...)`.
fn square_cut(c1: f64, c2: f64, t: f64) -> f64 {
    if t <= 0.0 {
        return 0.0;
    }
    if t >= c1 + c2 {
        return 1.0;
    }
    if c2 < 1e-12 {
        return (t / c1).clamp(0.0, 1.0);
    }
    if t <= c2 {
        t * t / (2.0 * c1 * c2)
    } else if t <= c1 {
        (t - 0.5 * c2) / c1
    } else {
        let s = c1 + c2 - t;
        1.0 - s * s / (2.0 * c1 * c2)
    }
}

/// Square raster anchored at a point: cell `(ix, iy)` has center
/// `anchor + (-half + (ix + 1/2) h, -half + (iy + 1/2) h)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellGrid {
    pub anchor: [f64; 2],
    pub half: f64,
    pub n: usize,
}

impl CellGrid {
    pub fn h(&self) -> f64 {
        2.0 * self.half / self.n as f64
    }

    /// Cell center relative to the anchor.
    fn local(&self, ix: usize, iy: usize) -> [f64; 2] {
        let h = self.h();
        [-self.half + (ix as f64 + 0.5) * h, -self.half + (iy as f64 + 0.5) * h]
    }

    /// Grid of `n` cells per side around `anchor` covering all `pieces`.
    pub fn covering(anchor: [f64; 2], pieces: &[(Piece, f64)], n: usize) -> Self {
        let mut half: f64 = 0.0;
        for (p, _) in pieces {
            let c = p.center();
            let r = p.radius_bounds().1;
            half = half
                .max((c[0] - anchor[0]).abs() + r)
                .max((c[1] - anchor[1]).abs() + r);
        }
        // one spare cell on each side keeps every boundary cell inside
        half *= n as f64 / (n as f64 - 2.0);
        Self { anchor, half, n }
    }

    /// Fraction of cell `(ix, iy)` inside `piece`.
    /// `bounds` are the piece's radius bounds, hoisted out of cell loops.
    fn coverage(&self, piece: &Piece, bounds: (f64, f64), ix: usize, iy: usize) -> f64 {
        let h = self.h();
        let c = piece.center();
        let p = self.local(ix, iy);
        let (dx, dy) = (p[0] - (c[0] - self.anchor[0]), p[1] - (c[1] - self.anchor[1]));
        let rho = dx.hypot(dy);
        let (r_lo, r_hi) = bounds;
        if rho + h < r_lo {
            return 1.0;
        }
        if rho - h > r_hi {
            return 0.0;
        }
        let theta = if rho > 0.0 { dy.atan2(dx) } else { 0.0 };
        let (r, dr) = piece.radius_and_slope(theta);
        let len = r.hypot(dr);
        let (s, co) = theta.sin_cos();
        let nx = (r * co + dr * s) / len;
        let ny = (r * s - dr * co) / len;
        let dist = (r - rho) * r / len;
        let (c1, c2) = if nx.abs() >= ny.abs() {
            (nx.abs(), ny.abs())
        } else {
            (ny.abs(), nx.abs())
        };
        square_cut(c1, c2, dist / h + 0.5 * (c1 + c2))
    }

    /// Coverage weights of `sum sign * 1_piece`.
    pub fn weights(&self, pieces: &[(Piece, f64)]) -> Vec<f64> {
        let n = self.n;
        let mut w = vec![0.0; n * n];
        for (piece, sign) in pieces {
            let bounds = piece.radius_bounds();
            for iy in 0..n {
                for ix in 0..n {
                    w[iy * n + ix] += sign * self.coverage(piece, bounds, ix, iy);
                }
            }
        }
        w
    }

    /// Row-major indices of the cells whose coverage by `piece` can change
    /// when its boundary moves radially by at most `pad`.
    pub fn band(&self, piece: &Piece, pad: f64) -> Vec<usize> {
        let n = self.n;
        let h = self.h();
        let c = piece.center();
        let off = [c[0] - self.anchor[0], c[1] - self.anchor[1]];
        let (r_lo, r_hi) = piece.radius_bounds();
        let (lo, hi) = (r_lo - h - pad, r_hi + h + pad);
        let mut out = Vec::new();
        for iy in 0..n {
            for ix in 0..n {
                let p = self.local(ix, iy);
                let rho = (p[0] - off[0]).hypot(p[1] - off[1]);
                if rho >= lo && rho <= hi {
                    out.push(iy * n + ix);
                }
            }
        }
        out
    }

    /// Coverage of the listed cells by `piece`.
    pub fn coverage_at(&self, piece: &Piece, cells: &[usize]) -> Vec<f64> {
        let bounds = piece.radius_bounds();
        cells
            .iter()
            .map(|&i| self.coverage(piece, bounds, i % self.n, i / self.n))
            .collect()
    }

    /// True when every cell within one cell of the border is empty of `piece`.
    pub fn contains_piece(&self, piece: &Piece) -> bool {
        let c = piece.center();
        let r = piece.radius_bounds().1;
        let room = self.half - self.h();
        (c[0] - self.anchor[0]).abs() + r < room && (c[1] - self.anchor[1]).abs() + r < room
    }
}

/// `h^{2 + alpha} sum_p w_p (K w)_p`.
pub fn grid_energy(grid: &CellGrid, kernel: &CellKernel, w: &[f64]) -> f64 {
    let u = kernel.potential(w);
    grid.h().powf(2.0 + kernel.alpha()) * w.iter().zip(&u).map(|(a, b)| a * b).sum::<f64>()
}

/// Bilinear interaction `int_F int_G |x - y|^{alpha - 2}` on a common grid.
pub fn cross(grid: &CellGrid, kernel: &CellKernel, wf: &[f64], wg: &[f64]) -> f64 {
    let u = kernel.potential(wg);
    grid.h().powf(2.0 + kernel.alpha()) * wf.iter().zip(&u).map(|(a, b)| a * b).sum::<f64>()
}

/// Cell-quadrature energy with resolution doubling from `n_min` until two
/// successive values agree to `rel`.
pub fn riesz_cells(
    pieces: &[(Piece, f64)],
    alpha: f64,
    rel: f64,
    n_min: usize,
    n_max: usize,
) -> Result<Estimate> {
    let anchor = pieces
        .first()
        .map(|(p, _)| p.center())
        .ok_or_else(|| Error::InvalidInput("nothing to integrate".into()))?;
    let mut n = n_min.max(16);
    let mut prev: Option<f64> = None;
    let mut last_err = f64::INFINITY;
    while n <= n_max {
        let grid = CellGrid::covering(anchor, pieces, n);
        let kernel = CellKernel::new(n, alpha);
        let w = grid.weights(pieces);
        let v = grid_energy(&grid, &kernel, &w);
        if let Some(p) = prev {
            last_err = (v - p).abs();
            if last_err <= rel * v.abs() {
                return Ok(Estimate {
                    value: v,
                    error: last_err,
                });
            }
        }
        prev = Some(v);
        n *= 2;
    }
    Err(Error::Quadrature {
        target: rel,
        estimate: last_err / prev.unwrap_or(1.0).abs(),
        budget: n_max,
    })
}

/// Signed pieces of a planar configuration.
pub fn configuration_pieces(cfg: &Configuration) -> Result<Vec<(Piece, f64)>> {
    let mut out = Vec::new();
    for c in cfg.components() {
        out.push((Piece::from_boundary(&c.outer)?, 1.0));
        for h in &c.holes {
            out.push((Piece::from_boundary(h)?, -1.0));
        }
    }
    Ok(out)
}
