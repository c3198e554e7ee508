//! The discretized functional on a flat coefficient vector, its exact
//! local gradient and the finite-difference Riesz gradient.

use std::f64::consts::PI;

use crate::energies::elastica::{integrand, integrand_partials};
use crate::energies::riesz::cells::{CellGrid, CellKernel, Piece};
use crate::energies::EnergyParams;
use crate::error::{ensure, Error, Result};
use crate::geometry::{FourierCoeffs, FourierCurve, ModeTable, DEFAULT_SAMPLES};

use super::OptimShape;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Clearance kept between the inner and outer boundaries of an annulus.
pub(crate) const CONTAINMENT_MARGIN: f64 = 1e-3;

/// Fixed raster for the Riesz term. It never moves during a run, so the
/// discrete energy is one function of the coefficients.
struct RieszGrid {
    grid: CellGrid,
    kernel: CellKernel,
}

/// Layout: one coefficient block `[a0, a_1..a_K, b_1..b_K]` per boundary
/// (outer first) and, for annuli, the inner-center offset.
pub(crate) struct Objective {
    pub params: EnergyParams,
    table: ModeTable,
    order: usize,
    radii: Vec<f64>,
    center: [f64; 2],
    riesz: Option<RieszGrid>,
    fd_step: f64,
}

/// Energy at a point with what the gradient needs.
pub(crate) struct Eval {
    pub energy: f64,
    pub shape: OptimShape,
    /// `K w` on the Riesz grid.
    potential: Option<Vec<f64>>,
}

impl Objective {
    pub fn new(shape: &OptimShape, params: EnergyParams, order: usize, resolution: usize, fd_step: f64) -> Result<Self> {
        ensure(params.dim == crate::geometry::Dim::Two, || "shape optimization is planar: dim must be 2".into())?;
        params.validate()?;
        ensure(fd_step > 0.0 && fd_step < 1e-2, || format!("fd_step must lie in (0, 1e-2), got {fd_step}"))?;
        let curves = shape.curves();
        let order = order.max(2);
        ensure(curves.iter().all(|c| c.order() <= order), || {
            format!("initial shape has more than the allowed {order} modes")
        })?;
        let n = DEFAULT_SAMPLES.max(4 * order + 4);
        let mut obj = Self {
            params,
            table: ModeTable::new(n, order),
            order,
            radii: curves.iter().map(|c| c.base_radius()).collect(),
            center: curves[0].center(),
            riesz: None,
            fd_step,
        };
        if params.q > 0.0 {
            ensure(resolution >= 16, || "riesz_resolution must be at least 16".into())?;
            let pieces = obj.pieces(shape);
            let mut grid = CellGrid::covering(obj.center, &pieces, resolution);
            grid.half *= 1.25;
            obj.riesz = Some(RieszGrid {
                grid,
                kernel: CellKernel::new(resolution, params.alpha),
            });
        }
        Ok(obj)
    }

    pub fn is_annulus(&self) -> bool {
        self.radii.len() == 2
    }

    fn block(&self) -> usize {
        2 * self.order + 1
    }

    pub fn len(&self) -> usize {
        self.radii.len() * self.block() + if self.is_annulus() { 2 } else { 0 }
    }

    fn offset_at(&self) -> usize {
        2 * self.block()
    }

    /// Flattens a shape, padding every boundary to the working order.
    pub fn flatten(&self, shape: &OptimShape) -> Vec<f64> {
        let mut x: Vec<f64> = shape
            .curves()
            .iter()
            .flat_map(|c| c.coeffs().clone().padded(self.order).to_vec())
            .collect();
        if self.is_annulus() {
            x.extend(shape.offset());
        }
        x
    }

    fn coeffs(&self, x: &[f64], b: usize) -> FourierCoeffs {
        let m = self.block();
        FourierCoeffs::from_vec(&x[b * m..(b + 1) * m])
    }

    fn offset(&self, x: &[f64]) -> [f64; 2] {
        if self.is_annulus() {
            let o = self.offset_at();
            [x[o], x[o + 1]]
        } else {
            [0.0, 0.0]
        }
    }

    /// Builds the shape, rejecting non-graphs and annuli whose inner
    /// boundary comes within the clearance of the outer one.
    pub fn shape(&self, x: &[f64]) -> Result<OptimShape> {
        let outer = FourierCurve::new(self.radii[0], self.center, self.coeffs(x, 0))?;
        if !self.is_annulus() {
            return Ok(OptimShape::Ball { curve: outer });
        }
        let off = self.offset(x);
        let at = [self.center[0] + off[0], self.center[1] + off[1]];
        let inner = FourierCurve::new(self.radii[1], at, self.coeffs(x, 1))?;
        let ri = self.radii[1];
        let rho = self.table.synthesize(inner.coeffs()).rho;
        let oc = outer.coeffs();
        for (j, p) in rho.iter().enumerate() {
            let (s, c) = self.table.theta(j).sin_cos();
            let (px, py) = (off[0] + ri * p * c, off[1] + ri * p * s);
            let room = self.radii[0] * (1.0 + oc.eval(py.atan2(px)).0) - px.hypot(py);
            if room < CONTAINMENT_MARGIN {
                return Err(Error::InvalidInput(format!(
                    "inner boundary within {room:.3e} of the outer boundary"
                )));
            }
        }
        Ok(OptimShape::Annulus { outer, inner })
    }

    fn pieces(&self, shape: &OptimShape) -> Vec<(Piece, f64)> {
        match shape {
            OptimShape::Ball { curve } => vec![(Piece::Curve(curve.clone()), 1.0)],
            OptimShape::Annulus { outer, inner } => {
                vec![(Piece::Curve(outer.clone()), 1.0), (Piece::Curve(inner.clone()), -1.0)]
            }
        }
    }

    /// Enclosed area, signed per block.
    pub fn area(&self, x: &[f64]) -> f64 {
        (0..self.radii.len())
            .map(|b| {
                let s = self.table.synthesize(&self.coeffs(x, b));
                let a = 0.5 * self.radii[b].powi(2) * s.weight() * s.rho.iter().map(|r| r * r).sum::<f64>();
                if b == 0 { a } else { -a }
            })
            .sum()
    }

    /// Uniform dilation about the outer center to area `pi`.
    pub fn project(&self, x: &[f64]) -> Vec<f64> {
        let a = self.area(x);
        // NaN areas fall through unchanged too
        if a.is_nan() || a <= 0.0 {
            return x.to_vec();
        }
        let s = (PI / a).sqrt();
        let mut y: Vec<f64> = x.iter().map(|v| s * v).collect();
        for b in 0..self.radii.len() {
            let i = b * self.block();
            y[i] = s * (1.0 + x[i]) - 1.0;
        }
        y
    }

    /// `lambda P + W` summed over boundaries, with its exact gradient.
    pub fn local(&self, x: &[f64]) -> (f64, Vec<f64>) {
        let lambda = self.params.lambda;
        let mut grad = vec![0.0; self.len()];
        let mut total = 0.0;
        let m = self.block();
        for (b, &r) in self.radii.iter().enumerate() {
            let s = self.table.synthesize(&self.coeffs(x, b));
            let w = s.weight();
            let mut gp = vec![0.0; s.len()];
            let mut gq = vec![0.0; s.len()];
            let mut gs = vec![0.0; s.len()];
            for j in 0..s.len() {
                let (p, q, dd) = (s.rho[j], s.d1[j], s.d2[j]);
                let len = p.hypot(q);
                total += lambda * r * w * len + w / r * integrand(p, q, dd);
                let [fp, fq, fs] = integrand_partials(p, q, dd);
                gp[j] = lambda * r * w * p / len + w / r * fp;
                gq[j] = lambda * r * w * q / len + w / r * fq;
                gs[j] = w / r * fs;
            }
            let g = &mut grad[b * m..(b + 1) * m];
            g[0] = gp.iter().sum();
            for k in 1..=self.order {
                let kf = k as f64;
                let (c, sn) = (self.table.cos_k(k), self.table.sin_k(k));
                let (mut ga, mut gb) = (0.0, 0.0);
                for j in 0..s.len() {
                    ga += gp[j] * c[j] - kf * gq[j] * sn[j] - kf * kf * gs[j] * c[j];
                    gb += gp[j] * sn[j] + kf * gq[j] * c[j] - kf * kf * gs[j] * sn[j];
                }
                g[k] = ga;
                g[self.order + k] = gb;
            }
        }
        (total, grad)
    }

    /// Gradient of the signed area.
    fn area_grad(&self, x: &[f64]) -> Vec<f64> {
        let mut grad = vec![0.0; self.len()];
        let m = self.block();
        for (b, &r) in self.radii.iter().enumerate() {
            let s = self.table.synthesize(&self.coeffs(x, b));
            let f = r * r * s.weight() * if b == 0 { 1.0 } else { -1.0 };
            let g = &mut grad[b * m..(b + 1) * m];
            g[0] = f * s.rho.iter().sum::<f64>();
            for k in 1..=self.order {
                let (c, sn) = (self.table.cos_k(k), self.table.sin_k(k));
                g[k] = f * s.rho.iter().zip(c).map(|(p, c)| p * c).sum::<f64>();
                g[self.order + k] = f * s.rho.iter().zip(sn).map(|(p, s)| p * s).sum::<f64>();
            }
        }
        grad
    }

    /// Whether a coordinate moves. The mode-one coefficients of each
    /// boundary are frozen: a translated circle keeps `a_1` equal to the
    /// shift exactly, so they only fix the translation gauge, along which
    /// the energy is flat to high order.
    fn free(&self, i: usize) -> bool {
        let m = self.block();
        i >= self.radii.len() * m || !matches!(i % m, r if r == 1 || r == self.order + 1)
    }

    fn masked(&self, v: &[f64]) -> Vec<f64> {
        v.iter().enumerate().map(|(i, &a)| if self.free(i) { a } else { 0.0 }).collect()
    }

    /// Euclidean projection of `g` on the free directions that keep the
    /// area to first order. Vanishes at constrained critical points.
    pub fn tangential(&self, x: &[f64], g: &[f64]) -> Vec<f64> {
        let ga = self.masked(&self.area_grad(x));
        let g = self.masked(g);
        let c = dot(&ga, &g) / dot(&ga, &ga);
        g.iter().zip(&ga).map(|(a, b)| a - c * b).collect()
    }

    /// Descent direction: the preconditioned gradient, projected on the
    /// tangent space of the area constraint in the metric `M`. The
    /// dilation that follows only corrects second-order area drift.
    pub fn direction(&self, x: &[f64], g: &[f64], metric: &[f64]) -> Vec<f64> {
        let ga = self.masked(&self.area_grad(x));
        let g = self.masked(g);
        let mg: Vec<f64> = g.iter().zip(metric).map(|(a, m)| a * m).collect();
        let ma: Vec<f64> = ga.iter().zip(metric).map(|(a, m)| a * m).collect();
        let c = dot(&ga, &mg) / dot(&ga, &ma);
        mg.iter().zip(&ma).map(|(a, b)| c * b - a).collect()
    }

    /// Full energy, or an error if `x` is not admissible.
    pub fn evaluate(&self, x: &[f64]) -> Result<Eval> {
        let shape = self.shape(x)?;
        let (mut energy, _) = self.local(x);
        let mut potential = None;
        if let Some(rg) = &self.riesz {
            ensure(rg.grid.contains_piece(&Piece::Curve(shape.curves()[0].clone())), || {
                "shape left the Riesz raster".into()
            })?;
            let w = rg.grid.weights(&self.pieces(&shape));
            let u = rg.kernel.potential(&w);
            let v = self.cell_factor() * w.iter().zip(&u).map(|(a, b)| a * b).sum::<f64>();
            energy += self.params.q * v;
            potential = Some(u);
        }
        Ok(Eval { energy, shape, potential })
    }

    fn cell_factor(&self) -> f64 {
        self.riesz
            .as_ref()
            .map_or(0.0, |rg| rg.grid.h().powf(2.0 + self.params.alpha))
    }

    /// Raw gradient: exact for the local terms, central differences of
    /// the cell coverage for the Riesz term.
    pub fn gradient(&self, x: &[f64], at: &Eval) -> Result<Vec<f64>> {
        let (_, mut g) = self.local(x);
        if let (Some(rg), Some(u)) = (&self.riesz, &at.potential) {
            let h = self.fd_step;
            let f = self.params.q * self.cell_factor() / h;
            let flux = |base: &Piece, plus: &Piece, minus: &Piece, pad: f64, sign: f64| {
                let band = rg.grid.band(base, pad);
                let cp = rg.grid.coverage_at(plus, &band);
                let cm = rg.grid.coverage_at(minus, &band);
                sign * band.iter().zip(cp.iter().zip(&cm)).map(|(&i, (p, m))| (p - m) * u[i]).sum::<f64>()
            };
            let curves = at.shape.curves();
            let m = self.block();
            for (b, curve) in curves.iter().enumerate() {
                let sign = if b == 0 { 1.0 } else { -1.0 };
                let base = Piece::Curve((*curve).clone());
                let pad = 1.01 * h * self.radii[b];
                for i in 0..m {
                    let mut v = curve.coeffs().to_vec();
                    v[i] += h;
                    let plus = FourierCurve::new(self.radii[b], curve.center(), FourierCoeffs::from_vec(&v))?;
                    v[i] -= 2.0 * h;
                    let minus = FourierCurve::new(self.radii[b], curve.center(), FourierCoeffs::from_vec(&v))?;
                    g[b * m + i] += f * flux(&base, &Piece::Curve(plus), &Piece::Curve(minus), pad, sign);
                }
            }
            if let OptimShape::Annulus { inner, .. } = &at.shape {
                let base = Piece::Curve(inner.clone());
                let o = self.offset_at();
                for (axis, e) in [[h, 0.0], [0.0, h]].into_iter().enumerate() {
                    let plus = Piece::Curve(inner.translated(e));
                    let minus = Piece::Curve(inner.translated([-e[0], -e[1]]));
                    g[o + axis] += f * flux(&base, &plus, &minus, 1.01 * h, -1.0);
                }
            }
        }
        Ok(g)
    }

    /// Diagonal metric from the constrained second variation at the
    /// circle: mode `k >= 2` of a boundary of radius `R` gets the inverse of
    /// `2 pi (k^4 - 5/2 k^2 + 3/2) / R + pi lambda R (k^2 - 1)`, so unit
    /// steps are Newton steps near round shapes. `a0` gets
    /// `1 / (pi (1 / R + lambda R))`.
    pub fn metric(&self, x: &[f64]) -> Result<Vec<f64>> {
        let lambda = self.params.lambda;
        let mode = |k: usize, r: f64| {
            let k2 = (k * k) as f64;
            if k == 0 {
                1.0 / (PI * (1.0 / r + lambda * r))
            } else {
                let k2 = k2.max(4.0);
                1.0 / (2.0 * PI * (k2 * k2 - 2.5 * k2 + 1.5) / r + PI * lambda * r * (k2 - 1.0))
            }
        };
        let mut m = Vec::with_capacity(self.len());
        for &r in &self.radii {
            m.push(mode(0, r));
            for _ in 0..2 {
                m.extend((1..=self.order).map(|k| mode(k, r)));
            }
        }
        if self.is_annulus() {
            if let Some(c) = self.radial_curvature(x) {
                let m0 = self.block();
                m[0] = 1.0 / c;
                m[m0] = 1.0 / c;
            }
            // a unit offset moves the inner boundary like a mode-one coefficient of size 1/R
            let ri = self.radii[1];
            let fallback = ri * ri * mode(1, ri);
            let diag = if self.riesz.is_some() { self.offset_curvature(x)? } else { [0.0; 2] };
            m.extend(diag.iter().map(|&d| if d > 1e-12 { 1.0 / d } else { fallback }));
        }
        Ok(m)
    }

    /// Curvature of `E(S(.))` along the area-preserving change of both
    /// `a0` entries, i.e. along the annulus radius. Far flatter than the
    /// per-boundary estimate for thin annuli.
    fn radial_curvature(&self, x: &[f64]) -> Option<f64> {
        let m = self.block();
        let ga = self.area_grad(x);
        let (v0, v1) = (-ga[m], ga[0]);
        let len = v0.hypot(v1);
        let s = 1e-4;
        let e = |t: f64| {
            let mut y = x.to_vec();
            y[0] += t * s * v0 / len;
            y[m] += t * s * v1 / len;
            self.evaluate(&self.project(&y)).ok().map(|e| e.energy)
        };
        let c = (e(1.0)? - 2.0 * e(0.0)? + e(-1.0)?) / (s * s);
        (c > 0.0 && c.is_finite()).then_some(c)
    }

    /// Central differences of the offset gradient, the centering stiffness.
    fn offset_curvature(&self, x: &[f64]) -> Result<[f64; 2]> {
        let o = self.offset_at();
        let eps = 1e-3 * self.radii[1];
        let mut out = [0.0; 2];
        for (axis, d) in out.iter_mut().enumerate() {
            let side = |s: f64| -> Result<f64> {
                let mut y = x.to_vec();
                y[o + axis] += s * eps;
                let e = self.evaluate(&y)?;
                Ok(self.gradient(&y, &e)?[o + axis])
            };
            *d = match (side(1.0), side(-1.0)) {
                (Ok(p), Ok(m)) => (p - m) / (2.0 * eps),
                _ => 0.0,
            };
        }
        Ok(out)
    }
}
