use serde::{Deserialize, Serialize};
use std::f64::consts::{PI, TAU};

use super::{Dim, Point, Region};
use crate::error::{ensure, Error, Result};

/// Default number of uniform angle samples per curve.
pub const DEFAULT_SAMPLES: usize = 1024;

/// Real Fourier coefficients of a periodic perturbation
/// `phi(t) = a0 + sum_k a_k cos(k t) + b_k sin(k t)`, `k = 1..K`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct FourierCoeffs {
    pub a0: f64,
    #[serde(default)]
    pub a: Vec<f64>,
    #[serde(default)]
    pub b: Vec<f64>,
}

impl FourierCoeffs {
    pub fn zeros(order: usize) -> Self {
        Self {
            a0: 0.0,
            a: vec![0.0; order],
            b: vec![0.0; order],
        }
    }

    /// A single cosine mode `t cos(k theta)` padded to `order`.
    pub fn cosine(k: usize, t: f64, order: usize) -> Self {
        let mut c = Self::zeros(order.max(k));
        if k == 0 {
            c.a0 = t;
        } else {
            c.a[k - 1] = t;
        }
        c
    }

    pub fn order(&self) -> usize {
        self.a.len()
    }

    /// Pads with zero modes up to `order`.
    pub fn padded(mut self, order: usize) -> Self {
        if self.a.len() < order {
            self.a.resize(order, 0.0);
            self.b.resize(order, 0.0);
        }
        self
    }

    /// `(phi, phi', phi'')` at angle `theta`.
    pub fn eval(&self, theta: f64) -> (f64, f64, f64) {
        let (s1, c1) = theta.sin_cos();
        let (mut c, mut s) = (1.0, 0.0);
        let (mut p, mut d1, mut d2) = (self.a0, 0.0, 0.0);
        for (k, (&ak, &bk)) in self.a.iter().zip(&self.b).enumerate() {
            (c, s) = (c * c1 - s * s1, s * c1 + c * s1);
            let kf = (k + 1) as f64;
            p += ak * c + bk * s;
            d1 += kf * (bk * c - ak * s);
            d2 -= kf * kf * (ak * c + bk * s);
        }
        (p, d1, d2)
    }

    /// Coefficients as one flat vector `[a0, a_1..a_K, b_1..b_K]`.
    pub fn to_vec(&self) -> Vec<f64> {
        std::iter::once(self.a0)
            .chain(self.a.iter().copied())
            .chain(self.b.iter().copied())
            .collect()
    }

    pub fn from_vec(v: &[f64]) -> Self {
        let k = (v.len() - 1) / 2;
        Self {
            a0: v[0],
            a: v[1..=k].to_vec(),
            b: v[k + 1..=2 * k].to_vec(),
        }
    }

    /// Squared `L2(0, 2 pi)` norm.
    pub fn l2_sq(&self) -> f64 {
        2.0 * PI * self.a0 * self.a0
            + PI * self.a.iter().chain(&self.b).map(|x| x * x).sum::<f64>()
    }

    /// `sum |c|` over all coefficients, a bound for `sup |phi|`.
    pub fn abs_sum(&self) -> f64 {
        self.a0.abs() + self.a.iter().chain(&self.b).map(|x| x.abs()).sum::<f64>()
    }
}

/// Tabulated `cos(k theta_j)`, `sin(k theta_j)` on a uniform grid.
#[derive(Debug, Clone)]
pub struct ModeTable {
    n: usize,
    order: usize,
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl ModeTable {
    pub fn new(n: usize, order: usize) -> Self {
        let mut cos = vec![0.0; n * (order + 1)];
        let mut sin = vec![0.0; n * (order + 1)];
        for k in 0..=order {
            for j in 0..n {
                // reduce k*j mod n first so the argument stays small
                let (s, c) = (TAU * ((k * j) % n) as f64 / n as f64).sin_cos();
                cos[k * n + j] = c;
                sin[k * n + j] = s;
            }
        }
        Self { n, order, cos, sin }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn theta(&self, j: usize) -> f64 {
        TAU * j as f64 / self.n as f64
    }

    pub fn cos_k(&self, k: usize) -> &[f64] {
        &self.cos[k * self.n..(k + 1) * self.n]
    }

    pub fn sin_k(&self, k: usize) -> &[f64] {
        &self.sin[k * self.n..(k + 1) * self.n]
    }

    /// `1 + phi`, `phi'`, `phi''` on the grid.
    pub fn synthesize(&self, c: &FourierCoeffs) -> CurveSamples {
        assert!(c.order() <= self.order, "mode table too short");
        let n = self.n;
        let mut rho = vec![1.0 + c.a0; n];
        let mut d1 = vec![0.0; n];
        let mut d2 = vec![0.0; n];
        for (k0, (&ak, &bk)) in c.a.iter().zip(&c.b).enumerate() {
            if ak == 0.0 && bk == 0.0 {
                continue;
            }
            let k = k0 + 1;
            let kf = k as f64;
            let (ck, sk) = (self.cos_k(k), self.sin_k(k));
            for j in 0..n {
                let v = ak * ck[j] + bk * sk[j];
                rho[j] += v;
                d1[j] += kf * (bk * ck[j] - ak * sk[j]);
                d2[j] -= kf * kf * v;
            }
        }
        CurveSamples { rho, d1, d2 }
    }
}

/// Samples of `1 + phi`, `phi'` and `phi''` on a uniform angle grid.
#[derive(Debug, Clone)]
pub struct CurveSamples {
    pub rho: Vec<f64>,
    pub d1: Vec<f64>,
    pub d2: Vec<f64>,
}

impl CurveSamples {
    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }

    /// Trapezoidal weight of each sample on `[0, 2 pi)`.
    pub fn weight(&self) -> f64 {
        TAU / self.len() as f64
    }

    pub fn check_graph(&self) -> Result<()> {
        let n = self.len();
        match self
            .rho
            .iter()
            .enumerate()
            .find(|(_, &r)| !(r > 0.0 && r.is_finite()))
        {
            Some((j, &r)) => Err(Error::NotAGraph {
                theta: TAU * j as f64 / n as f64,
                value: r,
            }),
            None => Ok(()),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct CurveRepr {
    dim: Dim,
    center: Vec<f64>,
    base_radius: f64,
    coeffs: FourierCoeffs,
    #[serde(default)]
    n_samples: Option<usize>,
}

/// Star-shaped planar boundary `center + R (1 + phi(theta)) e^{i theta}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CurveRepr", into = "CurveOut")]
pub struct FourierCurve {
    base_radius: f64,
    center: [f64; 2],
    coeffs: FourierCoeffs,
    n_samples: usize,
}

#[derive(Serialize)]
struct CurveOut {
    dim: Dim,
    center: Vec<f64>,
    base_radius: f64,
    coeffs: FourierCoeffs,
    n_samples: usize,
}

impl From<FourierCurve> for CurveOut {
    fn from(c: FourierCurve) -> Self {
        CurveOut {
            dim: Dim::Two,
            center: c.center.to_vec(),
            base_radius: c.base_radius,
            coeffs: c.coeffs,
            n_samples: c.n_samples,
        }
    }
}

impl TryFrom<CurveRepr> for FourierCurve {
    type Error = Error;
    fn try_from(r: CurveRepr) -> Result<Self> {
        ensure(r.dim == Dim::Two, || "Fourier curves are planar: dim must be 2".into())?;
        ensure(r.center.len() == 2, || {
            format!("center has {} coordinates, expected 2", r.center.len())
        })?;
        ensure(r.coeffs.a.len() == r.coeffs.b.len(), || {
            format!(
                "coeffs.a has {} entries but coeffs.b has {}",
                r.coeffs.a.len(),
                r.coeffs.b.len()
            )
        })?;
        let c = FourierCurve::new(r.base_radius, [r.center[0], r.center[1]], r.coeffs)?;
        match r.n_samples {
            Some(n) => c.with_samples(n),
            None => Ok(c),
        }
    }
}

impl FourierCurve {
    /// Builds and validates a curve with the default sample count. Fewer
    /// than two modes are padded with zeros.
    pub fn new(base_radius: f64, center: [f64; 2], coeffs: FourierCoeffs) -> Result<Self> {
        ensure(base_radius > 0.0 && base_radius.is_finite(), || {
            format!("base_radius must be positive, got {base_radius}")
        })?;
        ensure(center.iter().all(|x| x.is_finite()), || "center is not finite".into())?;
        ensure(coeffs.a.len() == coeffs.b.len(), || {
            "cosine and sine coefficient lists differ in length".into()
        })?;
        ensure(coeffs.to_vec().iter().all(|x| x.is_finite()), || {
            "coefficients are not finite".into()
        })?;
        let coeffs = coeffs.padded(2);
        let n = DEFAULT_SAMPLES.max(4 * coeffs.order() + 4);
        let curve = Self {
            base_radius,
            center,
            coeffs,
            n_samples: n,
        };
        curve.samples().check_graph()?;
        Ok(curve)
    }

    pub fn circle(radius: f64, center: [f64; 2]) -> Result<Self> {
        Self::new(radius, center, FourierCoeffs::zeros(2))
    }

    pub fn with_samples(mut self, n: usize) -> Result<Self> {
        ensure(n >= 4 * self.order() + 4, || {
            format!(
                "n_samples = {n} aliases mode {}: need at least {}",
                self.order(),
                4 * self.order() + 4
            )
        })?;
        self.n_samples = n;
        self.samples().check_graph()?;
        Ok(self)
    }

    pub fn base_radius(&self) -> f64 {
        self.base_radius
    }

    pub fn center(&self) -> [f64; 2] {
        self.center
    }

    pub fn coeffs(&self) -> &FourierCoeffs {
        &self.coeffs
    }

    pub fn order(&self) -> usize {
        self.coeffs.order()
    }

    pub fn n_samples(&self) -> usize {
        self.n_samples
    }

    pub fn translated(&self, by: [f64; 2]) -> Self {
        let mut c = self.clone();
        c.center = [c.center[0] + by[0], c.center[1] + by[1]];
        c
    }

    /// Dilation by `s` about the curve's own center.
    pub fn scaled(&self, s: f64) -> Result<Self> {
        ensure(s > 0.0, || format!("scale factor must be positive, got {s}"))?;
        let mut c = self.clone();
        c.base_radius *= s;
        Ok(c)
    }

    /// Samples of `1 + phi` and derivatives on the curve's own grid.
    pub fn samples(&self) -> CurveSamples {
        ModeTable::new(self.n_samples, self.order()).synthesize(&self.coeffs)
    }

    /// Boundary radius `R (1 + phi(theta))` measured from the center.
    pub fn radius_at(&self, theta: f64) -> f64 {
        self.base_radius * (1.0 + self.coeffs.eval(theta).0)
    }

    /// `(R^2 / 2) int (1 + phi)^2`.
    pub fn area(&self) -> f64 {
        let s = self.samples();
        0.5 * self.base_radius.powi(2) * s.weight() * s.rho.iter().map(|r| r * r).sum::<f64>()
    }

    /// `R int sqrt(phi'^2 + (1 + phi)^2)`.
    pub fn perimeter(&self) -> f64 {
        let s = self.samples();
        self.base_radius * s.weight() * s.rho.iter().zip(&s.d1).map(|(r, d)| r.hypot(*d)).sum::<f64>()
    }

    /// Area barycenter from the boundary moment `int r^3 e^{i theta} / 3`.
    pub fn barycenter(&self) -> [f64; 2] {
        let [dx, dy] = self.barycenter_offset();
        [self.center[0] + dx, self.center[1] + dy]
    }

    /// Barycenter minus center.
    pub fn barycenter_offset(&self) -> [f64; 2] {
        let s = self.samples();
        let n = s.len();
        let (mut mx, mut my, mut m0) = (0.0, 0.0, 0.0);
        for j in 0..n {
            let (si, co) = (TAU * j as f64 / n as f64).sin_cos();
            let r2 = s.rho[j] * s.rho[j];
            m0 += r2;
            mx += r2 * s.rho[j] * co;
            my += r2 * s.rho[j] * si;
        }
        let scale = 2.0 * self.base_radius / (3.0 * m0);
        [scale * mx, scale * my]
    }

    /// Upper bound for the largest boundary radius.
    pub fn max_radius_bound(&self) -> f64 {
        self.base_radius * (1.0 + self.coeffs.abs_sum())
    }

    /// Smallest boundary radius over the sample grid.
    pub fn min_sampled_radius(&self) -> f64 {
        self.base_radius * self.samples().rho.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn contains_point(&self, x: f64, y: f64) -> bool {
        let (dx, dy) = (x - self.center[0], y - self.center[1]);
        dx.hypot(dy) < self.radius_at(dy.atan2(dx))
    }
}

impl Region for FourierCurve {
    fn dim(&self) -> Dim {
        Dim::Two
    }

    fn contains(&self, p: &Point) -> bool {
        self.contains_point(p[0], p[1])
    }

    fn bounds(&self) -> (Point, Point) {
        let r = self.max_radius_bound();
        (
            [self.center[0] - r, self.center[1] - r, 0.0],
            [self.center[0] + r, self.center[1] + r, 0.0],
        )
    }

    fn measure(&self) -> f64 {
        self.area()
    }

    fn diameter_bound(&self) -> f64 {
        2.0 * self.max_radius_bound()
    }
}
