//! Nearly round curves `r = 1 + phi(theta)`: second-order expansions of
//! elastica and perimeter, the constraint projection, and the empirical
//! deficit experiment.

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::energies::elastica_energy;
use crate::error::{ensure, Error, Result};
use crate::geometry::{asymmetry, FourierCoeffs, FourierCurve, ModeTable, DEFAULT_SAMPLES};

/// Largest `sum |c|` (a bound for `sup |phi|`) accepted by the projection.
pub const MAX_PROJECTABLE_NORM: f64 = 0.1;

const PROJECTION_TOL: f64 = 1e-12;
const PROJECTION_ITERS: usize = 50;

/// Sum over modes `k >= 1` of `weight(k) (a_k^2 + b_k^2)`.
fn mode_sum(c: &FourierCoeffs, weight: impl Fn(f64) -> f64) -> f64 {
    c.a.iter()
        .zip(&c.b)
        .enumerate()
        .map(|(i, (a, b))| weight((i + 1) as f64) * (a * a + b * b))
        .sum()
}

/// `(int phi^2 + phi'^2 + phi''^2)^{1/2}`.
pub fn w22_norm(c: &FourierCoeffs) -> f64 {
    (TAU * c.a0 * c.a0 + PI * mode_sum(c, |k| 1.0 + k * k + k.powi(4))).sqrt()
}

/// A perturbation with its norm and constraint residuals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Perturbation {
    pub coeffs: FourierCoeffs,
    pub norm_w22: f64,
    /// `int (phi + phi^2 / 2)`
    pub volume_residual: f64,
    /// `|int ((1 + phi)^3 - 1) e^{i theta}|`
    pub barycenter_residual: f64,
}

impl Perturbation {
    pub fn new(coeffs: FourierCoeffs) -> Self {
        let coeffs = coeffs.padded(2);
        let [v, bc, bs] = residuals(&table_for(&coeffs), &coeffs);
        Self {
            norm_w22: w22_norm(&coeffs),
            volume_residual: v,
            barycenter_residual: bc.hypot(bs),
            coeffs,
        }
    }

    /// The unit-radius curve `1 + phi` centered at the origin.
    pub fn curve(&self) -> Result<FourierCurve> {
        FourierCurve::new(1.0, [0.0, 0.0], self.coeffs.clone())
    }
}

fn table_for(c: &FourierCoeffs) -> ModeTable {
    ModeTable::new(DEFAULT_SAMPLES.max(4 * c.order() + 4), c.order())
}

/// Volume and barycenter residuals, exact on the grid since the integrands
/// are trigonometric polynomials of degree at most `3K + 1`.
fn residuals(t: &ModeTable, c: &FourierCoeffs) -> [f64; 3] {
    let s = t.synthesize(c);
    let w = s.weight();
    let (c1, s1) = (t.cos_k(1), t.sin_k(1));
    s.rho.iter().enumerate().fold([0.0; 3], |[v, bc, bs], (j, &p)| {
        let phi = p - 1.0;
        let cube = p * p * p - 1.0;
        [
            v + w * (phi + 0.5 * phi * phi),
            bc + w * cube * c1[j],
            bs + w * cube * s1[j],
        ]
    })
}

/// Jacobian of [`residuals`] with respect to `(a0, a1, b1)`.
fn jacobian(t: &ModeTable, c: &FourierCoeffs) -> [[f64; 3]; 3] {
    let s = t.synthesize(c);
    let w = s.weight();
    let (c1, s1) = (t.cos_k(1), t.sin_k(1));
    let mut j = [[0.0; 3]; 3];
    for (i, &p) in s.rho.iter().enumerate() {
        let basis = [1.0, c1[i], s1[i]];
        let sq = 3.0 * p * p;
        for col in 0..3 {
            j[0][col] += w * p * basis[col];
            j[1][col] += w * sq * basis[col] * c1[i];
            j[2][col] += w * sq * basis[col] * s1[i];
        }
    }
    j
}

/// Gaussian elimination with partial pivoting.
fn solve3(mut m: [[f64; 3]; 3], mut r: [f64; 3]) -> Result<[f64; 3]> {
    for col in 0..3 {
        let piv = (col..3)
            .max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))
            .unwrap_or(col);
        if m[piv][col].abs() < 1e-300 {
            return Err(Error::NoConvergence("singular constraint Jacobian".into()));
        }
        m.swap(col, piv);
        r.swap(col, piv);
        for row in col + 1..3 {
            let f = m[row][col] / m[col][col];
            let pivot_row = m[col];
            for (x, p) in m[row][col..].iter_mut().zip(&pivot_row[col..]) {
                *x -= f * p;
            }
            r[row] -= f * r[col];
        }
    }
    let mut x = [0.0; 3];
    for row in (0..3).rev() {
        let s: f64 = (row + 1..3).map(|k| m[row][k] * x[k]).sum();
        x[row] = (r[row] - s) / m[row][row];
    }
    Ok(x)
}

/// Newton correction of `a0` (area `pi`) and the first modes (barycenter
/// at the origin); higher modes are left alone.
pub fn project_constraints(phi: &FourierCoeffs) -> Result<Perturbation> {
    // Newton contracts when sup |phi| is small; sum |c| bounds it
    let size = phi.abs_sum();
    ensure(size <= MAX_PROJECTABLE_NORM * (1.0 + 1e-12), || {
        format!("coefficient sum {size:.4} exceeds the projectable bound {MAX_PROJECTABLE_NORM}")
    })?;
    let mut c = phi.clone().padded(2);
    let table = table_for(&c);
    for _ in 0..PROJECTION_ITERS {
        let r = residuals(&table, &c);
        // the same norms that Perturbation reports
        if r[0].abs() <= PROJECTION_TOL && r[1].hypot(r[2]) <= PROJECTION_TOL {
            return Ok(Perturbation::new(c));
        }
        let dx = solve3(jacobian(&table, &c), r)?;
        c.a0 -= dx[0];
        c.a[0] -= dx[1];
        c.b[0] -= dx[2];
    }
    Err(Error::NoConvergence(format!(
        "constraint projection did not reach {PROJECTION_TOL:e} in {PROJECTION_ITERS} steps"
    )))
}

/// `R^{-1} int (phi''^2 + phi^2 + 3/2 phi'^2 - phi + 4 phi phi'')`, the
/// second-order expansion of `W(E) - W(B_R)` without constraints.
pub fn taylor_elastica_deficit(phi: &FourierCoeffs, base_radius: f64) -> f64 {
    let form = TAU * (phi.a0 * phi.a0 - phi.a0)
        + PI * mode_sum(phi, |k| k.powi(4) + 1.0 + 1.5 * k * k - 4.0 * k * k);
    form / base_radius
}

/// `int (phi''^2 + 3/2 phi^2 + 3/2 phi'^2 + 4 phi phi'')`, the expansion
/// once `int phi = -int phi^2 / 2` has been substituted.
pub fn constrained_quadratic_form(phi: &FourierCoeffs) -> f64 {
    3.0 * PI * phi.a0 * phi.a0 + PI * mode_sum(phi, spectrum_coefficient)
}

/// `R int (phi + phi'^2 / 2)`, the expansion of `P(E) - P(B_R)`.
pub fn taylor_perimeter_deficit(phi: &FourierCoeffs, base_radius: f64) -> f64 {
    base_radius * (TAU * phi.a0 + 0.5 * PI * mode_sum(phi, |k| k * k))
}

/// `k^4 - 5/2 k^2 + 3/2`.
pub fn spectrum_coefficient(k: f64) -> f64 {
    k.powi(4) - 2.5 * k * k + 1.5
}

/// `(k, k^4 - 5/2 k^2 + 3/2)` for `k = 0..=max_k`.
pub fn quadratic_form_spectrum(max_k: usize) -> Vec<(usize, f64)> {
    (0..=max_k).map(|k| (k, spectrum_coefficient(k as f64))).collect()
}

/// Exact and predicted deficits of the projected pure mode `t cos(k theta)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PureModeDeficit {
    pub k: usize,
    pub t: f64,
    pub exact: f64,
    pub prediction: f64,
}

pub fn pure_mode_deficit(k: usize, t: f64) -> Result<PureModeDeficit> {
    ensure(k >= 1, || "mode index must be at least 1".into())?;
    let p = project_constraints(&FourierCoeffs::cosine(k, t, k))?;
    Ok(PureModeDeficit {
        k,
        t,
        exact: elastica_energy(&p.curve()?)? - TAU,
        prediction: constrained_quadratic_form(&p.coeffs),
    })
}

/// Order-two extrapolation of `f(t) / t^2` to `t = 0`, for `f` even in `t`.
pub fn richardson_quadratic(mut f: impl FnMut(f64) -> Result<f64>, t: f64) -> Result<f64> {
    let full = f(t)? / (t * t);
    let half = f(0.5 * t)? / (0.25 * t * t);
    Ok((4.0 * half - full) / 3.0)
}

/// Taylor consistency of the exact elastica against the quadratic form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaylorCheck {
    pub k: usize,
    pub t: f64,
    /// `(W(E) - 2 pi) / t^2`
    pub exact_coefficient: f64,
    /// Extrapolated limit of the same quotient.
    pub richardson: f64,
    /// `pi (k^4 - 5/2 k^2 + 3/2)`
    pub predicted: f64,
    /// Relative gap between the exact deficit and the quadratic form at `t`.
    pub rel_error: f64,
}

pub fn taylor_consistency(k: usize, t: f64) -> Result<TaylorCheck> {
    let d = pure_mode_deficit(k, t)?;
    let richardson = richardson_quadratic(|s| Ok(pure_mode_deficit(k, s)?.exact), t)?;
    Ok(TaylorCheck {
        k,
        t,
        exact_coefficient: d.exact / (t * t),
        richardson,
        predicted: PI * spectrum_coefficient(k as f64),
        rel_error: (d.exact - d.prediction).abs() / d.prediction.abs(),
    })
}

/// Random constrained perturbations for the deficit experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DeficitConfig {
    /// Inclusive mode range.
    #[serde(default = "default_modes")]
    pub modes: [usize; 2],
    /// Target `W^{2,2}` norms, cycled by trial index.
    #[serde(default = "default_norms")]
    pub norms: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
}

fn default_modes() -> [usize; 2] {
    [2, 8]
}

fn default_norms() -> Vec<f64> {
    vec![0.01, 0.05, 0.1]
}

impl DeficitConfig {
    pub fn new(trials: usize, seed: u64) -> Self {
        Self {
            modes: default_modes(),
            norms: default_norms(),
            trials,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        let [lo, hi] = self.modes;
        ensure(lo >= 2 && hi >= lo, || format!("modes must satisfy 2 <= lo <= hi, got {:?}", self.modes))?;
        ensure(!self.norms.is_empty(), || "norms must not be empty".into())?;
        ensure(self.norms.iter().all(|&n| n > 0.0 && n <= 0.1), || {
            "norms must lie in (0, 0.1]".into()
        })?;
        ensure(self.trials >= 1, || "need at least one trial".into())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeficitSample {
    pub trial: usize,
    /// `W^{2,2}` norm of the projected perturbation.
    pub t: f64,
    pub exact_deficit: f64,
    pub quadratic_prediction: f64,
    pub asymmetry_sq: f64,
    pub perimeter_deficit: f64,
    pub ratio_c0: f64,
    pub ratio_c1: f64,
}

/// Lower envelope of a ratio: the minimum and the 5th percentile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub min: f64,
    pub p05: f64,
    pub count: usize,
}

impl Envelope {
    fn of(values: impl Iterator<Item = f64>) -> Self {
        let mut v: Vec<f64> = values.collect();
        v.sort_by(f64::total_cmp);
        let count = v.len();
        let at = |q: f64| v.get(((count.saturating_sub(1)) as f64 * q).floor() as usize).copied();
        Self {
            min: at(0.0).unwrap_or(f64::NAN),
            p05: at(0.05).unwrap_or(f64::NAN),
            count,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeficitReport {
    pub samples: Vec<DeficitSample>,
    /// Draws discarded because `1 + phi` was not positive.
    pub rejected: usize,
    /// Envelope of `deficit / asymmetry^2`.
    pub c0: Envelope,
    /// Envelope of `deficit / perimeter deficit`.
    pub c1: Envelope,
}

fn draw(rng: &mut ChaCha8Rng, modes: [usize; 2], norm: f64) -> FourierCoeffs {
    let mut c = FourierCoeffs::zeros(modes[1]);
    for k in modes[0]..=modes[1] {
        c.a[k - 1] = rng.random_range(-1.0..=1.0);
        c.b[k - 1] = rng.random_range(-1.0..=1.0);
    }
    let s = norm / w22_norm(&c);
    c.a.iter_mut().chain(c.b.iter_mut()).for_each(|x| *x *= s);
    c
}

fn run_trial(cfg: &DeficitConfig, trial: usize) -> Result<(DeficitSample, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(trial as u64);
    let norm = cfg.norms[trial % cfg.norms.len()];
    let mut rejected = 0;
    loop {
        let raw = draw(&mut rng, cfg.modes, norm);
        let p = match project_constraints(&raw) {
            Ok(p) => p,
            Err(_) => {
                rejected += 1;
                continue;
            }
        };
        let curve = match p.curve() {
            Ok(c) => c,
            Err(Error::NotAGraph { .. }) => {
                rejected += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        if rejected > 1000 {
            return Err(Error::BudgetExhausted(rejected));
        }
        let exact = elastica_energy(&curve)? - TAU;
        let asym = asymmetry(&curve)?.value;
        let per = curve.perimeter() - TAU;
        let sample = DeficitSample {
            trial,
            t: p.norm_w22,
            exact_deficit: exact,
            quadratic_prediction: constrained_quadratic_form(&p.coeffs),
            asymmetry_sq: asym * asym,
            perimeter_deficit: per,
            ratio_c0: exact / (asym * asym),
            ratio_c1: exact / per,
        };
        return Ok((sample, rejected));
    }
}

/// Runs the trials in parallel; samples are ordered by trial index and
/// depend only on the configuration.
pub fn deficit_experiment(cfg: &DeficitConfig) -> Result<DeficitReport> {
    cfg.validate()?;
    let results: Vec<(DeficitSample, usize)> = (0..cfg.trials)
        .into_par_iter()
        .map(|i| run_trial(cfg, i))
        .collect::<Result<_>>()?;
    let rejected = results.iter().map(|r| r.1).sum();
    let samples: Vec<DeficitSample> = results.into_iter().map(|r| r.0).collect();
    Ok(DeficitReport {
        c0: Envelope::of(samples.iter().map(|s| s.ratio_c0)),
        c1: Envelope::of(samples.iter().map(|s| s.ratio_c1)),
        samples,
        rejected,
    })
}

pub const DEFICIT_CSV_HEADER: &str = "t,deficit,prediction,asymmetry_sq,perimeter_deficit,ratio_c0,ratio_c1";

pub fn deficit_csv(samples: &[DeficitSample]) -> String {
    let mut out = String::from(DEFICIT_CSV_HEADER);
    out.push('\n');
    for s in samples {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            s.t, s.exact_deficit, s.quadratic_prediction, s.asymmetry_sq, s.perimeter_deficit, s.ratio_c0, s.ratio_c1
        );
    }
    out
}
