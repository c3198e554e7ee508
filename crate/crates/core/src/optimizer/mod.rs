//! Projected gradient descent on Fourier-parametrized shapes at fixed area
//! `pi`, in ball topology (one curve) or annulus topology (outer curve,
//! inner curve and the inner-center offset). Topology never changes.
//!
//! Each step moves along the preconditioned gradient projected on the
//! tangent space of the area constraint, then restores the area exactly by
//! a uniform dilation about the outer center. Backtracking
//! (halving, Armijo constant `1e-4`) rejects steps that raise the energy,
//! break the radial-graph property or bring the inner boundary within
//! `1e-3` of the outer one.

mod objective;

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::energies::EnergyParams;
use crate::error::{ensure, Error, Result};
use crate::geometry::{asymmetry, FourierCoeffs, FourierCurve};

use objective::Objective;

const ARMIJO: f64 = 1e-4;
const MAX_HALVINGS: usize = 60;
const MAX_STEP: f64 = 1.0;
/// Iterations without a decrease beyond the Armijo slack before giving up.
const STAGNATION: usize = 25;

/// A shape together with its topology.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "topology", rename_all = "snake_case", deny_unknown_fields)]
pub enum OptimShape {
    Ball { curve: FourierCurve },
    Annulus { outer: FourierCurve, inner: FourierCurve },
}

impl OptimShape {
    /// `t cos(k theta)` on the unit circle.
    pub fn perturbed_ball(k: usize, t: f64) -> Result<Self> {
        Ok(OptimShape::Ball {
            curve: FourierCurve::new(1.0, [0.0, 0.0], FourierCoeffs::cosine(k, t, k.max(2)))?,
        })
    }

    /// Annulus with inner radius `r` and outer radius `sqrt(1 + r^2)`, both
    /// boundaries carrying the relative perturbation `t cos(k theta)`.
    pub fn perturbed_annulus(r: f64, k: usize, t: f64) -> Result<Self> {
        ensure(r > 0.0, || format!("inner radius must be positive, got {r}"))?;
        let c = FourierCoeffs::cosine(k, t, k.max(2));
        Ok(OptimShape::Annulus {
            outer: FourierCurve::new((1.0 + r * r).sqrt(), [0.0, 0.0], c.clone())?,
            inner: FourierCurve::new(r, [0.0, 0.0], c)?,
        })
    }

    /// Outer boundary first.
    pub fn curves(&self) -> Vec<&FourierCurve> {
        match self {
            OptimShape::Ball { curve } => vec![curve],
            OptimShape::Annulus { outer, inner } => vec![outer, inner],
        }
    }

    /// Inner center minus outer center; zero for balls.
    pub fn offset(&self) -> [f64; 2] {
        match self {
            OptimShape::Ball { .. } => [0.0, 0.0],
            OptimShape::Annulus { outer, inner } => {
                let (a, b) = (outer.center(), inner.center());
                [b[0] - a[0], b[1] - a[1]]
            }
        }
    }

    pub fn area(&self) -> f64 {
        match self {
            OptimShape::Ball { curve } => curve.area(),
            OptimShape::Annulus { outer, inner } => outer.area() - inner.area(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimOptions {
    pub max_iters: usize,
    pub grad_tol: f64,
    /// Number of Fourier modes per boundary.
    pub order: usize,
    /// Cells per side of the Riesz raster.
    pub riesz_resolution: usize,
    /// Central-difference step of the Riesz gradient.
    pub fd_step: f64,
}

impl Default for OptimOptions {
    fn default() -> Self {
        Self {
            max_iters: 500,
            grad_tol: 1e-8,
            order: 8,
            riesz_resolution: 128,
            fd_step: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimState {
    pub shape: OptimShape,
    pub params: EnergyParams,
    pub step: f64,
    pub energy: f64,
    pub iteration: usize,
    pub grad_norm: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryPoint {
    pub iteration: usize,
    pub energy: f64,
    pub grad_norm: f64,
    /// Step length accepted to reach this point; zero for the start.
    pub step: f64,
    /// `|offset|` of an annulus; zero for balls. Not part of the CSV.
    pub offset: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Converged,
    BudgetExhausted,
    /// Backtracking found no admissible decrease.
    LineSearchStalled,
    /// Accepted steps stopped lowering the energy beyond rounding noise
    /// and the gradient stopped shrinking.
    Stagnated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Primitive {
    Ball,
    CenteredAnnulus,
}

/// Nearest round primitive of the final shape and the distance to it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassificationHint {
    pub nearest: Primitive,
    /// Asymmetry for balls; the sum of both boundary asymmetries plus
    /// `2 pi r_in |offset|` for annuli.
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimResult {
    pub state: OptimState,
    pub trajectory: Vec<TrajectoryPoint>,
    pub converged: bool,
    pub stop_reason: StopReason,
    pub hint: ClassificationHint,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn offset_norm(shape: &OptimShape) -> f64 {
    let [x, y] = shape.offset();
    x.hypot(y)
}

fn hint(shape: &OptimShape) -> Result<ClassificationHint> {
    Ok(match shape {
        OptimShape::Ball { curve } => ClassificationHint {
            nearest: Primitive::Ball,
            distance: asymmetry(curve)?.value,
        },
        OptimShape::Annulus { outer, inner } => {
            let [ox, oy] = shape.offset();
            let r_in = (inner.area() / std::f64::consts::PI).sqrt();
            ClassificationHint {
                nearest: Primitive::CenteredAnnulus,
                distance: asymmetry(outer)?.value
                    + asymmetry(inner)?.value
                    + std::f64::consts::TAU * r_in * ox.hypot(oy),
            }
        }
    })
}

fn run(init: &OptimShape, params: &EnergyParams, opts: &OptimOptions) -> Result<OptimResult> {
    ensure(opts.grad_tol > 0.0, || "grad_tol must be positive".into())?;
    let obj = Objective::new(init, *params, opts.order, opts.riesz_resolution, opts.fd_step)?;
    let mut x = obj.project(&obj.flatten(init));
    let mut at = obj.evaluate(&x).map_err(|e| match e {
        Error::NotAGraph { .. } | Error::InvalidInput(_) => {
            Error::InvalidInput(format!("initial shape is not admissible after area projection: {e}"))
        }
        other => other,
    })?;
    let metric = obj.metric(&x)?;
    let mut g = obj.gradient(&x, &at)?;
    let mut gnorm = norm(&obj.tangential(&x, &g));
    let mut trajectory = vec![TrajectoryPoint {
        iteration: 0,
        energy: at.energy,
        grad_norm: gnorm,
        step: 0.0,
        offset: offset_norm(&at.shape),
    }];
    let mut t = 1.0;
    let mut iteration = 0;
    let (mut best, mut best_g, mut since_best) = (at.energy, gnorm, 0);
    let stop = loop {
        if gnorm <= opts.grad_tol {
            break StopReason::Converged;
        }
        if iteration >= opts.max_iters {
            break StopReason::BudgetExhausted;
        }
        if since_best >= STAGNATION {
            break StopReason::Stagnated;
        }
        let dir = obj.direction(&x, &g, &metric);
        // dir is tangent, so the derivative of E(S(x + t dir)) at 0 is g . dir
        let slope = dot(&g, &dir);
        let slack = 1e-14 * at.energy.abs().max(1.0);
        let mut accepted = None;
        for halvings in 0..MAX_HALVINGS {
            let trial: Vec<f64> = x.iter().zip(&dir).map(|(a, d)| a + t * d).collect();
            let trial = obj.project(&trial);
            match obj.evaluate(&trial) {
                Ok(e) if e.energy <= at.energy + ARMIJO * t * slope + slack => {
                    accepted = Some((trial, e, halvings == 0));
                    break;
                }
                Ok(_) | Err(Error::NotAGraph { .. }) | Err(Error::InvalidInput(_)) => t *= 0.5,
                Err(e) => return Err(e),
            }
        }
        let Some((trial, e, first_try)) = accepted else {
            break StopReason::LineSearchStalled;
        };
        let taken = t;
        if first_try {
            t = (2.0 * t).min(MAX_STEP);
        }
        x = trial;
        at = e;
        g = obj.gradient(&x, &at)?;
        gnorm = norm(&obj.tangential(&x, &g));
        // progress is a real decrease or a markedly smaller gradient
        if at.energy < best - slack || gnorm < 0.5 * best_g {
            (best, since_best) = (best.min(at.energy), 0);
            best_g = best_g.min(gnorm);
        } else {
            since_best += 1;
        }
        iteration += 1;
        trajectory.push(TrajectoryPoint {
            iteration,
            energy: at.energy,
            grad_norm: gnorm,
            step: taken,
            offset: offset_norm(&at.shape),
        });
    };
    let hint = hint(&at.shape)?;
    Ok(OptimResult {
        state: OptimState {
            grad_norm: gnorm,
            shape: at.shape,
            params: obj.params,
            step: t,
            energy: at.energy,
            iteration,
        },
        trajectory,
        converged: stop == StopReason::Converged,
        stop_reason: stop,
        hint,
    })
}

/// Minimizes over simply connected radial graphs.
pub fn minimize_ball_topology(init: &FourierCurve, params: &EnergyParams, opts: &OptimOptions) -> Result<OptimResult> {
    run(&OptimShape::Ball { curve: init.clone() }, params, opts)
}

/// Minimizes over annuli bounded by two radial graphs. The Riesz term of
/// `F \ G` is the quadratic form of the signed coverage `1_F - 1_G`, which
/// expands as `V(F) + V(G) - 2 cross(F, G)`.
pub fn minimize_annulus_topology(
    outer: &FourierCurve,
    inner: &FourierCurve,
    params: &EnergyParams,
    opts: &OptimOptions,
) -> Result<OptimResult> {
    run(
        &OptimShape::Annulus {
            outer: outer.clone(),
            inner: inner.clone(),
        },
        params,
        opts,
    )
}

/// Dispatches on the topology of `init`.
pub fn minimize(init: &OptimShape, params: &EnergyParams, opts: &OptimOptions) -> Result<OptimResult> {
    run(init, params, opts)
}

/// Analytic against finite-difference gradients of `lambda P + W`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradientCheck {
    /// `max_j |g_j - g_fd_j| / max(|g_j|, |g_fd_j|, 1)`.
    pub max_discrepancy: f64,
    /// Norm of the analytic gradient along the area constraint.
    pub reduced_norm: f64,
    /// Same, from central differences of the energy after projection.
    pub reduced_norm_fd: f64,
}

/// Central differences with step `opts.fd_step` in every coefficient (and
/// offset) against the exact local gradient at `shape`.
pub fn gradient_check(shape: &OptimShape, params: &EnergyParams, opts: &OptimOptions) -> Result<GradientCheck> {
    let local_only = EnergyParams { q: 0.0, ..*params };
    let obj = Objective::new(shape, local_only, opts.order, opts.riesz_resolution, opts.fd_step)?;
    let x = obj.flatten(shape);
    let (_, g) = obj.local(&x);
    let h = opts.fd_step;
    let mut worst: f64 = 0.0;
    let mut reduced_fd = Vec::with_capacity(x.len());
    let xp = obj.project(&x);
    for j in 0..x.len() {
        let at = |s: f64, project: bool| {
            let mut y = if project { xp.clone() } else { x.clone() };
            y[j] += s * h;
            if project {
                y = obj.project(&y);
            }
            obj.local(&y).0
        };
        let fd = (at(1.0, false) - at(-1.0, false)) / (2.0 * h);
        worst = worst.max((g[j] - fd).abs() / g[j].abs().max(fd.abs()).max(1.0));
        reduced_fd.push((at(1.0, true) - at(-1.0, true)) / (2.0 * h));
    }
    let (_, gp) = obj.local(&xp);
    // the tangential part of grad E(S(.)) equals that of grad E on the constraint
    Ok(GradientCheck {
        max_discrepancy: worst,
        reduced_norm: norm(&obj.tangential(&xp, &gp)),
        reduced_norm_fd: norm(&obj.tangential(&xp, &reduced_fd)),
    })
}

pub const TRAJECTORY_CSV_HEADER: &str = "iteration,energy,grad_norm,step";

pub fn trajectory_csv(points: &[TrajectoryPoint]) -> String {
    let mut out = String::from(TRAJECTORY_CSV_HEADER);
    out.push('\n');
    for p in points {
        let _ = writeln!(out, "{},{},{},{}", p.iteration, p.energy, p.grad_norm, p.step);
    }
    out
}
