//! Riesz interaction energy `V_alpha(E) = int int_{E x E} |x - y|^{alpha - d}`.

pub mod cells;
pub mod monte_carlo;
pub mod radial;

pub use monte_carlo::riesz_monte_carlo;

use crate::geometry::{AnnulusSpec, Ball, Boundary, Configuration, Dim, FourierCurve};
use crate::error::{ensure, Result};
use crate::quadrature::Estimate;

use radial::SignedBall;

use super::{EnergyParams, Method, Shape};

/// Value, error estimate and evaluation route of a Riesz energy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RieszValue {
    pub value: f64,
    pub error: f64,
    pub method: Method,
}

impl RieszValue {
    fn new(e: Estimate, method: Method) -> Self {
        Self {
            value: e.value,
            error: e.error,
            method,
        }
    }
}

fn signed(b: &Ball, sign: f64) -> SignedBall {
    SignedBall {
        center: b.center,
        radius: b.radius,
        sign,
    }
}

/// Round pieces of a configuration, or `None` if a boundary is not round.
fn round_pieces(cfg: &Configuration) -> Option<Vec<SignedBall>> {
    let mut out = Vec::new();
    for c in cfg.components() {
        match &c.outer {
            Boundary::Sphere(b) => out.push(signed(b, 1.0)),
            Boundary::Curve(_) => return None,
        }
        for h in &c.holes {
            match h {
                Boundary::Sphere(b) => out.push(signed(b, -1.0)),
                Boundary::Curve(_) => return None,
            }
        }
    }
    Some(out)
}

/// Riesz energy of a ball.
pub fn riesz_ball(ball: &Ball, alpha: f64, rel: f64) -> Result<Estimate> {
    radial::signed_balls(ball.dim, alpha, &[signed(ball, 1.0)], rel)
}

/// Riesz energy of a (possibly offset) annulus.
pub fn riesz_annulus(a: &AnnulusSpec, alpha: f64, rel: f64) -> Result<Estimate> {
    radial::signed_balls(a.dim, alpha, &[signed(&a.outer(), 1.0), signed(&a.inner(), -1.0)], rel)
}

/// Riesz energy of a planar radial graph by cell quadrature.
pub fn riesz_curve(curve: &FourierCurve, params: &EnergyParams) -> Result<Estimate> {
    let q = &params.quad;
    cells::riesz_cells(
        &[(cells::Piece::Curve(curve.clone()), 1.0)],
        params.alpha,
        q.cell_rel_tol,
        q.cell_min_resolution,
        q.cell_max_resolution,
    )
}

/// `V_alpha` of any supported shape. Round shapes use the covariogram
/// reduction; planar shapes with Fourier boundaries use cell quadrature.
pub fn riesz_energy(shape: &Shape, params: &EnergyParams) -> Result<RieszValue> {
    let dim = shape.dim();
    ensure(dim == params.dim, || {
        format!("shape has dimension {dim} but parameters use {}", params.dim)
    })?;
    let alpha = params.alpha;
    let rel = params.quad.radial_rel_tol;
    match shape {
        Shape::Ball(b) => Ok(RieszValue::new(riesz_ball(b, alpha, rel)?, Method::RadialQuadrature)),
        Shape::Annulus(a) => Ok(RieszValue::new(riesz_annulus(a, alpha, rel)?, Method::RadialQuadrature)),
        Shape::Curve(c) => Ok(RieszValue::new(riesz_curve(c, params)?, Method::CellQuadrature)),
        Shape::Configuration(cfg) => match round_pieces(cfg) {
            Some(balls) => Ok(RieszValue::new(
                radial::signed_balls(dim, alpha, &balls, rel)?,
                Method::RadialQuadrature,
            )),
            None => {
                ensure(dim == Dim::Two, || "non-round boundaries must be planar".into())?;
                let q = &params.quad;
                let pieces = cells::configuration_pieces(cfg)?;
                let e = cells::riesz_cells(
                    &pieces,
                    alpha,
                    q.cell_rel_tol,
                    q.cell_min_resolution,
                    q.cell_max_resolution,
                )?;
                Ok(RieszValue::new(e, Method::CellQuadrature))
            }
        },
    }
}
