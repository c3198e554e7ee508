//! Perimeter, bending and Riesz terms of `lambda P + W + Q V_alpha`.

pub mod elastica;
pub mod riesz;

pub use elastica::elastica_energy;
pub use riesz::{riesz_energy, riesz_monte_carlo, RieszValue};

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{ensure, invalid, Error, Result};
use crate::geometry::{AnnulusSpec, Ball, Boundary, Configuration, Dim, FourierCurve};

/// Accuracy knobs for the Riesz quadratures.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadControls {
    /// Target relative error of the covariogram reduction.
    pub radial_rel_tol: f64,
    /// Target relative error of cell quadrature.
    pub cell_rel_tol: f64,
    /// Cells per side on the coarsest raster.
    pub cell_min_resolution: usize,
    /// Cells per side on the finest raster.
    pub cell_max_resolution: usize,
    /// Sample count of the Monte Carlo estimator.
    pub mc_samples: u64,
    pub seed: u64,
}

impl Default for QuadControls {
    fn default() -> Self {
        Self {
            radial_rel_tol: 1e-6,
            cell_rel_tol: 1e-3,
            cell_min_resolution: 64,
            cell_max_resolution: 512,
            mc_samples: 10_000_000,
            seed: 0,
        }
    }
}

/// Weights and exponent of the functional.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnergyParams {
    pub lambda: f64,
    #[serde(rename = "Q")]
    pub q: f64,
    pub alpha: f64,
    pub dim: Dim,
    #[serde(default)]
    pub quad: QuadControls,
}

impl EnergyParams {
    pub fn new(lambda: f64, q: f64, alpha: f64, dim: Dim) -> Result<Self> {
        let p = Self {
            lambda,
            q,
            alpha,
            dim,
            quad: QuadControls::default(),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_quad(mut self, quad: QuadControls) -> Self {
        self.quad = quad;
        self
    }

    pub fn validate(&self) -> Result<()> {
        ensure(self.lambda >= 0.0 && self.lambda.is_finite(), || {
            format!("lambda must be non-negative, got {}", self.lambda)
        })?;
        ensure(self.q >= 0.0 && self.q.is_finite(), || {
            format!("Q must be non-negative, got {}", self.q)
        })?;
        ensure(self.alpha > 0.0 && self.alpha < self.dim.get() as f64, || {
            format!("alpha must lie in (0, {}), got {}", self.dim, self.alpha)
        })?;
        let q = &self.quad;
        ensure(q.radial_rel_tol > 0.0 && q.cell_rel_tol > 0.0, || {
            "quadrature tolerances must be positive".into()
        })?;
        ensure(q.cell_min_resolution >= 16 && q.cell_max_resolution >= q.cell_min_resolution, || {
            "cell resolutions must satisfy 16 <= min <= max".into()
        })
    }
}

/// How the Riesz term of a report was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    ClosedForm,
    RadialQuadrature,
    CellQuadrature,
    MonteCarlo,
}

/// Decomposed energy. `perimeter` and `riesz` are the raw `P` and
/// `V_alpha`; `total = lambda P + bending + Q V_alpha`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyReport {
    pub perimeter: f64,
    pub bending: f64,
    /// Absent when `Q = 0` and the shape has no cheap reduction.
    pub riesz: Option<f64>,
    pub total: f64,
    pub riesz_error: f64,
    pub method: Method,
    pub lambda: f64,
    #[serde(rename = "Q")]
    pub q: f64,
}

impl EnergyReport {
    /// `lambda P + W + Q V` from the stored raw terms.
    pub fn reconstruct_total(&self) -> f64 {
        self.lambda * self.perimeter + self.bending + self.q * self.riesz.unwrap_or(0.0)
    }
}

/// Any shape accepted by the energy routines.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Shape {
    Curve(FourierCurve),
    Annulus(AnnulusSpec),
    Ball(Ball),
    Configuration(Configuration),
}

impl<'de> Deserialize<'de> for Shape {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let v = serde_json::Value::deserialize(d)?;
        Shape::from_value(v).map_err(D::Error::custom)
    }
}

impl Shape {
    /// Dispatches on the distinguishing key so that errors name the field
    /// at fault.
    pub fn from_value(v: serde_json::Value) -> Result<Self> {
        let obj = v
            .as_object()
            .ok_or_else(|| invalid("shape must be a JSON object"))?;
        if obj.contains_key("coeffs") {
            parse_tracked(v).map(Shape::Curve)
        } else if obj.contains_key("r_in") || obj.contains_key("r_out") {
            parse_tracked(v).map(Shape::Annulus)
        } else if obj.contains_key("components") {
            parse_tracked(v).map(Shape::Configuration)
        } else if obj.contains_key("radius") {
            parse_tracked(v).map(Shape::Ball)
        } else {
            Err(invalid(
                "unrecognized shape: expected one of the fields `coeffs` (curve), `r_in`/`r_out` (annulus), `radius` (ball) or `components` (configuration)",
            ))
        }
    }

    pub fn dim(&self) -> Dim {
        match self {
            Shape::Curve(_) => Dim::Two,
            Shape::Annulus(a) => a.dim,
            Shape::Ball(b) => b.dim,
            Shape::Configuration(c) => c.dimension(),
        }
    }

    pub fn perimeter(&self) -> f64 {
        match self {
            Shape::Curve(c) => c.perimeter(),
            Shape::Annulus(a) => a.perimeter(),
            Shape::Ball(b) => b.perimeter(),
            Shape::Configuration(c) => c.perimeter(),
        }
    }

    /// Bending energy: squared curvature in the plane, `(1/4) int H^2` in space.
    pub fn bending(&self) -> Result<f64> {
        match self {
            Shape::Curve(c) => elastica_energy(c),
            Shape::Ball(b) => Ok(sphere_bending(b)),
            Shape::Annulus(a) => Ok(sphere_bending(&a.outer()) + sphere_bending(&a.inner())),
            Shape::Configuration(c) => c
                .boundaries()
                .map(|b| match b {
                    Boundary::Curve(c) => elastica_energy(c),
                    Boundary::Sphere(s) => Ok(sphere_bending(s)),
                })
                .sum(),
        }
    }

    /// The shape is round, so its Riesz term is cheap.
    fn is_round(&self) -> bool {
        match self {
            Shape::Curve(_) => false,
            Shape::Configuration(c) => c.is_round(),
            _ => true,
        }
    }
}

/// Deserializes with the path of the failing field in the message.
fn parse_tracked<T: serde::de::DeserializeOwned>(v: serde_json::Value) -> Result<T> {
    serde_path_to_error::deserialize(v).map_err(|e| {
        let path = e.path().to_string();
        if path == "." {
            Error::InvalidInput(e.into_inner().to_string())
        } else {
            Error::InvalidInput(format!("field `{path}`: {}", e.into_inner()))
        }
    })
}

fn sphere_bending(b: &Ball) -> f64 {
    match b.dim {
        Dim::Two => 2.0 * PI / b.radius,
        Dim::Three => 4.0 * PI,
    }
}

/// Willmore energy of a ball (`4 pi`) or a spherical shell (`8 pi`) in space.
pub fn willmore_closed(shape: &Shape) -> Result<f64> {
    match shape {
        Shape::Ball(b) if b.dim == Dim::Three => Ok(4.0 * PI),
        Shape::Annulus(a) if a.dim == Dim::Three => Ok(8.0 * PI),
        _ => Err(invalid(
            "closed-form Willmore energy needs a ball or a shell in dimension 3",
        )),
    }
}

/// `lambda P + W + Q V_alpha` with its parts.
pub fn total_energy(shape: &Shape, params: &EnergyParams) -> Result<EnergyReport> {
    params.validate()?;
    ensure(shape.dim() == params.dim, || {
        format!("shape has dimension {} but parameters use {}", shape.dim(), params.dim)
    })?;
    let perimeter = shape.perimeter();
    let bending = shape.bending()?;
    let riesz = if params.q > 0.0 || shape.is_round() {
        Some(riesz_energy(shape, params)?)
    } else {
        None
    };
    let mut report = EnergyReport {
        perimeter,
        bending,
        riesz: riesz.map(|r| r.value),
        total: 0.0,
        riesz_error: riesz.map_or(0.0, |r| r.error),
        method: riesz.map_or(Method::ClosedForm, |r| r.method),
        lambda: params.lambda,
        q: params.q,
    };
    report.total = report.reconstruct_total();
    Ok(report)
}
