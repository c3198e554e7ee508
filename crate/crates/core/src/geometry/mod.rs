//! Shape representations and purely geometric quantities.

mod configuration;
mod curve;
mod mass;
mod primitives;
mod symdiff;

pub use configuration::{Boundary, Component, Configuration};
pub use curve::{CurveSamples, FourierCoeffs, FourierCurve, ModeTable, DEFAULT_SAMPLES};
pub use mass::{rescale_mass, MassBudget, Rescaled};
pub use primitives::{AnnulusSpec, Ball};
pub use symdiff::{
    asymmetry, intersection_with_ball, raster_symmetric_difference, symmetric_difference,
    symmetric_difference_with_ball, Asymmetry,
};

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Ambient dimension of a shape.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum Dim {
    Two,
    Three,
}

impl TryFrom<u8> for Dim {
    type Error = Error;
    fn try_from(d: u8) -> Result<Self> {
        match d {
            2 => Ok(Dim::Two),
            3 => Ok(Dim::Three),
            _ => Err(Error::InvalidInput(format!("dim must be 2 or 3, got {d}"))),
        }
    }
}

impl From<Dim> for u8 {
    fn from(d: Dim) -> u8 {
        d.get() as u8
    }
}

impl std::fmt::Display for Dim {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.get())
    }
}

impl Dim {
    pub fn get(self) -> usize {
        match self {
            Dim::Two => 2,
            Dim::Three => 3,
        }
    }

    /// Volume of the unit ball.
    pub fn unit_ball_volume(self) -> f64 {
        match self {
            Dim::Two => PI,
            Dim::Three => 4.0 * PI / 3.0,
        }
    }

    /// Surface area of the unit sphere.
    pub fn unit_sphere_area(self) -> f64 {
        match self {
            Dim::Two => 2.0 * PI,
            Dim::Three => 4.0 * PI,
        }
    }
}

/// A point in space; planar shapes leave the last coordinate at zero.
pub type Point = [f64; 3];

pub(crate) fn norm(p: &Point) -> f64 {
    (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt()
}

pub(crate) fn sub(a: &Point, b: &Point) -> Point {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn point_from_slice(v: &[f64], dim: Dim, what: &str) -> Result<Point> {
    if v.len() != dim.get() {
        return Err(Error::InvalidInput(format!(
            "{what} has {} coordinates, expected {dim}",
            v.len()
        )));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput(format!("{what} is not finite")));
    }
    let mut p = [0.0; 3];
    p[..v.len()].copy_from_slice(v);
    Ok(p)
}

pub(crate) fn point_to_vec(p: &Point, dim: Dim) -> Vec<f64> {
    p[..dim.get()].to_vec()
}

/// A bounded region with a membership test, used by sampling estimators.
pub trait Region: Sync {
    fn dim(&self) -> Dim;
    fn contains(&self, p: &Point) -> bool;
    /// Axis-aligned box containing the region.
    fn bounds(&self) -> (Point, Point);
    /// Area or volume.
    fn measure(&self) -> f64;
    /// Upper bound for the diameter.
    fn diameter_bound(&self) -> f64 {
        let (lo, hi) = self.bounds();
        norm(&sub(&hi, &lo))
    }
}
