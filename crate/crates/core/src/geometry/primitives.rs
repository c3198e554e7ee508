use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use super::{norm, point_from_slice, point_to_vec, sub, Dim, Point, Region};
use crate::error::{ensure, Error, Result};

/// A round ball (disk in the plane).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "BallRepr", into = "BallRepr")]
pub struct Ball {
    pub dim: Dim,
    pub radius: f64,
    pub center: Point,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BallRepr {
    dim: Dim,
    radius: f64,
    #[serde(default)]
    center: Option<Vec<f64>>,
}

impl TryFrom<BallRepr> for Ball {
    type Error = Error;
    fn try_from(r: BallRepr) -> Result<Self> {
        let center = match r.center {
            Some(c) => point_from_slice(&c, r.dim, "center")?,
            None => [0.0; 3],
        };
        Ball::new(r.dim, r.radius, center)
    }
}

impl From<Ball> for BallRepr {
    fn from(b: Ball) -> Self {
        BallRepr {
            dim: b.dim,
            radius: b.radius,
            center: Some(point_to_vec(&b.center, b.dim)),
        }
    }
}

impl Ball {
    pub fn new(dim: Dim, radius: f64, center: Point) -> Result<Self> {
        ensure(radius > 0.0 && radius.is_finite(), || {
            format!("radius must be positive, got {radius}")
        })?;
        if dim == Dim::Two {
            ensure(center[2] == 0.0, || "planar ball with a third coordinate".into())?;
        }
        Ok(Self { dim, radius, center })
    }

    pub fn centered(dim: Dim, radius: f64) -> Result<Self> {
        Self::new(dim, radius, [0.0; 3])
    }

    pub fn volume(&self) -> f64 {
        self.dim.unit_ball_volume() * self.radius.powi(self.dim.get() as i32)
    }

    pub fn perimeter(&self) -> f64 {
        self.dim.unit_sphere_area() * self.radius.powi(self.dim.get() as i32 - 1)
    }
}

impl Region for Ball {
    fn dim(&self) -> Dim {
        self.dim
    }

    fn contains(&self, p: &Point) -> bool {
        norm(&sub(p, &self.center)) < self.radius
    }

    fn bounds(&self) -> (Point, Point) {
        let r = self.radius;
        let z = if self.dim == Dim::Three { r } else { 0.0 };
        let c = self.center;
        ([c[0] - r, c[1] - r, c[2] - z], [c[0] + r, c[1] + r, c[2] + z])
    }

    fn measure(&self) -> f64 {
        self.volume()
    }

    fn diameter_bound(&self) -> f64 {
        2.0 * self.radius
    }
}

/// `B_{r_out} \ B_{r_in}(offset)` with the outer ball centered at the origin.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AnnulusRepr", into = "AnnulusRepr")]
pub struct AnnulusSpec {
    pub dim: Dim,
    pub r_in: f64,
    pub r_out: f64,
    pub offset: Point,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct AnnulusRepr {
    dim: Dim,
    r_in: f64,
    r_out: f64,
    #[serde(default)]
    offset: Option<Vec<f64>>,
}

impl TryFrom<AnnulusRepr> for AnnulusSpec {
    type Error = Error;
    fn try_from(r: AnnulusRepr) -> Result<Self> {
        let offset = match r.offset {
            Some(o) => point_from_slice(&o, r.dim, "offset")?,
            None => [0.0; 3],
        };
        AnnulusSpec::new(r.dim, r.r_in, r.r_out, offset)
    }
}

impl From<AnnulusSpec> for AnnulusRepr {
    fn from(a: AnnulusSpec) -> Self {
        AnnulusRepr {
            dim: a.dim,
            r_in: a.r_in,
            r_out: a.r_out,
            offset: Some(point_to_vec(&a.offset, a.dim)),
        }
    }
}

impl AnnulusSpec {
    pub fn new(dim: Dim, r_in: f64, r_out: f64, offset: Point) -> Result<Self> {
        ensure(r_in > 0.0 && r_in.is_finite(), || {
            format!("r_in must be positive, got {r_in}")
        })?;
        ensure(r_out > r_in && r_out.is_finite(), || {
            format!("r_out = {r_out} must exceed r_in = {r_in}")
        })?;
        if dim == Dim::Two {
            ensure(offset[2] == 0.0, || "planar offset with a third coordinate".into())?;
        }
        let t = norm(&offset);
        ensure(r_in + t <= r_out, || {
            format!("inner ball (r_in = {r_in}, |offset| = {t}) leaves the outer ball r_out = {r_out}")
        })?;
        Ok(Self {
            dim,
            r_in,
            r_out,
            offset,
        })
    }

    pub fn centered(dim: Dim, r_in: f64, r_out: f64) -> Result<Self> {
        Self::new(dim, r_in, r_out, [0.0; 3])
    }

    /// Planar annulus of area `pi` with inner radius `r`.
    pub fn unit_area(r: f64) -> Result<Self> {
        Self::centered(Dim::Two, r, (1.0 + r * r).sqrt())
    }

    pub fn is_centered(&self) -> bool {
        norm(&self.offset) == 0.0
    }

    pub fn volume(&self) -> f64 {
        let d = self.dim.get() as i32;
        self.dim.unit_ball_volume() * (self.r_out.powi(d) - self.r_in.powi(d))
    }

    /// Total boundary measure: `2 pi (r_in + r_out)` or `4 pi (r_in^2 + r_out^2)`.
    pub fn perimeter(&self) -> f64 {
        match self.dim {
            Dim::Two => 2.0 * PI * (self.r_in + self.r_out),
            Dim::Three => 4.0 * PI * (self.r_in.powi(2) + self.r_out.powi(2)),
        }
    }

    pub fn outer(&self) -> Ball {
        Ball {
            dim: self.dim,
            radius: self.r_out,
            center: [0.0; 3],
        }
    }

    pub fn inner(&self) -> Ball {
        Ball {
            dim: self.dim,
            radius: self.r_in,
            center: self.offset,
        }
    }
}

impl Region for AnnulusSpec {
    fn dim(&self) -> Dim {
        self.dim
    }

    fn contains(&self, p: &Point) -> bool {
        self.outer().contains(p) && norm(&sub(p, &self.offset)) > self.r_in
    }

    fn bounds(&self) -> (Point, Point) {
        self.outer().bounds()
    }

    fn measure(&self) -> f64 {
        self.volume()
    }

    fn diameter_bound(&self) -> f64 {
        2.0 * self.r_out
    }
}
