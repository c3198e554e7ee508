use serde::{Deserialize, Serialize};

use super::{norm, sub, AnnulusSpec, Ball, Dim, FourierCurve, Point, Region};
use crate::error::{ensure, invalid, Result};

/// A closed boundary: a Fourier radial graph or a round sphere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Boundary {
    Curve(FourierCurve),
    Sphere(Ball),
}

impl Boundary {
    pub fn dim(&self) -> Dim {
        match self {
            Boundary::Curve(_) => Dim::Two,
            Boundary::Sphere(b) => b.dim,
        }
    }

    /// Enclosed area or volume.
    pub fn enclosed(&self) -> f64 {
        match self {
            Boundary::Curve(c) => c.area(),
            Boundary::Sphere(b) => b.volume(),
        }
    }

    pub fn perimeter(&self) -> f64 {
        match self {
            Boundary::Curve(c) => c.perimeter(),
            Boundary::Sphere(b) => b.perimeter(),
        }
    }

    /// Center and radius of a ball containing the enclosed region.
    pub fn bounding_ball(&self) -> (Point, f64) {
        match self {
            Boundary::Curve(c) => {
                let [x, y] = c.center();
                ([x, y, 0.0], c.max_radius_bound())
            }
            Boundary::Sphere(b) => (b.center, b.radius),
        }
    }

    pub fn encloses(&self, p: &Point) -> bool {
        match self {
            Boundary::Curve(c) => c.contains(p),
            Boundary::Sphere(b) => b.contains(p),
        }
    }

    /// Points on the boundary, used for containment checks.
    fn probe_points(&self) -> Vec<Point> {
        match self {
            Boundary::Curve(c) => {
                let n = 256;
                let [cx, cy] = c.center();
                (0..n)
                    .map(|j| {
                        let t = std::f64::consts::TAU * j as f64 / n as f64;
                        let r = c.radius_at(t);
                        [cx + r * t.cos(), cy + r * t.sin(), 0.0]
                    })
                    .collect()
            }
            Boundary::Sphere(b) => {
                let n = 32;
                let c = b.center;
                let r = b.radius;
                let ring = |t: f64, p: f64| [c[0] + r * p.sin() * t.cos(), c[1] + r * p.sin() * t.sin(), c[2] + r * p.cos()];
                let angles = (0..n).map(|i| std::f64::consts::TAU * i as f64 / n as f64);
                match b.dim {
                    Dim::Two => angles.map(|t| ring(t, std::f64::consts::FRAC_PI_2)).collect(),
                    Dim::Three => angles
                        .flat_map(|t| (0..=n / 2).map(move |k| (t, std::f64::consts::PI * k as f64 / (n / 2) as f64)))
                        .map(|(t, p)| ring(t, p))
                        .collect(),
                }
            }
        }
    }
}

/// One connected piece: an outer boundary minus finitely many holes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Component {
    pub outer: Boundary,
    #[serde(default)]
    pub holes: Vec<Boundary>,
}

impl Component {
    pub fn solid(outer: Boundary) -> Self {
        Self {
            outer,
            holes: Vec::new(),
        }
    }

    /// An annulus translated so that its outer ball sits at `at`.
    pub fn annulus(a: &AnnulusSpec, at: Point) -> Self {
        let mut outer = a.outer();
        outer.center = at;
        let mut inner = a.inner();
        inner.center = [at[0] + a.offset[0], at[1] + a.offset[1], at[2] + a.offset[2]];
        Self {
            outer: Boundary::Sphere(outer),
            holes: vec![Boundary::Sphere(inner)],
        }
    }

    pub fn measure(&self) -> f64 {
        self.outer.enclosed() - self.holes.iter().map(Boundary::enclosed).sum::<f64>()
    }

    pub fn boundaries(&self) -> impl Iterator<Item = &Boundary> {
        std::iter::once(&self.outer).chain(self.holes.iter())
    }

    pub fn contains(&self, p: &Point) -> bool {
        self.outer.encloses(p) && !self.holes.iter().any(|h| h.encloses(p))
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigurationRepr {
    dim: Dim,
    components: Vec<Component>,
}

/// A finite union of disjoint components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ConfigurationRepr")]
pub struct Configuration {
    dim: Dim,
    components: Vec<Component>,
}

impl TryFrom<ConfigurationRepr> for Configuration {
    type Error = crate::error::Error;
    fn try_from(r: ConfigurationRepr) -> Result<Self> {
        Configuration::new(r.dim, r.components)
    }
}

impl Configuration {
    /// Validates dimensions, hole containment and pairwise disjointness of
    /// the components' bounding balls.
    pub fn new(dim: Dim, components: Vec<Component>) -> Result<Self> {
        ensure(!components.is_empty(), || "configuration has no components".into())?;
        for (i, c) in components.iter().enumerate() {
            for b in c.boundaries() {
                ensure(b.dim() == dim, || {
                    format!("component {i} has a boundary of dimension {}, expected {dim}", b.dim())
                })?;
            }
            for (j, h) in c.holes.iter().enumerate() {
                if h.probe_points().iter().any(|p| !c.outer.encloses(p)) {
                    return Err(invalid(format!("hole {j} of component {i} is not inside its outer boundary")));
                }
                for (k, g) in c.holes.iter().enumerate().skip(j + 1) {
                    let ((ch, rh), (cg, rg)) = (h.bounding_ball(), g.bounding_ball());
                    ensure(norm(&sub(&ch, &cg)) > rh + rg, || {
                        format!("holes {j} and {k} of component {i} may overlap")
                    })?;
                }
            }
        }
        for i in 0..components.len() {
            for j in i + 1..components.len() {
                let (ci, ri) = components[i].outer.bounding_ball();
                let (cj, rj) = components[j].outer.bounding_ball();
                ensure(norm(&sub(&ci, &cj)) > ri + rj, || {
                    format!("components {i} and {j} have overlapping bounding balls")
                })?;
            }
        }
        Ok(Self { dim, components })
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn dimension(&self) -> Dim {
        self.dim
    }

    pub fn perimeter(&self) -> f64 {
        self.components
            .iter()
            .flat_map(Component::boundaries)
            .map(Boundary::perimeter)
            .sum()
    }

    pub fn boundaries(&self) -> impl Iterator<Item = &Boundary> {
        self.components.iter().flat_map(Component::boundaries)
    }

    /// Every boundary is round.
    pub fn is_round(&self) -> bool {
        self.boundaries().all(|b| matches!(b, Boundary::Sphere(_)))
    }
}

impl Region for Configuration {
    fn dim(&self) -> Dim {
        self.dim
    }

    fn contains(&self, p: &Point) -> bool {
        self.components.iter().any(|c| c.contains(p))
    }

    fn bounds(&self) -> (Point, Point) {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for c in &self.components {
            let (ctr, r) = c.outer.bounding_ball();
            for k in 0..3 {
                let rk = if k < self.dim.get() { r } else { 0.0 };
                lo[k] = lo[k].min(ctr[k] - rk);
                hi[k] = hi[k].max(ctr[k] + rk);
            }
        }
        (lo, hi)
    }

    fn measure(&self) -> f64 {
        self.components.iter().map(Component::measure).sum()
    }
}
