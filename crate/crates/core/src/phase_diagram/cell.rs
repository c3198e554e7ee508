use std::f64::consts::TAU;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::annulus::{g_riesz_estimate, optimal_charged_annulus};
use crate::energies::riesz::riesz_ball;
use crate::energies::EnergyParams;
use crate::error::{ensure, Result};
use crate::geometry::{rescale_mass, Ball, Dim, MassBudget};

use super::certificate::{
    connected_lower_bound_2d, nonexistence_certificate_2d, CertificateSearch, Competitor,
};
use super::threshold::LAMBDA_BAR;

const RIESZ_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Classification {
    Ball,
    Annulus,
    NonexistenceCertified,
    Unknown,
}

impl Classification {
    pub const ALL: [Classification; 4] = [
        Classification::Ball,
        Classification::Annulus,
        Classification::NonexistenceCertified,
        Classification::Unknown,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Classification::Ball => "BALL",
            Classification::Annulus => "ANNULUS",
            Classification::NonexistenceCertified => "NONEXISTENCE_CERTIFIED",
            Classification::Unknown => "UNKNOWN",
        }
    }
}

impl std::fmt::Display for Classification {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which sufficient conditions of the known regimes a cell satisfies.
/// These are hints; the constants of the regimes are not explicit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegimeHints {
    pub lambda_above_threshold: bool,
    /// `alpha in (1, 2)`, where the planar certificate applies.
    pub certificate_applicable: bool,
    /// `Q / (lambda + lambda^{(alpha - 1) / 2})`, large in the non-existence regime.
    pub nonexistence_ratio: f64,
    /// `Q / lambda^{(3 + alpha) / 2}`, small in the annulus regime.
    pub annulus_ratio: f64,
}

/// One `(lambda, Q)` point of the phase diagram.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseCell {
    pub lambda: f64,
    #[serde(rename = "Q")]
    pub q: f64,
    pub alpha: f64,
    pub dim: Dim,
    pub ball_energy: f64,
    pub annulus_energy: f64,
    pub annulus_r: f64,
    pub best_competitor: Option<Competitor>,
    pub connected_lower_bound: f64,
    pub classification: Classification,
    pub hints: RegimeHints,
    /// Both connected candidates respect the lower bound.
    pub bound_consistent: bool,
    pub note: Option<String>,
}

impl PhaseCell {
    fn failed(lambda: f64, q: f64, alpha: f64, note: String) -> Self {
        Self {
            lambda,
            q,
            alpha,
            dim: Dim::Two,
            ball_energy: f64::NAN,
            annulus_energy: f64::NAN,
            annulus_r: f64::NAN,
            best_competitor: None,
            connected_lower_bound: f64::NAN,
            classification: Classification::Unknown,
            hints: hints(lambda, q, alpha),
            bound_consistent: false,
            note: Some(note),
        }
    }
}

fn hints(lambda: f64, q: f64, alpha: f64) -> RegimeHints {
    RegimeHints {
        lambda_above_threshold: lambda > LAMBDA_BAR,
        certificate_applicable: alpha > 1.0 && alpha < 2.0,
        nonexistence_ratio: q / (lambda + lambda.powf(0.5 * (alpha - 1.0))),
        annulus_ratio: q / lambda.powf(0.5 * (3.0 + alpha)),
    }
}

/// Classifies a planar cell by direct comparison of the ball, the optimal
/// charged annulus and the certificate search.
pub fn classify_cell(lambda: f64, q: f64, alpha: f64, grid: &CertificateSearch) -> Result<PhaseCell> {
    EnergyParams::new(lambda, q, alpha, Dim::Two)?;
    ensure(lambda > 0.0, || format!("lambda must be positive, got {lambda}"))?;
    let (ball_energy, ball_err) = if q > 0.0 {
        let v = riesz_ball(&Ball::centered(Dim::Two, 1.0)?, alpha, RIESZ_TOL)?;
        (TAU * (lambda + 1.0) + q * v.value, q * v.error)
    } else {
        (TAU * (lambda + 1.0), 0.0)
    };
    let ann = optimal_charged_annulus(lambda, q, alpha)?;
    let ann_err = if q > 0.0 {
        q * g_riesz_estimate(ann.r_star, alpha)?.error
    } else {
        0.0
    };
    let lower = connected_lower_bound_2d(lambda, q, alpha)?;
    let h = hints(lambda, q, alpha);
    let cert = if h.certificate_applicable && q > 0.0 {
        Some(nonexistence_certificate_2d(lambda, q, alpha, grid)?)
    } else {
        None
    };
    let slack = 1e-12 * ball_energy.abs().max(ann.energy.abs());
    let gap = ann.energy - ball_energy;
    let err = ball_err + ann_err + slack;
    let classification = if cert.is_some_and(|c| c.certified) {
        Classification::NonexistenceCertified
    } else if gap > err {
        Classification::Ball
    } else if gap < -err {
        Classification::Annulus
    } else {
        Classification::Unknown
    };
    Ok(PhaseCell {
        lambda,
        q,
        alpha,
        dim: Dim::Two,
        ball_energy,
        annulus_energy: ann.energy,
        annulus_r: ann.r_star,
        best_competitor: cert.and_then(|c| c.witness),
        connected_lower_bound: lower,
        classification,
        hints: h,
        bound_consistent: ball_energy + ball_err >= lower && ann.energy + ann_err >= lower,
        note: None,
    })
}

/// Log-spaced axis; a single point sits at `lo` and may be zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    pub min: f64,
    pub max: f64,
    pub points: usize,
}

impl Axis {
    pub fn values(&self) -> Result<Vec<f64>> {
        ensure(self.points >= 1, || "axis needs at least one point".into())?;
        if self.points == 1 {
            ensure(self.min >= 0.0 && self.min.is_finite(), || "axis value must be non-negative".into())?;
            return Ok(vec![self.min]);
        }
        ensure(self.min > 0.0 && self.max > self.min && self.max.is_finite(), || {
            format!("log axis needs 0 < min < max, got [{}, {}]", self.min, self.max)
        })?;
        let step = (self.max / self.min).ln() / (self.points - 1) as f64;
        Ok((0..self.points)
            .map(|i| {
                if i + 1 == self.points {
                    self.max
                } else {
                    self.min * (step * i as f64).exp()
                }
            })
            .collect())
    }
}

/// A planar scan over a log-log `(lambda, Q)` grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScanConfig {
    pub lambda: Axis,
    #[serde(rename = "Q")]
    pub q: Axis,
    pub alpha: f64,
    #[serde(default = "two")]
    pub dim: Dim,
    #[serde(default)]
    pub search: CertificateSearch,
}

fn two() -> Dim {
    Dim::Two
}

/// Row-major over `Q` (rows) then `lambda` (columns). Cells run in
/// parallel and are gathered by index, so the order is fixed. A failing
/// cell becomes `UNKNOWN` with a note.
pub fn scan(config: &ScanConfig) -> Result<Vec<PhaseCell>> {
    ensure(config.dim == Dim::Two, || "phase-diagram scans are planar (dim 2)".into())?;
    ensure(config.alpha > 0.0 && config.alpha < 2.0, || {
        format!("alpha must lie in (0, 2), got {}", config.alpha)
    })?;
    let lambdas = config.lambda.values()?;
    let qs = config.q.values()?;
    let points: Vec<(f64, f64)> = qs
        .iter()
        .flat_map(|&q| lambdas.iter().map(move |&l| (l, q)))
        .collect();
    Ok(points
        .par_iter()
        .map(|&(l, q)| {
            classify_cell(l, q, config.alpha, &config.search)
                .unwrap_or_else(|e| PhaseCell::failed(l, q, config.alpha, e.to_string()))
        })
        .collect())
}

/// One mass of a mass map, with the equivalent normalized cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassCell {
    pub m: f64,
    pub prefactor: f64,
    pub cell: PhaseCell,
}

/// Classifies `(lambda, Q)` at each prescribed area by rescaling to area `pi`.
pub fn mass_map(
    lambda: f64,
    q: f64,
    alpha: f64,
    masses: &[f64],
    grid: &CertificateSearch,
) -> Result<Vec<MassCell>> {
    let params = EnergyParams::new(lambda, q, alpha, Dim::Two)?;
    masses
        .par_iter()
        .map(|&m| {
            let r = rescale_mass(&params, MassBudget::new(m, Dim::Two)?)?;
            let cell = classify_cell(r.params.lambda, r.params.q, alpha, grid)?;
            Ok(MassCell {
                m,
                prefactor: r.prefactor,
                cell,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn axis_values() {
        let a = Axis { min: 1e-2, max: 1.0, points: 3 };
        let v = a.values().unwrap();
        assert!((v[1] - 0.1).abs() < 1e-15);
        assert_eq!(v[2], 1.0);
        assert!(Axis { min: 0.0, max: 1.0, points: 2 }.values().is_err());
        assert_eq!(Axis { min: 0.0, max: 0.0, points: 1 }.values().unwrap(), vec![0.0]);
    }

    #[test]
    fn uncharged_dichotomy() {
        let g = CertificateSearch::default();
        let b = classify_cell(2.0 * LAMBDA_BAR, 0.0, 1.5, &g).unwrap();
        assert_eq!(b.classification, Classification::Ball);
        let a = classify_cell(0.5 * LAMBDA_BAR, 0.0, 1.5, &g).unwrap();
        assert_eq!(a.classification, Classification::Annulus);
        assert!(a.bound_consistent && b.bound_consistent);
    }
}
