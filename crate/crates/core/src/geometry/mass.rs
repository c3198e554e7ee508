use serde::{Deserialize, Serialize};

use super::Dim;
use crate::energies::EnergyParams;
use crate::error::{ensure, Result};

/// A prescribed area (or volume) together with the unit-ball normalization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MassBudget {
    pub m: f64,
    pub reference: f64,
}

impl MassBudget {
    pub fn new(m: f64, dim: Dim) -> Result<Self> {
        ensure(m > 0.0 && m.is_finite(), || format!("mass must be positive, got {m}"))?;
        Ok(Self {
            m,
            reference: dim.unit_ball_volume(),
        })
    }
}

/// Parameters at mass `pi` equivalent to a problem at mass `m`; energies
/// at mass `m` equal `prefactor^{-1}` times energies of the rescaled problem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rescaled {
    pub params: EnergyParams,
    /// `sqrt(pi / m)`
    pub prefactor: f64,
}

/// Planar mass rescaling `lambda -> lambda m / pi`,
/// `Q -> Q (m / pi)^{(3 + alpha) / 2}`.
pub fn rescale_mass(params: &EnergyParams, mass: MassBudget) -> Result<Rescaled> {
    ensure(params.dim == Dim::Two, || "mass rescaling is implemented for dim 2".into())?;
    ensure(mass.m > 0.0 && mass.m.is_finite(), || {
        format!("mass must be positive, got {}", mass.m)
    })?;
    let ratio = mass.m / mass.reference;
    let mut p = *params;
    p.lambda = params.lambda * ratio;
    p.q = params.q * ratio.powf(0.5 * (3.0 + params.alpha));
    Ok(Rescaled {
        params: p,
        prefactor: ratio.recip().sqrt(),
    })
}
