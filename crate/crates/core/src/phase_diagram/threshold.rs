use std::f64::consts::{FRAC_1_SQRT_2, TAU};

use serde::{Deserialize, Serialize};

use crate::annulus::{f_lambda, r_lambda};
use crate::error::{ensure, Error, Result};

/// Threshold between balls and annuli at `Q = 0`, pinned from a bisection
/// run to machine precision.
pub const LAMBDA_BAR: f64 = 0.071_770_132_891_359_25;

/// Left end of the search bracket; annuli win well before this point.
const LAMBDA_MIN: f64 = 1e-6;

/// `g(lambda) = 2 pi (lambda + 1) - f_lambda(r_lambda)`: the ball energy
/// minus the best annulus energy. Positive means annuli win.
pub fn ball_annulus_gap(lambda: f64) -> Result<f64> {
    let r = r_lambda(lambda)?;
    Ok(TAU * (lambda + 1.0) - f_lambda(lambda, r)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdResult {
    pub lambda_bar: f64,
    pub bracket: [f64; 2],
    /// `|g(lambda_bar)|`
    pub residual: f64,
}

/// Root of the decreasing gap function on `(0, sqrt(2)/2]`.
pub fn lambda_bar(tolerance: f64) -> Result<ThresholdResult> {
    ensure(tolerance > 0.0 && tolerance.is_finite(), || {
        format!("tolerance must be positive, got {tolerance}")
    })?;
    let (mut lo, mut hi) = (LAMBDA_MIN, FRAC_1_SQRT_2);
    let (glo, ghi) = (ball_annulus_gap(lo)?, ball_annulus_gap(hi)?);
    if !(glo > 0.0 && ghi < 0.0) {
        return Err(Error::NoConvergence(format!(
            "gap does not change sign on [{lo}, {hi}]: {glo}, {ghi}"
        )));
    }
    let mut mid = 0.5 * (lo + hi);
    let mut g = ball_annulus_gap(mid)?;
    // stop on the residual, not the bracket width
    while g.abs() > tolerance {
        if g > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        let next = 0.5 * (lo + hi);
        if next == lo || next == hi {
            break;
        }
        mid = next;
        g = ball_annulus_gap(mid)?;
    }
    if g.abs() > tolerance {
        return Err(Error::NoConvergence(format!(
            "residual {g:e} above {tolerance:e} at machine resolution"
        )));
    }
    Ok(ThresholdResult {
        lambda_bar: mid,
        bracket: [lo, hi],
        residual: g.abs(),
    })
}
