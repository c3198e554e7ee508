//! Ball/annulus threshold, explicit non-existence certificates and the
//! `(lambda, Q)` phase diagram.

mod cell;
mod certificate;
mod render;
mod threshold;

pub use cell::{
    classify_cell, mass_map, scan, Axis, Classification, MassCell, PhaseCell, RegimeHints,
    ScanConfig,
};
pub use certificate::{
    competitor_multi_annuli_2d, competitor_shells_3d, connected_lower_bound_2d,
    connected_lower_bound_3d, nonexistence_certificate, nonexistence_certificate_2d,
    nonexistence_certificate_3d, planar_seed_radius, spatial_seed_radius, Certificate,
    CertificateSearch, Competitor,
};
pub use render::{to_csv, to_svg, CSV_HEADER};
pub use threshold::{ball_annulus_gap, lambda_bar, ThresholdResult, LAMBDA_BAR};
