//! Energies, phase diagrams and shape optimization for the functional
//! `lambda P(E) + W(E) + Q V_alpha(E)`: perimeter, bending (elastica in the
//! plane, Willmore in space) and a repulsive Riesz interaction.

pub mod error;
pub mod quadrature;
pub mod geometry;
pub mod energies;
pub mod annulus;
pub mod phase_diagram;
pub mod stability;
pub mod optimizer;

pub use error::{Error, Result};

#[cfg(doctest)]
#[doc = include_str!("../../../book/src/introduction.md")]
pub mod book_introduction {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/shapes.md")]
pub mod book_shapes {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/energies.md")]
pub mod book_energies {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/annulus.md")]
pub mod book_annulus {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/phase_diagram.md")]
pub mod book_phase_diagram {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/stability.md")]
pub mod book_stability {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/optimizer.md")]
pub mod book_optimizer {}
#[cfg(doctest)]
#[doc = include_str!("../../../book/src/cli.md")]
pub mod book_cli {}
