//! Large-deviation induced entanglement transitions of random bipartite pure
//! states.
//!
//! * [`analytics`] and [`density`]: closed-form equilibrium densities, rate
//!   functions, entropies, purities and the shifted-semicircle negativity model.
//! * [`sampler`]: Metropolis sampling of the fixed-trace Schmidt spectrum under
//!   a min or max wall, and exact sampling from random pure states.
//! * [`ensemble`]: `ρ₁₂ = U d U†`, partial transpose, log negativity, GUE model.
//! * [`empirics`]: histograms, curve distances, principal-value saddle residuals
//!   and the Coulomb energy functional.
//! * [`cli`] and [`acceptance`]: seeded experiment drivers and the verification
//!   suite behind `schmidt-ldp --command verify`.

pub mod acceptance;
pub mod analytics;
pub mod cli;
pub mod density;
pub mod empirics;
pub mod ensemble;
pub mod error;
pub mod params;
pub mod quadrature;
pub mod sampler;

pub use error::{Error, Result};
pub use params::{BarrierSpec, EnsembleParams, Regime, WallSide};
