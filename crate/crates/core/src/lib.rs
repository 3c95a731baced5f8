//! Numerical laboratory for a two-slit cascade test of the uncertainty
//! principle.
//!
//! The screen dispersion `delta_x(l)` is computed under standard diffraction
//! (analytic far field and a direct Fresnel cascade) and under a relaxation
//! mixture model in which photons crossing the slits faster than the
//! relaxation time `tau0` keep their slit-selected straight-line velocity.

pub mod cosmo;
pub mod dispersion;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod qm;
pub mod rng;
pub mod subqm;

pub use cosmo::{CosmologyParams, Tau0Chain, Tau0Estimate};
pub use dispersion::{DispersionResult, SampleSet};
pub use error::{Error, Result};
pub use geometry::{ExperimentGeometry, PhysicalConstants, RoundingMode, ValidationReport};
pub use harness::{Engine, SweepConfig, SweepRecord, SweepResult};
pub use qm::{Axis, ComplexField, GridSpec, ScreenDensity};
pub use subqm::{MixtureDensity, SubQmParams, TransitConvention};
