//! Back-of-envelope estimate of the relaxation time from cosmological
//! particle densities.
//!
//! density of normal matter -> density of dark-sector particles ->
//! interaction rate for a particle moving at c -> tau0 -> c * tau0.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::PhysicalConstants;

/// Conservative lower bound quoted for the relaxation time.
pub const TAU0_LOWER_BOUND: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CosmologyParams {
    /// Baryons per m^3.
    pub baryon_density: f64,
    /// All normal particles per m^3.
    pub normal_particle_density: f64,
    /// Dark-sector to normal density ratio.
    pub dark_to_normal_ratio: f64,
    /// Cross-section in m^2; every dark particle inside it interacts.
    pub effective_cross_section: f64,
    pub constants: PhysicalConstants,
}

impl Default for CosmologyParams {
    fn default() -> Self {
        Self {
            baryon_density: 1.0,
            normal_particle_density: 100.0,
            dark_to_normal_ratio: 10.0,
            effective_cross_section: 1.0,
            constants: PhysicalConstants::default(),
        }
    }
}

impl CosmologyParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("baryon_density", self.baryon_density),
            ("normal_particle_density", self.normal_particle_density),
            ("dark_to_normal_ratio", self.dark_to_normal_ratio),
            ("effective_cross_section", self.effective_cross_section),
        ];
        let bad: Vec<String> = fields
            .iter()
            .filter(|(_, v)| !(v.is_finite() && *v > 0.0))
            .map(|(name, v)| format!("{name} must be finite and > 0 (got {v:e})"))
            .collect();
        if bad.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidArgument(bad.join("; ")))
        }
    }
}

pub fn dark_particle_density(params: &CosmologyParams) -> f64 {
    params.normal_particle_density * params.dark_to_normal_ratio
}

/// Mean time between interactions, `1 / (n_dark * c * sigma)`. Infinite
/// when the rate underflows.
pub fn mean_interaction_interval(params: &CosmologyParams) -> f64 {
    1.0 / (dark_particle_density(params) * params.constants.c() * params.effective_cross_section)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tau0Estimate {
    /// Seconds; `f64::INFINITY` when unbounded.
    pub tau0: f64,
    pub lower_bound: f64,
    pub bound_satisfied: bool,
}

impl Tau0Estimate {
    pub fn is_unbounded(&self) -> bool {
        self.tau0.is_infinite()
    }
}

pub fn estimate_tau0(params: &CosmologyParams) -> Tau0Estimate {
    let tau0 = mean_interaction_interval(params);
    Tau0Estimate {
        tau0,
        lower_bound: TAU0_LOWER_BOUND,
        bound_satisfied: tau0 >= TAU0_LOWER_BOUND,
    }
}

pub fn critical_length_from_cosmology(params: &CosmologyParams) -> f64 {
    params.constants.c() * estimate_tau0(params).tau0
}

/// Every step of the estimate next to the hand-rounded figure it
/// corresponds to.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Tau0Chain {
    pub params: CosmologyParams,
    pub c_m_per_s: f64,
    pub baryon_density_per_m3: f64,
    pub normal_particle_density_per_m3: f64,
    pub dark_particle_density_per_m3: f64,
    pub mean_interaction_interval_s: Option<f64>,
    pub tau0_s: Option<f64>,
    pub tau0_lower_bound_s: f64,
    pub bound_satisfied: bool,
    /// `None` means unbounded.
    pub critical_length_m: Option<f64>,
    pub critical_length_at_lower_bound_m: f64,
    pub rounded: RoundedChain,
}

/// The figures as printed by hand: 1 -> 100 -> 1000 /m^3, one interaction
/// per 3 ps, tau0 >~ 1 ps, L_crit >~ 0.3 mm.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RoundedChain {
    pub baryon_density_per_m3: f64,
    pub normal_particle_density_per_m3: f64,
    pub dark_particle_density_per_m3: f64,
    pub mean_interaction_interval_s: f64,
    pub tau0_lower_bound_s: f64,
    pub critical_length_m: f64,
}

pub const ROUNDED_CHAIN: RoundedChain = RoundedChain {
    baryon_density_per_m3: 1.0,
    normal_particle_density_per_m3: 100.0,
    dark_particle_density_per_m3: 1000.0,
    mean_interaction_interval_s: 3e-12,
    tau0_lower_bound_s: 1e-12,
    critical_length_m: 0.3e-3,
};

pub fn tau0_chain(params: &CosmologyParams) -> Result<Tau0Chain> {
    params.validate()?;
    let estimate = estimate_tau0(params);
    let finite = |v: f64| v.is_finite().then_some(v);
    let c = params.constants.c();
    Ok(Tau0Chain {
        params: *params,
        c_m_per_s: c,
        baryon_density_per_m3: params.baryon_density,
        normal_particle_density_per_m3: params.normal_particle_density,
        dark_particle_density_per_m3: dark_particle_density(params),
        mean_interaction_interval_s: finite(mean_interaction_interval(params)),
        tau0_s: finite(estimate.tau0),
        tau0_lower_bound_s: estimate.lower_bound,
        bound_satisfied: estimate.bound_satisfied,
        critical_length_m: finite(critical_length_from_cosmology(params)),
        critical_length_at_lower_bound_m: c * TAU0_LOWER_BOUND,
        rounded: ROUNDED_CHAIN,
    })
}
