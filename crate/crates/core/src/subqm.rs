//! Relaxation-mixture model of the sub-quantum prediction.
//!
//! A photon that crosses the cascade without a randomizing kick keeps the
//! straight-line velocity selected by the two slits and lands on the
//! collimation density. A single kick fully relaxes it to the ordinary
//! diffraction density. Kicks arrive as a Poisson process with mean
//! interval `tau0`, so the relaxed fraction is `w = 1 - exp(-dt / tau0)`.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dispersion::SampleSet;
use crate::error::{Error, Result};
use crate::geometry::{first_null, ExperimentGeometry, PhysicalConstants};
use crate::qm::{fraunhofer_density, mirrored, GridSpec, InverseCdf, ScreenDensity};
use crate::rng::StreamKey;

/// Which leg of the flight counts as the kick-exposure window.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TransitConvention {
    /// Slit 1 to slit 2: `l / c`.
    #[default]
    SlitToSlit,
    /// Slit 1 to the screen: `(l + l0) / c`.
    TotalPath,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SubQmParams {
    /// Relaxation time in seconds; zero means instant relaxation.
    pub tau0: f64,
    #[serde(default)]
    pub transit_convention: TransitConvention,
    #[serde(default)]
    pub constants: PhysicalConstants,
}

impl SubQmParams {
    pub fn new(tau0: f64) -> Self {
        Self {
            tau0,
            transit_convention: TransitConvention::default(),
            constants: PhysicalConstants::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.tau0.is_finite() && self.tau0 >= 0.0 {
            Ok(())
        } else {
            Err(Error::InvalidArgument(format!(
                "tau0 must be finite and >= 0 (got {:e})",
                self.tau0
            )))
        }
    }

    /// Exposure time for the configured convention.
    pub fn transit_time(&self, geometry: &ExperimentGeometry) -> f64 {
        let path = match self.transit_convention {
            TransitConvention::SlitToSlit => geometry.l,
            TransitConvention::TotalPath => geometry.l + geometry.l0,
        };
        path / self.constants.c()
    }

    /// Mean kick count during transit, or `None` when `tau0 == 0`.
    fn kick_rate(&self, geometry: &ExperimentGeometry) -> Option<f64> {
        (self.tau0 > 0.0).then(|| self.transit_time(geometry) / self.tau0)
    }
}

/// Probability that at least one kick happened in transit.
pub fn mixture_weight(geometry: &ExperimentGeometry, params: &SubQmParams) -> Result<f64> {
    geometry.ensure_valid()?;
    params.validate()?;
    Ok(match params.kick_rate(geometry) {
        None => 1.0,
        Some(rate) => -(-rate).exp_m1(),
    })
}

/// `c * tau0`.
pub fn critical_length(params: &SubQmParams) -> f64 {
    params.constants.c() * params.tau0
}

/// Widths of the two uniform components of the collimation density:
/// `x = x2 (1 + l0/l) - x1 (l0/l)` with `x1, x2` uniform across the slits.
fn collimation_widths(geometry: &ExperimentGeometry) -> (f64, f64) {
    let r = geometry.l0 / geometry.l;
    (geometry.delta0 * (1.0 + r), geometry.delta0 * r)
}

/// Support width `delta0 (1 + 2 l0 / l)` of the collimation density.
pub fn collimation_support(geometry: &ExperimentGeometry) -> f64 {
    let (a, b) = collimation_widths(geometry);
    a + b
}

/// Exact CDF of the sum of centered uniforms of widths `a` and `b`.
fn trapezoid_cdf(t: f64, a: f64, b: f64) -> f64 {
    let (a, b) = if a >= b { (a, b) } else { (b, a) };
    if b <= 1e-12 * a {
        return ((t + 0.5 * a) / a).clamp(0.0, 1.0);
    }
    // Integral of clamp(v, 0, a) from -inf to u.
    let ramp = |u: f64| {
        if u <= 0.0 {
            0.0
        } else if u <= a {
            0.5 * u * u
        } else {
            0.5 * a * a + a * (u - a)
        }
    };
    ((ramp(t + 0.5 * (a + b)) - ramp(t + 0.5 * (a - b))) / (a * b)).clamp(0.0, 1.0)
}

/// Screen density of straight rays through both slits, as exact cell
/// averages of the trapezoid on the same grid as [`fraunhofer_density`].
pub fn concentrated_density(geometry: &ExperimentGeometry, grid: &GridSpec) -> Result<ScreenDensity> {
    let x1 = first_null(geometry)?;
    let axis = grid.screen_axis(x1)?;
    let (a, b) = collimation_widths(geometry);
    let edge = |k: usize| axis.x0 + (k as f64 - 0.5) * axis.dx;
    let values = mirrored(axis.n, |i| {
        ((trapezoid_cdf(edge(i + 1), a, b) - trapezoid_cdf(edge(i), a, b)) / axis.dx).max(0.0)
    });
    ScreenDensity::on_axis(axis, values)
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixtureDensity {
    pub weight: f64,
    pub qm_part: ScreenDensity,
    pub concentrated_part: ScreenDensity,
}

impl MixtureDensity {
    pub fn new(weight: f64, qm_part: ScreenDensity, concentrated_part: ScreenDensity) -> Result<Self> {
        if !(0.0..=1.0).contains(&weight) {
            return Err(Error::InvalidArgument(format!("weight must lie in [0, 1] (got {weight})")));
        }
        qm_part.check_same_grid(&concentrated_part)?;
        Ok(Self {
            weight,
            qm_part,
            concentrated_part,
        })
    }

    /// `w * qm + (1 - w) * concentrated`, renormalized. Returns the QM part
    /// unchanged when `w == 1`.
    pub fn density(&self) -> Result<ScreenDensity> {
        if self.weight == 1.0 {
            return Ok(self.qm_part.clone());
        }
        let w = self.weight;
        let values = self
            .qm_part
            .values()
            .iter()
            .zip(self.concentrated_part.values())
            .map(|(q, c)| w * q + (1.0 - w) * c)
            .collect();
        ScreenDensity::normalized(self.qm_part.x0(), self.qm_part.dx(), values)
    }
}

pub fn mixture(geometry: &ExperimentGeometry, params: &SubQmParams, grid: &GridSpec) -> Result<MixtureDensity> {
    let weight = mixture_weight(geometry, params)?;
    MixtureDensity::new(
        weight,
        fraunhofer_density(geometry, grid)?,
        concentrated_density(geometry, grid)?,
    )
}

pub fn subqm_density(geometry: &ExperimentGeometry, params: &SubQmParams, grid: &GridSpec) -> Result<ScreenDensity> {
    mixture(geometry, params, grid)?.density()
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhotonRun {
    pub samples: SampleSet,
    /// Photons that received at least one kick.
    pub relaxed: usize,
}

/// Monte Carlo realization of the mixture. Each photon draws its kick count
/// from a Poisson law; unkicked photons follow a straight ray through two
/// uniform slit positions, kicked photons sample the diffraction density.
pub fn simulate_photon_run(
    geometry: &ExperimentGeometry,
    params: &SubQmParams,
    grid: &GridSpec,
    n: usize,
    seed: u64,
) -> Result<PhotonRun> {
    if n == 0 {
        return Err(Error::InvalidArgument("photon count must be >= 1".into()));
    }
    geometry.ensure_valid()?;
    params.validate()?;
    let qm = fraunhofer_density(geometry, grid)?;
    let sampler = InverseCdf::new(&qm);
    let kicks = match params.kick_rate(geometry) {
        None => None,
        Some(rate) => Some(Poisson::new(rate).map_err(|e| {
            Error::InvalidArgument(format!("kick rate {rate:e}: {e}"))
        })?),
    };
    let r = geometry.l0 / geometry.l;
    let half = 0.5 * geometry.delta0;
    let key = StreamKey::new(seed);

    let photons: Vec<(f64, bool)> = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = key.rng(i);
            let relaxed = match &kicks {
                None => true,
                Some(poisson) => poisson.sample(&mut rng) >= 1.0,
            };
            if relaxed {
                (sampler.sample(&mut rng), true)
            } else {
                let x1 = rng.random_range(-half..half);
                let x2 = rng.random_range(-half..half);
                (x2 * (1.0 + r) - x1 * r, false)
            }
        })
        .collect();
    let relaxed = photons.iter().filter(|p| p.1).count();
    let samples = SampleSet::new(photons.into_iter().map(|p| p.0).collect(), seed)?;
    Ok(PhotonRun { samples, relaxed })
}

pub fn simulate_photons(
    geometry: &ExperimentGeometry,
    params: &SubQmParams,
    grid: &GridSpec,
    n: usize,
    seed: u64,
) -> Result<SampleSet> {
    Ok(simulate_photon_run(geometry, params, grid, n, seed)?.samples)
}
