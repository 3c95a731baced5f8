//! Experiment configuration and the closed-form diffraction lengths.
//!
//! Every quantity is in SI base units: meters and seconds.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Factor used to operationalize "much smaller than".
pub const MUCH_SMALLER_FACTOR: f64 = 10.0;

pub const C_EXACT: f64 = 299_792_458.0;
pub const C_PAPER: f64 = 3.0e8;

/// Geometry of the two-slit cascade. Both slits share width `delta0` and a
/// common optical axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExperimentGeometry {
    /// Wavelength.
    pub lambda0: f64,
    /// Slit width.
    pub delta0: f64,
    /// Distance from slit 2 to the screen.
    pub l0: f64,
    /// Distance from slit 1 to slit 2.
    pub l: f64,
}

impl ExperimentGeometry {
    /// 700 nm light, 10 um slits, 0.3 mm to the screen, with slit separation
    /// `l`.
    pub fn paper_defaults(l: f64) -> Self {
        Self {
            lambda0: 700e-9,
            delta0: 10e-6,
            l0: 0.3e-3,
            l,
        }
    }

    pub fn with_l(self, l: f64) -> Self {
        Self { l, ..self }
    }

    pub fn scaled(self, s: f64) -> Self {
        Self {
            lambda0: self.lambda0 * s,
            delta0: self.delta0 * s,
            l0: self.l0 * s,
            l: self.l * s,
        }
    }

    /// Errors out unless [`validate`] reports no hard violations.
    pub fn ensure_valid(&self) -> Result<()> {
        let report = validate(self);
        if report.errors.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidGeometry(report.errors))
        }
    }

    /// Fresnel number `delta0^2 / (4 lambda0 z)` of one slit seen from
    /// distance `z`.
    pub fn fresnel_number(&self, z: f64) -> f64 {
        self.delta0 * self.delta0 / (4.0 * self.lambda0 * z)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RoundingMode {
    /// c = 299 792 458 m/s.
    #[default]
    Exact,
    /// c = 3e8 m/s, reproducing hand arithmetic.
    Paper,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct PhysicalConstants {
    pub rounding_mode: RoundingMode,
}

impl PhysicalConstants {
    pub const EXACT: Self = Self {
        rounding_mode: RoundingMode::Exact,
    };
    pub const PAPER: Self = Self {
        rounding_mode: RoundingMode::Paper,
    };

    /// Speed of light in m/s.
    pub fn c(&self) -> f64 {
        match self.rounding_mode {
            RoundingMode::Exact => C_EXACT,
            RoundingMode::Paper => C_PAPER,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ValidationReport {
    /// Hard constraint violations; the geometry is unusable if any exist.
    pub errors: Vec<String>,
    /// Soft "much smaller than" violations with the offending ratio.
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn is_usable(&self) -> bool {
        self.errors.is_empty()
    }
}

pub fn validate(geometry: &ExperimentGeometry) -> ValidationReport {
    let mut report = ValidationReport::default();
    let fields = [
        ("lambda0", geometry.lambda0),
        ("delta0", geometry.delta0),
        ("l0", geometry.l0),
        ("l", geometry.l),
    ];
    for (name, value) in fields {
        if !(value.is_finite() && value > 0.0) {
            report
                .errors
                .push(format!("{name} must be finite and > 0 (got {value:e})"));
        }
    }
    if !report.errors.is_empty() {
        return report;
    }

    if geometry.l < geometry.l0 {
        report.errors.push(format!(
            "l must be >= l0 (l = {:e} m, l0 = {:e} m)",
            geometry.l, geometry.l0
        ));
    }
    if geometry.delta0 > geometry.l0 / MUCH_SMALLER_FACTOR {
        report.warnings.push(format!(
            "delta0 << l0 not satisfied: delta0/l0 = {:.4}",
            geometry.delta0 / geometry.l0
        ));
    }
    let heuristic = heuristic_unchecked(geometry);
    if heuristic <= MUCH_SMALLER_FACTOR * geometry.delta0 {
        report.warnings.push(format!(
            "heuristic dispersion >> delta0 not satisfied: dx/delta0 = {:.4}",
            heuristic / geometry.delta0
        ));
    }
    report
}

fn first_null_unchecked(g: &ExperimentGeometry) -> f64 {
    g.l0 * g.lambda0 / g.delta0
}

fn heuristic_unchecked(g: &ExperimentGeometry) -> f64 {
    4.0 * first_null_unchecked(g)
}

/// Screen position of the first zero of the single-slit pattern,
/// `l0 * lambda0 / delta0`.
pub fn first_null(geometry: &ExperimentGeometry) -> Result<f64> {
    geometry.ensure_valid()?;
    Ok(first_null_unchecked(geometry))
}

/// `k`-th zero, `k >= 1`. `k = 0` is the central maximum and is rejected.
pub fn kth_null(geometry: &ExperimentGeometry, k: u32) -> Result<f64> {
    if k == 0 {
        return Err(Error::InvalidArgument(
            "k must be >= 1; k = 0 is the central maximum".into(),
        ));
    }
    Ok(f64::from(k) * first_null(geometry)?)
}

/// The rule-of-thumb dispersion `4 * x_1null`.
pub fn heuristic_dispersion(geometry: &ExperimentGeometry) -> Result<f64> {
    geometry.ensure_valid()?;
    Ok(heuristic_unchecked(geometry))
}

/// Light travel times `(slit 1 -> slit 2, slit 2 -> screen)` in seconds.
pub fn transit_times(
    geometry: &ExperimentGeometry,
    constants: &PhysicalConstants,
) -> Result<(f64, f64)> {
    geometry.ensure_valid()?;
    let c = constants.c();
    Ok((geometry.l / c, geometry.l0 / c))
}
