//! Sweep the slit separation, measure the dispersion under each engine, and
//! compare.

use std::fmt;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dispersion::{bootstrap_interval, minimal_mass_interval, minimal_mass_interval_samples, DEFAULT_MASS};
use crate::error::{Error, Result};
use crate::geometry::{heuristic_dispersion, validate, ExperimentGeometry, PhysicalConstants, RoundingMode};
use crate::qm::{cascade_density, fraunhofer_density, GridSpec};
use crate::rng::StreamKey;
use crate::subqm::{critical_length, mixture, simulate_photons, SubQmParams, TransitConvention};

pub const CSV_HEADER: [&str; 8] = [
    "l_m",
    "engine",
    "delta_x_m",
    "delta_x_heuristic_m",
    "mixture_weight",
    "achieved_mass",
    "ci_low_m",
    "ci_high_m",
];

pub const DEFAULT_TRANSITION_FRACTION: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Engine {
    Fraunhofer,
    FresnelCascade,
    SubqmAnalytic,
    SubqmMc,
}

impl Engine {
    pub const ALL: [Engine; 4] = [
        Engine::Fraunhofer,
        Engine::FresnelCascade,
        Engine::SubqmAnalytic,
        Engine::SubqmMc,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Engine::Fraunhofer => "fraunhofer",
            Engine::FresnelCascade => "fresnel-cascade",
            Engine::SubqmAnalytic => "subqm-analytic",
            Engine::SubqmMc => "subqm-mc",
        }
    }

    pub fn is_subqm(self) -> bool {
        matches!(self, Engine::SubqmAnalytic | Engine::SubqmMc)
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// 25 log-spaced separations from 0.3 mm to 0.3 m.
pub fn default_l_values() -> Vec<f64> {
    log_spaced(0.3e-3, 0.3, 25)
}

pub fn log_spaced(first: f64, last: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![first];
    }
    let step = (last / first).ln() / (count - 1) as f64;
    (0..count)
        .map(|i| match i {
            0 => first,
            i if i == count - 1 => last,
            i => first * (step * i as f64).exp(),
        })
        .collect()
}

fn default_lambda0() -> f64 {
    700e-9
}
fn default_delta0() -> f64 {
    10e-6
}
fn default_l0() -> f64 {
    0.3e-3
}
fn default_tau0() -> f64 {
    100e-12
}
fn default_engines() -> Vec<Engine> {
    Engine::ALL.to_vec()
}
fn default_mc_samples() -> usize {
    100_000
}
fn default_mass() -> f64 {
    DEFAULT_MASS
}
fn default_bootstrap() -> usize {
    200
}
fn default_fraction() -> f64 {
    DEFAULT_TRANSITION_FRACTION
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default = "default_lambda0")]
    pub lambda0_m: f64,
    #[serde(default = "default_delta0")]
    pub delta0_m: f64,
    #[serde(default = "default_l0")]
    pub l0_m: f64,
    #[serde(default = "default_l_values")]
    pub l_values_m: Vec<f64>,
    #[serde(default = "default_tau0")]
    pub tau0_s: f64,
    #[serde(default = "default_engines")]
    pub engines: Vec<Engine>,
    #[serde(default = "default_mc_samples")]
    pub mc_samples: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_mass")]
    pub mass_threshold: f64,
    #[serde(default)]
    pub grid: GridSpec,
    #[serde(default)]
    pub transit_convention: TransitConvention,
    #[serde(default)]
    pub rounding_mode: RoundingMode,
    #[serde(default = "default_bootstrap")]
    pub bootstrap_replicates: usize,
    #[serde(default = "default_fraction")]
    pub transition_fraction: f64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("every field has a default")
    }
}

impl SweepConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text)
            .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))
    }

    pub fn geometry(&self, l: f64) -> ExperimentGeometry {
        ExperimentGeometry {
            lambda0: self.lambda0_m,
            delta0: self.delta0_m,
            l0: self.l0_m,
            l,
        }
    }

    pub fn subqm_params(&self) -> SubQmParams {
        SubQmParams {
            tau0: self.tau0_s,
            transit_convention: self.transit_convention,
            constants: PhysicalConstants {
                rounding_mode: self.rounding_mode,
            },
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidConfig(msg));
        if self.l_values_m.is_empty() {
            return fail("l_values_m must not be empty".into());
        }
        if self.l_values_m.windows(2).any(|w| w[1].partial_cmp(&w[0]) != Some(std::cmp::Ordering::Greater)) {
            return fail("l_values_m must be strictly increasing".into());
        }
        for &l in &self.l_values_m {
            let report = validate(&self.geometry(l));
            if !report.errors.is_empty() {
                return fail(format!("l = {l:e} m: {}", report.errors.join("; ")));
            }
        }
        if self.engines.is_empty() {
            return fail("engines must not be empty".into());
        }
        let mut sorted = self.engines.clone();
        sorted.sort();
        sorted.dedup();
        if sorted.len() != self.engines.len() {
            return fail("engines must not repeat".into());
        }
        if !(self.mass_threshold > 0.0 && self.mass_threshold < 1.0) {
            return fail(format!("mass_threshold must lie in (0, 1) (got {})", self.mass_threshold));
        }
        if !(self.transition_fraction > 0.0 && self.transition_fraction.is_finite()) {
            return fail("transition_fraction must be > 0".into());
        }
        self.subqm_params().validate()?;
        self.grid.validate()?;
        if self.engines.contains(&Engine::SubqmMc) {
            if self.mc_samples < 10 {
                return fail(format!("mc_samples must be >= 10 (got {})", self.mc_samples));
            }
            if self.bootstrap_replicates < 100 {
                return fail(format!(
                    "bootstrap_replicates must be >= 100 (got {})",
                    self.bootstrap_replicates
                ));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    pub l_m: f64,
    pub engine: Engine,
    pub delta_x_m: f64,
    pub center_m: f64,
    pub delta_x_heuristic_m: f64,
    pub mixture_weight: Option<f64>,
    pub achieved_mass: f64,
    pub ci_low_m: Option<f64>,
    pub ci_high_m: Option<f64>,
    /// Fresnel number of slit 1 seen from slit 2.
    pub fresnel_number_slits: f64,
    /// Fresnel number of slit 2 seen from the screen.
    pub fresnel_number_screen: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub qm_engine: Engine,
    pub subqm_engine: Engine,
    pub fraction: f64,
    /// First separation at which the SubQM dispersion reaches `fraction` of
    /// the QM dispersion; `None` if it never does.
    pub l_est_m: Option<f64>,
    /// `c * tau0`.
    pub critical_length_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub config: SweepConfig,
    pub records: Vec<SweepRecord>,
    pub transition: Option<Transition>,
}

fn run_task(config: &SweepConfig, l_index: usize, engine: Engine) -> Result<SweepRecord> {
    let l = config.l_values_m[l_index];
    let geometry = config.geometry(l);
    let grid = &config.grid;
    let mass = config.mass_threshold;
    let params = config.subqm_params();

    let mut mixture_weight = None;
    let mut ci = None;
    let result = match engine {
        Engine::Fraunhofer => minimal_mass_interval(&fraunhofer_density(&geometry, grid)?, mass)?,
        Engine::FresnelCascade => minimal_mass_interval(&cascade_density(&geometry, grid)?, mass)?,
        Engine::SubqmAnalytic => {
            let m = mixture(&geometry, &params, grid)?;
            mixture_weight = Some(m.weight);
            minimal_mass_interval(&m.density()?, mass)?
        }
        Engine::SubqmMc => {
            let key = StreamKey::new(config.seed)
                .derive(l_index as u64)
                .derive(engine as u64);
            mixture_weight = Some(crate::subqm::mixture_weight(&geometry, &params)?);
            let samples = simulate_photons(&geometry, &params, grid, config.mc_samples, key.value())?;
            ci = Some(bootstrap_interval(
                &samples,
                mass,
                config.bootstrap_replicates,
                key.derive(1).value(),
            )?);
            minimal_mass_interval_samples(&samples, mass)?
        }
    };
    Ok(SweepRecord {
        l_m: l,
        engine,
        delta_x_m: result.delta_x,
        center_m: result.center,
        delta_x_heuristic_m: heuristic_dispersion(&geometry)?,
        mixture_weight,
        achieved_mass: result.achieved_mass,
        ci_low_m: ci.map(|c| c.0),
        ci_high_m: ci.map(|c| c.1),
        fresnel_number_slits: geometry.fresnel_number(geometry.l),
        fresnel_number_screen: geometry.fresnel_number(geometry.l0),
    })
}

/// Runs every `(l, engine)` pair on the current rayon pool. The output is a
/// pure function of the config.
pub fn run_sweep(config: &SweepConfig) -> Result<SweepResult> {
    config.validate()?;
    let mut engines = config.engines.clone();
    engines.sort();
    let tasks: Vec<(usize, Engine)> = (0..config.l_values_m.len())
        .flat_map(|i| engines.iter().map(move |&e| (i, e)))
        .collect();
    let outcomes: Vec<Result<SweepRecord>> = tasks
        .par_iter()
        .map(|&(i, engine)| {
            run_task(config, i, engine).map_err(|source| Error::Engine {
                l_m: config.l_values_m[i],
                engine: engine.name().to_string(),
                source: Box::new(source),
            })
        })
        .collect();
    let records = outcomes.into_iter().collect::<Result<Vec<_>>>()?;

    let mut result = SweepResult {
        config: config.clone(),
        records,
        transition: None,
    };
    if let Some((qm, sub)) = default_pairing(&result) {
        let l_est = detect_transition_between(&result, qm, sub, config.transition_fraction)?;
        result.transition = Some(Transition {
            qm_engine: qm,
            subqm_engine: sub,
            fraction: config.transition_fraction,
            l_est_m: l_est,
            critical_length_m: critical_length(&config.subqm_params()),
        });
    }
    Ok(result)
}

fn has_engine(result: &SweepResult, engine: Engine) -> bool {
    result.records.iter().any(|r| r.engine == engine)
}

/// Fraunhofer is the QM reference when present since it is the mixture's
/// own QM component; the analytic mixture is preferred over Monte Carlo.
fn default_pairing(result: &SweepResult) -> Option<(Engine, Engine)> {
    let qm = [Engine::Fraunhofer, Engine::FresnelCascade]
        .into_iter()
        .find(|&e| has_engine(result, e))?;
    let sub = [Engine::SubqmAnalytic, Engine::SubqmMc]
        .into_iter()
        .find(|&e| has_engine(result, e))?;
    Some((qm, sub))
}

pub fn detect_transition(result: &SweepResult, fraction: f64) -> Result<Option<f64>> {
    let (qm, sub) = default_pairing(result).ok_or_else(|| {
        Error::InvalidArgument("transition detection needs a QM engine and a SubQM engine".into())
    })?;
    detect_transition_between(result, qm, sub, fraction)
}

/// Smallest `l` at which `delta_x(candidate) >= fraction * delta_x(reference)`,
/// interpolated linearly in `log l` between the bracketing sweep points.
pub fn detect_transition_between(
    result: &SweepResult,
    reference: Engine,
    candidate: Engine,
    fraction: f64,
) -> Result<Option<f64>> {
    let lookup = |l: f64, engine: Engine| {
        result
            .records
            .iter()
            .find(|r| r.l_m == l && r.engine == engine)
            .map(|r| r.delta_x_m)
    };
    let mut curve = Vec::with_capacity(result.config.l_values_m.len());
    for &l in &result.config.l_values_m {
        match (lookup(l, reference), lookup(l, candidate)) {
            (Some(q), Some(s)) => curve.push((l, s / q)),
            _ => {
                return Err(Error::InvalidArgument(format!(
                    "missing {reference} / {candidate} pair at l = {l:e} m"
                )))
            }
        }
    }
    let Some(first) = curve.iter().position(|&(_, ratio)| ratio >= fraction) else {
        return Ok(None);
    };
    if first == 0 {
        return Ok(Some(curve[0].0));
    }
    let (l_a, r_a) = curve[first - 1];
    let (l_b, r_b) = curve[first];
    let t = (fraction - r_a) / (r_b - r_a);
    Ok(Some((l_a.ln() + t * (l_b.ln() - l_a.ln())).exp()))
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

pub fn csv_string(result: &SweepResult) -> Result<String> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    let to_err = |e: csv::Error| Error::InvalidArgument(format!("csv encoding: {e}"));
    writer.write_record(CSV_HEADER).map_err(to_err)?;
    for r in &result.records {
        writer
            .write_record([
                r.l_m.to_string(),
                r.engine.name().to_string(),
                r.delta_x_m.to_string(),
                r.delta_x_heuristic_m.to_string(),
                opt(r.mixture_weight),
                r.achieved_mass.to_string(),
                opt(r.ci_low_m),
                opt(r.ci_high_m),
            ])
            .map_err(to_err)?;
    }
    let bytes = writer
        .into_inner()
        .map_err(|e| Error::InvalidArgument(format!("csv encoding: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

pub fn json_string(result: &SweepResult) -> Result<String> {
    let mut text = serde_json::to_string_pretty(result)?;
    text.push('\n');
    Ok(text)
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub fn emit_csv(result: &SweepResult, path: &Path) -> Result<()> {
    write(path, &csv_string(result)?)
}

pub fn emit_json(result: &SweepResult, path: &Path) -> Result<()> {
    write(path, &json_string(result)?)
}
