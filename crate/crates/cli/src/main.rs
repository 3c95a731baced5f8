use std::path::PathBuf;
use std::process::ExitCode;

use cascade_core::cosmo::{tau0_chain, CosmologyParams};
use cascade_core::dispersion::{minimal_mass_interval, minimal_mass_interval_samples, DEFAULT_MASS};
use cascade_core::geometry::{heuristic_dispersion, validate};
use cascade_core::harness::{emit_csv, emit_json, run_sweep, SweepConfig};
use cascade_core::qm::{cascade_density, fraunhofer_density};
use cascade_core::subqm::{mixture_weight, subqm_density};
use cascade_core::{Error, ExperimentGeometry, GridSpec, PhysicalConstants, SampleSet, SubQmParams};
use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

/// Two-slit cascade dispersion laboratory. Lengths in meters, times in
/// seconds.
#[derive(Debug, Parser)]
#[command(name = "cascade", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PatternEngine {
    Fraunhofer,
    Fresnel,
    Subqm,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute one screen density and write it as CSV (x_m,p_per_m).
    Pattern {
        #[arg(long, value_enum)]
        engine: PatternEngine,
        #[arg(long)]
        lambda0: f64,
        #[arg(long)]
        delta0: f64,
        #[arg(long)]
        l0: f64,
        #[arg(long)]
        l: f64,
        /// Relaxation time for the subqm engine.
        #[arg(long, default_value_t = 100e-12)]
        tau0: f64,
        #[arg(long, default_value_t = 8192)]
        grid_points: usize,
        #[arg(long, default_value_t = 12.0)]
        window_nulls: f64,
        #[arg(long, default_value_t = DEFAULT_MASS)]
        mass: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Sweep the slit separation as described by a JSON config.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_csv: Option<PathBuf>,
        #[arg(long)]
        out_json: Option<PathBuf>,
        /// Worker threads; results do not depend on this.
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Minimal-width interval of a one-column CSV of positions (header x_m).
    Dispersion {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_MASS)]
        mass: f64,
    },
    /// Relaxation-time estimate from cosmological particle densities.
    Tau0 {
        /// Use c = 3e8 m/s.
        #[arg(long)]
        paper_rounding: bool,
        #[arg(long, default_value_t = 1.0)]
        cross_section: f64,
        #[arg(long, default_value_t = 1.0)]
        baryon_density: f64,
        #[arg(long, default_value_t = 100.0)]
        normal_density: f64,
        #[arg(long, default_value_t = 10.0)]
        dark_ratio: f64,
    },
}

fn run(command: Command) -> Result<serde_json::Value, Error> {
    match command {
        Command::Pattern {
            engine,
            lambda0,
            delta0,
            l0,
            l,
            tau0,
            grid_points,
            window_nulls,
            mass,
            out,
        } => {
            let geometry = ExperimentGeometry { lambda0, delta0, l0, l };
            let report = validate(&geometry);
            geometry.ensure_valid()?;
            let grid = GridSpec {
                points: grid_points,
                window_nulls,
            };
            let params = SubQmParams::new(tau0);
            let (density, weight) = match engine {
                PatternEngine::Fraunhofer => (fraunhofer_density(&geometry, &grid)?, None),
                PatternEngine::Fresnel => (cascade_density(&geometry, &grid)?, None),
                PatternEngine::Subqm => (
                    subqm_density(&geometry, &params, &grid)?,
                    Some(mixture_weight(&geometry, &params)?),
                ),
            };
            density.write_csv(&out)?;
            let d = minimal_mass_interval(&density, mass)?;
            Ok(json!({
                "out": out,
                "points": density.len(),
                "delta_x_m": d.delta_x,
                "center_m": d.center,
                "mass": d.mass_threshold,
                "achieved_mass": d.achieved_mass,
                "delta_x_heuristic_m": heuristic_dispersion(&geometry)?,
                "mixture_weight": weight,
                "warnings": report.warnings,
            }))
        }
        Command::Sweep {
            config,
            out_csv,
            out_json,
            workers,
        } => {
            let config = SweepConfig::from_json_file(&config)?;
            let mut pool = rayon::ThreadPoolBuilder::new();
            if let Some(n) = workers {
                pool = pool.num_threads(n);
            }
            let pool = pool
                .build()
                .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
            let result = pool.install(|| run_sweep(&config))?;
            if let Some(path) = &out_csv {
                emit_csv(&result, path)?;
            }
            if let Some(path) = &out_json {
                emit_json(&result, path)?;
            }
            Ok(json!({
                "records": result.records.len(),
                "transition": result.transition,
                "out_csv": out_csv,
                "out_json": out_json,
            }))
        }
        Command::Dispersion { input, mass } => {
            let samples = SampleSet::read_csv(&input)?;
            let d = minimal_mass_interval_samples(&samples, mass)?;
            Ok(json!({
                "delta_x_m": d.delta_x,
                "center_m": d.center,
                "mass": d.mass_threshold,
                "achieved_mass": d.achieved_mass,
            }))
        }
        Command::Tau0 {
            paper_rounding,
            cross_section,
            baryon_density,
            normal_density,
            dark_ratio,
        } => {
            let params = CosmologyParams {
                baryon_density,
                normal_particle_density: normal_density,
                dark_to_normal_ratio: dark_ratio,
                effective_cross_section: cross_section,
                constants: if paper_rounding {
                    PhysicalConstants::PAPER
                } else {
                    PhysicalConstants::EXACT
                },
            };
            Ok(serde_json::to_value(tau0_chain(&params)?)?)
        }
    }
}

fn fail(kind: &str, message: String) -> ExitCode {
    eprintln!("{}", json!({ "error": kind, "message": message }));
    ExitCode::FAILURE
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!("{}", json!({ "error": "usage", "message": e.to_string().trim() }));
            return ExitCode::from(2);
        }
    };
    match run(cli.command) {
        Ok(value) => {
            println!("{}", serde_json::to_string_pretty(&value).expect("json value"));
            ExitCode::SUCCESS
        }
        Err(e) => fail(e.kind(), e.to_string()),
    }
}
