//! Minimal-width interval carrying a target probability mass.
//!
//! `delta_x = 2 * min { R : exists x0 with mass([x0 - R, x0 + R]) >= m }`,
//! evaluated on a gridded density or on a sample set.

use std::path::Path;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::qm::{cdf_interp, ScreenDensity, NORMALIZATION_TOL};
use crate::rng::StreamKey;

pub const DEFAULT_MASS: f64 = 0.7;

const MASS_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    positions: Vec<f64>,
    seed: u64,
}

impl SampleSet {
    pub fn new(positions: Vec<f64>, seed: u64) -> Result<Self> {
        if positions.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument("sample positions must be finite".into()));
        }
        Ok(Self { positions, seed })
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn n(&self) -> usize {
        self.positions.len()
    }

    /// Reads a one-column CSV with header `x_m`.
    pub fn read_csv(path: &Path) -> Result<Self> {
        let csv_err = |source| Error::Csv {
            path: path.to_path_buf(),
            source,
        };
        let mut reader = csv::Reader::from_path(path).map_err(csv_err)?;
        let headers = reader.headers().map_err(csv_err)?;
        if headers.len() != 1 || headers.get(0).map(str::trim) != Some("x_m") {
            return Err(Error::InvalidArgument(format!(
                "{}: expected a single column with header x_m",
                path.display()
            )));
        }
        let mut positions = Vec::new();
        for (line, record) in reader.records().enumerate() {
            let record = record.map_err(csv_err)?;
            let field = record.get(0).unwrap_or("").trim();
            let x: f64 = field.parse().map_err(|_| {
                Error::InvalidArgument(format!(
                    "{}: row {}: not a number: {field:?}",
                    path.display(),
                    line + 2
                ))
            })?;
            positions.push(x);
        }
        Self::new(positions, 0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DispersionResult {
    /// Interval width `2R`.
    pub delta_x: f64,
    pub center: f64,
    pub mass_threshold: f64,
    pub achieved_mass: f64,
}

fn check_mass(mass: f64) -> Result<()> {
    if mass > 0.0 && mass < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("mass must lie in (0, 1) (got {mass})")))
    }
}

/// Candidate window: `(width, center)`.
type Window = (f64, f64);

/// Picks the narrowest window, breaking ties by the smallest `|center|`.
fn better(a: Window, b: Window, tol: f64) -> Window {
    if b.0 < a.0 - tol {
        b
    } else if a.0 < b.0 - tol {
        a
    } else if b.1.abs() < a.1.abs() {
        b
    } else {
        a
    }
}

/// Density-based estimator.
///
/// The density is piecewise constant over its cells, so the cumulative mass
/// is piecewise linear and the optimal window always has at least one
/// endpoint on a cell boundary. Both families of boundary-anchored windows
/// are scanned with a two-pointer sweep; the far endpoint is placed exactly
/// where the enclosed mass reaches the target.
pub fn minimal_mass_interval(density: &ScreenDensity, mass: f64) -> Result<DispersionResult> {
    check_mass(mass)?;
    let cdf = density.cdf_edges();
    let n = density.len();
    let total = cdf[n];
    if total > 1.0 + NORMALIZATION_TOL {
        return Err(Error::Unnormalized { integral: total });
    }
    if total < mass - MASS_TOL {
        return Err(Error::InsufficientMass {
            available: total,
            requested: mass,
        });
    }
    let dx = density.dx();
    let left = density.edge(0);
    let edge = |k: usize| left + k as f64 * dx;
    let tol = 1e-9 * dx;

    let mut best: Option<Window> = None;
    let mut consider = |w: Window| {
        best = Some(match best {
            None => w,
            Some(b) => better(b, w, tol),
        });
    };

    // Left endpoint on boundary k, right endpoint where mass first reaches
    // cdf[k] + mass.
    let mut j = 0usize;
    for k in 0..=n {
        let target = cdf[k] + mass;
        if target > total + MASS_TOL {
            break;
        }
        let target = target.min(total);
        j = j.max(k);
        while j < n && cdf[j] < target {
            j += 1;
        }
        let right = if j == 0 || cdf[j - 1] >= target {
            edge(j)
        } else {
            let (lo, hi) = (cdf[j - 1], cdf[j]);
            edge(j - 1) + (target - lo) / (hi - lo) * dx
        };
        let a = edge(k);
        consider((right - a, 0.5 * (right + a)));
    }

    // Right endpoint on boundary k, left endpoint where mass last equals
    // cdf[k] - mass.
    let mut i = 0usize;
    for k in 0..=n {
        let target = cdf[k] - mass;
        if target < -MASS_TOL {
            continue;
        }
        let target = target.max(0.0);
        while i < n && cdf[i + 1] <= target {
            i += 1;
        }
        let a = if i == n || cdf[i + 1] <= cdf[i] {
            edge(i)
        } else {
            let (lo, hi) = (cdf[i], cdf[i + 1]);
            edge(i) + ((target - lo) / (hi - lo)).clamp(0.0, 1.0) * dx
        };
        let b = edge(k);
        consider((b - a, 0.5 * (a + b)));
    }

    let (mut width, mut center) = best.expect("total >= mass guarantees a window");
    // A window of the optimal width centered on the origin wins any tie.
    let mass_at = |c: f64, w: f64| {
        cdf_interp(&cdf, left, dx, c + 0.5 * w) - cdf_interp(&cdf, left, dx, c - 0.5 * w)
    };
    if center != 0.0 && mass_at(0.0, width) >= mass - MASS_TOL {
        center = 0.0;
    }
    width = width.max(0.0);
    Ok(DispersionResult {
        delta_x: width,
        center,
        mass_threshold: mass,
        achieved_mass: mass_at(center, width),
    })
}

/// Number of order statistics a window must span: `ceil(mass * n)`.
fn window_count(mass: f64, n: usize) -> usize {
    // Guard against 0.7 * 10 = 7.000000000000001.
    (((mass * n as f64) - 1e-9).ceil() as usize).clamp(1, n)
}

fn min_window_sorted(sorted: &[f64], k: usize) -> Window {
    let mut best = (f64::INFINITY, 0.0);
    for i in 0..=sorted.len() - k {
        let (a, b) = (sorted[i], sorted[i + k - 1]);
        best = better(best, (b - a, 0.5 * (a + b)), 0.0);
    }
    best
}

/// Sample-based estimator over windows of `ceil(mass * n)` consecutive
/// order statistics.
pub fn minimal_mass_interval_samples(samples: &SampleSet, mass: f64) -> Result<DispersionResult> {
    check_mass(mass)?;
    if samples.n() == 0 {
        return Err(Error::EmptySamples);
    }
    let mut sorted = samples.positions().to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let k = window_count(mass, sorted.len());
    let (delta_x, center) = min_window_sorted(&sorted, k);
    Ok(DispersionResult {
        delta_x,
        center,
        mass_threshold: mass,
        achieved_mass: k as f64 / sorted.len() as f64,
    })
}

/// Percentile (2.5%, 97.5%) bootstrap interval of the sample-based
/// `delta_x`. Replicate `r` resamples from stream `r` of `seed`.
pub fn bootstrap_interval(
    samples: &SampleSet,
    mass: f64,
    n_boot: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    check_mass(mass)?;
    let n = samples.n();
    if n < 10 {
        return Err(Error::InvalidArgument(format!(
            "bootstrap needs at least 10 samples (got {n})"
        )));
    }
    if n_boot < 100 {
        return Err(Error::InvalidArgument(format!(
            "bootstrap needs at least 100 replicates (got {n_boot})"
        )));
    }
    let mut sorted = samples.positions().to_vec();
    sorted.sort_unstable_by(f64::total_cmp);
    let k = window_count(mass, n);
    let key = StreamKey::new(seed);

    let mut widths: Vec<f64> = (0..n_boot as u64)
        .into_par_iter()
        .map(|r| {
            // Counting draws per order statistic yields the sorted resample
            // without a sort.
            let mut rng = key.rng(r);
            let mut counts = vec![0u32; n];
            for _ in 0..n {
                counts[rng.random_range(0..n)] += 1;
            }
            let mut resample = Vec::with_capacity(n);
            for (x, &c) in sorted.iter().zip(&counts) {
                resample.extend(std::iter::repeat_n(*x, c as usize));
            }
            min_window_sorted(&resample, k).0
        })
        .collect();
    widths.sort_unstable_by(f64::total_cmp);
    Ok((quantile_sorted(&widths, 0.025), quantile_sorted(&widths, 0.975)))
}

/// Linear-interpolation quantile of sorted data.
fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn uniform(width: f64, n: usize) -> ScreenDensity {
        ScreenDensity::normalized(-0.5 * width + 0.5 * width / n as f64, width / n as f64, vec![1.0; n]).unwrap()
    }

    fn gaussian(sigma: f64, shift: f64, n: usize) -> ScreenDensity {
        let half = 10.0 * sigma;
        let dx = 2.0 * half / n as f64;
        let x0 = shift - half + 0.5 * dx;
        let values = (0..n)
            .map(|i| {
                let x = x0 + i as f64 * dx - shift;
                (-0.5 * x * x / (sigma * sigma)).exp()
            })
            .collect();
        ScreenDensity::normalized(x0, dx, values).unwrap()
    }

    fn skewed(n: usize, shift: f64, scale: f64) -> ScreenDensity {
        // Gamma(3)-like shape on [0, 20].
        let dx = 20.0 * scale / n as f64;
        let x0 = shift + 0.5 * dx;
        let values = (0..n)
            .map(|i| {
                let t = (i as f64 + 0.5) * 20.0 / n as f64;
                t * t * (-t).exp()
            })
            .collect();
        ScreenDensity::normalized(x0, dx, values).unwrap()
    }

    #[test]
    fn uniform_is_exact() {
        for n in [100, 333, 1024] {
            let r = minimal_mass_interval(&uniform(2.0, n), 0.7).unwrap();
            assert!((r.delta_x - 1.4).abs() < 1e-12, "n = {n}: {}", r.delta_x);
            assert_eq!(r.center, 0.0);
            assert!(r.achieved_mass >= 0.7 - 1e-12);
        }
    }

    #[test]
    fn gaussian_matches_erf_inversion() {
        let sigma = 3.0;
        let r = minimal_mass_interval(&gaussian(sigma, 0.0, 8192), 0.7).unwrap();
        // z with Phi(z) - Phi(-z) = 0.7, from bisection on erf.
        let z = {
            let (mut lo, mut hi) = (0.0f64, 3.0f64);
            for _ in 0..100 {
                let mid = 0.5 * (lo + hi);
                if statrs::function::erf::erf(mid / 2f64.sqrt()) < 0.7 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            0.5 * (lo + hi)
        };
        assert!((z - 1.0364).abs() < 1e-4);
        assert!((r.delta_x / (2.0 * z * sigma) - 1.0).abs() < 0.005);
        assert_eq!(r.center, 0.0);
    }

    #[test]
    fn rejects_bad_mass_and_truncated_density() {
        let d = uniform(1.0, 100);
        assert!(minimal_mass_interval(&d, 0.0).is_err());
        assert!(minimal_mass_interval(&d, 1.0).is_err());
        let truncated = ScreenDensity::new(0.0, 0.01, vec![0.5; 100]).unwrap();
        assert!(matches!(
            minimal_mass_interval(&truncated, 0.7),
            Err(Error::InsufficientMass { .. })
        ));
    }

    #[test]
    fn samples_one_to_ten() {
        let s = SampleSet::new((1..=10).map(f64::from).collect(), 0).unwrap();
        let r = minimal_mass_interval_samples(&s, 0.7).unwrap();
        assert_eq!(r.delta_x, 6.0);
        assert_eq!(r.achieved_mass, 0.7);
        // Four windows of width 6; centers 4 .. 7, nearest zero is 4.
        assert_eq!(r.center, 4.0);
    }

    #[test]
    fn single_sample_and_empty_set() {
        let s = SampleSet::new(vec![3.0], 0).unwrap();
        assert_eq!(minimal_mass_interval_samples(&s, 0.7).unwrap().delta_x, 0.0);
        let empty = SampleSet::new(vec![], 0).unwrap();
        assert!(matches!(
            minimal_mass_interval_samples(&empty, 0.7),
            Err(Error::EmptySamples)
        ));
        assert!(SampleSet::new(vec![f64::NAN], 0).is_err());
    }

    #[test]
    fn bootstrap_degenerate_and_preconditions() {
        let same = SampleSet::new(vec![1.5; 50], 0).unwrap();
        assert_eq!(bootstrap_interval(&same, 0.7, 100, 3).unwrap(), (0.0, 0.0));
        let few = SampleSet::new(vec![1.0; 9], 0).unwrap();
        assert!(bootstrap_interval(&few, 0.7, 100, 3).is_err());
        assert!(bootstrap_interval(&same, 0.7, 99, 3).is_err());
    }

    #[test]
    fn bootstrap_is_deterministic_and_contains_estimate() {
        let d = gaussian(1.0, 0.0, 4096);
        let s = crate::qm::sample_density(&d, 5000, 11).unwrap();
        let est = minimal_mass_interval_samples(&s, 0.7).unwrap().delta_x;
        let a = bootstrap_interval(&s, 0.7, 200, 5).unwrap();
        let b = bootstrap_interval(&s, 0.7, 200, 5).unwrap();
        assert_eq!(a, b);
        assert!(a.0 <= est && est <= a.1, "{a:?} vs {est}");
    }

    #[test]
    fn grid_refinement_moves_estimate_by_at_most_one_coarse_cell() {
        let coarse = gaussian(1.0, 0.3, 512);
        let fine = gaussian(1.0, 0.3, 1024);
        let a = minimal_mass_interval(&coarse, 0.7).unwrap().delta_x;
        let b = minimal_mass_interval(&fine, 0.7).unwrap().delta_x;
        assert!((a - b).abs() <= coarse.dx());
    }

    proptest! {
        #[test]
        fn monotone_in_mass(m1 in 0.05..0.95f64, m2 in 0.05..0.95f64) {
            let (lo, hi) = if m1 <= m2 { (m1, m2) } else { (m2, m1) };
            let d = skewed(2048, 0.0, 1.0);
            let a = minimal_mass_interval(&d, lo).unwrap().delta_x;
            let b = minimal_mass_interval(&d, hi).unwrap().delta_x;
            prop_assert!(a <= b + 1e-12);

            let s = SampleSet::new((0..500).map(|i| ((i * 37) % 101) as f64 * 0.1 + (i as f64).sqrt()).collect(), 0).unwrap();
            let a = minimal_mass_interval_samples(&s, lo).unwrap().delta_x;
            let b = minimal_mass_interval_samples(&s, hi).unwrap().delta_x;
            prop_assert!(a <= b);
        }

        #[test]
        fn translation_and_scale_equivariance(shift in -50.0..50.0f64, scale in 0.1..10.0f64) {
            let base = minimal_mass_interval(&skewed(2048, 0.0, 1.0), 0.7).unwrap();
            let moved = minimal_mass_interval(&skewed(2048, shift, scale), 0.7).unwrap();
            prop_assert!((moved.delta_x - scale * base.delta_x).abs() <= 1e-9 * scale);
            prop_assert!((moved.center - (shift + scale * base.center)).abs() <= 1e-9 * (1.0 + shift.abs()));

            let pts: Vec<f64> = (0..300).map(|i| ((i * 7919) % 1000) as f64 / 37.0).collect();
            let s0 = SampleSet::new(pts.clone(), 0).unwrap();
            let s1 = SampleSet::new(pts.iter().map(|x| scale * x + shift).collect(), 0).unwrap();
            let r0 = minimal_mass_interval_samples(&s0, 0.7).unwrap();
            let r1 = minimal_mass_interval_samples(&s1, 0.7).unwrap();
            prop_assert!((r1.delta_x - scale * r0.delta_x).abs() <= 1e-9 * scale * r0.delta_x.max(1.0));
        }
    }
}
