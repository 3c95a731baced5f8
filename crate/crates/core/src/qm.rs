//! Standard quantum-mechanical screen densities.
//!
//! Two routes produce the density: the analytic far-field single-slit
//! pattern, and a direct Fresnel quadrature of the field through both slits.
//! A density is stored on a uniform grid of cells; value `i` is the
//! probability density over the cell centered at `x0 + i * dx`.

use std::f64::consts::PI;
use std::path::Path;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dispersion::SampleSet;
use crate::error::{Error, Result};
use crate::geometry::{first_null, ExperimentGeometry};
use crate::rng::StreamKey;

/// Tolerance on `sum(values) * dx == 1`.
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// Minimum number of grid cells between consecutive nulls.
pub const MIN_POINTS_PER_NULL: f64 = 16.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub points: usize,
    /// Screen window half-width in units of the first null.
    pub window_nulls: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self {
            points: 8192,
            window_nulls: 12.0,
        }
    }
}

impl GridSpec {
    pub fn validate(&self) -> Result<()> {
        if self.points < 256 || !self.points.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "points must be a power of two >= 256 (got {})",
                self.points
            )));
        }
        if !(self.window_nulls.is_finite() && self.window_nulls >= 4.0) {
            return Err(Error::InvalidGrid(format!(
                "window_nulls must be >= 4 (got {})",
                self.window_nulls
            )));
        }
        Ok(())
    }

    /// Screen axis for a pattern whose first null sits at `first_null`.
    pub fn screen_axis(&self, first_null: f64) -> Result<Axis> {
        self.validate()?;
        let half = self.window_nulls * first_null;
        Ok(Axis::centered(half, self.points))
    }
}

/// A uniform grid of `n` cell centers starting at `x0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub x0: f64,
    pub dx: f64,
    pub n: usize,
}

impl Axis {
    /// `n` cells tiling `[-half, half]`.
    pub fn centered(half: f64, n: usize) -> Self {
        let dx = 2.0 * half / n as f64;
        Self {
            x0: -half + 0.5 * dx,
            dx,
            n,
        }
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.dx
    }

    pub fn max_abs(&self) -> f64 {
        self.x0.abs().max(self.x(self.n - 1).abs())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScreenDensity {
    x0: f64,
    dx: f64,
    values: Vec<f64>,
}

impl ScreenDensity {
    /// Wraps raw values without rescaling them.
    pub fn new(x0: f64, dx: f64, values: Vec<f64>) -> Result<Self> {
        if !(dx.is_finite() && dx > 0.0) {
            return Err(Error::InvalidGrid(format!("dx must be > 0 (got {dx:e})")));
        }
        if !x0.is_finite() {
            return Err(Error::InvalidGrid("x0 must be finite".into()));
        }
        if values.len() < 2 {
            return Err(Error::InvalidGrid("need at least 2 grid points".into()));
        }
        if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(Error::InvalidArgument(format!(
                "density values must be finite and >= 0 (found {v})"
            )));
        }
        Ok(Self { x0, dx, values })
    }

    /// Rescales the values so that they integrate to one on the grid.
    pub fn normalized(x0: f64, dx: f64, values: Vec<f64>) -> Result<Self> {
        let mut density = Self::new(x0, dx, values)?;
        let integral = density.integral();
        if !(integral > 0.0 && integral.is_finite()) {
            return Err(Error::Unnormalized { integral });
        }
        density.values.iter_mut().for_each(|v| *v /= integral);
        Ok(density)
    }

    pub(crate) fn on_axis(axis: Axis, values: Vec<f64>) -> Result<Self> {
        Self::normalized(axis.x0, axis.dx, values)
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn axis(&self) -> Axis {
        Axis {
            x0: self.x0,
            dx: self.dx,
            n: self.values.len(),
        }
    }

    pub fn x(&self, i: usize) -> f64 {
        self.x0 + i as f64 * self.dx
    }

    /// Left boundary of cell `k`; `k == len()` gives the right edge.
    pub fn edge(&self, k: usize) -> f64 {
        self.x0 + (k as f64 - 0.5) * self.dx
    }

    pub fn integral(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.dx
    }

    pub fn is_normalized(&self) -> bool {
        (self.integral() - 1.0).abs() <= NORMALIZATION_TOL
    }

    /// Cumulative mass at each cell boundary; `len() + 1` entries.
    pub fn cdf_edges(&self) -> Vec<f64> {
        let mut cdf = Vec::with_capacity(self.values.len() + 1);
        let mut acc = 0.0;
        cdf.push(0.0);
        for v in &self.values {
            acc += v * self.dx;
            cdf.push(acc);
        }
        cdf
    }

    /// Cumulative mass up to `x`, linear within a cell.
    pub fn cdf_at(&self, x: f64) -> f64 {
        let cdf = self.cdf_edges();
        cdf_interp(&cdf, self.edge(0), self.dx, x)
    }

    pub fn mean(&self) -> f64 {
        self.values
            .iter()
            .enumerate()
            .map(|(i, v)| v * self.x(i))
            .sum::<f64>()
            * self.dx
    }

    pub fn peak_index(&self) -> usize {
        self.values
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (i, &v)| {
                if v > best.1 {
                    (i, v)
                } else {
                    best
                }
            })
            .0
    }

    /// Sum of `|p - q| * dx`; both densities must share a grid.
    pub fn l1_distance(&self, other: &ScreenDensity) -> Result<f64> {
        self.check_same_grid(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .sum::<f64>()
            * self.dx)
    }

    pub(crate) fn check_same_grid(&self, other: &ScreenDensity) -> Result<()> {
        let same = self.values.len() == other.values.len()
            && (self.dx - other.dx).abs() <= 1e-12 * self.dx
            && (self.x0 - other.x0).abs() <= 1e-9 * self.dx;
        if same {
            Ok(())
        } else {
            Err(Error::InvalidGrid("densities live on different grids".into()))
        }
    }

    /// Writes `x_m,p_per_m` rows.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let csv_err = |source| Error::Csv {
            path: path.to_path_buf(),
            source,
        };
        let mut writer = csv::Writer::from_path(path).map_err(csv_err)?;
        writer.write_record(["x_m", "p_per_m"]).map_err(csv_err)?;
        for (i, v) in self.values.iter().enumerate() {
            writer
                .write_record([self.x(i).to_string(), v.to_string()])
                .map_err(csv_err)?;
        }
        writer.flush().map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

pub(crate) fn cdf_interp(cdf: &[f64], left: f64, dx: f64, x: f64) -> f64 {
    let n = cdf.len() - 1;
    let pos = (x - left) / dx;
    if pos <= 0.0 {
        return 0.0;
    }
    if pos >= n as f64 {
        return cdf[n];
    }
    let k = pos.floor() as usize;
    let t = pos - k as f64;
    cdf[k] + t * (cdf[k + 1] - cdf[k])
}

/// Scalar field sampled on a uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexField {
    pub x0: f64,
    pub dx: f64,
    pub amplitudes: Vec<Complex64>,
}

impl ComplexField {
    pub fn new(x0: f64, dx: f64, amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.len() < 2 {
            return Err(Error::InvalidGrid("field needs at least 2 points".into()));
        }
        if !(dx.is_finite() && dx > 0.0 && x0.is_finite()) {
            return Err(Error::InvalidGrid("field grid must be finite with dx > 0".into()));
        }
        if amplitudes.iter().any(|a| !(a.re.is_finite() && a.im.is_finite())) {
            return Err(Error::InvalidArgument("field amplitudes must be finite".into()));
        }
        Ok(Self { x0, dx, amplitudes })
    }

    pub fn from_fn(axis: Axis, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let amplitudes = (0..axis.n).map(|i| f(axis.x(i))).collect();
        Self::new(axis.x0, axis.dx, amplitudes)
    }

    pub fn axis(&self) -> Axis {
        Axis {
            x0: self.x0,
            dx: self.dx,
            n: self.amplitudes.len(),
        }
    }

    pub fn intensity(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Integrated intensity, `sum |a|^2 dx`.
    pub fn power(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>() * self.dx
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self {
            amplitudes: self.amplitudes.iter().map(|a| a * factor).collect(),
            ..self.clone()
        }
    }
}

/// Evaluates the left half of an even function on a centered axis and
/// mirrors it, so that the result is symmetric bit for bit.
pub(crate) fn mirrored(n: usize, f: impl Fn(usize) -> f64) -> Vec<f64> {
    let mut values: Vec<f64> = (0..n).map(|i| if i < n.div_ceil(2) { f(i) } else { 0.0 }).collect();
    for i in n.div_ceil(2)..n {
        values[i] = values[n - 1 - i];
    }
    values
}

/// `(sin(pi u) / (pi u))^2`.
pub fn sinc_squared(u: f64) -> f64 {
    if u == 0.0 {
        return 1.0;
    }
    let a = PI * u;
    let s = a.sin() / a;
    s * s
}

/// Far-field single-slit pattern `sinc^2(pi delta0 x / (lambda0 l0))`,
/// truncated to the grid window and renormalized there. Independent of `l`.
pub fn fraunhofer_density(geometry: &ExperimentGeometry, grid: &GridSpec) -> Result<ScreenDensity> {
    let x1 = first_null(geometry)?;
    let axis = grid.screen_axis(x1)?;
    let per_null = grid.points as f64 / (2.0 * grid.window_nulls);
    if per_null < MIN_POINTS_PER_NULL {
        return Err(Error::InvalidGrid(format!(
            "{per_null:.1} points per null spacing; need at least {MIN_POINTS_PER_NULL}"
        )));
    }
    let values = mirrored(axis.n, |i| sinc_squared(axis.x(i) / x1));
    ScreenDensity::on_axis(axis, values)
}

/// Largest input spacing for which the Fresnel phase advances less than
/// pi/2 per sample between the given input and output extents.
pub fn fresnel_max_spacing(lambda0: f64, distance: f64, input: &Axis, output: &Axis) -> f64 {
    lambda0 * distance / (2.0 * (output.max_abs() + input.max_abs()))
}

/// 1D paraxial Fresnel integral by direct summation:
/// `out(x) = e^{-i pi/4} / sqrt(lambda z) * sum in(xi) exp(i pi (x - xi)^2 / (lambda z)) dxi`.
///
/// Power-preserving normalization; `output` can be placed anywhere.
pub fn fresnel_propagate(
    field: &ComplexField,
    distance: f64,
    lambda0: f64,
    output: &Axis,
) -> Result<ComplexField> {
    if !(distance.is_finite() && distance > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "propagation distance must be > 0 (got {distance:e})"
        )));
    }
    if !(lambda0.is_finite() && lambda0 > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "wavelength must be > 0 (got {lambda0:e})"
        )));
    }
    if output.n < 2 || output.dx.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
        return Err(Error::InvalidGrid("output axis needs >= 2 points and dx > 0".into()));
    }
    let input = field.axis();
    let required = fresnel_max_spacing(lambda0, distance, &input, output);
    if field.dx > required {
        return Err(Error::Undersampled {
            required_m: required,
            actual_m: field.dx,
        });
    }

    let lz = lambda0 * distance;
    let k = PI / lz;
    let prefactor = Complex64::from_polar(field.dx / lz.sqrt(), -PI / 4.0);
    let sources: Vec<(f64, Complex64)> = field
        .amplitudes
        .iter()
        .enumerate()
        .filter(|(_, a)| a.norm_sqr() > 0.0)
        .map(|(i, a)| (input.x(i), *a))
        .collect();

    let amplitudes = (0..output.n)
        .into_par_iter()
        .map(|j| {
            let x = output.x(j);
            let sum = sources.iter().fold(Complex64::new(0.0, 0.0), |acc, (xi, a)| {
                let d = x - xi;
                acc + a * Complex64::from_polar(1.0, k * d * d)
            });
            sum * prefactor
        })
        .collect();
    ComplexField::new(output.x0, output.dx, amplitudes)
}

/// Number of samples across each slit for the cascade: enough for the
/// sampling criterion on both legs, and at least `points / 16`.
fn aperture_samples(geometry: &ExperimentGeometry, screen: &Axis, points: usize) -> usize {
    let half = 0.5 * geometry.delta0;
    let leg2 = geometry.lambda0 * geometry.l0 / (2.0 * (screen.max_abs() + half));
    let leg1 = geometry.lambda0 * geometry.l / (2.0 * geometry.delta0);
    let needed = (geometry.delta0 / leg1.min(leg2)).ceil() as usize + 1;
    (points / 16).max(needed).max(64)
}

/// Field through both slits: unit plane wave across slit 1, Fresnel
/// propagation over `l` evaluated only across slit 2 (which applies the
/// slit-2 aperture), then over `l0` to the screen.
pub fn cascade_field(geometry: &ExperimentGeometry, grid: &GridSpec) -> Result<ComplexField> {
    let x1 = first_null(geometry)?;
    let screen = grid.screen_axis(x1)?;
    let m = aperture_samples(geometry, &screen, grid.points);
    let aperture = Axis::centered(0.5 * geometry.delta0, m);
    let slit1 = ComplexField::from_fn(aperture, |_| Complex64::new(1.0, 0.0))?;
    let slit2 = fresnel_propagate(&slit1, geometry.l, geometry.lambda0, &aperture)?;
    fresnel_propagate(&slit2, geometry.l0, geometry.lambda0, &screen)
}

pub fn cascade_density(geometry: &ExperimentGeometry, grid: &GridSpec) -> Result<ScreenDensity> {
    let field = cascade_field(geometry, grid)?;
    let mut values = field.intensity();
    // The pipeline is mirror-symmetric; average away rounding asymmetry.
    let n = values.len();
    for i in 0..n / 2 {
        let avg = 0.5 * (values[i] + values[n - 1 - i]);
        values[i] = avg;
        values[n - 1 - i] = avg;
    }
    ScreenDensity::on_axis(field.axis(), values)
}

/// Inverse-CDF sampling with linear interpolation inside cells. Photon `i`
/// draws from stream `i` of `seed`.
pub fn sample_density(density: &ScreenDensity, n: usize, seed: u64) -> Result<SampleSet> {
    if n == 0 {
        return Err(Error::InvalidArgument("sample count must be >= 1".into()));
    }
    if !density.is_normalized() {
        return Err(Error::Unnormalized {
            integral: density.integral(),
        });
    }
    let sampler = InverseCdf::new(density);
    let key = StreamKey::new(seed);
    let positions = (0..n as u64)
        .into_par_iter()
        .map(|i| sampler.sample(&mut key.rng(i)))
        .collect();
    SampleSet::new(positions, seed)
}

pub(crate) struct InverseCdf {
    cdf: Vec<f64>,
    left: f64,
    dx: f64,
}

impl InverseCdf {
    pub(crate) fn new(density: &ScreenDensity) -> Self {
        Self {
            cdf: density.cdf_edges(),
            left: density.edge(0),
            dx: density.dx(),
        }
    }

    pub(crate) fn invert(&self, u: f64) -> f64 {
        let total = self.cdf[self.cdf.len() - 1];
        let y = u * total;
        let k = self.cdf.partition_point(|&c| c < y);
        if k == 0 {
            return self.left;
        }
        let (lo, hi) = (self.cdf[k - 1], self.cdf[k]);
        let t = (y - lo) / (hi - lo);
        self.left + ((k - 1) as f64 + t) * self.dx
    }

    pub(crate) fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        self.invert(rng.random::<f64>())
    }
}
