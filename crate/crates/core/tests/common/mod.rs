//! Independent oracles shared by the integration suites. Nothing here calls
//! into the estimator or density code it is used to check.
#![allow(dead_code)]

use std::f64::consts::PI;

/// Adaptive Simpson quadrature.
pub fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    #[allow(clippy::too_many_arguments)]
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
                + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
        }
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 40)
}

pub fn sinc2(u: f64) -> f64 {
    if u == 0.0 {
        1.0
    } else {
        let a = PI * u;
        (a.sin() / a).powi(2)
    }
}

/// Integral of sinc^2(pi u) over [a, b], split at integers so every piece
/// is smooth between nulls.
pub fn sinc2_integral(a: f64, b: f64) -> f64 {
    let mut acc = 0.0;
    let mut lo = a;
    while lo < b {
        let hi = (lo.floor() + 1.0).min(b);
        acc += simpson(&sinc2, lo, hi, 1e-14);
        lo = hi;
    }
    acc
}

/// Minimal 0.7-mass window (in units of the first null) of the sinc^2
/// pattern truncated to [-half, half] and renormalized there: bisection on
/// the half-width for each trial center, minimized over a scan of centers.
pub fn sinc2_min_window(mass: f64, half: f64) -> f64 {
    let total = sinc2_integral(-half, half);
    let mut best = f64::INFINITY;
    for step in 0..=40 {
        let c = step as f64 * 0.0125;
        let (mut lo, mut hi) = (0.0, half);
        for _ in 0..60 {
            let r = 0.5 * (lo + hi);
            let a = (c - r).max(-half);
            let b = (c + r).min(half);
            if sinc2_integral(a, b) / total >= mass {
                hi = r;
            } else {
                lo = r;
            }
        }
        best = best.min(2.0 * hi);
    }
    best
}

/// z with Phi(z) - Phi(-z) = mass, by bisection on erf computed through
/// quadrature of the Gaussian density.
pub fn gaussian_central_z(mass: f64) -> f64 {
    let phi = |x: f64| (-0.5 * x * x).exp() / (2.0 * PI).sqrt();
    let (mut lo, mut hi) = (0.0, 5.0);
    for _ in 0..80 {
        let z = 0.5 * (lo + hi);
        if 2.0 * simpson(&phi, 0.0, z, 1e-15) < mass {
            lo = z;
        } else {
            hi = z;
        }
    }
    0.5 * (lo + hi)
}

/// Brute-force minimal window over all sets of k consecutive sorted points.
pub fn brute_force_window(points: &[f64], mass: f64) -> f64 {
    let mut sorted = points.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let mut best = f64::INFINITY;
    for i in 0..n {
        for j in i..n {
            if (j - i + 1) as f64 >= mass * n as f64 - 1e-9 {
                best = best.min(sorted[j] - sorted[i]);
            }
        }
    }
    best
}

/// Kolmogorov-Smirnov statistic of `samples` against a piecewise-constant
/// density given by cell values on a uniform grid.
pub fn ks_statistic(samples: &[f64], x0: f64, dx: f64, values: &[f64]) -> f64 {
    let mut cdf = vec![0.0];
    let total: f64 = values.iter().sum::<f64>() * dx;
    for v in values {
        let last = *cdf.last().unwrap();
        cdf.push(last + v * dx / total);
    }
    let left = x0 - 0.5 * dx;
    let f = |x: f64| {
        let pos = (x - left) / dx;
        if pos <= 0.0 {
            0.0
        } else if pos >= values.len() as f64 {
            1.0
        } else {
            let k = pos.floor() as usize;
            cdf[k] + (pos - k as f64) * (cdf[k + 1] - cdf[k])
        }
    };
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let fx = f(x);
            (fx - i as f64 / n).max((i + 1) as f64 / n - fx)
        })
        .fold(0.0, f64::max)
}

/// Asymptotic two-sided KS critical value at the 1% level.
pub fn ks_critical_1pct(n: usize) -> f64 {
    1.6276 / (n as f64).sqrt()
}

pub fn rel(a: f64, b: f64) -> f64 {
    ((a - b) / b).abs()
}

pub fn relative_spread(values: &[f64]) -> f64 {
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    (max - min) / min
}
