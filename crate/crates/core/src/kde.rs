//! Epanechnikov kernel density estimation.
//!
//! The estimator is the classical
//!
//! ```text
//! f̂(x) = 1/(n·h) · Σᵢ K((x − xᵢ)/h)
//! ```
//!
//! with the parabolic Epanechnikov kernel `K(u) = 3/4·(1 − u²)` on `|u| < 1`
//! and the Silverman-style bandwidth rule
//! `h = 0.9·min(std, IQR/1.349)/n^(1/5)`.
//!
//! Two evaluation paths are provided: [`KdeModel::pdf_naive`] sums over every
//! sample and serves as the reference, while [`KdeModel::pdf_fast`] exploits
//! the kernel's compact support and locates the contributing window
//! `(x − h, x + h)` by binary search over the sorted samples. Both paths
//! accumulate the window terms in the same ascending order, so they agree to
//! the last bit.
//!
//! Distribution moments have closed forms and never touch a grid: the mean of
//! the estimate equals the sample mean (the kernel is symmetric), and its
//! variance is the population sample variance plus `h²/5`, the variance of
//! the Epanechnikov kernel itself.

use crate::error::{Error, Result};

/// The Epanechnikov kernel: `3/4·(1 − u²)` for `|u| < 1`, zero outside.
pub fn epanechnikov(u: f64) -> f64 {
    if u.abs() < 1.0 {
        0.75 * (1.0 - u * u)
    } else {
        0.0
    }
}

/// Intermediate terms of the bandwidth rule, kept for reporting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandwidthDiagnostics {
    /// Sample standard deviation (n − 1 divisor).
    pub sample_std: f64,
    /// Interquartile range by linear interpolation between order statistics
    /// (the "type 7" scheme).
    pub iqr: f64,
    /// `min(sample_std, iqr/1.349)`.
    pub m: f64,
    /// `0.9 · m / n^(1/5)`.
    pub h: f64,
}

/// Bandwidth by the rule `h = 0.9·min(std, IQR/1.349)/n^(1/5)`.
///
/// Returns [`Error::DegenerateSample`] when every spread measure is zero
/// (all samples equal), since h = 0 would make the density undefined. Fewer
/// than two samples is treated the same way: a single point has no spread.
pub fn silverman_bandwidth(samples: &[f64]) -> Result<BandwidthDiagnostics> {
    if samples.len() < 2 {
        return Err(Error::DegenerateSample);
    }
    if samples.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFiniteInput);
    }
    let n = samples.len() as f64;
    let mean = samples.iter().sum::<f64>() / n;
    let ss = samples.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>();
    let sample_std = (ss / (n - 1.0)).sqrt();

    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let iqr = quantile_type7(&sorted, 0.75) - quantile_type7(&sorted, 0.25);

    let m = sample_std.min(iqr / 1.349);
    if m <= 0.0 {
        return Err(Error::DegenerateSample);
    }
    let h = 0.9 * m / n.powf(0.2);
    Ok(BandwidthDiagnostics { sample_std, iqr, m, h })
}

/// Linear-interpolation quantile between order statistics ("type 7").
///
/// `sorted` must be ascending and non-empty; `p` in [0, 1].
pub fn quantile_type7(sorted: &[f64], p: f64) -> f64 {
    assert!(!sorted.is_empty(), "quantile of empty slice");
    assert!((0.0..=1.0).contains(&p), "quantile level outside [0, 1]");
    let k = (sorted.len() - 1) as f64 * p;
    let lo = k.floor() as usize;
    let frac = k - lo as f64;
    if frac == 0.0 {
        sorted[lo]
    } else {
        sorted[lo] + frac * (sorted[lo + 1] - sorted[lo])
    }
}

/// `n` equally spaced points covering `[lo, hi]` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2, "linspace needs at least two points");
    let step = (hi - lo) / (n - 1) as f64;
    (0..n).map(|i| lo + step * i as f64).collect()
}

/// A fitted Epanechnikov density: sorted samples plus a bandwidth.
#[derive(Debug, Clone, PartialEq)]
pub struct KdeModel {
    samples: Vec<f64>,
    h: f64,
}

impl KdeModel {
    /// Build a model from samples and an explicit bandwidth.
    ///
    /// Samples are sorted internally; they must be finite and non-empty, and
    /// `h` must be positive and finite.
    pub fn new(mut samples: Vec<f64>, h: f64) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::EmptyInput);
        }
        if samples.iter().any(|v| !v.is_finite()) || !h.is_finite() {
            return Err(Error::NonFiniteInput);
        }
        if h <= 0.0 {
            return Err(Error::DegenerateSample);
        }
        samples.sort_by(|a, b| a.partial_cmp(b).unwrap());
        Ok(Self { samples, h })
    }

    /// Fit with the bandwidth rule. Needs at least two distinct samples.
    pub fn fit(samples: Vec<f64>) -> Result<Self> {
        let diag = silverman_bandwidth(&samples)?;
        Self::new(samples, diag.h)
    }

    /// Like [`KdeModel::fit`] but also returns the bandwidth diagnostics.
    pub fn fit_with_diagnostics(samples: Vec<f64>) -> Result<(Self, BandwidthDiagnostics)> {
        let diag = silverman_bandwidth(&samples)?;
        Ok((Self::new(samples, diag.h)?, diag))
    }

    /// The ascending-sorted samples backing the estimate.
    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    /// Sample count.
    pub fn n(&self) -> usize {
        self.samples.len()
    }

    /// Bandwidth.
    pub fn h(&self) -> f64 {
        self.h
    }

    /// Density at `x` by direct summation over every sample.
    ///
    /// This is the reference path: exact, O(n) per query.
    pub fn pdf_naive(&self, x: f64) -> f64 {
        let sum: f64 = self
            .samples
            .iter()
            .map(|&xi| epanechnikov((x - xi) / self.h))
            .sum();
        sum / (self.samples.len() as f64 * self.h)
    }

    /// Densities at every query point of the ascending sequence `xs`.
    ///
    /// Only samples inside `(x − h, x + h)` can contribute; the window is
    /// located by binary search, making the whole batch
    /// O((m + k)·log n) instead of O(m·n) for m queries touching k samples.
    /// Results agree with [`KdeModel::pdf_naive`] bitwise.
    pub fn pdf_fast(&self, xs: &[f64]) -> Result<Vec<f64>> {
        if xs.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::UnsortedQueries);
        }
        let scale = self.samples.len() as f64 * self.h;
        let mut out = Vec::with_capacity(xs.len());
        for &x in xs {
            let lo = self.samples.partition_point(|&s| s <= x - self.h);
            let hi = self.samples.partition_point(|&s| s < x + self.h);
            let sum: f64 = self.samples[lo..hi]
                .iter()
                .map(|&xi| epanechnikov((x - xi) / self.h))
                .sum();
            out.push(sum / scale);
        }
        Ok(out)
    }

    /// Mean of the estimated distribution.
    ///
    /// The kernel is symmetric, so this is exactly the sample mean — closed
    /// form, no grid.
    pub fn mean(&self) -> f64 {
        self.samples.iter().sum::<f64>() / self.samples.len() as f64
    }

    /// Standard deviation of the estimated distribution:
    /// `sqrt(population sample variance + h²/5)`.
    ///
    /// The `h²/5` term is the Epanechnikov kernel's own variance
    /// (`∫u²K(u)du = 1/5`) smearing each sample point.
    pub fn std_dev(&self) -> f64 {
        let n = self.samples.len() as f64;
        let mean = self.mean();
        let pop_var = self.samples.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        (pop_var + self.h * self.h / 5.0).sqrt()
    }

    /// Density sampled on `points` equally spaced grid nodes over `[lo, hi]`,
    /// as `(x, density)` pairs. Intended for plots and density dumps.
    pub fn density_grid(&self, lo: f64, hi: f64, points: usize) -> Vec<(f64, f64)> {
        let xs = linspace(lo, hi, points);
        let ys = self.pdf_fast(&xs).expect("linspace is sorted");
        xs.into_iter().zip(ys).collect()
    }
}
