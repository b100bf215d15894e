//! Two-class logistic regression over the (mu, sigma) feature pair.
//!
//! The posterior of the disease class is `S(w·φ + b)` with the logistic
//! function `S`. Under the shared-covariance Gaussian model the weights have
//! the closed form `w = Σ⁻¹(μ₁ − μ₂)`, which [`lda_init`] provides; the
//! maximum-likelihood estimate is then found by iteratively reweighted least
//! squares ([`fit`]), i.e. Newton steps on the (optionally ridge-penalized)
//! log-likelihood with step halving so the objective never decreases.
//!
//! Label convention: 1 = disease (positive), 0 = normal.

use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::Path;

use nalgebra::{Matrix2, Matrix3, Vector2, Vector3};
use serde::{Deserialize, Serialize};
use statrs::distribution::ContinuousCDF;

use crate::error::{Error, Result};
use crate::features::{FeatureTable, FeatureVector};

const MODEL_FORMAT_VERSION: u64 = 1;

/// Numerically stable logistic function `1/(1 + exp(−a))`.
pub fn sigmoid(a: f64) -> f64 {
    if a >= 0.0 {
        1.0 / (1.0 + (-a).exp())
    } else {
        let e = a.exp();
        e / (1.0 + e)
    }
}

/// Diagnostics of a completed fit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitInfo {
    pub iterations: usize,
    pub log_likelihood: f64,
    pub converged: bool,
}

impl Default for FitInfo {
    fn default() -> Self {
        Self { iterations: 0, log_likelihood: 0.0, converged: false }
    }
}

/// A fitted (or closed-form initialized) logistic classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct LogisticModel {
    pub intercept: f64,
    pub w_mu: f64,
    pub w_sigma: f64,
    /// Decision cutoff on the disease probability, in (0, 1).
    pub threshold: f64,
    /// Populated by [`fit`]; left at the default by [`lda_init`].
    pub fit_info: FitInfo,
}

impl LogisticModel {
    /// Replace the decision threshold. Panics outside (0, 1).
    pub fn with_threshold(mut self, threshold: f64) -> Self {
        assert!(
            threshold > 0.0 && threshold < 1.0 && threshold.is_finite(),
            "threshold must lie strictly inside (0, 1)"
        );
        self.threshold = threshold;
        self
    }

    /// Disease probability and thresholded decision for a feature pair.
    ///
    /// The decision is 1 exactly when the probability is **at or above** the
    /// threshold; ties go to the positive class. The normal-class
    /// probability is the complement `1 − p`.
    pub fn predict_mu_sigma(&self, mu: f64, sigma: f64) -> (f64, u8) {
        let p = sigmoid(self.intercept + self.w_mu * mu + self.w_sigma * sigma);
        (p, u8::from(p >= self.threshold))
    }

    /// [`LogisticModel::predict_mu_sigma`] on a feature row.
    pub fn predict(&self, phi: &FeatureVector) -> (f64, u8) {
        self.predict_mu_sigma(phi.mu, phi.sigma)
    }

    fn params(&self) -> Vector3<f64> {
        Vector3::new(self.intercept, self.w_mu, self.w_sigma)
    }
}

/// Per-class feature means, pooled covariance, and priors.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassStats {
    /// Disease-class (label 1) feature mean.
    pub mu1: Vector2<f64>,
    /// Normal-class (label 0) feature mean.
    pub mu2: Vector2<f64>,
    /// Pooled within-class covariance (n − 2 divisor).
    pub sigma_pooled: Matrix2<f64>,
    pub prior1: f64,
    pub prior2: f64,
}

impl ClassStats {
    /// Compute class statistics from the labeled rows of a table.
    pub fn from_table(table: &FeatureTable) -> Result<Self> {
        let (pos, neg) = labeled_split(table)?;
        let n1 = pos.len() as f64;
        let n2 = neg.len() as f64;
        let mean = |rows: &[Vector2<f64>]| {
            rows.iter().sum::<Vector2<f64>>() / rows.len() as f64
        };
        let mu1 = mean(&pos);
        let mu2 = mean(&neg);
        let mut scatter = Matrix2::zeros();
        for (rows, mu) in [(&pos, mu1), (&neg, mu2)] {
            for x in rows.iter() {
                let d = x - mu;
                scatter += d * d.transpose();
            }
        }
        let dof = n1 + n2 - 2.0;
        if dof <= 0.0 {
            return Err(Error::TooFewCases {
                reason: "pooled covariance needs more than one case per class".into(),
            });
        }
        Ok(Self {
            mu1,
            mu2,
            sigma_pooled: scatter / dof,
            prior1: n1 / (n1 + n2),
            prior2: n2 / (n1 + n2),
        })
    }

    /// Ratio of the covariance eigenvalues; infinite when singular.
    pub fn condition_number(&self) -> f64 {
        let tr = self.sigma_pooled.trace();
        let det = self.sigma_pooled.determinant();
        let disc = (tr * tr - 4.0 * det).max(0.0).sqrt();
        let lo = (tr - disc) / 2.0;
        let hi = (tr + disc) / 2.0;
        if lo <= 0.0 {
            f64::INFINITY
        } else {
            hi / lo
        }
    }
}

type ClassPoints = (Vec<Vector2<f64>>, Vec<Vector2<f64>>);

fn labeled_split(table: &FeatureTable) -> Result<ClassPoints> {
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for row in &table.rows {
        if !(row.mu.is_finite() && row.sigma.is_finite()) {
            return Err(Error::NonFiniteInput);
        }
        match row.label {
            Some(1) => pos.push(Vector2::new(row.mu, row.sigma)),
            Some(0) => neg.push(Vector2::new(row.mu, row.sigma)),
            _ => {}
        }
    }
    if pos.is_empty() || neg.is_empty() {
        return Err(Error::SingleClassData);
    }
    Ok((pos, neg))
}

/// Closed-form shared-covariance weights: `w = Σ⁻¹(μ₁ − μ₂)` with intercept
/// `−½μ₁ᵀΣ⁻¹μ₁ + ½μ₂ᵀΣ⁻¹μ₂ + ln(ρ₁/ρ₂)`.
///
/// Fails with [`Error::SingularCovariance`] when the pooled covariance's
/// condition number exceeds `max_condition`.
pub fn lda_init(stats: &ClassStats, max_condition: f64) -> Result<LogisticModel> {
    let condition = stats.condition_number();
    if !condition.is_finite() || condition > max_condition {
        return Err(Error::SingularCovariance { condition });
    }
    let inv = stats
        .sigma_pooled
        .try_inverse()
        .ok_or(Error::SingularCovariance { condition })?;
    let w = inv * (stats.mu1 - stats.mu2);
    let intercept = -0.5 * (stats.mu1.transpose() * inv * stats.mu1)[(0, 0)]
        + 0.5 * (stats.mu2.transpose() * inv * stats.mu2)[(0, 0)]
        + (stats.prior1 / stats.prior2).ln();
    Ok(LogisticModel {
        intercept,
        w_mu: w[0],
        w_sigma: w[1],
        threshold: 0.5,
        fit_info: FitInfo::default(),
    })
}

/// Settings for the maximum-likelihood fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitConfig {
    /// Ridge penalty λ on the two feature weights (never the intercept);
    /// 0 is the unpenalized estimator.
    pub ridge_lambda: f64,
    /// Convergence tolerance on the largest absolute coefficient change.
    pub tol: f64,
    pub max_iter: usize,
    /// Condition-number cap above which the LDA initializer is skipped in
    /// favor of zeros.
    pub max_condition: f64,
}

impl Default for FitConfig {
    fn default() -> Self {
        Self { ridge_lambda: 0.0, tol: 1e-8, max_iter: 100, max_condition: 1e12 }
    }
}

fn design(table: &FeatureTable) -> Result<(Vec<Vector3<f64>>, Vec<f64>)> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for row in &table.rows {
        let label = match row.label {
            Some(l) => l,
            None => continue, // unlabeled rows carry no training signal
        };
        if !(row.mu.is_finite() && row.sigma.is_finite()) {
            return Err(Error::NonFiniteInput);
        }
        xs.push(Vector3::new(1.0, row.mu, row.sigma));
        ys.push(label as f64);
    }
    if !ys.contains(&0.0) || !ys.contains(&1.0) {
        return Err(Error::SingleClassData);
    }
    Ok((xs, ys))
}

/// Log-likelihood of the labeled rows minus `λ(w_mu² + w_sigma²)`.
///
/// `params` is (intercept, w_mu, w_sigma). Exposed for diagnostics and for
/// independent optimizer checks.
pub fn penalized_log_likelihood(table: &FeatureTable, params: [f64; 3], lambda: f64) -> Result<f64> {
    let (xs, ys) = design(table)?;
    let beta = Vector3::new(params[0], params[1], params[2]);
    Ok(pll(&xs, &ys, &beta, lambda))
}

/// Analytic gradient of [`penalized_log_likelihood`] at `params`.
pub fn penalized_gradient(table: &FeatureTable, params: [f64; 3], lambda: f64) -> Result<[f64; 3]> {
    let (xs, ys) = design(table)?;
    let beta = Vector3::new(params[0], params[1], params[2]);
    let mut g = Vector3::zeros();
    for (x, &y) in xs.iter().zip(&ys) {
        g += x * (y - sigmoid(x.dot(&beta)));
    }
    g -= 2.0 * lambda * Vector3::new(0.0, beta[1], beta[2]);
    Ok([g[0], g[1], g[2]])
}

fn pll(xs: &[Vector3<f64>], ys: &[f64], beta: &Vector3<f64>, lambda: f64) -> f64 {
    let mut ll = 0.0;
    for (x, &y) in xs.iter().zip(ys) {
        let a = x.dot(beta);
        // y·a − ln(1 + eᵃ), with the softplus in overflow-safe form
        ll += y * a - (a.max(0.0) + (-a.abs()).exp().ln_1p());
    }
    ll - lambda * (beta[1] * beta[1] + beta[2] * beta[2])
}

/// Maximum-likelihood fit by iteratively reweighted least squares.
///
/// Initialized from [`lda_init`] when the pooled covariance is
/// well-conditioned, from zeros otherwise. Each Newton step is halved until
/// the penalized log-likelihood does not decrease, so the objective ascends
/// monotonically. Convergence is declared when the largest absolute
/// coefficient change drops below `config.tol`.
pub fn fit(table: &FeatureTable, config: &FitConfig) -> Result<LogisticModel> {
    fit_traced(table, config).map(|(model, _)| model)
}

/// Like [`fit`] but also returns the penalized log-likelihood after the
/// initial point and after every accepted iteration.
pub fn fit_traced(table: &FeatureTable, config: &FitConfig) -> Result<(LogisticModel, Vec<f64>)> {
    let (xs, ys) = design(table)?;

    let mut beta = match ClassStats::from_table(table)
        .and_then(|s| lda_init(&s, config.max_condition))
    {
        Ok(init) => init.params(),
        Err(_) => Vector3::zeros(),
    };
    let mut current = pll(&xs, &ys, &beta, config.ridge_lambda);
    if !current.is_finite() {
        // an extreme LDA start can saturate the likelihood; zeros never do
        beta = Vector3::zeros();
        current = pll(&xs, &ys, &beta, config.ridge_lambda);
    }
    let mut trace = vec![current];

    let mut iterations = 0;
    let mut converged = false;
    while iterations < config.max_iter {
        iterations += 1;

        let mut grad = Vector3::zeros();
        let mut info = Matrix3::zeros();
        for (x, &y) in xs.iter().zip(&ys) {
            let p = sigmoid(x.dot(&beta));
            grad += x * (y - p);
            info += x * x.transpose() * (p * (1.0 - p));
        }
        let lambda = config.ridge_lambda;
        grad -= 2.0 * lambda * Vector3::new(0.0, beta[1], beta[2]);
        info[(1, 1)] += 2.0 * lambda;
        info[(2, 2)] += 2.0 * lambda;

        let direction = info
            .try_inverse()
            .map(|inv| inv * grad)
            .ok_or(Error::SingularInformation)?;
        if !direction.iter().all(|v| v.is_finite()) {
            return Err(Error::Diverged);
        }

        // step halving: keep the penalized log-likelihood from decreasing
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let cand = beta + direction * step;
            let cand_ll = pll(&xs, &ys, &cand, lambda);
            if cand_ll.is_finite() && cand_ll >= current - 1e-12 {
                accepted = Some((cand, cand_ll, step));
                break;
            }
            step *= 0.5;
        }
        let Some((next, next_ll, step)) = accepted else {
            // no ascent direction left at double precision
            converged = true;
            break;
        };

        let change = (direction * step).amax();
        beta = next;
        current = next_ll;
        trace.push(current);
        if !beta.iter().all(|v| v.is_finite()) {
            return Err(Error::Diverged);
        }
        if change < config.tol {
            converged = true;
            break;
        }
    }

    let log_likelihood = pll(&xs, &ys, &beta, 0.0);
    if !log_likelihood.is_finite() {
        return Err(Error::Diverged);
    }
    let model = LogisticModel {
        intercept: beta[0],
        w_mu: beta[1],
        w_sigma: beta[2],
        threshold: 0.5,
        fit_info: FitInfo { iterations, log_likelihood, converged },
    };
    Ok((model, trace))
}

/// One coefficient's estimate with its Wald interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CiEntry {
    pub estimate: f64,
    pub std_error: f64,
    pub lower: f64,
    pub upper: f64,
}

/// Wald confidence intervals for the three coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoefficientCi {
    pub level: f64,
    pub intercept: CiEntry,
    pub mu: CiEntry,
    pub sigma: CiEntry,
}

/// Wald intervals from the observed information at the fitted parameters.
///
/// Standard errors are `sqrt(diag((XᵀWX)⁻¹))` with `W = diag(p(1−p))`
/// evaluated at the model, and bounds are `estimate ± z·SE` with `z` the
/// standard-normal quantile at `(1 + level)/2`.
pub fn wald_ci(model: &LogisticModel, table: &FeatureTable, level: f64) -> Result<CoefficientCi> {
    assert!(level > 0.0 && level < 1.0, "confidence level must lie in (0, 1)");
    let (xs, _) = design(table)?;
    let beta = model.params();
    let mut info = Matrix3::zeros();
    for x in &xs {
        let p = sigmoid(x.dot(&beta));
        info += x * x.transpose() * (p * (1.0 - p));
    }
    let cov = info.try_inverse().ok_or(Error::SingularInformation)?;
    if (0..3).any(|i| cov[(i, i)] <= 0.0 || !cov[(i, i)].is_finite()) {
        return Err(Error::SingularInformation);
    }

    let normal = statrs::distribution::Normal::new(0.0, 1.0).expect("unit normal");
    let z = normal.inverse_cdf((1.0 + level) / 2.0);
    let entry = |i: usize| {
        let estimate = beta[i];
        let std_error = cov[(i, i)].sqrt();
        CiEntry {
            estimate,
            std_error,
            lower: estimate - z * std_error,
            upper: estimate + z * std_error,
        }
    };
    Ok(CoefficientCi { level, intercept: entry(0), mu: entry(1), sigma: entry(2) })
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    version: u64,
    intercept: f64,
    w_mu: f64,
    w_sigma: f64,
    threshold: f64,
    fit_info: FitInfo,
}

/// Persist the model as JSON. Floats are written as shortest round-trip
/// decimals, so [`load_model`] reproduces them bit-exactly.
pub fn save_model(model: &LogisticModel, path: &Path) -> Result<()> {
    let file = ModelFile {
        version: MODEL_FORMAT_VERSION,
        intercept: model.intercept,
        w_mu: model.w_mu,
        w_sigma: model.w_sigma,
        threshold: model.threshold,
        fit_info: model.fit_info,
    };
    let out = File::create(path)?;
    serde_json::to_writer_pretty(BufWriter::new(out), &file)?;
    Ok(())
}

/// Load a model saved by [`save_model`].
///
/// A missing or foreign `version` field is a [`Error::SchemaMismatch`];
/// unknown extra fields are ignored for forward compatibility.
pub fn load_model(path: &Path) -> Result<LogisticModel> {
    let file = File::open(path)
        .map_err(|source| Error::UnreadableFile { path: path.to_path_buf(), source })?;
    let value: serde_json::Value = serde_json::from_reader(BufReader::new(file))?;
    let version = value
        .get("version")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| Error::SchemaMismatch { reason: "missing version field".into() })?;
    if version != MODEL_FORMAT_VERSION {
        return Err(Error::SchemaMismatch {
            reason: format!("version {version} is not supported (expected {MODEL_FORMAT_VERSION})"),
        });
    }
    let file: ModelFile = serde_json::from_value(value)?;
    Ok(LogisticModel {
        intercept: file.intercept,
        w_mu: file.w_mu,
        w_sigma: file.w_sigma,
        threshold: file.threshold,
        fit_info: file.fit_info,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn row(case_id: usize, label: u8, mu: f64, sigma: f64) -> FeatureVector {
        FeatureVector {
            case_id,
            path: String::new(),
            label: Some(label),
            mu,
            sigma,
            h: 0.02,
        }
    }

    fn desk_table() -> FeatureTable {
        FeatureTable::new(vec![
            row(0, 1, 0.8, 0.3),
            row(1, 1, 0.9, 0.3),
            row(2, 1, 0.7, 0.3),
            row(3, 0, 0.2, 0.3),
            row(4, 0, 0.1, 0.3),
            row(5, 0, 0.3, 0.3),
        ])
    }

    #[test]
    fn sigmoid_fixture_values() {
        assert_eq!(sigmoid(0.0), 0.5);
        // saturates to 1.0 without overflow; 1 − 1e-17 rounds to 1.0 itself
        assert!(sigmoid(40.0) >= 1.0 - 1e-17);
        assert!(sigmoid(40.0) <= 1.0);
        assert!(sigmoid(-745.0) > 0.0); // no underflow to a NaN path
        for a in [-3.7, -0.2, 0.9, 12.5, 700.0] {
            assert_abs_diff_eq!(sigmoid(a) + sigmoid(-a), 1.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn lda_identical_classes_gives_prior_log_odds() {
        let stats = ClassStats {
            mu1: Vector2::new(0.4, 0.3),
            mu2: Vector2::new(0.4, 0.3),
            sigma_pooled: Matrix2::identity(),
            prior1: 0.25,
            prior2: 0.75,
        };
        let model = lda_init(&stats, 1e12).unwrap();
        assert_eq!(model.w_mu, 0.0);
        assert_eq!(model.w_sigma, 0.0);
        assert_abs_diff_eq!(model.intercept, (0.25f64 / 0.75).ln(), epsilon = 1e-15);
    }

    #[test]
    fn lda_identity_covariance_unit_shift() {
        let stats = ClassStats {
            mu1: Vector2::new(1.0, 0.0),
            mu2: Vector2::new(0.0, 0.0),
            sigma_pooled: Matrix2::identity(),
            prior1: 0.5,
            prior2: 0.5,
        };
        let model = lda_init(&stats, 1e12).unwrap();
        assert_abs_diff_eq!(model.w_mu, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(model.w_sigma, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(model.intercept, -0.5, epsilon = 1e-15);
    }

    #[test]
    fn lda_rejects_singular_covariance() {
        let stats = ClassStats {
            mu1: Vector2::new(1.0, 0.0),
            mu2: Vector2::new(0.0, 0.0),
            sigma_pooled: Matrix2::new(1.0, 1.0, 1.0, 1.0),
            prior1: 0.5,
            prior2: 0.5,
        };
        assert!(matches!(
            lda_init(&stats, 1e12),
            Err(Error::SingularCovariance { .. })
        ));
    }

    #[test]
    fn fit_no_signal_goes_to_zero() {
        // labels independent of features, balanced: the optimum is the
        // empty model predicting 1/2 everywhere.
        let table = FeatureTable::new(vec![
            row(0, 1, 0.3, 0.2),
            row(1, 0, 0.3, 0.2),
            row(2, 1, 0.7, 0.4),
            row(3, 0, 0.7, 0.4),
        ]);
        let model = fit(&table, &FitConfig::default()).unwrap();
        assert!(model.fit_info.converged);
        assert_abs_diff_eq!(model.intercept, 0.0, epsilon = 1e-6);
        assert_abs_diff_eq!(model.w_mu, 0.0, epsilon = 1e-6);
        assert_abs_diff_eq!(model.w_sigma, 0.0, epsilon = 1e-6);
        let (p, _) = model.predict_mu_sigma(0.5, 0.3);
        assert_abs_diff_eq!(p, 0.5, epsilon = 1e-6);
    }

    #[test]
    fn fit_single_class_is_rejected() {
        let table = FeatureTable::new(vec![row(0, 1, 0.3, 0.2), row(1, 1, 0.6, 0.4)]);
        assert!(matches!(
            fit(&table, &FitConfig::default()),
            Err(Error::SingleClassData)
        ));
    }

    #[test]
    fn fit_desk_data_with_ridge_converges_and_separates() {
        let table = desk_table();
        let config = FitConfig { ridge_lambda: 1e-6, ..FitConfig::default() };
        let model = fit(&table, &config).unwrap();
        assert!(model.fit_info.converged);
        assert!(model.w_mu > 0.0);
        // sigma is constant, so its weight is pinned to zero by the penalty
        assert!(model.w_sigma.abs() < 1e-3, "w_sigma = {}", model.w_sigma);
        for r in &table.rows {
            let (_, decision) = model.predict(r);
            assert_eq!(decision, r.label.unwrap());
        }
    }

    #[test]
    fn trace_is_monotone() {
        let config = FitConfig { ridge_lambda: 1e-6, ..FitConfig::default() };
        let (_, trace) = fit_traced(&desk_table(), &config).unwrap();
        for pair in trace.windows(2) {
            assert!(pair[1] >= pair[0] - 1e-12, "trace decreased: {pair:?}");
        }
    }

    #[test]
    fn predict_tie_goes_positive() {
        let model = LogisticModel {
            intercept: 0.0,
            w_mu: 0.0,
            w_sigma: 0.0,
            threshold: 0.5,
            fit_info: FitInfo::default(),
        };
        let (p, decision) = model.predict_mu_sigma(0.42, 0.17);
        assert_eq!(p, 0.5);
        assert_eq!(decision, 1);
    }

    #[test]
    fn predict_halfway_point() {
        let model = LogisticModel {
            intercept: 0.0,
            w_mu: 1.0,
            w_sigma: 0.0,
            threshold: 0.5,
            fit_info: FitInfo::default(),
        };
        let (p, _) = model.predict_mu_sigma(0.0, 0.9);
        assert_eq!(p, 0.5);
    }

    #[test]
    fn predict_is_monotone_in_each_feature() {
        let model = LogisticModel {
            intercept: 0.3,
            w_mu: 2.0,
            w_sigma: -3.0,
            threshold: 0.5,
            fit_info: FitInfo::default(),
        };
        let mut last = 0.0;
        for i in 0..20 {
            let (p, _) = model.predict_mu_sigma(i as f64 / 20.0, 0.3);
            assert!(p > last);
            last = p;
        }
        let mut last = 1.0;
        for i in 0..20 {
            let (p, _) = model.predict_mu_sigma(0.5, i as f64 / 20.0);
            assert!(p < last);
            last = p;
        }
    }

    #[test]
    fn wald_level_95_uses_the_standard_quantile() {
        let config = FitConfig { ridge_lambda: 1e-6, ..FitConfig::default() };
        let model = fit(&desk_table(), &config).unwrap();
        let ci = wald_ci(&model, &desk_table(), 0.95).unwrap();
        let z = (ci.mu.upper - ci.mu.lower) / (2.0 * ci.mu.std_error);
        assert_abs_diff_eq!(z, 1.959963984540054, epsilon = 1e-9);
        assert!(ci.mu.lower <= ci.mu.estimate && ci.mu.estimate <= ci.mu.upper);
    }

    #[test]
    fn model_json_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.json");
        let model = LogisticModel {
            intercept: 2.871234567890123,
            w_mu: 24.28012345678901,
            w_sigma: -49.87654321098765,
            threshold: 0.25,
            fit_info: FitInfo { iterations: 9, log_likelihood: -5432.109876543211, converged: true },
        };
        save_model(&model, &path).unwrap();
        let back = load_model(&path).unwrap();
        assert_eq!(back, model);
    }

    #[test]
    fn model_without_version_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("old.json");
        std::fs::write(&path, r#"{"intercept":1.0,"w_mu":2.0,"w_sigma":3.0}"#).unwrap();
        assert!(matches!(load_model(&path), Err(Error::SchemaMismatch { .. })));
    }

    #[test]
    fn model_with_unknown_fields_still_loads() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("future.json");
        std::fs::write(
            &path,
            r#"{"version":1,"intercept":1.0,"w_mu":2.0,"w_sigma":-3.0,"threshold":0.5,
                "fit_info":{"iterations":3,"log_likelihood":-1.5,"converged":true},
                "calibration":"isotonic","notes":[1,2,3]}"#,
        )
        .unwrap();
        let model = load_model(&path).unwrap();
        assert_eq!(model.intercept, 1.0);
        assert_eq!(model.fit_info.iterations, 3);
    }
}
