//! Measurement machinery: confusion matrices, scalar diagnostics,
//! likelihood ratios, ROC/AUC, deterministic train/test splitting, k-fold
//! cross-validation, probability confidence bounds, and density-mode
//! threshold selection.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classifier::{fit, FitConfig};
use crate::error::{Error, Result};
use crate::features::{FeatureTable, MeanStd};
use crate::imaging::DatasetManifest;
use crate::kde::{quantile_type7, KdeModel};

/// 2×2 contingency counts with label 1 as the positive class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConfusionMatrix {
    #[serde(rename = "tp")]
    pub true_positives: u64,
    #[serde(rename = "tn")]
    pub true_negatives: u64,
    #[serde(rename = "fp")]
    pub false_positives: u64,
    #[serde(rename = "fn")]
    pub false_negatives: u64,
}

impl ConfusionMatrix {
    pub fn new(
        true_positives: u64,
        true_negatives: u64,
        false_positives: u64,
        false_negatives: u64,
    ) -> Self {
        Self { true_positives, true_negatives, false_positives, false_negatives }
    }

    pub fn total(&self) -> u64 {
        self.true_positives + self.true_negatives + self.false_positives + self.false_negatives
    }
}

/// Count agreements and disagreements between true and predicted labels.
pub fn confusion(y_true: &[u8], y_pred: &[u8]) -> Result<ConfusionMatrix> {
    if y_true.len() != y_pred.len() {
        return Err(Error::LengthMismatch { left: y_true.len(), right: y_pred.len() });
    }
    if y_true.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut cm = ConfusionMatrix::new(0, 0, 0, 0);
    for (&t, &p) in y_true.iter().zip(y_pred) {
        match (t, p) {
            (1, 1) => cm.true_positives += 1,
            (0, 0) => cm.true_negatives += 1,
            (0, 1) => cm.false_positives += 1,
            (1, 0) => cm.false_negatives += 1,
            _ => panic!("labels must be 0 or 1"),
        }
    }
    Ok(cm)
}

/// Scalar diagnostics of a confusion matrix.
///
/// A field whose denominator is zero is `None` ("undefined"), never 0 — and
/// it serializes as JSON `null`. `f1` is the positive-class score; the
/// paper-reported F1 does not match any standard definition of its own
/// matrix, so the macro average over both classes is reported alongside.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub accuracy: f64,
    pub sensitivity: Option<f64>,
    pub specificity: Option<f64>,
    pub f1: Option<f64>,
    pub f1_macro: Option<f64>,
    pub ppv: Option<f64>,
    pub npv: Option<f64>,
    pub lr_plus: Option<f64>,
    pub lr_minus: Option<f64>,
}

/// Evaluate every metric of the report. Panics on an all-zero matrix.
pub fn metrics(cm: &ConfusionMatrix) -> MetricsReport {
    assert!(cm.total() > 0, "metrics need at least one counted case");
    let (tp, tn) = (cm.true_positives as f64, cm.true_negatives as f64);
    let (fp, fn_) = (cm.false_positives as f64, cm.false_negatives as f64);

    let ratio = |num: f64, den: f64| if den > 0.0 { Some(num / den) } else { None };
    let sensitivity = ratio(tp, tp + fn_);
    let specificity = ratio(tn, tn + fp);
    let ppv = ratio(tp, tp + fp);
    let npv = ratio(tn, tn + fn_);
    let f1 = ratio(2.0 * tp, 2.0 * tp + fp + fn_);
    let f1_neg = ratio(2.0 * tn, 2.0 * tn + fn_ + fp);
    let f1_macro = match (f1, f1_neg) {
        (Some(a), Some(b)) => Some((a + b) / 2.0),
        _ => None,
    };
    let lr_plus = match specificity {
        Some(s) if s < 1.0 => sensitivity.map(|se| se / (1.0 - s)),
        _ => None,
    };
    let lr_minus = match (sensitivity, specificity) {
        (Some(se), Some(sp)) if sp > 0.0 => Some((1.0 - se) / sp),
        _ => None,
    };

    MetricsReport {
        accuracy: (tp + tn) / cm.total() as f64,
        sensitivity,
        specificity,
        f1,
        f1_macro,
        ppv,
        npv,
        lr_plus,
        lr_minus,
    }
}

/// One operating point of a ROC curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RocPoint {
    pub threshold: f64,
    pub fpr: f64,
    pub tpr: f64,
}

/// ROC operating points (threshold descending) and the area under them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RocCurve {
    pub points: Vec<RocPoint>,
    pub auc: f64,
}

/// ROC curve over the distinct score values plus `±∞` sentinels.
///
/// Tied scores move their counts atomically. The AUC is the trapezoidal
/// area, accumulated in integer arithmetic so it equals the Mann-Whitney
/// pair statistic (ties counted ½) exactly.
pub fn roc(y_true: &[u8], scores: &[f64]) -> Result<RocCurve> {
    if y_true.len() != scores.len() {
        return Err(Error::LengthMismatch { left: y_true.len(), right: scores.len() });
    }
    if y_true.is_empty() {
        return Err(Error::EmptyInput);
    }
    if scores.iter().any(|s| s.is_nan()) {
        return Err(Error::NonFiniteInput);
    }
    let positives = y_true.iter().filter(|&&y| y == 1).count() as u64;
    let negatives = y_true.len() as u64 - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::SingleClassData);
    }

    let mut pairs: Vec<(f64, u8)> = scores.iter().copied().zip(y_true.iter().copied()).collect();
    pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());

    let mut points = vec![RocPoint { threshold: f64::INFINITY, fpr: 0.0, tpr: 0.0 }];
    let (mut tp, mut fp) = (0u64, 0u64);
    let mut area_twice = 0u64; // Σ Δfp·(tp before + tp after), an integer
    let mut i = 0;
    while i < pairs.len() {
        let s = pairs[i].0;
        let (mut dtp, mut dfp) = (0u64, 0u64);
        while i < pairs.len() && pairs[i].0 == s {
            if pairs[i].1 == 1 {
                dtp += 1;
            } else {
                dfp += 1;
            }
            i += 1;
        }
        area_twice += dfp * (2 * tp + dtp);
        tp += dtp;
        fp += dfp;
        points.push(RocPoint {
            threshold: s,
            fpr: fp as f64 / negatives as f64,
            tpr: tp as f64 / positives as f64,
        });
    }
    points.push(RocPoint { threshold: f64::NEG_INFINITY, fpr: 1.0, tpr: 1.0 });

    Ok(RocCurve { points, auc: area_twice as f64 / (2 * positives * negatives) as f64 })
}

/// How to partition cases into train/test and cross-validation folds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitPlan {
    pub seed: u64,
    /// Train share in (0, 1).
    pub train_fraction: f64,
    pub folds: usize,
    pub stratified: bool,
}

impl Default for SplitPlan {
    fn default() -> Self {
        Self { seed: 0, train_fraction: 0.70, folds: 10, stratified: true }
    }
}

fn floor_share(count: usize, fraction: f64) -> usize {
    // tiny nudge so that e.g. 10 × 0.7 lands on 7, not 6
    ((count as f64) * fraction + 1e-9).floor() as usize
}

/// Deterministic train/test split of manifest indices.
///
/// The partition is a pure function of the case labels and the plan. When
/// stratified, each class contributes its own share of the train fraction,
/// rounded by largest remainder so per-class fractions stay within one case
/// of the target. Returned index lists are ascending.
pub fn split(manifest: &DatasetManifest, plan: &SplitPlan) -> Result<(Vec<usize>, Vec<usize>)> {
    assert!(
        plan.train_fraction > 0.0 && plan.train_fraction < 1.0,
        "train_fraction must lie strictly inside (0, 1)"
    );
    if manifest.is_empty() {
        return Err(Error::EmptyManifest);
    }
    let labels: Vec<u8> = manifest.cases.iter().map(|c| c.label).collect();
    split_indices(&labels, plan)
}

/// [`split`] over a bare label sequence (index i = case i).
pub fn split_indices(labels: &[u8], plan: &SplitPlan) -> Result<(Vec<usize>, Vec<usize>)> {
    if labels.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    let n = labels.len();
    let target_total = floor_share(n, plan.train_fraction);

    let mut train: Vec<usize>;
    if plan.stratified {
        let mut groups: [Vec<usize>; 2] = [Vec::new(), Vec::new()];
        for (i, &label) in labels.iter().enumerate() {
            groups[label as usize].push(i);
        }
        // per-class share by largest remainder, deterministic tie-breaking
        let shares: Vec<f64> =
            groups.iter().map(|g| g.len() as f64 * plan.train_fraction).collect();
        let mut takes: Vec<usize> = groups
            .iter()
            .map(|g| floor_share(g.len(), plan.train_fraction))
            .collect();
        let mut remaining = target_total.saturating_sub(takes.iter().sum::<usize>());
        let mut order: Vec<usize> = (0..groups.len()).filter(|&k| !groups[k].is_empty()).collect();
        order.sort_by(|&a, &b| {
            let fa = shares[a] - takes[a] as f64;
            let fb = shares[b] - takes[b] as f64;
            fb.partial_cmp(&fa)
                .unwrap()
                .then(groups[b].len().cmp(&groups[a].len()))
                .then(a.cmp(&b))
        });
        for &k in order.iter().cycle().take(order.len() * 2) {
            if remaining == 0 {
                break;
            }
            if takes[k] < groups[k].len() {
                takes[k] += 1;
                remaining -= 1;
            }
        }
        train = Vec::with_capacity(target_total);
        for (group, &take) in groups.iter_mut().zip(&takes) {
            group.shuffle(&mut rng);
            train.extend_from_slice(&group[..take.min(group.len())]);
        }
    } else {
        let mut indices: Vec<usize> = (0..n).collect();
        indices.shuffle(&mut rng);
        train = indices[..target_total].to_vec();
    }

    train.sort_unstable();
    let in_train: Vec<bool> = {
        let mut mask = vec![false; n];
        for &i in &train {
            mask[i] = true;
        }
        mask
    };
    let test: Vec<usize> = (0..n).filter(|&i| !in_train[i]).collect();
    Ok((train, test))
}

/// Aggregate of one metric over cross-validation folds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FoldStat {
    pub mean: f64,
    pub std: f64,
    /// Folds where the metric was defined.
    pub defined_folds: usize,
}

/// Unweighted mean ± sample standard deviation of each metric over folds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CvAggregate {
    pub accuracy: FoldStat,
    pub sensitivity: Option<FoldStat>,
    pub specificity: Option<FoldStat>,
    pub f1: Option<FoldStat>,
    pub f1_macro: Option<FoldStat>,
    pub ppv: Option<FoldStat>,
    pub npv: Option<FoldStat>,
    pub lr_plus: Option<FoldStat>,
    pub lr_minus: Option<FoldStat>,
}

/// Per-fold reports plus their aggregate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CvReport {
    pub folds: Vec<MetricsReport>,
    pub aggregate: CvAggregate,
}

/// Fold assignment keyed by `case_id`, not by row position.
///
/// Case ids are canonicalized (sorted) before the seeded shuffle, so any
/// permutation of the table rows yields identical fold membership. Exposed
/// so fold membership can be audited and dumped.
pub fn fold_assignment(table: &FeatureTable, plan: &SplitPlan) -> Result<Vec<(usize, usize)>> {
    let mut labeled: Vec<(usize, u8)> = table
        .rows
        .iter()
        .filter_map(|r| r.label.map(|l| (r.case_id, l)))
        .collect();
    labeled.sort_unstable();

    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    let mut assignment = Vec::with_capacity(labeled.len());
    if plan.stratified {
        for class in 0..2u8 {
            let mut ids: Vec<usize> =
                labeled.iter().filter(|&&(_, l)| l == class).map(|&(id, _)| id).collect();
            if ids.len() < plan.folds {
                return Err(Error::TooFewCases {
                    reason: format!(
                        "class {class} has {} cases for {} folds",
                        ids.len(),
                        plan.folds
                    ),
                });
            }
            ids.shuffle(&mut rng);
            assignment.extend(ids.into_iter().enumerate().map(|(j, id)| (id, j % plan.folds)));
        }
    } else {
        let mut ids: Vec<usize> = labeled.iter().map(|&(id, _)| id).collect();
        ids.shuffle(&mut rng);
        assignment.extend(ids.into_iter().enumerate().map(|(j, id)| (id, j % plan.folds)));
    }
    Ok(assignment)
}

/// K-fold cross-validation: fit on k−1 folds, score the held-out fold.
///
/// Folds run in parallel; reports come back in fold order. Errors with
/// [`Error::TooFewCases`] when a class cannot reach every fold or a
/// training fold would see a single class.
pub fn cross_validate(
    table: &FeatureTable,
    plan: &SplitPlan,
    config: &FitConfig,
) -> Result<CvReport> {
    assert!(plan.folds >= 2, "cross-validation needs at least 2 folds");
    let assignment: std::collections::HashMap<usize, usize> =
        fold_assignment(table, plan)?.into_iter().collect();
    let fold_of = |case_id: usize| assignment.get(&case_id).copied();

    let reports: Vec<Result<MetricsReport>> = (0..plan.folds)
        .into_par_iter()
        .map(|k| {
            let mut train_rows = Vec::new();
            let mut val_rows = Vec::new();
            for row in &table.rows {
                match fold_of(row.case_id) {
                    Some(f) if f == k => val_rows.push(row.clone()),
                    Some(_) => train_rows.push(row.clone()),
                    None => {}
                }
            }
            if val_rows.is_empty() {
                return Err(Error::TooFewCases { reason: format!("fold {k} is empty") });
            }
            let train_table = FeatureTable::new(train_rows);
            if !train_table.has_both_classes() {
                return Err(Error::TooFewCases {
                    reason: format!("training data of fold {k} has a single class"),
                });
            }
            let model = fit(&train_table, config)?;
            let mut y_true = Vec::with_capacity(val_rows.len());
            let mut y_pred = Vec::with_capacity(val_rows.len());
            for row in &val_rows {
                y_true.push(row.label.unwrap());
                y_pred.push(model.predict(row).1);
            }
            Ok(metrics(&confusion(&y_true, &y_pred)?))
        })
        .collect();

    let folds: Vec<MetricsReport> = reports.into_iter().collect::<Result<_>>()?;
    let aggregate = aggregate_folds(&folds);
    Ok(CvReport { folds, aggregate })
}

fn aggregate_folds(folds: &[MetricsReport]) -> CvAggregate {
    let stat = |values: Vec<f64>| -> Option<FoldStat> {
        if values.is_empty() {
            return None;
        }
        let MeanStd { mean, std } = crate::features::mean_std_of(&values);
        Some(FoldStat { mean, std, defined_folds: values.len() })
    };
    let collect = |get: fn(&MetricsReport) -> Option<f64>| {
        stat(folds.iter().filter_map(get).collect())
    };
    CvAggregate {
        accuracy: stat(folds.iter().map(|f| f.accuracy).collect())
            .expect("at least one fold"),
        sensitivity: collect(|f| f.sensitivity),
        specificity: collect(|f| f.specificity),
        f1: collect(|f| f.f1),
        f1_macro: collect(|f| f.f1_macro),
        ppv: collect(|f| f.ppv),
        npv: collect(|f| f.npv),
        lr_plus: collect(|f| f.lr_plus),
        lr_minus: collect(|f| f.lr_minus),
    }
}

/// How probability bounds were computed. One method exists today; the tag
/// keeps the JSON output unambiguous about it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundsMethod {
    EmpiricalQuantile,
}

/// Empirical central bounds of the predicted disease probabilities, per
/// true class.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProbabilityBounds {
    pub method: BoundsMethod,
    pub level: f64,
    /// (lower, upper) quantiles among truly positive cases.
    pub positive: (f64, f64),
    /// (lower, upper) quantiles among truly negative cases.
    pub negative: (f64, f64),
}

/// Per-class empirical ((1−level)/2, (1+level)/2) quantiles of the
/// predicted positive-class probabilities (type-7 interpolation).
pub fn probability_bounds(y_true: &[u8], probs: &[f64], level: f64) -> Result<ProbabilityBounds> {
    assert!(level > 0.0 && level < 1.0, "level must lie in (0, 1)");
    if y_true.len() != probs.len() {
        return Err(Error::LengthMismatch { left: y_true.len(), right: probs.len() });
    }
    let mut by_class: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
    for (&y, &p) in y_true.iter().zip(probs) {
        by_class[y as usize].push(p);
    }
    if by_class[0].is_empty() || by_class[1].is_empty() {
        return Err(Error::SingleClassData);
    }
    let bounds = |values: &mut Vec<f64>| {
        values.sort_by(|a, b| a.partial_cmp(b).unwrap());
        (
            quantile_type7(values, (1.0 - level) / 2.0),
            quantile_type7(values, (1.0 + level) / 2.0),
        )
    };
    let negative = bounds(&mut by_class[0]);
    let positive = bounds(&mut by_class[1]);
    Ok(ProbabilityBounds { method: BoundsMethod::EmpiricalQuantile, level, positive, negative })
}

/// Decision threshold at the mode of the positive class's predicted-
/// probability density.
///
/// Fits the Epanechnikov estimate to the probabilities and returns the
/// argmax over `grid_points` equally spaced nodes on [0, 1] (first node
/// wins ties).
pub fn density_threshold(probs_positive_class: &[f64], grid_points: usize) -> Result<f64> {
    let model = KdeModel::fit(probs_positive_class.to_vec())?;
    let grid = model.density_grid(0.0, 1.0, grid_points);
    let (mut best_x, mut best_d) = (grid[0].0, grid[0].1);
    for &(x, d) in &grid[1..] {
        if d > best_d {
            best_x = x;
            best_d = d;
        }
    }
    Ok(best_x)
}

/// One evaluation stage bundled for the metrics JSON artifact.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageReport {
    pub stage: String,
    pub confusion: ConfusionMatrix,
    pub metrics: MetricsReport,
    pub auc: f64,
    pub probability_bounds: ProbabilityBounds,
}

/// Score one stage: confusion and metrics at `threshold`, ROC/AUC over the
/// raw probabilities, and 95% empirical probability bounds.
pub fn evaluate_stage(
    stage: &str,
    y_true: &[u8],
    probs: &[f64],
    threshold: f64,
) -> Result<(StageReport, RocCurve)> {
    let y_pred: Vec<u8> = probs.iter().map(|&p| u8::from(p >= threshold)).collect();
    let cm = confusion(y_true, &y_pred)?;
    let curve = roc(y_true, probs)?;
    let bounds = probability_bounds(y_true, probs, 0.95)?;
    let report = StageReport {
        stage: stage.to_owned(),
        confusion: cm,
        metrics: metrics(&cm),
        auc: curve.auc,
        probability_bounds: bounds,
    };
    Ok((report, curve))
}

/// Write a ROC curve as CSV `threshold,fpr,tpr`.
pub fn write_roc_csv(curve: &RocCurve, path: &Path) -> Result<()> {
    let mut file = File::create(path)?;
    writeln!(file, "threshold,fpr,tpr")?;
    for p in &curve.points {
        writeln!(file, "{},{},{}", p.threshold, p.fpr, p.tpr)?;
    }
    Ok(())
}

/// Write per-class densities of predicted probabilities as CSV
/// `p,density,label` over `grid_points` nodes on [0, 1].
///
/// A class whose probabilities are degenerate (fewer than two distinct
/// values) is omitted; at least one class must be fittable.
pub fn write_prediction_density_csv(
    y_true: &[u8],
    probs: &[f64],
    grid_points: usize,
    path: &Path,
) -> Result<()> {
    if y_true.len() != probs.len() {
        return Err(Error::LengthMismatch { left: y_true.len(), right: probs.len() });
    }
    let mut file = File::create(path)?;
    writeln!(file, "p,density,label")?;
    let mut wrote = false;
    for label in [0u8, 1u8] {
        let class: Vec<f64> = y_true
            .iter()
            .zip(probs)
            .filter(|&(&y, _)| y == label)
            .map(|(_, &p)| p)
            .collect();
        if class.len() < 2 {
            continue;
        }
        match KdeModel::fit(class) {
            Ok(model) => {
                for (x, d) in model.density_grid(0.0, 1.0, grid_points) {
                    writeln!(file, "{},{},{}", x, d, label)?;
                }
                wrote = true;
            }
            Err(Error::DegenerateSample) => continue,
            Err(e) => return Err(e),
        }
    }
    if !wrote {
        return Err(Error::DegenerateSample);
    }
    Ok(())
}

/// Write the feature scatter as CSV `mu,sigma,label` (unlabeled rows get an
/// empty label field).
pub fn write_scatter_csv(table: &FeatureTable, path: &Path) -> Result<()> {
    let mut file = File::create(path)?;
    writeln!(file, "mu,sigma,label")?;
    for row in &table.rows {
        let label = row.label.map(|l| l.to_string()).unwrap_or_default();
        writeln!(file, "{},{},{}", row.mu, row.sigma, label)?;
    }
    Ok(())
}
