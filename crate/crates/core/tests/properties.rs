//! Property tests for the invariants each module promises.

mod common;

use common::{pairwise_auc, table_from, trapezoid};
use ekde_screen::classifier::{
    fit, fit_traced, penalized_gradient, penalized_log_likelihood, FitConfig,
};
use ekde_screen::evaluation::{
    fold_assignment, metrics, roc, split_indices, ConfusionMatrix, SplitPlan,
};
use ekde_screen::features::extract;
use ekde_screen::imaging::{flatten, load_gray_image, GrayImage};
use ekde_screen::kde::{linspace, silverman_bandwidth, KdeModel};
use proptest::prelude::*;

fn spread_samples(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    proptest::collection::vec(0.0f64..1.0, 2..max_len)
        .prop_filter("needs nonzero spread", |v| {
            let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            hi - lo > 1e-3
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // f̂ integrates to one over its compact support.
    #[test]
    fn kde_normalizes(samples in spread_samples(120)) {
        let model = KdeModel::fit(samples).unwrap();
        let lo = model.samples()[0] - model.h();
        let hi = model.samples()[model.n() - 1] + model.h();
        let xs = linspace(lo, hi, 20_001);
        let ys = model.pdf_fast(&xs).unwrap();
        let mass = trapezoid(&xs, &ys);
        prop_assert!((mass - 1.0).abs() < 1e-6, "mass = {mass}");
    }

    // the windowed path agrees with the direct sum everywhere
    #[test]
    fn kde_fast_matches_naive(samples in spread_samples(200), gridlen in 2usize..257) {
        let model = KdeModel::fit(samples).unwrap();
        let xs = linspace(-0.2, 1.2, gridlen);
        let fast = model.pdf_fast(&xs).unwrap();
        for (&x, &f) in xs.iter().zip(&fast) {
            prop_assert!((f - model.pdf_naive(x)).abs() < 1e-12);
        }
    }

    #[test]
    fn kde_moment_identities(samples in spread_samples(150)) {
        let model = KdeModel::fit(samples.clone()).unwrap();
        let n = samples.len() as f64;
        let mean = samples.iter().sum::<f64>() / n;
        let pop_var = samples.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        prop_assert!((model.mean() - mean).abs() < 1e-12);
        let expected_var = pop_var + model.h() * model.h() / 5.0;
        prop_assert!((model.std_dev().powi(2) - expected_var).abs() < 1e-12);
    }

    // Eq-style scale equivariance: samples scaled by c scale h by c
    #[test]
    fn bandwidth_is_scale_equivariant(samples in spread_samples(100), c in 0.01f64..100.0) {
        let base = silverman_bandwidth(&samples).unwrap();
        let scaled: Vec<f64> = samples.iter().map(|v| v * c).collect();
        let got = silverman_bandwidth(&scaled).unwrap();
        prop_assert!((got.h - c * base.h).abs() <= 1e-12 * (c * base.h));
    }

    #[test]
    fn kde_nonnegative_and_compactly_supported(samples in spread_samples(100), x in -1.0f64..2.0) {
        let model = KdeModel::fit(samples).unwrap();
        let d = model.pdf_naive(x);
        prop_assert!(d >= 0.0);
        let lo = model.samples()[0] - model.h();
        let hi = model.samples()[model.n() - 1] + model.h();
        if x < lo || x > hi {
            prop_assert_eq!(d, 0.0);
        }
    }

    #[test]
    fn flatten_stride_one_is_a_copy(
        pixels in proptest::collection::vec(0.0f64..=1.0, 1..64),
    ) {
        let img = GrayImage::new(1, pixels.len(), pixels.clone());
        prop_assert_eq!(flatten(&img, 1), pixels);
    }

    // feature scale coupling: intensities scaled by c scale mu, sigma, h by c
    #[test]
    fn features_scale_with_intensity(samples in spread_samples(80), c in 0.05f64..=1.0) {
        let img = GrayImage::new(1, samples.len(), samples.clone());
        let scaled: Vec<f64> = samples.iter().map(|v| v * c).collect();
        let img_scaled = GrayImage::new(1, scaled.len(), scaled);
        let a = extract(&img, 1).unwrap();
        let b = extract(&img_scaled, 1).unwrap();
        prop_assert!((b.mu - c * a.mu).abs() < 1e-12);
        prop_assert!((b.sigma - c * a.sigma).abs() < 1e-12);
        prop_assert!((b.h - c * a.h).abs() < 1e-12);
    }

    // metric identities, checked against direct formula evaluation
    #[test]
    fn metric_identities(tp in 0u64..400, tn in 0u64..400, fp in 0u64..400, fn_ in 0u64..400) {
        prop_assume!(tp + tn + fp + fn_ > 0);
        let cm = ConfusionMatrix::new(tp, tn, fp, fn_);
        let m = metrics(&cm);
        let (tp, tn, fp, fn_) = (tp as f64, tn as f64, fp as f64, fn_ as f64);
        prop_assert_eq!(m.accuracy, (tp + tn) / (tp + tn + fp + fn_));
        let expect = |num: f64, den: f64| if den > 0.0 { Some(num / den) } else { None };
        prop_assert_eq!(m.sensitivity, expect(tp, tp + fn_));
        prop_assert_eq!(m.specificity, expect(tn, tn + fp));
        prop_assert_eq!(m.ppv, expect(tp, tp + fp));
        prop_assert_eq!(m.npv, expect(tn, tn + fn_));
        prop_assert_eq!(m.f1, expect(2.0 * tp, 2.0 * tp + fp + fn_));
        let lr_plus = match (m.sensitivity, m.specificity) {
            (Some(se), Some(sp)) if sp < 1.0 => Some(se / (1.0 - sp)),
            _ => None,
        };
        prop_assert_eq!(m.lr_plus, lr_plus);
        let lr_minus = match (m.sensitivity, m.specificity) {
            (Some(se), Some(sp)) if sp > 0.0 => Some((1.0 - se) / sp),
            _ => None,
        };
        prop_assert_eq!(m.lr_minus, lr_minus);
    }

    // heavy ties: scores drawn from five values only
    #[test]
    fn roc_is_monotone_and_bounded(
        rows in proptest::collection::vec((0u8..2, 0usize..5), 2..60),
    ) {
        let y: Vec<u8> = rows.iter().map(|&(l, _)| l).collect();
        prop_assume!(y.contains(&0) && y.contains(&1));
        let scores: Vec<f64> = rows.iter().map(|&(_, s)| s as f64 / 4.0).collect();
        let curve = roc(&y, &scores).unwrap();
        prop_assert!((0.0..=1.0).contains(&curve.auc));
        for pair in curve.points.windows(2) {
            prop_assert!(pair[1].fpr >= pair[0].fpr);
            prop_assert!(pair[1].tpr >= pair[0].tpr);
            prop_assert!(pair[1].threshold <= pair[0].threshold);
        }
        // label inversion complements the area
        let flipped: Vec<u8> = y.iter().map(|&l| 1 - l).collect();
        let inv = roc(&flipped, &scores).unwrap();
        prop_assert!((curve.auc + inv.auc - 1.0).abs() < 1e-15);
        // and the trapezoidal area is the pairwise statistic exactly
        prop_assert_eq!(curve.auc, pairwise_auc(&y, &scores));
    }

    #[test]
    fn split_partitions_exactly_once(
        labels in proptest::collection::vec(0u8..2, 1..120),
        seed in any::<u64>(),
        fraction in 0.05f64..0.95,
        stratified in any::<bool>(),
    ) {
        let plan = SplitPlan { seed, train_fraction: fraction, folds: 2, stratified };
        let (train, test) = split_indices(&labels, &plan).unwrap();
        let mut seen = vec![0u8; labels.len()];
        for &i in train.iter().chain(&test) {
            seen[i] += 1;
        }
        prop_assert!(seen.iter().all(|&c| c == 1), "not a partition");
        // determinism
        prop_assert_eq!(split_indices(&labels, &plan).unwrap(), (train.clone(), test));
        // stratified: per-class train share within one case of the fraction
        if stratified {
            for class in 0..2u8 {
                let n_c = labels.iter().filter(|&&l| l == class).count();
                if n_c == 0 { continue; }
                let t_c = train.iter().filter(|&&i| labels[i] == class).count();
                prop_assert!(
                    (t_c as f64 - n_c as f64 * fraction).abs() < 1.0 + 1e-9,
                    "class {class}: {t_c} of {n_c} at fraction {fraction}"
                );
            }
        }
    }

    #[test]
    fn folds_partition_cases(
        class_counts in (2usize..20, 2usize..20),
        seed in any::<u64>(),
        folds in 2usize..5,
    ) {
        prop_assume!(class_counts.0 >= folds && class_counts.1 >= folds);
        let mut rows = Vec::new();
        for i in 0..class_counts.0 {
            rows.push((1u8, 0.3 + 0.01 * i as f64, 0.2));
        }
        for i in 0..class_counts.1 {
            rows.push((0u8, 0.5 + 0.01 * i as f64, 0.3));
        }
        let table = table_from(&rows);
        let plan = SplitPlan { seed, train_fraction: 0.7, folds, stratified: true };
        let assignment = fold_assignment(&table, &plan).unwrap();
        // every labeled case appears exactly once
        let mut ids: Vec<usize> = assignment.iter().map(|&(id, _)| id).collect();
        ids.sort_unstable();
        let mut expected: Vec<usize> = (0..rows.len()).collect();
        expected.sort_unstable();
        prop_assert_eq!(ids, expected);
        // stratified fold sizes differ by at most one per class
        for class in 0..2u8 {
            let mut sizes = vec![0usize; folds];
            for &(id, fold) in &assignment {
                if table.rows[id].label == Some(class) {
                    sizes[fold] += 1;
                }
            }
            let (lo, hi) = (sizes.iter().min().unwrap(), sizes.iter().max().unwrap());
            prop_assert!(hi - lo <= 1, "sizes {sizes:?}");
        }
    }

    // analytic gradient against central differences at random points
    #[test]
    fn gradient_matches_finite_differences(
        rows in proptest::collection::vec((0u8..2, 0.0f64..1.0, 0.05f64..0.6), 4..24),
        params in [-3.0f64..3.0, -3.0f64..3.0, -3.0f64..3.0],
        lambda in prop_oneof![Just(0.0), Just(1e-6), Just(1e-2)],
    ) {
        prop_assume!(rows.iter().any(|r| r.0 == 0) && rows.iter().any(|r| r.0 == 1));
        let table = table_from(&rows);
        let params = [params[0], params[1], params[2]];
        let analytic = penalized_gradient(&table, params, lambda).unwrap();
        let numeric = common::fd_gradient(
            |p| penalized_log_likelihood(&table, *p, lambda).unwrap(),
            params,
        );
        for (a, n) in analytic.iter().zip(&numeric) {
            prop_assert!(
                (a - n).abs() <= 1e-6 * a.abs().max(n.abs()).max(1.0),
                "analytic {a} vs numeric {n}"
            );
        }
    }

    // the optimizer's objective never decreases between iterations
    #[test]
    fn irls_ascends_monotonically(
        rows in proptest::collection::vec((0u8..2, 0.0f64..1.0, 0.05f64..0.6), 6..30),
    ) {
        prop_assume!(rows.iter().any(|r| r.0 == 0) && rows.iter().any(|r| r.0 == 1));
        let table = table_from(&rows);
        let config = FitConfig { ridge_lambda: 1e-6, ..FitConfig::default() };
        let (_, trace) = fit_traced(&table, &config).unwrap();
        for pair in trace.windows(2) {
            prop_assert!(pair[1] >= pair[0] - 1e-12, "{} then {}", pair[0], pair[1]);
        }
    }

    // the complement probability is exact in double precision
    #[test]
    fn complement_identity(a in -50.0f64..50.0) {
        let p = ekde_screen::classifier::sigmoid(a);
        prop_assert_eq!(p + (1.0 - p), 1.0);
    }
}

proptest! {
    // files are involved: keep the case count low
    #![proptest_config(ProptestConfig::with_cases(12))]

    // encode to 8-bit, reload, stay within half a quantization step
    #[test]
    fn png_round_trip_within_half_step(
        pixels in proptest::collection::vec(0.0f64..=1.0, 4..48),
        cols in 2usize..5,
    ) {
        prop_assume!(pixels.len() % cols == 0);
        let rows = pixels.len() / cols;
        let img = GrayImage::new(rows, cols, pixels);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rt.png");
        img.save_png(&path).unwrap();
        let back = load_gray_image(&path).unwrap();
        prop_assert_eq!(back.rows(), rows);
        prop_assert_eq!(back.cols(), cols);
        for (&a, &b) in img.pixels().iter().zip(back.pixels()) {
            prop_assert!((a - b).abs() <= 1.0 / 510.0 + 1e-12);
            prop_assert!((0.0..=1.0).contains(&b));
        }
    }
}

// Affine rescaling of a feature column must not move any training decision
// (unpenalized fit on overlapping classes, where the MLE is equivariant).
#[test]
fn decisions_are_affine_invariant() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2024);
    for trial in 0..25 {
        let rows: Vec<(u8, f64, f64)> = (0..24)
            .map(|_| {
                let label = rng.gen_range(0..2u8);
                // overlapping classes keep the MLE finite with λ = 0
                let mu = 0.25 * label as f64 + rng.gen_range(0.0..0.75);
                let sigma = rng.gen_range(0.1..0.5);
                (label, mu, sigma)
            })
            .collect();
        if !rows.iter().any(|r| r.0 == 0) || !rows.iter().any(|r| r.0 == 1) {
            continue;
        }
        let table = table_from(&rows);
        let config = FitConfig::default(); // λ = 0: the equivariant estimator
        let Ok(model) = fit(&table, &config) else { continue };
        if !model.fit_info.converged {
            continue;
        }

        let scale = rng.gen_range(0.1..8.0);
        let shift = rng.gen_range(-1.0..1.0);
        let mut transformed = table.clone();
        for row in &mut transformed.rows {
            row.mu = scale * row.mu + shift;
        }
        let refit = fit(&transformed, &config).unwrap();

        for (orig, trans) in table.rows.iter().zip(&transformed.rows) {
            let (p_a, d_a) = model.predict(orig);
            let (p_b, d_b) = refit.predict(trans);
            // skip knife-edge points where float noise decides the side
            if (p_a - model.threshold).abs() < 1e-9 || (p_b - refit.threshold).abs() < 1e-9 {
                continue;
            }
            assert_eq!(d_a, d_b, "trial {trial}: decision moved under affine rescale");
        }
    }
}

// save→load is the identity on models, across many random coefficient sets
#[test]
fn persistence_round_trip_randomized() {
    use ekde_screen::classifier::{load_model, save_model, FitInfo, LogisticModel};
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
    let dir = tempfile::tempdir().unwrap();
    for i in 0..50 {
        let model = LogisticModel {
            intercept: rng.gen_range(-100.0..100.0),
            w_mu: rng.gen_range(-100.0..100.0) * rng.gen::<f64>(),
            w_sigma: rng.gen_range(-100.0..100.0) / (1.0 + rng.gen::<f64>()),
            threshold: rng.gen_range(0.01..0.99),
            fit_info: FitInfo {
                iterations: rng.gen_range(0..100),
                log_likelihood: -rng.gen_range(0.0..1e4),
                converged: rng.gen(),
            },
        };
        let path = dir.path().join(format!("m{i}.json"));
        save_model(&model, &path).unwrap();
        assert_eq!(load_model(&path).unwrap(), model);
    }
}

// quadrature cross-check of the closed-form moments at tighter tolerance
#[test]
fn moments_match_quadrature() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5150);
    for _ in 0..10 {
        let n = rng.gen_range(10..100);
        let samples: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
        let model = KdeModel::fit(samples).unwrap();
        let lo = model.samples()[0] - model.h();
        let hi = model.samples()[model.n() - 1] + model.h();
        let xs = linspace(lo, hi, 200_001);
        let ys = model.pdf_fast(&xs).unwrap();

        let mean_vals: Vec<f64> = xs.iter().zip(&ys).map(|(&x, &y)| x * y).collect();
        let mean_quad = trapezoid(&xs, &mean_vals);
        assert!(
            (mean_quad - model.mean()).abs() < 1e-8,
            "mean {} vs quadrature {}",
            model.mean(),
            mean_quad
        );

        let mu = model.mean();
        let var_vals: Vec<f64> =
            xs.iter().zip(&ys).map(|(&x, &y)| (x - mu) * (x - mu) * y).collect();
        let var_quad = trapezoid(&xs, &var_vals);
        assert!(
            (var_quad - model.std_dev().powi(2)).abs() < 1e-8,
            "var {} vs quadrature {}",
            model.std_dev().powi(2),
            var_quad
        );
    }
}

// bimodal probability clusters: the mode threshold lands on the heavier one,
// confirmed against a fine-grid naive-evaluation argmax
#[test]
fn density_threshold_picks_heavier_mode() {
    use ekde_screen::evaluation::density_threshold;
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(77);
    let mut probs = Vec::new();
    for _ in 0..120 {
        probs.push(0.2 + rng.gen_range(-0.03..0.03));
    }
    for _ in 0..60 {
        probs.push(0.8 + rng.gen_range(-0.03..0.03));
    }
    let t = density_threshold(&probs, 512).unwrap();
    assert!((t - 0.2).abs() < 0.05, "threshold {t} should sit near the heavier cluster");

    // independent fine-grid oracle over the naive path
    let model = KdeModel::fit(probs).unwrap();
    let fine = linspace(0.0, 1.0, 4096);
    let mut best = (0.0, f64::NEG_INFINITY);
    for &x in &fine {
        let d = model.pdf_naive(x);
        if d > best.1 {
            best = (x, d);
        }
    }
    assert!((t - best.0).abs() <= 2.0 / 511.0, "coarse {t} vs fine {}", best.0);
}
