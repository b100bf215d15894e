//! Subcommand-driven pipeline: extract-features → train → evaluate, plus
//! predict and cross-validate. Stages communicate through CSV/JSON files,
//! so the slow extraction step is cacheable and every run is replayable.

mod config;
mod svg;

use std::collections::HashMap;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use log::{info, warn};

use config::{CommonArgs, Settings, ThresholdMode};
use ekde_screen::classifier::{
    fit, load_model, save_model, wald_ci, FitConfig, LogisticModel,
};
use ekde_screen::evaluation::{
    cross_validate, density_threshold, evaluate_stage, split_indices, write_prediction_density_csv,
    write_roc_csv, write_scatter_csv, SplitPlan, StageReport,
};
use ekde_screen::features::{
    extract_batch, read_features_csv, write_features_csv, FeatureTable, FeatureVector,
};
use ekde_screen::imaging::{load_gray_image, read_manifest, SplitHint};
use ekde_screen::kde::KdeModel;
use ekde_screen::Error;

#[derive(Parser)]
#[command(
    name = "ekde-screen",
    version,
    about = "Kernel-density image features and logistic screening",
    propagate_version = true
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decode images from a manifest and write the feature table
    ExtractFeatures(ExtractArgs),
    /// Fit the logistic model on a feature table
    Train(TrainArgs),
    /// Score a feature table with a trained model and write all reports
    Evaluate(EvaluateArgs),
    /// Write per-case probabilities and decisions
    Predict(PredictArgs),
    /// K-fold cross-validation over a feature table
    CrossValidate(CrossValidateArgs),
}

#[derive(clap::Args)]
struct ExtractArgs {
    /// Manifest CSV `path,label[,split]`
    #[arg(long)]
    manifest: PathBuf,
    /// Also dump each case's fitted density as CSV under densities/
    #[arg(long)]
    dump_densities: bool,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(clap::Args)]
struct TrainArgs {
    /// Feature table CSV from extract-features
    #[arg(long)]
    features: PathBuf,
    /// Existing split CSV `case_id,stage`; wins over --train-fraction
    #[arg(long)]
    split: Option<PathBuf>,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(clap::Args)]
struct EvaluateArgs {
    /// Feature table CSV
    #[arg(long)]
    features: PathBuf,
    /// Trained model JSON
    #[arg(long)]
    model: PathBuf,
    /// Split CSV `case_id,stage`; when given, reports cover both stages
    #[arg(long)]
    split: Option<PathBuf>,
    /// Additionally render ROC and density plots as SVG
    #[arg(long)]
    svg: bool,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(clap::Args)]
struct PredictArgs {
    /// Feature table CSV
    #[arg(long)]
    features: PathBuf,
    /// Trained model JSON
    #[arg(long)]
    model: PathBuf,
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(clap::Args)]
struct CrossValidateArgs {
    /// Feature table CSV
    #[arg(long)]
    features: PathBuf,
    #[command(flatten)]
    common: CommonArgs,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let common = match &cli.command {
        Command::ExtractFeatures(a) => &a.common,
        Command::Train(a) => &a.common,
        Command::Evaluate(a) => &a.common,
        Command::Predict(a) => &a.common,
        Command::CrossValidate(a) => &a.common,
    };
    let (settings, out_dir, log_level) = match common.resolve() {
        Ok(resolved) => resolved,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(1);
        }
    };
    env_logger::Builder::new()
        .parse_filters(&log_level)
        .format_timestamp(None)
        .init();
    if let Some(threads) = settings.threads {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }

    let result = std::fs::create_dir_all(&out_dir)
        .with_context(|| format!("cannot create output directory {}", out_dir.display()))
        .and_then(|_| match &cli.command {
            Command::ExtractFeatures(a) => cmd_extract(a, &settings, &out_dir),
            Command::Train(a) => cmd_train(a, &settings, &out_dir),
            Command::Evaluate(a) => cmd_evaluate(a, &settings, &out_dir),
            Command::Predict(a) => cmd_predict(a, &out_dir),
            Command::CrossValidate(a) => cmd_cross_validate(a, &settings, &out_dir),
        });

    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let code = match e.downcast_ref::<Error>() {
                Some(Error::AllCasesFailed { .. }) => 2,
                Some(Error::Diverged) => {
                    eprintln!("hint: set --ridge (e.g. --ridge 1e-6) to regularize separable data");
                    3
                }
                Some(Error::SingleClassData) => 3,
                Some(Error::SchemaMismatch { .. }) => 4,
                Some(Error::TooFewCases { .. }) => 5,
                _ => 1,
            };
            ExitCode::from(code)
        }
    }
}

fn fit_config(settings: &Settings) -> FitConfig {
    FitConfig { ridge_lambda: settings.ridge, ..FitConfig::default() }
}

fn write_json<T: serde::Serialize>(value: &T, path: &Path) -> anyhow::Result<()> {
    let file = std::fs::File::create(path)
        .with_context(|| format!("cannot create {}", path.display()))?;
    serde_json::to_writer_pretty(std::io::BufWriter::new(file), value)?;
    Ok(())
}

fn write_split_csv(records: &[(usize, SplitHint)], path: &Path) -> anyhow::Result<()> {
    let mut file = std::fs::File::create(path)?;
    writeln!(file, "case_id,stage")?;
    for (case_id, stage) in records {
        writeln!(file, "{},{}", case_id, stage.as_str())?;
    }
    Ok(())
}

fn read_split_csv(path: &Path) -> anyhow::Result<HashMap<usize, SplitHint>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("cannot read split file {}", path.display()))?;
    let mut out = HashMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if i == 0 {
            anyhow::ensure!(
                line == "case_id,stage",
                "split file header must be `case_id,stage`, got `{line}`"
            );
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let (id, stage) = line
            .split_once(',')
            .with_context(|| format!("split file line {}: expected `case_id,stage`", i + 1))?;
        let case_id: usize = id
            .trim()
            .parse()
            .with_context(|| format!("split file line {}: bad case_id `{id}`", i + 1))?;
        let stage = match stage.trim() {
            "train" => SplitHint::Train,
            "test" => SplitHint::Test,
            other => anyhow::bail!("split file line {}: bad stage `{other}`", i + 1),
        };
        out.insert(case_id, stage);
    }
    anyhow::ensure!(!out.is_empty(), "split file has no assignments");
    Ok(out)
}

fn cmd_extract(args: &ExtractArgs, settings: &Settings, out_dir: &Path) -> anyhow::Result<()> {
    let manifest = read_manifest(&args.manifest)?.with_seed(settings.seed);
    info!("extracting features for {} cases (stride {})", manifest.len(), settings.stride);
    let table = extract_batch(&manifest, settings.stride)?;

    write_features_csv(&table, &out_dir.join("features.csv"))?;

    let mut skip_log = std::fs::File::create(out_dir.join("skipped.csv"))?;
    writeln!(skip_log, "case_id,path,reason")?;
    for skip in &table.skipped {
        warn!("skipped case {} ({}): {}", skip.case_id, skip.path, skip.reason);
        writeln!(skip_log, "{},{},{}", skip.case_id, skip.path, skip.reason.replace(',', ";"))?;
    }

    write_json(&table.per_class_summary(), &out_dir.join("feature_summary.json"))?;

    // manifest split tags become a materialized split file
    let hinted: Vec<(usize, SplitHint)> = manifest
        .cases
        .iter()
        .enumerate()
        .filter_map(|(i, c)| c.split_hint.map(|s| (i, s)))
        .collect();
    if !hinted.is_empty() {
        write_split_csv(&hinted, &out_dir.join("split.csv"))?;
        info!("wrote split.csv from {} manifest split tags", hinted.len());
    }

    if args.dump_densities {
        let dens_dir = out_dir.join("densities");
        std::fs::create_dir_all(&dens_dir)?;
        for row in &table.rows {
            let image = load_gray_image(Path::new(&row.path))?;
            let samples = ekde_screen::imaging::flatten(&image, settings.stride);
            let model = KdeModel::fit(samples)?;
            let mut file =
                std::fs::File::create(dens_dir.join(format!("density_{}.csv", row.case_id)))?;
            writeln!(file, "x,density")?;
            for (x, d) in model.density_grid(0.0, 1.0, settings.grid_points) {
                writeln!(file, "{},{}", x, d)?;
            }
        }
        info!("wrote {} density dumps", table.rows.len());
    }

    info!("extracted {} rows ({} skipped)", table.rows.len(), table.skipped.len());
    Ok(())
}

type SplitRecords = Vec<(usize, SplitHint)>;

/// Rows to train on plus the split records to materialize, if any.
fn training_rows(
    table: &FeatureTable,
    split_file: Option<&PathBuf>,
    settings: &Settings,
) -> anyhow::Result<(FeatureTable, Option<SplitRecords>)> {
    if let Some(path) = split_file {
        let assignment = read_split_csv(path)?;
        let rows: Vec<FeatureVector> = table
            .rows
            .iter()
            .filter(|r| assignment.get(&r.case_id) == Some(&SplitHint::Train))
            .cloned()
            .collect();
        anyhow::ensure!(!rows.is_empty(), "split file assigns no case to train");
        return Ok((FeatureTable::new(rows), None));
    }
    if let Some(fraction) = settings.train_fraction {
        let labels: Vec<u8> = table
            .rows
            .iter()
            .map(|r| r.label.ok_or(Error::SingleClassData))
            .collect::<Result<_, _>>()
            .context("every row needs a label to split")?;
        let plan = SplitPlan {
            seed: settings.seed,
            train_fraction: fraction,
            folds: settings.folds,
            stratified: settings.stratified,
        };
        let (train_idx, test_idx) = split_indices(&labels, &plan)?;
        let records: Vec<(usize, SplitHint)> = train_idx
            .iter()
            .map(|&i| (table.rows[i].case_id, SplitHint::Train))
            .chain(test_idx.iter().map(|&i| (table.rows[i].case_id, SplitHint::Test)))
            .collect();
        let rows: Vec<FeatureVector> =
            train_idx.iter().map(|&i| table.rows[i].clone()).collect();
        return Ok((FeatureTable::new(rows), Some(records)));
    }
    Ok((table.clone(), None))
}

#[derive(serde::Serialize)]
struct FitReport {
    iterations: usize,
    log_likelihood: f64,
    converged: bool,
    threshold: f64,
    threshold_mode: &'static str,
    ridge: f64,
    train_rows: usize,
    total_rows: usize,
}

fn cmd_train(args: &TrainArgs, settings: &Settings, out_dir: &Path) -> anyhow::Result<()> {
    let table = read_features_csv(&args.features)?;
    let (train_table, split_records) =
        training_rows(&table, args.split.as_ref(), settings)?;
    info!("fitting on {} of {} rows", train_table.rows.len(), table.rows.len());

    let model = fit(&train_table, &fit_config(settings))?;
    let threshold = match settings.threshold_mode {
        ThresholdMode::Fixed => settings.threshold,
        ThresholdMode::DensityMode => {
            let positive_probs: Vec<f64> = train_table
                .rows
                .iter()
                .filter(|r| r.label == Some(1))
                .map(|r| model.predict(r).0)
                .collect();
            let t = density_threshold(&positive_probs, settings.grid_points)?;
            // grid endpoints 0 and 1 are not valid thresholds
            t.clamp(1e-6, 1.0 - 1e-6)
        }
    };
    let model = model.with_threshold(threshold);

    save_model(&model, &out_dir.join("model.json"))?;
    let ci = wald_ci(&model, &train_table, settings.ci_level)?;
    write_json(&ci, &out_dir.join("coefficient_ci.json"))?;
    write_json(
        &FitReport {
            iterations: model.fit_info.iterations,
            log_likelihood: model.fit_info.log_likelihood,
            converged: model.fit_info.converged,
            threshold,
            threshold_mode: match settings.threshold_mode {
                ThresholdMode::Fixed => "fixed",
                ThresholdMode::DensityMode => "density-mode",
            },
            ridge: settings.ridge,
            train_rows: train_table.rows.len(),
            total_rows: table.rows.len(),
        },
        &out_dir.join("fit_report.json"),
    )?;
    if let Some(records) = split_records {
        write_split_csv(&records, &out_dir.join("split.csv"))?;
    }
    info!(
        "converged: {} after {} iterations, log-likelihood {:.6}, threshold {}",
        model.fit_info.converged, model.fit_info.iterations, model.fit_info.log_likelihood,
        threshold
    );
    Ok(())
}

fn stage_inputs(model: &LogisticModel, rows: &[&FeatureVector]) -> (Vec<u8>, Vec<f64>) {
    let mut y = Vec::with_capacity(rows.len());
    let mut probs = Vec::with_capacity(rows.len());
    for row in rows {
        y.push(row.label.expect("labeled row"));
        probs.push(model.predict(row).0);
    }
    (y, probs)
}

fn cmd_evaluate(args: &EvaluateArgs, settings: &Settings, out_dir: &Path) -> anyhow::Result<()> {
    let model = load_model(&args.model)?;
    let table = read_features_csv(&args.features)?;

    let labeled: Vec<&FeatureVector> =
        table.rows.iter().filter(|r| r.label.is_some()).collect();
    anyhow::ensure!(!labeled.is_empty(), "no labeled rows to evaluate");

    let stages: Vec<(String, Vec<&FeatureVector>)> = match &args.split {
        Some(path) => {
            let assignment = read_split_csv(path)?;
            let stage_rows = |want: SplitHint| {
                labeled
                    .iter()
                    .filter(|r| assignment.get(&r.case_id) == Some(&want))
                    .copied()
                    .collect::<Vec<_>>()
            };
            vec![
                ("train".to_owned(), stage_rows(SplitHint::Train)),
                ("test".to_owned(), stage_rows(SplitHint::Test)),
            ]
        }
        None => vec![("all".to_owned(), labeled.clone())],
    };

    let mut reports: Vec<StageReport> = Vec::new();
    for (name, rows) in &stages {
        anyhow::ensure!(!rows.is_empty(), "stage `{name}` has no rows");
        let (y, probs) = stage_inputs(&model, rows);
        let (report, curve) = evaluate_stage(name, &y, &probs, model.threshold)?;
        write_roc_csv(&curve, &out_dir.join(format!("roc_{name}.csv")))?;
        write_prediction_density_csv(
            &y,
            &probs,
            settings.grid_points,
            &out_dir.join(format!("prediction_density_{name}.csv")),
        )?;
        if args.svg {
            svg::write_roc_svg(
                &curve,
                &format!("ROC — {name}"),
                &out_dir.join(format!("roc_{name}.svg")),
            )?;
            let mut series = Vec::new();
            for label in [0u8, 1u8] {
                let class: Vec<f64> = y
                    .iter()
                    .zip(&probs)
                    .filter(|&(&yy, _)| yy == label)
                    .map(|(_, &p)| p)
                    .collect();
                if let Ok(kde) = KdeModel::fit(class) {
                    series.push((label, kde.density_grid(0.0, 1.0, settings.grid_points)));
                }
            }
            svg::write_density_svg(
                &series,
                model.threshold,
                &format!("Prediction densities — {name}"),
                &out_dir.join(format!("prediction_density_{name}.svg")),
            )?;
        }
        info!(
            "stage {name}: accuracy {:.4}, auc {:.4}",
            report.metrics.accuracy, report.auc
        );
        reports.push(report);
    }

    write_json(&reports, &out_dir.join("metrics.json"))?;
    write_scatter_csv(&table, &out_dir.join("scatter.csv"))?;
    Ok(())
}

fn cmd_predict(args: &PredictArgs, out_dir: &Path) -> anyhow::Result<()> {
    let model = load_model(&args.model)?;
    let table = read_features_csv(&args.features)?;
    let mut file = std::fs::File::create(out_dir.join("predictions.csv"))?;
    writeln!(file, "case_id,path,label,probability,decision")?;
    for row in &table.rows {
        let (p, decision) = model.predict(row);
        let label = row.label.map(|l| l.to_string()).unwrap_or_default();
        writeln!(file, "{},{},{},{},{}", row.case_id, row.path, label, p, decision)?;
    }
    info!("wrote {} predictions", table.rows.len());
    Ok(())
}

fn cmd_cross_validate(
    args: &CrossValidateArgs,
    settings: &Settings,
    out_dir: &Path,
) -> anyhow::Result<()> {
    let table = read_features_csv(&args.features)?;
    let plan = SplitPlan {
        seed: settings.seed,
        train_fraction: settings.train_fraction.unwrap_or(0.7),
        folds: settings.folds,
        stratified: settings.stratified,
    };
    let report = cross_validate(&table, &plan, &fit_config(settings))?;
    write_json(&report, &out_dir.join("cross_validation.json"))?;
    info!(
        "{}-fold cross-validation: accuracy {:.4} ± {:.4}",
        plan.folds, report.aggregate.accuracy.mean, report.aggregate.accuracy.std
    );
    Ok(())
}
