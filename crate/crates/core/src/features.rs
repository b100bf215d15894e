//! Per-image feature extraction: the (mean, standard deviation) pair of the
//! fitted Epanechnikov density, plus batch tables with per-class summaries.

use std::fs::File;
use std::io::{BufRead, Write};
use std::path::Path;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::imaging::{flatten, load_gray_image, DatasetManifest, GrayImage};
use crate::kde::KdeModel;

/// The two-element feature vector of one image, with its provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    /// Index of the case in its manifest.
    pub case_id: usize,
    /// Source path, empty when the image was extracted directly.
    pub path: String,
    /// Binary class when known (1 = disease, 0 = normal).
    pub label: Option<u8>,
    /// Mean of the fitted density.
    pub mu: f64,
    /// Standard deviation of the fitted density.
    pub sigma: f64,
    /// Bandwidth the density was fitted with.
    pub h: f64,
}

/// A case dropped during batch extraction, with the reason.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SkippedCase {
    pub case_id: usize,
    pub path: String,
    pub reason: String,
}

/// Mean and sample standard deviation (n − 1) of one summarized quantity.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

/// Summary statistics of one class's feature rows.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ClassSummary {
    pub count: usize,
    pub mu: MeanStd,
    pub sigma: MeanStd,
    pub h: MeanStd,
    /// Exact observed bandwidth range. Reported per class rather than
    /// assumed equal across classes.
    pub h_min: f64,
    pub h_max: f64,
}

/// Per-class summaries for the two labels.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct PerClassSummary {
    /// Label 0.
    pub normal: Option<ClassSummary>,
    /// Label 1.
    pub disease: Option<ClassSummary>,
}

/// Feature rows in manifest order plus the cases that had to be skipped.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTable {
    pub rows: Vec<FeatureVector>,
    pub skipped: Vec<SkippedCase>,
}

impl FeatureTable {
    pub fn new(rows: Vec<FeatureVector>) -> Self {
        Self { rows, skipped: Vec::new() }
    }

    /// True when both labels appear among the rows.
    pub fn has_both_classes(&self) -> bool {
        let mut seen = [false; 2];
        for row in &self.rows {
            if let Some(l) = row.label {
                seen[l as usize] = true;
            }
        }
        seen[0] && seen[1]
    }

    /// Recompute per-class summaries from the rows.
    pub fn per_class_summary(&self) -> PerClassSummary {
        PerClassSummary {
            normal: self.class_summary(0),
            disease: self.class_summary(1),
        }
    }

    fn class_summary(&self, label: u8) -> Option<ClassSummary> {
        let rows: Vec<&FeatureVector> =
            self.rows.iter().filter(|r| r.label == Some(label)).collect();
        if rows.is_empty() {
            return None;
        }
        let pick = |f: fn(&FeatureVector) -> f64| mean_std(rows.iter().map(|r| f(r)));
        let hs = rows.iter().map(|r| r.h);
        Some(ClassSummary {
            count: rows.len(),
            mu: pick(|r| r.mu),
            sigma: pick(|r| r.sigma),
            h: pick(|r| r.h),
            h_min: hs.clone().fold(f64::INFINITY, f64::min),
            h_max: hs.fold(f64::NEG_INFINITY, f64::max),
        })
    }
}

fn mean_std(values: impl Iterator<Item = f64> + Clone) -> MeanStd {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    let std = if n > 1.0 {
        (values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    MeanStd { mean, std }
}

pub(crate) fn mean_std_of(values: &[f64]) -> MeanStd {
    mean_std(values.iter().copied())
}

/// Fit the density to the flattened intensities and read off its moments.
pub fn extract(image: &GrayImage, stride: usize) -> Result<FeatureVector> {
    let samples = flatten(image, stride);
    let (model, diag) = KdeModel::fit_with_diagnostics(samples)?;
    Ok(FeatureVector {
        case_id: 0,
        path: String::new(),
        label: None,
        mu: model.mean(),
        sigma: model.std_dev(),
        h: diag.h,
    })
}

/// Extract features for every decodable, non-degenerate case of a manifest.
///
/// Cases are processed in parallel; output rows keep manifest order. A case
/// that fails to decode or is degenerate is recorded in `skipped` instead of
/// aborting the batch. Errors with [`Error::AllCasesFailed`] when nothing
/// survives.
pub fn extract_batch(manifest: &DatasetManifest, stride: usize) -> Result<FeatureTable> {
    let outcomes: Vec<std::result::Result<FeatureVector, SkippedCase>> = manifest
        .cases
        .par_iter()
        .enumerate()
        .map(|(case_id, case)| {
            let path = case.image_path.to_string_lossy().into_owned();
            load_gray_image(&case.image_path)
                .and_then(|img| extract(&img, stride))
                .map(|mut fv| {
                    fv.case_id = case_id;
                    fv.path = path.clone();
                    fv.label = Some(case.label);
                    fv
                })
                .map_err(|e| SkippedCase { case_id, path, reason: e.to_string() })
        })
        .collect();

    let mut rows = Vec::new();
    let mut skipped = Vec::new();
    for outcome in outcomes {
        match outcome {
            Ok(row) => rows.push(row),
            Err(skip) => skipped.push(skip),
        }
    }
    if rows.is_empty() {
        return Err(Error::AllCasesFailed { count: manifest.len() });
    }
    Ok(FeatureTable { rows, skipped })
}

/// Write a feature table as CSV with header `case_id,path,label,mu,sigma,h`.
///
/// Floats are written as shortest round-trip decimals, so reading the file
/// back reproduces every value bit-exactly.
pub fn write_features_csv(table: &FeatureTable, path: &Path) -> Result<()> {
    let mut file = File::create(path)?;
    writeln!(file, "case_id,path,label,mu,sigma,h")?;
    for row in &table.rows {
        let label = row.label.map(|l| l.to_string()).unwrap_or_default();
        writeln!(
            file,
            "{},{},{},{},{},{}",
            row.case_id, row.path, label, row.mu, row.sigma, row.h
        )?;
    }
    Ok(())
}

/// Read a feature table produced by [`write_features_csv`].
pub fn read_features_csv(path: &Path) -> Result<FeatureTable> {
    let file = File::open(path)
        .map_err(|source| Error::UnreadableFile { path: path.to_path_buf(), source })?;
    read_features_from(std::io::BufReader::new(file))
}

/// Feature-table parsing over any reader; see [`read_features_csv`].
pub fn read_features_from<R: BufRead>(reader: R) -> Result<FeatureTable> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let headers: Vec<String> = rdr.headers()?.iter().map(str::to_owned).collect();
    if headers != ["case_id", "path", "label", "mu", "sigma", "h"] {
        return Err(Error::MalformedRow {
            line: 1,
            reason: format!(
                "header must be `case_id,path,label,mu,sigma,h`, got `{}`",
                headers.join(",")
            ),
        });
    }

    let mut rows = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let line = i + 2;
        let record = record?;
        let field = |idx: usize| record.get(idx).unwrap_or("");
        let bad = |reason: String| Error::MalformedRow { line, reason };

        let case_id: usize = field(0)
            .parse()
            .map_err(|_| bad(format!("case_id `{}` is not an index", field(0))))?;
        let label = match field(2) {
            "" => None,
            "0" => Some(0),
            "1" => Some(1),
            other => return Err(bad(format!("label must be 0, 1, or empty, got `{other}`"))),
        };
        let num = |idx: usize, name: &str| -> Result<f64> {
            field(idx)
                .parse::<f64>()
                .map_err(|_| bad(format!("{name} `{}` is not a number", field(idx))))
        };
        rows.push(FeatureVector {
            case_id,
            path: field(1).to_owned(),
            label,
            mu: num(3, "mu")?,
            sigma: num(4, "sigma")?,
            h: num(5, "h")?,
        });
    }
    if rows.is_empty() {
        return Err(Error::EmptyManifest);
    }
    Ok(FeatureTable::new(rows))
}
