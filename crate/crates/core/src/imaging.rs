//! Grayscale image decoding, intensity normalization, and dataset manifests.
//!
//! Pixels are normalized to `[0, 1]` by dividing by the format maximum
//! (255 or 65535). RGB rasters are accepted and reduced with the standard
//! luma weights 0.299/0.587/0.114; the public X-ray corpus contains
//! 3-channel files whose channels are identical, so this is a no-op there.

use std::fs::File;
use std::io::BufRead;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// A decoded image as a row-major matrix of intensities in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GrayImage {
    rows: usize,
    cols: usize,
    pixels: Vec<f64>,
}

impl GrayImage {
    /// Build from parts. Panics if the dimensions are zero, the pixel count
    /// does not equal `rows × cols`, or any intensity falls outside `[0, 1]`;
    /// use [`load_gray_image`] for untrusted input.
    pub fn new(rows: usize, cols: usize, pixels: Vec<f64>) -> Self {
        assert!(rows > 0 && cols > 0, "image dimensions must be positive");
        assert_eq!(pixels.len(), rows * cols, "pixel count must be rows×cols");
        assert!(
            pixels.iter().all(|&p| (0.0..=1.0).contains(&p)),
            "intensities must lie in [0, 1]"
        );
        Self { rows, cols, pixels }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Row-major intensities.
    pub fn pixels(&self) -> &[f64] {
        &self.pixels
    }

    /// Encode as an 8-bit grayscale PNG (intensities scaled back to 0–255,
    /// rounded to nearest). Reloading reproduces each pixel within half a
    /// quantization step, 1/510.
    pub fn save_png(&self, path: &Path) -> Result<()> {
        let buf: Vec<u8> = self
            .pixels
            .iter()
            .map(|&p| (p * 255.0).round() as u8)
            .collect();
        let img = image::GrayImage::from_raw(self.cols as u32, self.rows as u32, buf)
            .expect("buffer length matches dimensions");
        img.save(path).map_err(|e| Error::UnsupportedFormat {
            path: path.to_path_buf(),
            reason: e.to_string(),
        })
    }
}

/// Every `stride`-th pixel in row-major order.
///
/// `stride = 1` returns all `rows × cols` intensities; the result length is
/// `ceil(rows·cols / stride)`. Panics if `stride` is zero.
pub fn flatten(image: &GrayImage, stride: usize) -> Vec<f64> {
    assert!(stride >= 1, "stride must be at least 1");
    image.pixels().iter().step_by(stride).copied().collect()
}

/// Decode an 8/16-bit grayscale or RGB raster and normalize to `[0, 1]`.
pub fn load_gray_image(path: &Path) -> Result<GrayImage> {
    let reader = image::ImageReader::open(path)
        .map_err(|source| Error::UnreadableFile { path: path.to_path_buf(), source })?
        .with_guessed_format()
        .map_err(|source| Error::UnreadableFile { path: path.to_path_buf(), source })?;
    let decoded = reader.decode().map_err(|e| Error::UnsupportedFormat {
        path: path.to_path_buf(),
        reason: e.to_string(),
    })?;

    let (cols, rows) = (decoded.width() as usize, decoded.height() as usize);
    if rows == 0 || cols == 0 {
        return Err(Error::EmptyImage { path: path.to_path_buf() });
    }

    use image::DynamicImage::*;
    let pixels: Vec<f64> = match decoded {
        ImageLuma8(img) => img.into_raw().into_iter().map(|v| v as f64 / 255.0).collect(),
        ImageLumaA8(img) => img.pixels().map(|p| p.0[0] as f64 / 255.0).collect(),
        ImageLuma16(img) => img.into_raw().into_iter().map(|v| v as f64 / 65535.0).collect(),
        ImageLumaA16(img) => img.pixels().map(|p| p.0[0] as f64 / 65535.0).collect(),
        ImageRgb8(img) => img.pixels().map(|p| luma(p.0[0], p.0[1], p.0[2], 255.0)).collect(),
        ImageRgba8(img) => img.pixels().map(|p| luma(p.0[0], p.0[1], p.0[2], 255.0)).collect(),
        ImageRgb16(img) => img.pixels().map(|p| luma(p.0[0], p.0[1], p.0[2], 65535.0)).collect(),
        ImageRgba16(img) => img.pixels().map(|p| luma(p.0[0], p.0[1], p.0[2], 65535.0)).collect(),
        other => {
            return Err(Error::UnsupportedFormat {
                path: path.to_path_buf(),
                reason: format!("{:?} pixels are not an 8/16-bit integer raster", other.color()),
            })
        }
    };

    Ok(GrayImage::new(rows, cols, pixels))
}

fn luma<T: Into<f64>>(r: T, g: T, b: T, max: f64) -> f64 {
    let y = 0.299 * (r.into() / max) + 0.587 * (g.into() / max) + 0.114 * (b.into() / max);
    y.clamp(0.0, 1.0)
}

/// Which side of the train/test split a case was pre-assigned to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitHint {
    Train,
    Test,
}

impl SplitHint {
    pub fn as_str(&self) -> &'static str {
        match self {
            SplitHint::Train => "train",
            SplitHint::Test => "test",
        }
    }
}

/// A single manifest entry: an image path with its binary label
/// (1 = disease, 0 = normal) and an optional split tag.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LabeledCase {
    pub image_path: PathBuf,
    pub label: u8,
    pub split_hint: Option<SplitHint>,
}

/// An ordered list of labeled cases plus the seed used for any reproducible
/// shuffling downstream.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    pub cases: Vec<LabeledCase>,
    pub seed: u64,
}

impl DatasetManifest {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn len(&self) -> usize {
        self.cases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cases.is_empty()
    }
}

/// Parse a manifest CSV with header `path,label[,split]`.
///
/// `label` must be 0 or 1; `split`, when the column is present and a value is
/// given, must be `train` or `test`. Row order is preserved. The seed
/// defaults to 0; callers override it via [`DatasetManifest::with_seed`].
pub fn read_manifest(path: &Path) -> Result<DatasetManifest> {
    let file = File::open(path)
        .map_err(|source| Error::UnreadableFile { path: path.to_path_buf(), source })?;
    read_manifest_from(std::io::BufReader::new(file))
}

/// Manifest parsing over any reader; see [`read_manifest`].
pub fn read_manifest_from<R: BufRead>(reader: R) -> Result<DatasetManifest> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let headers = rdr.headers()?.clone();
    let cols: Vec<&str> = headers.iter().collect();
    let has_split = match cols.as_slice() {
        ["path", "label"] => false,
        ["path", "label", "split"] => true,
        _ => {
            return Err(Error::MalformedRow {
                line: 1,
                reason: format!("header must be `path,label[,split]`, got `{}`", cols.join(",")),
            })
        }
    };

    let mut cases = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        let line = i + 2; // 1-based, after the header
        let record = record?;
        let expected = if has_split { 3 } else { 2 };
        if record.len() != expected {
            return Err(Error::MalformedRow {
                line,
                reason: format!("expected {expected} columns, got {}", record.len()),
            });
        }
        let label = match record.get(1) {
            Some("0") => 0,
            Some("1") => 1,
            other => {
                return Err(Error::MalformedRow {
                    line,
                    reason: format!("label must be 0 or 1, got `{}`", other.unwrap_or("")),
                })
            }
        };
        let split_hint = if has_split {
            match record.get(2) {
                Some("train") => Some(SplitHint::Train),
                Some("test") => Some(SplitHint::Test),
                Some("") | None => None,
                Some(other) => {
                    return Err(Error::MalformedRow {
                        line,
                        reason: format!("split must be train or test, got `{other}`"),
                    })
                }
            }
        } else {
            None
        };
        cases.push(LabeledCase {
            image_path: PathBuf::from(record.get(0).unwrap_or("")),
            label,
            split_hint,
        });
    }

    if cases.is_empty() {
        return Err(Error::EmptyManifest);
    }
    Ok(DatasetManifest { cases, seed: 0 })
}
