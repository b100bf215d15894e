//! Statistical screening of chest X-ray images from pixel-intensity
//! densities.
//!
//! The pipeline fits an Epanechnikov kernel density estimate to each image's
//! normalized intensities, reads off the density's mean and standard
//! deviation as a two-element feature vector, and classifies with two-class
//! logistic regression fitted by iteratively reweighted least squares. The
//! [`evaluation`] module supplies the measurement battery: confusion
//! matrices, sensitivity/specificity/likelihood ratios, ROC/AUC,
//! deterministic train/test splits, k-fold cross-validation, and
//! density-mode threshold selection.
//!
//! # Modules
//!
//! - [`imaging`] — image decoding, intensity normalization, manifests
//! - [`kde`] — the Epanechnikov density estimator and bandwidth rule
//! - [`features`] — per-image (mu, sigma) extraction and feature tables
//! - [`classifier`] — logistic regression: LDA-form init, IRLS, Wald CIs
//! - [`evaluation`] — metrics, ROC, splits, cross-validation, thresholds
//!
//! # Example
//!
//! ```
//! use ekde_screen::imaging::GrayImage;
//! use ekde_screen::features::extract;
//!
//! let pixels: Vec<f64> = (0..100).map(|i| i as f64 / 99.0).collect();
//! let image = GrayImage::new(10, 10, pixels);
//! let phi = extract(&image, 1)?;
//! assert!((phi.mu - 0.5).abs() < 1e-12);
//! assert!(phi.sigma > 0.0);
//! # Ok::<(), ekde_screen::Error>(())
//! ```

pub mod classifier;
pub mod error;
pub mod evaluation;
pub mod features;
pub mod imaging;
pub mod kde;

mod guide;

pub use error::{Error, Result};
