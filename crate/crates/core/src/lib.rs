//! Computational ghost-imaging simulation with retina-like illumination
//! patterns.
//!
//! The crate covers the full desk-scale pipeline: canonical image and
//! pattern-stack formats, random and retina-like (fovea + log-polar
//! periphery) pattern synthesis, PCA-trained fovea patterns, the
//! single-pixel bucket forward model with optional white Gaussian noise,
//! correlation and TV-regularized compressed-sensing reconstruction, and
//! PSNR/SSIM quality metrics with region restriction.

pub mod error;
pub mod forward;
pub mod image;
pub mod measurement;
pub mod metrics;
pub mod patterns;
pub mod pca;
pub mod recon;
pub mod rng;
pub mod stack;

pub use error::{Error, Result};
pub use forward::{add_wgn, measure, NoiseSpec};
pub use image::{bilinear_resize, load_image, save_pgm, Image, Roi};
pub use measurement::{load_measurements, save_measurements, MeasurementRecord};
pub use metrics::{evaluate, psnr, roi_increment, ssim, QualityReport, Region, SsimParams};
pub use patterns::{
    build_retina_geometry, compose_retina_stack, gen_random_stack, load_geometry, save_geometry,
    RetinaGeometry,
};
pub use pca::{
    covariance, eigendecompose_sorted, extract_positive, gen_pca_stack, load_dataset,
    load_pca_model, quantize_bitplane, save_pca_model, standardize, train_pca, PcaModel,
    TrainingMatrix,
};
pub use recon::{
    gradient, gradient_adjoint, minmax_normalize, reconstruct_correlation, reconstruct_tv,
    save_diagnostics, GradientBoundary, ReconResult, TvConfig,
};
pub use rng::{RngAlgorithm, RngSpec};
pub use stack::{load_pattern_stack, save_pattern_stack, PatternStack};
