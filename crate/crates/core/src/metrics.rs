//! PSNR and SSIM image-quality metrics over the full frame or a rectangular
//! region, plus the fovea-improvement increments used to compare pattern
//! designs.
//!
//! PSNR works on the 8-bit scale (images multiplied by 255, peak 255); SSIM
//! is a single global statistic over the evaluated region on the unit scale
//! with luminance range L = 1. There is no sliding window.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::{Image, Roi};

/// Region a metric was evaluated over.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Region {
    Full,
    Roi(Roi),
}

/// SSIM stability constants: `c1 = (k1 L)^2`, `c2 = (k2 L)^2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SsimParams {
    pub k1: f64,
    pub k2: f64,
    pub luminance_range: f64,
}

impl Default for SsimParams {
    fn default() -> Self {
        SsimParams {
            k1: 0.01,
            k2: 0.03,
            luminance_range: 1.0,
        }
    }
}

impl SsimParams {
    pub fn c1(&self) -> f64 {
        (self.k1 * self.luminance_range).powi(2)
    }

    pub fn c2(&self) -> f64 {
        (self.k2 * self.luminance_range).powi(2)
    }
}

/// Quality metrics of one reconstruction over one region.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QualityReport {
    /// `+inf` when the images agree exactly over the region.
    pub psnr_db: f64,
    pub mse: f64,
    pub ssim: f64,
    pub region: Region,
}

fn check_dims(truth: &Image, test: &Image, region: Option<Roi>) -> Result<()> {
    if truth.height() != test.height() || truth.width() != test.width() {
        return Err(Error::argument(format!(
            "truth is {}x{}, test is {}x{}",
            truth.height(),
            truth.width(),
            test.height(),
            test.width()
        )));
    }
    if let Some(roi) = region {
        roi.require_inside(truth.height(), truth.width())?;
    }
    Ok(())
}

fn region_pixels<'a>(
    truth: &'a Image,
    test: &'a Image,
    region: Option<Roi>,
) -> impl Iterator<Item = (f64, f64)> + 'a {
    let roi = region.unwrap_or(Roi {
        top: 0,
        left: 0,
        height: truth.height(),
        width: truth.width(),
    });
    (roi.top..roi.top + roi.height).flat_map(move |y| {
        (roi.left..roi.left + roi.width).map(move |x| (truth.get(y, x), test.get(y, x)))
    })
}

/// PSNR on the 8-bit scale: both images are multiplied by 255, the MSE is
/// the mean squared difference over the region, and
/// `PSNR = 10 log10(255^2 / MSE)`. Zero MSE yields the `+inf` sentinel.
/// Returns `(psnr_db, mse)`.
pub fn psnr(truth: &Image, test: &Image, region: Option<Roi>) -> Result<(f64, f64)> {
    check_dims(truth, test, region)?;
    let mut sum = 0.0f64;
    let mut count = 0usize;
    for (a, b) in region_pixels(truth, test, region) {
        let d = (a - b) * 255.0;
        sum += d * d;
        count += 1;
    }
    let mse = sum / count as f64;
    let psnr_db = if mse > 0.0 {
        10.0 * (255.0f64 * 255.0 / mse).log10()
    } else {
        f64::INFINITY
    };
    Ok((psnr_db, mse))
}

/// Global SSIM over the region on the unit scale: region means, sample
/// variances and sample covariance plugged into
/// `(2 mu mu' + c1)(2 omega + c2) / ((mu^2 + mu'^2 + c1)(sigma^2 + sigma'^2 + c2))`.
pub fn ssim(truth: &Image, test: &Image, region: Option<Roi>, params: &SsimParams) -> Result<f64> {
    check_dims(truth, test, region)?;
    let count = region
        .map(|r| r.area())
        .unwrap_or_else(|| truth.len());
    if count < 2 {
        return Err(Error::argument("ssim region needs at least 2 pixels"));
    }
    let n = count as f64;
    let mut mean_a = 0.0;
    let mut mean_b = 0.0;
    for (a, b) in region_pixels(truth, test, region) {
        mean_a += a;
        mean_b += b;
    }
    mean_a /= n;
    mean_b /= n;
    let mut var_a = 0.0;
    let mut var_b = 0.0;
    let mut cov = 0.0;
    for (a, b) in region_pixels(truth, test, region) {
        let da = a - mean_a;
        let db = b - mean_b;
        var_a += da * da;
        var_b += db * db;
        cov += da * db;
    }
    var_a /= n - 1.0;
    var_b /= n - 1.0;
    cov /= n - 1.0;
    let (c1, c2) = (params.c1(), params.c2());
    Ok(((2.0 * mean_a * mean_b + c1) * (2.0 * cov + c2))
        / ((mean_a * mean_a + mean_b * mean_b + c1) * (var_a + var_b + c2)))
}

/// PSNR and SSIM over one region with default SSIM constants.
pub fn evaluate(truth: &Image, test: &Image, region: Option<Roi>) -> Result<QualityReport> {
    let (psnr_db, mse) = psnr(truth, test, region)?;
    let ssim = ssim(truth, test, region, &SsimParams::default())?;
    Ok(QualityReport {
        psnr_db,
        mse,
        ssim,
        region: region.map(Region::Roi).unwrap_or(Region::Full),
    })
}

/// Improvement increments `a - b` as `(delta_psnr, delta_ssim)`.
///
/// Infinite PSNRs follow the sentinel rules: `inf - finite = inf`,
/// `inf - inf = 0`.
pub fn roi_increment(a: &QualityReport, b: &QualityReport) -> Result<(f64, f64)> {
    if a.region != b.region {
        return Err(Error::argument("reports cover different regions"));
    }
    let delta_psnr = if a.psnr_db.is_infinite() && b.psnr_db.is_infinite() {
        0.0
    } else {
        a.psnr_db - b.psnr_db
    };
    Ok((delta_psnr, a.ssim - b.ssim))
}
