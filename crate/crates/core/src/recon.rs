//! Image reconstruction from (pattern stack, bucket measurements).
//!
//! Two routes: the classical second-order correlation estimate and a
//! total-variation regularized compressed-sensing solver. The TV solver
//! minimizes `tv_weight * |grad u|_1 + 1/2 |A u - b|_2^2` by variable
//! splitting with an augmented-Lagrangian (split-Bregman) scheme: the
//! gradient coefficients get a soft-threshold update, the image update is a
//! dense Cholesky solve of the fixed normal-equation matrix.
//!
//! Binary nonnegative patterns leave the constant image component weakly
//! determined, so the solver works on a centered system: the mean pattern is
//! subtracted from every pattern row and the mean intensity from every
//! measurement (which keeps noiseless systems exactly consistent), and the
//! centered measurements are rescaled to unit sup-norm so `tv_weight` is
//! scale-free. Reconstructed images are min-max normalized for display and
//! metrics.

use std::fs;
use std::path::Path;

use nalgebra::{Cholesky, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::Image;
use crate::measurement::MeasurementRecord;
use crate::stack::PatternStack;

/// Boundary rule for the forward-difference gradient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GradientBoundary {
    /// Replicate (Neumann) edges: the difference across the last row or
    /// column is zero.
    #[default]
    Replicate,
}

/// TV solver configuration. The exact constants are configuration, not
/// contract; the defaults below are pinned for reproducibility.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TvConfig {
    /// Weight of the TV term against the 1/2 L2 data-fidelity term.
    pub tv_weight: f64,
    /// Augmented-Lagrangian penalty on the gradient split.
    pub penalty: f64,
    pub max_iters: usize,
    /// Stop when the relative change of the iterate drops below this.
    pub rel_tol: f64,
    pub boundary: GradientBoundary,
}

impl Default for TvConfig {
    fn default() -> Self {
        TvConfig {
            tv_weight: 0.05,
            penalty: 1.0,
            max_iters: 300,
            rel_tol: 1e-6,
            boundary: GradientBoundary::Replicate,
        }
    }
}

impl TvConfig {
    fn validate(&self) -> Result<()> {
        if self.tv_weight <= 0.0 {
            return Err(Error::argument("tv_weight must be positive"));
        }
        if self.penalty <= 0.0 {
            return Err(Error::argument("penalty must be positive"));
        }
        if self.max_iters == 0 {
            return Err(Error::argument("max_iters must be at least 1"));
        }
        if self.rel_tol <= 0.0 {
            return Err(Error::argument("rel_tol must be positive"));
        }
        Ok(())
    }
}

/// Reconstruction output: the display-normalized image, the raw solver
/// values, and convergence diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct ReconResult {
    /// Min-max normalized to `[0, 1]`.
    pub image: Image,
    /// Unnormalized solution values, row-major.
    pub raw: Vec<f64>,
    pub iterations_used: usize,
    /// Relative data-fidelity residual `|A u - b| / |b|` of the centered
    /// system the solver works on.
    pub final_residual: f64,
}

#[derive(Serialize)]
struct Diagnostics<'a> {
    iterations_used: usize,
    final_residual: f64,
    config: Option<&'a TvConfig>,
}

/// Writes reconstruction diagnostics (iterations, residual, config echo) as
/// JSON.
pub fn save_diagnostics(
    result: &ReconResult,
    cfg: Option<&TvConfig>,
    path: impl AsRef<Path>,
) -> Result<()> {
    let diag = Diagnostics {
        iterations_used: result.iterations_used,
        final_residual: result.final_residual,
        config: cfg,
    };
    let json = serde_json::to_string_pretty(&diag)
        .map_err(|e| Error::format(format!("diagnostics encode: {e}")))?;
    fs::write(path.as_ref(), json)?;
    Ok(())
}

/// Forward-difference gradient of a vectorized `height x width` image:
/// the first `height*width` outputs are horizontal differences, the second
/// half vertical. With the replicate boundary the difference across the last
/// column/row is zero.
pub fn gradient(u: &[f64], height: usize, width: usize, boundary: GradientBoundary) -> Vec<f64> {
    assert_eq!(u.len(), height * width);
    let GradientBoundary::Replicate = boundary;
    let n = height * width;
    let mut c = vec![0.0; 2 * n];
    for y in 0..height {
        for x in 0..width {
            let idx = y * width + x;
            if x + 1 < width {
                c[idx] = u[idx + 1] - u[idx];
            }
            if y + 1 < height {
                c[n + idx] = u[idx + width] - u[idx];
            }
        }
    }
    c
}

/// Adjoint of [`gradient`]; the negative divergence.
pub fn gradient_adjoint(c: &[f64], height: usize, width: usize, boundary: GradientBoundary) -> Vec<f64> {
    let n = height * width;
    assert_eq!(c.len(), 2 * n);
    let GradientBoundary::Replicate = boundary;
    let mut out = vec![0.0; n];
    for y in 0..height {
        for x in 0..width {
            let idx = y * width + x;
            if x + 1 < width {
                out[idx] -= c[idx];
                out[idx + 1] += c[idx];
            }
            if y + 1 < height {
                out[idx] -= c[n + idx];
                out[idx + width] += c[n + idx];
            }
        }
    }
    out
}

/// Second-order correlation estimate:
/// `raw(x,y) = <I_t S_t(x,y)>_t - <I_t>_t <S_t(x,y)>_t`.
pub fn reconstruct_correlation(stack: &PatternStack, rec: &MeasurementRecord) -> Result<ReconResult> {
    check_pair(stack, rec)?;
    let t_count = rec.count();
    if t_count < 2 {
        return Err(Error::argument(
            "correlation reconstruction needs at least 2 measurements",
        ));
    }
    let n = stack.pattern_len();
    let intensities = rec.intensities();
    let mean_i: f64 = intensities.iter().sum::<f64>() / t_count as f64;
    let mut sum_is = vec![0.0f64; n];
    let mut sum_s = vec![0.0f64; n];
    for (pattern, &i_t) in stack.patterns().zip(intensities) {
        for (p, &bit) in pattern.iter().enumerate() {
            if bit == 1 {
                sum_is[p] += i_t;
                sum_s[p] += 1.0;
            }
        }
    }
    let inv_t = 1.0 / t_count as f64;
    let raw: Vec<f64> = (0..n)
        .map(|p| sum_is[p] * inv_t - mean_i * sum_s[p] * inv_t)
        .collect();
    let image = Image::new(stack.height(), stack.width(), minmax_normalize(&raw))?;
    let final_residual = centered_residual(stack, intensities, &raw);
    Ok(ReconResult {
        image,
        raw,
        iterations_used: 1,
        final_residual,
    })
}

/// TV-regularized compressed-sensing reconstruction.
///
/// Non-convergence within `max_iters` is not an error; the result carries the
/// diagnostics either way.
pub fn reconstruct_tv(stack: &PatternStack, rec: &MeasurementRecord, cfg: &TvConfig) -> Result<ReconResult> {
    cfg.validate()?;
    check_pair(stack, rec)?;
    if rec.count() == 0 {
        return Err(Error::argument("need at least 1 measurement"));
    }
    if rec.intensities().iter().any(|v| !v.is_finite()) {
        return Err(Error::argument("measurements must be finite"));
    }
    let (h, w) = (stack.height(), stack.width());
    let n = h * w;
    let t_count = rec.count();

    // Centered system: subtract the mean pattern from each row and the mean
    // intensity from each measurement, then scale to unit sup-norm.
    let mut a = DMatrix::<f64>::zeros(t_count, n);
    for (t, pattern) in stack.patterns().enumerate() {
        for (j, &bit) in pattern.iter().enumerate() {
            a[(t, j)] = f64::from(bit);
        }
    }
    let mean_i: f64 = rec.intensities().iter().sum::<f64>() / t_count as f64;
    let mut b = DVector::<f64>::from_iterator(
        t_count,
        rec.intensities().iter().map(|&v| v - mean_i),
    );
    for j in 0..n {
        let mean_j = a.column(j).sum() / t_count as f64;
        for t in 0..t_count {
            a[(t, j)] -= mean_j;
        }
    }
    let scale = b.amax();
    if scale <= 0.0 {
        // Zero centered data admits the zero solution exactly.
        return Ok(ReconResult {
            image: Image::new(h, w, vec![0.0; n])?,
            raw: vec![0.0; n],
            iterations_used: 0,
            final_residual: 0.0,
        });
    }
    b /= scale;

    // Normal-equation matrix A^T A + penalty * G^T G (+ tiny ridge to keep
    // the Cholesky factorization positive definite when the centering
    // produces an exact nullspace).
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 0..n {
        let ci = a.column(i);
        for j in i..n {
            let v = ci.dot(&a.column(j));
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
    add_laplacian(&mut m, h, w, cfg.penalty);
    let avg_diag = m.trace() / n as f64;
    let mut ridge = 1e-9 * avg_diag.max(f64::MIN_POSITIVE);
    let chol = loop {
        let mut ridged = m.clone();
        for i in 0..n {
            ridged[(i, i)] += ridge;
        }
        match Cholesky::new(ridged) {
            Some(c) => break c,
            None => {
                ridge *= 100.0;
                if ridge > avg_diag {
                    return Err(Error::argument(
                        "normal-equation matrix is not positive definite",
                    ));
                }
            }
        }
    };

    let atb = a.tr_mul(&b);
    let shrink_level = cfg.tv_weight / cfg.penalty;
    let mut u = DVector::<f64>::zeros(n);
    let mut c = vec![0.0f64; 2 * n];
    let mut d = vec![0.0f64; 2 * n];
    let mut iterations_used = cfg.max_iters;
    for k in 1..=cfg.max_iters {
        let mut cd = vec![0.0f64; 2 * n];
        for i in 0..2 * n {
            cd[i] = c[i] - d[i];
        }
        let gt = gradient_adjoint(&cd, h, w, cfg.boundary);
        let mut rhs = atb.clone();
        for i in 0..n {
            rhs[i] += cfg.penalty * gt[i];
        }
        let u_next = chol.solve(&rhs);

        let gu = gradient(u_next.as_slice(), h, w, cfg.boundary);
        for i in 0..2 * n {
            let v = gu[i] + d[i];
            c[i] = soft_threshold(v, shrink_level);
            d[i] = v - c[i];
        }

        let delta = (&u_next - &u).norm();
        let base = u.norm();
        u = u_next;
        if k > 1 && delta <= cfg.rel_tol * base.max(f64::MIN_POSITIVE) {
            iterations_used = k;
            break;
        }
    }

    let residual = (&a * &u - &b).norm() / b.norm();
    let raw: Vec<f64> = u.iter().map(|&v| v * scale).collect();
    let image = Image::new(h, w, minmax_normalize(&raw))?;
    Ok(ReconResult {
        image,
        raw,
        iterations_used,
        final_residual: residual,
    })
}

fn check_pair(stack: &PatternStack, rec: &MeasurementRecord) -> Result<()> {
    if stack.count() != rec.count() {
        return Err(Error::argument(format!(
            "stack has {} patterns, record has {} measurements",
            stack.count(),
            rec.count()
        )));
    }
    Ok(())
}

fn soft_threshold(v: f64, level: f64) -> f64 {
    if v > level {
        v - level
    } else if v < -level {
        v + level
    } else {
        0.0
    }
}

/// Min-max normalization to `[0, 1]`; constant inputs map to all zeros.
pub fn minmax_normalize(raw: &[f64]) -> Vec<f64> {
    let min = raw.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = raw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let range = max - min;
    if !(range > 0.0) {
        return vec![0.0; raw.len()];
    }
    raw.iter().map(|&v| (v - min) / range).collect()
}

// Adds penalty * G^T G (the 5-point Neumann Laplacian) onto `m`.
fn add_laplacian(m: &mut DMatrix<f64>, height: usize, width: usize, penalty: f64) {
    for y in 0..height {
        for x in 0..width {
            let idx = y * width + x;
            if x + 1 < width {
                m[(idx, idx)] += penalty;
                m[(idx + 1, idx + 1)] += penalty;
                m[(idx, idx + 1)] -= penalty;
                m[(idx + 1, idx)] -= penalty;
            }
            if y + 1 < height {
                m[(idx, idx)] += penalty;
                m[(idx + width, idx + width)] += penalty;
                m[(idx, idx + width)] -= penalty;
                m[(idx + width, idx)] -= penalty;
            }
        }
    }
}

// Relative residual of the centered system at `raw`; diagnostic shared by
// both reconstruction routes.
fn centered_residual(stack: &PatternStack, intensities: &[f64], raw: &[f64]) -> f64 {
    let t_count = intensities.len();
    let n = stack.pattern_len();
    if t_count == 0 {
        return 0.0;
    }
    let mean_i = intensities.iter().sum::<f64>() / t_count as f64;
    let mut col_mean = vec![0.0f64; n];
    for pattern in stack.patterns() {
        for (j, &bit) in pattern.iter().enumerate() {
            col_mean[j] += f64::from(bit);
        }
    }
    for v in &mut col_mean {
        *v /= t_count as f64;
    }
    let mut num = 0.0f64;
    let mut den = 0.0f64;
    for (pattern, &i_t) in stack.patterns().zip(intensities) {
        let mut dot = 0.0;
        for (j, &bit) in pattern.iter().enumerate() {
            dot += (f64::from(bit) - col_mean[j]) * raw[j];
        }
        let b_t = i_t - mean_i;
        num += (dot - b_t) * (dot - b_t);
        den += b_t * b_t;
    }
    if den > 0.0 {
        (num / den).sqrt()
    } else {
        0.0
    }
}
