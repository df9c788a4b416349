//! PCA pattern training.
//!
//! The pipeline: vectorize a training corpus into a matrix (one image per
//! row), standardize each column to zero mean and unit sample deviation,
//! form the correlation-structured covariance, eigendecompose it, and order
//! the eigenvectors by descending eigenvalue. Eigenvectors become
//! projector-ready binary patterns by zeroing negative pixels and extracting
//! one bit plane of the 8-bit quantized pattern.

use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use rand_chacha::rand_core::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::load_image;
use crate::rng::RngSpec;
use crate::stack::PatternStack;

/// Tolerance below which a column counts as constant during standardization.
pub const CONSTANT_COLUMN_TOL: f64 = 1e-12;
/// Maximum asymmetry accepted by [`eigendecompose_sorted`].
pub const SYMMETRY_TOL: f64 = 1e-10;

/// Vectorized training corpus: M images of N pixels each, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl TrainingMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows < 2 {
            return Err(Error::argument("training matrix needs at least 2 rows"));
        }
        if cols == 0 {
            return Err(Error::argument("training matrix needs at least 1 column"));
        }
        if data.len() != rows * cols {
            return Err(Error::argument(format!(
                "expected {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        Ok(TrainingMatrix { rows, cols, data })
    }

    /// Image count M.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Pixel count N.
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, m: usize) -> &[f64] {
        &self.data[m * self.cols..(m + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }
}

/// Loads every decodable image under `dir` (non-recursive, deterministic
/// lexicographic file order), resized to `h x w` and vectorized row-major,
/// keeping at most `limit` rows.
pub fn load_dataset(
    dir: impl AsRef<Path>,
    h: usize,
    w: usize,
    limit: Option<usize>,
) -> Result<TrainingMatrix> {
    let mut names: Vec<PathBuf> = fs::read_dir(dir.as_ref())?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.is_file())
        .collect();
    names.sort_by(|a, b| a.file_name().cmp(&b.file_name()));

    let cap = limit.unwrap_or(usize::MAX);
    let mut data = Vec::new();
    let mut rows = 0usize;
    for path in names {
        if rows >= cap {
            break;
        }
        match load_image(&path, h, w) {
            Ok(img) => {
                data.extend_from_slice(img.values());
                rows += 1;
            }
            Err(Error::Io(_)) | Err(Error::Decode(_)) => continue,
            Err(e) => return Err(e),
        }
    }
    if rows < 2 {
        return Err(Error::Dataset(format!(
            "need at least 2 usable images, found {rows}"
        )));
    }
    TrainingMatrix::new(rows, h * w, data)
}

/// Standardizes each column to zero mean and unit sample standard deviation
/// (divisor M-1). Columns with deviation below [`CONSTANT_COLUMN_TOL`] get
/// scale 1 and become all zeros.
pub fn standardize(x: &TrainingMatrix) -> Result<(TrainingMatrix, Vec<f64>, Vec<f64>)> {
    let (m, n) = (x.rows(), x.cols());
    let mut mean = vec![0.0f64; n];
    for row in 0..m {
        for (acc, v) in mean.iter_mut().zip(x.row(row)) {
            *acc += v;
        }
    }
    for acc in &mut mean {
        *acc /= m as f64;
    }

    let mut var = vec![0.0f64; n];
    for row in 0..m {
        for ((acc, v), mu) in var.iter_mut().zip(x.row(row)).zip(&mean) {
            let d = v - mu;
            *acc += d * d;
        }
    }
    let mut scale = vec![0.0f64; n];
    let mut constant = vec![false; n];
    for j in 0..n {
        let sd = (var[j] / (m as f64 - 1.0)).sqrt();
        if sd < CONSTANT_COLUMN_TOL {
            scale[j] = 1.0;
            constant[j] = true;
        } else {
            scale[j] = sd;
        }
    }

    let mut out = Vec::with_capacity(m * n);
    for row in 0..m {
        for (j, v) in x.row(row).iter().enumerate() {
            out.push(if constant[j] {
                0.0
            } else {
                (v - mean[j]) / scale[j]
            });
        }
    }
    Ok((TrainingMatrix::new(m, n, out)?, mean, scale))
}

/// Sample covariance of a standardized matrix: `(1/(M-1)) X^T X`, computed
/// per upper-triangle entry and mirrored so the result is exactly symmetric.
pub fn covariance(xstd: &TrainingMatrix) -> Result<DMatrix<f64>> {
    let (m, n) = (xstd.rows(), xstd.cols());
    // Column-major copy so column dot products run over contiguous memory.
    let cols = DMatrix::from_row_slice(m, n, xstd.data());
    let mut sigma = DMatrix::zeros(n, n);
    let denom = m as f64 - 1.0;
    for i in 0..n {
        let ci = cols.column(i);
        for j in i..n {
            let v = ci.dot(&cols.column(j)) / denom;
            sigma[(i, j)] = v;
            sigma[(j, i)] = v;
        }
    }
    Ok(sigma)
}

/// Eigendecomposition of a symmetric matrix with descending-eigenvalue
/// ordering and a fixed sign convention: each eigenvector is flipped so its
/// largest-magnitude entry (ties broken by lowest index) is positive.
///
/// Returns `(eigenvalues, components)` where row `k` of `components` is the
/// eigenvector of the k-th largest eigenvalue.
pub fn eigendecompose_sorted(sigma: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = sigma.nrows();
    if sigma.ncols() != n {
        return Err(Error::argument("matrix must be square"));
    }
    let mut asym = 0.0f64;
    for i in 0..n {
        for j in (i + 1)..n {
            asym = asym.max((sigma[(i, j)] - sigma[(j, i)]).abs());
        }
    }
    if asym >= SYMMETRY_TOL {
        return Err(Error::argument(format!(
            "matrix asymmetry {asym:.3e} exceeds {SYMMETRY_TOL:.0e}"
        )));
    }

    let eig = sigma.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .partial_cmp(&eig.eigenvalues[a])
            .unwrap()
            .then(a.cmp(&b))
    });

    let mut eigenvalues = Vec::with_capacity(n);
    let mut components = DMatrix::zeros(n, n);
    for (rank, &idx) in order.iter().enumerate() {
        eigenvalues.push(eig.eigenvalues[idx]);
        let col = eig.eigenvectors.column(idx);
        let mut best = 0usize;
        for i in 1..n {
            if col[i].abs() > col[best].abs() {
                best = i;
            }
        }
        let flip = if col[best] < 0.0 { -1.0 } else { 1.0 };
        for i in 0..n {
            components[(rank, i)] = flip * col[i];
        }
    }
    Ok((eigenvalues, components))
}

/// Zeroes negative pixels: elementwise `max(p, 0)`.
pub fn extract_positive(p: &[f64]) -> Vec<f64> {
    p.iter().map(|&v| v.max(0.0)).collect()
}

/// Min-max normalizes a nonnegative pattern to `[0, 1]` over its own range
/// (constant patterns map to all zeros), quantizes to 0..=255 with
/// round-half-up, and extracts bit plane `bit`.
pub fn quantize_bitplane(p: &[f64], bit: u8) -> Result<Vec<u8>> {
    if bit > 7 {
        return Err(Error::argument(format!("bit index {bit} out of 0..=7")));
    }
    if p.is_empty() {
        return Ok(Vec::new());
    }
    let min = p.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = p.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let range = max - min;
    if !(range > 0.0) {
        return Ok(vec![0; p.len()]);
    }
    Ok(p.iter()
        .map(|&v| {
            let q = ((v - min) / range * 255.0).round() as u16;
            ((q >> bit) & 1) as u8
        })
        .collect())
}

/// Trained PCA model: per-pixel standardization statistics plus the ordered
/// eigen-system, with the pattern shape used for reshaping components.
#[derive(Debug, Clone, PartialEq)]
pub struct PcaModel {
    pub mean: Vec<f64>,
    pub scale: Vec<f64>,
    pub eigenvalues: Vec<f64>,
    components: DMatrix<f64>,
    pub height: usize,
    pub width: usize,
    pub trained_rows: usize,
}

impl PcaModel {
    pub fn n(&self) -> usize {
        self.mean.len()
    }

    /// Row `k` of the component matrix (k-th principal direction).
    pub fn component(&self, k: usize) -> Vec<f64> {
        self.components.row(k).iter().cloned().collect()
    }

    pub fn components(&self) -> &DMatrix<f64> {
        &self.components
    }
}

/// Runs the full training pipeline on a vectorized corpus whose pixel count
/// must equal `height * width`.
pub fn train_pca(x: &TrainingMatrix, height: usize, width: usize) -> Result<PcaModel> {
    if x.cols() != height * width {
        return Err(Error::argument(format!(
            "matrix has {} columns, pattern shape {}x{} needs {}",
            x.cols(),
            height,
            width,
            height * width
        )));
    }
    let (xstd, mean, scale) = standardize(x)?;
    let sigma = covariance(&xstd)?;
    let (eigenvalues, components) = eigendecompose_sorted(&sigma)?;
    Ok(PcaModel {
        mean,
        scale,
        eigenvalues,
        components,
        height,
        width,
        trained_rows: x.rows(),
    })
}

/// Builds `count` binary patterns from a model: pattern `t < N` is the
/// binarized t-th component (descending eigenvalue order); patterns past the
/// spectrum are Bernoulli(1/2) draws from substream `t` of `rng`.
pub fn gen_pca_stack(model: &PcaModel, count: usize, bit: u8, rng: &RngSpec) -> Result<PatternStack> {
    let n = model.n();
    if model.height * model.width != n {
        return Err(Error::argument(format!(
            "model shape {}x{} inconsistent with {} pixels",
            model.height, model.width, n
        )));
    }
    let mut bits = Vec::with_capacity(count * n);
    for t in 0..count {
        if t < n {
            let pattern = quantize_bitplane(&extract_positive(&model.component(t)), bit)?;
            bits.extend_from_slice(&pattern);
        } else {
            let mut stream = rng.stream(t as u64);
            bits.extend((0..n).map(|_| (stream.next_u32() & 1) as u8));
        }
    }
    PatternStack::new(count, model.height, model.width, bits)
}

#[derive(Serialize, Deserialize)]
struct ModelHeader {
    n: usize,
    height: usize,
    width: usize,
    trained_rows: usize,
    scaling: String,
    sidecar: String,
}

/// Persists a model as `<base>.json` (header) plus `<base>.bin` (raw
/// little-endian f64 arrays: mean, scale, eigenvalues, components row-major,
/// concatenated in that order).
pub fn save_pca_model(model: &PcaModel, base: impl AsRef<Path>) -> Result<()> {
    let base = base.as_ref();
    let json_path = base.with_extension("json");
    let bin_path = base.with_extension("bin");
    let header = ModelHeader {
        n: model.n(),
        height: model.height,
        width: model.width,
        trained_rows: model.trained_rows,
        scaling: "sample-std".to_string(),
        sidecar: bin_path
            .file_name()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default(),
    };
    let json = serde_json::to_string_pretty(&header)
        .map_err(|e| Error::format(format!("model header encode: {e}")))?;
    fs::write(&json_path, json)?;

    let n = model.n();
    let mut bytes = Vec::with_capacity((3 * n + n * n) * 8);
    let mut push = |vals: &mut dyn Iterator<Item = f64>| {
        for v in vals {
            bytes.extend_from_slice(&v.to_le_bytes());
        }
    };
    push(&mut model.mean.iter().cloned());
    push(&mut model.scale.iter().cloned());
    push(&mut model.eigenvalues.iter().cloned());
    for r in 0..n {
        push(&mut model.components.row(r).iter().cloned());
    }
    fs::write(&bin_path, bytes)?;
    Ok(())
}

/// Loads a model written by [`save_pca_model`]; `base` may point at the
/// `.json` header or the extensionless base path.
pub fn load_pca_model(base: impl AsRef<Path>) -> Result<PcaModel> {
    let json_path = base.as_ref().with_extension("json");
    let header: ModelHeader = serde_json::from_str(&fs::read_to_string(&json_path)?)
        .map_err(|e| Error::format(format!("model header decode: {e}")))?;
    if header.height * header.width != header.n {
        return Err(Error::format("header shape inconsistent with n"));
    }
    let bin_path = json_path
        .parent()
        .map(|p| p.join(&header.sidecar))
        .unwrap_or_else(|| PathBuf::from(&header.sidecar));
    let bytes = fs::read(&bin_path)?;
    let n = header.n;
    let expected = (3 * n + n * n) * 8;
    if bytes.len() != expected {
        return Err(Error::format(format!(
            "sidecar is {} bytes, expected {expected}",
            bytes.len()
        )));
    }
    let mut floats = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()));
    let mut take = |k: usize| -> Vec<f64> { floats.by_ref().take(k).collect() };
    let mean = take(n);
    let scale = take(n);
    let eigenvalues = take(n);
    let comps = take(n * n);
    Ok(PcaModel {
        mean,
        scale,
        eigenvalues,
        components: DMatrix::from_row_slice(n, n, &comps),
        height: header.height,
        width: header.width,
        trained_rows: header.trained_rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::image::{save_pgm, Image};
    use approx::assert_abs_diff_eq;
    use nalgebra::DVector;

    #[test]
    fn standardize_matches_hand_computation() {
        // Column [0, 2]: mean 1, sample std sqrt(2), entries +-1/sqrt(2).
        let x = TrainingMatrix::new(2, 1, vec![0.0, 2.0]).unwrap();
        let (xs, mean, scale) = standardize(&x).unwrap();
        assert_abs_diff_eq!(mean[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(scale[0], 2.0f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(xs.data()[0], -1.0 / 2.0f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(xs.data()[1], 1.0 / 2.0f64.sqrt(), epsilon = 1e-15);
    }

    #[test]
    fn constant_column_becomes_zeros_with_unit_scale() {
        let x = TrainingMatrix::new(3, 1, vec![5.0, 5.0, 5.0]).unwrap();
        let (xs, _, scale) = standardize(&x).unwrap();
        assert_eq!(scale[0], 1.0);
        assert_eq!(xs.data(), &[0.0, 0.0, 0.0]);
    }

    #[test]
    fn standardized_columns_have_zero_mean() {
        let data: Vec<f64> = (0..40).map(|i| ((i * 37 % 19) as f64) / 19.0).collect();
        let x = TrainingMatrix::new(8, 5, data).unwrap();
        let (xs, _, _) = standardize(&x).unwrap();
        for j in 0..5 {
            let mean: f64 = (0..8).map(|r| xs.row(r)[j]).sum::<f64>() / 8.0;
            assert!(mean.abs() < 1e-12, "column {j} mean {mean}");
        }
    }

    #[test]
    fn covariance_of_identical_columns_is_one() {
        let x = TrainingMatrix::new(4, 2, vec![1.0, 1.0, 2.0, 2.0, 3.0, 3.0, 4.0, 4.0]).unwrap();
        let (xs, _, _) = standardize(&x).unwrap();
        let sigma = covariance(&xs).unwrap();
        assert_abs_diff_eq!(sigma[(0, 1)], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(sigma[(0, 0)], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(sigma[(1, 1)], 1.0, epsilon = 1e-12);
        assert_eq!(sigma, sigma.transpose());
    }

    #[test]
    fn eigendecompose_diagonal() {
        let sigma = DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 1.0]);
        let (vals, comps) = eigendecompose_sorted(&sigma).unwrap();
        assert_abs_diff_eq!(vals[0], 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(vals[1], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(comps[(0, 0)], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(comps[(0, 1)], 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(comps[(1, 1)], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn eigendecompose_rank_one() {
        // [[1,1],[1,1]] has eigenvalues 2 and 0; the leading eigenvector is
        // (1,1)/sqrt(2) from the characteristic polynomial.
        let sigma = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let (vals, comps) = eigendecompose_sorted(&sigma).unwrap();
        assert_abs_diff_eq!(vals[0], 2.0, epsilon = 1e-12);
        assert_abs_diff_eq!(vals[1], 0.0, epsilon = 1e-12);
        let inv_sqrt2 = 1.0 / 2.0f64.sqrt();
        assert_abs_diff_eq!(comps[(0, 0)], inv_sqrt2, epsilon = 1e-12);
        assert_abs_diff_eq!(comps[(0, 1)], inv_sqrt2, epsilon = 1e-12);
    }

    #[test]
    fn random_symmetric_reconstructs() {
        let mut rng = RngSpec::new(3).rng();
        let n = 6;
        let mut sigma = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = (rng.next_u32() as f64 / u32::MAX as f64) - 0.5;
                sigma[(i, j)] = v;
                sigma[(j, i)] = v;
            }
        }
        let (vals, comps) = eigendecompose_sorted(&sigma).unwrap();
        let lambda = DMatrix::from_diagonal(&DVector::from_vec(vals.clone()));
        let recon = comps.transpose() * lambda * &comps;
        let err = (&recon - &sigma).abs().max();
        assert!(err < 1e-10, "reconstruction error {err}");
        // Rows orthonormal.
        let gram = &comps * comps.transpose();
        let eye_err = (&gram - DMatrix::<f64>::identity(n, n)).abs().max();
        assert!(eye_err < 1e-10, "orthonormality error {eye_err}");
    }

    #[test]
    fn asymmetric_input_is_error() {
        let sigma = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.2, 1.0]);
        assert!(matches!(
            eigendecompose_sorted(&sigma),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn svd_oracle_agrees_on_small_corpus() {
        // Independent route: singular values of Xstd/sqrt(M-1) squared are
        // the covariance eigenvalues; right singular vectors its
        // eigenvectors.
        let m = 50;
        let n = 16;
        let mut rng = RngSpec::new(17).rng();
        let data: Vec<f64> = (0..m * n)
            .map(|_| rng.next_u32() as f64 / u32::MAX as f64)
            .collect();
        let x = TrainingMatrix::new(m, n, data).unwrap();
        let (xs, _, _) = standardize(&x).unwrap();
        let sigma = covariance(&xs).unwrap();
        let (vals, comps) = eigendecompose_sorted(&sigma).unwrap();

        let scaled = DMatrix::from_row_slice(m, n, xs.data()) / ((m as f64 - 1.0).sqrt());
        let svd = scaled.svd(true, true);
        let v_t = svd.v_t.unwrap();
        let mut sv: Vec<f64> = svd.singular_values.iter().map(|s| s * s).collect();
        sv.sort_by(|a, b| b.partial_cmp(a).unwrap());
        for k in 0..n {
            assert!(
                (vals[k] - sv[k]).abs() < 1e-8,
                "eigenvalue {k}: {} vs {}",
                vals[k],
                sv[k]
            );
        }
        // Compare leading eigenvectors up to the declared sign convention
        // (skip near-degenerate directions where the basis is not unique).
        for k in 0..n {
            if k + 1 < n && (vals[k] - vals[k + 1]).abs() < 1e-6 {
                break;
            }
            let ours: Vec<f64> = comps.row(k).iter().cloned().collect();
            let mut theirs: Vec<f64> = v_t.row(k).iter().cloned().collect();
            let mut best = 0usize;
            for i in 1..n {
                if theirs[i].abs() > theirs[best].abs() {
                    best = i;
                }
            }
            if theirs[best] < 0.0 {
                for v in &mut theirs {
                    *v = -*v;
                }
            }
            for i in 0..n {
                assert!(
                    (ours[i] - theirs[i]).abs() < 1e-8,
                    "eigenvector {k} entry {i}: {} vs {}",
                    ours[i],
                    theirs[i]
                );
            }
        }
    }

    #[test]
    fn eigenvalue_sum_matches_trace() {
        let m = 30;
        let n = 9;
        let mut rng = RngSpec::new(23).rng();
        let data: Vec<f64> = (0..m * n)
            .map(|_| rng.next_u32() as f64 / u32::MAX as f64)
            .collect();
        let x = TrainingMatrix::new(m, n, data).unwrap();
        let (xs, _, _) = standardize(&x).unwrap();
        let sigma = covariance(&xs).unwrap();
        let (vals, _) = eigendecompose_sorted(&sigma).unwrap();
        let trace: f64 = (0..n).map(|i| sigma[(i, i)]).sum();
        assert!((vals.iter().sum::<f64>() - trace).abs() < 1e-8);
    }

    #[test]
    fn extract_positive_definition() {
        assert_eq!(extract_positive(&[-1.0, 0.5]), vec![0.0, 0.5]);
        assert_eq!(extract_positive(&[-3.0, -0.1]), vec![0.0, 0.0]);
        let p = vec![-2.0, 0.0, 1.5, -0.3];
        assert_eq!(extract_positive(&extract_positive(&p)), extract_positive(&p));
    }

    #[test]
    fn bitplane_arithmetic() {
        // Values 0, 3/255, 1 quantize to 0, 3, 255.
        let p = vec![0.0, 3.0 / 255.0, 1.0];
        assert_eq!(quantize_bitplane(&p, 0).unwrap(), vec![0, 1, 1]);
        assert_eq!(quantize_bitplane(&p, 1).unwrap(), vec![0, 1, 1]);
        assert_eq!(quantize_bitplane(&p, 2).unwrap(), vec![0, 0, 1]);
        assert_eq!(quantize_bitplane(&p, 7).unwrap(), vec![0, 0, 1]);
        assert!(quantize_bitplane(&p, 8).is_err());
        // Constant patterns map to zeros.
        assert_eq!(quantize_bitplane(&[0.7, 0.7], 0).unwrap(), vec![0, 0]);
    }

    #[test]
    fn pca_stack_orders_components_then_randoms() {
        let m = 12;
        let (h, w) = (3, 3);
        let mut rng = RngSpec::new(5).rng();
        let data: Vec<f64> = (0..m * h * w)
            .map(|_| rng.next_u32() as f64 / u32::MAX as f64)
            .collect();
        let x = TrainingMatrix::new(m, h * w, data).unwrap();
        let model = train_pca(&x, h, w).unwrap();

        let spec = RngSpec::new(40);
        let stack = gen_pca_stack(&model, 14, 7, &spec).unwrap();
        assert_eq!(stack.count(), 14);
        for t in 0..9 {
            let expected = quantize_bitplane(&extract_positive(&model.component(t)), 7).unwrap();
            assert_eq!(stack.pattern(t), &expected[..]);
        }
        // Tail patterns are the seeded Bernoulli substreams.
        let again = gen_pca_stack(&model, 14, 7, &spec).unwrap();
        assert_eq!(stack, again);
        for t in 9..14 {
            let mut stream = spec.stream(t as u64);
            for &b in stack.pattern(t) {
                assert_eq!(b, (stream.next_u32() & 1) as u8);
            }
        }
    }

    #[test]
    fn model_round_trips_through_files() {
        let m = 10;
        let (h, w) = (2, 3);
        let mut rng = RngSpec::new(31).rng();
        let data: Vec<f64> = (0..m * h * w)
            .map(|_| rng.next_u32() as f64 / u32::MAX as f64)
            .collect();
        let x = TrainingMatrix::new(m, h * w, data).unwrap();
        let model = train_pca(&x, h, w).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let base = dir.path().join("model");
        save_pca_model(&model, &base).unwrap();
        let back = load_pca_model(&base).unwrap();
        assert_eq!(model, back);
    }

    #[test]
    fn dataset_loads_in_lexicographic_order_with_limit() {
        let dir = tempfile::tempdir().unwrap();
        for i in 0..10 {
            let img = Image::from_fn(4, 4, |_, _| (i as f64) / 10.0).unwrap();
            save_pgm(&img, dir.path().join(format!("img_{i:02}.pgm"))).unwrap();
        }
        let x = load_dataset(dir.path(), 4, 4, None).unwrap();
        assert_eq!((x.rows(), x.cols()), (10, 16));
        let limited = load_dataset(dir.path(), 4, 4, Some(5)).unwrap();
        assert_eq!(limited.rows(), 5);
        for i in 0..5 {
            let expected = ((i as f64 / 10.0) * 255.0).round() / 255.0;
            assert!((limited.row(i)[0] - expected).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_directory_is_dataset_error() {
        let dir = tempfile::tempdir().unwrap();
        assert!(matches!(
            load_dataset(dir.path(), 4, 4, None),
            Err(Error::Dataset(_))
        ));
    }

    #[test]
    fn undecodable_files_are_skipped() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("a_garbage.txt"), b"not an image").unwrap();
        for i in 0..3 {
            let img = Image::from_fn(4, 4, |y, x| ((y * 4 + x + i) % 5) as f64 / 5.0).unwrap();
            save_pgm(&img, dir.path().join(format!("b_{i}.pgm"))).unwrap();
        }
        let x = load_dataset(dir.path(), 4, 4, None).unwrap();
        assert_eq!(x.rows(), 3);
    }
}
