//! Grayscale scene/reconstruction images and the canonical PGM interchange
//! format.
//!
//! Images hold unit-interval intensities in row-major order. The canonical
//! on-disk format is binary PGM (P5, 8-bit); binary PPM (P6, 8-bit RGB) is
//! also accepted on input and collapsed to grayscale with an unweighted
//! channel mean.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// 2D grayscale image with values in `[0, 1]`, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Image {
    height: usize,
    width: usize,
    values: Vec<f64>,
}

impl Image {
    /// Builds an image, validating the shape and the unit-interval invariant.
    pub fn new(height: usize, width: usize, values: Vec<f64>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::argument("image dimensions must be at least 1x1"));
        }
        if values.len() != height * width {
            return Err(Error::argument(format!(
                "expected {} values for a {}x{} image, got {}",
                height * width,
                height,
                width,
                values.len()
            )));
        }
        if values.iter().any(|v| !(0.0..=1.0).contains(v)) {
            return Err(Error::argument("image values must lie in [0, 1]"));
        }
        Ok(Image {
            height,
            width,
            values,
        })
    }

    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut values = Vec::with_capacity(height * width);
        for y in 0..height {
            for x in 0..width {
                values.push(f(y, x));
            }
        }
        Image::new(height, width, values)
    }

    pub fn zeros(height: usize, width: usize) -> Self {
        Image {
            height: height.max(1),
            width: width.max(1),
            values: vec![0.0; height.max(1) * width.max(1)],
        }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, y: usize, x: usize) -> f64 {
        self.values[y * self.width + x]
    }
}

/// Rectangular region of interest, fully contained in the frame it is
/// applied to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Roi {
    pub top: usize,
    pub left: usize,
    pub height: usize,
    pub width: usize,
}

impl Roi {
    pub fn new(top: usize, left: usize, height: usize, width: usize) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::argument("roi dimensions must be at least 1x1"));
        }
        Ok(Roi {
            top,
            left,
            height,
            width,
        })
    }

    /// Centered ROI; offsets round down when the margins are odd.
    pub fn centered(frame_height: usize, frame_width: usize, height: usize, width: usize) -> Result<Self> {
        if height > frame_height || width > frame_width {
            return Err(Error::argument("roi larger than frame"));
        }
        Roi::new(
            (frame_height - height) / 2,
            (frame_width - width) / 2,
            height,
            width,
        )
    }

    pub fn area(&self) -> usize {
        self.height * self.width
    }

    pub fn fits(&self, frame_height: usize, frame_width: usize) -> bool {
        self.height >= 1
            && self.width >= 1
            && self.top + self.height <= frame_height
            && self.left + self.width <= frame_width
    }

    pub fn require_inside(&self, frame_height: usize, frame_width: usize) -> Result<()> {
        if self.fits(frame_height, frame_width) {
            Ok(())
        } else {
            Err(Error::argument(format!(
                "roi {}x{}+{}+{} does not fit a {}x{} frame",
                self.height, self.width, self.top, self.left, frame_height, frame_width
            )))
        }
    }

    pub fn contains(&self, y: usize, x: usize) -> bool {
        y >= self.top && y < self.top + self.height && x >= self.left && x < self.left + self.width
    }

    pub fn covers(&self, frame_height: usize, frame_width: usize) -> bool {
        self.top == 0 && self.left == 0 && self.height == frame_height && self.width == frame_width
    }
}

/// Loads an 8-bit PGM (P5) or PPM (P6) file, collapses RGB to grayscale with
/// an equal-weight channel average, scales to `[0, 1]` by dividing by 255,
/// and bilinearly resizes to `target_h x target_w`.
pub fn load_image(path: impl AsRef<Path>, target_h: usize, target_w: usize) -> Result<Image> {
    if target_h == 0 || target_w == 0 {
        return Err(Error::argument("target dimensions must be at least 1x1"));
    }
    let bytes = fs::read(path.as_ref())?;
    let (gray, src_h, src_w) = decode_pnm_gray(&bytes)?;
    let resized = bilinear_resize(&gray, src_h, src_w, target_h, target_w);
    Image::new(target_h, target_w, resized)
}

/// Writes `image` as binary PGM (P5, maxval 255). Values are quantized with
/// round-half-up.
pub fn save_pgm(image: &Image, path: impl AsRef<Path>) -> Result<()> {
    let mut out = Vec::with_capacity(32 + image.len());
    out.extend_from_slice(format!("P5\n{} {}\n255\n", image.width, image.height).as_bytes());
    out.extend(image.values.iter().map(|&v| (v * 255.0).round() as u8));
    fs::write(path.as_ref(), out)?;
    Ok(())
}

// Decodes P5/P6 into unit-interval grayscale. RGB collapses with the
// unweighted channel mean.
fn decode_pnm_gray(bytes: &[u8]) -> Result<(Vec<f64>, usize, usize)> {
    let mut cursor = 0usize;
    let magic = read_token(bytes, &mut cursor).ok_or_else(|| Error::Decode("missing magic".into()))?;
    let channels = match magic.as_str() {
        "P5" => 1usize,
        "P6" => 3usize,
        other => {
            return Err(Error::Decode(format!(
                "unsupported magic {other:?}; expected P5 or P6"
            )))
        }
    };
    let width = read_number(bytes, &mut cursor)?;
    let height = read_number(bytes, &mut cursor)?;
    let maxval = read_number(bytes, &mut cursor)?;
    if width == 0 || height == 0 {
        return Err(Error::Decode("zero image dimension".into()));
    }
    if maxval == 0 || maxval > 255 {
        return Err(Error::Decode(format!("maxval {maxval} is not 8-bit")));
    }
    // Exactly one whitespace byte separates the header from the raster.
    if cursor >= bytes.len() || !bytes[cursor].is_ascii_whitespace() {
        return Err(Error::Decode("missing raster separator".into()));
    }
    cursor += 1;
    let expected = width * height * channels;
    let raster = &bytes[cursor.min(bytes.len())..];
    if raster.len() < expected {
        return Err(Error::Decode(format!(
            "truncated raster: expected {expected} bytes, found {}",
            raster.len()
        )));
    }
    let mut gray = Vec::with_capacity(width * height);
    if channels == 1 {
        gray.extend(raster[..expected].iter().map(|&b| f64::from(b) / 255.0));
    } else {
        for px in raster[..expected].chunks_exact(3) {
            let sum = f64::from(px[0]) + f64::from(px[1]) + f64::from(px[2]);
            gray.push(sum / 3.0 / 255.0);
        }
    }
    Ok((gray, height, width))
}

// Next whitespace-delimited token, skipping '#' comment lines.
fn read_token(bytes: &[u8], cursor: &mut usize) -> Option<String> {
    loop {
        while *cursor < bytes.len() && bytes[*cursor].is_ascii_whitespace() {
            *cursor += 1;
        }
        if *cursor < bytes.len() && bytes[*cursor] == b'#' {
            while *cursor < bytes.len() && bytes[*cursor] != b'\n' {
                *cursor += 1;
            }
            continue;
        }
        break;
    }
    let start = *cursor;
    while *cursor < bytes.len() && !bytes[*cursor].is_ascii_whitespace() {
        *cursor += 1;
    }
    if *cursor > start {
        Some(String::from_utf8_lossy(&bytes[start..*cursor]).into_owned())
    } else {
        None
    }
}

fn read_number(bytes: &[u8], cursor: &mut usize) -> Result<usize> {
    let tok = read_token(bytes, cursor).ok_or_else(|| Error::Decode("truncated header".into()))?;
    tok.parse::<usize>()
        .map_err(|_| Error::Decode(format!("bad header field {tok:?}")))
}

/// Bilinear resize with half-pixel-centered sampling and edge clamping.
pub fn bilinear_resize(
    values: &[f64],
    src_h: usize,
    src_w: usize,
    dst_h: usize,
    dst_w: usize,
) -> Vec<f64> {
    assert_eq!(values.len(), src_h * src_w);
    if src_h == dst_h && src_w == dst_w {
        return values.to_vec();
    }
    let scale_y = src_h as f64 / dst_h as f64;
    let scale_x = src_w as f64 / dst_w as f64;
    let mut out = Vec::with_capacity(dst_h * dst_w);
    for i in 0..dst_h {
        let sy = ((i as f64 + 0.5) * scale_y - 0.5).clamp(0.0, (src_h - 1) as f64);
        let y0 = sy.floor() as usize;
        let y1 = (y0 + 1).min(src_h - 1);
        let fy = sy - y0 as f64;
        for j in 0..dst_w {
            let sx = ((j as f64 + 0.5) * scale_x - 0.5).clamp(0.0, (src_w - 1) as f64);
            let x0 = sx.floor() as usize;
            let x1 = (x0 + 1).min(src_w - 1);
            let fx = sx - x0 as f64;
            let top = values[y0 * src_w + x0] * (1.0 - fx) + values[y0 * src_w + x1] * fx;
            let bot = values[y1 * src_w + x0] * (1.0 - fx) + values[y1 * src_w + x1] * fx;
            out.push(top * (1.0 - fy) + bot * fy);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_pgm(dir: &Path, name: &str, w: usize, h: usize, data: &[u8]) -> std::path::PathBuf {
        let path = dir.join(name);
        let mut f = fs::File::create(&path).unwrap();
        write!(f, "P5\n{} {}\n255\n", w, h).unwrap();
        f.write_all(data).unwrap();
        path
    }

    #[test]
    fn identity_resize_divides_by_255() {
        let dir = tempfile::tempdir().unwrap();
        let data: Vec<u8> = (0..64u8).collect();
        let path = write_pgm(dir.path(), "a.pgm", 8, 8, &data);
        let img = load_image(&path, 8, 8).unwrap();
        for (v, b) in img.values().iter().zip(data.iter()) {
            assert_eq!(*v, f64::from(*b) / 255.0);
        }
    }

    #[test]
    fn bilinear_downsample_to_single_pixel_averages() {
        // Hand oracle: target pixel center maps to source (0.5, 0.5), so the
        // value is the plain average of the four samples.
        let dir = tempfile::tempdir().unwrap();
        let path = write_pgm(dir.path(), "b.pgm", 2, 2, &[0, 255, 255, 0]);
        let img = load_image(&path, 1, 1).unwrap();
        assert!((img.get(0, 0) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn truncated_file_is_decode_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("short.pgm");
        fs::write(&path, b"P5\n4 4\n255\nxx").unwrap();
        match load_image(&path, 4, 4) {
            Err(Error::Decode(_)) => {}
            other => panic!("expected decode error, got {other:?}"),
        }
    }

    #[test]
    fn zero_target_dimension_is_argument_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_pgm(dir.path(), "c.pgm", 2, 2, &[0, 0, 0, 0]);
        assert!(matches!(load_image(&path, 0, 2), Err(Error::Argument(_))));
    }

    #[test]
    fn load_is_idempotent_at_identical_targets() {
        let dir = tempfile::tempdir().unwrap();
        let data: Vec<u8> = (0..36u8).map(|i| i * 7).collect();
        let path = write_pgm(dir.path(), "d.pgm", 6, 6, &data);
        let a = load_image(&path, 4, 5).unwrap();
        let b = load_image(&path, 4, 5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn ppm_collapses_with_equal_weight_mean() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rgb.ppm");
        let mut f = fs::File::create(&path).unwrap();
        write!(f, "P6\n1 1\n255\n").unwrap();
        f.write_all(&[30, 60, 90]).unwrap();
        let img = load_image(&path, 1, 1).unwrap();
        assert!((img.get(0, 0) - 60.0 / 255.0).abs() < 1e-12);
    }

    #[test]
    fn pgm_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let img = Image::from_fn(3, 5, |y, x| ((y * 5 + x) as f64) / 14.0).unwrap();
        let path = dir.path().join("rt.pgm");
        save_pgm(&img, &path).unwrap();
        let back = load_image(&path, 3, 5).unwrap();
        for (a, b) in img.values().iter().zip(back.values()) {
            assert!((a - b).abs() <= 0.5 / 255.0 + 1e-12);
        }
    }

    #[test]
    fn comments_in_header_are_skipped() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("comment.pgm");
        fs::write(&path, b"P5\n# a comment\n2 1\n255\n\x00\xff").unwrap();
        let img = load_image(&path, 1, 2).unwrap();
        assert_eq!(img.values(), &[0.0, 1.0]);
    }

    #[test]
    fn roi_bounds() {
        let roi = Roi::new(2, 3, 4, 5).unwrap();
        assert!(roi.fits(6, 8));
        assert!(!roi.fits(5, 8));
        assert!(roi.contains(2, 3));
        assert!(roi.contains(5, 7));
        assert!(!roi.contains(6, 3));
        assert!(Roi::new(0, 0, 0, 1).is_err());
        let c = Roi::centered(32, 32, 16, 16).unwrap();
        assert_eq!((c.top, c.left), (8, 8));
    }

    #[test]
    fn image_invariants_enforced() {
        assert!(Image::new(0, 1, vec![]).is_err());
        assert!(Image::new(1, 2, vec![0.0]).is_err());
        assert!(Image::new(1, 1, vec![1.5]).is_err());
        assert!(Image::new(1, 1, vec![-0.1]).is_err());
        assert!(Image::new(2, 2, vec![0.0, 0.5, 1.0, 0.25]).is_ok());
    }
}
