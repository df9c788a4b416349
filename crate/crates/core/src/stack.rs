//! Binary illumination pattern stacks and their on-disk container.
//!
//! Container layout (bit-exact):
//!   magic "RGIP" | u8 version = 1 | u32le count | u32le height | u32le width |
//!   count rasters, each height*width bits packed row-major MSB-first and
//!   padded to a byte boundary.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"RGIP";
const VERSION: u8 = 1;

/// Ordered sequence of binary illumination patterns sharing one frame size.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternStack {
    count: usize,
    height: usize,
    width: usize,
    bits: Vec<u8>, // one byte per bit, each 0 or 1, pattern-major then row-major
}

impl PatternStack {
    pub fn new(count: usize, height: usize, width: usize, bits: Vec<u8>) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::argument("pattern dimensions must be at least 1x1"));
        }
        if bits.len() != count * height * width {
            return Err(Error::argument(format!(
                "expected {} bits, got {}",
                count * height * width,
                bits.len()
            )));
        }
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::argument("pattern entries must be 0 or 1"));
        }
        Ok(PatternStack {
            count,
            height,
            width,
            bits,
        })
    }

    pub fn empty(height: usize, width: usize) -> Result<Self> {
        PatternStack::new(0, height, width, Vec::new())
    }

    pub fn from_fn(
        count: usize,
        height: usize,
        width: usize,
        mut f: impl FnMut(usize, usize, usize) -> u8,
    ) -> Result<Self> {
        let mut bits = Vec::with_capacity(count * height * width);
        for t in 0..count {
            for y in 0..height {
                for x in 0..width {
                    bits.push(f(t, y, x));
                }
            }
        }
        PatternStack::new(count, height, width, bits)
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// Pixels per pattern.
    pub fn pattern_len(&self) -> usize {
        self.height * self.width
    }

    /// Row-major bits of pattern `t`.
    pub fn pattern(&self, t: usize) -> &[u8] {
        let n = self.pattern_len();
        &self.bits[t * n..(t + 1) * n]
    }

    pub fn bit(&self, t: usize, y: usize, x: usize) -> u8 {
        self.bits[t * self.pattern_len() + y * self.width + x]
    }

    pub fn patterns(&self) -> impl Iterator<Item = &[u8]> {
        self.bits.chunks_exact(self.pattern_len())
    }
}

/// Writes `stack` in the container format above.
pub fn save_pattern_stack(stack: &PatternStack, path: impl AsRef<Path>) -> Result<()> {
    let per_pattern = stack.pattern_len().div_ceil(8);
    let mut out = Vec::with_capacity(17 + stack.count() * per_pattern);
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    for dim in [stack.count(), stack.height(), stack.width()] {
        let v = u32::try_from(dim).map_err(|_| Error::argument("dimension exceeds u32"))?;
        out.extend_from_slice(&v.to_le_bytes());
    }
    for pattern in stack.patterns() {
        let mut acc = 0u8;
        for (i, &bit) in pattern.iter().enumerate() {
            acc |= bit << (7 - (i % 8));
            if i % 8 == 7 {
                out.push(acc);
                acc = 0;
            }
        }
        if pattern.len() % 8 != 0 {
            out.push(acc);
        }
    }
    fs::write(path.as_ref(), out)?;
    Ok(())
}

/// Reads a container written by [`save_pattern_stack`]. The round trip is
/// bit-identical.
pub fn load_pattern_stack(path: impl AsRef<Path>) -> Result<PatternStack> {
    let bytes = fs::read(path.as_ref())?;
    if bytes.len() < 17 {
        return Err(Error::format("truncated header"));
    }
    if &bytes[0..4] != MAGIC {
        return Err(Error::format(format!(
            "bad magic {:?}, expected {:?}",
            &bytes[0..4],
            MAGIC
        )));
    }
    if bytes[4] != VERSION {
        return Err(Error::format(format!(
            "unsupported version {}, expected {VERSION}",
            bytes[4]
        )));
    }
    let dim = |at: usize| u32::from_le_bytes(bytes[at..at + 4].try_into().unwrap()) as usize;
    let (count, height, width) = (dim(5), dim(9), dim(13));
    if height == 0 || width == 0 {
        return Err(Error::format("zero pattern dimension"));
    }
    let pattern_len = height * width;
    let per_pattern = pattern_len.div_ceil(8);
    let payload = &bytes[17..];
    if payload.len() != count * per_pattern {
        return Err(Error::format(format!(
            "payload is {} bytes, expected {}",
            payload.len(),
            count * per_pattern
        )));
    }
    let mut bits = Vec::with_capacity(count * pattern_len);
    for raster in payload.chunks_exact(per_pattern) {
        for i in 0..pattern_len {
            bits.push((raster[i / 8] >> (7 - (i % 8))) & 1);
        }
    }
    PatternStack::new(count, height, width, bits)
}
