//! Pattern synthesis: random stacks, retina-like geometry, and composition
//! of retina-like stacks from an arbitrary ROI fill.
//!
//! The retina-like layout keeps every pixel inside the ROI (the fovea) at
//! full resolution and partitions the periphery into macro-cells indexed by
//! (ring, sector): rings are logarithmically spaced annuli between the ROI's
//! circumscribed radius and the frame's corner radius, sectors are uniform
//! angular wedges, both centered on the ROI center. All pixels of one cell
//! share one binary value per pattern, mimicking the density falloff of
//! retinal sampling.

use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use rand_chacha::rand_core::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::Roi;
use crate::rng::RngSpec;
use crate::stack::PatternStack;

/// Generates `count` patterns whose bits are independent Bernoulli(1/2)
/// draws. Pattern `t` comes from substream `t`, so the result is
/// independent of evaluation order.
pub fn gen_random_stack(count: usize, height: usize, width: usize, rng: &RngSpec) -> Result<PatternStack> {
    if height == 0 || width == 0 {
        return Err(Error::argument("pattern dimensions must be at least 1x1"));
    }
    let len = height * width;
    let mut bits = Vec::with_capacity(count * len);
    for t in 0..count {
        let mut stream = rng.stream(t as u64);
        bits.extend((0..len).map(|_| (stream.next_u32() & 1) as u8));
    }
    PatternStack::new(count, height, width, bits)
}

/// Fovea rectangle plus log-polar periphery cell map.
///
/// Labels `0..roi.area()` index fovea pixels in ROI-row-major order; labels
/// `roi.area() + ring*sectors + sector` index periphery macro-cells. Some
/// periphery labels may be unused when a cell contains no pixel.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RetinaGeometry {
    pub frame_height: usize,
    pub frame_width: usize,
    pub roi: Roi,
    pub rings: usize,
    pub sectors: usize,
    pub cell_map: Vec<usize>,
}

impl RetinaGeometry {
    pub fn label(&self, y: usize, x: usize) -> usize {
        self.cell_map[y * self.frame_width + x]
    }

    /// Number of distinct labels actually present in the map.
    pub fn distinct_labels(&self) -> usize {
        let mut labels: Vec<usize> = self.cell_map.clone();
        labels.sort_unstable();
        labels.dedup();
        labels.len()
    }

    pub fn periphery_cell_count(&self) -> usize {
        self.rings * self.sectors
    }
}

/// Builds the cell map for a frame with the given fovea rectangle.
///
/// Ring boundaries are logarithmically spaced between the circumscribed
/// radius of the ROI rectangle and the largest frame-corner radius, measured
/// from the ROI center. A pixel radially inside the first boundary but
/// outside the ROI rectangle joins ring 0.
pub fn build_retina_geometry(
    frame_height: usize,
    frame_width: usize,
    roi: Roi,
    rings: usize,
    sectors: usize,
) -> Result<RetinaGeometry> {
    roi.require_inside(frame_height, frame_width)?;
    let full_frame = roi.covers(frame_height, frame_width);
    if !full_frame && (rings == 0 || sectors == 0) {
        return Err(Error::argument(
            "rings and sectors must be at least 1 when the roi does not cover the frame",
        ));
    }

    let mut cell_map = vec![0usize; frame_height * frame_width];
    // Pixel centers sit at integer coordinates; the ROI center and radii are
    // measured in that system.
    let cy = roi.top as f64 + (roi.height as f64 - 1.0) / 2.0;
    let cx = roi.left as f64 + (roi.width as f64 - 1.0) / 2.0;
    let r0 = (roi.height as f64 / 2.0).hypot(roi.width as f64 / 2.0);
    let rmax = frame_corner_radius(frame_height, frame_width, cy, cx);
    let log_span = if rmax > r0 { (rmax / r0).ln() } else { 0.0 };

    for y in 0..frame_height {
        for x in 0..frame_width {
            let idx = y * frame_width + x;
            if roi.contains(y, x) {
                cell_map[idx] = (y - roi.top) * roi.width + (x - roi.left);
                continue;
            }
            let dy = y as f64 - cy;
            let dx = x as f64 - cx;
            let r = dy.hypot(dx);
            let ring = if r <= r0 || log_span <= 0.0 {
                0
            } else {
                (((r / r0).ln() / log_span) * rings as f64).floor() as usize
            }
            .min(rings - 1);
            let theta = dy.atan2(dx);
            let sector = ((((theta + PI) / (2.0 * PI)) * sectors as f64).floor() as usize)
                .min(sectors - 1);
            cell_map[idx] = roi.area() + ring * sectors + sector;
        }
    }
    Ok(RetinaGeometry {
        frame_height,
        frame_width,
        roi,
        rings,
        sectors,
        cell_map,
    })
}

fn frame_corner_radius(frame_height: usize, frame_width: usize, cy: f64, cx: f64) -> f64 {
    // Outer corners of the frame in pixel-center coordinates.
    let ys = [-0.5, frame_height as f64 - 0.5];
    let xs = [-0.5, frame_width as f64 - 0.5];
    let mut rmax = 0.0f64;
    for y in ys {
        for x in xs {
            rmax = rmax.max((y - cy).hypot(x - cx));
        }
    }
    rmax
}

/// Composes a retina-like stack: pattern `t` equals `roi_fill` pattern `t`
/// inside the ROI; each periphery macro-cell carries one Bernoulli(1/2) bit
/// per pattern, drawn from substream `t` of `rng`.
pub fn compose_retina_stack(
    geom: &RetinaGeometry,
    roi_fill: &PatternStack,
    rng: &RngSpec,
) -> Result<PatternStack> {
    if roi_fill.height() != geom.roi.height || roi_fill.width() != geom.roi.width {
        return Err(Error::argument(format!(
            "roi fill is {}x{}, geometry roi is {}x{}",
            roi_fill.height(),
            roi_fill.width(),
            geom.roi.height,
            geom.roi.width
        )));
    }
    let count = roi_fill.count();
    let (h, w) = (geom.frame_height, geom.frame_width);
    let cells = geom.periphery_cell_count();
    let roi_area = geom.roi.area();
    let mut bits = Vec::with_capacity(count * h * w);
    for t in 0..count {
        // One draw per (ring, sector) cell, empty cells included, so the bit
        // assigned to a cell never depends on the roi placement.
        let mut stream = rng.stream(t as u64);
        let cell_bits: Vec<u8> = (0..cells).map(|_| (stream.next_u32() & 1) as u8).collect();
        let fill = roi_fill.pattern(t);
        for y in 0..h {
            for x in 0..w {
                let label = geom.label(y, x);
                bits.push(if label < roi_area {
                    fill[label]
                } else {
                    cell_bits[label - roi_area]
                });
            }
        }
    }
    PatternStack::new(count, h, w, bits)
}

/// Serializes the geometry (frame size, roi, rings, sectors, explicit cell
/// map) as a JSON document.
pub fn save_geometry(geom: &RetinaGeometry, path: impl AsRef<Path>) -> Result<()> {
    let json = serde_json::to_string_pretty(geom)
        .map_err(|e| Error::format(format!("geometry encode: {e}")))?;
    fs::write(path.as_ref(), json)?;
    Ok(())
}

pub fn load_geometry(path: impl AsRef<Path>) -> Result<RetinaGeometry> {
    let geom: RetinaGeometry = serde_json::from_str(&fs::read_to_string(path.as_ref())?)
        .map_err(|e| Error::format(format!("geometry decode: {e}")))?;
    if geom.cell_map.len() != geom.frame_height * geom.frame_width {
        return Err(Error::format("cell map length does not match frame"));
    }
    Ok(geom)
}
