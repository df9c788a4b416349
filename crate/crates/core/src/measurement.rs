//! Bucket-detector measurement records.
//!
//! Records serialize to CSV (`t,intensity`) with noise metadata in a JSON
//! sidecar named `<csv>.meta.json`, written only when noise was injected.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sequence of bucket intensities, one per illumination pattern.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    intensities: Vec<f64>,
    noise_power_dbw: Option<f64>,
    rng_seed: Option<u64>,
}

impl MeasurementRecord {
    /// A record with no noise metadata.
    pub fn noiseless(intensities: Vec<f64>) -> Self {
        MeasurementRecord {
            intensities,
            noise_power_dbw: None,
            rng_seed: None,
        }
    }

    pub(crate) fn with_noise(intensities: Vec<f64>, power_dbw: f64, seed: u64) -> Self {
        MeasurementRecord {
            intensities,
            noise_power_dbw: Some(power_dbw),
            rng_seed: Some(seed),
        }
    }

    pub fn intensities(&self) -> &[f64] {
        &self.intensities
    }

    pub fn count(&self) -> usize {
        self.intensities.len()
    }

    pub fn is_noisy(&self) -> bool {
        self.noise_power_dbw.is_some()
    }

    pub fn noise_power_dbw(&self) -> Option<f64> {
        self.noise_power_dbw
    }

    pub fn rng_seed(&self) -> Option<u64> {
        self.rng_seed
    }
}

#[derive(Serialize, Deserialize)]
struct NoiseSidecar {
    noise_power_dbw: f64,
    rng_seed: u64,
}

fn sidecar_path(csv_path: &Path) -> PathBuf {
    let mut name = csv_path.as_os_str().to_owned();
    name.push(".meta.json");
    PathBuf::from(name)
}

/// Writes the record as CSV; if the record carries noise metadata, a JSON
/// sidecar is written beside it.
pub fn save_measurements(rec: &MeasurementRecord, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut out = String::from("t,intensity\n");
    for (t, v) in rec.intensities.iter().enumerate() {
        // `{}` prints the shortest representation that round-trips exactly.
        out.push_str(&format!("{t},{v}\n"));
    }
    fs::write(path, out)?;
    if let (Some(p), Some(s)) = (rec.noise_power_dbw, rec.rng_seed) {
        let sidecar = NoiseSidecar {
            noise_power_dbw: p,
            rng_seed: s,
        };
        let json = serde_json::to_string_pretty(&sidecar)
            .map_err(|e| Error::format(format!("sidecar encode: {e}")))?;
        fs::write(sidecar_path(path), json)?;
    }
    Ok(())
}

/// Reads a CSV written by [`save_measurements`], picking up the noise
/// sidecar when present.
pub fn load_measurements(path: impl AsRef<Path>) -> Result<MeasurementRecord> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    match lines.next() {
        Some("t,intensity") => {}
        other => {
            return Err(Error::format(format!(
                "bad measurement CSV header {other:?}"
            )))
        }
    }
    let mut intensities = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let (idx, value) = line
            .split_once(',')
            .ok_or_else(|| Error::format(format!("line {}: missing comma", i + 2)))?;
        let idx: usize = idx
            .parse()
            .map_err(|_| Error::format(format!("line {}: bad index {idx:?}", i + 2)))?;
        if idx != intensities.len() {
            return Err(Error::format(format!(
                "line {}: index {idx} out of order",
                i + 2
            )));
        }
        let value: f64 = value
            .parse()
            .map_err(|_| Error::format(format!("line {}: bad intensity {value:?}", i + 2)))?;
        intensities.push(value);
    }
    let sidecar = sidecar_path(path);
    if sidecar.exists() {
        let meta: NoiseSidecar = serde_json::from_str(&fs::read_to_string(&sidecar)?)
            .map_err(|e| Error::format(format!("sidecar decode: {e}")))?;
        Ok(MeasurementRecord::with_noise(
            intensities,
            meta.noise_power_dbw,
            meta.rng_seed,
        ))
    } else {
        Ok(MeasurementRecord::noiseless(intensities))
    }
}
