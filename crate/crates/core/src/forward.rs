//! Bucket-detector simulation: each measurement is the inner product of one
//! binary pattern with the object, optionally corrupted by additive white
//! Gaussian noise of a given power.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::image::Image;
use crate::measurement::MeasurementRecord;
use crate::rng::RngSpec;
use crate::stack::PatternStack;

/// White Gaussian noise at `power_dbw` decibel-watts: variance is
/// `10^(power_dbw/10)`, matching MATLAB `wgn` at unit load.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub power_dbw: f64,
    pub rng: RngSpec,
}

impl NoiseSpec {
    pub fn new(power_dbw: f64, rng: RngSpec) -> Self {
        NoiseSpec { power_dbw, rng }
    }

    pub fn variance(&self) -> f64 {
        10f64.powf(self.power_dbw / 10.0)
    }
}

/// Simulates the bucket detector: `intensities[t] = sum_xy S_t(x,y) O(x,y)`.
pub fn measure(stack: &PatternStack, object: &Image) -> Result<MeasurementRecord> {
    if stack.height() != object.height() || stack.width() != object.width() {
        return Err(Error::argument(format!(
            "stack is {}x{}, object is {}x{}",
            stack.height(),
            stack.width(),
            object.height(),
            object.width()
        )));
    }
    let values = object.values();
    let intensities = stack
        .patterns()
        .map(|pattern| {
            pattern
                .iter()
                .zip(values)
                .filter(|(&bit, _)| bit == 1)
                .map(|(_, &v)| v)
                .sum()
        })
        .collect();
    Ok(MeasurementRecord::noiseless(intensities))
}

/// Adds white Gaussian noise to a noiseless record. The sample for index `t`
/// comes from substream `t`, so the draw is independent of evaluation order.
pub fn add_wgn(rec: &MeasurementRecord, noise: &NoiseSpec) -> Result<MeasurementRecord> {
    if rec.is_noisy() {
        return Err(Error::State(
            "record already carries noise metadata".to_string(),
        ));
    }
    let sigma = noise.variance().sqrt();
    let noisy = rec
        .intensities()
        .iter()
        .enumerate()
        .map(|(t, &v)| {
            let mut stream = noise.rng.stream(t as u64);
            let g: f64 = stream.sample(StandardNormal);
            v + sigma * g
        })
        .collect();
    Ok(MeasurementRecord::with_noise(
        noisy,
        noise.power_dbw,
        noise.rng.seed,
    ))
}
