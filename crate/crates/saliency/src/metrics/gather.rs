//! Gaze-value gathering with the local-maximum operator, control-point
//! sampling and histogram construction.

use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::centerbias::CenterBiasModel;
use crate::core::SaliencyMap;
use crate::error::{Error, Result};

/// Positive/negative saliency samples for one frame and one replicate.
#[derive(Debug, Clone)]
pub struct SampleSets {
    pub positives: Vec<f64>,
    pub negatives: Vec<f64>,
    pub sampler_id: SamplerId,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplerId {
    Uniform,
    CenterBias,
}

/// Control-point distribution for negative samples.
#[derive(Clone, Copy)]
pub enum ControlSampler<'a> {
    Uniform,
    CenterBias(&'a CenterBiasModel),
}

impl ControlSampler<'_> {
    pub fn id(&self) -> SamplerId {
        match self {
            ControlSampler::Uniform => SamplerId::Uniform,
            ControlSampler::CenterBias(_) => SamplerId::CenterBias,
        }
    }
}

/// Maximum raw-field value within `radius_px` of each (real-valued)
/// point; radius 0 degrades to nearest-pixel lookup.
pub fn gather_field_values(
    values: &[f64],
    width: usize,
    height: usize,
    points: &[(f64, f64)],
    radius_px: f64,
) -> Result<Vec<f64>> {
    if radius_px < 0.0 {
        return Err(Error::InvalidParameter {
            name: "radius_px",
            reason: format!("must be >= 0, got {radius_px}"),
        });
    }
    points
        .iter()
        .map(|&(x, y)| {
            if x < 0.0 || y < 0.0 || x >= width as f64 || y >= height as f64 {
                return Err(Error::OutOfBounds {
                    x,
                    y,
                    w: width,
                    h: height,
                });
            }
            if radius_px == 0.0 {
                let px = (x.round() as usize).min(width - 1);
                let py = (y.round() as usize).min(height - 1);
                return Ok(values[py * width + px]);
            }
            let x0 = ((x - radius_px).floor().max(0.0)) as usize;
            let x1 = ((x + radius_px).ceil() as usize).min(width - 1);
            let y0 = ((y - radius_px).floor().max(0.0)) as usize;
            let y1 = ((y + radius_px).ceil() as usize).min(height - 1);
            let r2 = radius_px * radius_px;
            let mut best = f64::NEG_INFINITY;
            for py in y0..=y1 {
                for px in x0..=x1 {
                    let d2 = (px as f64 - x).powi(2) + (py as f64 - y).powi(2);
                    if d2 <= r2 {
                        best = best.max(values[py * width + px]);
                    }
                }
            }
            if best == f64::NEG_INFINITY {
                // tiny radius with no pixel center inside the disk
                let px = (x.round() as usize).min(width - 1);
                let py = (y.round() as usize).min(height - 1);
                best = values[py * width + px];
            }
            Ok(best)
        })
        .collect()
}

/// [`gather_field_values`] over a saliency map.
pub fn gather_gaze_values(
    map: &SaliencyMap,
    points: &[(f64, f64)],
    radius_px: f64,
) -> Result<Vec<f64>> {
    gather_field_values(map.values(), map.width(), map.height(), points, radius_px)
}

/// Draw `n` control points from the sampler's distribution over a
/// `width` x `height` frame, resampling any draw that lands on an
/// excluded gaze pixel. Deterministic given `seed`.
pub fn sample_controls(
    width: usize,
    height: usize,
    n: usize,
    sampler: ControlSampler,
    seed: u64,
    exclusion: &[(f64, f64)],
) -> Result<Vec<(f64, f64)>> {
    if n == 0 {
        return Err(Error::Sampling("need at least one control point".into()));
    }
    let excluded: HashSet<(usize, usize)> = exclusion
        .iter()
        .map(|&(x, y)| {
            (
                (x.round() as usize).min(width.saturating_sub(1)),
                (y.round() as usize).min(height.saturating_sub(1)),
            )
        })
        .collect();
    // sampling is with replacement; only full exclusion is fatal
    if excluded.len() >= width * height {
        return Err(Error::Sampling(format!(
            "{width}x{height} frame has no pixels left after excluding {}",
            excluded.len()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = Vec::with_capacity(n);
    while points.len() < n {
        let (x, y) = match sampler {
            ControlSampler::Uniform => (
                rng.gen_range(0..width) as f64,
                rng.gen_range(0..height) as f64,
            ),
            ControlSampler::CenterBias(model) => model.sample_px(width, height, &mut rng),
        };
        let pixel = (
            (x.round() as usize).min(width - 1),
            (y.round() as usize).min(height - 1),
        );
        if excluded.contains(&pixel) {
            continue;
        }
        points.push((x, y));
    }
    Ok(points)
}

/// Histogram over [0, 1] with `r` uniform bins; mass sums to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub bins: usize,
    pub mass: Vec<f64>,
}

impl Histogram {
    /// Values on a bin edge go to the higher bin; the last bin is closed
    /// at 1.0.
    pub fn bin_of(value: f64, bins: usize) -> usize {
        ((value * bins as f64) as usize).min(bins - 1)
    }

    pub fn from_values(values: &[f64], bins: usize) -> Result<Histogram> {
        if values.is_empty() {
            return Err(Error::DegenerateInput("empty sample set".into()));
        }
        let mut mass = vec![0.0; bins];
        for &v in values {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::DegenerateInput(format!(
                    "histogram input {v} outside [0, 1]; normalize the map first"
                )));
            }
            mass[Histogram::bin_of(v, bins)] += 1.0;
        }
        let total = values.len() as f64;
        for m in &mut mass {
            *m /= total;
        }
        Ok(Histogram { bins, mass })
    }
}

/// Shared-bin histograms of the positive and negative sample values.
pub fn build_histograms(
    positives: &[f64],
    negatives: &[f64],
    bins: usize,
) -> Result<(Histogram, Histogram)> {
    Ok((
        Histogram::from_values(positives, bins)?,
        Histogram::from_values(negatives, bins)?,
    ))
}
