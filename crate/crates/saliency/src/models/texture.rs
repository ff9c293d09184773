//! DCT-contrast and bit-count models.

use crate::core::{minmax_normalize, upsample_block_map, FrameFeatures, FrameType, SaliencyMap};
use crate::error::Result;
use crate::ingest::SequenceBundle;

use super::{ModelOutput, SaliencyModel};

fn block_feature(frame: &FrameFeatures, idx: usize, coeff_count: usize) -> Vec<f64> {
    let dct = &frame.blocks[idx].dct;
    (0..coeff_count)
        .map(|i| dct.get(i).copied().unwrap_or(0) as f64)
        .collect()
}

/// Per-block DCT contrast: sum over all other blocks of the feature
/// distance weighted by exp(-d / decay), d the distance between block
/// centers in pixels. Feature is the first `coeff_count` zig-zag levels.
pub fn csdct_block_values(frame: &FrameFeatures, decay: f64, coeff_count: usize) -> Vec<f64> {
    let n = frame.blocks.len();
    let features: Vec<Vec<f64>> = (0..n).map(|i| block_feature(frame, i, coeff_count)).collect();
    let centers: Vec<(f64, f64)> = (0..n)
        .map(|i| frame.block_center(i % frame.grid_w, i / frame.grid_w))
        .collect();
    let mut values = vec![0.0; n];
    for i in 0..n {
        let mut acc = 0.0;
        for j in 0..n {
            if i == j {
                continue;
            }
            let feat_dist: f64 = features[i]
                .iter()
                .zip(&features[j])
                .map(|(a, b)| (a - b).powi(2))
                .sum::<f64>()
                .sqrt();
            let d = ((centers[i].0 - centers[j].0).powi(2)
                + (centers[i].1 - centers[j].1).powi(2))
            .sqrt();
            acc += feat_dist * (-d / decay).exp();
        }
        values[i] = acc;
    }
    values
}

/// DCT-contrast map for one frame (I or P), normalized per frame.
pub fn model_csdct_style(
    frame: &FrameFeatures,
    decay: f64,
    coeff_count: usize,
    out_w: usize,
    out_h: usize,
    smooth_sigma: f64,
) -> Result<SaliencyMap> {
    let values = csdct_block_values(frame, decay, coeff_count);
    let map = upsample_block_map(
        &values,
        frame.grid_w,
        frame.grid_h,
        frame.block_size,
        out_w,
        out_h,
        smooth_sigma,
    )?;
    Ok(minmax_normalize(&map))
}

/// Per-block bits normalized to a 16x16-equivalent area, averaged over
/// the last `temporal_smooth` P-frames (causal, including the current).
pub fn obdl_block_values(window: &[&FrameFeatures]) -> Vec<f64> {
    let current = window.last().expect("window is nonempty");
    let n = current.blocks.len();
    let mut values = vec![0.0; n];
    for frame in window {
        let area_scale = (16.0 * 16.0) / (frame.block_size as f64 * frame.block_size as f64);
        for (i, b) in frame.blocks.iter().enumerate().take(n) {
            values[i] += b.bits as f64 * area_scale;
        }
    }
    let count = window.len() as f64;
    for v in &mut values {
        *v /= count;
    }
    values
}

/// Bits-per-block map for the last P-frame of a causal window,
/// frame-normalized and upsampled.
pub fn model_obdl_style(
    window: &[&FrameFeatures],
    out_w: usize,
    out_h: usize,
    smooth_sigma: f64,
) -> Result<SaliencyMap> {
    let current = window.last().expect("window is nonempty");
    let values = obdl_block_values(window);
    let map = upsample_block_map(
        &values,
        current.grid_w,
        current.grid_h,
        current.block_size,
        out_w,
        out_h,
        smooth_sigma,
    )?;
    Ok(minmax_normalize(&map))
}

pub struct CsDctModel {
    pub decay: f64,
    pub coeff_count: usize,
    pub smooth_sigma: f64,
}

impl SaliencyModel for CsDctModel {
    fn id(&self) -> &str {
        "csdct"
    }

    fn score_sequence(&self, bundle: &SequenceBundle) -> Result<ModelOutput> {
        let (w, h) = bundle.map_dims();
        let maps = bundle
            .frames
            .iter()
            .map(|f| {
                model_csdct_style(f, self.decay, self.coeff_count, w, h, self.smooth_sigma)
                    .map(Some)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ModelOutput {
            model_id: self.id().to_string(),
            maps,
            coverage: vec![FrameType::I, FrameType::P],
        })
    }
}

pub struct ObdlModel {
    pub temporal_smooth: usize,
    pub smooth_sigma: f64,
}

impl SaliencyModel for ObdlModel {
    fn id(&self) -> &str {
        "obdl"
    }

    fn score_sequence(&self, bundle: &SequenceBundle) -> Result<ModelOutput> {
        let (w, h) = bundle.map_dims();
        let all_zero = bundle
            .frames
            .iter()
            .all(|f| f.blocks.iter().all(|b| b.bits == 0));
        if all_zero && !bundle.frames.is_empty() {
            eprintln!(
                "warning: sequence {:?}: every block has zero bits, obdl maps are all zero",
                bundle.sequence_id
            );
        }
        let p_indices: Vec<usize> = bundle
            .frames
            .iter()
            .enumerate()
            .filter(|(_, f)| f.frame_type == FrameType::P)
            .map(|(i, _)| i)
            .collect();
        let mut maps: Vec<Option<SaliencyMap>> = vec![None; bundle.frame_count()];
        for (pos, &i) in p_indices.iter().enumerate() {
            let start = (pos + 1).saturating_sub(self.temporal_smooth);
            let window: Vec<&FrameFeatures> = p_indices[start..=pos]
                .iter()
                .map(|&j| &bundle.frames[j])
                .collect();
            maps[i] = Some(model_obdl_style(&window, w, h, self.smooth_sigma)?);
        }
        Ok(ModelOutput {
            model_id: self.id().to_string(),
            maps,
            coverage: vec![FrameType::P],
        })
    }
}
