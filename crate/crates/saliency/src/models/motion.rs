//! Motion-vector based models: plain magnitude, PMES-style spatio-temporal
//! incoherence, and global-motion-compensated magnitude.

use crate::core::{upsample_block_map, FrameFeatures, FrameType, SaliencyMap};
use crate::error::Result;
use crate::ingest::SequenceBundle;

use super::{ModelOutput, SaliencyModel};

/// 4-parameter similarity motion model mapping a block center (x, y) to
/// (a x - b y + tx, b x + a y + ty). Identity is (1, 0, 0, 0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GlobalMotion {
    pub a: f64,
    pub b: f64,
    pub tx: f64,
    pub ty: f64,
}

impl GlobalMotion {
    pub const IDENTITY: GlobalMotion = GlobalMotion {
        a: 1.0,
        b: 0.0,
        tx: 0.0,
        ty: 0.0,
    };

    /// Predicted displacement (in px) of a point at (x, y).
    pub fn displacement(&self, x: f64, y: f64) -> (f64, f64) {
        (
            self.a * x - self.b * y + self.tx - x,
            self.b * x + self.a * y + self.ty - y,
        )
    }
}

/// Result of a global-motion fit; `degenerate` is set when fewer than
/// 4 usable motion vectors were available and identity was returned.
#[derive(Debug, Clone, Copy)]
pub struct GlobalMotionFit {
    pub motion: GlobalMotion,
    pub degenerate: bool,
}

fn solve4(mut m: [[f64; 5]; 4]) -> Option<[f64; 4]> {
    for col in 0..4 {
        let pivot = (col..4).max_by(|a, b| m[*a][col].abs().total_cmp(&m[*b][col].abs()))?;
        if m[pivot][col].abs() < 1e-12 {
            return None;
        }
        m.swap(col, pivot);
        let p = m[col][col];
        for k in col..5 {
            m[col][k] /= p;
        }
        for row in 0..4 {
            if row != col {
                let f = m[row][col];
                for k in col..5 {
                    m[row][k] -= f * m[col][k];
                }
            }
        }
    }
    Some([m[0][4], m[1][4], m[2][4], m[3][4]])
}

fn fit_once(samples: &[(f64, f64, f64, f64)]) -> Option<GlobalMotion> {
    // rows [x, -y, 1, 0] . theta = x + u and [y, x, 0, 1] . theta = y + v
    let mut ata = [[0.0; 5]; 4];
    let mut add = |row: [f64; 4], rhs: f64| {
        for i in 0..4 {
            for j in 0..4 {
                ata[i][j] += row[i] * row[j];
            }
            ata[i][4] += row[i] * rhs;
        }
    };
    for &(x, y, u, v) in samples {
        add([x, -y, 1.0, 0.0], x + u);
        add([y, x, 0.0, 1.0], y + v);
    }
    let [a, b, tx, ty] = solve4(ata)?;
    Some(GlobalMotion { a, b, tx, ty })
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(|a, b| a.total_cmp(b));
    let n = values.len();
    if n == 0 {
        0.0
    } else if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

/// Robust least-squares fit of the similarity model to a block-center
/// displacement field: an initial fit plus two reweighting passes that
/// discard samples with residual above twice the median residual.
pub fn fit_global_motion(frame: &FrameFeatures) -> GlobalMotionFit {
    let mut samples: Vec<(f64, f64, f64, f64)> = Vec::new();
    for by in 0..frame.grid_h {
        for bx in 0..frame.grid_w {
            if let Some(mv) = frame.block(bx, by).mv {
                let (cx, cy) = frame.block_center(bx, by);
                let (u, v) = mv.displacement_px();
                samples.push((cx, cy, u, v));
            }
        }
    }
    if samples.len() < 4 {
        return GlobalMotionFit {
            motion: GlobalMotion::IDENTITY,
            degenerate: true,
        };
    }
    let mut motion = match fit_once(&samples) {
        Some(m) => m,
        None => {
            return GlobalMotionFit {
                motion: GlobalMotion::IDENTITY,
                degenerate: true,
            }
        }
    };
    for _ in 0..2 {
        let mut residuals: Vec<f64> = samples
            .iter()
            .map(|&(x, y, u, v)| {
                let (pu, pv) = motion.displacement(x, y);
                ((pu - u).powi(2) + (pv - v).powi(2)).sqrt()
            })
            .collect();
        let med = median(&mut residuals.clone());
        let threshold = (2.0 * med).max(1e-9);
        let kept: Vec<(f64, f64, f64, f64)> = samples
            .iter()
            .zip(residuals.drain(..))
            .filter(|(_, r)| *r <= threshold)
            .map(|(s, _)| *s)
            .collect();
        if kept.len() < 4 {
            break;
        }
        if let Some(m) = fit_once(&kept) {
            motion = m;
            samples = kept;
        } else {
            break;
        }
    }
    GlobalMotionFit {
        motion,
        degenerate: false,
    }
}

/// Per-block motion magnitude in pixels.
pub fn mvmag_block_values(frame: &FrameFeatures) -> Vec<f64> {
    frame
        .blocks
        .iter()
        .map(|b| b.mv.map(|mv| mv.magnitude_px()).unwrap_or(0.0))
        .collect()
}

/// Per-block residual motion magnitude after removing the fitted global
/// motion from each vector.
pub fn gmc_residual_block_values(frame: &FrameFeatures) -> Vec<f64> {
    let fit = fit_global_motion(frame);
    let mut values = vec![0.0; frame.blocks.len()];
    for by in 0..frame.grid_h {
        for bx in 0..frame.grid_w {
            if let Some(mv) = frame.block(bx, by).mv {
                let (cx, cy) = frame.block_center(bx, by);
                let (gu, gv) = fit.motion.displacement(cx, cy);
                let (u, v) = mv.displacement_px();
                values[by * frame.grid_w + bx] = ((u - gu).powi(2) + (v - gv).powi(2)).sqrt();
            }
        }
    }
    values
}

/// Motion-magnitude map for one P-frame.
pub fn model_mvmag(
    frame: &FrameFeatures,
    out_w: usize,
    out_h: usize,
    smooth_sigma: f64,
) -> Result<SaliencyMap> {
    upsample_block_map(
        &mvmag_block_values(frame),
        frame.grid_w,
        frame.grid_h,
        frame.block_size,
        out_w,
        out_h,
        smooth_sigma,
    )
}

/// GMC-compensated motion-magnitude map for one P-frame.
pub fn model_gmc_mvmag(
    frame: &FrameFeatures,
    out_w: usize,
    out_h: usize,
    smooth_sigma: f64,
) -> Result<SaliencyMap> {
    upsample_block_map(
        &gmc_residual_block_values(frame),
        frame.grid_w,
        frame.grid_h,
        frame.block_size,
        out_w,
        out_h,
        smooth_sigma,
    )
}

/// PMES-style block values over a causal spatio-temporal window: mean MV
/// magnitude times angular incoherence (1 - circular mean resultant
/// length), both computed over vectors with magnitude above `epsilon_px`.
pub fn pmes_block_values(
    window: &[&FrameFeatures],
    window_s: usize,
    epsilon_px: f64,
) -> Vec<f64> {
    let current = window.last().expect("window is nonempty");
    let (gw, gh) = (current.grid_w, current.grid_h);
    let radius = (window_s / 2) as i64;
    let mut values = vec![0.0; gw * gh];
    for by in 0..gh as i64 {
        for bx in 0..gw as i64 {
            let mut mags = Vec::new();
            let mut sum_cos = 0.0;
            let mut sum_sin = 0.0;
            for frame in window {
                for dy in -radius..=radius {
                    for dx in -radius..=radius {
                        let (nx, ny) = (bx + dx, by + dy);
                        if nx < 0 || ny < 0 || nx >= gw as i64 || ny >= gh as i64 {
                            continue;
                        }
                        if let Some(mv) = frame.block(nx as usize, ny as usize).mv {
                            let mag = mv.magnitude_px();
                            if mag > epsilon_px {
                                let angle = (mv.dy as f64).atan2(mv.dx as f64);
                                sum_cos += angle.cos();
                                sum_sin += angle.sin();
                                mags.push(mag);
                            }
                        }
                    }
                }
            }
            if !mags.is_empty() {
                let n = mags.len() as f64;
                // aligned vectors can push the resultant past 1 by an ulp
                let resultant = ((sum_cos * sum_cos + sum_sin * sum_sin).sqrt() / n).min(1.0);
                let mean_mag = mags.iter().sum::<f64>() / n;
                values[(by as usize) * gw + bx as usize] = mean_mag * (1.0 - resultant);
            }
        }
    }
    values
}

/// PMES-style map for the last frame of a causal window.
pub fn model_pmes_style(
    window: &[&FrameFeatures],
    window_s: usize,
    epsilon_px: f64,
    out_w: usize,
    out_h: usize,
    smooth_sigma: f64,
) -> Result<SaliencyMap> {
    let current = window.last().expect("window is nonempty");
    upsample_block_map(
        &pmes_block_values(window, window_s, epsilon_px),
        current.grid_w,
        current.grid_h,
        current.block_size,
        out_w,
        out_h,
        smooth_sigma,
    )
}

fn p_frame_maps(
    bundle: &SequenceBundle,
    mut per_frame: impl FnMut(usize, &FrameFeatures) -> Result<SaliencyMap>,
) -> Result<Vec<Option<SaliencyMap>>> {
    bundle
        .frames
        .iter()
        .enumerate()
        .map(|(i, f)| match f.frame_type {
            FrameType::P => per_frame(i, f).map(Some),
            FrameType::I => Ok(None),
        })
        .collect()
}

pub struct MvMagModel {
    pub smooth_sigma: f64,
}

impl SaliencyModel for MvMagModel {
    fn id(&self) -> &str {
        "mvmag"
    }

    fn score_sequence(&self, bundle: &SequenceBundle) -> Result<ModelOutput> {
        let (w, h) = bundle.map_dims();
        let maps = p_frame_maps(bundle, |_, f| model_mvmag(f, w, h, self.smooth_sigma))?;
        Ok(ModelOutput {
            model_id: self.id().to_string(),
            maps,
            coverage: vec![FrameType::P],
        })
    }
}

pub struct GmcMvMagModel {
    pub smooth_sigma: f64,
}

impl SaliencyModel for GmcMvMagModel {
    fn id(&self) -> &str {
        "gmc-mvmag"
    }

    fn score_sequence(&self, bundle: &SequenceBundle) -> Result<ModelOutput> {
        let (w, h) = bundle.map_dims();
        let maps = p_frame_maps(bundle, |_, f| model_gmc_mvmag(f, w, h, self.smooth_sigma))?;
        Ok(ModelOutput {
            model_id: self.id().to_string(),
            maps,
            coverage: vec![FrameType::P],
        })
    }
}

pub struct PmesModel {
    pub window_s: usize,
    pub window_t: usize,
    pub epsilon_px: f64,
    pub smooth_sigma: f64,
}

impl SaliencyModel for PmesModel {
    fn id(&self) -> &str {
        "pmes"
    }

    fn score_sequence(&self, bundle: &SequenceBundle) -> Result<ModelOutput> {
        let (w, h) = bundle.map_dims();
        let maps = bundle
            .frames
            .iter()
            .enumerate()
            .map(|(i, f)| match f.frame_type {
                FrameType::I => Ok(None),
                FrameType::P => {
                    let start = (i + 1).saturating_sub(self.window_t);
                    let window: Vec<&FrameFeatures> = bundle.frames[start..=i]
                        .iter()
                        .filter(|f| f.frame_type == FrameType::P)
                        .collect();
                    model_pmes_style(&window, self.window_s, self.epsilon_px, w, h, self.smooth_sigma)
                        .map(Some)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ModelOutput {
            model_id: self.id().to_string(),
            maps,
            coverage: vec![FrameType::P],
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::{BlockFeatures, MotionVector};

    pub fn frame_with_mvs(grid_w: usize, grid_h: usize, mv_of: impl Fn(usize, usize) -> MotionVector) -> FrameFeatures {
        let mut blocks = Vec::with_capacity(grid_w * grid_h);
        for by in 0..grid_h {
            for bx in 0..grid_w {
                blocks.push(BlockFeatures {
                    mv: Some(mv_of(bx, by)),
                    dct: vec![],
                    bits: 0,
                });
            }
        }
        FrameFeatures {
            frame: 0,
            frame_type: FrameType::P,
            block_size: 8,
            grid_w,
            grid_h,
            blocks,
        }
    }

    /// Quarter-pel MV field synthesized from a similarity model, rounding
    /// to integers; with integer-friendly parameters the rounding is exact.
    fn field_from_motion(grid: usize, motion: GlobalMotion) -> FrameFeatures {
        frame_with_mvs(grid, grid, |bx, by| {
            let (cx, cy) = (bx as f64 * 8.0 + 4.0, by as f64 * 8.0 + 4.0);
            let (u, v) = motion.displacement(cx, cy);
            MotionVector {
                dx: (u * 4.0).round() as i32,
                dy: (v * 4.0).round() as i32,
            }
        })
    }

    #[test]
    fn fit_recovers_pure_translation() {
        let truth = GlobalMotion {
            a: 1.0,
            b: 0.0,
            tx: 3.0,
            ty: -1.0,
        };
        let frame = field_from_motion(8, truth);
        let fit = fit_global_motion(&frame);
        assert!(!fit.degenerate);
        assert!((fit.motion.a - 1.0).abs() < 1e-6);
        assert!((fit.motion.b).abs() < 1e-6);
        assert!((fit.motion.tx - 3.0).abs() < 1e-6);
        assert!((fit.motion.ty + 1.0).abs() < 1e-6);
    }

    #[test]
    fn fit_recovers_zoom() {
        // a = 1.02 keeps quarter-pel displacements off-integer, so allow
        // the quantization error of the synthesized field
        let truth = GlobalMotion {
            a: 1.02,
            b: 0.0,
            tx: 0.0,
            ty: 0.0,
        };
        let frame = field_from_motion(16, truth);
        let fit = fit_global_motion(&frame);
        assert!((fit.motion.a - 1.02).abs() < 2e-3);
        assert!((fit.motion.b).abs() < 2e-3);
    }

    #[test]
    fn fit_few_blocks_returns_identity_flag() {
        let mut frame = frame_with_mvs(2, 2, |_, _| MotionVector { dx: 4, dy: 4 });
        frame.blocks[0].mv = None;
        let fit = fit_global_motion(&frame);
        assert!(fit.degenerate);
        assert_eq!(fit.motion, GlobalMotion::IDENTITY);
    }

    #[test]
    fn mvmag_zero_field_zero_map() {
        let frame = frame_with_mvs(4, 4, |_, _| MotionVector::ZERO);
        let m = model_mvmag(&frame, 32, 32, 0.0).unwrap();
        assert!(m.values().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn mvmag_unit_conversion() {
        let frame = frame_with_mvs(4, 4, |bx, by| {
            if (bx, by) == (1, 2) {
                MotionVector { dx: 4, dy: 0 }
            } else {
                MotionVector::ZERO
            }
        });
        let vals = mvmag_block_values(&frame);
        assert_eq!(vals[2 * 4 + 1], 1.0);
        assert_eq!(vals.iter().filter(|v| **v != 0.0).count(), 1);
    }

    #[test]
    fn mvmag_elementwise_oracle() {
        let frame = frame_with_mvs(5, 3, |bx, by| MotionVector {
            dx: (bx as i32 * 3 - 4),
            dy: (by as i32 * 5 - 2),
        });
        let vals = mvmag_block_values(&frame);
        for by in 0..3 {
            for bx in 0..5 {
                let (dx, dy) = (bx as f64 * 3.0 - 4.0, by as f64 * 5.0 - 2.0);
                let expect = (dx * dx + dy * dy).sqrt() / 4.0;
                assert!((vals[by * 5 + bx] - expect).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn pmes_uniform_field_all_zero() {
        let frame = frame_with_mvs(6, 6, |_, _| MotionVector { dx: 8, dy: 4 });
        let vals = pmes_block_values(&[&frame], 3, 0.5);
        assert!(vals.iter().all(|v| v.abs() < 1e-12));
    }

    #[test]
    fn pmes_divergent_angles_score_magnitude() {
        // 4 equal-magnitude MVs at angles 0, 90, 180, 270: resultant 0
        let mvs = [
            MotionVector { dx: 8, dy: 0 },
            MotionVector { dx: 0, dy: 8 },
            MotionVector { dx: -8, dy: 0 },
            MotionVector { dx: 0, dy: -8 },
        ];
        let frame = frame_with_mvs(2, 2, |bx, by| mvs[by * 2 + bx]);
        let vals = pmes_block_values(&[&frame], 3, 0.5);
        // every block's 3x3 window covers the whole 2x2 grid
        for v in vals {
            assert!((v - 2.0).abs() < 1e-9, "expected magnitude 2.0, got {v}");
        }
    }

    #[test]
    fn pmes_argmax_inside_divergent_patch() {
        let frame = frame_with_mvs(12, 12, |bx, by| {
            if (4..7).contains(&bx) && (4..7).contains(&by) {
                // strong divergent motion inside the patch
                let angle = (bx * 3 + by) as f64;
                MotionVector {
                    dx: (40.0 * angle.cos()) as i32,
                    dy: (40.0 * angle.sin()) as i32,
                }
            } else {
                MotionVector::ZERO
            }
        });
        let vals = pmes_block_values(&[&frame], 3, 0.5);
        let argmax = vals
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        let (bx, by) = (argmax % 12, argmax / 12);
        assert!((3..8).contains(&bx) && (3..8).contains(&by), "argmax at ({bx}, {by})");
    }

    #[test]
    fn gmc_pure_pan_zeroed() {
        let frame = field_from_motion(8, GlobalMotion { a: 1.0, b: 0.0, tx: 2.0, ty: 1.0 });
        let vals = gmc_residual_block_values(&frame);
        assert!(vals.iter().all(|v| v.abs() < 1e-9));
    }

    #[test]
    fn gmc_pan_plus_object_argmax_at_object() {
        let mut frame = field_from_motion(8, GlobalMotion { a: 1.0, b: 0.0, tx: 2.0, ty: 0.0 });
        frame.blocks[3 * 8 + 5].mv = Some(MotionVector { dx: -20, dy: 16 });
        let vals = gmc_residual_block_values(&frame);
        let argmax = vals
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        assert_eq!(argmax, 3 * 8 + 5);
    }

    #[test]
    fn gmc_zero_field_matches_mvmag() {
        let frame = frame_with_mvs(6, 6, |bx, _| {
            if bx == 2 {
                MotionVector { dx: 6, dy: -2 }
            } else {
                MotionVector::ZERO
            }
        });
        // mostly-zero field: robust fit converges to identity
        let fit = fit_global_motion(&frame);
        assert!((fit.motion.a - 1.0).abs() < 1e-9 && fit.motion.tx.abs() < 1e-9);
        let a = gmc_residual_block_values(&frame);
        let b = mvmag_block_values(&frame);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-9);
        }
    }
}
