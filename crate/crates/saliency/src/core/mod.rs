//! Domain types shared by all modules: viewing geometry, saliency maps,
//! gaze points and block-level frame features.

mod geometry;
mod map;

pub use geometry::{pixels_per_degree, ViewingGeometry};
pub use map::{gaussian_blob, minmax_normalize, upsample_block_map, GroundTruthMap, SaliencyMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which of the two gaze recordings a point belongs to.
///
/// `Primary` is the ground-truth viewing (first viewing / right eye);
/// `Counterpart` is the one benchmark models are built from (second
/// viewing / left eye).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Viewing {
    Primary,
    Counterpart,
}

impl std::fmt::Display for Viewing {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Viewing::Primary => write!(f, "primary"),
            Viewing::Counterpart => write!(f, "counterpart"),
        }
    }
}

/// One recorded eye position, in continuous display pixel coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct GazePoint {
    pub x: f64,
    pub y: f64,
    pub frame: usize,
    pub observer: String,
    pub viewing: Viewing,
}

/// Block motion vector in quarter-pel units.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MotionVector {
    pub dx: i32,
    pub dy: i32,
}

impl MotionVector {
    pub const ZERO: MotionVector = MotionVector { dx: 0, dy: 0 };

    /// Magnitude in pixels (quarter-pel units divided by 4).
    pub fn magnitude_px(self) -> f64 {
        ((self.dx as f64).powi(2) + (self.dy as f64).powi(2)).sqrt() / 4.0
    }

    /// Displacement in pixels.
    pub fn displacement_px(self) -> (f64, f64) {
        (self.dx as f64 / 4.0, self.dy as f64 / 4.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FrameType {
    I,
    P,
}

impl std::fmt::Display for FrameType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FrameType::I => write!(f, "I"),
            FrameType::P => write!(f, "P"),
        }
    }
}

/// Features of one block: motion vector (P-frames only), zig-zag DCT
/// levels (DCT-P in I-frames, DCT-R in P-frames) and coded bits.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct BlockFeatures {
    pub mv: Option<MotionVector>,
    pub dct: Vec<i32>,
    pub bits: u32,
}

/// One frame's block grid of compressed-domain features.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameFeatures {
    pub frame: usize,
    pub frame_type: FrameType,
    pub block_size: usize,
    pub grid_w: usize,
    pub grid_h: usize,
    pub blocks: Vec<BlockFeatures>,
}

impl FrameFeatures {
    pub fn block(&self, bx: usize, by: usize) -> &BlockFeatures {
        &self.blocks[by * self.grid_w + bx]
    }

    /// Center of block (bx, by) in pixel coordinates.
    pub fn block_center(&self, bx: usize, by: usize) -> (f64, f64) {
        let s = self.block_size as f64;
        (bx as f64 * s + s / 2.0, by as f64 * s + s / 2.0)
    }

    /// Checks the structural invariants: grid covers the blocks vector,
    /// block size is one of 4/8/16 and I-frames carry no motion vectors.
    pub fn validate(&self) -> Result<()> {
        if !matches!(self.block_size, 4 | 8 | 16) {
            return Err(Error::DegenerateInput(format!(
                "frame {}: block_size {} not in {{4, 8, 16}}",
                self.frame, self.block_size
            )));
        }
        if self.blocks.len() != self.grid_w * self.grid_h {
            return Err(Error::DimensionMismatch(format!(
                "frame {}: {} blocks for a {}x{} grid",
                self.frame,
                self.blocks.len(),
                self.grid_w,
                self.grid_h
            )));
        }
        if self.frame_type == FrameType::I && self.blocks.iter().any(|b| b.mv.is_some()) {
            return Err(Error::DegenerateInput(format!(
                "frame {}: I-frame carries motion vectors",
                self.frame
            )));
        }
        Ok(())
    }
}
