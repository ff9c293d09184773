//! The pluggable saliency-model suite: gaze-derived benchmarks (GAUSS, IO)
//! and five compressed-domain models, all producing one map per frame.

mod benchmark;
mod motion;
mod texture;

pub use benchmark::{model_gauss, model_io};
pub use motion::{
    fit_global_motion, model_gmc_mvmag, model_mvmag, model_pmes_style, GlobalMotion,
    GlobalMotionFit,
};
pub use texture::{model_csdct_style, model_obdl_style};

use crate::core::{FrameType, SaliencyMap};
use crate::error::{Error, Result};
use crate::ingest::SequenceBundle;

/// Per-sequence output of one model: a map per scored frame, `None` for
/// frame types the model declares it does not cover.
#[derive(Debug, Clone)]
pub struct ModelOutput {
    pub model_id: String,
    pub maps: Vec<Option<SaliencyMap>>,
    /// Frame types this model scores.
    pub coverage: Vec<FrameType>,
}

impl ModelOutput {
    pub fn scored_frames(&self) -> impl Iterator<Item = (usize, &SaliencyMap)> {
        self.maps
            .iter()
            .enumerate()
            .filter_map(|(i, m)| m.as_ref().map(|m| (i, m)))
    }
}

/// A saliency model that can score a whole sequence.
pub trait SaliencyModel: Send + Sync {
    fn id(&self) -> &str;
    fn score_sequence(&self, bundle: &SequenceBundle) -> Result<ModelOutput>;
}

fn param_f64(params: &toml::Table, key: &str, default: f64) -> Result<f64> {
    match params.get(key) {
        None => Ok(default),
        Some(v) => v
            .as_float()
            .or_else(|| v.as_integer().map(|i| i as f64))
            .ok_or_else(|| Error::Config(format!("model parameter {key} must be a number"))),
    }
}

fn param_usize(params: &toml::Table, key: &str, default: usize) -> Result<usize> {
    match params.get(key) {
        None => Ok(default),
        Some(v) => v
            .as_integer()
            .filter(|i| *i >= 0)
            .map(|i| i as usize)
            .ok_or_else(|| Error::Config(format!("model parameter {key} must be a nonnegative integer"))),
    }
}

/// Registered model ids, in canonical order.
pub const MODEL_IDS: [&str; 7] = ["gauss", "io", "mvmag", "pmes", "csdct", "obdl", "gmc-mvmag"];

/// Instantiate a model by registry id with its manifest parameters.
pub fn build_model(id: &str, params: &toml::Table) -> Result<Box<dyn SaliencyModel>> {
    match id {
        "gauss" => Ok(Box::new(benchmark::GaussModel)),
        "io" => Ok(Box::new(benchmark::IoModel)),
        "mvmag" => Ok(Box::new(motion::MvMagModel {
            smooth_sigma: param_f64(params, "smooth_sigma", 8.0)?,
        })),
        "pmes" => {
            let window_s = param_usize(params, "window_s", 3)?;
            let window_t = param_usize(params, "window_t", 3)?;
            if window_s < 1 || window_t < 1 {
                return Err(Error::InvalidParameter {
                    name: "window",
                    reason: "window_s and window_t must be >= 1".into(),
                });
            }
            Ok(Box::new(motion::PmesModel {
                window_s,
                window_t,
                epsilon_px: param_f64(params, "epsilon_px", 0.5)?,
                smooth_sigma: param_f64(params, "smooth_sigma", 8.0)?,
            }))
        }
        "csdct" => {
            let decay = param_f64(params, "decay", 64.0)?;
            if !(decay > 0.0) {
                return Err(Error::InvalidParameter {
                    name: "decay",
                    reason: format!("must be > 0, got {decay}"),
                });
            }
            Ok(Box::new(texture::CsDctModel {
                decay,
                coeff_count: param_usize(params, "coeff_count", 9)?,
                smooth_sigma: param_f64(params, "smooth_sigma", 8.0)?,
            }))
        }
        "obdl" => Ok(Box::new(texture::ObdlModel {
            temporal_smooth: param_usize(params, "temporal_smooth", 3)?.max(1),
            smooth_sigma: param_f64(params, "smooth_sigma", 8.0)?,
        })),
        "gmc-mvmag" => Ok(Box::new(motion::GmcMvMagModel {
            smooth_sigma: param_f64(params, "smooth_sigma", 8.0)?,
        })),
        other => Err(Error::Config(format!("unknown model id {other:?}"))),
    }
}
