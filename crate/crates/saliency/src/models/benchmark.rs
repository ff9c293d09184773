//! Gaze-derived benchmark models: the content-independent centered
//! Gaussian (GAUSS) and the intra-observer upper bound (IO).

use crate::core::{
    gaussian_blob, pixels_per_degree, FrameType, SaliencyMap, Viewing, ViewingGeometry,
};
use crate::error::{Error, Result};
use crate::ingest::SequenceBundle;

use super::{ModelOutput, SaliencyModel};

/// Centered Gaussian blob, sigma = 1 degree of visual angle, identical
/// for every frame.
pub fn model_gauss(width: usize, height: usize, geom: &ViewingGeometry) -> Result<SaliencyMap> {
    let sigma = pixels_per_degree(geom)?;
    gaussian_blob(
        width,
        height,
        ((width as f64 - 1.0) / 2.0, (height as f64 - 1.0) / 2.0),
        sigma,
    )
}

/// Intra-observer map for one frame: max-combined 1-degree blobs at the
/// counterpart gaze points of every observer. No points yields a zero map.
pub fn model_io(
    width: usize,
    height: usize,
    geom: &ViewingGeometry,
    points: &[(f64, f64)],
) -> Result<SaliencyMap> {
    let sigma = pixels_per_degree(geom)?;
    let mut combined = SaliencyMap::zeros(width, height);
    for &(x, y) in points {
        let blob = gaussian_blob(width, height, (x, y), sigma)?;
        let values: Vec<f64> = combined
            .values()
            .iter()
            .zip(blob.values())
            .map(|(a, b)| a.max(*b))
            .collect();
        combined = SaliencyMap::new(width, height, values)?;
    }
    Ok(combined)
}

pub struct GaussModel;

impl SaliencyModel for GaussModel {
    fn id(&self) -> &str {
        "gauss"
    }

    fn score_sequence(&self, bundle: &SequenceBundle) -> Result<ModelOutput> {
        let (w, h) = bundle.map_dims();
        let map = model_gauss(w, h, &bundle.geometry)?;
        Ok(ModelOutput {
            model_id: self.id().to_string(),
            maps: vec![Some(map); bundle.frame_count()],
            coverage: vec![FrameType::I, FrameType::P],
        })
    }
}

pub struct IoModel;

impl SaliencyModel for IoModel {
    fn id(&self) -> &str {
        "io"
    }

    fn score_sequence(&self, bundle: &SequenceBundle) -> Result<ModelOutput> {
        if !bundle.gaze.has_viewing(Viewing::Counterpart) {
            return Err(Error::Config(format!(
                "sequence {:?}: IO model requires counterpart-viewing gaze data",
                bundle.sequence_id
            )));
        }
        let (w, h) = bundle.map_dims();
        let maps = (0..bundle.frame_count())
            .map(|frame| {
                let points = bundle.map_gaze(frame, Viewing::Counterpart);
                model_io(w, h, &bundle.geometry, &points).map(Some)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(ModelOutput {
            model_id: self.id().to_string(),
            maps,
            coverage: vec![FrameType::I, FrameType::P],
        })
    }
}
