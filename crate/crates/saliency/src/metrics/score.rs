//! Per-frame metric orchestration: gathers samples, runs the bootstrap
//! replicates and assembles one record per requested metric.

use crate::centerbias::{nss_prime, CenterBiasModel, WeightForm};
use crate::core::SaliencyMap;
use crate::error::{Error, Result};

use super::{
    auc, build_ground_truth, build_histograms, gather_gaze_values, jd, jsd, kld, nss, pcc,
    sample_controls, ControlSampler, Divergence, MetricId,
};

/// Metric selection and knobs shared by every frame of a run.
#[derive(Debug, Clone)]
pub struct MetricConfig {
    pub metrics: Vec<MetricId>,
    /// Bootstrap replicate count B for the sampled metrics.
    pub bootstrap: usize,
    /// Histogram bin count r for the divergence metrics.
    pub bins: usize,
    /// Local-maximum radius in degrees of visual angle.
    pub radius_deg: f64,
    pub seed: u64,
}

impl Default for MetricConfig {
    fn default() -> Self {
        MetricConfig {
            metrics: MetricId::DEFAULT.to_vec(),
            bootstrap: 100,
            bins: 16,
            radius_deg: 0.5,
            seed: 0,
        }
    }
}

/// Frame-specific inputs derived from geometry and the fitted prior.
pub struct ScoreContext<'a> {
    /// Local-maximum radius in map pixels.
    pub radius_px: f64,
    /// Ground-truth blob sigma (1 degree) in map pixels.
    pub gt_sigma_px: f64,
    /// Fitted gaze prior and its density map at frame resolution;
    /// required by the primed metrics.
    pub bias: Option<(&'a CenterBiasModel, &'a SaliencyMap)>,
    /// Per-frame seed for control sampling.
    pub seed: u64,
}

/// One metric's outcome on one frame.
#[derive(Debug, Clone, PartialEq)]
pub enum MetricValue {
    Scored(f64),
    /// Metric not computable on this frame; carries the reason. Recorded,
    /// never fatal to the frame.
    Degenerate(String),
}

impl MetricValue {
    pub fn value(&self) -> Option<f64> {
        match self {
            MetricValue::Scored(v) => Some(*v),
            MetricValue::Degenerate(_) => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct FrameScores {
    pub values: Vec<(MetricId, MetricValue)>,
}

impl FrameScores {
    pub fn get(&self, id: MetricId) -> Option<&MetricValue> {
        self.values.iter().find(|(m, _)| *m == id).map(|(_, v)| v)
    }
}

fn replicate_seed(base: u64, bootstrap: usize, k: usize) -> u64 {
    base.wrapping_mul(bootstrap as u64).wrapping_add(k as u64)
}

/// Per-replicate negative sample sets for one sampler.
fn bootstrap_negatives(
    map: &SaliencyMap,
    gaze: &[(f64, f64)],
    sampler: ControlSampler,
    cfg: &MetricConfig,
    ctx: &ScoreContext,
) -> Result<Vec<Vec<f64>>> {
    let base = match sampler {
        ControlSampler::Uniform => ctx.seed,
        // separate stream from the uniform sampler
        ControlSampler::CenterBias(_) => ctx.seed ^ 0x9e37_79b9_7f4a_7c15,
    };
    (0..cfg.bootstrap)
        .map(|k| {
            let controls = sample_controls(
                map.width(),
                map.height(),
                gaze.len(),
                sampler,
                replicate_seed(base, cfg.bootstrap, k),
                gaze,
            )?;
            gather_gaze_values(map, &controls, ctx.radius_px)
        })
        .collect()
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

fn divergence_over_replicates(
    positives: &[f64],
    negatives: &[Vec<f64>],
    bins: usize,
    f: impl Fn(&super::Histogram, &super::Histogram) -> Result<Divergence>,
) -> Result<MetricValue> {
    let mut finite = Vec::new();
    let mut infinite = 0usize;
    for neg in negatives {
        let (p, q) = build_histograms(positives, neg, bins)?;
        match f(&p, &q)? {
            Divergence::Finite(v) => finite.push(v),
            Divergence::Infinite => infinite += 1,
        }
    }
    if finite.is_empty() {
        Ok(MetricValue::Degenerate(format!(
            "divergence infinite in all {infinite} replicates"
        )))
    } else {
        Ok(MetricValue::Scored(mean(&finite)))
    }
}

/// Score one frame's saliency map against its gaze points.
///
/// The map must be normalized to [0, 1] (the divergence histograms
/// require it). A frame without gaze points yields every metric marked
/// degenerate; individual metric degeneracies are recorded per metric.
pub fn score_frame(
    map: &SaliencyMap,
    gaze: &[(f64, f64)],
    cfg: &MetricConfig,
    ctx: &ScoreContext,
) -> Result<FrameScores> {
    if gaze.is_empty() {
        return Ok(FrameScores {
            values: cfg
                .metrics
                .iter()
                .map(|&m| (m, MetricValue::Degenerate("no gaze points".into())))
                .collect(),
        });
    }
    for m in &cfg.metrics {
        if m.needs_bias() && ctx.bias.is_none() {
            return Err(Error::Config(format!(
                "metric {m} requires a fitted center-bias model"
            )));
        }
    }
    let positives = gather_gaze_values(map, gaze, ctx.radius_px)?;

    let needs_uniform = cfg.metrics.iter().any(|m| {
        matches!(
            m,
            MetricId::Auc | MetricId::Kld | MetricId::Jd | MetricId::Jsd
        )
    });
    let needs_bias_controls = cfg
        .metrics
        .iter()
        .any(|m| matches!(m, MetricId::AucPrime | MetricId::JsdPrime));

    let uniform_negatives = if needs_uniform {
        bootstrap_negatives(map, gaze, ControlSampler::Uniform, cfg, ctx)?
    } else {
        Vec::new()
    };
    let bias_negatives = if needs_bias_controls {
        let (model, _) = ctx.bias.expect("checked above");
        bootstrap_negatives(map, gaze, ControlSampler::CenterBias(model), cfg, ctx)?
    } else {
        Vec::new()
    };

    let auc_over = |negatives: &[Vec<f64>]| -> Result<MetricValue> {
        let mut scores = Vec::with_capacity(negatives.len());
        for neg in negatives {
            scores.push(auc(&positives, neg)?);
        }
        Ok(MetricValue::Scored(mean(&scores)))
    };

    let mut values = Vec::with_capacity(cfg.metrics.len());
    for &metric in &cfg.metrics {
        let outcome = match metric {
            MetricId::Auc => auc_over(&uniform_negatives),
            MetricId::AucPrime => auc_over(&bias_negatives),
            MetricId::Kld => divergence_over_replicates(&positives, &uniform_negatives, cfg.bins, |p, q| {
                kld(p, q, 2.0)
            }),
            MetricId::Jd => divergence_over_replicates(&positives, &uniform_negatives, cfg.bins, |p, q| {
                jd(p, q, 2.0)
            }),
            MetricId::Jsd => divergence_over_replicates(&positives, &uniform_negatives, cfg.bins, |p, q| {
                jsd(p, q).map(Divergence::Finite)
            }),
            MetricId::JsdPrime => divergence_over_replicates(&positives, &bias_negatives, cfg.bins, |p, q| {
                jsd(p, q).map(Divergence::Finite)
            }),
            MetricId::Nss => nss(map, gaze, ctx.radius_px).map(MetricValue::Scored),
            MetricId::NssPrime => {
                let (_, density) = ctx.bias.expect("checked above");
                nss_prime(map, density, gaze, ctx.radius_px, WeightForm::Weighted)
                    .map(MetricValue::Scored)
            }
            MetricId::Pcc => build_ground_truth(gaze, map.width(), map.height(), ctx.gt_sigma_px)
                .and_then(|gt| pcc(map, &gt))
                .map(MetricValue::Scored),
        };
        let value = match outcome {
            Ok(v) => v,
            Err(Error::DegenerateInput(reason)) => MetricValue::Degenerate(reason),
            Err(e) => return Err(e),
        };
        values.push((metric, value));
    }
    Ok(FrameScores { values })
}
