//! The accuracy-metric battery: AUC, KLD, JD, JSD, NSS, PCC, their
//! center-bias corrected variants, and the shared sampling machinery.

mod auc;
mod divergence;
mod gather;
mod score;
mod value;

pub use auc::auc;
pub use divergence::{jd, jsd, kld, Divergence};
pub use gather::{
    build_histograms, gather_field_values, gather_gaze_values, sample_controls, ControlSampler,
    Histogram, SampleSets, SamplerId,
};
pub use score::{score_frame, FrameScores, MetricConfig, MetricValue, ScoreContext};
pub use value::{build_ground_truth, nss, pcc};

use crate::error::{Error, Result};

/// Registry of metric identifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MetricId {
    Auc,
    AucPrime,
    Kld,
    Jd,
    Jsd,
    JsdPrime,
    Nss,
    NssPrime,
    Pcc,
}

impl MetricId {
    pub const ALL: [MetricId; 9] = [
        MetricId::Auc,
        MetricId::AucPrime,
        MetricId::Kld,
        MetricId::Jd,
        MetricId::Jsd,
        MetricId::JsdPrime,
        MetricId::Nss,
        MetricId::NssPrime,
        MetricId::Pcc,
    ];

    /// Default report set. KLD and JD are computable but excluded here:
    /// they are unbounded and undefined on disjoint supports.
    pub const DEFAULT: [MetricId; 7] = [
        MetricId::Auc,
        MetricId::AucPrime,
        MetricId::Jsd,
        MetricId::JsdPrime,
        MetricId::Nss,
        MetricId::NssPrime,
        MetricId::Pcc,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            MetricId::Auc => "auc",
            MetricId::AucPrime => "auc_p",
            MetricId::Kld => "kld",
            MetricId::Jd => "jd",
            MetricId::Jsd => "jsd",
            MetricId::JsdPrime => "jsd_p",
            MetricId::Nss => "nss",
            MetricId::NssPrime => "nss_p",
            MetricId::Pcc => "pcc",
        }
    }

    pub fn parse(s: &str) -> Result<MetricId> {
        MetricId::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::Config(format!("unknown metric id {s:?}")))
    }

    /// Whether the metric needs the fitted center-bias prior.
    pub fn needs_bias(&self) -> bool {
        matches!(
            self,
            MetricId::AucPrime | MetricId::JsdPrime | MetricId::NssPrime
        )
    }

    /// Whether the metric involves bootstrap control sampling.
    pub fn is_stochastic(&self) -> bool {
        matches!(
            self,
            MetricId::Auc
                | MetricId::AucPrime
                | MetricId::Kld
                | MetricId::Jd
                | MetricId::Jsd
                | MetricId::JsdPrime
        )
    }
}

impl std::fmt::Display for MetricId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}
