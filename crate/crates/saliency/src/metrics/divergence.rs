use crate::error::{Error, Result};

use super::Histogram;

/// Divergence value with an explicit marker for the undefined case
/// (some bin with P > 0 and Q = 0); never a silent large float.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Divergence {
    Finite(f64),
    Infinite,
}

impl Divergence {
    pub fn finite(self) -> Option<f64> {
        match self {
            Divergence::Finite(v) => Some(v),
            Divergence::Infinite => None,
        }
    }
}

fn check_bins(p: &Histogram, q: &Histogram) -> Result<()> {
    if p.bins != q.bins {
        return Err(Error::DimensionMismatch(format!(
            "histograms have {} vs {} bins",
            p.bins, q.bins
        )));
    }
    Ok(())
}

/// Kullback-Leibler divergence KLD(P||Q) in logarithmic base `base`.
pub fn kld(p: &Histogram, q: &Histogram, base: f64) -> Result<Divergence> {
    check_bins(p, q)?;
    let mut sum = 0.0;
    for (pi, qi) in p.mass.iter().zip(&q.mass) {
        if *pi > 0.0 {
            if *qi == 0.0 {
                return Ok(Divergence::Infinite);
            }
            sum += pi * (pi / qi).log(base);
        }
    }
    Ok(Divergence::Finite(sum))
}

/// J-divergence: KLD(P||Q) + KLD(Q||P). Symmetric; infinite whenever
/// either direction is undefined.
pub fn jd(p: &Histogram, q: &Histogram, base: f64) -> Result<Divergence> {
    match (kld(p, q, base)?, kld(q, p, base)?) {
        (Divergence::Finite(a), Divergence::Finite(b)) => Ok(Divergence::Finite(a + b)),
        _ => Ok(Divergence::Infinite),
    }
}

/// Jensen-Shannon divergence with base 2: (KLD(P||R) + KLD(Q||R)) / 2 for
/// R = (P+Q)/2. Always finite, symmetric and bounded in [0, 1].
pub fn jsd(p: &Histogram, q: &Histogram) -> Result<f64> {
    check_bins(p, q)?;
    let r = Histogram {
        bins: p.bins,
        mass: p
            .mass
            .iter()
            .zip(&q.mass)
            .map(|(a, b)| (a + b) / 2.0)
            .collect(),
    };
    let a = kld(p, &r, 2.0)?.finite().expect("R covers the support of P");
    let b = kld(q, &r, 2.0)?.finite().expect("R covers the support of Q");
    Ok((a + b) / 2.0)
}
