use crate::core::{GroundTruthMap, SaliencyMap};
use crate::error::{Error, Result};

use super::gather_field_values;

/// Normalized scanpath saliency: z-score the map over all pixels, then
/// average the normalized values gathered at gaze points.
pub fn nss(map: &SaliencyMap, gaze: &[(f64, f64)], radius_px: f64) -> Result<f64> {
    if gaze.is_empty() {
        return Err(Error::DegenerateInput("no gaze points".into()));
    }
    let sigma = map.std_dev();
    if !(sigma > 0.0) {
        return Err(Error::DegenerateInput(
            "constant map has zero standard deviation".into(),
        ));
    }
    let mean = map.mean();
    let normalized: Vec<f64> = map.values().iter().map(|v| (v - mean) / sigma).collect();
    let values = gather_field_values(&normalized, map.width(), map.height(), gaze, radius_px)?;
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

/// Pearson correlation between a saliency map and the ground-truth map,
/// over paired pixel samples.
pub fn pcc(s: &SaliencyMap, g: &GroundTruthMap) -> Result<f64> {
    let g = &g.map;
    if s.width() != g.width() || s.height() != g.height() {
        return Err(Error::DimensionMismatch(format!(
            "{}x{} vs {}x{}",
            s.width(),
            s.height(),
            g.width(),
            g.height()
        )));
    }
    let n = s.values().len() as f64;
    let mean_s = s.mean();
    let mean_g = g.mean();
    let mut cov = 0.0;
    let mut var_s = 0.0;
    let mut var_g = 0.0;
    for (a, b) in s.values().iter().zip(g.values()) {
        let (da, db) = (a - mean_s, b - mean_g);
        cov += da * db;
        var_s += da * da;
        var_g += db * db;
    }
    if var_s == 0.0 || var_g == 0.0 {
        return Err(Error::DegenerateInput(
            "constant map in pcc computation".into(),
        ));
    }
    let _ = n;
    Ok(cov / (var_s.sqrt() * var_g.sqrt()))
}

/// Ground-truth map: unit impulses at the gaze pixels convolved with a
/// Gaussian of `sigma_px` (sum-combined, truncated at 4 sigma).
pub fn build_ground_truth(
    gaze: &[(f64, f64)],
    width: usize,
    height: usize,
    sigma_px: f64,
) -> Result<GroundTruthMap> {
    if !(sigma_px > 0.0) {
        return Err(Error::InvalidParameter {
            name: "sigma_px",
            reason: format!("must be > 0, got {sigma_px}"),
        });
    }
    let mut acc = vec![0.0; width * height];
    let radius = 4.0 * sigma_px;
    let cutoff2 = radius * radius;
    for &(x, y) in gaze {
        // unit-peak blob centered on the nearest pixel
        let px = x.round().clamp(0.0, (width - 1) as f64);
        let py = y.round().clamp(0.0, (height - 1) as f64);
        let x0 = ((px - radius).floor().max(0.0)) as usize;
        let y0 = ((py - radius).floor().max(0.0)) as usize;
        let x1 = ((px + radius).ceil().min((width - 1) as f64)) as usize;
        let y1 = ((py + radius).ceil().min((height - 1) as f64)) as usize;
        for gy in y0..=y1 {
            for gx in x0..=x1 {
                let d2 = (gx as f64 - px).powi(2) + (gy as f64 - py).powi(2);
                if d2 <= cutoff2 {
                    acc[gy * width + gx] += (-d2 / (2.0 * sigma_px * sigma_px)).exp();
                }
            }
        }
    }
    Ok(GroundTruthMap {
        map: SaliencyMap::new(width, height, acc)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::gaussian_blob;

    fn ramp_map(w: usize, h: usize) -> SaliencyMap {
        SaliencyMap::new(w, h, (0..w * h).map(|i| i as f64).collect()).unwrap()
    }

    #[test]
    fn nss_positive_at_unique_max() {
        let map = ramp_map(8, 8);
        let v = nss(&map, &[(7.0, 7.0)], 0.0).unwrap();
        assert!(v > 0.0);
    }

    #[test]
    fn nss_zero_over_full_cover() {
        let map = ramp_map(6, 6);
        let gaze: Vec<(f64, f64)> = (0..6)
            .flat_map(|y| (0..6).map(move |x| (x as f64, y as f64)))
            .collect();
        let v = nss(&map, &gaze, 0.0).unwrap();
        assert!(v.abs() < 1e-9);
    }

    #[test]
    fn nss_hand_computation() {
        let map = SaliencyMap::new(
            4,
            4,
            vec![
                0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0, 10.0, 11.0, 12.0, 13.0, 14.0,
                15.0,
            ],
        )
        .unwrap();
        let mean = 7.5;
        let sd = ((0..16).map(|i| (i as f64 - mean).powi(2)).sum::<f64>() / 15.0).sqrt();
        let gaze = [(3.0, 3.0), (0.0, 0.0)];
        let expect = ((15.0 - mean) / sd + (0.0 - mean) / sd) / 2.0;
        let got = nss(&map, &gaze, 0.0).unwrap();
        assert!((got - expect).abs() < 1e-12);
    }

    #[test]
    fn nss_constant_map_rejected() {
        let map = SaliencyMap::new(4, 4, vec![0.5; 16]).unwrap();
        assert!(nss(&map, &[(1.0, 1.0)], 0.0).is_err());
    }

    #[test]
    fn nss_affine_invariant() {
        let map = ramp_map(8, 8);
        let gaze = [(2.0, 5.0), (6.0, 1.0)];
        let base = nss(&map, &gaze, 1.5).unwrap();
        let scaled = SaliencyMap::new(
            8,
            8,
            map.values().iter().map(|v| 3.0 * v + 11.0).collect(),
        )
        .unwrap();
        let got = nss(&scaled, &gaze, 1.5).unwrap();
        assert!((base - got).abs() < 1e-9);
    }

    #[test]
    fn pcc_identity_and_inversion() {
        let g = build_ground_truth(&[(10.0, 10.0), (20.0, 15.0)], 32, 32, 3.0).unwrap();
        assert!((pcc(&g.map, &g).unwrap() - 1.0).abs() < 1e-12);
        let max = g.map.max_value();
        let inverted = SaliencyMap::new(
            32,
            32,
            g.map.values().iter().map(|v| max - v).collect(),
        )
        .unwrap();
        assert!((pcc(&inverted, &g).unwrap() + 1.0).abs() < 1e-12);
    }

    #[test]
    fn pcc_matches_two_pass_oracle() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2);
        let a: Vec<f64> = (0..32 * 32).map(|_| rng.gen::<f64>()).collect();
        let b: Vec<f64> = (0..32 * 32).map(|_| rng.gen::<f64>()).collect();
        let s = SaliencyMap::new(32, 32, a.clone()).unwrap();
        let g = GroundTruthMap {
            map: SaliencyMap::new(32, 32, b.clone()).unwrap(),
        };
        let n = 1024.0;
        let ma = a.iter().sum::<f64>() / n;
        let mb = b.iter().sum::<f64>() / n;
        let cov: f64 = a.iter().zip(&b).map(|(x, y)| (x - ma) * (y - mb)).sum();
        let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
        let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
        let expect = cov / (va.sqrt() * vb.sqrt());
        assert!((pcc(&s, &g).unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn pcc_affine_invariant() {
        let g = build_ground_truth(&[(5.0, 5.0)], 16, 16, 2.0).unwrap();
        let s = SaliencyMap::new(16, 16, (0..256).map(|i| (i % 7) as f64).collect()).unwrap();
        let base = pcc(&s, &g).unwrap();
        let s2 = SaliencyMap::new(16, 16, s.values().iter().map(|v| 2.0 * v + 3.0).collect())
            .unwrap();
        let g2 = GroundTruthMap {
            map: SaliencyMap::new(
                16,
                16,
                g.map.values().iter().map(|v| 5.0 * v + 1.0).collect(),
            )
            .unwrap(),
        };
        assert!((pcc(&s2, &g2).unwrap() - base).abs() < 1e-12);
    }

    #[test]
    fn ground_truth_single_point_is_blob() {
        let g = build_ground_truth(&[(12.0, 9.0)], 32, 32, 2.5).unwrap();
        let blob = gaussian_blob(32, 32, (12.0, 9.0), 2.5).unwrap();
        assert_eq!(g.map, blob);
    }

    #[test]
    fn ground_truth_coincident_points_double() {
        let one = build_ground_truth(&[(12.0, 9.0)], 32, 32, 2.5).unwrap();
        let two = build_ground_truth(&[(12.0, 9.0), (12.0, 9.0)], 32, 32, 2.5).unwrap();
        for (a, b) in one.map.values().iter().zip(two.map.values()) {
            assert!((2.0 * a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn ground_truth_summation_oracle() {
        let points = [(3.0, 4.0), (10.0, 2.0), (20.0, 25.0), (15.0, 15.0), (0.0, 0.0)];
        let sigma = 3.0;
        let g = build_ground_truth(&points, 28, 28, sigma).unwrap();
        for y in 0..28 {
            for x in 0..28 {
                let mut expect = 0.0;
                for &(px, py) in &points {
                    let d2 = (x as f64 - px).powi(2) + (y as f64 - py).powi(2);
                    if d2 <= (4.0 * sigma).powi(2) {
                        expect += (-d2 / (2.0 * sigma * sigma)).exp();
                    }
                }
                assert!((g.map.get(x, y) - expect).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn ground_truth_empty_gaze_zero_map() {
        let g = build_ground_truth(&[], 8, 8, 2.0).unwrap();
        assert!(g.map.values().iter().all(|v| *v == 0.0));
    }
}
