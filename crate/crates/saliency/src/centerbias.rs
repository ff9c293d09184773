//! Dataset-level 2D Gaussian gaze prior: fitting, density evaluation,
//! control-point sampling and the bias-corrected NSS' normalization.

use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::core::SaliencyMap;
use crate::error::{Error, Result};

/// 2D Gaussian gaze prior in normalized frame coordinates [0,1]^2.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CenterBiasModel {
    pub mean: [f64; 2],
    /// Row-major 2x2 covariance, symmetric positive-definite.
    pub covariance: [[f64; 2]; 2],
    pub sample_count: usize,
}

impl CenterBiasModel {
    pub fn validate(&self) -> Result<()> {
        let c = &self.covariance;
        if (c[0][1] - c[1][0]).abs() > 1e-12 {
            return Err(Error::Fit("covariance is not symmetric".into()));
        }
        let det = c[0][0] * c[1][1] - c[0][1] * c[1][0];
        if !(c[0][0] > 0.0 && det > 0.0) {
            return Err(Error::Fit(format!(
                "covariance is not positive-definite (det {det})"
            )));
        }
        for m in self.mean {
            if !(0.0..=1.0).contains(&m) {
                return Err(Error::Fit(format!("mean component {m} outside [0,1]")));
            }
        }
        Ok(())
    }

    /// Unnormalized density at a normalized coordinate.
    pub fn density(&self, u: f64, v: f64) -> f64 {
        let c = &self.covariance;
        let det = c[0][0] * c[1][1] - c[0][1] * c[1][0];
        let (du, dv) = (u - self.mean[0], v - self.mean[1]);
        // inverse of the 2x2 covariance
        let q = (c[1][1] * du * du - 2.0 * c[0][1] * du * dv + c[0][0] * dv * dv) / det;
        (-0.5 * q).exp() / (2.0 * std::f64::consts::PI * det.sqrt())
    }

    /// Lower-triangular Cholesky factor of the covariance.
    fn cholesky(&self) -> [[f64; 2]; 2] {
        let c = &self.covariance;
        let l00 = c[0][0].sqrt();
        let l10 = c[0][1] / l00;
        let l11 = (c[1][1] - l10 * l10).sqrt();
        [[l00, 0.0], [l10, l11]]
    }

    /// Draw one point in map pixel coordinates, rejecting draws outside
    /// the frame. Pixel (x, y) has normalized center ((x+0.5)/w, (y+0.5)/h).
    pub fn sample_px(&self, width: usize, height: usize, rng: &mut impl Rng) -> (f64, f64) {
        let l = self.cholesky();
        loop {
            let (z0, z1) = gaussian_pair(rng);
            let u = self.mean[0] + l[0][0] * z0;
            let v = self.mean[1] + l[1][0] * z0 + l[1][1] * z1;
            let x = u * width as f64 - 0.5;
            let y = v * height as f64 - 0.5;
            if x >= 0.0 && y >= 0.0 && x < width as f64 && y < height as f64 {
                return (x, y);
            }
        }
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let text = toml::to_string(self).map_err(|e| Error::Fit(e.to_string()))?;
        std::fs::write(path, text)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<CenterBiasModel> {
        let text = std::fs::read_to_string(path.as_ref())?;
        let model: CenterBiasModel = toml::from_str(&text).map_err(|e| {
            Error::Fit(format!("{}: {e}", path.as_ref().display()))
        })?;
        model.validate()?;
        Ok(model)
    }
}

/// Box-Muller standard normal pair.
fn gaussian_pair(rng: &mut impl Rng) -> (f64, f64) {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    let r = (-2.0 * u1.ln()).sqrt();
    let theta = 2.0 * std::f64::consts::PI * u2;
    (r * theta.cos(), r * theta.sin())
}

/// Maximum-likelihood Gaussian fit to gaze points accumulated across
/// sequences, each point normalized to [0,1]^2 by its sequence's frame
/// dimensions. Requires at least 100 points.
pub fn fit_center_bias(normalized_points: &[(f64, f64)]) -> Result<CenterBiasModel> {
    let n = normalized_points.len();
    if n < 100 {
        return Err(Error::Fit(format!(
            "need at least 100 gaze points to fit, got {n}"
        )));
    }
    // accumulate in a canonical order so the fit is exactly invariant
    // under permutation of the input
    let mut normalized_points = normalized_points.to_vec();
    normalized_points.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let normalized_points = &normalized_points;
    let nf = n as f64;
    let (mut mx, mut my) = (0.0, 0.0);
    for (u, v) in normalized_points {
        mx += u;
        my += v;
    }
    mx /= nf;
    my /= nf;
    let (mut cxx, mut cxy, mut cyy) = (0.0, 0.0, 0.0);
    for (u, v) in normalized_points {
        let (du, dv) = (u - mx, v - my);
        cxx += du * du;
        cxy += du * dv;
        cyy += dv * dv;
    }
    cxx /= nf;
    cxy /= nf;
    cyy /= nf;
    let model = CenterBiasModel {
        mean: [mx, my],
        covariance: [[cxx, cxy], [cxy, cyy]],
        sample_count: n,
    };
    let det = cxx * cyy - cxy * cxy;
    if !(det > 1e-12 && cxx > 0.0) {
        return Err(Error::Fit(format!(
            "singular sample covariance (det {det}); points may be collinear"
        )));
    }
    model.validate()?;
    Ok(model)
}

/// Fitted density evaluated at every pixel center, rescaled so the map
/// sums to exactly 1.
pub fn evaluate_f(model: &CenterBiasModel, width: usize, height: usize) -> Result<SaliencyMap> {
    model.validate()?;
    let mut values = vec![0.0; width * height];
    let mut sum = 0.0;
    for y in 0..height {
        let v = (y as f64 + 0.5) / height as f64;
        for x in 0..width {
            let u = (x as f64 + 0.5) / width as f64;
            let d = model.density(u, v);
            values[y * width + x] = d;
            sum += d;
        }
    }
    for v in &mut values {
        *v /= sum;
    }
    SaliencyMap::new(width, height, values)
}

/// Which mean/variance the bias-weighted normalization uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WeightForm {
    /// F-weighted mean and standard deviation; affine-equivariant, the
    /// default.
    #[default]
    Weighted,
    /// The 1/N product form (mu = sum(F.S)/N, sigma over F.S - mu). Not
    /// affine-equivariant; kept for sensitivity analysis.
    Product,
}

/// Bias-weighted z-score normalization of a saliency map.
///
/// Returns the normalized field as raw values (they can be negative).
pub fn weighted_normalize(s: &SaliencyMap, f: &SaliencyMap, form: WeightForm) -> Result<Vec<f64>> {
    if s.width() != f.width() || s.height() != f.height() {
        return Err(Error::DimensionMismatch(format!(
            "map {}x{} vs density {}x{}",
            s.width(),
            s.height(),
            f.width(),
            f.height()
        )));
    }
    let n = s.values().len() as f64;
    let (mu, sigma) = match form {
        WeightForm::Weighted => {
            let mu: f64 = s.values().iter().zip(f.values()).map(|(s, f)| f * s).sum();
            let var: f64 = s
                .values()
                .iter()
                .zip(f.values())
                .map(|(s, f)| f * (s - mu).powi(2))
                .sum();
            (mu, var.sqrt())
        }
        WeightForm::Product => {
            let mu: f64 =
                s.values().iter().zip(f.values()).map(|(s, f)| f * s).sum::<f64>() / n;
            let ss: f64 = s
                .values()
                .iter()
                .zip(f.values())
                .map(|(s, f)| (f * s - mu).powi(2))
                .sum();
            (mu, (ss / (n - 1.0)).sqrt())
        }
    };
    if !(sigma > 0.0) {
        return Err(Error::DegenerateInput(
            "weighted standard deviation is zero".into(),
        ));
    }
    Ok(s.values().iter().map(|v| (v - mu) / sigma).collect())
}

/// NSS with the bias-weighted normalization: mean of the normalized field
/// gathered at gaze points with the local-maximum operator.
pub fn nss_prime(
    s: &SaliencyMap,
    f: &SaliencyMap,
    gaze: &[(f64, f64)],
    radius_px: f64,
    form: WeightForm,
) -> Result<f64> {
    if gaze.is_empty() {
        return Err(Error::DegenerateInput("no gaze points".into()));
    }
    let normalized = weighted_normalize(s, f, form)?;
    let values =
        crate::metrics::gather_field_values(&normalized, s.width(), s.height(), gaze, radius_px)?;
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn planted() -> CenterBiasModel {
        CenterBiasModel {
            mean: [0.5, 0.5],
            covariance: [[0.02, 0.0], [0.0, 0.01]],
            sample_count: 0,
        }
    }

    fn sample_points(model: &CenterBiasModel, n: usize, seed: u64) -> Vec<(f64, f64)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let l = model.cholesky();
        (0..n)
            .map(|_| {
                let (z0, z1) = gaussian_pair(&mut rng);
                (
                    model.mean[0] + l[0][0] * z0,
                    model.mean[1] + l[1][0] * z0 + l[1][1] * z1,
                )
            })
            .collect()
    }

    #[test]
    fn fit_recovers_planted_gaussian() {
        let points = sample_points(&planted(), 100_000, 7);
        let fit = fit_center_bias(&points).unwrap();
        assert!((fit.mean[0] - 0.5).abs() / 0.5 < 0.02);
        assert!((fit.mean[1] - 0.5).abs() / 0.5 < 0.02);
        assert!((fit.covariance[0][0] - 0.02).abs() / 0.02 < 0.02);
        assert!((fit.covariance[1][1] - 0.01).abs() / 0.01 < 0.02);
    }

    #[test]
    fn fit_degenerate_points_rejected() {
        let points = vec![(0.5, 0.5); 200];
        assert!(fit_center_bias(&points).is_err());
    }

    #[test]
    fn fit_permutation_invariant() {
        let mut points = sample_points(&planted(), 500, 3);
        let a = fit_center_bias(&points).unwrap();
        points.reverse();
        let b = fit_center_bias(&points).unwrap();
        assert_eq!(a.mean, b.mean);
        assert_eq!(a.covariance, b.covariance);
    }

    #[test]
    fn density_map_sums_to_one() {
        for (w, h) in [(32, 32), (352, 288), (17, 53)] {
            let f = evaluate_f(&planted(), w, h).unwrap();
            let sum: f64 = f.values().iter().sum();
            assert!((sum - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn density_argmax_near_mean() {
        let f = evaluate_f(&planted(), 101, 101).unwrap();
        assert_eq!(f.argmax(), (50, 50));
    }

    #[test]
    fn isotropic_density_rotation_invariant() {
        let model = CenterBiasModel {
            mean: [0.5, 0.5],
            covariance: [[0.015, 0.0], [0.0, 0.015]],
            sample_count: 0,
        };
        let f = evaluate_f(&model, 64, 64).unwrap();
        for y in 0..64 {
            for x in 0..64 {
                // 90 degree rotation about the center
                let (rx, ry) = (63 - y, x);
                assert!((f.get(x, y) - f.get(rx, ry)).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn weighted_normalize_product_form_hand_check() {
        let s = SaliencyMap::new(2, 2, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        let f = SaliencyMap::new(2, 2, vec![0.25; 4]).unwrap();
        // printed form: mu = sum(F.S)/N = 0.5/4 = 0.125
        // sigma = sqrt(sum((F.S - mu)^2)/3)
        let fs = [0.0_f64, 0.25, 0.25, 0.0];
        let mu = 0.125;
        let ss: f64 = fs.iter().map(|v| (v - mu).powi(2)).sum();
        let sigma = (ss / 3.0).sqrt();
        let out = weighted_normalize(&s, &f, WeightForm::Product).unwrap();
        for (i, v) in out.iter().enumerate() {
            let expect = (s.values()[i] - mu) / sigma;
            assert!((v - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn weighted_normalize_weighted_form_hand_check() {
        let s = SaliencyMap::new(2, 2, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        let f = SaliencyMap::new(2, 2, vec![0.4, 0.3, 0.2, 0.1]).unwrap();
        let mu = 0.3 + 0.2;
        let var = 0.4 * (0.0f64 - mu).powi(2)
            + 0.3 * (1.0f64 - mu).powi(2)
            + 0.2 * (1.0f64 - mu).powi(2)
            + 0.1 * (0.0f64 - mu).powi(2);
        let out = weighted_normalize(&s, &f, WeightForm::Weighted).unwrap();
        for (i, v) in out.iter().enumerate() {
            let expect = (s.values()[i] - mu) / var.sqrt();
            assert!((v - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn weighted_normalize_preserves_ordering() {
        let s = SaliencyMap::new(3, 1, vec![0.2, 0.9, 0.4]).unwrap();
        let f = SaliencyMap::new(3, 1, vec![0.5, 0.3, 0.2]).unwrap();
        for form in [WeightForm::Weighted, WeightForm::Product] {
            let out = weighted_normalize(&s, &f, form).unwrap();
            assert!(out[0] < out[2] && out[2] < out[1]);
        }
    }

    #[test]
    fn nss_prime_affine_invariant_weighted_form() {
        let f = evaluate_f(&planted(), 32, 32).unwrap();
        let s_vals: Vec<f64> = (0..32 * 32).map(|i| ((i * 37) % 101) as f64 / 100.0).collect();
        let s = SaliencyMap::new(32, 32, s_vals.clone()).unwrap();
        let gaze = [(4.0, 4.0), (20.0, 11.0), (30.0, 30.0)];
        let base = nss_prime(&s, &f, &gaze, 2.0, WeightForm::Weighted).unwrap();
        let scaled_vals: Vec<f64> = s_vals.iter().map(|v| 3.0 * v + 7.0).collect();
        let scaled = SaliencyMap::new(32, 32, scaled_vals).unwrap();
        let got = nss_prime(&scaled, &f, &gaze, 2.0, WeightForm::Weighted).unwrap();
        assert!((base - got).abs() < 1e-9, "{base} vs {got}");
    }

    #[test]
    fn model_round_trips_through_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bias.toml");
        let model = CenterBiasModel {
            mean: [0.48, 0.52],
            covariance: [[0.02, 0.003], [0.003, 0.011]],
            sample_count: 4242,
        };
        model.save(&path).unwrap();
        let loaded = CenterBiasModel::load(&path).unwrap();
        assert_eq!(model, loaded);
    }

    #[test]
    fn sampler_concentrates_near_tight_center() {
        let model = CenterBiasModel {
            mean: [0.5, 0.5],
            covariance: [[1e-4, 0.0], [0.0, 1e-4]],
            sample_count: 0,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let (w, h) = (100, 100);
        let sigma_px = (1e-4f64).sqrt() * 100.0;
        let mut within = 0;
        let n = 10_000;
        for _ in 0..n {
            let (x, y) = model.sample_px(w, h, &mut rng);
            let d = ((x - 49.5).powi(2) + (y - 49.5).powi(2)).sqrt();
            if d <= 3.0 * sigma_px * 2.0f64.sqrt() {
                within += 1;
            }
        }
        assert!(within as f64 / n as f64 >= 0.99, "{within}/{n}");
    }
}
