use crate::error::{Error, Result};

/// Dense nonnegative scalar field over a pixel grid, row-major.
///
/// The universal model output and metric input.
#[derive(Debug, Clone, PartialEq)]
pub struct SaliencyMap {
    width: usize,
    height: usize,
    values: Vec<f64>,
}

impl SaliencyMap {
    pub fn new(width: usize, height: usize, values: Vec<f64>) -> Result<SaliencyMap> {
        if values.len() != width * height {
            return Err(Error::DimensionMismatch(format!(
                "{} values for a {width}x{height} map",
                values.len()
            )));
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::DegenerateInput(format!(
                "map value {v} is negative or non-finite"
            )));
        }
        Ok(SaliencyMap {
            width,
            height,
            values,
        })
    }

    pub fn zeros(width: usize, height: usize) -> SaliencyMap {
        SaliencyMap {
            width,
            height,
            values: vec![0.0; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }

    /// Location of the maximum value (first occurrence in row-major order).
    pub fn argmax(&self) -> (usize, usize) {
        let mut best = 0;
        for (i, v) in self.values.iter().enumerate() {
            if *v > self.values[best] {
                best = i;
            }
        }
        (best % self.width, best / self.width)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Sample standard deviation over all pixels (n-1 denominator).
    pub fn std_dev(&self) -> f64 {
        let n = self.values.len() as f64;
        if n < 2.0 {
            return 0.0;
        }
        let mean = self.mean();
        let ss: f64 = self.values.iter().map(|v| (v - mean).powi(2)).sum();
        (ss / (n - 1.0)).sqrt()
    }
}

/// Gaze-density map: sum-combined Gaussian blobs at gaze points.
///
/// Distinct from [`SaliencyMap`] so the sum-combined PCC ground truth and
/// the max-combined IO map cannot be interchanged by accident.
#[derive(Debug, Clone, PartialEq)]
pub struct GroundTruthMap {
    pub map: SaliencyMap,
}

/// Isotropic 2D Gaussian, peak value 1 at the pixel nearest `center`,
/// truncated to 0 beyond `4 * sigma` from the (continuous) center.
pub fn gaussian_blob(
    width: usize,
    height: usize,
    center: (f64, f64),
    sigma: f64,
) -> Result<SaliencyMap> {
    if !(sigma > 0.0) {
        return Err(Error::InvalidParameter {
            name: "sigma",
            reason: format!("must be > 0, got {sigma}"),
        });
    }
    let (cx, cy) = center;
    let px = (cx.round().clamp(0.0, (width - 1) as f64)) as usize;
    let py = (cy.round().clamp(0.0, (height - 1) as f64)) as usize;
    let peak_d2 = (px as f64 - cx).powi(2) + (py as f64 - cy).powi(2);
    let peak = (-peak_d2 / (2.0 * sigma * sigma)).exp();
    let cutoff2 = (4.0 * sigma).powi(2);

    let mut values = vec![0.0; width * height];
    let radius = 4.0 * sigma;
    let x0 = ((cx - radius).floor().max(0.0)) as usize;
    let y0 = ((cy - radius).floor().max(0.0)) as usize;
    let x1 = ((cx + radius).ceil().min((width - 1) as f64)) as usize;
    let y1 = ((cy + radius).ceil().min((height - 1) as f64)) as usize;
    for y in y0..=y1 {
        for x in x0..=x1 {
            let d2 = (x as f64 - cx).powi(2) + (y as f64 - cy).powi(2);
            if d2 <= cutoff2 {
                values[y * width + x] = (-d2 / (2.0 * sigma * sigma)).exp() / peak;
            }
        }
    }
    SaliencyMap::new(width, height, values)
}

/// Expand a block-level grid to pixel resolution by nearest-block
/// replication, then smooth with a normalized Gaussian of `smooth_sigma`
/// pixels (0 disables smoothing). The border is renormalized so constant
/// inputs stay constant.
pub fn upsample_block_map(
    block_values: &[f64],
    grid_w: usize,
    grid_h: usize,
    block_size: usize,
    out_w: usize,
    out_h: usize,
    smooth_sigma: f64,
) -> Result<SaliencyMap> {
    if block_values.len() != grid_w * grid_h {
        return Err(Error::DimensionMismatch(format!(
            "{} block values for a {grid_w}x{grid_h} grid",
            block_values.len()
        )));
    }
    if grid_w * block_size < out_w || grid_h * block_size < out_h {
        return Err(Error::DimensionMismatch(format!(
            "{grid_w}x{grid_h} grid of {block_size}px blocks does not cover {out_w}x{out_h}"
        )));
    }
    let mut values = vec![0.0; out_w * out_h];
    for y in 0..out_h {
        let by = (y / block_size).min(grid_h - 1);
        for x in 0..out_w {
            let bx = (x / block_size).min(grid_w - 1);
            values[y * out_w + x] = block_values[by * grid_w + bx];
        }
    }
    if smooth_sigma > 0.0 {
        values = smooth_separable(&values, out_w, out_h, smooth_sigma);
    }
    SaliencyMap::new(out_w, out_h, values)
}

/// Gaussian kernel taps truncated at 4 sigma, unnormalized unit peak.
pub fn gaussian_taps(sigma: f64) -> Vec<f64> {
    let radius = (4.0 * sigma).ceil() as i64;
    (-radius..=radius)
        .map(|i| {
            let d = i as f64;
            if d.abs() <= 4.0 * sigma {
                (-d * d / (2.0 * sigma * sigma)).exp()
            } else {
                0.0
            }
        })
        .collect()
}

/// Separable Gaussian smoothing with per-axis border renormalization.
///
/// For the square truncated support this equals dividing a zero-padded
/// convolution by the convolution of an all-ones field.
pub fn smooth_separable(values: &[f64], w: usize, h: usize, sigma: f64) -> Vec<f64> {
    let taps = gaussian_taps(sigma);
    let radius = (taps.len() / 2) as i64;

    let r = radius as usize;
    let wsum_full: f64 = taps.iter().sum();
    let pass = |src: &[f64], len: usize, stride: usize, lines: usize, line_stride: usize| {
        let mut dst = vec![0.0; src.len()];
        let interior = r.min(len)..len.saturating_sub(r).max(r.min(len));
        for line in 0..lines {
            let base = line * line_stride;
            let edge = |i: usize, dst: &mut Vec<f64>| {
                let mut acc = 0.0;
                let mut wsum = 0.0;
                for (k, tap) in taps.iter().enumerate() {
                    let j = i as i64 + k as i64 - radius;
                    if j >= 0 && (j as usize) < len {
                        acc += tap * src[base + j as usize * stride];
                        wsum += tap;
                    }
                }
                dst[base + i * stride] = acc / wsum;
            };
            for i in 0..interior.start {
                edge(i, &mut dst);
            }
            for i in interior.end..len {
                edge(i, &mut dst);
            }
            // interior taps never cross the border, weight sum is constant
            for i in interior.clone() {
                let j0 = base + (i - r) * stride;
                let mut acc = 0.0;
                for (k, tap) in taps.iter().enumerate() {
                    acc += tap * src[j0 + k * stride];
                }
                dst[base + i * stride] = acc / wsum_full;
            }
        }
        dst
    };

    let horizontal = pass(values, w, 1, h, w);

    // vertical pass runs row by row so reads stay contiguous; the tap
    // order matches the generic pass exactly
    let mut dst = vec![0.0; w * h];
    for y in 0..h {
        let lo = y.saturating_sub(r);
        let hi = (y + r).min(h - 1);
        let wsum: f64 = if hi - lo == 2 * r {
            wsum_full
        } else {
            taps[(lo + r - y)..=(hi + r - y)].iter().sum()
        };
        let drow = &mut dst[y * w..(y + 1) * w];
        for j in lo..=hi {
            let tap = taps[j + r - y];
            let srow = &horizontal[j * w..(j + 1) * w];
            for x in 0..w {
                drow[x] += tap * srow[x];
            }
        }
        for v in drow.iter_mut() {
            *v /= wsum;
        }
    }
    dst
}

/// Affine rescale to [0, 1]; a constant map becomes all zeros.
pub fn minmax_normalize(map: &SaliencyMap) -> SaliencyMap {
    let mut min = f64::INFINITY;
    let mut max = f64::NEG_INFINITY;
    for &v in map.values() {
        if v < min {
            min = v;
        }
        if v > max {
            max = v;
        }
    }
    let range = max - min;
    let values = if range > 0.0 {
        map.values().iter().map(|v| (v - min) / range).collect()
    } else {
        vec![0.0; map.values().len()]
    };
    SaliencyMap {
        width: map.width(),
        height: map.height(),
        values,
    }
}
