//! Synthetic dataset generation with planted saliency, plus brute-force
//! reference oracles used by the test and acceptance suites.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::core::{
    BlockFeatures, FrameFeatures, FrameType, GazePoint, MotionVector, Viewing, ViewingGeometry,
};
use crate::error::{Error, Result};
use crate::ingest::{
    write_features, write_gaze, GazeTable, Manifest, SequenceBundle, SequenceEntry,
};

/// Camera motion behind the planted object.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum Background {
    Static,
    /// Constant displacement in pixels per frame.
    Pan { vx: f64, vy: f64 },
    /// Radial displacement `rate * (p - center)` per frame.
    Zoom { rate: f64 },
}

/// How the counterpart-viewing gaze relates to the primary viewing.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum CounterpartMode {
    /// Fresh draws from the same observer model.
    Independent,
    /// Primary gaze plus isotropic Gaussian noise of this many degrees.
    Twin { noise_deg: f64 },
}

/// Full description of a synthetic sequence. Generation is
/// bit-deterministic given `seed`.
#[derive(Debug, Clone, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthSpec {
    pub sequence_id: String,
    /// Frame dimensions in pixels; multiples of `block_size`.
    pub width: usize,
    pub height: usize,
    pub frame_count: usize,
    pub block_size: usize,
    /// I-frame period; frame 0 is always I.
    pub gop: usize,
    /// Planted region: a disk of `region_radius` px whose center orbits
    /// `region_base` at `orbit_radius` px, one revolution per
    /// `orbit_period` frames (orbit_radius 0 keeps it static).
    pub region_base: (f64, f64),
    pub region_radius: f64,
    pub orbit_radius: f64,
    pub orbit_period: f64,
    pub background: Background,
    pub observers: usize,
    /// Mixture weight: probability an observer fixates the planted
    /// region instead of sampling the center-bias Gaussian.
    pub mixture_w: f64,
    /// Fixation noise, degrees of visual angle.
    pub gaze_noise_deg: f64,
    /// Center-bias Gaussian in normalized frame coordinates.
    pub bias_mean: [f64; 2],
    pub bias_sigma: [f64; 2],
    pub counterpart: CounterpartMode,
    /// Scale of the planted high-AC DCT template.
    pub contrast: f64,
    /// Pixels per degree the implied geometry should produce.
    pub ppd: f64,
    pub seed: u64,
}

impl SynthSpec {
    /// CIF-sized single-object defaults; callers override what they vary.
    pub fn cif(sequence_id: &str, seed: u64) -> SynthSpec {
        SynthSpec {
            sequence_id: sequence_id.to_string(),
            width: 352,
            height: 288,
            frame_count: 60,
            block_size: 8,
            gop: 30,
            region_base: (176.0, 144.0),
            region_radius: 24.0,
            orbit_radius: 40.0,
            orbit_period: 120.0,
            background: Background::Static,
            observers: 12,
            mixture_w: 0.8,
            gaze_noise_deg: 0.3,
            bias_mean: [0.5, 0.5],
            bias_sigma: [0.17, 0.17],
            counterpart: CounterpartMode::Independent,
            contrast: 2.0,
            ppd: 16.0,
            seed,
        }
    }

    /// Geometry with display = screen = frame and a viewing distance
    /// chosen to hit the requested pixels-per-degree.
    pub fn geometry(&self) -> ViewingGeometry {
        let diagonal_in = 10.0;
        let diag_px = ((self.width * self.width + self.height * self.height) as f64).sqrt();
        let pitch_cm = diagonal_in * 2.54 / diag_px;
        let distance_cm = self.ppd * pitch_cm / (2.0 * 0.5_f64.to_radians().tan());
        ViewingGeometry {
            screen_w_px: self.width as u32,
            screen_h_px: self.height as u32,
            screen_diagonal_in: diagonal_in,
            viewing_distance_cm: distance_cm,
            display_w_px: self.width as u32,
            display_h_px: self.height as u32,
        }
    }

    /// Planted region center at frame `t`.
    pub fn region_center(&self, t: usize) -> (f64, f64) {
        if self.orbit_radius == 0.0 {
            return self.region_base;
        }
        let phase = 2.0 * std::f64::consts::PI * t as f64 / self.orbit_period;
        (
            self.region_base.0 + self.orbit_radius * phase.cos(),
            self.region_base.1 + self.orbit_radius * phase.sin(),
        )
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |name: &'static str, reason: String| Err(Error::InvalidParameter { name, reason });
        if ![4usize, 8, 16].contains(&self.block_size) {
            return bad("block_size", format!("must be 4, 8 or 16, got {}", self.block_size));
        }
        if self.width % self.block_size != 0 || self.height % self.block_size != 0 {
            return bad(
                "width/height",
                format!(
                    "{}x{} not a multiple of block size {}",
                    self.width, self.height, self.block_size
                ),
            );
        }
        if self.frame_count == 0 {
            return bad("frame_count", "must be >= 1".into());
        }
        if self.gop == 0 {
            return bad("gop", "must be >= 1".into());
        }
        if self.observers == 0 {
            return bad("observers", "must be >= 1".into());
        }
        if !(0.0..=1.0).contains(&self.mixture_w) {
            return bad("mixture_w", format!("must be in [0, 1], got {}", self.mixture_w));
        }
        if !(self.region_radius > 0.0) {
            return bad("region_radius", format!("must be > 0, got {}", self.region_radius));
        }
        if !(self.ppd > 0.0) {
            return bad("ppd", format!("must be > 0, got {}", self.ppd));
        }
        if self.bias_sigma.iter().any(|s| !(*s > 0.0)) {
            return bad("bias_sigma", format!("must be > 0, got {:?}", self.bias_sigma));
        }
        if self.orbit_radius > 0.0 && !(self.orbit_period > 0.0) {
            return bad("orbit_period", "must be > 0 when orbiting".into());
        }
        for t in 0..self.frame_count {
            let (cx, cy) = self.region_center(t);
            if cx - self.region_radius < 0.0
                || cy - self.region_radius < 0.0
                || cx + self.region_radius >= self.width as f64
                || cy + self.region_radius >= self.height as f64
            {
                return bad(
                    "region",
                    format!("planted region leaves the frame at frame {t}"),
                );
            }
        }
        Ok(())
    }
}

/// High-AC DCT template for planted blocks, scaled by `contrast`.
const PLANTED_DCT: [i32; 9] = [0, 18, -12, 9, -7, 5, -4, 3, -2];

fn quantize_quarter_pel(d: (f64, f64)) -> MotionVector {
    MotionVector {
        dx: (d.0 * 4.0).round() as i32,
        dy: (d.1 * 4.0).round() as i32,
    }
}

fn background_displacement(bg: Background, x: f64, y: f64, cx: f64, cy: f64) -> (f64, f64) {
    match bg {
        Background::Static => (0.0, 0.0),
        Background::Pan { vx, vy } => (vx, vy),
        Background::Zoom { rate } => (rate * (x - cx), rate * (y - cy)),
    }
}

fn gauss_pair(rng: &mut impl Rng) -> (f64, f64) {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    let r = (-2.0 * u1.ln()).sqrt();
    let theta = 2.0 * std::f64::consts::PI * u2;
    (r * theta.cos(), r * theta.sin())
}

fn generate_frames(spec: &SynthSpec, rng: &mut ChaCha8Rng) -> Vec<FrameFeatures> {
    let grid_w = spec.width / spec.block_size;
    let grid_h = spec.height / spec.block_size;
    let (fcx, fcy) = (spec.width as f64 / 2.0, spec.height as f64 / 2.0);
    let mut frames = Vec::with_capacity(spec.frame_count);
    for t in 0..spec.frame_count {
        let frame_type = if t % spec.gop == 0 { FrameType::I } else { FrameType::P };
        let (rcx, rcy) = spec.region_center(t);
        let object_disp = if t == 0 {
            (0.0, 0.0)
        } else {
            let prev = spec.region_center(t - 1);
            (rcx - prev.0, rcy - prev.1)
        };
        let mut blocks = Vec::with_capacity(grid_w * grid_h);
        for by in 0..grid_h {
            for bx in 0..grid_w {
                let x = (bx * spec.block_size) as f64 + spec.block_size as f64 / 2.0;
                let y = (by * spec.block_size) as f64 + spec.block_size as f64 / 2.0;
                let inside =
                    (x - rcx).powi(2) + (y - rcy).powi(2) <= spec.region_radius.powi(2);
                let bg_disp = background_displacement(spec.background, x, y, fcx, fcy);
                let disp = if inside { object_disp } else { bg_disp };
                let mv = quantize_quarter_pel(disp);
                let dct: Vec<i32> = if inside {
                    PLANTED_DCT
                        .iter()
                        .map(|v| (*v as f64 * spec.contrast).round() as i32)
                        .collect()
                } else {
                    let mut d = vec![rng.gen_range(-16..=16)];
                    d.extend((0..8).map(|_| rng.gen_range(-2..=2)));
                    d
                };
                let residual = if frame_type == FrameType::P {
                    let dm = mv.displacement_px();
                    ((dm.0 - bg_disp.0).powi(2) + (dm.1 - bg_disp.1).powi(2)).sqrt()
                } else {
                    0.0
                };
                let ac_energy: f64 = dct[1..].iter().map(|v| (*v as f64).powi(2)).sum();
                let bits = (8.0 + 3.0 * ac_energy.sqrt() + 24.0 * residual).round() as u32;
                blocks.push(BlockFeatures {
                    mv: (frame_type == FrameType::P).then_some(mv),
                    dct,
                    bits,
                });
            }
        }
        frames.push(FrameFeatures {
            frame: t,
            frame_type,
            block_size: spec.block_size,
            grid_w,
            grid_h,
            blocks,
        });
    }
    frames
}

fn clamp_inside(p: (f64, f64), w: usize, h: usize) -> (f64, f64) {
    (
        p.0.clamp(0.0, w as f64 - 1e-3),
        p.1.clamp(0.0, h as f64 - 1e-3),
    )
}

fn bias_sample(spec: &SynthSpec, rng: &mut ChaCha8Rng) -> (f64, f64) {
    loop {
        let (z0, z1) = gauss_pair(rng);
        let x = (spec.bias_mean[0] + z0 * spec.bias_sigma[0]) * spec.width as f64;
        let y = (spec.bias_mean[1] + z1 * spec.bias_sigma[1]) * spec.height as f64;
        if x >= 0.0 && y >= 0.0 && x < spec.width as f64 && y < spec.height as f64 {
            return (x, y);
        }
    }
}

fn primary_sample(spec: &SynthSpec, t: usize, noise_px: f64, rng: &mut ChaCha8Rng) -> (f64, f64) {
    if rng.gen::<f64>() < spec.mixture_w {
        let (cx, cy) = spec.region_center(t);
        let (z0, z1) = gauss_pair(rng);
        clamp_inside((cx + z0 * noise_px, cy + z1 * noise_px), spec.width, spec.height)
    } else {
        bias_sample(spec, rng)
    }
}

fn generate_gaze(spec: &SynthSpec, rng: &mut ChaCha8Rng) -> Result<GazeTable> {
    let noise_px = spec.gaze_noise_deg * spec.ppd;
    let mut table = GazeTable::default();
    for t in 0..spec.frame_count {
        for o in 0..spec.observers {
            let observer = format!("obs{o:02}");
            let primary = primary_sample(spec, t, noise_px, rng);
            let counterpart = match spec.counterpart {
                CounterpartMode::Independent => primary_sample(spec, t, noise_px, rng),
                CounterpartMode::Twin { noise_deg } => {
                    let s = noise_deg * spec.ppd;
                    let (z0, z1) = gauss_pair(rng);
                    clamp_inside(
                        (primary.0 + z0 * s, primary.1 + z1 * s),
                        spec.width,
                        spec.height,
                    )
                }
            };
            for (viewing, (x, y)) in [
                (Viewing::Primary, primary),
                (Viewing::Counterpart, counterpart),
            ] {
                table.insert(GazePoint {
                    x,
                    y,
                    frame: t,
                    observer: observer.clone(),
                    viewing,
                })?;
            }
        }
    }
    Ok(table)
}

/// Generate a complete in-memory sequence from a spec.
pub fn generate(spec: &SynthSpec) -> Result<SequenceBundle> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let frames = generate_frames(spec, &mut rng);
    let gaze = generate_gaze(spec, &mut rng)?;
    Ok(SequenceBundle {
        sequence_id: spec.sequence_id.clone(),
        geometry: spec.geometry(),
        frames,
        gaze,
        gaze_to_map_scale: 1.0,
    })
}

/// Write one bundle's feature and gaze files into `dir`, returning the
/// manifest entry pointing at them (paths relative to `dir`).
pub fn write_bundle(bundle: &SequenceBundle, dir: &Path) -> Result<SequenceEntry> {
    std::fs::create_dir_all(dir)?;
    let feat_name = format!("{}.featjsonl", bundle.sequence_id);
    let gaze_name = format!("{}.csv", bundle.sequence_id);
    let mut feat = std::io::BufWriter::new(std::fs::File::create(dir.join(&feat_name))?);
    write_features(&bundle.frames, &mut feat)?;
    std::io::Write::flush(&mut feat)?;
    let mut gz = std::io::BufWriter::new(std::fs::File::create(dir.join(&gaze_name))?);
    write_gaze(&bundle.sequence_id, &bundle.gaze, &mut gz)?;
    std::io::Write::flush(&mut gz)?;
    Ok(SequenceEntry {
        id: bundle.sequence_id.clone(),
        features: feat_name.into(),
        gaze: gaze_name.into(),
        geometry: bundle.geometry,
        gaze_to_map_scale: bundle.gaze_to_map_scale,
    })
}

/// Write a manifest for previously written bundles.
pub fn write_manifest(entries: Vec<SequenceEntry>, path: &Path) -> Result<()> {
    let manifest = Manifest {
        sequences: entries,
        models: Default::default(),
    };
    let text = toml::to_string(&manifest).map_err(|e| Error::Manifest(e.to_string()))?;
    std::fs::write(path, text)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// Reference oracles. Deliberately naive: no shared code with the
// implementations they check.

/// AUC by exhaustive pairwise comparison: (wins + half ties) / (|P|*|N|).
pub fn oracle_auc(positives: &[f64], negatives: &[f64]) -> f64 {
    let mut score = 0.0;
    for p in positives {
        for n in negatives {
            if p > n {
                score += 1.0;
            } else if p == n {
                score += 0.5;
            }
        }
    }
    score / (positives.len() * negatives.len()) as f64
}

/// Direct summation of `kernel(dx, dy)` over weighted impulses, with the
/// kernel treated as zero beyond `support` pixels.
pub fn oracle_convolve(
    width: usize,
    height: usize,
    impulses: &[(f64, f64, f64)],
    support: f64,
    kernel: impl Fn(f64, f64) -> f64,
) -> Vec<f64> {
    let mut out = vec![0.0; width * height];
    for y in 0..height {
        for x in 0..width {
            let mut acc = 0.0;
            for &(ix, iy, w) in impulses {
                let (dx, dy) = (x as f64 - ix, y as f64 - iy);
                if dx * dx + dy * dy <= support * support {
                    acc += w * kernel(dx, dy);
                }
            }
            out[y * width + x] = acc;
        }
    }
    out
}
