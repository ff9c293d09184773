//! Parsers for the three on-disk inputs: feature streams (`.featjsonl`),
//! gaze tables (`.csv`) and the TOML manifest tying them together.
//!
//! Parsing is total: every input either yields a validated in-memory
//! object or an error naming the file, line and violated rule.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::core::{
    BlockFeatures, FrameFeatures, FrameType, GazePoint, MotionVector, Viewing, ViewingGeometry,
};
use crate::error::{Error, Result};

/// Unknown-key handling for all loaders.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ParseMode {
    /// Reject unknown keys.
    #[default]
    Strict,
    /// Warn on stderr and continue.
    Lenient,
}

// ---------------------------------------------------------------------------
// Feature files

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct FrameRecord {
    frame: usize,
    #[serde(rename = "type")]
    frame_type: String,
    block_size: usize,
    grid_w: usize,
    grid_h: usize,
    blocks: Vec<BlockRecord>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BlockRecord {
    #[serde(skip_serializing_if = "Option::is_none")]
    mv: Option<[i32; 2]>,
    dct: Vec<i32>,
    bits: u32,
}

fn frame_from_record(rec: FrameRecord, path: &Path, line: usize) -> Result<FrameFeatures> {
    let frame_type = match rec.frame_type.as_str() {
        "I" => FrameType::I,
        "P" => FrameType::P,
        other => {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line,
                reason: format!("unknown frame type {other:?}, expected \"I\" or \"P\""),
            })
        }
    };
    let features = FrameFeatures {
        frame: rec.frame,
        frame_type,
        block_size: rec.block_size,
        grid_w: rec.grid_w,
        grid_h: rec.grid_h,
        blocks: rec
            .blocks
            .into_iter()
            .map(|b| BlockFeatures {
                mv: b.mv.map(|[dx, dy]| MotionVector { dx, dy }),
                dct: b.dct,
                bits: b.bits,
            })
            .collect(),
    };
    features.validate().map_err(|e| Error::InvalidFrame {
        path: path.to_path_buf(),
        frame: features.frame,
        reason: e.to_string(),
    })?;
    Ok(features)
}

fn strip_unknown_keys(value: &mut serde_json::Value, path: &Path, line: usize) {
    let known_frame = ["frame", "type", "block_size", "grid_w", "grid_h", "blocks"];
    let known_block = ["mv", "dct", "bits"];
    if let Some(obj) = value.as_object_mut() {
        obj.retain(|k, _| {
            let keep = known_frame.contains(&k.as_str());
            if !keep {
                eprintln!("warning: {}:{line}: ignoring unknown key {k:?}", path.display());
            }
            keep
        });
        if let Some(blocks) = obj.get_mut("blocks").and_then(|b| b.as_array_mut()) {
            for block in blocks {
                if let Some(bo) = block.as_object_mut() {
                    bo.retain(|k, _| {
                        let keep = known_block.contains(&k.as_str());
                        if !keep {
                            eprintln!(
                                "warning: {}:{line}: ignoring unknown block key {k:?}",
                                path.display()
                            );
                        }
                        keep
                    });
                }
            }
        }
    }
}

/// Load a `.featjsonl` file: one frame object per line, frames indexed
/// contiguously from 0.
pub fn load_features(path: impl AsRef<Path>, mode: ParseMode) -> Result<Vec<FrameFeatures>> {
    let path = path.as_ref();
    let reader = BufReader::new(std::fs::File::open(path)?);
    let mut frames = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        let lineno = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let rec: FrameRecord = match mode {
            ParseMode::Strict => serde_json::from_str(&line).map_err(|e| Error::Parse {
                path: path.to_path_buf(),
                line: lineno,
                reason: e.to_string(),
            })?,
            ParseMode::Lenient => {
                let mut value: serde_json::Value =
                    serde_json::from_str(&line).map_err(|e| Error::Parse {
                        path: path.to_path_buf(),
                        line: lineno,
                        reason: e.to_string(),
                    })?;
                strip_unknown_keys(&mut value, path, lineno);
                serde_json::from_value(value).map_err(|e| Error::Parse {
                    path: path.to_path_buf(),
                    line: lineno,
                    reason: e.to_string(),
                })?
            }
        };
        let features = frame_from_record(rec, path, lineno)?;
        if features.frame != frames.len() {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: lineno,
                reason: format!(
                    "non-contiguous frame index {} (expected {})",
                    features.frame,
                    frames.len()
                ),
            });
        }
        frames.push(features);
    }
    Ok(frames)
}

/// Serialize frames in the canonical `.featjsonl` form. Inverse of
/// [`load_features`] on canonical files.
pub fn write_features(frames: &[FrameFeatures], mut out: impl Write) -> Result<()> {
    for f in frames {
        let rec = FrameRecord {
            frame: f.frame,
            frame_type: f.frame_type.to_string(),
            block_size: f.block_size,
            grid_w: f.grid_w,
            grid_h: f.grid_h,
            blocks: f
                .blocks
                .iter()
                .map(|b| BlockRecord {
                    mv: b.mv.map(|mv| [mv.dx, mv.dy]),
                    dct: b.dct.clone(),
                    bits: b.bits,
                })
                .collect(),
        };
        let json = serde_json::to_string(&rec).expect("feature record serializes");
        writeln!(out, "{json}")?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Gaze files

/// Per-sequence gaze points, unique per (observer, viewing, frame).
#[derive(Debug, Clone, Default)]
pub struct GazeTable {
    points: Vec<GazePoint>,
    index: HashMap<(String, Viewing, usize), usize>,
}

impl GazeTable {
    pub fn insert(&mut self, p: GazePoint) -> Result<()> {
        let key = (p.observer.clone(), p.viewing, p.frame);
        if self.index.contains_key(&key) {
            return Err(Error::DegenerateInput(format!(
                "duplicate gaze key (observer {:?}, {}, frame {})",
                key.0, key.1, key.2
            )));
        }
        self.index.insert(key, self.points.len());
        self.points.push(p);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[GazePoint] {
        &self.points
    }

    pub fn get(&self, observer: &str, viewing: Viewing, frame: usize) -> Option<&GazePoint> {
        self.index
            .get(&(observer.to_string(), viewing, frame))
            .map(|i| &self.points[*i])
    }

    pub fn frame_points(&self, frame: usize, viewing: Viewing) -> Vec<&GazePoint> {
        self.points
            .iter()
            .filter(|p| p.frame == frame && p.viewing == viewing)
            .collect()
    }

    pub fn has_viewing(&self, viewing: Viewing) -> bool {
        self.points.iter().any(|p| p.viewing == viewing)
    }

    pub fn max_frame(&self) -> Option<usize> {
        self.points.iter().map(|p| p.frame).max()
    }
}

const GAZE_HEADER: [&str; 6] = ["sequence", "frame", "observer", "viewing", "x", "y"];

/// Load a gaze CSV with header `sequence,frame,observer,viewing,x,y`.
/// Coordinates are display pixels, half-open in `[0, display_dim)`.
pub fn load_gaze(
    path: impl AsRef<Path>,
    display_w: u32,
    display_h: u32,
    mode: ParseMode,
) -> Result<GazeTable> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .flexible(mode == ParseMode::Lenient)
        .from_path(path)
        .map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: 0,
            reason: e.to_string(),
        })?;

    let headers = reader
        .headers()
        .map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: 1,
            reason: e.to_string(),
        })?
        .clone();
    for expected in GAZE_HEADER {
        if !headers.iter().any(|h| h == expected) {
            return Err(Error::Parse {
                path: path.to_path_buf(),
                line: 1,
                reason: format!("missing column {expected:?}"),
            });
        }
    }
    for h in headers.iter() {
        if !GAZE_HEADER.contains(&h) {
            match mode {
                ParseMode::Strict => {
                    return Err(Error::Parse {
                        path: path.to_path_buf(),
                        line: 1,
                        reason: format!("unknown column {h:?}"),
                    })
                }
                ParseMode::Lenient => {
                    eprintln!("warning: {}: ignoring unknown column {h:?}", path.display())
                }
            }
        }
    }
    let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
    let (c_frame, c_obs, c_view, c_x, c_y) = (
        col("frame"),
        col("observer"),
        col("viewing"),
        col("x"),
        col("y"),
    );

    let mut table = GazeTable::default();
    for (i, record) in reader.records().enumerate() {
        let lineno = i + 2;
        let parse_err = |reason: String| Error::Parse {
            path: path.to_path_buf(),
            line: lineno,
            reason,
        };
        let record = record.map_err(|e| parse_err(e.to_string()))?;
        let field = |c: usize| {
            record
                .get(c)
                .ok_or_else(|| parse_err(format!("missing field {}", GAZE_HEADER[c])))
        };
        let frame: usize = field(c_frame)?
            .parse()
            .map_err(|e| parse_err(format!("bad frame index: {e}")))?;
        let viewing = match field(c_view)? {
            "primary" => Viewing::Primary,
            "counterpart" => Viewing::Counterpart,
            other => return Err(parse_err(format!("unknown viewing label {other:?}"))),
        };
        let x: f64 = field(c_x)?
            .parse()
            .map_err(|e| parse_err(format!("bad x: {e}")))?;
        let y: f64 = field(c_y)?
            .parse()
            .map_err(|e| parse_err(format!("bad y: {e}")))?;
        if !(0.0..display_w as f64).contains(&x) || !(0.0..display_h as f64).contains(&y) {
            return Err(parse_err(format!(
                "gaze ({x}, {y}) outside display {display_w}x{display_h}"
            )));
        }
        table
            .insert(GazePoint {
                x,
                y,
                frame,
                observer: field(c_obs)?.to_string(),
                viewing,
            })
            .map_err(|e| parse_err(e.to_string()))?;
    }
    Ok(table)
}

/// Write a gaze table in the canonical CSV form.
pub fn write_gaze(sequence_id: &str, table: &GazeTable, mut out: impl Write) -> Result<()> {
    writeln!(out, "sequence,frame,observer,viewing,x,y")?;
    for p in table.points() {
        writeln!(
            out,
            "{sequence_id},{},{},{},{},{}",
            p.frame, p.observer, p.viewing, p.x, p.y
        )?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Manifest

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceEntry {
    pub id: String,
    pub features: PathBuf,
    pub gaze: PathBuf,
    pub geometry: ViewingGeometry,
    /// Scale from display pixel coordinates to saliency-map coordinates.
    pub gaze_to_map_scale: f64,
}

/// Parsed manifest: one entry per sequence plus optional per-model
/// parameter tables consumed by the model registry.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Manifest {
    #[serde(rename = "sequence")]
    pub sequences: Vec<SequenceEntry>,
    #[serde(default)]
    pub models: HashMap<String, toml::Table>,
}

/// A fully loaded, cross-validated sequence: features, gaze and geometry.
#[derive(Debug, Clone)]
pub struct SequenceBundle {
    pub sequence_id: String,
    pub geometry: ViewingGeometry,
    pub frames: Vec<FrameFeatures>,
    pub gaze: GazeTable,
    pub gaze_to_map_scale: f64,
}

impl SequenceBundle {
    pub fn frame_count(&self) -> usize {
        self.frames.len()
    }

    /// Saliency-map resolution implied by the display size and scale.
    pub fn map_dims(&self) -> (usize, usize) {
        (
            (self.geometry.display_w_px as f64 * self.gaze_to_map_scale).round() as usize,
            (self.geometry.display_h_px as f64 * self.gaze_to_map_scale).round() as usize,
        )
    }

    /// Gaze points of one frame, scaled to map coordinates.
    pub fn map_gaze(&self, frame: usize, viewing: Viewing) -> Vec<(f64, f64)> {
        self.gaze
            .frame_points(frame, viewing)
            .into_iter()
            .map(|p| (p.x * self.gaze_to_map_scale, p.y * self.gaze_to_map_scale))
            .collect()
    }
}

pub fn load_manifest(path: impl AsRef<Path>) -> Result<Manifest> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let manifest: Manifest =
        toml::from_str(&text).map_err(|e| Error::Manifest(format!("{}: {e}", path.display())))?;
    if manifest.sequences.is_empty() {
        return Err(Error::Manifest(format!(
            "{}: manifest lists no sequences",
            path.display()
        )));
    }
    Ok(manifest)
}

/// Load every sequence referenced by a manifest, in manifest order.
pub fn load_bundles(manifest_path: impl AsRef<Path>, mode: ParseMode) -> Result<Vec<SequenceBundle>> {
    let manifest_path = manifest_path.as_ref();
    let manifest = load_manifest(manifest_path)?;
    let base = manifest_path.parent().unwrap_or(Path::new("."));
    manifest
        .sequences
        .iter()
        .map(|entry| load_bundle(entry, base, mode))
        .collect()
}

pub fn load_bundle(entry: &SequenceEntry, base: &Path, mode: ParseMode) -> Result<SequenceBundle> {
    entry.geometry.validate()?;
    if !(entry.gaze_to_map_scale > 0.0) {
        return Err(Error::Manifest(format!(
            "sequence {:?}: gaze_to_map_scale must be > 0",
            entry.id
        )));
    }
    let resolve = |p: &Path| if p.is_absolute() { p.to_path_buf() } else { base.join(p) };
    let feature_path = resolve(&entry.features);
    let gaze_path = resolve(&entry.gaze);
    for p in [&feature_path, &gaze_path] {
        if !p.exists() {
            return Err(Error::Manifest(format!(
                "sequence {:?}: referenced file {} does not exist",
                entry.id,
                p.display()
            )));
        }
    }
    let frames = load_features(&feature_path, mode)?;
    let gaze = load_gaze(
        &gaze_path,
        entry.geometry.display_w_px,
        entry.geometry.display_h_px,
        mode,
    )?;
    if let Some(max_frame) = gaze.max_frame() {
        if max_frame >= frames.len() {
            return Err(Error::Manifest(format!(
                "sequence {:?}: gaze references frame {max_frame} but only {} frames exist",
                entry.id,
                frames.len()
            )));
        }
    }
    Ok(SequenceBundle {
        sequence_id: entry.id.clone(),
        geometry: entry.geometry,
        frames,
        gaze,
        gaze_to_map_scale: entry.gaze_to_map_scale,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn feature_fixture() -> String {
        let block = r#"{"dct":[1,2],"bits":3}"#;
        let p_block = r#"{"mv":[1,-2],"dct":[0],"bits":5}"#;
        let i_blocks: Vec<&str> = vec![block; 16];
        let p_blocks: Vec<&str> = vec![p_block; 16];
        format!(
            "{{\"frame\":0,\"type\":\"I\",\"block_size\":8,\"grid_w\":4,\"grid_h\":4,\"blocks\":[{}]}}\n\
             {{\"frame\":1,\"type\":\"P\",\"block_size\":8,\"grid_w\":4,\"grid_h\":4,\"blocks\":[{}]}}\n",
            i_blocks.join(","),
            p_blocks.join(",")
        )
    }

    #[test]
    fn feature_file_two_frames() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("a.featjsonl");
        std::fs::write(&path, feature_fixture()).unwrap();
        let frames = load_features(&path, ParseMode::Strict).unwrap();
        assert_eq!(frames.len(), 2);
        assert_eq!(frames[0].frame_type, FrameType::I);
        let mvs = frames[1].blocks.iter().filter(|b| b.mv.is_some()).count();
        assert_eq!(mvs, 16);
    }

    #[test]
    fn mv_on_i_frame_rejected_with_frame_index() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.featjsonl");
        std::fs::write(
            &path,
            "{\"frame\":0,\"type\":\"I\",\"block_size\":8,\"grid_w\":1,\"grid_h\":1,\
             \"blocks\":[{\"mv\":[1,1],\"dct\":[],\"bits\":0}]}\n",
        )
        .unwrap();
        let err = load_features(&path, ParseMode::Strict).unwrap_err().to_string();
        assert!(err.contains("frame 0"), "{err}");
    }

    #[test]
    fn unknown_key_strict_vs_lenient() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("extra.featjsonl");
        std::fs::write(
            &path,
            "{\"frame\":0,\"type\":\"P\",\"block_size\":8,\"grid_w\":1,\"grid_h\":1,\
             \"blocks\":[{\"dct\":[],\"bits\":0}],\"extra\":1}\n",
        )
        .unwrap();
        assert!(load_features(&path, ParseMode::Strict).is_err());
        assert!(load_features(&path, ParseMode::Lenient).is_ok());
    }

    #[test]
    fn non_contiguous_frames_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("gap.featjsonl");
        std::fs::write(
            &path,
            "{\"frame\":1,\"type\":\"P\",\"block_size\":8,\"grid_w\":1,\"grid_h\":1,\
             \"blocks\":[{\"dct\":[],\"bits\":0}]}\n",
        )
        .unwrap();
        let err = load_features(&path, ParseMode::Strict).unwrap_err().to_string();
        assert!(err.contains("non-contiguous"), "{err}");
    }

    #[test]
    fn feature_round_trip_canonical() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("rt.featjsonl");
        std::fs::write(&path, feature_fixture()).unwrap();
        let frames = load_features(&path, ParseMode::Strict).unwrap();
        let mut buf = Vec::new();
        write_features(&frames, &mut buf).unwrap();
        // canonical form differs only in whitespace from the fixture
        let reloaded_path = dir.path().join("rt2.featjsonl");
        std::fs::write(&reloaded_path, &buf).unwrap();
        let reloaded = load_features(&reloaded_path, ParseMode::Strict).unwrap();
        assert_eq!(frames, reloaded);
        let mut buf2 = Vec::new();
        write_features(&reloaded, &mut buf2).unwrap();
        assert_eq!(buf, buf2);
    }

    #[test]
    fn gaze_fixture_three_rows() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.csv");
        std::fs::write(
            &path,
            "sequence,frame,observer,viewing,x,y\n\
             s,0,obs1,primary,10.5,20.0\n\
             s,0,obs2,primary,30.0,40.0\n\
             s,1,obs1,counterpart,50.0,60.0\n",
        )
        .unwrap();
        let table = load_gaze(&path, 352, 288, ParseMode::Strict).unwrap();
        assert_eq!(table.len(), 3);
        let p = table.get("obs1", Viewing::Primary, 0).unwrap();
        assert_eq!((p.x, p.y), (10.5, 20.0));
    }

    #[test]
    fn gaze_at_display_width_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.csv");
        std::fs::write(
            &path,
            "sequence,frame,observer,viewing,x,y\ns,0,o,primary,352,100\n",
        )
        .unwrap();
        assert!(load_gaze(&path, 352, 288, ParseMode::Strict).is_err());
    }

    #[test]
    fn gaze_unknown_viewing_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.csv");
        std::fs::write(
            &path,
            "sequence,frame,observer,viewing,x,y\ns,0,o,third,10,10\n",
        )
        .unwrap();
        let err = load_gaze(&path, 352, 288, ParseMode::Strict)
            .unwrap_err()
            .to_string();
        assert!(err.contains("viewing"), "{err}");
    }

    #[test]
    fn gaze_duplicate_key_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.csv");
        std::fs::write(
            &path,
            "sequence,frame,observer,viewing,x,y\n\
             s,0,o,primary,10,10\n\
             s,0,o,primary,20,20\n",
        )
        .unwrap();
        assert!(load_gaze(&path, 352, 288, ParseMode::Strict).is_err());
    }

    #[test]
    fn gaze_bulk_write_read() {
        let mut table = GazeTable::default();
        for obs in 0..15 {
            for viewing in [Viewing::Primary, Viewing::Counterpart] {
                for frame in 0..300 {
                    table
                        .insert(GazePoint {
                            x: (obs * 7 + frame) as f64 % 352.0,
                            y: (obs * 11 + frame) as f64 % 288.0,
                            frame,
                            observer: format!("obs{obs}"),
                            viewing,
                        })
                        .unwrap();
                }
            }
        }
        assert_eq!(table.len(), 9000);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bulk.csv");
        let mut buf = Vec::new();
        write_gaze("s", &table, &mut buf).unwrap();
        std::fs::write(&path, buf).unwrap();
        let loaded = load_gaze(&path, 352, 288, ParseMode::Strict).unwrap();
        assert_eq!(loaded.len(), 9000);
        let p = loaded.get("obs3", Viewing::Counterpart, 123).unwrap();
        assert_eq!(p.x, (3 * 7 + 123) as f64 % 352.0);
        assert_eq!(p.y, (3 * 11 + 123) as f64 % 288.0);
    }
}
