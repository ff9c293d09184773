//! Score aggregation: per-cell mean/SEM/CI summaries, sequence ranking
//! and top-performer counting by confidence-interval overlap.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::io::Write;
use std::path::Path;

use crate::core::FrameType;
use crate::error::{Error, Result};
use crate::metrics::MetricId;

/// One frame-level score. `value` is `None` for frames a metric could
/// not score (no gaze, degenerate map); those frames never enter n.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoreRecord {
    pub model: String,
    pub sequence: String,
    pub frame: usize,
    pub frame_type: FrameType,
    pub metric: MetricId,
    pub value: Option<f64>,
}

/// Frame-level score table with at most one record per
/// (model, sequence, frame, metric) key.
#[derive(Debug, Clone, Default)]
pub struct ScoreTable {
    records: Vec<ScoreRecord>,
}

impl ScoreTable {
    pub fn new() -> ScoreTable {
        ScoreTable::default()
    }

    pub fn push(&mut self, record: ScoreRecord) -> Result<()> {
        if let Some(v) = record.value {
            if !v.is_finite() {
                return Err(Error::DegenerateInput(format!(
                    "non-finite score {v} for {}/{}/{}/{}",
                    record.model, record.sequence, record.frame, record.metric
                )));
            }
        }
        self.records.push(record);
        Ok(())
    }

    pub fn records(&self) -> &[ScoreRecord] {
        &self.records
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Canonical row order: (model, sequence, frame, metric).
    pub fn sort_canonical(&mut self) {
        self.records.sort_by(|a, b| {
            (&a.model, &a.sequence, a.frame, a.metric).cmp(&(
                &b.model,
                &b.sequence,
                b.frame,
                b.metric,
            ))
        });
    }

    fn check_unique(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for r in &self.records {
            if !seen.insert((&r.model, &r.sequence, r.frame, r.metric)) {
                return Err(Error::DegenerateInput(format!(
                    "duplicate score record for {}/{}/{}/{}",
                    r.model, r.sequence, r.frame, r.metric
                )));
            }
        }
        Ok(())
    }

    /// Write `model,sequence,frame,frame_type,metric,value` rows in
    /// canonical order. An unscored frame has an empty value field.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        self.check_unique()?;
        let mut sorted = self.clone();
        sorted.sort_canonical();
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["model", "sequence", "frame", "frame_type", "metric", "value"])
            .map_err(csv_err)?;
        for r in &sorted.records {
            out.write_record([
                r.model.as_str(),
                r.sequence.as_str(),
                &r.frame.to_string(),
                &r.frame_type.to_string(),
                r.metric.as_str(),
                &r.value.map(|v| v.to_string()).unwrap_or_default(),
            ])
            .map_err(csv_err)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }

    pub fn read_csv<R: std::io::Read>(r: R) -> Result<ScoreTable> {
        let mut reader = csv::Reader::from_reader(r);
        let headers = reader.headers().map_err(csv_err)?.clone();
        let expect = ["model", "sequence", "frame", "frame_type", "metric", "value"];
        if headers.iter().collect::<Vec<_>>() != expect {
            return Err(Error::Parse {
                path: "<scores.csv>".into(),
                line: 1,
                reason: format!("expected header {expect:?}, got {headers:?}"),
            });
        }
        let mut table = ScoreTable::new();
        for (i, row) in reader.records().enumerate() {
            let row = row.map_err(csv_err)?;
            let bad = |reason: String| Error::Parse {
                path: "<scores.csv>".into(),
                line: i + 2,
                reason,
            };
            let frame_type = match &row[3] {
                "I" => FrameType::I,
                "P" => FrameType::P,
                other => return Err(bad(format!("unknown frame type {other:?}"))),
            };
            let value = if row[5].is_empty() {
                None
            } else {
                Some(
                    row[5]
                        .parse::<f64>()
                        .map_err(|e| bad(format!("bad value: {e}")))?,
                )
            };
            table.push(ScoreRecord {
                model: row[0].to_string(),
                sequence: row[1].to_string(),
                frame: row[2]
                    .parse()
                    .map_err(|e| bad(format!("bad frame index: {e}")))?,
                frame_type,
                metric: MetricId::parse(&row[4])?,
                value,
            })?;
        }
        table.check_unique()?;
        Ok(table)
    }

    pub fn load(path: &Path) -> Result<ScoreTable> {
        let file = std::fs::File::open(path)?;
        ScoreTable::read_csv(std::io::BufReader::new(file))
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::DegenerateInput(format!("csv error: {e}"))
}

/// Mean/SEM/95% CI over one cell. `frame_type` is `None` for the pooled
/// cell covering every frame the model scored.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryCell {
    pub model: String,
    pub sequence: String,
    pub metric: MetricId,
    pub frame_type: Option<FrameType>,
    pub mean: f64,
    pub sem: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Default)]
pub struct Summary {
    pub cells: Vec<SummaryCell>,
}

impl Summary {
    pub fn cell(
        &self,
        model: &str,
        sequence: &str,
        metric: MetricId,
        frame_type: Option<FrameType>,
    ) -> Option<&SummaryCell> {
        self.cells.iter().find(|c| {
            c.model == model
                && c.sequence == sequence
                && c.metric == metric
                && c.frame_type == frame_type
        })
    }

    fn pooled(&self) -> impl Iterator<Item = &SummaryCell> {
        self.cells.iter().filter(|c| c.frame_type.is_none())
    }

    /// Write `model,sequence,metric,mean,sem,ci_low,ci_high,n` rows for
    /// the pooled cells, sorted by (model, sequence, metric).
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut cells: Vec<&SummaryCell> = self.pooled().collect();
        cells.sort_by(|a, b| {
            (&a.model, &a.sequence, a.metric).cmp(&(&b.model, &b.sequence, b.metric))
        });
        let mut out = csv::Writer::from_writer(w);
        out.write_record([
            "model", "sequence", "metric", "mean", "sem", "ci_low", "ci_high", "n",
        ])
        .map_err(csv_err)?;
        for c in cells {
            out.write_record([
                c.model.as_str(),
                c.sequence.as_str(),
                c.metric.as_str(),
                &c.mean.to_string(),
                &c.sem.to_string(),
                &c.ci_low.to_string(),
                &c.ci_high.to_string(),
                &c.n.to_string(),
            ])
            .map_err(csv_err)?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

fn summarize(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt() / n.sqrt())
}

/// Aggregate frame scores into per-(model, sequence, metric) cells.
///
/// Pooled cells are always produced; `split_frame_types` adds per-type
/// cells alongside them. Cells with no scored frames are omitted rather
/// than reported as zero.
pub fn aggregate(table: &ScoreTable, split_frame_types: bool) -> Result<Summary> {
    if table.is_empty() {
        return Err(Error::DegenerateInput("empty score table".into()));
    }
    table.check_unique()?;
    let mut groups: BTreeMap<(String, String, MetricId, Option<FrameType>), Vec<f64>> =
        BTreeMap::new();
    for r in table.records() {
        let Some(v) = r.value else { continue };
        let key = (r.model.clone(), r.sequence.clone(), r.metric, None);
        groups.entry(key).or_default().push(v);
        if split_frame_types {
            let key = (
                r.model.clone(),
                r.sequence.clone(),
                r.metric,
                Some(r.frame_type),
            );
            groups.entry(key).or_default().push(v);
        }
    }
    let cells = groups
        .into_iter()
        .map(|((model, sequence, metric, frame_type), mut values)| {
            // canonical summation order makes aggregation exactly
            // permutation invariant
            values.sort_by(f64::total_cmp);
            let (mean, sem) = summarize(&values);
            SummaryCell {
                model,
                sequence,
                metric,
                frame_type,
                mean,
                sem,
                ci_low: mean - 1.96 * sem,
                ci_high: mean + 1.96 * sem,
                n: values.len(),
            }
        })
        .collect();
    Ok(Summary { cells })
}

/// Sequences ordered by decreasing mean score across the included
/// models' pooled cells; ties break lexicographically by sequence id.
pub fn rank_sequences(
    summary: &Summary,
    metric: MetricId,
    exclude: &[&str],
) -> Result<Vec<(String, f64)>> {
    if !summary.pooled().any(|c| c.metric == metric) {
        return Err(Error::Config(format!("metric {metric} not in summary")));
    }
    let mut per_sequence: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for c in summary.pooled() {
        if c.metric == metric && !exclude.contains(&c.model.as_str()) {
            per_sequence.entry(c.sequence.clone()).or_default().push(c.mean);
        }
    }
    let mut ranked: Vec<(String, f64)> = per_sequence
        .into_iter()
        .map(|(seq, means)| {
            let mean = means.iter().sum::<f64>() / means.len() as f64;
            (seq, mean)
        })
        .collect();
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    Ok(ranked)
}

/// Closed-interval overlap, the 95% CI criterion for top performers.
fn intervals_overlap(a: (f64, f64), b: (f64, f64)) -> bool {
    a.0 <= b.1 && b.0 <= a.1
}

/// For each sequence, the best model by pooled mean and every model
/// whose 95% CI overlaps the best's CI count as top performers; returns
/// appearance counts over all sequences. `exclude` typically holds "io".
pub fn top_performers(
    summary: &Summary,
    metric: MetricId,
    exclude: &[&str],
) -> Result<BTreeMap<String, usize>> {
    let sequences: BTreeSet<&str> = summary
        .pooled()
        .filter(|c| c.metric == metric)
        .map(|c| c.sequence.as_str())
        .collect();
    if sequences.is_empty() {
        return Err(Error::Config(format!("metric {metric} not in summary")));
    }
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for seq in sequences {
        let cells: Vec<&SummaryCell> = summary
            .pooled()
            .filter(|c| {
                c.metric == metric && c.sequence == seq && !exclude.contains(&c.model.as_str())
            })
            .collect();
        let Some(best) = cells.iter().max_by(|a, b| {
            a.mean
                .total_cmp(&b.mean)
                .then_with(|| b.model.cmp(&a.model))
        }) else {
            continue;
        };
        for c in &cells {
            if intervals_overlap((c.ci_low, c.ci_high), (best.ci_low, best.ci_high)) {
                *counts.entry(c.model.clone()).or_insert(0) += 1;
            }
        }
    }
    Ok(counts)
}
