//! Dataset file formats.
//!
//! JSONL is the primary format: one object per line,
//! `{"id": int?, "label": int, "strokes": [[[x,y],...],...], "noisy": bool?}`.
//! Ids are assigned by file order when absent. The optional `noisy` field
//! carries the injected-mislabel mask of synthetic datasets.
//!
//! CSV is a flat alternative with columns
//! `id,label,stroke_index,point_index,x,y` (one row per point). The fixed
//! column set cannot carry the noise mask, so CSV round-trips drop it.
//!
//! Neither format stores the class count; loaders infer `k` as
//! `max(label) + 1` and callers that know the true count re-check with
//! [`Dataset::with_class_count`].

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Dataset, DatasetError, Point, Stroke, StrokeSample};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatasetFormat {
    Jsonl,
    Csv,
}

impl std::str::FromStr for DatasetFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "jsonl" => Ok(DatasetFormat::Jsonl),
            "csv" => Ok(DatasetFormat::Csv),
            other => Err(format!("unknown dataset format '{other}' (expected jsonl or csv)")),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct JsonlRecord {
    #[serde(skip_serializing_if = "Option::is_none")]
    id: Option<u64>,
    label: usize,
    strokes: Vec<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    noisy: Option<bool>,
}

pub fn load_dataset(path: &Path, format: DatasetFormat) -> Result<Dataset, DatasetError> {
    match format {
        DatasetFormat::Jsonl => load_jsonl(path),
        DatasetFormat::Csv => load_csv(path),
    }
}

pub fn write_dataset(dataset: &Dataset, path: &Path, format: DatasetFormat) -> Result<(), DatasetError> {
    match format {
        DatasetFormat::Jsonl => write_jsonl(dataset, path),
        DatasetFormat::Csv => write_csv(dataset, path),
    }
}

fn load_jsonl(path: &Path) -> Result<Dataset, DatasetError> {
    let shown = path.display().to_string();
    let reader = BufReader::new(File::open(path)?);
    let mut samples = Vec::new();
    let mut mask = Vec::new();
    let mut any_mask = false;
    let mut k = 0usize;
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: JsonlRecord = serde_json::from_str(&line).map_err(|e| DatasetError::Parse {
            path: shown.clone(),
            line: lineno + 1,
            msg: e.to_string(),
        })?;
        let id = rec.id.unwrap_or(samples.len() as u64);
        let strokes = strokes_from_raw(id, &rec.strokes)?;
        k = k.max(rec.label + 1);
        samples.push(StrokeSample::new(id, rec.label, strokes));
        any_mask |= rec.noisy.is_some();
        mask.push(rec.noisy.unwrap_or(false));
    }
    if samples.is_empty() {
        return Err(DatasetError::Empty { path: shown });
    }
    Dataset::new(samples, k, any_mask.then_some(mask))
}

fn write_jsonl(dataset: &Dataset, path: &Path) -> Result<(), DatasetError> {
    let mut w = BufWriter::new(File::create(path)?);
    for (i, s) in dataset.samples.iter().enumerate() {
        let rec = JsonlRecord {
            id: Some(s.id),
            label: s.label,
            strokes: s
                .strokes
                .iter()
                .map(|st| st.points.iter().map(|p| [p.x, p.y]).collect())
                .collect(),
            noisy: dataset.noise_mask.as_ref().map(|m| m[i]),
        };
        serde_json::to_writer(&mut w, &rec).map_err(std::io::Error::other)?;
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

fn strokes_from_raw(id: u64, raw: &[Vec<[f64; 2]>]) -> Result<Vec<Stroke>, DatasetError> {
    if raw.is_empty() {
        return Err(DatasetError::InvalidRecord { record: id, msg: "empty stroke list".into() });
    }
    raw.iter()
        .enumerate()
        .map(|(si, pts)| {
            if pts.is_empty() {
                return Err(DatasetError::InvalidRecord {
                    record: id,
                    msg: format!("stroke {si} has no points"),
                });
            }
            Ok(Stroke::new(pts.iter().map(|&[x, y]| Point::new(x, y)).collect()))
        })
        .collect()
}

const CSV_HEADER: &str = "id,label,stroke_index,point_index,x,y";

fn load_csv(path: &Path) -> Result<Dataset, DatasetError> {
    let shown = path.display().to_string();
    let reader = BufReader::new(File::open(path)?);
    let mut lines = reader.lines().enumerate();

    let header = match lines.next() {
        Some((_, line)) => line?,
        None => return Err(DatasetError::Empty { path: shown }),
    };
    if header.trim() != CSV_HEADER {
        return Err(DatasetError::Parse {
            path: shown,
            line: 1,
            msg: format!("expected header '{CSV_HEADER}', got '{}'", header.trim()),
        });
    }

    // Rows for one sample must be contiguous, strokes and points in order.
    let mut samples: Vec<StrokeSample> = Vec::new();
    let mut current: Option<StrokeSample> = None;
    let mut k = 0usize;
    for (lineno, line) in lines {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let parse = |msg: String| DatasetError::Parse { path: shown.clone(), line: lineno + 1, msg };
        let fields: Vec<&str> = line.trim().split(',').collect();
        if fields.len() != 6 {
            return Err(parse(format!("expected 6 columns, got {}", fields.len())));
        }
        let id: u64 = fields[0].parse().map_err(|e| parse(format!("bad id: {e}")))?;
        let label: usize = fields[1].parse().map_err(|e| parse(format!("bad label: {e}")))?;
        let stroke_index: usize = fields[2].parse().map_err(|e| parse(format!("bad stroke_index: {e}")))?;
        let point_index: usize = fields[3].parse().map_err(|e| parse(format!("bad point_index: {e}")))?;
        let x: f64 = fields[4].parse().map_err(|e| parse(format!("bad x: {e}")))?;
        let y: f64 = fields[5].parse().map_err(|e| parse(format!("bad y: {e}")))?;

        let start_new = match &current {
            None => true,
            Some(s) => s.id != id,
        };
        if start_new {
            if let Some(done) = current.take() {
                samples.push(done);
            }
            if stroke_index != 0 || point_index != 0 {
                return Err(parse(format!("sample {id} must start at stroke 0, point 0")));
            }
            current = Some(StrokeSample::new(id, label, vec![Stroke::new(vec![Point::new(x, y)])]));
        } else {
            let s = current.as_mut().expect("current sample exists");
            if s.label != label {
                return Err(parse(format!("sample {id} changes label mid-file")));
            }
            if stroke_index == s.strokes.len() {
                if point_index != 0 {
                    return Err(parse(format!("sample {id} stroke {stroke_index} must start at point 0")));
                }
                s.strokes.push(Stroke::new(vec![Point::new(x, y)]));
            } else if stroke_index + 1 == s.strokes.len() {
                let stroke = s.strokes.last_mut().expect("stroke exists");
                if point_index != stroke.points.len() {
                    return Err(parse(format!(
                        "sample {id} stroke {stroke_index}: point_index {point_index} out of order"
                    )));
                }
                stroke.points.push(Point::new(x, y));
            } else {
                return Err(parse(format!("sample {id}: stroke_index {stroke_index} out of order")));
            }
        }
        k = k.max(label + 1);
    }
    if let Some(done) = current.take() {
        samples.push(done);
    }
    if samples.is_empty() {
        return Err(DatasetError::Empty { path: shown });
    }
    Dataset::new(samples, k, None)
}

fn write_csv(dataset: &Dataset, path: &Path) -> Result<(), DatasetError> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "{CSV_HEADER}")?;
    for s in &dataset.samples {
        for (si, stroke) in s.strokes.iter().enumerate() {
            for (pi, p) in stroke.points.iter().enumerate() {
                writeln!(w, "{},{},{},{},{},{}", s.id, s.label, si, pi, p.x, p.y)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}
