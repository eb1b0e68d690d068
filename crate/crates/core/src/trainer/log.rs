//! Per-iteration training records and their CSV layout.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::TrainError;

/// Fixed column order of the log CSV (schema v1).
pub const CSV_HEADER: &str = "iteration,train_loss,test_error,equivalent_set_size,grad_norm,e1_norm,e2_norm,e3_norm,n_well,n_confusing,n_noisy,masked_low_quota_frac";

/// One evaluation-point snapshot. Batch-side quantities (loss, gradient
/// and group norms, group counts) describe the mini-batch of that
/// iteration at the pre-update parameters; `test_error` and
/// `equivalent_set_size` describe the state after the iteration
/// completed.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainRecord {
    pub iteration: u64,
    pub train_loss: f64,
    pub test_error: f64,
    pub equivalent_set_size: f64,
    /// Norm of the λ-free mini-batch gradient.
    pub grad_norm: f64,
    pub e1_norm: f64,
    pub e2_norm: f64,
    pub e3_norm: f64,
    /// Well-recognized / confusing / noisy sample counts in the batch.
    pub group_counts: [usize; 3],
    /// Fraction of noise-masked samples whose quota is below 0.1; absent
    /// when the dataset has no mask or the sampler is off.
    pub masked_low_quota_frac: Option<f64>,
}

impl TrainRecord {
    pub fn accuracy(&self) -> f64 {
        1.0 - self.test_error
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct TrainLog {
    pub records: Vec<TrainRecord>,
    /// Final per-sample quotas, present when the sampler was active.
    pub final_quotas: Option<Vec<f64>>,
}

impl TrainLog {
    pub fn write_csv_to<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        writeln!(w, "{CSV_HEADER}")?;
        for r in &self.records {
            let masked = r.masked_low_quota_frac.map(|v| v.to_string()).unwrap_or_default();
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                r.iteration,
                r.train_loss,
                r.test_error,
                r.equivalent_set_size,
                r.grad_norm,
                r.e1_norm,
                r.e2_norm,
                r.e3_norm,
                r.group_counts[0],
                r.group_counts[1],
                r.group_counts[2],
                masked,
            )?;
        }
        Ok(())
    }

    pub fn write_csv(&self, path: &Path) -> std::io::Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_csv_to(&mut w)?;
        w.flush()
    }

    /// Reads records back from CSV. Quotas are not part of the CSV, so
    /// `final_quotas` comes back empty.
    pub fn read_csv(path: &Path) -> Result<TrainLog, TrainError> {
        let shown = path.display().to_string();
        let reader = BufReader::new(File::open(path)?);
        let mut lines = reader.lines();
        let header = lines
            .next()
            .ok_or_else(|| TrainError::LogSchema { path: shown.clone(), msg: "file is empty".into() })??;
        if header.trim() != CSV_HEADER {
            return Err(TrainError::LogSchema {
                path: shown,
                msg: format!("schema v1 expects header '{CSV_HEADER}', got '{}'", header.trim()),
            });
        }
        let mut records = Vec::new();
        for (lineno, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let bad = |msg: String| TrainError::LogSchema { path: shown.clone(), msg: format!("line {}: {msg}", lineno + 2) };
            let fields: Vec<&str> = line.trim().split(',').collect();
            if fields.len() != 12 {
                return Err(bad(format!("expected 12 columns, got {}", fields.len())));
            }
            let num = |s: &str, name: &str| -> Result<f64, TrainError> {
                s.parse().map_err(|e| bad(format!("bad {name}: {e}")))
            };
            let count = |s: &str, name: &str| -> Result<usize, TrainError> {
                s.parse().map_err(|e| bad(format!("bad {name}: {e}")))
            };
            records.push(TrainRecord {
                iteration: fields[0].parse().map_err(|e| bad(format!("bad iteration: {e}")))?,
                train_loss: num(fields[1], "train_loss")?,
                test_error: num(fields[2], "test_error")?,
                equivalent_set_size: num(fields[3], "equivalent_set_size")?,
                grad_norm: num(fields[4], "grad_norm")?,
                e1_norm: num(fields[5], "e1_norm")?,
                e2_norm: num(fields[6], "e2_norm")?,
                e3_norm: num(fields[7], "e3_norm")?,
                group_counts: [count(fields[8], "n_well")?, count(fields[9], "n_confusing")?, count(fields[10], "n_noisy")?],
                masked_low_quota_frac: if fields[11].is_empty() { None } else { Some(num(fields[11], "masked_low_quota_frac")?) },
            });
        }
        Ok(TrainLog { records, final_quotas: None })
    }
}
