//! Columnar result tables and their CSV form.
//!
//! CSV files carry a header row, UTF-8 with LF line endings, and full double
//! precision (17 significant digits) so re-running a config reproduces files
//! byte for byte.

use std::fs;
use std::path::Path;

use crate::error::Result;
use crate::sim::SimTrace;

/// Format with 17 significant digits; round-trips exactly through `f64`.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub rep: usize,
    pub seed: u64,
    pub max_error: f64,
    /// Trigger evaluations performed (online runs only).
    pub evaluated: u64,
    /// Updates actually applied (online runs only).
    pub selected: u64,
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub label: String,
    pub sweep_value: f64,
    pub runs: Vec<RunRecord>,
}

impl SweepRow {
    pub fn mean_max_error(&self) -> f64 {
        self.runs.iter().map(|r| r.max_error).sum::<f64>() / self.runs.len() as f64
    }

    pub fn min_max_error(&self) -> f64 {
        self.runs
            .iter()
            .map(|r| r.max_error)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn max_max_error(&self) -> f64 {
        self.runs
            .iter()
            .map(|r| r.max_error)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn total_evaluated(&self) -> u64 {
        self.runs.iter().map(|r| r.evaluated).sum()
    }

    pub fn total_selected(&self) -> u64 {
        self.runs.iter().map(|r| r.selected).sum()
    }

    /// Fraction of evaluated cycles whose update was applied.
    pub fn selected_fraction(&self) -> f64 {
        let e = self.total_evaluated();
        if e == 0 {
            0.0
        } else {
            self.total_selected() as f64 / e as f64
        }
    }
}

#[derive(Debug, Clone)]
pub struct ResultTable {
    /// Name of the sweep variable, e.g. `delta_bar` or `n0`.
    pub sweep_name: String,
    pub rows: Vec<SweepRow>,
}

impl ResultTable {
    pub fn new(sweep_name: impl Into<String>) -> Self {
        Self {
            sweep_name: sweep_name.into(),
            rows: Vec::new(),
        }
    }

    pub fn row_by_label(&self, label: &str) -> Option<&SweepRow> {
        self.rows.iter().find(|r| r.label == label)
    }

    fn reps(&self) -> usize {
        self.rows.iter().map(|r| r.runs.len()).max().unwrap_or(0)
    }

    /// Wide CSV: one row per sweep value, one max-error column per repetition
    /// plus the aggregate columns.
    pub fn to_csv(&self) -> String {
        let reps = self.reps();
        let mut out = String::new();
        out.push_str("label,");
        out.push_str(&self.sweep_name);
        for r in 0..reps {
            out.push_str(&format!(",max_error_rep{r}"));
        }
        out.push_str(",mean,min,max\n");
        for row in &self.rows {
            out.push_str(&row.label);
            out.push(',');
            out.push_str(&format_float(row.sweep_value));
            for r in 0..reps {
                out.push(',');
                if let Some(rec) = row.runs.get(r) {
                    out.push_str(&format_float(rec.max_error));
                }
            }
            out.push(',');
            out.push_str(&format_float(row.mean_max_error()));
            out.push(',');
            out.push_str(&format_float(row.min_max_error()));
            out.push(',');
            out.push_str(&format_float(row.max_max_error()));
            out.push('\n');
        }
        out
    }

    /// Trigger accounting per sweep value: evaluated and selected counts per
    /// repetition plus totals and the selected fraction.
    pub fn counts_csv(&self) -> String {
        let reps = self.reps();
        let mut out = String::new();
        out.push_str("label,");
        out.push_str(&self.sweep_name);
        for r in 0..reps {
            out.push_str(&format!(",evaluated_rep{r},selected_rep{r}"));
        }
        out.push_str(",evaluated_total,selected_total,selected_fraction\n");
        for row in &self.rows {
            out.push_str(&row.label);
            out.push(',');
            out.push_str(&format_float(row.sweep_value));
            for r in 0..reps {
                if let Some(rec) = row.runs.get(r) {
                    out.push_str(&format!(",{},{}", rec.evaluated, rec.selected));
                } else {
                    out.push_str(",,");
                }
            }
            out.push_str(&format!(
                ",{},{},{}\n",
                row.total_evaluated(),
                row.total_selected(),
                format_float(row.selected_fraction())
            ));
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_csv())?;
        Ok(())
    }

    pub fn write_counts_csv(&self, path: &Path) -> Result<()> {
        fs::write(path, self.counts_csv())?;
        Ok(())
    }
}

/// `t,error_norm` series of one trace.
pub fn error_series_csv(trace: &SimTrace) -> String {
    let mut out = String::from("t,error_norm\n");
    for (t, e) in trace.time.iter().zip(&trace.error_norms) {
        out.push_str(&format_float(*t));
        out.push(',');
        out.push_str(&format_float(*e));
        out.push('\n');
    }
    out
}

pub fn write_error_series(trace: &SimTrace, path: &Path) -> Result<()> {
    fs::write(path, error_series_csv(trace))?;
    Ok(())
}
