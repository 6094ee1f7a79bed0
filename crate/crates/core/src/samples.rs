//! Replicate-by-coordinate sample storage and CSV output.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleMatrix {
    labels: Vec<String>,
    rows: usize,
    /// Row-major values.
    data: Vec<f64>,
    /// Description of the plan that generated the samples.
    pub plan: serde_json::Value,
}

impl SampleMatrix {
    pub fn new(labels: Vec<String>, data: Vec<f64>, plan: serde_json::Value) -> Result<SampleMatrix> {
        let cols = labels.len();
        if cols == 0 || data.len() % cols != 0 {
            return Err(Error::Domain(format!(
                "{} values do not fill rows of {} columns",
                data.len(),
                cols
            )));
        }
        Ok(SampleMatrix { rows: data.len() / cols, labels, data, plan })
    }

    /// Build a matrix by evaluating `row(replicate)` for every replicate in parallel.
    /// Rows are stored in replicate order, so the result does not depend on the thread count.
    pub fn from_rows<F>(labels: Vec<String>, reps: usize, plan: serde_json::Value, row: F) -> Result<SampleMatrix>
    where
        F: Fn(u64) -> Vec<f64> + Sync + Send,
    {
        let cols = labels.len();
        let rows: Vec<Vec<f64>> = (0..reps as u64).into_par_iter().map(&row).collect();
        let mut data = Vec::with_capacity(reps * cols);
        for r in rows {
            debug_assert_eq!(r.len(), cols);
            data.extend_from_slice(&r);
        }
        SampleMatrix::new(labels, data, plan)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let c = self.cols();
        &self.data[i * c..(i + 1) * c]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.data[i * self.cols() + j]).collect()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols() + j]
    }

    /// CSV text: a header of labels, then one replicate per row with shortest
    /// round-trip decimal formatting and LF line endings.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.labels.iter().map(|l| csv_field(l)).collect::<Vec<_>>().join(","));
        out.push('\n');
        for i in 0..self.rows {
            for (j, v) in self.row(i).iter().enumerate() {
                if j > 0 {
                    out.push(',');
                }
                write!(out, "{v:?}").expect("write to string");
            }
            out.push('\n');
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}
