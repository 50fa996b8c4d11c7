use std::collections::{BTreeSet, HashMap};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ingest::{parse_label, Label};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RowMeta {
    pub trial_id: String,
    pub subject_id: String,
    pub label: Option<Label>,
}

/// Row-major `n x p` matrix of segment features plus per-row metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    names: Vec<String>,
    data: Vec<f64>,
    meta: Vec<RowMeta>,
}

impl FeatureMatrix {
    pub fn new(names: Vec<String>, data: Vec<f64>, meta: Vec<RowMeta>) -> Result<Self> {
        if data.len() != names.len() * meta.len() {
            return Err(Error::LengthMismatch(data.len(), names.len() * meta.len()));
        }
        let unique: BTreeSet<&String> = names.iter().collect();
        if unique.len() != names.len() {
            return Err(Error::BadConfig("duplicate feature names".into()));
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::BadConfig(format!(
                "non-finite feature {} in row {}",
                names[pos % names.len()],
                pos / names.len()
            )));
        }
        Ok(FeatureMatrix { names, data, meta })
    }

    pub fn n_rows(&self) -> usize {
        self.meta.len()
    }

    pub fn n_cols(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn meta(&self) -> &[RowMeta] {
        &self.meta
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let p = self.n_cols();
        &self.data[i * p..(i + 1) * p]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n_cols() + j]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.n_rows()).map(|i| self.get(i, j)).collect()
    }

    /// Labels of every row; fails on the first unlabeled row.
    pub fn labels(&self) -> Result<Vec<Label>> {
        self.meta
            .iter()
            .map(|m| m.label.ok_or_else(|| Error::Unlabeled(m.trial_id.clone())))
            .collect()
    }

    pub fn column_indices(&self, names: &[String]) -> Result<Vec<usize>> {
        let lookup: HashMap<&str, usize> =
            self.names.iter().enumerate().map(|(i, n)| (n.as_str(), i)).collect();
        names
            .iter()
            .map(|n| {
                lookup
                    .get(n.as_str())
                    .copied()
                    .ok_or_else(|| Error::ModelMismatch(format!("feature {n} not in matrix")))
            })
            .collect()
    }

    pub fn select_rows(&self, rows: &[usize]) -> FeatureMatrix {
        let p = self.n_cols();
        let mut data = Vec::with_capacity(rows.len() * p);
        for &i in rows {
            data.extend_from_slice(self.row(i));
        }
        FeatureMatrix {
            names: self.names.clone(),
            data,
            meta: rows.iter().map(|&i| self.meta[i].clone()).collect(),
        }
    }

    pub fn select_columns(&self, names: &[String]) -> Result<FeatureMatrix> {
        let idx = self.column_indices(names)?;
        let mut data = Vec::with_capacity(self.n_rows() * idx.len());
        for i in 0..self.n_rows() {
            let row = self.row(i);
            data.extend(idx.iter().map(|&j| row[j]));
        }
        Ok(FeatureMatrix {
            names: names.to_vec(),
            data,
            meta: self.meta.clone(),
        })
    }

    /// Row indices of every row whose trial is in `trials`.
    pub fn rows_for_trials(&self, trials: &BTreeSet<String>) -> Vec<usize> {
        (0..self.n_rows()).filter(|&i| trials.contains(&self.meta[i].trial_id)).collect()
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("__trial,__subject,__label");
        for n in &self.names {
            out.push(',');
            out.push_str(n);
        }
        out.push('\n');
        for i in 0..self.n_rows() {
            let m = &self.meta[i];
            let label = m.label.map(|l| l.to_string()).unwrap_or_default();
            out.push_str(&format!("{},{},{}", m.trial_id, m.subject_id, label));
            for v in self.row(i) {
                // `{}` prints the shortest representation that round-trips
                out.push_str(&format!(",{v}"));
            }
            out.push('\n');
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }

    pub fn from_csv(text: &str) -> Result<FeatureMatrix> {
        let src = Path::new("<feature matrix>");
        let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(text.as_bytes());
        let headers = rdr.headers().map_err(|e| Error::csv(src, e))?.clone();
        for (i, want) in ["__trial", "__subject", "__label"].iter().enumerate() {
            if headers.get(i) != Some(*want) {
                return Err(Error::MissingColumn { path: src.into(), column: want.to_string() });
            }
        }
        let names: Vec<String> = headers.iter().skip(3).map(String::from).collect();
        let mut data = Vec::new();
        let mut meta = Vec::new();
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::csv(src, e))?;
            meta.push(RowMeta {
                trial_id: rec[0].to_string(),
                subject_id: rec[1].to_string(),
                label: parse_label(&rec[2])?,
            });
            for cell in rec.iter().skip(3) {
                data.push(cell.parse::<f64>().map_err(|_| Error::BadNumber {
                    path: src.into(),
                    row: row + 1,
                    value: cell.to_string(),
                })?);
            }
        }
        FeatureMatrix::new(names, data, meta)
    }

    pub fn read_csv(path: impl AsRef<Path>) -> Result<FeatureMatrix> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_csv(&text)
    }
}
