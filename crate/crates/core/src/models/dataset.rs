use crate::error::{Error, Result};
use crate::features::FeatureMatrix;
use crate::ingest::Label;

/// Column-major training data with labels mapped to dense class indices.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    columns: Vec<Vec<f64>>,
    labels: Vec<usize>,
    classes: Vec<Label>,
    names: Vec<String>,
}

impl Dataset {
    fn build(columns: Vec<Vec<f64>>, raw_labels: &[Label], names: Vec<String>) -> Result<Self> {
        if raw_labels.is_empty() {
            return Err(Error::EmptyData);
        }
        if let Some(c) = columns.iter().find(|c| c.len() != raw_labels.len()) {
            return Err(Error::LengthMismatch(c.len(), raw_labels.len()));
        }
        if columns.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::BadConfig("training data contains non-finite values".into()));
        }
        let mut classes = raw_labels.to_vec();
        classes.sort_unstable();
        classes.dedup();
        let labels = raw_labels
            .iter()
            .map(|l| classes.binary_search(l).expect("label present"))
            .collect();
        Ok(Dataset { columns, labels, classes, names })
    }

    /// `x` is row-major with `n_features` columns.
    pub fn from_rows(x: &[f64], n_features: usize, labels: &[Label]) -> Result<Self> {
        if n_features == 0 || x.len() != n_features * labels.len() {
            return Err(Error::LengthMismatch(x.len(), n_features * labels.len()));
        }
        let columns = (0..n_features)
            .map(|j| (0..labels.len()).map(|i| x[i * n_features + j]).collect())
            .collect();
        let names = (0..n_features).map(|j| format!("f{j}")).collect();
        Self::build(columns, labels, names)
    }

    pub fn from_matrix(m: &FeatureMatrix) -> Result<Self> {
        let rows: Vec<usize> = (0..m.n_rows()).collect();
        let cols: Vec<usize> = (0..m.n_cols()).collect();
        Self::from_matrix_subset(m, &rows, &cols)
    }

    /// Training view of selected rows and columns of a labeled matrix.
    pub fn from_matrix_subset(m: &FeatureMatrix, rows: &[usize], cols: &[usize]) -> Result<Self> {
        let labels = rows
            .iter()
            .map(|&i| {
                let meta = &m.meta()[i];
                meta.label.ok_or_else(|| Error::Unlabeled(meta.trial_id.clone()))
            })
            .collect::<Result<Vec<_>>>()?;
        let columns = cols
            .iter()
            .map(|&j| rows.iter().map(|&i| m.get(i, j)).collect())
            .collect();
        let names = cols.iter().map(|&j| m.names()[j].clone()).collect();
        Self::build(columns, &labels, names)
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn n_features(&self) -> usize {
        self.columns.len()
    }

    pub fn n_classes(&self) -> usize {
        self.classes.len()
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j]
    }

    /// Dense class index per row.
    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn classes(&self) -> &[Label] {
        &self.classes
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.columns.iter().map(|c| c[i]).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn maps_labels_to_dense_indices() {
        let d = Dataset::from_rows(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0], 2, &[7, 3, 7]).unwrap();
        assert_eq!(d.classes(), &[3, 7]);
        assert_eq!(d.labels(), &[1, 0, 1]);
        assert_eq!(d.column(1), &[2.0, 4.0, 6.0]);
        assert_eq!(d.row(2), vec![5.0, 6.0]);
        assert!(matches!(Dataset::from_rows(&[], 1, &[]), Err(Error::LengthMismatch(..)) | Err(Error::EmptyData)));
        assert!(Dataset::from_rows(&[f64::NAN], 1, &[1]).is_err());
    }
}
