use serde::{Deserialize, Serialize};

use super::dataset::Dataset;
use super::forest::argmax;
use crate::error::{Error, Result};
use crate::ingest::Label;

/// Relative variance floor: `floor = VAR_FLOOR * max feature variance`.
pub const VAR_FLOOR: f64 = 1e-9;

/// Gaussian naive Bayes with frequency priors.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianNb {
    pub classes: Vec<Label>,
    pub priors: Vec<f64>,
    pub means: Vec<Vec<f64>>,
    pub variances: Vec<Vec<f64>>,
}

fn mean_var(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var)
}

pub fn train_gaussian_nb(data: &Dataset) -> Result<GaussianNb> {
    let n = data.n_rows();
    if n == 0 {
        return Err(Error::EmptyData);
    }
    let p = data.n_features();
    let max_var = (0..p)
        .map(|j| mean_var(data.column(j).iter().copied()).1)
        .fold(0.0f64, f64::max);
    let floor = if max_var > 0.0 { VAR_FLOOR * max_var } else { VAR_FLOOR };
    let k = data.n_classes();
    let mut rows_by_class: Vec<Vec<usize>> = vec![Vec::new(); k];
    for (i, &c) in data.labels().iter().enumerate() {
        rows_by_class[c].push(i);
    }
    let mut means = Vec::with_capacity(k);
    let mut variances = Vec::with_capacity(k);
    for rows in &rows_by_class {
        let (mut mu, mut var) = (Vec::with_capacity(p), Vec::with_capacity(p));
        for j in 0..p {
            let col = data.column(j);
            let (m, v) = mean_var(rows.iter().map(|&i| col[i]));
            mu.push(m);
            var.push(v.max(floor));
        }
        means.push(mu);
        variances.push(var);
    }
    Ok(GaussianNb {
        classes: data.classes().to_vec(),
        priors: rows_by_class.iter().map(|r| r.len() as f64 / n as f64).collect(),
        means,
        variances,
    })
}

impl GaussianNb {
    pub fn log_posterior(&self, row: &[f64]) -> Vec<f64> {
        (0..self.classes.len())
            .map(|c| {
                let mut lp = self.priors[c].ln();
                for (j, &x) in row.iter().enumerate() {
                    let var = self.variances[c][j];
                    let d = x - self.means[c][j];
                    lp -= 0.5 * ((std::f64::consts::TAU * var).ln() + d * d / var);
                }
                lp
            })
            .collect()
    }

    pub fn predict_proba(&self, row: &[f64]) -> Vec<f64> {
        let lp = self.log_posterior(row);
        let max = lp.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let exp: Vec<f64> = lp.iter().map(|v| (v - max).exp()).collect();
        let total: f64 = exp.iter().sum();
        exp.iter().map(|v| v / total).collect()
    }

    pub fn predict(&self, row: &[f64]) -> Label {
        self.classes[argmax(&self.log_posterior(row))]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_means() {
        let x = [-11.0, -10.0, -9.0, 9.0, 10.0, 11.0];
        let data = Dataset::from_rows(&x, 1, &[1, 1, 1, 2, 2, 2]).unwrap();
        let nb = train_gaussian_nb(&data).unwrap();
        assert_eq!(nb.predict(&[-10.0]), 1);
        assert_eq!(nb.predict(&[10.0]), 2);
        let p = nb.predict_proba(&[0.0]);
        assert!((p[0] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn frequency_priors() {
        let data = Dataset::from_rows(&[0.0, 1.0, 2.0, 3.0], 1, &[1, 1, 1, 2]).unwrap();
        let nb = train_gaussian_nb(&data).unwrap();
        assert_eq!(nb.priors, vec![0.75, 0.25]);
    }

    #[test]
    fn zero_variance_feature_is_floored() {
        let x = [1.0, 5.0, 1.0, 6.0, 1.0, -5.0, 1.0, -6.0];
        let data = Dataset::from_rows(&x, 2, &[1, 1, 2, 2]).unwrap();
        let nb = train_gaussian_nb(&data).unwrap();
        assert!(nb.variances.iter().flatten().all(|&v| v > 0.0));
        let p = nb.predict_proba(&[1.0, 5.5]);
        assert!(p.iter().all(|v| v.is_finite()));
        assert_eq!(nb.predict(&[1.0, 5.5]), 1);
        // all-constant data still trains
        let flat = Dataset::from_rows(&[2.0, 2.0], 1, &[1, 2]).unwrap();
        assert!(train_gaussian_nb(&flat).unwrap().predict_proba(&[2.0]).iter().all(|v| v.is_finite()));
    }
}
