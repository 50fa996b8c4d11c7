//! Filter-style feature scoring and selection, and the overlapped subset
//! partition the voting ensemble is trained on.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::matrix::FeatureMatrix;
use crate::error::{Error, Result};
use crate::models::forest::{train_forest, Dataset, ForestConfig};

pub const DEFAULT_TARGET: usize = 496;
/// The smaller selection size also quoted for the method.
pub const ALT_TARGET: usize = 396;

fn class_rows(labels: &[u8]) -> Result<BTreeMap<u8, Vec<usize>>> {
    let mut by_class: BTreeMap<u8, Vec<usize>> = BTreeMap::new();
    for (i, &l) in labels.iter().enumerate() {
        by_class.entry(l).or_default().push(i);
    }
    if by_class.len() < 2 {
        return Err(Error::SingleClass);
    }
    Ok(by_class)
}

/// Chi-square statistic of one feature whose values are already scaled to
/// `[0, 1]`: class-conditional sums against their class-prior expectation.
pub fn chi_square_scaled(scaled: &[f64], labels: &[u8]) -> Result<f64> {
    if scaled.len() != labels.len() {
        return Err(Error::LengthMismatch(scaled.len(), labels.len()));
    }
    let by_class = class_rows(labels)?;
    let n = labels.len() as f64;
    let total: f64 = scaled.iter().sum();
    if total <= 0.0 {
        return Ok(0.0);
    }
    let mut score = 0.0;
    for rows in by_class.values() {
        let observed: f64 = rows.iter().map(|&i| scaled[i]).sum();
        let expected = total * rows.len() as f64 / n;
        score += (observed - expected).powi(2) / expected;
    }
    Ok(score)
}

fn min_max_scale(values: &[f64]) -> Vec<f64> {
    let (lo, hi) = values
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    if !(hi > lo) {
        return vec![0.0; values.len()];
    }
    values.iter().map(|v| (v - lo) / (hi - lo)).collect()
}

pub fn chi_square_scores(m: &FeatureMatrix) -> Result<Vec<f64>> {
    let labels = m.labels()?;
    class_rows(&labels)?;
    (0..m.n_cols())
        .map(|j| chi_square_scaled(&min_max_scale(&m.column(j)), &labels))
        .collect()
}

/// Mean-decrease-in-impurity importances from a probe random forest trained
/// on the whole matrix.
pub fn mdi_importances(m: &FeatureMatrix, config: &ForestConfig, seed: u64) -> Result<Vec<f64>> {
    let labels = m.labels()?;
    class_rows(&labels)?;
    let data = Dataset::from_matrix(m)?;
    let forest = train_forest(&data, config, seed)?;
    Ok(forest.feature_importances())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub names: Vec<String>,
    pub chi2: Vec<f64>,
    pub mdi: Vec<f64>,
    /// Selected features ordered by MDI rank.
    pub selected: Vec<String>,
}

/// Column indices sorted by descending score; ties keep column order.
pub fn rank_desc(scores: &[f64]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..scores.len()).collect();
    idx.sort_by(|&a, &b| scores[b].total_cmp(&scores[a]));
    idx
}

/// Takes the top `ceil(target / 2)` features by MDI, then fills up to
/// `target` from the chi-square ranking. The result is ordered by MDI rank.
pub fn select_features(
    names: &[String],
    chi2: &[f64],
    mdi: &[f64],
    target: usize,
) -> Result<SelectionReport> {
    let p = names.len();
    if chi2.len() != p || mdi.len() != p {
        return Err(Error::LengthMismatch(chi2.len().min(mdi.len()), p));
    }
    if target > p {
        return Err(Error::TargetTooLarge { target, available: p });
    }
    let mdi_rank = rank_desc(mdi);
    let mut chosen = vec![false; p];
    for &j in mdi_rank.iter().take(target.div_ceil(2)) {
        chosen[j] = true;
    }
    let mut count = target.div_ceil(2);
    for &j in &rank_desc(chi2) {
        if count == target {
            break;
        }
        if !chosen[j] {
            chosen[j] = true;
            count += 1;
        }
    }
    let selected = mdi_rank.into_iter().filter(|&j| chosen[j]).map(|j| names[j].clone()).collect();
    Ok(SelectionReport {
        names: names.to_vec(),
        chi2: chi2.to_vec(),
        mdi: mdi.to_vec(),
        selected,
    })
}

impl SelectionReport {
    pub fn to_csv(&self) -> String {
        let chosen: std::collections::HashSet<&String> = self.selected.iter().collect();
        let mut out = String::from("feature,chi2,mdi,selected\n");
        for (i, n) in self.names.iter().enumerate() {
            out.push_str(&format!(
                "{n},{},{},{}\n",
                self.chi2[i],
                self.mdi[i],
                u8::from(chosen.contains(n))
            ));
        }
        out
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_csv()).map_err(|e| Error::io(path, e))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureSubset {
    pub index: usize,
    pub features: Vec<String>,
}

/// Sliding rank windows: subset `i` takes ranks `[i*step, i*step + size)`
/// modulo `|selected|`, with `step = floor(|selected| / k)`.
pub fn partition_feature_subsets(
    selected: &[String],
    k: usize,
    subset_size: usize,
) -> Result<Vec<FeatureSubset>> {
    let n = selected.len();
    if k == 0 || subset_size == 0 || subset_size > n {
        return Err(Error::BadConfig(format!(
            "cannot cut {k} subsets of size {subset_size} from {n} features"
        )));
    }
    let step = n / k;
    Ok((0..k)
        .map(|i| FeatureSubset {
            index: i,
            features: (0..subset_size).map(|r| selected[(i * step + r) % n].clone()).collect(),
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::matrix::RowMeta;
    use std::collections::BTreeSet;

    fn names(p: usize) -> Vec<String> {
        (0..p).map(|j| format!("f{j}")).collect()
    }

    fn matrix(cols: Vec<Vec<f64>>, labels: &[u8]) -> FeatureMatrix {
        let p = cols.len();
        let n = labels.len();
        let mut data = Vec::with_capacity(n * p);
        for i in 0..n {
            for c in &cols {
                data.push(c[i]);
            }
        }
        let meta = labels
            .iter()
            .enumerate()
            .map(|(i, &l)| RowMeta { trial_id: format!("t{i}"), subject_id: "S1".into(), label: Some(l) })
            .collect();
        FeatureMatrix::new(names(p), data, meta).unwrap()
    }

    #[test]
    fn chi_square_hand_contingency() {
        // observed (2, 0), expected (1, 1)
        assert_eq!(chi_square_scaled(&[1.0, 1.0, 0.0, 0.0], &[1, 1, 2, 2]).unwrap(), 2.0);
        assert_eq!(chi_square_scaled(&[0.0; 4], &[1, 1, 2, 2]).unwrap(), 0.0);
        assert_eq!(chi_square_scaled(&[1.0; 4], &[1, 1, 2, 2]).unwrap(), 0.0);
        assert!(matches!(chi_square_scaled(&[1.0; 3], &[1, 1, 1]), Err(Error::SingleClass)));
    }

    #[test]
    fn chi_square_from_matrix_scales_first() {
        let m = matrix(vec![vec![5.0, 5.0, 3.0, 3.0], vec![2.0; 4]], &[1, 1, 2, 2]);
        assert_eq!(chi_square_scores(&m).unwrap(), vec![2.0, 0.0]);
        let single = matrix(vec![vec![1.0, 2.0]], &[3, 3]);
        assert!(matches!(chi_square_scores(&single), Err(Error::SingleClass)));
    }

    #[test]
    fn chi_square_affine_invariant() {
        let raw = vec![0.3, 1.7, 2.2, -0.4, 5.0, 1.1];
        let labels = [1, 2, 3, 1, 2, 3];
        let base = chi_square_scores(&matrix(vec![raw.clone()], &labels)).unwrap()[0];
        let moved: Vec<f64> = raw.iter().map(|v| 3.5 * v - 12.0).collect();
        let after = chi_square_scores(&matrix(vec![moved], &labels)).unwrap()[0];
        assert!((base - after).abs() < 1e-12);
    }

    #[test]
    fn select_fill_rule() {
        let n = names(6);
        let mdi = [0.5, 0.3, 0.1, 0.05, 0.05, 0.0];
        let chi = [0.0, 0.0, 0.0, 1.0, 3.0, 2.0];
        let r = select_features(&n, &chi, &mdi, 4).unwrap();
        // top 2 by MDI: f0, f1; then chi-square: f4, f5
        assert_eq!(r.selected, vec!["f0", "f1", "f4", "f5"]);
        let r = select_features(&n, &chi, &mdi, 3).unwrap();
        assert_eq!(r.selected, vec!["f0", "f1", "f4"]);
        let all = select_features(&n, &chi, &mdi, 6).unwrap();
        assert_eq!(all.selected.len(), 6);
        assert!(matches!(select_features(&n, &chi, &mdi, 7), Err(Error::TargetTooLarge { .. })));
        // identical rankings degenerate to the top of that ranking
        let same = select_features(&n, &mdi, &mdi, 3).unwrap();
        assert_eq!(same.selected, vec!["f0", "f1", "f2"]);
        // ties broken by column order
        let tied = select_features(&n, &[0.0; 6], &[1.0; 6], 2).unwrap();
        assert_eq!(tied.selected, vec!["f0", "f1"]);
    }

    #[test]
    fn report_csv() {
        let n = names(3);
        let r = select_features(&n, &[1.0, 0.0, 2.0], &[0.2, 0.5, 0.3], 2).unwrap();
        let csv = r.to_csv();
        assert!(csv.starts_with("feature,chi2,mdi,selected\nf0,1,0.2,0\n"));
        assert!(csv.contains("f1,0,0.5,1\n"));
    }

    #[test]
    fn subsets_default_shape() {
        let sel = names(496);
        let subsets = partition_feature_subsets(&sel, 13, 200).unwrap();
        assert_eq!(subsets.len(), 13);
        // step = floor(496 / 13) = 38
        assert_eq!(subsets[1].features[0], "f38");
        assert_eq!(subsets[12].features[0], format!("f{}", 12 * 38));
        assert_eq!(subsets[12].features[199], format!("f{}", (12 * 38 + 199) % 496));
        for pair in subsets.windows(2) {
            let a: BTreeSet<&String> = pair[0].features.iter().collect();
            let b: BTreeSet<&String> = pair[1].features.iter().collect();
            assert_eq!(a.intersection(&b).count(), 162);
        }
        let union: BTreeSet<&String> = subsets.iter().flat_map(|s| &s.features).collect();
        assert_eq!(union.len(), 496);
        assert!(subsets.iter().all(|s| (150..=250).contains(&s.features.len())));
    }

    #[test]
    fn subsets_edge_cases() {
        let sel = names(496);
        let one = partition_feature_subsets(&sel, 1, 200).unwrap();
        assert_eq!(one[0].features, sel[..200].to_vec());
        assert!(partition_feature_subsets(&sel, 0, 200).is_err());
        assert!(partition_feature_subsets(&sel, 13, 497).is_err());
        let alt = partition_feature_subsets(&names(ALT_TARGET), 13, 200).unwrap();
        let union: BTreeSet<&String> = alt.iter().flat_map(|s| &s.features).collect();
        assert_eq!(union.len(), ALT_TARGET);
    }
}
