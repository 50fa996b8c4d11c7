use std::collections::BTreeMap;

use crate::ingest::Label;

/// Plurality vote. Ties go to the tied label with the highest summed
/// probability across voters, then to the smallest label.
///
/// `probas[i][k]` is voter `i`'s probability for `classes[k]`; pass an empty
/// slice to skip the probability rung.
pub fn majority_vote(votes: &[Label], probas: &[Vec<f64>], classes: &[Label]) -> Label {
    assert!(!votes.is_empty(), "majority_vote needs at least one vote");
    let mut counts: BTreeMap<Label, usize> = BTreeMap::new();
    for &v in votes {
        *counts.entry(v).or_default() += 1;
    }
    let top = *counts.values().max().expect("non-empty");
    let tied: Vec<Label> = counts.iter().filter(|&(_, &c)| c == top).map(|(&l, _)| l).collect();
    if tied.len() == 1 {
        return tied[0];
    }
    let summed = |label: Label| -> f64 {
        match classes.iter().position(|&c| c == label) {
            Some(k) => probas.iter().map(|p| p[k]).sum(),
            None => 0.0,
        }
    };
    // `tied` is ascending, and only a strictly larger sum displaces the
    // current pick, so exact ties resolve to the smallest label.
    let mut best = tied[0];
    let mut best_sum = summed(best);
    for &l in &tied[1..] {
        let s = summed(l);
        if s > best_sum {
            best = l;
            best_sum = s;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    const CLASSES: [Label; 3] = [1, 2, 3];

    fn uniform(n: usize) -> Vec<Vec<f64>> {
        vec![vec![1.0 / 3.0; 3]; n]
    }

    #[test]
    fn strict_majority() {
        assert_eq!(majority_vote(&[2, 2, 2, 1, 3], &uniform(5), &CLASSES), 2);
    }

    #[test]
    fn probability_breaks_tie() {
        let probas = vec![
            vec![0.6, 0.1, 0.3],
            vec![0.5, 0.1, 0.4],
            vec![0.1, 0.1, 0.8],
            vec![0.2, 0.1, 0.7],
            vec![0.2, 0.6, 0.2],
        ];
        // label 1 sums to 1.6, label 3 to 2.4
        assert_eq!(majority_vote(&[1, 1, 3, 3, 2], &probas, &CLASSES), 3);
    }

    #[test]
    fn smallest_label_last() {
        let classes: [Label; 5] = [1, 2, 3, 4, 5];
        let probas = vec![vec![0.2; 5]; 5];
        assert_eq!(majority_vote(&[5, 3, 4, 1, 2], &probas, &classes), 1);
        assert_eq!(majority_vote(&[3, 2], &[], &classes), 2);
    }

    #[test]
    fn order_invariant() {
        let probas = vec![
            vec![0.6, 0.1, 0.3],
            vec![0.5, 0.1, 0.4],
            vec![0.1, 0.1, 0.8],
            vec![0.2, 0.1, 0.7],
            vec![0.2, 0.6, 0.2],
        ];
        let votes = [1, 1, 3, 3, 2];
        let want = majority_vote(&votes, &probas, &CLASSES);
        let perm = [4, 2, 0, 3, 1];
        let v2: Vec<Label> = perm.iter().map(|&i| votes[i]).collect();
        let p2: Vec<Vec<f64>> = perm.iter().map(|&i| probas[i].clone()).collect();
        assert_eq!(majority_vote(&v2, &p2, &CLASSES), want);
    }
}
