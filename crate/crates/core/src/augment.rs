//! Quality-ranked selection of machine-translated and paraphrased variants.
//!
//! Translation variants carry quality-estimation scores and paraphrases carry
//! embedding cosine similarities; neither is recomputed here. Selection keeps
//! a configured fraction of the best (or, for paraphrases, least similar)
//! pairs, with stable tie-breaking by input position.

use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Whether a variant came from machine translation or paraphrasing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AugmentationKind {
    Translation,
    Paraphrase,
}

/// One (original, variant) pair with its provided quality score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentedPair {
    pub source_id: String,
    pub original: String,
    pub variant: String,
    /// QE score for translations; embedding cosine similarity for paraphrases.
    pub quality: f64,
    pub kind: AugmentationKind,
    /// Language of the variant.
    pub language: String,
}

/// Ranking direction for selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionDirection {
    HighestQuality,
    LowestQuality,
}

/// Keep `fraction` of the pairs from the quality-sorted order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectionPolicy {
    pub fraction: f64,
    pub direction: SelectionDirection,
}

impl SelectionPolicy {
    pub fn new(fraction: f64, direction: SelectionDirection) -> Result<Self, AugmentError> {
        if !(fraction.is_finite() && fraction > 0.0 && fraction <= 1.0) {
            return Err(AugmentError::InvalidFraction(fraction));
        }
        Ok(Self { fraction, direction })
    }
}

#[derive(Debug, Error)]
pub enum AugmentError {
    #[error("selection fraction must lie in (0, 1], got {0}")]
    InvalidFraction(f64),
    #[error("empty pair list")]
    EmptyInput,
    #[error("pairs mix augmentation kinds")]
    MixedKinds,
    #[error("pair {source_id}: quality {quality} is not finite")]
    NonFiniteQuality { source_id: String, quality: f64 },
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("line {line}: malformed JSON: {source}")]
    MalformedLine {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
}

/// Loads an augmentation JSONL file, one pair per line.
pub fn load_pairs(path: &Path) -> Result<Vec<AugmentedPair>, AugmentError> {
    let file = File::open(path).map_err(|source| AugmentError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let mut pairs = Vec::new();
    for (idx, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|source| AugmentError::Io {
            path: path.display().to_string(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let pair: AugmentedPair = serde_json::from_str(&line)
            .map_err(|source| AugmentError::MalformedLine { line: idx + 1, source })?;
        if !pair.quality.is_finite() {
            return Err(AugmentError::NonFiniteQuality {
                source_id: pair.source_id,
                quality: pair.quality,
            });
        }
        pairs.push(pair);
    }
    Ok(pairs)
}

/// Returns `max(1, floor(fraction * n))` pairs taken from the quality-sorted
/// order (descending for `HighestQuality`, ascending for `LowestQuality`).
/// Ties keep their input order; the output preserves sorted order.
pub fn rank_select(
    pairs: &[AugmentedPair],
    policy: &SelectionPolicy,
) -> Result<Vec<AugmentedPair>, AugmentError> {
    if pairs.is_empty() {
        return Err(AugmentError::EmptyInput);
    }
    let kind = pairs[0].kind;
    if pairs.iter().any(|p| p.kind != kind) {
        return Err(AugmentError::MixedKinds);
    }
    for p in pairs {
        if !p.quality.is_finite() {
            return Err(AugmentError::NonFiniteQuality {
                source_id: p.source_id.clone(),
                quality: p.quality,
            });
        }
    }

    let mut order: Vec<usize> = (0..pairs.len()).collect();
    // Stable sort: equal qualities keep ascending input position.
    match policy.direction {
        SelectionDirection::HighestQuality => {
            order.sort_by(|&a, &b| pairs[b].quality.partial_cmp(&pairs[a].quality).unwrap())
        }
        SelectionDirection::LowestQuality => {
            order.sort_by(|&a, &b| pairs[a].quality.partial_cmp(&pairs[b].quality).unwrap())
        }
    }
    let take = selection_size(policy.fraction, pairs.len());
    Ok(order[..take].iter().map(|&i| pairs[i].clone()).collect())
}

/// Selection size rule: floor of the fraction, lifted to a minimum of one.
pub fn selection_size(fraction: f64, n: usize) -> usize {
    ((fraction * n as f64).floor() as usize).clamp(1, n)
}

/// One highest-quality selection per fraction. Selections over the same
/// input are nested: the result for a smaller fraction is a prefix-subset
/// of the result for a larger one.
pub fn proportion_sweep(
    pairs: &[AugmentedPair],
    fractions: &[f64],
) -> Result<Vec<(f64, Vec<AugmentedPair>)>, AugmentError> {
    let mut out = Vec::with_capacity(fractions.len());
    for &fraction in fractions {
        let policy = SelectionPolicy::new(fraction, SelectionDirection::HighestQuality)?;
        out.push((fraction, rank_select(pairs, &policy)?));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pair(id: usize, quality: f64) -> AugmentedPair {
        AugmentedPair {
            source_id: format!("s{id}"),
            original: format!("original {id}"),
            variant: format!("variant {id}"),
            quality,
            kind: AugmentationKind::Translation,
            language: "es".into(),
        }
    }

    /// Independent oracle: decorate with index, full sort, slice.
    fn oracle_select(pairs: &[AugmentedPair], fraction: f64, highest: bool) -> Vec<AugmentedPair> {
        let mut decorated: Vec<(usize, &AugmentedPair)> = pairs.iter().enumerate().collect();
        decorated.sort_by(|(ia, a), (ib, b)| {
            let q = if highest {
                b.quality.partial_cmp(&a.quality).unwrap()
            } else {
                a.quality.partial_cmp(&b.quality).unwrap()
            };
            q.then(ia.cmp(ib))
        });
        let take = ((fraction * pairs.len() as f64).floor() as usize).max(1);
        decorated[..take.min(pairs.len())]
            .iter()
            .map(|(_, p)| (*p).clone())
            .collect()
    }

    #[test]
    fn five_percent_of_hundred_keeps_the_five_best() {
        let pairs: Vec<_> = (0..100).map(|i| pair(i, (i as f64) / 100.0)).collect();
        let policy = SelectionPolicy::new(0.05, SelectionDirection::HighestQuality).unwrap();
        let selected = rank_select(&pairs, &policy).unwrap();
        assert_eq!(selected.len(), 5);
        let ids: Vec<_> = selected.iter().map(|p| p.source_id.as_str()).collect();
        assert_eq!(ids, ["s99", "s98", "s97", "s96", "s95"]);
    }

    #[test]
    fn full_fraction_returns_all_sorted() {
        let pairs = vec![pair(0, 0.2), pair(1, 0.9), pair(2, 0.5)];
        let policy = SelectionPolicy::new(1.0, SelectionDirection::HighestQuality).unwrap();
        let selected = rank_select(&pairs, &policy).unwrap();
        let ids: Vec<_> = selected.iter().map(|p| p.source_id.as_str()).collect();
        assert_eq!(ids, ["s1", "s2", "s0"]);
    }

    #[test]
    fn ties_break_by_input_position() {
        let pairs = vec![pair(0, 0.3), pair(1, 0.9), pair(2, 0.9), pair(3, 0.1)];
        let policy = SelectionPolicy::new(0.5, SelectionDirection::HighestQuality).unwrap();
        let selected = rank_select(&pairs, &policy).unwrap();
        let ids: Vec<_> = selected.iter().map(|p| p.source_id.as_str()).collect();
        assert_eq!(ids, ["s1", "s2"]);
        assert_eq!(selected, oracle_select(&pairs, 0.5, true));
    }

    #[test]
    fn lowest_quality_direction_inverts_order() {
        let pairs = vec![pair(0, 0.3), pair(1, 0.9), pair(2, 0.1)];
        let policy = SelectionPolicy::new(0.67, SelectionDirection::LowestQuality).unwrap();
        let selected = rank_select(&pairs, &policy).unwrap();
        let ids: Vec<_> = selected.iter().map(|p| p.source_id.as_str()).collect();
        assert_eq!(ids, ["s2", "s0"]);
    }

    #[test]
    fn matches_oracle_on_random_inputs_with_ties() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha20Rng::seed_from_u64(7);
        for case in 0..200 {
            let n = rng.random_range(1..40);
            let pairs: Vec<_> = (0..n)
                // Coarse grid of qualities so ties are common.
                .map(|i| pair(i, f64::from(rng.random_range(0..6)) / 5.0))
                .collect();
            let fraction = f64::from(rng.random_range(1..=100)) / 100.0;
            for highest in [true, false] {
                let direction = if highest {
                    SelectionDirection::HighestQuality
                } else {
                    SelectionDirection::LowestQuality
                };
                let policy = SelectionPolicy::new(fraction, direction).unwrap();
                let got = rank_select(&pairs, &policy).unwrap();
                assert_eq!(
                    got,
                    oracle_select(&pairs, fraction, highest),
                    "case {case} n={n} fraction={fraction} highest={highest}"
                );
            }
        }
    }

    #[test]
    fn sweep_selections_are_nested() {
        let pairs: Vec<_> = (0..10).map(|i| pair(i, (i as f64) / 10.0)).collect();
        let sweep = proportion_sweep(&pairs, &[0.1, 0.2, 0.5]).unwrap();
        assert_eq!(sweep[0].1.len(), 1);
        assert_eq!(sweep[1].1.len(), 2);
        assert_eq!(sweep[2].1.len(), 5);
        for window in sweep.windows(2) {
            let (small, large) = (&window[0].1, &window[1].1);
            assert!(small
                .iter()
                .all(|p| large.iter().any(|q| q.source_id == p.source_id)));
        }
    }

    #[test]
    fn sweep_min_one_rule() {
        let pairs: Vec<_> = (0..10).map(|i| pair(i, (i as f64) / 10.0)).collect();
        let sweep = proportion_sweep(&pairs, &[0.05]).unwrap();
        // floor(0.5) = 0 lifted to 1; oracle agrees.
        assert_eq!(sweep[0].1.len(), 1);
        assert_eq!(sweep[0].1, oracle_select(&pairs, 0.05, true));
    }

    #[test]
    fn mixed_kinds_and_empty_inputs_error() {
        let mut pairs = vec![pair(0, 0.5)];
        pairs.push(AugmentedPair {
            kind: AugmentationKind::Paraphrase,
            ..pair(1, 0.6)
        });
        let policy = SelectionPolicy::new(0.5, SelectionDirection::HighestQuality).unwrap();
        assert!(matches!(
            rank_select(&pairs, &policy),
            Err(AugmentError::MixedKinds)
        ));
        assert!(matches!(
            rank_select(&[], &policy),
            Err(AugmentError::EmptyInput)
        ));
        assert!(SelectionPolicy::new(0.0, SelectionDirection::HighestQuality).is_err());
        assert!(SelectionPolicy::new(1.2, SelectionDirection::HighestQuality).is_err());
    }
}
