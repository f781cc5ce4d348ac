//! Hashed sparse features for a sentence pair.

use std::collections::{BTreeMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::ingest::SentencePair;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct FeatureConfig {
    /// Highest teacher n-gram order (1 = unigrams only, 2 adds bigrams).
    pub max_ngram: u32,
    /// Emit the two token-overlap ratios.
    pub overlap: bool,
    /// Keep only the first `max_tokens` tokens of each side; 0 keeps all.
    pub max_tokens: u32,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        FeatureConfig {
            max_ngram: 2,
            overlap: true,
            max_tokens: 0,
        }
    }
}

/// Sparse `(feature id, value)` entries sorted by id, ids unique.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FeatureVector {
    pub entries: Vec<(u64, f64)>,
}

impl FeatureVector {
    pub fn get(&self, id: u64) -> f64 {
        self.entries
            .binary_search_by_key(&id, |&(k, _)| k)
            .map(|i| self.entries[i].1)
            .unwrap_or(0.0)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    bytes
        .iter()
        .fold(FNV_OFFSET, |h, &b| (h ^ b as u64).wrapping_mul(FNV_PRIME))
}

pub const OVERLAP_TEACHER: &str = "o:teacher";
pub const OVERLAP_STUDENT: &str = "o:student";

fn tokens(text: &str, limit: u32) -> Vec<&str> {
    let it = text.split_whitespace();
    if limit == 0 {
        it.collect()
    } else {
        it.take(limit as usize).collect()
    }
}

/// `(|T ∩ S| / |T|, |T ∩ S| / |S|)` over distinct tokens, zeros when either side is empty.
pub fn overlap_ratios(teacher: &[&str], student: &[&str]) -> (f64, f64) {
    let t: HashSet<&str> = teacher.iter().copied().collect();
    let s: HashSet<&str> = student.iter().copied().collect();
    if t.is_empty() || s.is_empty() {
        return (0.0, 0.0);
    }
    let shared = t.intersection(&s).count() as f64;
    (shared / t.len() as f64, shared / s.len() as f64)
}

/// Teacher n-grams (`t:`), student unigrams (`s:`) and the overlap ratios,
/// hashed with FNV-1a and masked to `dim` (a power of two).
pub fn featurize(pair: &SentencePair, cfg: &FeatureConfig, dim: usize) -> FeatureVector {
    debug_assert!(dim.is_power_of_two());
    let mask = dim as u64 - 1;
    let mut acc: BTreeMap<u64, f64> = BTreeMap::new();
    let mut add = |name: &str, value: f64| {
        *acc.entry(fnv1a64(name.as_bytes()) & mask).or_insert(0.0) += value;
    };

    let teacher = tokens(&pair.teacher_sentence, cfg.max_tokens);
    let student = if pair.has_context() {
        tokens(&pair.student_context, cfg.max_tokens)
    } else {
        Vec::new()
    };

    for order in 1..=cfg.max_ngram.max(1) as usize {
        for gram in teacher.windows(order) {
            add(&format!("t:{}", gram.join(" ")), 1.0);
        }
    }
    for tok in &student {
        add(&format!("s:{tok}"), 1.0);
    }
    if cfg.overlap {
        let (ot, os) = overlap_ratios(&teacher, &student);
        add(OVERLAP_TEACHER, ot);
        add(OVERLAP_STUDENT, os);
    }
    FeatureVector {
        entries: acc.into_iter().filter(|&(_, v)| v != 0.0).collect(),
    }
}
