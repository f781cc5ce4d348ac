//! Labeled sentence-pair datasets: csv codec, statistics, stratified
//! splitting and class weights.

use std::collections::HashMap;
use std::ops::Add;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{Sentence, SentencePair, Speaker};
use crate::taxonomy::{parse_label, TalkMoveLabel, NUM_LABELS};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CorpusError {
    #[error("row {row}: unknown label {label:?}")]
    UnknownLabel { row: usize, label: String },
    #[error("row {row}: {reason}")]
    MalformedRow { row: usize, reason: String },
    #[error("invalid split ratios: {0}")]
    Ratio(String),
    #[error("dataset is empty")]
    EmptyDataset,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LabeledPair {
    pub pair: SentencePair,
    pub label: TalkMoveLabel,
    pub lesson_id: String,
}

impl LabeledPair {
    pub fn new(student_context: &str, teacher_sentence: &str, label: TalkMoveLabel, lesson_id: &str) -> Self {
        LabeledPair {
            pair: SentencePair::new(student_context, teacher_sentence),
            label,
            lesson_id: lesson_id.to_string(),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Dataset {
    pub items: Vec<LabeledPair>,
}

impl Dataset {
    pub fn new(items: Vec<LabeledPair>) -> Self {
        Dataset { items }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn labels(&self) -> Vec<TalkMoveLabel> {
        self.items.iter().map(|i| i.label).collect()
    }

    pub fn pairs(&self) -> Vec<SentencePair> {
        self.items.iter().map(|i| i.pair.clone()).collect()
    }
}

const DATASET_HEADER: [&str; 4] = ["student_context", "teacher_sentence", "label", "lesson_id"];

/// Reads the `student_context,teacher_sentence,label,lesson_id` csv.
///
/// Row numbers in errors count data rows from 1. The pair's
/// `teacher_sentence_index` is set to the item position.
pub fn load_dataset(bytes: &[u8]) -> Result<Dataset, CorpusError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(bytes);
    let header = reader.headers().map_err(|e| CorpusError::MalformedRow {
        row: 0,
        reason: format!("header: {e}"),
    })?;
    if header.iter().map(str::trim).ne(DATASET_HEADER) {
        return Err(CorpusError::MalformedRow {
            row: 0,
            reason: format!("header must be {}", DATASET_HEADER.join(",")),
        });
    }
    let mut items = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| CorpusError::MalformedRow {
            row,
            reason: e.to_string(),
        })?;
        if record.len() != 4 {
            return Err(CorpusError::MalformedRow {
                row,
                reason: format!("expected 4 fields, found {}", record.len()),
            });
        }
        let label = parse_label(&record[2]).map_err(|_| CorpusError::UnknownLabel {
            row,
            label: record[2].to_string(),
        })?;
        if record[1].trim().is_empty() {
            return Err(CorpusError::MalformedRow {
                row,
                reason: "empty teacher_sentence".into(),
            });
        }
        let student = if record[0].is_empty() { "-" } else { &record[0] };
        items.push(LabeledPair {
            pair: SentencePair {
                student_context: student.to_string(),
                teacher_sentence: record[1].to_string(),
                teacher_sentence_index: i,
            },
            label,
            lesson_id: record[3].to_string(),
        });
    }
    Ok(Dataset { items })
}

pub fn save_dataset(d: &Dataset) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(DATASET_HEADER).expect("in-memory write");
    for item in &d.items {
        w.write_record([
            item.pair.student_context.as_str(),
            item.pair.teacher_sentence.as_str(),
            item.label.as_str(),
            item.lesson_id.as_str(),
        ])
        .expect("in-memory write");
    }
    w.into_inner().expect("in-memory flush")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub total_sentences: usize,
    pub teacher_sentences: usize,
    pub student_sentences: usize,
    /// Absent for an empty corpus.
    pub teacher_share: Option<f64>,
}

impl CorpusStats {
    pub fn from_counts(teacher: usize, student: usize) -> Self {
        let total = teacher + student;
        CorpusStats {
            total_sentences: total,
            teacher_sentences: teacher,
            student_sentences: student,
            teacher_share: (total > 0).then(|| teacher as f64 / total as f64),
        }
    }
}

/// Sentence counts by role; `other` speech is not counted.
pub fn corpus_stats(sentences: &[Sentence]) -> CorpusStats {
    let teacher = sentences.iter().filter(|s| s.speaker == Speaker::Teacher).count();
    let student = sentences.iter().filter(|s| s.speaker == Speaker::Student).count();
    CorpusStats::from_counts(teacher, student)
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LabelDistribution {
    counts: [usize; NUM_LABELS],
    total: usize,
}

impl LabelDistribution {
    pub fn from_labels<I: IntoIterator<Item = TalkMoveLabel>>(labels: I) -> Self {
        let mut d = LabelDistribution::default();
        for l in labels {
            d.counts[l.code()] += 1;
            d.total += 1;
        }
        d
    }

    pub fn count(&self, label: TalkMoveLabel) -> usize {
        self.counts[label.code()]
    }

    pub fn counts(&self) -> &[usize; NUM_LABELS] {
        &self.counts
    }

    pub fn total(&self) -> usize {
        self.total
    }

    pub fn labels_present(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }

    /// Most frequent label; ties go to the smaller code.
    pub fn majority(&self) -> TalkMoveLabel {
        let mut best = 0;
        for code in 1..NUM_LABELS {
            if self.counts[code] > self.counts[best] {
                best = code;
            }
        }
        TalkMoveLabel::ALL[best]
    }
}

impl Add for LabelDistribution {
    type Output = LabelDistribution;

    fn add(mut self, rhs: LabelDistribution) -> LabelDistribution {
        for (a, b) in self.counts.iter_mut().zip(rhs.counts) {
            *a += b;
        }
        self.total += rhs.total;
        self
    }
}

impl Serialize for LabelDistribution {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = serializer.serialize_map(Some(NUM_LABELS))?;
        for label in TalkMoveLabel::ALL {
            map.serialize_entry(label.as_str(), &self.counts[label.code()])?;
        }
        map.end()
    }
}

pub fn distribution(d: &Dataset) -> LabelDistribution {
    LabelDistribution::from_labels(d.items.iter().map(|i| i.label))
}

/// Corpus statistics plus label counts, as emitted by the `stats` command.
#[derive(Debug, Clone, Serialize)]
pub struct StatsReport {
    pub total: usize,
    pub teacher: usize,
    pub student: usize,
    pub teacher_share: Option<f64>,
    pub label_counts: LabelDistribution,
}

impl StatsReport {
    pub fn new(stats: CorpusStats, labels: LabelDistribution) -> Self {
        StatsReport {
            total: stats.total_sentences,
            teacher: stats.teacher_sentences,
            student: stats.student_sentences,
            teacher_share: stats.teacher_share,
            label_counts: labels,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitRatios {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl SplitRatios {
    pub const STANDARD: SplitRatios = SplitRatios {
        train: 0.8,
        val: 0.1,
        test: 0.1,
    };

    pub fn new(train: f64, val: f64, test: f64) -> Result<Self, CorpusError> {
        let r = SplitRatios { train, val, test };
        r.validate()?;
        Ok(r)
    }

    pub fn validate(&self) -> Result<(), CorpusError> {
        let parts = [self.train, self.val, self.test];
        if parts.iter().any(|r| !r.is_finite() || *r < 0.0) {
            return Err(CorpusError::Ratio(format!("ratios must be non-negative, got {parts:?}")));
        }
        let sum: f64 = parts.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(CorpusError::Ratio(format!("ratios sum to {sum}, not 1")));
        }
        Ok(())
    }

    fn as_array(&self) -> [f64; 3] {
        [self.train, self.val, self.test]
    }
}

/// Whether split membership is decided per pair or per lesson.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum SplitUnit {
    #[default]
    Pair,
    Lesson,
}

/// Apportions `n` items over the ratios by largest remainder. Remainder
/// ties go to the earlier part.
pub fn apportion(n: usize, ratios: [f64; 3]) -> [usize; 3] {
    let quotas = ratios.map(|r| n as f64 * r);
    // 1e-9 absorbs representation error such as 0.7 * 10 = 6.999...
    let mut counts = quotas.map(|q| ((q + 1e-9).floor() as usize).min(n));
    let assigned: usize = counts.iter().sum();
    let mut remaining = n.saturating_sub(assigned);
    if ratios.iter().all(|&r| r <= 0.0) {
        return counts;
    }
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| {
        let ra = quotas[a] - counts[a] as f64;
        let rb = quotas[b] - counts[b] as f64;
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &part in order.iter().cycle() {
        if remaining == 0 {
            break;
        }
        if ratios[part] > 0.0 {
            counts[part] += 1;
            remaining -= 1;
        }
    }
    counts
}

/// Stratified train/validation/test split.
///
/// Each label stratum is shuffled with a seeded ChaCha8 stream (labels
/// visited in code order) and cut by [`apportion`]. Within each part the
/// items keep their input order.
pub fn stratified_split(
    d: &Dataset,
    ratios: SplitRatios,
    seed: u64,
) -> Result<(Dataset, Dataset, Dataset), CorpusError> {
    split_with_unit(d, ratios, seed, SplitUnit::Pair)
}

pub fn split_with_unit(
    d: &Dataset,
    ratios: SplitRatios,
    seed: u64,
    unit: SplitUnit,
) -> Result<(Dataset, Dataset, Dataset), CorpusError> {
    ratios.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut membership = vec![0usize; d.len()];
    match unit {
        SplitUnit::Pair => {
            let mut strata: Vec<Vec<usize>> = vec![Vec::new(); NUM_LABELS];
            for (i, item) in d.items.iter().enumerate() {
                strata[item.label.code()].push(i);
            }
            for stratum in &mut strata {
                stratum.shuffle(&mut rng);
                let counts = apportion(stratum.len(), ratios.as_array());
                let mut it = stratum.iter();
                for (part, &count) in counts.iter().enumerate() {
                    for &idx in it.by_ref().take(count) {
                        membership[idx] = part;
                    }
                }
            }
        }
        SplitUnit::Lesson => {
            let mut lessons: Vec<&str> = Vec::new();
            let mut members: HashMap<&str, Vec<usize>> = HashMap::new();
            for (i, item) in d.items.iter().enumerate() {
                let entry = members.entry(item.lesson_id.as_str()).or_default();
                if entry.is_empty() {
                    lessons.push(item.lesson_id.as_str());
                }
                entry.push(i);
            }
            lessons.shuffle(&mut rng);
            let targets = apportion(d.len(), ratios.as_array());
            let mut filled = [0usize; 3];
            let mut part = 0;
            for lesson in lessons {
                while part < 2 && filled[part] >= targets[part] {
                    part += 1;
                }
                for &idx in &members[lesson] {
                    membership[idx] = part;
                }
                filled[part] += members[lesson].len();
            }
        }
    }
    let mut parts = [Vec::new(), Vec::new(), Vec::new()];
    for (item, &part) in d.items.iter().zip(&membership) {
        parts[part].push(item.clone());
    }
    let [train, val, test] = parts;
    Ok((Dataset::new(train), Dataset::new(val), Dataset::new(test)))
}

/// Inverse-frequency class weights, indexed by label code.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClassWeights(pub [f64; NUM_LABELS]);

impl ClassWeights {
    pub fn uniform() -> Self {
        ClassWeights([1.0; NUM_LABELS])
    }

    pub fn get(&self, label: TalkMoveLabel) -> f64 {
        self.0[label.code()]
    }
}

/// `total / (labels_present * count)` for present labels, 0 for absent ones.
pub fn class_weights(dist: &LabelDistribution) -> Result<ClassWeights, CorpusError> {
    if dist.total() == 0 {
        return Err(CorpusError::EmptyDataset);
    }
    let present = dist.labels_present() as f64;
    let total = dist.total() as f64;
    let mut w = [0.0; NUM_LABELS];
    for (weight, &count) in w.iter_mut().zip(dist.counts()) {
        if count > 0 {
            *weight = total / (present * count as f64);
        }
    }
    Ok(ClassWeights(w))
}
