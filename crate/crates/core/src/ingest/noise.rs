//! Deterministic ASR-style degradation of transcripts.
//!
//! Every token draws its drop and substitution decisions from a hash of
//! `(seed, utterance, token, stream)`, so for a fixed seed raising a rate
//! only ever adds corruption on top of what a lower rate produced.

use serde::{Deserialize, Serialize};

use super::transcript::{Speaker, Transcript, Utterance};
use super::IngestError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    pub word_drop_rate: f64,
    pub word_substitute_rate: f64,
    pub student_rate_multiplier: f64,
    pub seed: u64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        NoiseConfig {
            word_drop_rate: 0.0,
            word_substitute_rate: 0.0,
            student_rate_multiplier: 1.0,
            seed: 0,
        }
    }
}

impl NoiseConfig {
    pub fn validate(&self) -> Result<(), IngestError> {
        let rate_ok = |r: f64| (0.0..=1.0).contains(&r);
        if !rate_ok(self.word_drop_rate) || !rate_ok(self.word_substitute_rate) {
            return Err(IngestError::InvalidNoise("rates must lie in [0, 1]".into()));
        }
        if !(self.student_rate_multiplier >= 1.0 && self.student_rate_multiplier.is_finite()) {
            return Err(IngestError::InvalidNoise(
                "student_rate_multiplier must be a finite value >= 1".into(),
            ));
        }
        Ok(())
    }

    fn rates_for(&self, speaker: Speaker) -> (f64, f64) {
        let m = if speaker == Speaker::Student {
            self.student_rate_multiplier
        } else {
            1.0
        };
        (
            (self.word_drop_rate * m).min(1.0),
            (self.word_substitute_rate * m).min(1.0),
        )
    }
}

const PSEUDO_WORDS: [&str; 12] = [
    "um", "uh", "hmm", "mm", "erm", "huh", "blah", "tada", "zib", "florp", "wug", "dax",
];

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

fn position_hash(seed: u64, utterance: usize, token: usize, stream: u64) -> u64 {
    let mut h = splitmix64(seed);
    h = splitmix64(h ^ utterance as u64);
    h = splitmix64(h ^ (token as u64).rotate_left(32));
    splitmix64(h ^ stream)
}

fn unit(h: u64) -> f64 {
    (h >> 11) as f64 / (1u64 << 53) as f64
}

/// Applies noise and drops utterances left without tokens.
pub fn degrade(transcript: &Transcript, cfg: &NoiseConfig) -> Result<Transcript, IngestError> {
    degrade_aligned(transcript, cfg).map(|(t, _)| t)
}

/// Like [`degrade`], also returning for each kept utterance the index of
/// the utterance it came from.
pub fn degrade_aligned(
    transcript: &Transcript,
    cfg: &NoiseConfig,
) -> Result<(Transcript, Vec<usize>), IngestError> {
    cfg.validate()?;
    let mut utterances = Vec::with_capacity(transcript.utterances.len());
    let mut origin = Vec::with_capacity(transcript.utterances.len());
    for (ui, u) in transcript.utterances.iter().enumerate() {
        let (drop_rate, sub_rate) = cfg.rates_for(u.speaker);
        let mut changed = false;
        let mut kept: Vec<&str> = Vec::new();
        for (ti, token) in u.text.split_whitespace().enumerate() {
            if unit(position_hash(cfg.seed, ui, ti, 1)) < drop_rate {
                changed = true;
            } else if unit(position_hash(cfg.seed, ui, ti, 2)) < sub_rate {
                let pick = position_hash(cfg.seed, ui, ti, 3) % PSEUDO_WORDS.len() as u64;
                kept.push(PSEUDO_WORDS[pick as usize]);
                changed = true;
            } else {
                kept.push(token);
            }
        }
        if kept.is_empty() {
            continue;
        }
        let text = if changed { kept.join(" ") } else { u.text.clone() };
        utterances.push(Utterance { text, ..u.clone() });
        origin.push(ui);
    }
    Ok((
        Transcript {
            lesson_id: transcript.lesson_id.clone(),
            utterances,
        },
        origin,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lesson() -> Transcript {
        Transcript::new(
            "L1",
            vec![
                Utterance::timed(Speaker::Teacher, 0, 2000, "Can you give an example of an ordered pair?"),
                Utterance::timed(Speaker::Student, 2500, 3000, "Two comma three."),
                Utterance::timed(Speaker::Teacher, 3100, 5000, "Why could I argue that the slope should be increasing?"),
            ],
        )
        .unwrap()
    }

    #[test]
    fn zero_rates_are_identity() {
        let t = lesson();
        let cfg = NoiseConfig { seed: 9, ..Default::default() };
        assert_eq!(degrade(&t, &cfg).unwrap(), t);
    }

    #[test]
    fn full_drop_removes_everything() {
        let cfg = NoiseConfig { word_drop_rate: 1.0, ..Default::default() };
        let out = degrade(&lesson(), &cfg).unwrap();
        assert!(out.utterances.is_empty());
        assert_eq!(out.validate(), Err(IngestError::EmptyTranscript));
    }

    #[test]
    fn same_seed_same_bytes() {
        let cfg = NoiseConfig {
            word_drop_rate: 0.3,
            word_substitute_rate: 0.2,
            student_rate_multiplier: 2.0,
            seed: 42,
        };
        let a = degrade(&lesson(), &cfg).unwrap().to_json();
        let b = degrade(&lesson(), &cfg).unwrap().to_json();
        assert_eq!(a, b);
        let other = degrade(&lesson(), &NoiseConfig { seed: 43, ..cfg }).unwrap().to_json();
        assert_ne!(a, other);
    }

    #[test]
    fn speakers_and_timestamps_survive() {
        let cfg = NoiseConfig { word_substitute_rate: 1.0, ..Default::default() };
        let t = lesson();
        let out = degrade(&t, &cfg).unwrap();
        assert_eq!(out.utterances.len(), 3);
        for (a, b) in t.utterances.iter().zip(&out.utterances) {
            assert_eq!((a.speaker, a.start_ms, a.end_ms), (b.speaker, b.start_ms, b.end_ms));
            assert_eq!(a.text.split_whitespace().count(), b.text.split_whitespace().count());
            assert!(b.text.split(' ').all(|w| PSEUDO_WORDS.contains(&w)));
        }
    }

    #[test]
    fn student_multiplier_is_clamped() {
        let cfg = NoiseConfig {
            word_drop_rate: 0.6,
            student_rate_multiplier: 5.0,
            ..Default::default()
        };
        let (out, origin) = degrade_aligned(&lesson(), &cfg).unwrap();
        assert!(out.utterances.iter().all(|u| u.speaker != Speaker::Student));
        assert!(!origin.contains(&1));
    }

    #[test]
    fn invalid_configs_rejected() {
        let bad = [
            NoiseConfig { word_drop_rate: 1.5, ..Default::default() },
            NoiseConfig { word_substitute_rate: -0.1, ..Default::default() },
            NoiseConfig { student_rate_multiplier: 0.5, ..Default::default() },
            NoiseConfig { word_drop_rate: f64::NAN, ..Default::default() },
        ];
        for cfg in bad {
            assert!(matches!(degrade(&lesson(), &cfg), Err(IngestError::InvalidNoise(_))));
        }
    }

    #[test]
    fn higher_rate_drops_a_superset() {
        let t = lesson();
        let low = degrade(&t, &NoiseConfig { word_drop_rate: 0.2, seed: 5, ..Default::default() }).unwrap();
        let high = degrade(&t, &NoiseConfig { word_drop_rate: 0.5, seed: 5, ..Default::default() }).unwrap();
        let count = |t: &Transcript| t.utterances.iter().map(|u| u.text.split_whitespace().count()).sum::<usize>();
        assert!(count(&high) <= count(&low));
    }
}
