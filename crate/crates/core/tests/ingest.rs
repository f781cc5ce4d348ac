use proptest::prelude::*;

use talkmoves::ingest::*;

fn speaker() -> impl Strategy<Value = Speaker> {
    prop_oneof![Just(Speaker::Teacher), Just(Speaker::Student), Just(Speaker::Other)]
}

fn utterance() -> impl Strategy<Value = Utterance> {
    (speaker(), "[A-Za-z]{1,6}( [a-zA-Z0-9,]{1,6}){0,8}[.?!]?( [A-Za-z]{1,6}( [a-z]{1,5}){0,4}[.?!]){0,2}")
        .prop_map(|(s, t)| Utterance::new(s, t))
}

fn transcript() -> impl Strategy<Value = Transcript> {
    prop::collection::vec(utterance(), 1..25).prop_map(|u| Transcript::new("prop", u).unwrap())
}

fn timed(t: &Transcript) -> Transcript {
    let utts = t
        .utterances
        .iter()
        .enumerate()
        .map(|(i, u)| Utterance::timed(u.speaker, i as u64 * 2000, i as u64 * 2000 + 1500, u.text.clone()))
        .collect();
    Transcript::new(t.lesson_id.clone(), utts).unwrap()
}

proptest! {
    #[test]
    fn normalize_is_idempotent(s in "\\PC{0,60}") {
        let once = normalize(&s);
        prop_assert_eq!(normalize(&once), once.clone());
        prop_assert!(!once.starts_with(' ') && !once.ends_with(' ') && !once.contains("  "));
    }

    #[test]
    fn pairs_follow_teacher_sentences(t in transcript()) {
        let sentences = segment_transcript(&t);
        let pairs = build_pairs(&sentences);
        let teacher: Vec<_> = sentences.iter().filter(|s| s.speaker == Speaker::Teacher).collect();
        prop_assert_eq!(pairs.len(), teacher.len());
        for (p, s) in pairs.iter().zip(&teacher) {
            prop_assert_eq!(p.teacher_sentence_index, s.index);
            prop_assert_eq!(&p.teacher_sentence, &s.normalized);
        }
        prop_assert!(pairs.windows(2).all(|w| w[0].teacher_sentence_index < w[1].teacher_sentence_index));

        // Independent reading of the rule: a teacher sentence takes the last
        // student sentence before it only if no teacher sentence came between.
        // Each student sentence therefore feeds at most one pair.
        let mut used = vec![0usize; sentences.len()];
        for p in &pairs {
            let before = &sentences[..p.teacher_sentence_index];
            let source = before
                .iter()
                .rev()
                .find(|x| x.speaker != Speaker::Other)
                .filter(|x| x.speaker == Speaker::Student);
            match source {
                Some(x) => {
                    used[x.index] += 1;
                    prop_assert_eq!(&p.student_context, &x.normalized);
                }
                None => prop_assert_eq!(p.student_context.as_str(), NO_CONTEXT),
            }
        }
        prop_assert!(used.iter().all(|&n| n <= 1));
        prop_assert!(pairs.iter().all(|p| !p.student_context.is_empty()));
    }

    #[test]
    fn sentences_do_not_hide_boundaries(text in "[a-z]{1,5}([.?!]? [a-z]{1,5}){0,10}[.?!]?") {
        for sentence in split_sentences(&text) {
            let chars: Vec<char> = sentence.chars().collect();
            for i in 0..chars.len().saturating_sub(1) {
                prop_assert!(!(matches!(chars[i], '.' | '?' | '!') && chars[i + 1].is_whitespace()), "{:?}", sentence);
            }
        }
    }

    #[test]
    fn json_round_trip(t in transcript(), with_times in any::<bool>()) {
        let t = if with_times { timed(&t) } else { t };
        let back = parse_transcript(&t.to_json(), TranscriptFormat::Json).unwrap();
        prop_assert_eq!(back, t.clone());
        let back = parse_transcript(&transcript_to_csv(&t), TranscriptFormat::Csv).unwrap();
        prop_assert_eq!(back, t);
    }

    #[test]
    fn noise_is_monotone_in_rate(t in transcript(), seed in any::<u64>(), lo in 0.0f64..0.5, extra in 0.0f64..0.5) {
        let at = |rate: f64| {
            let cfg = NoiseConfig { word_drop_rate: rate, seed, ..NoiseConfig::default() };
            let (noisy, origin) = degrade_aligned(&t, &cfg).unwrap();
            let mut kept = vec![0usize; t.utterances.len()];
            for (u, &o) in noisy.utterances.iter().zip(&origin) {
                kept[o] = u.text.split_whitespace().count();
            }
            kept
        };
        let a = at(lo);
        let b = at(lo + extra);
        prop_assert!(a.iter().zip(&b).all(|(x, y)| y <= x));
        let zero = degrade(&t, &NoiseConfig { seed, ..NoiseConfig::default() }).unwrap();
        prop_assert_eq!(zero, t);
    }
}

#[test]
fn turn_pairs_from_the_move_table() {
    let t = Transcript::new(
        "table",
        vec![
            Utterance::new(Speaker::Student, "You add two here."),
            Utterance::new(Speaker::Teacher, "Julia says add two here. Why?"),
        ],
    )
    .unwrap();
    let pairs = build_pairs(&segment_transcript(&t));
    assert_eq!(pairs.len(), 2);
    assert_eq!(pairs[0].student_context, "you add two here");
    assert_eq!(pairs[0].teacher_sentence, "julia says add two here");
    assert_eq!(pairs[1].student_context, NO_CONTEXT);
    assert_eq!(pairs[1].teacher_sentence, "why");
}

#[test]
fn formats_agree() {
    let text = b"teacher: What is the slope?\n# note\n\nstudent: Three.\nteacher: Why?\n";
    let turns = parse_transcript_with_id(text, TranscriptFormat::TurnsText, "l1").unwrap();
    let json = parse_transcript(&turns.to_json(), TranscriptFormat::Json).unwrap();
    let csv = parse_transcript(&transcript_to_csv(&turns), TranscriptFormat::Csv).unwrap();
    assert_eq!(turns, json);
    assert_eq!(turns, csv);
    assert_eq!(turns.utterances.len(), 3);
    assert!(parse_transcript(b"{not json", TranscriptFormat::Json).is_err());
}
