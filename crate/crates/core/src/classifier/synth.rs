//! Synthetic sentence pairs labeled by the rule baseline, for sanity
//! checks and demos of the trainable model.

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::rules::RuleSet;
use crate::corpus::{Dataset, LabeledPair};
use crate::ingest::{SentencePair, NO_CONTEXT};

const NAMES: &[&str] = &[
    "julia", "juan", "eliza", "marcus", "aisha", "sam", "priya", "diego", "emma", "noah",
];

const ROUTINE: &[&str] = &[
    "take out your notebooks",
    "turn to page twelve",
    "put your pencils down",
    "we will start with the warm up",
    "look at the board",
    "get with your partner",
    "open your books",
    "write your name on the worksheet",
    "lets get started",
    "great job today",
    "its time for lunch",
    "clean up your desks",
];

const TOGETHER: &[&str] = &[
    "can you say that again",
    "who can repeat what {name} said",
    "everyone look up here",
    "listen to {name}",
    "what did {name} just say",
    "everyone eyes on {name}",
    "can you repeat that louder",
    "i want everyone to listen",
];

const RELATE: &[&str] = &[
    "do you agree with {name}",
    "who disagrees with {name}",
    "does anyone agree with that",
    "raise your hand if you agree",
    "{name} do you agree or disagree",
    "who agrees with what {name} thinks",
];

const REASONING: &[&str] = &[
    "why do you think that",
    "can you explain your thinking",
    "how do you know",
    "explain how you got that",
    "why does that work",
    "why did you choose that",
    "how do you know it is true",
];

const ACCURACY: &[&str] = &[
    "what is the slope of this line",
    "can you give an example of an ordered pair",
    "what number goes in the box",
    "what is the area of the rectangle",
    "write the equation for this graph",
    "what fraction of the pizza is left",
    "what is the sum of these two",
];

const STUDENT_MATH: &[&str] = &[
    "you add two here",
    "the slope is three",
    "i got seven tenths",
    "it goes up by four",
    "then you get eight",
    "so you put the eight on the box",
    "the answer is twelve",
    "we multiply by two",
    "the line goes straight down",
    "it is half of the square",
];

const STUDENT_CHATTER: &[&str] = &[
    "yes",
    "no",
    "maybe",
    "i finished",
    "hmm",
    "can i go to the bathroom",
    "im done",
    "wait",
];

const REVOICE_FRAMES: &[&str] = &[
    "{name} told us {s}",
    "{name} says {s}",
    "so {name} thinks {s}",
    "{name} noticed that {s}",
];

fn fill(template: &str, rng: &mut ChaCha8Rng) -> String {
    template.replace("{name}", NAMES.choose(rng).expect("non-empty"))
}

fn chatter_or_none(rng: &mut ChaCha8Rng) -> String {
    if rng.random_bool(0.5) {
        NO_CONTEXT.to_string()
    } else {
        STUDENT_CHATTER.choose(rng).expect("non-empty").to_string()
    }
}

fn sample_pair(rng: &mut ChaCha8Rng) -> SentencePair {
    let family = rng.random_range(0..7);
    let pick = |list: &[&str], rng: &mut ChaCha8Rng| fill(list.choose(rng).expect("non-empty"), rng);
    match family {
        0 => {
            let t = pick(ROUTINE, rng);
            SentencePair::new(chatter_or_none(rng), t)
        }
        1 => {
            let t = pick(TOGETHER, rng);
            SentencePair::new(chatter_or_none(rng), t)
        }
        2 => {
            let t = pick(RELATE, rng);
            SentencePair::new(chatter_or_none(rng), t)
        }
        3 => {
            let t = pick(REASONING, rng);
            SentencePair::new(chatter_or_none(rng), t)
        }
        4 => {
            let t = pick(ACCURACY, rng);
            SentencePair::new(chatter_or_none(rng), t)
        }
        5 => {
            let student = *STUDENT_MATH.choose(rng).expect("non-empty");
            let tokens: Vec<&str> = student.split(' ').collect();
            let len = rng.random_range(2.min(tokens.len())..=tokens.len());
            let start = rng.random_range(0..=tokens.len() - len);
            SentencePair::new(student, tokens[start..start + len].join(" "))
        }
        _ => {
            let student = *STUDENT_MATH.choose(rng).expect("non-empty");
            let frame = fill(REVOICE_FRAMES.choose(rng).expect("non-empty"), rng);
            SentencePair::new(student, frame.replace("{s}", student))
        }
    }
}

/// `n` pairs drawn from templates for each talk move and labeled by the
/// default [`RuleSet`], so the labels are exactly the rule baseline's output.
pub fn synthetic_corpus(n: usize, seed: u64) -> Dataset {
    let rules = RuleSet::default();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let items = (0..n)
        .map(|i| {
            let mut pair = sample_pair(&mut rng);
            pair.teacher_sentence_index = i;
            LabeledPair {
                label: rules.label(&pair),
                pair,
                lesson_id: "synthetic".to_string(),
            }
        })
        .collect();
    Dataset::new(items)
}
