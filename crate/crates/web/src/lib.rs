//! WebAssembly bindings for the browser demo in `www/`. Every export takes
//! plain strings and returns JSON so the page needs no bundler.

use serde::Serialize;
use talkmoves::analytics::{compute_feedback, AnalyticsConfig, LessonFeedback};
use talkmoves::classifier::rule_classify;
use talkmoves::ingest::{build_pairs, normalize, parse_transcript_with_id, segment_transcript, SentencePair, NO_CONTEXT};
use talkmoves::metrics::evaluate;
use talkmoves::taxonomy::{parse_label, TalkMoveLabel};
use wasm_bindgen::prelude::*;

#[derive(Serialize)]
struct Classified {
    student_context: String,
    teacher_sentence: String,
    label: TalkMoveLabel,
    name: &'static str,
}

#[derive(Serialize)]
struct Analysis {
    pairs: Vec<Classified>,
    feedback: LessonFeedback,
}

fn classified(pair: SentencePair) -> Classified {
    let label = rule_classify(&pair).label;
    Classified {
        student_context: pair.student_context,
        teacher_sentence: pair.teacher_sentence,
        label,
        name: label.display_name(),
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string(v).expect("serializable")
}

/// Labels one pair with the rule baseline. An empty student turn means no context.
pub fn classify_pair_json(student: &str, teacher: &str) -> Result<String, String> {
    let teacher = normalize(teacher);
    if teacher.is_empty() {
        return Err("teacher sentence is empty".into());
    }
    let student = match normalize(student) {
        s if s.is_empty() => NO_CONTEXT.to_string(),
        s => s,
    };
    Ok(to_json(&classified(SentencePair::new(student, teacher))))
}

/// Classifies every teacher sentence of a transcript and computes its feedback.
pub fn analyze_transcript_json(text: &str, format: &str, created_at: &str) -> Result<String, String> {
    let format = format.parse().map_err(|e: talkmoves::ingest::IngestError| e.to_string())?;
    let t = parse_transcript_with_id(text.as_bytes(), format, "demo").map_err(|e| e.to_string())?;
    let pairs = build_pairs(&segment_transcript(&t));
    let pairs: Vec<Classified> = pairs.into_iter().map(classified).collect();
    let labels: Vec<TalkMoveLabel> = pairs.iter().map(|p| p.label).collect();
    let feedback = compute_feedback(&t, &labels, &AnalyticsConfig::default(), created_at).map_err(|e| e.to_string())?;
    Ok(to_json(&Analysis { pairs, feedback }))
}

fn labels(text: &str) -> Result<Vec<TalkMoveLabel>, String> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| parse_label(s).map_err(|e| e.to_string()))
        .collect()
}

/// Metrics report for two label lists separated by commas or whitespace.
pub fn evaluate_json(gold: &str, predicted: &str) -> Result<String, String> {
    let report = evaluate(&labels(gold)?, &labels(predicted)?).map_err(|e| e.to_string())?;
    Ok(to_json(&report))
}

#[wasm_bindgen]
pub fn classify_pair(student: &str, teacher: &str) -> Result<String, JsValue> {
    classify_pair_json(student, teacher).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn analyze_transcript(text: &str, format: &str, created_at: &str) -> Result<String, JsValue> {
    analyze_transcript_json(text, format, created_at).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen(js_name = evaluate)]
pub fn evaluate_labels(gold: &str, predicted: &str) -> Result<String, JsValue> {
    evaluate_json(gold, predicted).map_err(|e| JsValue::from_str(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_without_context() {
        let v: serde_json::Value = serde_json::from_str(&classify_pair_json("", "Why do you think that?").unwrap()).unwrap();
        assert_eq!(v["student_context"], "-");
        assert_eq!(v["teacher_sentence"], "why do you think that");
        assert!(classify_pair_json("x", " ?! ").is_err());
    }

    #[test]
    fn transcript_feedback() {
        let text = "teacher: What is the slope?\nstudent: Two.\nteacher: Why?\n";
        let v: serde_json::Value =
            serde_json::from_str(&analyze_transcript_json(text, "turns_text", "2024-01-01T00:00:00Z").unwrap()).unwrap();
        assert_eq!(v["pairs"].as_array().unwrap().len(), 2);
        assert_eq!(v["pairs"][1]["student_context"], "two");
        assert_eq!(v["feedback"]["one_word_response_pct"], 1.0);
        assert!(analyze_transcript_json(text, "pdf", "").is_err());
    }

    #[test]
    fn label_metrics() {
        let v: serde_json::Value = serde_json::from_str(&evaluate_json("none, restating revoicing", "none,restating,none").unwrap()).unwrap();
        assert!((v["accuracy"].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-12);
        assert!(evaluate_json("none", "none restating").is_err());
        assert!(evaluate_json("none", "shouting").is_err());
    }
}
