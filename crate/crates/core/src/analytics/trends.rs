use std::collections::BTreeMap;

use chrono::{DateTime, FixedOffset};
use serde::{Deserialize, Serialize};

use super::feedback::LessonFeedback;
use crate::taxonomy::{TalkCategory, TalkMoveLabel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrendPoint {
    pub lesson_id: String,
    pub created_at: String,
    pub value: f64,
}

/// Per metric, one point per lesson in time order. Lessons where an optional
/// metric is missing contribute no point to that series.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TrendSeries {
    pub metrics: BTreeMap<String, Vec<TrendPoint>>,
}

impl TrendSeries {
    pub fn series(&self, metric: &str) -> &[TrendPoint] {
        self.metrics.get(metric).map(Vec::as_slice).unwrap_or(&[])
    }
}

fn timestamp(s: &str) -> Option<DateTime<FixedOffset>> {
    DateTime::parse_from_rfc3339(s).ok()
}

fn metrics_of(f: &LessonFeedback) -> Vec<(String, Option<f64>)> {
    let mut out = vec![
        ("total_talk_moves".to_string(), Some(f.total_talk_moves as f64)),
        ("teacher_talk_pct".to_string(), f.teacher_talk_pct),
        ("student_talk_pct".to_string(), f.student_talk_pct),
        ("one_word_response_pct".to_string(), f.one_word_response_pct),
        ("wait_time_pct".to_string(), f.wait_time_pct),
    ];
    for label in TalkMoveLabel::TALK_MOVES {
        let n = f.talk_move_counts.get(&label).copied().unwrap_or(0);
        out.push((format!("count.{label}"), Some(n as f64)));
    }
    for c in TalkCategory::ALL {
        out.push((format!("category.{c}"), f.category_pcts.get(&c).copied()));
    }
    out
}

/// Builds time-sorted series. Timestamps are compared as instants when they
/// parse as RFC 3339 and as strings otherwise; ties keep input order.
pub fn trends(feedbacks: &[LessonFeedback]) -> TrendSeries {
    let mut sorted: Vec<&LessonFeedback> = feedbacks.iter().collect();
    sorted.sort_by(|a, b| match (timestamp(&a.created_at), timestamp(&b.created_at)) {
        (Some(x), Some(y)) => x.cmp(&y),
        _ => a.created_at.cmp(&b.created_at),
    });
    let mut series = TrendSeries::default();
    for f in sorted {
        for (name, value) in metrics_of(f) {
            let points = series.metrics.entry(name).or_default();
            if let Some(value) = value {
                points.push(TrendPoint {
                    lesson_id: f.lesson_id.clone(),
                    created_at: f.created_at.clone(),
                    value,
                });
            }
        }
    }
    series.metrics.retain(|_, v| !v.is_empty());
    series
}
