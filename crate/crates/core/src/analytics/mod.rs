//! Lesson feedback: talk move frequencies, talk share, category shares,
//! quarter breakdown, word cloud, one-word responses and wait time.

mod feedback;
mod render;
mod stats;
mod trends;

use thiserror::Error;

pub use feedback::{compute_feedback, parse_stopwords, AnalyticsConfig, LessonFeedback};
pub use render::{render_html, render_report, REPORT_SECTIONS, UNAVAILABLE};
pub use stats::{
    category_pcts, one_word_pct, quarter_breakdown, talk_move_counts, talk_ratio, wait_time_pct, word_cloud,
    CategoryCounts, WAIT_TIME_MS,
};
pub use trends::{trends, TrendPoint, TrendSeries};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AnalyticsError {
    #[error("{predictions} predictions for {teacher_sentences} teacher sentences")]
    Alignment { teacher_sentences: usize, predictions: usize },
}
