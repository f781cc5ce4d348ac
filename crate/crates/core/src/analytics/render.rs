//! Static report page. Everything is inline so the file can be opened offline.

use std::fmt::Write;

use super::feedback::LessonFeedback;
use crate::taxonomy::{TalkCategory, TalkMoveLabel};

/// Section markers present in every report, one per lesson statistic.
pub const REPORT_SECTIONS: [&str; 7] = [
    "talk-move-counts",
    "talk-ratio",
    "category-pcts",
    "quarters",
    "word-cloud",
    "one-word-responses",
    "wait-time",
];

/// Marker emitted in place of a statistic that cannot be computed.
pub const UNAVAILABLE: &str = "data-unavailable";

const STYLE: &str = "body{font-family:sans-serif;max-width:52em;margin:2em auto;color:#222}\
section{border:1px solid #ddd;border-radius:6px;padding:1em;margin:1em 0}\
table{border-collapse:collapse}td,th{padding:.2em .8em;text-align:left}\
.bar{display:inline-block;height:.9em;background:#4a7ebb}\
.cloud span{margin:.2em .4em;display:inline-block}\
.na{color:#999;font-style:italic}";

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            _ => out.push(c),
        }
    }
    out
}

fn pct(v: f64) -> String {
    format!("{:.1}%", v * 100.0)
}

fn bar(v: f64) -> String {
    format!("<span class=\"bar\" style=\"width:{:.1}em\"></span>", v.clamp(0.0, 1.0) * 20.0)
}

fn unavailable(out: &mut String) {
    let _ = write!(out, "<p class=\"na\" {UNAVAILABLE}>unavailable</p>");
}

fn open(out: &mut String, id: &str, title: &str) {
    let _ = write!(out, "<section data-section=\"{id}\"><h2>{title}</h2>");
}

/// Renders the feedback as pretty JSON and a self-contained HTML page.
pub fn render_report(f: &LessonFeedback) -> (Vec<u8>, Vec<u8>) {
    (f.to_json(), render_html(f).into_bytes())
}

pub fn render_html(f: &LessonFeedback) -> String {
    let mut h = String::new();
    let title = escape(&f.lesson_id);
    let _ = write!(
        h,
        "<!DOCTYPE html>\n<html lang=\"en\"><head><meta charset=\"utf-8\"><title>Lesson {title}</title>\
<style>{STYLE}</style></head><body><h1>Lesson {title}</h1><p>Generated {}</p>",
        escape(&f.created_at)
    );

    open(&mut h, REPORT_SECTIONS[0], "Talk moves");
    h.push_str("<table><tr><th>Talk move</th><th>Count</th></tr>");
    for label in TalkMoveLabel::TALK_MOVES {
        let n = f.talk_move_counts.get(&label).copied().unwrap_or(0);
        let _ = write!(h, "<tr><td>{}</td><td>{n}</td></tr>", label.display_name());
    }
    let _ = write!(h, "<tr><th>Total</th><th>{}</th></tr></table></section>", f.total_talk_moves);

    open(&mut h, REPORT_SECTIONS[1], "Teacher and student talk");
    match (f.teacher_talk_pct, f.student_talk_pct) {
        (Some(t), Some(s)) => {
            let _ = write!(
                h,
                "<p>Teacher {} {}</p><p>Student {} {}</p>",
                pct(t),
                bar(t),
                pct(s),
                bar(s)
            );
        }
        _ => unavailable(&mut h),
    }
    h.push_str("</section>");

    open(&mut h, REPORT_SECTIONS[2], "Talk move categories");
    if f.category_pcts.is_empty() {
        h.push_str("<p>No talk moves in this lesson.</p>");
    } else {
        h.push_str("<table>");
        for c in TalkCategory::ALL {
            let v = f.category_pcts.get(&c).copied().unwrap_or(0.0);
            let _ = write!(h, "<tr><td>{}</td><td>{}</td><td>{}</td></tr>", c.display_name(), pct(v), bar(v));
        }
        h.push_str("</table>");
    }
    h.push_str("</section>");

    open(&mut h, REPORT_SECTIONS[3], "Talk moves by quarter");
    h.push_str("<table><tr><th></th><th>Q1</th><th>Q2</th><th>Q3</th><th>Q4</th></tr>");
    for c in TalkCategory::ALL {
        let _ = write!(h, "<tr><td>{}</td>", c.display_name());
        for q in &f.quarters {
            let _ = write!(h, "<td>{}</td>", q.get(&c).copied().unwrap_or(0));
        }
        h.push_str("</tr>");
    }
    h.push_str("</table></section>");

    open(&mut h, REPORT_SECTIONS[4], "Word cloud");
    if f.top_words.is_empty() {
        h.push_str("<p>No words.</p>");
    } else {
        let max = f.top_words[0].1.max(1) as f64;
        h.push_str("<div class=\"cloud\">");
        for (w, c) in &f.top_words {
            let size = 0.8 + 1.7 * (*c as f64 / max);
            let _ = write!(h, "<span style=\"font-size:{size:.2}em\" title=\"{c}\">{}</span>", escape(w));
        }
        h.push_str("</div>");
    }
    h.push_str("</section>");

    open(&mut h, REPORT_SECTIONS[5], "One-word student responses");
    match f.one_word_response_pct {
        Some(v) => {
            let _ = write!(h, "<p>{} of student sentences {}</p>", pct(v), bar(v));
        }
        None => unavailable(&mut h),
    }
    h.push_str("</section>");

    open(&mut h, REPORT_SECTIONS[6], "Wait time of at least 3 seconds");
    match f.wait_time_pct {
        Some(v) => {
            let _ = write!(h, "<p>{} of teacher sentences {}</p>", pct(v), bar(v));
        }
        None => unavailable(&mut h),
    }
    h.push_str("</section></body></html>\n");
    h
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::{compute_feedback, AnalyticsConfig};
    use crate::ingest::{Speaker, Transcript, Utterance};

    fn feedback(timed: bool) -> LessonFeedback {
        let u = |s, a, b, t: &str| {
            if timed {
                Utterance::timed(s, a, b, t)
            } else {
                Utterance::new(s, t)
            }
        };
        let t = Transcript::new(
            "<b>x</b>",
            vec![
                u(Speaker::Teacher, 0, 1000, "Why do you think so?"),
                u(Speaker::Student, 5000, 6000, "Because."),
            ],
        )
        .unwrap();
        compute_feedback(&t, &[TalkMoveLabel::PressForReasoning], &AnalyticsConfig::default(), "now").unwrap()
    }

    #[test]
    fn seven_sections() {
        let html = render_html(&feedback(true));
        for id in REPORT_SECTIONS {
            assert_eq!(html.matches(&format!("data-section=\"{id}\"")).count(), 1, "{id}");
        }
        assert!(!html.contains(UNAVAILABLE));
        assert!(!html.contains("<b>x</b>"));
        assert!(!html.contains("http"));
    }

    #[test]
    fn missing_wait_time_is_marked() {
        let html = render_html(&feedback(false));
        assert!(html.contains(UNAVAILABLE));
        let (json, _) = render_report(&feedback(false));
        let v: serde_json::Value = serde_json::from_slice(&json).unwrap();
        assert!(v["wait_time_pct"].is_null());
    }
}
