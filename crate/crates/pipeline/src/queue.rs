//! FIFO job queue over the [`Store`], the worker step and crash recovery.

use std::sync::Mutex;
use std::thread;
use std::time::Duration;

use chrono::{SecondsFormat, Utc};
use talkmoves::analytics::{compute_feedback, render_report, AnalyticsConfig, LessonFeedback};
use talkmoves::classifier::{fnv1a64, ClassifierError, Prediction};
use talkmoves::ingest::{
    build_pairs, parse_transcript_with_id, segment_transcript, IngestError, SentencePair, Transcript,
    TranscriptFormat, DEFAULT_LESSON_ID,
};
use talkmoves::taxonomy::TalkMoveLabel;
use thiserror::Error;

use crate::engine::Engine;
use crate::store::*;

#[derive(Debug, Error)]
pub enum QueueError {
    #[error("malformed input: {0}")]
    MalformedInput(#[from] IngestError),
    #[error(transparent)]
    Store(#[from] StoreError),
}

/// Everything produced for one lesson.
#[derive(Debug, Clone, PartialEq)]
pub struct LessonArtifacts {
    pub pairs: Vec<SentencePair>,
    pub predictions: Vec<Prediction>,
    pub predictions_csv: Vec<u8>,
    pub feedback: LessonFeedback,
    pub feedback_json: Vec<u8>,
    pub report_html: Vec<u8>,
}

/// One row per teacher sentence with the label and all seven probabilities.
pub fn predictions_csv(pairs: &[SentencePair], predictions: &[Prediction]) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let mut header = vec![
        "teacher_sentence_index".to_string(),
        "student_context".to_string(),
        "teacher_sentence".to_string(),
        "label".to_string(),
    ];
    header.extend(TalkMoveLabel::ALL.iter().map(|l| format!("p_{l}")));
    w.write_record(&header).expect("write to memory");
    for (pair, pred) in pairs.iter().zip(predictions) {
        let mut row = vec![
            pair.teacher_sentence_index.to_string(),
            pair.student_context.clone(),
            pair.teacher_sentence.clone(),
            pred.label.to_string(),
        ];
        row.extend(pred.probs.iter().map(|p| p.to_string()));
        w.write_record(&row).expect("write to memory");
    }
    w.into_inner().expect("flush to memory")
}

fn classify_pairs(engine: &Engine, transcript: &Transcript) -> Result<(Vec<SentencePair>, Vec<Prediction>), ClassifierError> {
    let pairs = build_pairs(&segment_transcript(transcript));
    let preds = engine.classify(&pairs)?;
    Ok((pairs, preds))
}

fn analyze(
    transcript: &Transcript,
    pairs: Vec<SentencePair>,
    predictions: Vec<Prediction>,
    analytics: &AnalyticsConfig,
    created_at: &str,
) -> Result<LessonArtifacts, String> {
    let labels: Vec<TalkMoveLabel> = predictions.iter().map(|p| p.label).collect();
    let feedback = compute_feedback(transcript, &labels, analytics, created_at).map_err(|e| format!("AlignmentError: {e}"))?;
    let (feedback_json, report_html) = render_report(&feedback);
    Ok(LessonArtifacts {
        predictions_csv: predictions_csv(&pairs, &predictions),
        pairs,
        predictions,
        feedback,
        feedback_json,
        report_html,
    })
}

/// Runs the whole lesson pipeline in memory.
pub fn process_transcript(
    transcript: &Transcript,
    engine: &Engine,
    analytics: &AnalyticsConfig,
    created_at: &str,
) -> Result<LessonArtifacts, String> {
    let (pairs, preds) = classify_pairs(engine, transcript).map_err(|e| failure_reason(&e))?;
    analyze(transcript, pairs, preds, analytics, created_at)
}

/// `Kind: detail` text recorded in a failed job.
pub fn failure_reason(e: &ClassifierError) -> String {
    let kind = match e {
        ClassifierError::EmptyDataset => "EmptyDataset",
        ClassifierError::Divergence { .. } => "Divergence",
        ClassifierError::InvalidConfig(_) => "InvalidConfig",
        ClassifierError::VersionMismatch(_) => "VersionMismatch",
        ClassifierError::CorruptModel(_) => "CorruptModel",
        ClassifierError::AdapterUnreachable(_) => "AdapterUnreachable",
        ClassifierError::BadResponse(_) => "BadResponse",
    };
    format!("{kind}: {e}")
}

pub fn now_iso() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

#[derive(Debug, Default, Clone, PartialEq, Eq)]
pub struct RecoverReport {
    pub requeued: usize,
    pub corrupt: usize,
    pub orphans_removed: usize,
    pub temp_files_removed: usize,
}

/// The queue. Claiming and enqueueing are serialized by one lock; readers go
/// straight to the store.
pub struct Queue {
    store: Store,
    lock: Mutex<()>,
}

impl Queue {
    pub fn new(store: Store) -> Self {
        Queue { store, lock: Mutex::new(()) }
    }

    pub fn store(&self) -> &Store {
        &self.store
    }

    /// Every readable job, in submission order.
    pub fn jobs(&self) -> Result<Vec<Job>, StoreError> {
        let mut jobs: Vec<Job> = self
            .store
            .job_ids()?
            .iter()
            .filter_map(|id| self.store.read_job(id).ok())
            .collect();
        jobs.sort_by(|a, b| a.seq.cmp(&b.seq).then_with(|| a.id.cmp(&b.id)));
        Ok(jobs)
    }

    /// Validates and stores a transcript, returning the queued job.
    pub fn enqueue(
        &self,
        bytes: &[u8],
        format: TranscriptFormat,
        lesson_id: Option<&str>,
        teacher_id: Option<&str>,
    ) -> Result<Job, QueueError> {
        let mut transcript = parse_transcript_with_id(bytes, format, lesson_id.unwrap_or(DEFAULT_LESSON_ID))?;
        if let Some(id) = lesson_id {
            if !id.is_empty() {
                transcript.lesson_id = id.to_string();
            }
        }
        let _guard = self.lock.lock().unwrap_or_else(|e| e.into_inner());
        let seq = self.jobs()?.iter().map(|j| j.seq).max().unwrap_or(0) + 1;
        let submitted_at = now_iso();
        let stamp = Utc::now().format("%Y%m%dT%H%M%S%3fZ");
        let base = format!("{stamp}-{:016x}", fnv1a64(bytes));
        let mut id = base.clone();
        let mut n = 1;
        while !self.store.create_job_dir(&id)? {
            n += 1;
            id = format!("{base}-{n}");
        }
        let job = Job {
            id: id.clone(),
            seq,
            lesson_id: transcript.lesson_id.clone(),
            teacher_id: teacher_id.filter(|t| !t.is_empty()).map(str::to_string),
            state: JobState::Queued,
            reason: None,
            submitted_at,
            finished_at: None,
        };
        self.store.write_artifact(&id, TRANSCRIPT_FILE, &transcript.to_json())?;
        // job.json last: a directory without it is an unfinished upload.
        self.store.write_job(&job)?;
        Ok(job)
    }

    fn claim(&self) -> Result<Option<Job>, StoreError> {
        let _guard = self.lock.lock().unwrap_or_else(|e| e.into_inner());
        let Some(mut job) = self.jobs()?.into_iter().find(|j| j.state == JobState::Queued) else {
            return Ok(None);
        };
        job.state = JobState::Classifying;
        self.store.write_job(&job)?;
        Ok(Some(job))
    }

    fn transition(&self, job: &mut Job, next: JobState, reason: Option<String>) -> Result<(), StoreError> {
        debug_assert!(job.state.can_move_to(next), "{:?} -> {:?}", job.state, next);
        job.state = next;
        job.reason = reason;
        if next.is_terminal() {
            job.finished_at = Some(now_iso());
        }
        self.store.write_job(job)
    }

    /// Processes the oldest queued job. Returns `None` when the queue is
    /// empty. Stage failures end in the failed state, never in an error.
    pub fn worker_step(&self, engine: &Engine, analytics: &AnalyticsConfig, stage_delay: Duration) -> Result<Option<Job>, StoreError> {
        let Some(mut job) = self.claim()? else { return Ok(None) };
        let pause = || {
            if !stage_delay.is_zero() {
                thread::sleep(stage_delay);
            }
        };
        pause();
        let transcript = match self
            .store
            .read_artifact(&job.id, TRANSCRIPT_FILE)
            .map_err(|e| e.to_string())
            .and_then(|b| {
                parse_transcript_with_id(&b, TranscriptFormat::Json, &job.lesson_id).map_err(|e| e.to_string())
            }) {
            Ok(t) => t,
            Err(e) => {
                self.transition(&mut job, JobState::Failed, Some(format!("MalformedInput: {e}")))?;
                return Ok(Some(job));
            }
        };
        let (pairs, preds) = match classify_pairs(engine, &transcript) {
            Ok(x) => x,
            Err(e) => {
                self.transition(&mut job, JobState::Failed, Some(failure_reason(&e)))?;
                return Ok(Some(job));
            }
        };
        self.store.write_artifact(&job.id, PREDICTIONS_FILE, &predictions_csv(&pairs, &preds))?;
        self.transition(&mut job, JobState::Analyzing, None)?;
        pause();
        match analyze(&transcript, pairs, preds, analytics, &job.submitted_at) {
            Ok(a) => {
                self.store.write_artifact(&job.id, FEEDBACK_FILE, &a.feedback_json)?;
                self.store.write_artifact(&job.id, REPORT_FILE, &a.report_html)?;
                self.transition(&mut job, JobState::Done, None)?;
            }
            Err(reason) => self.transition(&mut job, JobState::Failed, Some(reason))?,
        }
        Ok(Some(job))
    }

    /// Startup repair: removes temporary files and unfinished uploads, marks
    /// unreadable records failed and requeues interrupted jobs.
    pub fn recover(&self) -> Result<RecoverReport, StoreError> {
        let _guard = self.lock.lock().unwrap_or_else(|e| e.into_inner());
        let mut report = RecoverReport::default();
        for id in self.store.job_ids()? {
            report.temp_files_removed += self.store.remove_temp_files(&id)?;
            match self.store.read_job(&id) {
                Ok(mut job) => {
                    if matches!(job.state, JobState::Classifying | JobState::Analyzing) {
                        for file in [PREDICTIONS_FILE, FEEDBACK_FILE, REPORT_FILE] {
                            let _ = std::fs::remove_file(self.store.artifact_path(&id, file));
                        }
                        job.state = JobState::Queued;
                        job.reason = None;
                        self.store.write_job(&job)?;
                        report.requeued += 1;
                    }
                }
                Err(StoreError::NotFound(_)) => {
                    self.store.remove_job_dir(&id)?;
                    report.orphans_removed += 1;
                }
                Err(StoreError::Corrupt { reason, .. }) => {
                    let job = Job {
                        id: id.clone(),
                        seq: 0,
                        lesson_id: String::new(),
                        teacher_id: None,
                        state: JobState::Failed,
                        reason: Some(format!("CorruptState: {reason}")),
                        submitted_at: String::new(),
                        finished_at: Some(now_iso()),
                    };
                    self.store.write_job(&job)?;
                    report.corrupt += 1;
                }
                Err(e) => return Err(e),
            }
        }
        Ok(report)
    }

    /// Feedback of every finished lesson of one teacher.
    pub fn teacher_feedback(&self, teacher_id: &str) -> Result<Vec<LessonFeedback>, StoreError> {
        let mut out = Vec::new();
        for job in self.jobs()? {
            if job.state == JobState::Done && job.teacher_id.as_deref() == Some(teacher_id) {
                let bytes = self.store.read_artifact(&job.id, FEEDBACK_FILE)?;
                if let Ok(f) = LessonFeedback::from_json(&bytes) {
                    out.push(f);
                }
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use talkmoves::classifier::{AdapterConfig, RuleSet};

    const LESSON: &[u8] = b"teacher: What is the slope?\nstudent: Three.\nteacher: Why do you think so?\n";

    fn queue() -> (tempfile::TempDir, Queue) {
        let dir = tempfile::tempdir().unwrap();
        let q = Queue::new(Store::open(dir.path()).unwrap());
        (dir, q)
    }

    fn rules() -> Engine {
        Engine::Rule(RuleSet::default())
    }

    #[test]
    fn enqueue_then_process() {
        let (_d, q) = queue();
        let job = q.enqueue(LESSON, TranscriptFormat::TurnsText, Some("l1"), Some("t1")).unwrap();
        assert_eq!(job.state, JobState::Queued);
        assert_eq!(job.lesson_id, "l1");
        let done = q.worker_step(&rules(), &AnalyticsConfig::default(), Duration::ZERO).unwrap().unwrap();
        assert_eq!(done.state, JobState::Done);
        let files = q.store().list_files(&job.id).unwrap();
        assert_eq!(files, vec![FEEDBACK_FILE, JOB_FILE, PREDICTIONS_FILE, REPORT_FILE, TRANSCRIPT_FILE]);
        assert!(q.worker_step(&rules(), &AnalyticsConfig::default(), Duration::ZERO).unwrap().is_none());
        assert_eq!(q.teacher_feedback("t1").unwrap().len(), 1);
    }

    #[test]
    fn malformed_is_rejected_synchronously() {
        let (_d, q) = queue();
        assert!(matches!(
            q.enqueue(b"{oops", TranscriptFormat::Json, None, None),
            Err(QueueError::MalformedInput(_))
        ));
        assert!(q.jobs().unwrap().is_empty());
        assert!(q.store().job_ids().unwrap().is_empty());
    }

    #[test]
    fn fifo_and_distinct_ids() {
        let (_d, q) = queue();
        let a = q.enqueue(LESSON, TranscriptFormat::TurnsText, Some("a"), None).unwrap();
        let b = q.enqueue(LESSON, TranscriptFormat::TurnsText, Some("b"), None).unwrap();
        assert_ne!(a.id, b.id);
        let first = q.worker_step(&rules(), &AnalyticsConfig::default(), Duration::ZERO).unwrap().unwrap();
        assert_eq!(first.id, a.id);
    }

    #[test]
    fn unreachable_adapter_fails_job() {
        let (_d, q) = queue();
        q.enqueue(LESSON, TranscriptFormat::TurnsText, None, None).unwrap();
        let engine = Engine::Adapter(crate::engine::HttpTransport::new(AdapterConfig {
            url: "http://127.0.0.1:9".into(),
            timeout_ms: 300,
            retries: 0,
        }));
        let job = q.worker_step(&engine, &AnalyticsConfig::default(), Duration::ZERO).unwrap().unwrap();
        assert_eq!(job.state, JobState::Failed);
        assert!(job.reason.unwrap().starts_with("AdapterUnreachable"));
    }

    #[test]
    fn recover_requeues_and_cleans() {
        let (_d, q) = queue();
        let job = q.enqueue(LESSON, TranscriptFormat::TurnsText, None, None).unwrap();
        let mut stuck = job.clone();
        stuck.state = JobState::Analyzing;
        q.store().write_job(&stuck).unwrap();
        std::fs::write(q.store().job_dir(&job.id).join(".feedback.json.tmp-9-9"), b"half").unwrap();
        std::fs::create_dir(q.store().job_dir("orphan")).unwrap();
        std::fs::create_dir(q.store().job_dir("broken")).unwrap();
        std::fs::write(q.store().artifact_path("broken", JOB_FILE), b"{").unwrap();

        let r = q.recover().unwrap();
        assert_eq!(r, RecoverReport { requeued: 1, corrupt: 1, orphans_removed: 1, temp_files_removed: 1 });
        assert_eq!(q.store().read_job(&job.id).unwrap().state, JobState::Queued);
        let broken = q.store().read_job("broken").unwrap();
        assert_eq!(broken.state, JobState::Failed);
        assert!(broken.reason.unwrap().starts_with("CorruptState"));
        assert_eq!(q.recover().unwrap(), RecoverReport::default());
    }

    #[test]
    fn reprocessing_is_byte_identical() {
        let (_d, q) = queue();
        let job = q.enqueue(LESSON, TranscriptFormat::TurnsText, None, None).unwrap();
        q.worker_step(&rules(), &AnalyticsConfig::default(), Duration::ZERO).unwrap();
        let first = (
            q.store().read_artifact(&job.id, PREDICTIONS_FILE).unwrap(),
            q.store().read_artifact(&job.id, FEEDBACK_FILE).unwrap(),
        );
        let mut again = q.store().read_job(&job.id).unwrap();
        again.state = JobState::Classifying;
        q.store().write_job(&again).unwrap();
        q.recover().unwrap();
        q.worker_step(&rules(), &AnalyticsConfig::default(), Duration::ZERO).unwrap();
        let second = (
            q.store().read_artifact(&job.id, PREDICTIONS_FILE).unwrap(),
            q.store().read_artifact(&job.id, FEEDBACK_FILE).unwrap(),
        );
        assert_eq!(first, second);
    }
}
