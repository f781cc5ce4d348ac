//! File-system job store.
//!
//! ```text
//! <root>/jobs/<id>/transcript.json
//!                 /predictions.csv
//!                 /feedback.json
//!                 /report.html
//!                 /job.json
//! ```
//!
//! Every file is written to a dot-prefixed temporary name in the same
//! directory and renamed into place, so readers see either the old file or
//! the complete new one.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const TRANSCRIPT_FILE: &str = "transcript.json";
pub const PREDICTIONS_FILE: &str = "predictions.csv";
pub const FEEDBACK_FILE: &str = "feedback.json";
pub const REPORT_FILE: &str = "report.html";
pub const JOB_FILE: &str = "job.json";

const TMP_MARKER: &str = ".tmp-";

#[derive(Debug, Error)]
pub enum StoreError {
    #[error("io error on {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("job {0} not found")]
    NotFound(String),
    #[error("corrupt job record {id}: {reason}")]
    Corrupt { id: String, reason: String },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> StoreError + '_ {
    move |source| StoreError::Io { path: path.to_path_buf(), source }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum JobState {
    Queued,
    Classifying,
    Analyzing,
    Done,
    Failed,
}

impl JobState {
    fn rank(self) -> u8 {
        match self {
            JobState::Queued => 0,
            JobState::Classifying => 1,
            JobState::Analyzing => 2,
            JobState::Done => 3,
            JobState::Failed => 4,
        }
    }

    pub fn is_terminal(self) -> bool {
        matches!(self, JobState::Done | JobState::Failed)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            JobState::Queued => "queued",
            JobState::Classifying => "classifying",
            JobState::Analyzing => "analyzing",
            JobState::Done => "done",
            JobState::Failed => "failed",
        }
    }

    /// Forward moves only, plus failure from any non-terminal state.
    pub fn can_move_to(self, next: JobState) -> bool {
        if self.is_terminal() {
            return false;
        }
        next == JobState::Failed || next.rank() == self.rank() + 1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Job {
    pub id: String,
    /// Submission order, strictly increasing.
    pub seq: u64,
    pub lesson_id: String,
    #[serde(default)]
    pub teacher_id: Option<String>,
    pub state: JobState,
    /// Set when `state` is failed.
    #[serde(default)]
    pub reason: Option<String>,
    pub submitted_at: String,
    #[serde(default)]
    pub finished_at: Option<String>,
}

#[derive(Debug, Clone)]
pub struct Store {
    root: PathBuf,
}

static TMP_COUNTER: AtomicU64 = AtomicU64::new(0);

/// Writes `bytes` to `path` through a temporary file and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), StoreError> {
    let dir = path.parent().unwrap_or(Path::new("."));
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("file");
    let tmp = dir.join(format!(
        ".{name}{TMP_MARKER}{}-{}",
        std::process::id(),
        TMP_COUNTER.fetch_add(1, Ordering::Relaxed)
    ));
    let mut f = fs::File::create(&tmp).map_err(io_err(&tmp))?;
    f.write_all(bytes).map_err(io_err(&tmp))?;
    f.sync_all().map_err(io_err(&tmp))?;
    drop(f);
    fs::rename(&tmp, path).map_err(io_err(path))
}

impl Store {
    pub fn open(root: impl Into<PathBuf>) -> Result<Self, StoreError> {
        let root = root.into();
        let jobs = root.join("jobs");
        fs::create_dir_all(&jobs).map_err(io_err(&jobs))?;
        Ok(Store { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn jobs_dir(&self) -> PathBuf {
        self.root.join("jobs")
    }

    pub fn job_dir(&self, id: &str) -> PathBuf {
        self.jobs_dir().join(id)
    }

    pub fn artifact_path(&self, id: &str, file: &str) -> PathBuf {
        self.job_dir(id).join(file)
    }

    /// Ids of every job directory, sorted.
    pub fn job_ids(&self) -> Result<Vec<String>, StoreError> {
        let dir = self.jobs_dir();
        let mut ids = Vec::new();
        for entry in fs::read_dir(&dir).map_err(io_err(&dir))? {
            let entry = entry.map_err(io_err(&dir))?;
            if entry.file_type().map(|t| t.is_dir()).unwrap_or(false) {
                if let Some(name) = entry.file_name().to_str() {
                    if !name.starts_with('.') {
                        ids.push(name.to_string());
                    }
                }
            }
        }
        ids.sort();
        Ok(ids)
    }

    pub fn read_job(&self, id: &str) -> Result<Job, StoreError> {
        let path = self.artifact_path(id, JOB_FILE);
        let bytes = match fs::read(&path) {
            Ok(b) => b,
            Err(e) if e.kind() == io::ErrorKind::NotFound => return Err(StoreError::NotFound(id.to_string())),
            Err(e) => return Err(io_err(&path)(e)),
        };
        serde_json::from_slice(&bytes).map_err(|e| StoreError::Corrupt {
            id: id.to_string(),
            reason: e.to_string(),
        })
    }

    pub fn write_job(&self, job: &Job) -> Result<(), StoreError> {
        let mut bytes = serde_json::to_vec_pretty(job).expect("job serializes");
        bytes.push(b'\n');
        write_atomic(&self.artifact_path(&job.id, JOB_FILE), &bytes)
    }

    pub fn write_artifact(&self, id: &str, file: &str, bytes: &[u8]) -> Result<(), StoreError> {
        write_atomic(&self.artifact_path(id, file), bytes)
    }

    pub fn read_artifact(&self, id: &str, file: &str) -> Result<Vec<u8>, StoreError> {
        let path = self.artifact_path(id, file);
        fs::read(&path).map_err(|e| {
            if e.kind() == io::ErrorKind::NotFound {
                StoreError::NotFound(format!("{id}/{file}"))
            } else {
                io_err(&path)(e)
            }
        })
    }

    /// Creates the directory of a new job. Fails if it already exists.
    pub fn create_job_dir(&self, id: &str) -> Result<bool, StoreError> {
        let dir = self.job_dir(id);
        match fs::create_dir(&dir) {
            Ok(()) => Ok(true),
            Err(e) if e.kind() == io::ErrorKind::AlreadyExists => Ok(false),
            Err(e) => Err(io_err(&dir)(e)),
        }
    }

    pub fn remove_job_dir(&self, id: &str) -> Result<(), StoreError> {
        let dir = self.job_dir(id);
        fs::remove_dir_all(&dir).map_err(io_err(&dir))
    }

    /// Deletes leftover temporary files in one job directory.
    pub fn remove_temp_files(&self, id: &str) -> Result<usize, StoreError> {
        let dir = self.job_dir(id);
        let mut removed = 0;
        for entry in fs::read_dir(&dir).map_err(io_err(&dir))? {
            let entry = entry.map_err(io_err(&dir))?;
            let name = entry.file_name();
            let name = name.to_string_lossy();
            if name.starts_with('.') && name.contains(TMP_MARKER) {
                fs::remove_file(entry.path()).map_err(io_err(&entry.path()))?;
                removed += 1;
            }
        }
        Ok(removed)
    }

    /// Names of the files in a job directory, sorted.
    pub fn list_files(&self, id: &str) -> Result<Vec<String>, StoreError> {
        let dir = self.job_dir(id);
        let mut names: Vec<String> = fs::read_dir(&dir)
            .map_err(io_err(&dir))?
            .filter_map(|e| e.ok())
            .map(|e| e.file_name().to_string_lossy().into_owned())
            .collect();
        names.sort();
        Ok(names)
    }
}
