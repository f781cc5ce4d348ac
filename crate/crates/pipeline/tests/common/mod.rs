#![allow(dead_code)]

use std::io::{BufRead, BufReader};
use std::path::Path;
use std::process::{Child, Command, Stdio};
use std::thread;
use std::time::{Duration, Instant};

use serde_json::Value;
use talkmoves::ingest::{Speaker, Transcript, Utterance};

pub const BIN: &str = env!("CARGO_BIN_EXE_talkmoves");

/// A `talkmoves serve` child process, killed on drop.
pub struct Server {
    child: Child,
    pub base: String,
}

impl Server {
    pub fn start(store: &Path, extra: &[&str]) -> Server {
        let mut child = Command::new(BIN)
            .args(["serve", "--listen", "127.0.0.1:0", "--store"])
            .arg(store)
            .args(["--classifier", "rule"])
            .args(extra)
            .env("TALKMOVES_POLL_MS", "20")
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .expect("spawn server");
        let stdout = child.stdout.take().expect("stdout");
        let mut line = String::new();
        BufReader::new(stdout).read_line(&mut line).expect("read banner");
        let addr = line
            .trim()
            .strip_prefix("listening on ")
            .unwrap_or_else(|| panic!("unexpected banner {line:?}"))
            .to_string();
        Server { child, base: format!("http://{addr}") }
    }

    pub fn kill(mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

impl Drop for Server {
    fn drop(&mut self) {
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

fn agent() -> ureq::Agent {
    ureq::Agent::config_builder()
        .http_status_as_error(false)
        .timeout_global(Some(Duration::from_secs(10)))
        .build()
        .new_agent()
}

pub fn get(url: &str) -> (u16, String) {
    let mut resp = agent().get(url).call().expect("GET");
    let status = resp.status().as_u16();
    (status, resp.body_mut().read_to_string().expect("body"))
}

pub fn post(url: &str, body: &[u8]) -> (u16, String) {
    let mut resp = agent().post(url).send(body).expect("POST");
    let status = resp.status().as_u16();
    (status, resp.body_mut().read_to_string().expect("body"))
}

pub fn json(text: &str) -> Value {
    serde_json::from_str(text).unwrap_or_else(|e| panic!("{e}: {text}"))
}

/// Submits a transcript and returns the job id.
pub fn submit(base: &str, transcript: &Transcript, teacher: &str) -> String {
    let url = format!("{base}/lessons?format=json&teacher={teacher}&lesson_id={}", transcript.lesson_id);
    let (status, body) = post(&url, &transcript.to_json());
    assert_eq!(status, 202, "{body}");
    json(&body)["job_id"].as_str().expect("job_id").to_string()
}

pub fn state(base: &str, id: &str) -> String {
    let (status, body) = get(&format!("{base}/lessons/{id}/status"));
    assert_eq!(status, 200, "{body}");
    json(&body)["state"].as_str().expect("state").to_string()
}

/// Polls until the job reaches a terminal state.
pub fn wait_done(base: &str, id: &str, limit: Duration) -> String {
    let start = Instant::now();
    loop {
        let s = state(base, id);
        if s == "done" || s == "failed" || start.elapsed() > limit {
            return s;
        }
        thread::sleep(Duration::from_millis(25));
    }
}

pub fn lesson(id: &str, n: usize) -> Transcript {
    let mut utts = Vec::new();
    let mut t = 0;
    for i in 0..n {
        utts.push(Utterance::timed(Speaker::Teacher, t, t + 2000, format!("Why do you think line {i} works? Can you explain?")));
        utts.push(Utterance::timed(Speaker::Student, t + 5000, t + 6000, "Because the slope is two."));
        utts.push(Utterance::timed(Speaker::Teacher, t + 6500, t + 8000, "So you are saying the slope is two."));
        t += 9000;
    }
    Transcript::new(id, utts).expect("valid lesson")
}
