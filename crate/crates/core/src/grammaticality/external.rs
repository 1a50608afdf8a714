//! External checker processes speaking line-delimited JSON.
//!
//! Request, one per line on the child's stdin:
//! `{"id":<int>,"tokens":[...]}`
//!
//! Response, one per line on its stdout, in any order:
//! `{"id":<int>,"errors":[{"start":i,"end":j,"category":"..."}]}`

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::sync::Mutex;
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::corpus::{Sentence, Token};
use crate::error::{Error, Result};

use super::{Detector, ErrorSpan};

pub const DEFAULT_CHECKER_TIMEOUT: Duration = Duration::from_secs(10);

/// Program and arguments used to start a checker.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckerCommand {
    pub program: String,
    pub args: Vec<String>,
}

impl CheckerCommand {
    pub fn new(program: impl Into<String>, args: Vec<String>) -> Self {
        CheckerCommand {
            program: program.into(),
            args,
        }
    }

    /// Splits a command line on whitespace. No shell quoting is interpreted.
    pub fn parse(command_line: &str) -> Result<Self> {
        let mut parts = command_line.split_whitespace().map(str::to_owned);
        let program = parts
            .next()
            .ok_or_else(|| Error::InvalidArgument("empty checker command".into()))?;
        Ok(CheckerCommand {
            program,
            args: parts.collect(),
        })
    }
}

#[derive(Serialize)]
struct Request<'a> {
    id: u64,
    tokens: &'a [Token],
}

#[derive(Deserialize)]
struct WireError {
    start: usize,
    end: usize,
    category: String,
}

#[derive(Deserialize)]
struct Response {
    id: u64,
    errors: Vec<WireError>,
}

/// One running checker process. A session is a serialized conversation;
/// it needs `&mut self` for every request.
pub struct CheckerSession {
    detector_id: String,
    child: Child,
    stdin: Option<ChildStdin>,
    lines: Receiver<std::io::Result<String>>,
    timeout: Duration,
    next_id: u64,
    broken: bool,
}

impl CheckerSession {
    pub fn spawn(detector_id: &str, command: &CheckerCommand, timeout: Duration) -> Result<Self> {
        let mut child = Command::new(&command.program)
            .args(&command.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| Error::detector(detector_id, format!("cannot start {:?}: {e}", command.program)))?;
        let stdin = child.stdin.take();
        let stdout = child.stdout.take().expect("stdout is piped");
        let (tx, rx) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        Ok(CheckerSession {
            detector_id: detector_id.to_owned(),
            child,
            stdin,
            lines: rx,
            timeout,
            next_id: 0,
            broken: false,
        })
    }

    fn fail(&mut self, message: impl Into<String>) -> Error {
        self.broken = true;
        Error::detector(&self.detector_id, message)
    }

    /// Sends every sentence, then collects responses matched by id.
    pub fn check(&mut self, sentences: &[&Sentence]) -> Result<Vec<Vec<ErrorSpan>>> {
        if self.broken {
            return Err(Error::detector(
                &self.detector_id,
                "session is unusable after an earlier failure",
            ));
        }
        let first_id = self.next_id;
        self.next_id += sentences.len() as u64;

        let mut payload = String::new();
        for (k, sentence) in sentences.iter().enumerate() {
            let request = Request {
                id: first_id + k as u64,
                tokens: sentence.tokens(),
            };
            payload.push_str(&serde_json::to_string(&request)?);
            payload.push('\n');
        }
        let write_result = match self.stdin.as_mut() {
            Some(stdin) => stdin.write_all(payload.as_bytes()).and_then(|_| stdin.flush()),
            None => Err(std::io::Error::other("stdin closed")),
        };
        if let Err(e) = write_result {
            return Err(self.fail(format!("cannot write request: {e}")));
        }

        let mut pending: HashMap<u64, usize> = (0..sentences.len()).map(|k| (first_id + k as u64, k)).collect();
        let mut results = vec![Vec::new(); sentences.len()];
        while !pending.is_empty() {
            let line = match self.lines.recv_timeout(self.timeout) {
                Ok(Ok(line)) => line,
                Ok(Err(e)) => return Err(self.fail(format!("cannot read response: {e}"))),
                Err(RecvTimeoutError::Timeout) => {
                    return Err(self.fail(format!("no response within {} ms", self.timeout.as_millis())))
                }
                Err(RecvTimeoutError::Disconnected) => {
                    let status = self.child.try_wait().ok().flatten();
                    return Err(self.fail(match status {
                        Some(status) => format!("checker process exited ({status})"),
                        None => "checker closed its output".to_owned(),
                    }));
                }
            };
            if line.trim().is_empty() {
                continue;
            }
            let response: Response = match serde_json::from_str(&line) {
                Ok(r) => r,
                Err(e) => return Err(self.fail(format!("malformed response line {line:?}: {e}"))),
            };
            let Some(k) = pending.remove(&response.id) else {
                return Err(self.fail(format!("response for unexpected id {}", response.id)));
            };
            let len = sentences[k].len();
            let mut spans = Vec::with_capacity(response.errors.len());
            for e in response.errors {
                if e.start > e.end || e.end > len {
                    return Err(self.fail(format!(
                        "span ({},{}) out of bounds for sentence of length {len}",
                        e.start, e.end
                    )));
                }
                spans.push(ErrorSpan::new(e.start, e.end, e.category, &self.detector_id));
            }
            results[k] = spans;
        }
        Ok(results)
    }
}

impl Drop for CheckerSession {
    fn drop(&mut self) {
        drop(self.stdin.take());
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}

/// A detector backed by a pool of checker sessions. Each call takes
/// exclusive use of one session.
pub struct ExternalChecker {
    id: String,
    sessions: Vec<Mutex<CheckerSession>>,
    next: AtomicUsize,
}

impl ExternalChecker {
    pub fn spawn(id: impl Into<String>, command: &CheckerCommand, pool_size: usize, timeout: Duration) -> Result<Self> {
        let id = id.into();
        if pool_size == 0 {
            return Err(Error::InvalidArgument("checker pool size must be at least 1".into()));
        }
        let sessions = (0..pool_size)
            .map(|_| CheckerSession::spawn(&id, command, timeout).map(Mutex::new))
            .collect::<Result<Vec<_>>>()?;
        Ok(ExternalChecker {
            id,
            sessions,
            next: AtomicUsize::new(0),
        })
    }

    fn with_session<T>(&self, f: impl FnOnce(&mut CheckerSession) -> Result<T>) -> Result<T> {
        let n = self.sessions.len();
        let start = self.next.fetch_add(1, Ordering::Relaxed);
        for k in 0..n {
            if let Ok(mut session) = self.sessions[(start + k) % n].try_lock() {
                return f(&mut session);
            }
        }
        let mut session = self.sessions[start % n]
            .lock()
            .map_err(|_| Error::detector(&self.id, "session lock poisoned"))?;
        f(&mut session)
    }
}

impl Detector for ExternalChecker {
    fn id(&self) -> &str {
        &self.id
    }

    fn detect(&self, sentence: &Sentence) -> Result<Vec<ErrorSpan>> {
        let mut out = self.with_session(|s| s.check(&[sentence]))?;
        Ok(out.pop().unwrap_or_default())
    }

    fn detect_batch(&self, sentences: &[&Sentence]) -> Result<Vec<Vec<ErrorSpan>>> {
        self.with_session(|s| s.check(sentences))
    }
}
