//! Client for verification worker processes speaking the line-delimited
//! JSON protocol over stdin/stdout.

use std::collections::HashMap;
use std::io::{BufRead, BufReader, Write};
use std::path::PathBuf;
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::sync::mpsc::{self, RecvTimeoutError, Sender};
use std::sync::{Arc, Condvar, Mutex};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::wire::{CheckRequest, WireResponse};
use super::{VerifierBackend, VerifierError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorkerCommand {
    pub program: String,
    #[serde(default)]
    pub args: Vec<String>,
    #[serde(default)]
    pub cwd: Option<PathBuf>,
}

impl WorkerCommand {
    pub fn new(program: impl Into<String>, args: impl IntoIterator<Item = impl Into<String>>) -> Self {
        Self { program: program.into(), args: args.into_iter().map(Into::into).collect(), cwd: None }
    }
}

type Pending = Arc<Mutex<HashMap<u64, Sender<WireResponse>>>>;

/// One live worker process. Requests are matched to responses by id, so
/// several threads may have requests in flight on the same connection.
pub struct WorkerConnection {
    child: Mutex<Child>,
    stdin: Mutex<ChildStdin>,
    pending: Pending,
    alive: Arc<AtomicBool>,
    next_id: AtomicU64,
}

impl WorkerConnection {
    pub fn spawn(cmd: &WorkerCommand) -> Result<Self, VerifierError> {
        let mut command = Command::new(&cmd.program);
        command.args(&cmd.args).stdin(Stdio::piped()).stdout(Stdio::piped()).stderr(Stdio::inherit());
        if let Some(dir) = &cmd.cwd {
            command.current_dir(dir);
        }
        let mut child =
            command.spawn().map_err(|e| VerifierError::BackendUnavailable(format!("spawning {}: {e}", cmd.program)))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let pending: Pending = Arc::default();
        let alive = Arc::new(AtomicBool::new(true));
        {
            let pending = Arc::clone(&pending);
            let alive = Arc::clone(&alive);
            std::thread::spawn(move || {
                for line in BufReader::new(stdout).lines() {
                    let Ok(line) = line else { break };
                    match serde_json::from_str::<WireResponse>(&line) {
                        Ok(resp) => match resp.id {
                            Some(id) => {
                                if let Some(tx) = pending.lock().unwrap().remove(&id) {
                                    let _ = tx.send(resp);
                                }
                            }
                            None => tracing::warn!(line, "worker response without id"),
                        },
                        Err(e) => tracing::warn!(%e, line, "unparseable worker output"),
                    }
                }
                alive.store(false, Ordering::SeqCst);
                // Dropping the senders wakes every waiter with a disconnect.
                pending.lock().unwrap().clear();
            });
        }
        Ok(Self { child: Mutex::new(child), stdin: Mutex::new(stdin), pending, alive, next_id: AtomicU64::new(1) })
    }

    pub fn is_alive(&self) -> bool {
        self.alive.load(Ordering::SeqCst)
    }

    pub fn request(&self, request: &CheckRequest, timeout: Duration) -> Result<WireResponse, VerifierError> {
        if !self.is_alive() {
            return Err(VerifierError::BackendUnavailable("worker exited".into()));
        }
        let id = self.next_id.fetch_add(1, Ordering::SeqCst);
        let (tx, rx) = mpsc::channel();
        self.pending.lock().unwrap().insert(id, tx);
        let mut line = serde_json::to_string(&request.to_wire(id)).expect("request serializes");
        line.push('\n');
        let written = {
            let mut stdin = self.stdin.lock().unwrap();
            stdin.write_all(line.as_bytes()).and_then(|_| stdin.flush())
        };
        if let Err(e) = written {
            self.pending.lock().unwrap().remove(&id);
            return Err(VerifierError::BackendUnavailable(format!("writing to worker: {e}")));
        }
        match rx.recv_timeout(timeout) {
            Ok(resp) => Ok(resp),
            Err(RecvTimeoutError::Timeout) => {
                self.pending.lock().unwrap().remove(&id);
                Err(VerifierError::Timeout(timeout))
            }
            Err(RecvTimeoutError::Disconnected) => Err(VerifierError::BackendUnavailable("worker exited".into())),
        }
    }

    fn kill(&self) {
        let mut child = self.child.lock().unwrap();
        let _ = child.kill();
        let _ = child.wait();
    }
}

impl Drop for WorkerConnection {
    fn drop(&mut self) {
        self.kill();
    }
}

/// Fixed-size pool of worker processes. Each connection serves one request
/// at a time; callers block while every connection is busy. Dead or
/// timed-out workers are discarded and respawned lazily.
pub struct WorkerPool {
    cmd: WorkerCommand,
    size: usize,
    state: Mutex<PoolState>,
    available: Condvar,
}

struct PoolState {
    idle: Vec<WorkerConnection>,
    live: usize,
}

impl WorkerPool {
    pub fn new(cmd: WorkerCommand, size: usize) -> Self {
        Self {
            cmd,
            size: size.max(1),
            state: Mutex::new(PoolState { idle: Vec::new(), live: 0 }),
            available: Condvar::new(),
        }
    }

    fn checkout(&self) -> Result<WorkerConnection, VerifierError> {
        let mut state = self.state.lock().unwrap();
        loop {
            while let Some(conn) = state.idle.pop() {
                if conn.is_alive() {
                    return Ok(conn);
                }
                state.live -= 1;
            }
            if state.live < self.size {
                state.live += 1;
                drop(state);
                return WorkerConnection::spawn(&self.cmd).inspect_err(|_| {
                    self.state.lock().unwrap().live -= 1;
                    self.available.notify_one();
                });
            }
            state = self.available.wait(state).unwrap();
        }
    }

    fn checkin(&self, conn: WorkerConnection, healthy: bool) {
        let mut state = self.state.lock().unwrap();
        if healthy && conn.is_alive() {
            state.idle.push(conn);
        } else {
            state.live -= 1;
            drop(state);
            drop(conn);
        }
        self.available.notify_one();
    }
}

impl VerifierBackend for WorkerPool {
    fn check(&self, request: &CheckRequest, timeout: Duration) -> Result<WireResponse, VerifierError> {
        let conn = self.checkout()?;
        let result = conn.request(request, timeout);
        // A timed-out worker may still be elaborating; replace it.
        let healthy = result.is_ok();
        self.checkin(conn, healthy);
        result
    }
}
