use std::sync::{Condvar, Mutex};
use std::time::Duration;

use super::{CompletionParams, LanguageModel, LlmError};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RetryPolicy {
    /// Sleep before each retry; its length is the retry count.
    pub backoff: Vec<Duration>,
}

impl Default for RetryPolicy {
    fn default() -> Self {
        Self { backoff: [1, 4, 16].map(Duration::from_secs).to_vec() }
    }
}

impl RetryPolicy {
    pub fn none() -> Self {
        Self { backoff: Vec::new() }
    }

    /// Same retry count as the default, without sleeping. For tests.
    pub fn immediate() -> Self {
        Self { backoff: vec![Duration::ZERO; 3] }
    }
}

/// Wraps a model with retry on rate limits and network failures, and caps
/// the number of requests in flight across all callers.
///
/// One `complete` here is one logical call no matter how many retries it
/// takes; the caller charges the ledger once.
pub struct RetryingModel<M> {
    inner: M,
    policy: RetryPolicy,
    max_in_flight: usize,
    in_flight: Mutex<usize>,
    slot_freed: Condvar,
}

impl<M: LanguageModel> RetryingModel<M> {
    pub fn new(inner: M, policy: RetryPolicy, max_in_flight: usize) -> Self {
        Self {
            inner,
            policy,
            max_in_flight: max_in_flight.max(1),
            in_flight: Mutex::new(0),
            slot_freed: Condvar::new(),
        }
    }

    pub fn inner(&self) -> &M {
        &self.inner
    }

    fn acquire(&self) {
        let mut n = self.in_flight.lock().unwrap();
        while *n >= self.max_in_flight {
            n = self.slot_freed.wait(n).unwrap();
        }
        *n += 1;
    }

    fn release(&self) {
        *self.in_flight.lock().unwrap() -= 1;
        self.slot_freed.notify_one();
    }
}

impl<M: LanguageModel> LanguageModel for RetryingModel<M> {
    fn complete(&self, prompt: &str, params: &CompletionParams) -> Result<String, LlmError> {
        let mut delays = self.policy.backoff.iter();
        loop {
            self.acquire();
            let result = self.inner.complete(prompt, params);
            self.release();
            match result {
                Err(e) if e.is_retryable() => match delays.next() {
                    Some(d) => {
                        tracing::warn!(error = %e, delay_ms = d.as_millis() as u64, "retrying completion");
                        std::thread::sleep(*d);
                    }
                    None => return Err(e),
                },
                other => return other,
            }
        }
    }
}
