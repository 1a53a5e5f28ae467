use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use serde_json::Value;

/// One line of a transcript: `{"ts","phase","event","payload"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub ts: u64,
    pub phase: String,
    pub event: String,
    pub payload: Value,
}

/// Ordered record of every prompt, completion, and verifier result.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub events: Vec<Event>,
}

impl Transcript {
    pub fn push(&mut self, ts: u64, phase: &str, event: &str, payload: Value) {
        self.events.push(Event { ts, phase: phase.to_string(), event: event.to_string(), payload });
    }

    pub fn extend(&mut self, other: Transcript) {
        self.events.extend(other.events);
    }

    pub fn count(&self, event: &str) -> usize {
        self.events.iter().filter(|e| e.event == event).count()
    }

    pub fn iter_event<'a>(&'a self, event: &'a str) -> impl Iterator<Item = &'a Event> + 'a {
        self.events.iter().filter(move |e| e.event == event)
    }

    pub fn write_jsonl(&self, mut out: impl Write) -> std::io::Result<()> {
        for e in &self.events {
            serde_json::to_writer(&mut out, e)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }

    pub fn read_jsonl(reader: impl BufRead) -> std::io::Result<Self> {
        let mut events = Vec::new();
        for line in reader.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            events.push(serde_json::from_str(&line).map_err(std::io::Error::other)?);
        }
        Ok(Self { events })
    }
}
