use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, LineWriter, Write};
use std::path::Path;
use std::sync::Arc;

use thiserror::Error;

use super::{Payload, Session, SessionConfig, SessionEvent};
use crate::assistant::{BackendError, GenerationParams, MockBackend, ModelBackend};

#[derive(Debug, Error)]
pub enum TranscriptError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// One event per line, in order.
pub fn write_jsonl<W: Write>(events: &[SessionEvent], mut out: W) -> io::Result<()> {
    for e in events {
        serde_json::to_writer(&mut out, e)?;
        out.write_all(b"\n")?;
    }
    out.flush()
}

pub fn read_jsonl<R: BufRead>(input: R) -> Result<Vec<SessionEvent>, TranscriptError> {
    let mut events = Vec::new();
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let event = serde_json::from_str(&line).map_err(|e| TranscriptError::Parse {
            line: i + 1,
            message: e.to_string(),
        })?;
        events.push(event);
    }
    Ok(events)
}

/// Appends events to a transcript file as they happen.
pub struct TranscriptWriter {
    out: LineWriter<File>,
}

impl TranscriptWriter {
    pub fn append(path: &Path) -> io::Result<Self> {
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        Ok(TranscriptWriter {
            out: LineWriter::new(file),
        })
    }

    pub fn write(&mut self, events: &[SessionEvent]) -> io::Result<()> {
        write_jsonl(events, &mut self.out)
    }
}

/// The part of a transcript replay must reproduce: every event after the
/// config record, as JSON with the timestamp dropped.
pub fn projection(events: &[SessionEvent]) -> Vec<String> {
    events
        .iter()
        .filter(|e| !matches!(e.payload, Payload::Config(_)))
        .map(|e| {
            let mut v = serde_json::to_value(e).expect("session events always serialize");
            if let Some(map) = v.as_object_mut() {
                map.remove("timestamp_ms");
            }
            v.to_string()
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct Divergence {
    /// Position in the projection, counting from zero.
    pub index: usize,
    pub expected: Option<String>,
    pub actual: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplayReport {
    pub expected: Vec<String>,
    pub actual: Vec<String>,
    pub divergence: Option<Divergence>,
    /// The regenerated transcript, timestamps included.
    pub events: Vec<SessionEvent>,
}

impl ReplayReport {
    pub fn passed(&self) -> bool {
        self.divergence.is_none()
    }

    /// A few lines around the first difference.
    pub fn diff(&self) -> String {
        let Some(d) = &self.divergence else {
            return String::new();
        };
        let mut out = format!("first difference at event {}:\n", d.index + 1);
        if d.index > 0 {
            out.push_str(&format!("  same     {}\n", self.expected[d.index - 1]));
        }
        out.push_str(&format!(
            "- expected {}\n",
            d.expected.as_deref().unwrap_or("<end of transcript>")
        ));
        out.push_str(&format!(
            "+ actual   {}\n",
            d.actual.as_deref().unwrap_or("<end of transcript>")
        ));
        out
    }
}

#[derive(Debug, Error)]
pub enum ReplayError {
    #[error("transcript does not start with a config record")]
    MissingConfig,
    #[error("transcript replies to a model call that was never made (event {0})")]
    UnexpectedReply(u64),
    #[error(transparent)]
    Config(#[from] super::ConfigError),
}

/// Replays `recorded` with the built-in mock backend.
pub fn replay(recorded: &[SessionEvent]) -> Result<ReplayReport, ReplayError> {
    replay_with(recorded, Arc::new(MockBackend::builtin()))
}

/// Feeds the recorded user events to a fresh session and compares what comes
/// out. Model calls are answered by `backend` wherever the recording shows a
/// reply; recorded failures are replayed as failures.
pub fn replay_with(recorded: &[SessionEvent], backend: Arc<dyn ModelBackend>) -> Result<ReplayReport, ReplayError> {
    let Some(Payload::Config(record)) = recorded.first().map(|e| &e.payload) else {
        return Err(ReplayError::MissingConfig);
    };
    let config = SessionConfig {
        seed: Some(record.seed),
        backend: record.backend.clone(),
        world: record.world,
        features: record.features,
        ..SessionConfig::default()
    };
    let mut session = Session::with_backend(&config, backend)?;
    for e in &recorded[1..] {
        match &e.payload {
            Payload::User(event) => {
                session.handle(event.clone());
            }
            Payload::BackendReplied { ok, .. } => {
                let Some(req) = session.in_flight() else {
                    return Err(ReplayError::UnexpectedReply(e.seq));
                };
                let reply = if *ok {
                    session.backend().complete(&req.turns, &GenerationParams::default())
                } else {
                    Err(BackendError::Transport("failure recorded in transcript".into()))
                };
                session.complete(req.call_id, reply);
            }
            _ => {}
        }
    }
    let expected = projection(recorded);
    let actual = projection(session.transcript());
    let divergence = (0..expected.len().max(actual.len()))
        .find(|&i| expected.get(i) != actual.get(i))
        .map(|index| Divergence {
            index,
            expected: expected.get(index).cloned(),
            actual: actual.get(index).cloned(),
        });
    Ok(ReplayReport {
        expected,
        actual,
        divergence,
        events: session.transcript().to_vec(),
    })
}
