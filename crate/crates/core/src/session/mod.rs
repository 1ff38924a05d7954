//! One learner's conversation with one world: classification, dialog,
//! execution and model calls folded into a single ordered event log.

mod config;
pub mod render;
mod transcript;

use std::collections::hash_map::RandomState;
use std::hash::{BuildHasher, Hasher};
use std::sync::Arc;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use crate::assistant::{BackendError, ChatTurn, GenerationParams, ModelBackend, PromptKind};
use crate::dialog::{advance, offered_options, resume, DialogDeps, DialogState, EngineAction, Features, UserEvent};
use crate::primitives::PrimitiveRegistry;
use crate::runtime::{execute, ExecStatus, ViewDelta, ViewModel, World, WorldBounds};

pub use config::{BackendSpec, ConfigError, SessionConfig, MOCK_BACKEND};
pub use transcript::{
    projection, read_jsonl, replay, replay_with, write_jsonl, Divergence, ReplayError, ReplayReport, TranscriptError,
    TranscriptWriter,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Origin {
    User,
    Engine,
}

/// Settings a transcript needs to be replayed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigRecord {
    pub seed: u64,
    pub world: WorldBounds,
    pub features: Features,
    pub backend: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "data", rename_all = "kebab-case")]
pub enum Payload {
    Config(ConfigRecord),
    User(UserEvent),
    Action(EngineAction),
    /// One line printed by the running program.
    Output(String),
    Executed(ExecStatus),
    ViewDelta(ViewDelta),
    /// A model call finished; `ok` is false when it failed.
    BackendReplied {
        kind: PromptKind,
        ok: bool,
    },
    /// A model call was abandoned because the user moved on.
    BackendCancelled {
        kind: PromptKind,
    },
}

impl Payload {
    pub fn origin(&self) -> Origin {
        match self {
            Payload::User(_) => Origin::User,
            _ => Origin::Engine,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionEvent {
    pub seq: u64,
    pub timestamp_ms: u64,
    pub origin: Origin,
    #[serde(flatten)]
    pub payload: Payload,
}

/// A model call waiting to be run by whoever drives the session.
#[derive(Debug, Clone, PartialEq)]
pub struct BackendRequest {
    pub call_id: u64,
    pub kind: PromptKind,
    pub turns: Vec<ChatTurn>,
}

struct InFlight {
    call_id: u64,
    call: crate::dialog::PendingCall,
}

pub struct Session {
    id: String,
    record: ConfigRecord,
    world: World,
    dialog: DialogState,
    transcript: Vec<SessionEvent>,
    backend: Arc<dyn ModelBackend>,
    in_flight: Option<InFlight>,
    next_call_id: u64,
    view: ViewModel,
}

/// Builds a session with the backend the config selects.
pub fn create_session(config: &SessionConfig) -> Result<Session, ConfigError> {
    let backend = config.build_backend()?;
    Session::with_backend(config, backend)
}

fn random_u64() -> u64 {
    let mut h = RandomState::new().build_hasher();
    h.write_u128(
        SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_nanos())
            .unwrap_or(0),
    );
    h.finish()
}

fn now_ms() -> u64 {
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_millis() as u64)
        .unwrap_or(0)
}

impl Session {
    /// Builds a session around an already constructed backend. The config's
    /// backend name is only recorded.
    pub fn with_backend(config: &SessionConfig, backend: Arc<dyn ModelBackend>) -> Result<Session, ConfigError> {
        let seed = config.seed.unwrap_or_else(random_u64);
        let world = World::new(config.world, seed)?;
        let view = world.snapshot();
        let record = ConfigRecord {
            seed,
            world: config.world,
            features: config.features,
            backend: config.backend.clone(),
        };
        let mut session = Session {
            id: format!("{:016x}{:016x}", random_u64(), random_u64()),
            record: record.clone(),
            world,
            dialog: DialogState::Idle,
            transcript: Vec::new(),
            backend,
            in_flight: None,
            next_call_id: 1,
            view,
        };
        let mut first = Vec::new();
        session.push(&mut first, Payload::Config(record));
        Ok(session)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn seed(&self) -> u64 {
        self.record.seed
    }

    pub fn config_record(&self) -> &ConfigRecord {
        &self.record
    }

    pub fn features(&self) -> Features {
        self.record.features
    }

    pub fn world(&self) -> &World {
        &self.world
    }

    pub fn dialog(&self) -> &DialogState {
        &self.dialog
    }

    pub fn transcript(&self) -> &[SessionEvent] {
        &self.transcript
    }

    /// The view as of the last executed command.
    pub fn view(&self) -> &ViewModel {
        &self.view
    }

    pub fn backend(&self) -> Arc<dyn ModelBackend> {
        Arc::clone(&self.backend)
    }

    pub fn offered_options(&self) -> Vec<String> {
        offered_options(&self.dialog, self.record.features)
    }

    pub fn in_flight(&self) -> Option<BackendRequest> {
        self.in_flight.as_ref().map(|f| BackendRequest {
            call_id: f.call_id,
            kind: f.call.kind,
            turns: f.call.turns.clone(),
        })
    }

    fn deps(&self) -> DialogDeps<'static> {
        DialogDeps::builtin(self.record.features)
    }

    fn push(&mut self, out: &mut Vec<SessionEvent>, payload: Payload) {
        let event = SessionEvent {
            seq: self.transcript.len() as u64 + 1,
            timestamp_ms: now_ms(),
            origin: payload.origin(),
            payload,
        };
        self.transcript.push(event.clone());
        out.push(event);
    }

    /// Records `event`, advances the dialog and runs any code it produced.
    /// If the dialog needs the model, the call is left in flight; see
    /// [`Session::in_flight`] and [`Session::complete`]. A call already in
    /// flight is abandoned first.
    pub fn handle(&mut self, event: UserEvent) -> Vec<SessionEvent> {
        let mut out = Vec::new();
        self.push(&mut out, Payload::User(event.clone()));
        if let Some(f) = self.in_flight.take() {
            log::debug!("abandoning {:?} call {}", f.call.kind, f.call_id);
            self.dialog = f.call.fallback;
            self.push(&mut out, Payload::BackendCancelled { kind: f.call.kind });
        }
        let state = std::mem::replace(&mut self.dialog, DialogState::Idle);
        let t = advance(state, &event, self.deps());
        self.dialog = t.state;
        self.perform(&mut out, t.actions);
        if let Some(call) = t.pending {
            self.in_flight = Some(InFlight {
                call_id: self.next_call_id,
                call,
            });
            self.next_call_id += 1;
        }
        out
    }

    /// Delivers the answer to call `call_id`. Answers to abandoned calls are
    /// dropped and produce no events.
    pub fn complete(&mut self, call_id: u64, reply: Result<String, BackendError>) -> Vec<SessionEvent> {
        let mut out = Vec::new();
        let Some(f) = self.in_flight.take_if(|f| f.call_id == call_id) else {
            log::debug!("dropping reply to stale call {call_id}");
            return out;
        };
        if let Err(e) = &reply {
            log::warn!("{:?} call failed: {e}", f.call.kind);
        }
        self.push(
            &mut out,
            Payload::BackendReplied {
                kind: f.call.kind,
                ok: reply.is_ok(),
            },
        );
        let state = std::mem::replace(&mut self.dialog, DialogState::Idle);
        let t = resume(state, &f.call, reply, self.deps());
        self.dialog = t.state;
        self.perform(&mut out, t.actions);
        if let Some(call) = t.pending {
            self.in_flight = Some(InFlight {
                call_id: self.next_call_id,
                call,
            });
            self.next_call_id += 1;
        }
        out
    }

    /// [`Session::handle`], then runs any model call on this thread.
    pub fn handle_blocking(&mut self, event: UserEvent) -> Vec<SessionEvent> {
        let mut out = self.handle(event);
        while let Some(req) = self.in_flight() {
            let reply = self.backend.complete(&req.turns, &GenerationParams::default());
            out.extend(self.complete(req.call_id, reply));
        }
        out
    }

    fn perform(&mut self, out: &mut Vec<SessionEvent>, actions: Vec<EngineAction>) {
        for action in actions {
            let ast = match &action {
                EngineAction::Execute { ast, .. } => Some(ast.clone()),
                _ => None,
            };
            self.push(out, Payload::Action(action));
            if let Some(ast) = ast {
                self.run(out, &ast);
            }
        }
    }

    fn run(&mut self, out: &mut Vec<SessionEvent>, ast: &crate::ast::Ast) {
        let outcome = execute(ast, &mut self.world, PrimitiveRegistry::builtin());
        for line in outcome.output_lines {
            self.push(out, Payload::Output(line));
        }
        self.push(out, Payload::Executed(outcome.status));
        let next = self.world.snapshot();
        let delta = self.view.diff(&next);
        self.view = next;
        if !delta.is_empty() {
            self.push(out, Payload::ViewDelta(delta));
        }
    }
}
