//! Conversation state machine.
//!
//! [`advance`] is a pure transition function. When a transition needs the
//! language model it returns a [`PendingCall`]; the caller runs it and feeds
//! the reply (or the failure) back through [`resume`]. While a call is in
//! flight the caller may abandon it and restore [`PendingCall::fallback`].

mod schema;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

pub use schema::{schema_for, IntentCatalog, SchemaError, SlotSchema, SlotSpec, FALLBACK_INTENT};

use crate::assistant::{
    build_clarify_prompt, build_draft_prompt, build_edit_prompt, build_explain_prompt, build_fix_prompt,
    build_followup_prompt, extract_candidate, parse_intents, prose, slot_summary, BackendError, ChatTurn,
    CodeCandidate, PromptKind, Role,
};
use crate::ast::Ast;
use crate::classifier::{classify, InputClass};
use crate::diagnostic::Diagnostic;
use crate::primitives::{AgentContext, HelpEntry, PrimitiveRegistry};

pub const FIX_OPTION: &str = "Help me fix this code";
pub const EXPLAIN_OPTION: &str = "Explain the error";
pub const CLARIFY_OPTION: &str = "Let me clarify it";
pub const CHANGE_TOPIC_OPTION: &str = "Let's change a topic";

/// Most versions kept per topic; older ones are dropped first.
pub const MAX_VERSIONS: usize = 20;

pub const SEVERAL_NEEDS: &str =
    "It seems that you have several different needs. Let's do one at a time. Which one do you want to start with?";
pub const ONE_NEED: &str = "Is this what you want to work on?";
pub const MORE_INFO: &str = "Sure, I can help you with that. Can you please provide me with more information?";
pub const DRAFTING: &str = "I am working on a first version of the code.";
pub const DRAFT_DISCLAIMER: &str = "The code might have mistakes.";
pub const FIXING: &str = "Sure, I am working on the fixed code.";
pub const EDITING: &str = "Sure, I am working on the revised code.";
pub const FIX_DISCLAIMER: &str = "Note that the code can still have mistakes.";
pub const TRYING_TO_RUN: &str = "Trying to run the code...";
pub const PROMPT_HINT: &str = "Talk to the computer in NetLogo or natural languages";
pub const CHOOSE_OFFERED: &str = "Please choose one of the offered options.";
pub const TOPIC_CHANGED: &str = "OK. What would you like to do next?";
pub const CLARIFY_ASK: &str = "Sure. Please tell me more about what you want to do.";
pub const NOTHING_TO_RUN: &str = "There is no code to run yet.";
pub const NOTHING_TO_EDIT: &str = "There is no code to change yet.";
pub const BACKEND_FAILED: &str = "Sorry, I could not get an answer from the assistant. Please try again.";
pub const NO_CODE_RETURNED: &str = "Sorry, I could not write the code this time.";

pub fn must_fix_notice(errors: usize) -> String {
    format!(
        "Sorry, but we need to fix the {errors} errors in the code (marked with red squiggly lines) before continuing."
    )
}

pub fn cannot_understand(message: &str) -> String {
    format!("Sorry, I can't understand: {message}")
}

pub fn working_on(intent: &str) -> String {
    format!("Working on: {}", intent.to_lowercase())
}

/// Which assistant features are switched on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Features {
    pub assistant: bool,
    pub fix_option: bool,
    pub explain_option: bool,
}

impl Default for Features {
    fn default() -> Self {
        Features {
            assistant: true,
            fix_option: true,
            explain_option: true,
        }
    }
}

impl Features {
    pub fn without_assistant() -> Self {
        Features {
            assistant: false,
            ..Features::default()
        }
    }
}

#[derive(Clone, Copy)]
pub struct DialogDeps<'a> {
    pub registry: &'a PrimitiveRegistry,
    pub intents: &'a IntentCatalog,
    pub features: Features,
}

impl<'a> DialogDeps<'a> {
    pub fn builtin(features: Features) -> DialogDeps<'static> {
        DialogDeps {
            registry: PrimitiveRegistry::builtin(),
            intents: IntentCatalog::builtin(),
            features,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "kebab-case")]
pub enum DialogState {
    Idle,
    ErrorOptions {
        source: String,
        diagnostics: Vec<Diagnostic>,
    },
    Explaining {
        source: String,
        diagnostics: Vec<Diagnostic>,
        history: Vec<ChatTurn>,
    },
    Clarifying {
        message: String,
        intents: Vec<String>,
        history: Vec<ChatTurn>,
    },
    SlotFilling {
        schema: SlotSchema,
        filled: BTreeMap<String, String>,
    },
    DraftReview {
        topic: String,
        candidates: Vec<CodeCandidate>,
        cursor: usize,
    },
    /// Waiting for fixed or revised code based on `base`.
    Fixing {
        topic: String,
        candidates: Vec<CodeCandidate>,
        base: CodeCandidate,
    },
}

impl DialogState {
    pub fn name(&self) -> &'static str {
        match self {
            DialogState::Idle => "idle",
            DialogState::ErrorOptions { .. } => "error-options",
            DialogState::Explaining { .. } => "explaining",
            DialogState::Clarifying { .. } => "clarifying",
            DialogState::SlotFilling { .. } => "slot-filling",
            DialogState::DraftReview { .. } => "draft-review",
            DialogState::Fixing { .. } => "fixing",
        }
    }

    pub fn current_candidate(&self) -> Option<&CodeCandidate> {
        match self {
            DialogState::DraftReview { candidates, cursor, .. } => candidates.get(*cursor),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "event", content = "data", rename_all = "kebab-case")]
pub enum UserEvent {
    RawMessage(String),
    OptionSelected(String),
    RunRequested,
    AskEdit(String),
    NavigateVersion(i32),
    FollowUp(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlotQuestion {
    pub key: String,
    pub question: String,
    pub chips: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "action", content = "data", rename_all = "kebab-case")]
pub enum EngineAction {
    Say(String),
    OfferOptions(Vec<String>),
    AskSlots(Vec<SlotQuestion>),
    ShowDiagnostics {
        source: String,
        diagnostics: Vec<Diagnostic>,
    },
    PresentCandidate {
        candidate: CodeCandidate,
        /// 1-based position of the candidate among `total` versions.
        position: usize,
        total: usize,
    },
    /// Only the source goes over the wire; the tree is rebuilt from it.
    Execute {
        source: String,
        #[serde(skip)]
        ast: Ast,
    },
    CallBackend(PromptKind),
    ShowSummary(Vec<(String, String)>),
    ShowDisclaimer(String),
    ShowHelp(HelpEntry),
}

/// A language-model request the caller must run before the dialog can go on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PendingCall {
    pub kind: PromptKind,
    pub turns: Vec<ChatTurn>,
    /// State to restore if the call fails or is abandoned.
    pub fallback: DialogState,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub state: DialogState,
    pub actions: Vec<EngineAction>,
    pub pending: Option<PendingCall>,
}

impl Transition {
    fn stay(state: DialogState, actions: Vec<EngineAction>) -> Self {
        Transition {
            state,
            actions,
            pending: None,
        }
    }
}

/// Option labels the user may pick in `state`.
pub fn offered_options(state: &DialogState, features: Features) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    let fix = features.assistant && features.fix_option;
    match state {
        DialogState::Idle => {}
        DialogState::ErrorOptions { .. } => {
            if fix {
                out.push(FIX_OPTION.into());
            }
            if features.assistant && features.explain_option {
                out.push(EXPLAIN_OPTION.into());
            }
        }
        DialogState::Explaining { .. } => {
            if fix {
                out.push(FIX_OPTION.into());
            }
            out.push(CHANGE_TOPIC_OPTION.into());
        }
        DialogState::Clarifying { intents, .. } => {
            out.extend(intents.iter().cloned());
            out.push(CLARIFY_OPTION.into());
            out.push(CHANGE_TOPIC_OPTION.into());
        }
        DialogState::SlotFilling { schema, filled } => {
            if let Some(slot) = next_slot(schema, filled) {
                out.extend(slot.chips.iter().cloned());
            }
            out.push(CHANGE_TOPIC_OPTION.into());
        }
        DialogState::DraftReview { .. } => {
            if fix && state.current_candidate().is_some_and(|c| !c.diagnostics.is_empty()) {
                out.push(FIX_OPTION.into());
            }
            out.push(CHANGE_TOPIC_OPTION.into());
        }
        DialogState::Fixing { .. } => out.push(CHANGE_TOPIC_OPTION.into()),
    }
    out
}

fn next_slot<'s>(schema: &'s SlotSchema, filled: &BTreeMap<String, String>) -> Option<&'s SlotSpec> {
    schema.slots.iter().find(|s| !filled.contains_key(&s.key))
}

fn all_required_filled(schema: &SlotSchema, filled: &BTreeMap<String, String>) -> bool {
    schema
        .slots
        .iter()
        .filter(|s| s.required)
        .all(|s| filled.contains_key(&s.key))
}

fn offer(state: &DialogState, features: Features) -> Option<EngineAction> {
    let options = offered_options(state, features);
    (!options.is_empty()).then_some(EngineAction::OfferOptions(options))
}

fn push_version(candidates: &mut Vec<CodeCandidate>, candidate: CodeCandidate) {
    candidates.push(candidate);
    if candidates.len() > MAX_VERSIONS {
        candidates.remove(0);
    }
}

fn next_version(candidates: &[CodeCandidate]) -> u32 {
    candidates.last().map_or(1, |c| c.version + 1)
}

fn present(candidates: &[CodeCandidate], cursor: usize) -> EngineAction {
    EngineAction::PresentCandidate {
        candidate: candidates[cursor].clone(),
        position: cursor + 1,
        total: candidates.len(),
    }
}

pub fn advance(state: DialogState, event: &UserEvent, deps: DialogDeps<'_>) -> Transition {
    match event {
        UserEvent::RawMessage(text) => raw_message(state, text, deps),
        UserEvent::FollowUp(text) => match state {
            DialogState::Explaining { .. } => follow_up(state, text),
            other => raw_message(other, text, deps),
        },
        UserEvent::OptionSelected(label) => option_selected(state, label, deps),
        UserEvent::RunRequested => run_requested(state, deps),
        UserEvent::AskEdit(text) => ask_edit(state, text, deps),
        UserEvent::NavigateVersion(delta) => match state {
            DialogState::DraftReview {
                topic,
                candidates,
                cursor,
            } => {
                let last = candidates.len() as i64 - 1;
                let cursor = (cursor as i64 + i64::from(*delta)).clamp(0, last) as usize;
                let actions = vec![present(&candidates, cursor)];
                Transition::stay(
                    DialogState::DraftReview {
                        topic,
                        candidates,
                        cursor,
                    },
                    actions,
                )
            }
            other => Transition::stay(other, vec![EngineAction::Say(NOTHING_TO_EDIT.into())]),
        },
    }
}

fn raw_message(state: DialogState, text: &str, deps: DialogDeps<'_>) -> Transition {
    let text = text.trim();
    match classify(text, deps.registry, AgentContext::Observer) {
        InputClass::ValidCode(ast) => {
            let state = match state {
                DialogState::ErrorOptions { .. } => DialogState::Idle,
                other => other,
            };
            Transition::stay(
                state,
                vec![EngineAction::Execute {
                    source: text.to_owned(),
                    ast,
                }],
            )
        }
        InputClass::HelpQuery(name) => {
            let action = match deps.registry.help(&name) {
                Some(entry) => EngineAction::ShowHelp(entry),
                None => EngineAction::Say(format!("Sorry, I don't know anything named {name}.")),
            };
            Transition::stay(state, vec![action])
        }
        _ if matches!(state, DialogState::SlotFilling { .. }) && !text.is_empty() => fill_slot(state, text, deps),
        InputClass::BrokenCode(diagnostics) => broken_code(state, text, diagnostics, deps),
        InputClass::Natural(message) if message.is_empty() => {
            Transition::stay(state, vec![EngineAction::Say(PROMPT_HINT.into())])
        }
        InputClass::Natural(message) => {
            if !deps.features.assistant {
                let (_, diags) = crate::check_source(&message, deps.registry);
                let reason = diags.first().map_or(message.clone(), |d| d.message.clone());
                return Transition::stay(state, vec![EngineAction::Say(cannot_understand(&reason))]);
            }
            match state {
                DialogState::Explaining { .. } => follow_up(state, &message),
                DialogState::Clarifying { ref history, .. } => {
                    let history = history.clone();
                    clarify(state, &message, history)
                }
                other => clarify(other, &message, Vec::new()),
            }
        }
    }
}

fn broken_code(state: DialogState, source: &str, diagnostics: Vec<Diagnostic>, deps: DialogDeps<'_>) -> Transition {
    // Broken code leaves whatever conversation was going on.
    if !deps.features.assistant {
        let actions = diagnostics
            .iter()
            .map(|d| EngineAction::Say(cannot_understand(&d.message)))
            .collect();
        let state = match state {
            DialogState::ErrorOptions { .. } => DialogState::Idle,
            other => other,
        };
        return Transition::stay(state, actions);
    }
    let next = DialogState::ErrorOptions {
        source: source.to_owned(),
        diagnostics: diagnostics.clone(),
    };
    let mut actions = vec![EngineAction::ShowDiagnostics {
        source: source.to_owned(),
        diagnostics,
    }];
    let next = if offered_options(&next, deps.features).is_empty() {
        DialogState::Idle
    } else {
        actions.extend(offer(&next, deps.features));
        next
    };
    Transition::stay(next, actions)
}

fn clarify(fallback: DialogState, message: &str, history: Vec<ChatTurn>) -> Transition {
    let turns = build_clarify_prompt(message, &history).expect("message is not empty");
    Transition {
        state: DialogState::Clarifying {
            message: message.to_owned(),
            intents: Vec::new(),
            history,
        },
        actions: vec![EngineAction::CallBackend(PromptKind::Clarify)],
        pending: Some(PendingCall {
            kind: PromptKind::Clarify,
            turns,
            fallback,
        }),
    }
}

fn follow_up(state: DialogState, question: &str) -> Transition {
    let DialogState::Explaining { history, .. } = &state else {
        unreachable!("follow-up outside an explanation")
    };
    match build_followup_prompt(question, history) {
        Ok(turns) => Transition {
            actions: vec![EngineAction::CallBackend(PromptKind::FollowUp)],
            pending: Some(PendingCall {
                kind: PromptKind::FollowUp,
                turns,
                fallback: state.clone(),
            }),
            state,
        },
        Err(_) => Transition::stay(state, vec![EngineAction::Say(PROMPT_HINT.into())]),
    }
}

fn option_selected(state: DialogState, label: &str, deps: DialogDeps<'_>) -> Transition {
    let options = offered_options(&state, deps.features);
    if !options.iter().any(|o| o == label) {
        let mut actions = vec![EngineAction::Say(CHOOSE_OFFERED.into())];
        actions.extend(offer(&state, deps.features));
        return Transition::stay(state, actions);
    }
    if label == CHANGE_TOPIC_OPTION {
        return Transition::stay(DialogState::Idle, vec![EngineAction::Say(TOPIC_CHANGED.into())]);
    }
    match state {
        DialogState::ErrorOptions { source, diagnostics } if label == EXPLAIN_OPTION => {
            let turns = build_explain_prompt(&diagnostics, &source, &[]).expect("diagnostics present");
            let fallback = DialogState::ErrorOptions {
                source: source.clone(),
                diagnostics: diagnostics.clone(),
            };
            Transition {
                state: DialogState::Explaining {
                    source,
                    diagnostics,
                    history: Vec::new(),
                },
                actions: vec![EngineAction::CallBackend(PromptKind::Explain)],
                pending: Some(PendingCall {
                    kind: PromptKind::Explain,
                    turns,
                    fallback,
                }),
            }
        }
        DialogState::ErrorOptions {
            ref source,
            ref diagnostics,
        }
        | DialogState::Explaining {
            ref source,
            ref diagnostics,
            ..
        } => {
            debug_assert_eq!(label, FIX_OPTION);
            let history = match &state {
                DialogState::Explaining { history, .. } => history.clone(),
                _ => Vec::new(),
            };
            let base = CodeCandidate {
                source: source.clone(),
                ast: None,
                diagnostics: diagnostics.clone(),
                version: 1,
            };
            start_fix("fix the code", vec![base.clone()], base, &history, state)
        }
        DialogState::Clarifying { .. } if label == CLARIFY_OPTION => {
            Transition::stay(state, vec![EngineAction::Say(CLARIFY_ASK.into())])
        }
        DialogState::Clarifying { .. } => {
            let schema = deps.intents.schema_for(label);
            let questions = schema
                .slots
                .iter()
                .map(|s| SlotQuestion {
                    key: s.key.clone(),
                    question: s.question.clone(),
                    chips: s.chips.clone(),
                })
                .collect();
            let next = DialogState::SlotFilling {
                schema,
                filled: BTreeMap::new(),
            };
            Transition::stay(
                next,
                vec![
                    EngineAction::Say(working_on(label)),
                    EngineAction::Say(MORE_INFO.into()),
                    EngineAction::AskSlots(questions),
                ],
            )
        }
        DialogState::SlotFilling { .. } => fill_slot(state, label, deps),
        DialogState::DraftReview {
            ref topic,
            ref candidates,
            cursor,
        } => {
            let base = candidates[cursor].clone();
            start_fix(&topic.clone(), candidates.clone(), base, &[], state)
        }
        // Only the change-topic option is offered in these states.
        DialogState::Idle | DialogState::Fixing { .. } => Transition::stay(state, Vec::new()),
    }
}

fn start_fix(
    topic: &str,
    candidates: Vec<CodeCandidate>,
    base: CodeCandidate,
    history: &[ChatTurn],
    fallback: DialogState,
) -> Transition {
    let turns = build_fix_prompt(&base.diagnostics, &base.source, history).expect("fix needs diagnostics");
    Transition {
        state: DialogState::Fixing {
            topic: topic.to_owned(),
            candidates,
            base,
        },
        actions: vec![
            EngineAction::Say(FIXING.into()),
            EngineAction::ShowDisclaimer(FIX_DISCLAIMER.into()),
            EngineAction::CallBackend(PromptKind::Fix),
        ],
        pending: Some(PendingCall {
            kind: PromptKind::Fix,
            turns,
            fallback,
        }),
    }
}

fn fill_slot(state: DialogState, answer: &str, deps: DialogDeps<'_>) -> Transition {
    let DialogState::SlotFilling { schema, mut filled } = state else {
        unreachable!("slot answer outside slot filling")
    };
    if let Some(slot) = next_slot(&schema, &filled) {
        filled.insert(slot.key.clone(), answer.trim().to_owned());
    }
    if !all_required_filled(&schema, &filled) {
        let next = DialogState::SlotFilling { schema, filled };
        let actions = offer(&next, deps.features).into_iter().collect();
        return Transition::stay(next, actions);
    }
    let turns = build_draft_prompt(&schema, &filled).expect("required slots are filled");
    let summary = slot_summary(&schema, &filled);
    let mut fallback_filled = filled.clone();
    if let Some(last) = schema.slots.iter().rev().find(|s| filled.contains_key(&s.key)) {
        fallback_filled.remove(&last.key);
    }
    let fallback = DialogState::SlotFilling {
        schema: schema.clone(),
        filled: fallback_filled,
    };
    Transition {
        state: DialogState::SlotFilling { schema, filled },
        actions: vec![
            EngineAction::ShowSummary(summary),
            EngineAction::Say(DRAFTING.into()),
            EngineAction::ShowDisclaimer(DRAFT_DISCLAIMER.into()),
            EngineAction::CallBackend(PromptKind::Draft),
        ],
        pending: Some(PendingCall {
            kind: PromptKind::Draft,
            turns,
            fallback,
        }),
    }
}

fn run_requested(state: DialogState, deps: DialogDeps<'_>) -> Transition {
    let Some(candidate) = state.current_candidate() else {
        return Transition::stay(state, vec![EngineAction::Say(NOTHING_TO_RUN.into())]);
    };
    let mut actions = vec![EngineAction::Say(TRYING_TO_RUN.into())];
    match candidate.runnable() {
        Some(ast) => actions.push(EngineAction::Execute {
            source: candidate.source.clone(),
            ast: ast.clone(),
        }),
        None => {
            let errors = candidate.diagnostics.len().max(1);
            actions.push(EngineAction::Say(must_fix_notice(errors)));
            if deps.features.assistant && deps.features.fix_option {
                actions.push(EngineAction::OfferOptions(vec![FIX_OPTION.into()]));
            }
        }
    }
    Transition::stay(state, actions)
}

fn ask_edit(state: DialogState, text: &str, deps: DialogDeps<'_>) -> Transition {
    let DialogState::DraftReview {
        topic,
        mut candidates,
        cursor,
    } = state
    else {
        return Transition::stay(state, vec![EngineAction::Say(NOTHING_TO_EDIT.into())]);
    };
    let text = text.trim();
    let class = classify(text, deps.registry, AgentContext::Observer);
    if matches!(class, InputClass::ValidCode(_) | InputClass::BrokenCode(_)) {
        let version = next_version(&candidates);
        push_version(
            &mut candidates,
            CodeCandidate::from_source(text, version, deps.registry),
        );
        let cursor = candidates.len() - 1;
        let next = DialogState::DraftReview {
            topic,
            candidates,
            cursor,
        };
        let DialogState::DraftReview { candidates, .. } = &next else {
            unreachable!()
        };
        let mut actions = vec![present(candidates, cursor)];
        actions.extend(offer(&next, deps.features));
        return Transition::stay(next, actions);
    }
    let state = DialogState::DraftReview {
        topic,
        candidates,
        cursor,
    };
    if text.is_empty() || !deps.features.assistant {
        return Transition::stay(state, vec![EngineAction::Say(PROMPT_HINT.into())]);
    }
    let DialogState::DraftReview {
        topic,
        candidates,
        cursor,
    } = &state
    else {
        unreachable!()
    };
    let base = candidates[*cursor].clone();
    let turns = build_edit_prompt(&base.source, text, &[]).expect("instruction is not empty");
    Transition {
        state: DialogState::Fixing {
            topic: topic.clone(),
            candidates: candidates.clone(),
            base,
        },
        actions: vec![
            EngineAction::Say(EDITING.into()),
            EngineAction::ShowDisclaimer(FIX_DISCLAIMER.into()),
            EngineAction::CallBackend(PromptKind::Edit),
        ],
        pending: Some(PendingCall {
            kind: PromptKind::Edit,
            turns,
            fallback: state,
        }),
    }
}

/// Continues after the backend answered (or failed) `call`.
pub fn resume(
    state: DialogState,
    call: &PendingCall,
    outcome: Result<String, BackendError>,
    deps: DialogDeps<'_>,
) -> Transition {
    let reply = match outcome {
        Ok(reply) => reply,
        Err(err) => {
            log::warn!("backend call failed: {err}");
            let mut actions = vec![EngineAction::Say(BACKEND_FAILED.into())];
            actions.extend(offer(&call.fallback, deps.features));
            return Transition::stay(call.fallback.clone(), actions);
        }
    };
    let asked = call
        .turns
        .iter()
        .rev()
        .find(|t| t.role == Role::User)
        .cloned()
        .unwrap_or_else(|| ChatTurn::user(""));
    match (call.kind, state) {
        (
            PromptKind::Explain | PromptKind::FollowUp,
            DialogState::Explaining {
                source,
                diagnostics,
                mut history,
            },
        ) => {
            history.push(asked);
            history.push(ChatTurn::assistant(reply.clone()));
            let next = DialogState::Explaining {
                source,
                diagnostics,
                history,
            };
            let mut actions = vec![EngineAction::Say(prose(&reply))];
            actions.extend(offer(&next, deps.features));
            Transition::stay(next, actions)
        }
        (
            PromptKind::Clarify,
            DialogState::Clarifying {
                message, mut history, ..
            },
        ) => {
            let intents = parse_intents(&reply);
            history.push(asked);
            history.push(ChatTurn::assistant(reply.clone()));
            let say = match intents.len() {
                0 => prose(&reply),
                1 => ONE_NEED.to_owned(),
                _ => SEVERAL_NEEDS.to_owned(),
            };
            let next = DialogState::Clarifying {
                message,
                intents,
                history,
            };
            let mut actions = vec![EngineAction::Say(say)];
            actions.extend(offer(&next, deps.features));
            Transition::stay(next, actions)
        }
        (PromptKind::Draft, DialogState::SlotFilling { schema, .. }) => {
            match extract_candidate(&reply, 1, deps.registry) {
                Some(candidate) => {
                    let candidates = vec![candidate];
                    let actions = vec![present(&candidates, 0)];
                    let next = DialogState::DraftReview {
                        topic: schema.intent,
                        candidates,
                        cursor: 0,
                    };
                    let mut actions = actions;
                    actions.extend(offer(&next, deps.features));
                    Transition::stay(next, actions)
                }
                None => no_code(call, &reply, deps),
            }
        }
        (
            PromptKind::Fix | PromptKind::Edit,
            DialogState::Fixing {
                topic, mut candidates, ..
            },
        ) => match extract_candidate(&reply, next_version(&candidates), deps.registry) {
            Some(candidate) => {
                push_version(&mut candidates, candidate);
                let cursor = candidates.len() - 1;
                let mut actions = vec![present(&candidates, cursor)];
                let next = DialogState::DraftReview {
                    topic,
                    candidates,
                    cursor,
                };
                actions.extend(offer(&next, deps.features));
                Transition::stay(next, actions)
            }
            None => no_code(call, &reply, deps),
        },
        (kind, other) => {
            log::warn!("dropping {kind:?} reply that arrived in state {}", other.name());
            Transition::stay(other, Vec::new())
        }
    }
}

fn no_code(call: &PendingCall, reply: &str, deps: DialogDeps<'_>) -> Transition {
    let mut actions = vec![EngineAction::Say(NO_CODE_RETURNED.into())];
    let text = prose(reply);
    if !text.is_empty() {
        actions.push(EngineAction::Say(text));
    }
    actions.extend(offer(&call.fallback, deps.features));
    Transition::stay(call.fallback.clone(), actions)
}

#[cfg(any(test, feature = "testing"))]
pub mod samples;

#[cfg(test)]
mod tests;
