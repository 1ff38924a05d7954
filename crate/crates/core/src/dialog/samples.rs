//! Sample states and events for exploring the dialog in tests.

use std::collections::{BTreeMap, VecDeque};

use super::*;
use crate::assistant::{MockBackend, ModelBackend};

/// A candidate with one error: `turtle` where `turtles` was meant.
pub const BUGGY_SAMPLE: &str = "; Move all turtles\nask turtle [\n  ; Set heading to up\n  set heading 90\n  ; Move forward random between 1-2 units\n  fd (1 + random 2)\n]";

/// Advances and, if the transition needs the model, answers with the mock.
pub fn drive_with_mock(
    state: DialogState,
    event: &UserEvent,
    deps: DialogDeps<'_>,
) -> (DialogState, Vec<EngineAction>) {
    let t = advance(state, event, deps);
    let mut actions = t.actions;
    let mut state = t.state;
    let mut pending = t.pending;
    while let Some(call) = pending {
        let reply = MockBackend::builtin().complete(&call.turns, &Default::default());
        let r = resume(state, &call, reply, deps);
        actions.extend(r.actions);
        state = r.state;
        pending = r.pending;
    }
    (state, actions)
}

/// One or more states of every variant.
pub fn state_samples() -> Vec<DialogState> {
    let reg = PrimitiveRegistry::builtin();
    let (_, diags) = crate::check_source("ask patches [ set color red ]", reg);
    let clean = CodeCandidate::from_source("crt 1", 1, reg);
    let buggy = CodeCandidate::from_source(BUGGY_SAMPLE, 2, reg);
    let mut out = Vec::new();
    for tag in 0..7 {
        let s = match tag {
            0 => DialogState::Idle,
            1 => DialogState::ErrorOptions {
                source: "ask patches [ set color red ]".into(),
                diagnostics: diags.clone(),
            },
            2 => DialogState::Explaining {
                source: "ask patches [ set color red ]".into(),
                diagnostics: diags.clone(),
                history: vec![ChatTurn::user("q"), ChatTurn::assistant("a")],
            },
            3 => DialogState::Clarifying {
                message: "create moving turtles".into(),
                intents: vec!["Create turtles".into(), "Make turtles move".into()],
                history: Vec::new(),
            },
            4 => DialogState::SlotFilling {
                schema: schema_for("create turtles"),
                filled: BTreeMap::new(),
            },
            5 => DialogState::DraftReview {
                topic: "create turtles".into(),
                candidates: vec![clean.clone(), buggy.clone()],
                cursor: 1,
            },
            _ => DialogState::Fixing {
                topic: "t".into(),
                candidates: vec![buggy.clone()],
                base: buggy.clone(),
            },
        };
        // Adding a variant breaks the build here until it is sampled.
        match &s {
            DialogState::Idle
            | DialogState::ErrorOptions { .. }
            | DialogState::Explaining { .. }
            | DialogState::Clarifying { .. }
            | DialogState::SlotFilling { .. }
            | DialogState::DraftReview { .. }
            | DialogState::Fixing { .. } => out.push(s),
        }
    }
    out.push(DialogState::Clarifying {
        message: "x".into(),
        intents: Vec::new(),
        history: Vec::new(),
    });
    out
}

fn raw(text: &str) -> UserEvent {
    UserEvent::RawMessage(text.to_owned())
}

/// Events of every variant, plus the options `state` offers.
pub fn event_samples(state: &DialogState) -> Vec<UserEvent> {
    let mut events = Vec::new();
    for tag in 0..6 {
        let e = match tag {
            0 => raw("print 1"),
            1 => UserEvent::OptionSelected("not offered".into()),
            2 => UserEvent::RunRequested,
            3 => UserEvent::AskEdit("make them move".into()),
            4 => UserEvent::NavigateVersion(-1),
            _ => UserEvent::FollowUp("why?".into()),
        };
        match &e {
            UserEvent::RawMessage(_)
            | UserEvent::OptionSelected(_)
            | UserEvent::RunRequested
            | UserEvent::AskEdit(_)
            | UserEvent::NavigateVersion(_)
            | UserEvent::FollowUp(_) => events.push(e),
        }
    }
    for text in [
        "",
        "ask patches [ set color red ]",
        "create moving turtles",
        "help pcolor",
        "10",
        "turtles",
    ] {
        events.push(raw(text));
    }
    events.push(UserEvent::AskEdit(BUGGY_SAMPLE.into()));
    events.push(UserEvent::NavigateVersion(1));
    events.extend(
        offered_options(state, Features::default())
            .into_iter()
            .map(UserEvent::OptionSelected),
    );
    events
}

fn invariant_violation(state: &DialogState) -> Option<String> {
    match state {
        DialogState::DraftReview { candidates, cursor, .. } if *cursor >= candidates.len() => {
            Some(format!("cursor {cursor} past {} versions", candidates.len()))
        }
        DialogState::DraftReview { candidates, .. } if candidates.len() > MAX_VERSIONS => {
            Some(format!("{} versions kept", candidates.len()))
        }
        DialogState::Clarifying { .. } => {
            let opts = offered_options(state, Features::default());
            let standing = [CLARIFY_OPTION.to_owned(), CHANGE_TOPIC_OPTION.to_owned()];
            (!opts.ends_with(&standing)).then(|| format!("clarifying without standing options: {opts:?}"))
        }
        DialogState::SlotFilling { schema, .. } if !schema.slots.iter().any(|s| s.required) => {
            Some("slot filling with nothing to ask".into())
        }
        _ => None,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProductReport {
    pub state_variants: usize,
    pub event_variants: usize,
    pub pairs: usize,
    pub violations: Vec<String>,
}

/// Runs every sampled event against every sampled state.
pub fn check_product(features: Features) -> ProductReport {
    let deps = DialogDeps::builtin(features);
    let states = state_samples();
    let mut state_names: Vec<&str> = states.iter().map(|s| s.name()).collect();
    state_names.sort_unstable();
    state_names.dedup();
    let mut event_names = std::collections::HashSet::new();
    let mut pairs = 0;
    let mut violations = Vec::new();
    for state in &states {
        for event in event_samples(state) {
            event_names.insert(std::mem::discriminant(&event));
            pairs += 1;
            let (next, actions) = drive_with_mock(state.clone(), &event, deps);
            if let Some(v) = invariant_violation(&next) {
                violations.push(format!("{} + {event:?}: {v}", state.name()));
            }
            if event == raw("print 1") && !actions.iter().any(|a| matches!(a, EngineAction::Execute { .. })) {
                violations.push(format!("valid code did not run in {}", state.name()));
            }
            let mut disclaimed = false;
            for a in &actions {
                match a {
                    EngineAction::ShowDisclaimer(_) => disclaimed = true,
                    EngineAction::PresentCandidate { candidate, .. }
                        if matches!(event, UserEvent::OptionSelected(_)) && candidate.version > 1 && !disclaimed =>
                    {
                        violations.push(format!("{} + {event:?}: fix shown without disclaimer", state.name()));
                    }
                    _ => {}
                }
            }
        }
    }
    ProductReport {
        state_variants: state_names.len(),
        event_variants: event_names.len(),
        pairs,
        violations,
    }
}

/// Breadth-first exploration from idle and every sample state.
pub fn reachable_states(max_depth: usize, max_states: usize) -> Vec<DialogState> {
    let deps = DialogDeps::builtin(Features::default());
    let mut seen: Vec<DialogState> = Vec::new();
    let mut queue: VecDeque<(DialogState, usize)> = VecDeque::from([(DialogState::Idle, 0)]);
    queue.extend(state_samples().into_iter().map(|s| (s, 0)));
    while let Some((state, depth)) = queue.pop_front() {
        if seen.contains(&state) {
            continue;
        }
        seen.push(state.clone());
        if depth >= max_depth || seen.len() >= max_states {
            continue;
        }
        for e in event_samples(&state) {
            let (next, _) = drive_with_mock(state.clone(), &e, deps);
            queue.push_back((next, depth + 1));
        }
    }
    seen
}

/// States from which no sequence of at most `depth` sampled events reaches
/// idle.
pub fn stranded_states(states: &[DialogState], depth: usize) -> Vec<DialogState> {
    let deps = DialogDeps::builtin(Features::default());
    states
        .iter()
        .filter(|start| {
            let mut frontier = vec![(*start).clone()];
            for _ in 0..=depth {
                if frontier.contains(&DialogState::Idle) {
                    return false;
                }
                frontier = frontier
                    .iter()
                    .flat_map(|s| {
                        event_samples(s)
                            .into_iter()
                            .map(move |e| drive_with_mock(s.clone(), &e, deps).0)
                    })
                    .collect();
            }
            true
        })
        .cloned()
        .collect()
}
