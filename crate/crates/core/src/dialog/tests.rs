use super::samples::*;
use super::*;
use crate::diagnostic::codes;

const BUGGY: &str = BUGGY_SAMPLE;

fn deps() -> DialogDeps<'static> {
    DialogDeps::builtin(Features::default())
}

fn drive(state: DialogState, event: &UserEvent, deps: DialogDeps<'_>) -> (DialogState, Vec<EngineAction>) {
    drive_with_mock(state, event, deps)
}

fn raw(text: &str) -> UserEvent {
    UserEvent::RawMessage(text.to_owned())
}

fn pick(label: &str) -> UserEvent {
    UserEvent::OptionSelected(label.to_owned())
}

fn says(actions: &[EngineAction]) -> Vec<&str> {
    actions
        .iter()
        .filter_map(|a| match a {
            EngineAction::Say(s) => Some(s.as_str()),
            _ => None,
        })
        .collect()
}

#[test]
fn broken_code_offers_fix_and_explain() {
    let (state, actions) = drive(DialogState::Idle, &raw("ask patches [ set color red ]"), deps());
    assert_eq!(state.name(), "error-options");
    match &actions[..] {
        [EngineAction::ShowDiagnostics { diagnostics, .. }, EngineAction::OfferOptions(opts)] => {
            assert_eq!(diagnostics.len(), 1);
            assert_eq!(opts, &[FIX_OPTION, EXPLAIN_OPTION]);
        }
        other => panic!("{other:?}"),
    }
}

#[test]
fn explain_then_follow_up() {
    let (state, _) = drive(DialogState::Idle, &raw("ask patches [ set color red ]"), deps());
    let t = advance(state, &pick(EXPLAIN_OPTION), deps());
    assert_eq!(t.actions, [EngineAction::CallBackend(PromptKind::Explain)]);
    assert_eq!(t.pending.as_ref().unwrap().kind, PromptKind::Explain);
    let (state, _) = drive(DialogState::Idle, &raw("ask patches [ set color red ]"), deps());
    let (state, actions) = drive(state, &pick(EXPLAIN_OPTION), deps());
    assert_eq!(state.name(), "explaining");
    assert!(says(&actions)[0].contains("PCOLOR"));
    let t = advance(state, &UserEvent::FollowUp("why not?".into()), deps());
    assert_eq!(t.state.name(), "explaining");
    let call = t.pending.unwrap();
    assert_eq!(call.kind, PromptKind::FollowUp);
    // system, explain request, explanation, question
    assert_eq!(call.turns.len(), 4);
}

#[test]
fn clarify_then_slots() {
    let (state, actions) = drive(DialogState::Idle, &raw("create moving turtles"), deps());
    assert_eq!(says(&actions), [SEVERAL_NEEDS]);
    assert_eq!(
        actions.last(),
        Some(&EngineAction::OfferOptions(vec![
            "Create turtles".into(),
            "Make turtles move".into(),
            CLARIFY_OPTION.into(),
            CHANGE_TOPIC_OPTION.into(),
        ]))
    );
    let (state, actions) = drive(state, &pick("Create turtles"), deps());
    assert_eq!(says(&actions), ["Working on: create turtles", MORE_INFO]);
    let EngineAction::AskSlots(questions) = &actions[2] else {
        panic!()
    };
    let chips: Vec<_> = questions.iter().map(|q| q.chips.join("|")).collect();
    assert_eq!(
        chips,
        [
            "turtles|rabbits|cars",
            "10|50|random between 20-30",
            "random|at (0,0)|around a specific patch"
        ]
    );
    let (state, _) = drive(state, &pick("turtles"), deps());
    let (state, _) = drive(state, &raw("10"), deps());
    let (state, actions) = drive(state, &pick("random"), deps());
    assert_eq!(state.name(), "draft-review");
    let summary = vec![
        ("breed".to_owned(), "turtles".to_owned()),
        ("number".to_owned(), "10".to_owned()),
        ("position".to_owned(), "random".to_owned()),
    ];
    assert_eq!(actions[0], EngineAction::ShowSummary(summary));
    assert_eq!(actions[1], EngineAction::Say(DRAFTING.into()));
    assert_eq!(actions[2], EngineAction::ShowDisclaimer(DRAFT_DISCLAIMER.into()));
    let EngineAction::PresentCandidate {
        candidate,
        position,
        total,
    } = &actions[4]
    else {
        panic!()
    };
    assert_eq!((candidate.version, *position, *total), (1, 1, 1));
    assert!(candidate.diagnostics.is_empty());
    assert_eq!(actions[5], EngineAction::OfferOptions(vec![CHANGE_TOPIC_OPTION.into()]));
}

fn review_with_buggy_draft() -> DialogState {
    let mut state = DialogState::Idle;
    for e in [
        raw("create moving turtles"),
        pick("Create turtles"),
        raw("turtles"),
        raw("10"),
        raw("random"),
    ] {
        state = drive(state, &e, deps()).0;
    }
    state
}

#[test]
fn buggy_candidate_blocks_run_and_fix_repairs_it() {
    let (state, _) = drive(
        review_with_buggy_draft(),
        &UserEvent::AskEdit("make them move".into()),
        deps(),
    );
    let (state, actions) = drive(state, &UserEvent::AskEdit(BUGGY.into()), deps());
    let EngineAction::PresentCandidate {
        position,
        total,
        candidate,
    } = &actions[0]
    else {
        panic!()
    };
    assert_eq!((*position, *total), (3, 3));
    assert_eq!(candidate.diagnostics.len(), 1);

    let (state, actions) = drive(state, &UserEvent::RunRequested, deps());
    assert_eq!(says(&actions), [TRYING_TO_RUN, must_fix_notice(1).as_str()]);
    assert_eq!(actions[2], EngineAction::OfferOptions(vec![FIX_OPTION.into()]));

    let (state, actions) = drive(state, &pick(FIX_OPTION), deps());
    assert_eq!(actions[0], EngineAction::Say(FIXING.into()));
    assert_eq!(actions[1], EngineAction::ShowDisclaimer(FIX_DISCLAIMER.into()));
    let EngineAction::PresentCandidate {
        candidate,
        position,
        total,
    } = &actions[3]
    else {
        panic!()
    };
    assert_eq!((*position, *total), (4, 4));
    assert!(candidate.diagnostics.is_empty());
    assert!(candidate.source.contains("ask turtles ["));

    let (_, actions) = drive(state, &UserEvent::RunRequested, deps());
    assert!(matches!(actions[1], EngineAction::Execute { .. }));
}

#[test]
fn navigation_clamps() {
    let (state, _) = drive(review_with_buggy_draft(), &UserEvent::AskEdit("print 1".into()), deps());
    let (state, actions) = drive(state, &UserEvent::NavigateVersion(-5), deps());
    assert!(matches!(
        actions[0],
        EngineAction::PresentCandidate {
            position: 1,
            total: 2,
            ..
        }
    ));
    let (_, actions) = drive(state, &UserEvent::NavigateVersion(9), deps());
    assert!(matches!(
        actions[0],
        EngineAction::PresentCandidate {
            position: 2,
            total: 2,
            ..
        }
    ));
}

#[test]
fn versions_are_capped() {
    let mut state = review_with_buggy_draft();
    for i in 0..30 {
        state = drive(state, &UserEvent::AskEdit(format!("print {i}")), deps()).0;
    }
    let DialogState::DraftReview { candidates, cursor, .. } = &state else {
        panic!()
    };
    assert_eq!(candidates.len(), MAX_VERSIONS);
    assert_eq!(*cursor, MAX_VERSIONS - 1);
    assert_eq!(candidates.last().unwrap().version, 31);
}

#[test]
fn illegal_option_is_recoverable() {
    let (state, _) = drive(DialogState::Idle, &raw("ask patches [ set color red ]"), deps());
    let before = state.clone();
    let (state, actions) = drive(state, &pick("Make me a sandwich"), deps());
    assert_eq!(state, before);
    assert_eq!(says(&actions), [CHOOSE_OFFERED]);
}

#[test]
fn backend_failure_returns_to_fallback() {
    let (state, _) = drive(DialogState::Idle, &raw("ask patches [ set color red ]"), deps());
    let before = state.clone();
    let t = advance(state, &pick(EXPLAIN_OPTION), deps());
    let call = t.pending.unwrap();
    let r = resume(t.state, &call, Err(BackendError::Transport("down".into())), deps());
    assert_eq!(r.state, before);
    assert_eq!(r.actions[0], EngineAction::Say(BACKEND_FAILED.into()));
}

#[test]
fn failed_draft_clears_last_slot() {
    let mut state = DialogState::Idle;
    for e in [
        raw("create moving turtles"),
        pick("Create turtles"),
        raw("cars"),
        raw("3"),
    ] {
        state = drive(state, &e, deps()).0;
    }
    let t = advance(state, &raw("random"), deps());
    let call = t.pending.unwrap();
    let r = resume(t.state, &call, Err(BackendError::Transport("x".into())), deps());
    let DialogState::SlotFilling { filled, .. } = &r.state else {
        panic!("{:?}", r.state)
    };
    assert_eq!(filled.len(), 2);
    assert!(!filled.contains_key("position"));
}

#[test]
fn unknown_draft_gets_no_code() {
    let mut state = DialogState::Idle;
    for e in [
        raw("create moving turtles"),
        pick("Create turtles"),
        raw("cars"),
        raw("3"),
    ] {
        state = drive(state, &e, deps()).0;
    }
    let (state, actions) = drive(state, &raw("random"), deps());
    assert_eq!(state.name(), "slot-filling");
    assert!(says(&actions).contains(&NO_CODE_RETURNED));
}

#[test]
fn assistant_off_behaves_like_plain_command_center() {
    let off = DialogDeps::builtin(Features::without_assistant());
    let (state, actions) = drive(DialogState::Idle, &raw("ask patches [ set color red ]"), off);
    assert_eq!(state, DialogState::Idle);
    assert_eq!(
        says(&actions),
        ["Sorry, I can't understand: You can't use COLOR in a patch context, because COLOR is turtle/link-only."]
    );
    let (state, actions) = drive(DialogState::Idle, &raw("make turtles dance"), off);
    assert_eq!(state, DialogState::Idle);
    assert!(says(&actions)[0].starts_with("Sorry, I can't understand: "));
}

#[test]
fn help_query_shows_entry() {
    let (_, actions) = drive(DialogState::Idle, &raw("help color"), deps());
    let EngineAction::ShowHelp(entry) = &actions[0] else {
        panic!()
    };
    assert_eq!(entry.name, "color");
}

#[test]
fn advance_is_total_over_states_and_events() {
    for features in [Features::default(), Features::without_assistant()] {
        let report = check_product(features);
        assert_eq!(report.state_variants, 7);
        assert_eq!(report.event_variants, 6);
        assert!(report.violations.is_empty(), "{:#?}", report.violations);
    }
}

#[test]
fn every_reachable_state_can_return_to_idle() {
    let seen = reachable_states(6, 400);
    assert!(seen.len() > 20, "exploration too shallow: {}", seen.len());
    let stranded = stranded_states(&seen, 3);
    assert!(stranded.is_empty(), "no way back to idle from {stranded:#?}");
}

#[test]
fn pending_states_only_exist_with_a_call() {
    for state in state_samples() {
        for event in event_samples(&state) {
            let t = advance(state.clone(), &event, deps());
            let waiting = matches!(&t.state, DialogState::Fixing { .. })
                || matches!(&t.state, DialogState::Clarifying { intents, .. } if intents.is_empty());
            if waiting && t.pending.is_none() {
                assert_eq!(t.state, state, "{event:?} produced a waiting state without a call");
            }
        }
    }
}

#[test]
fn context_error_codes_survive() {
    let (_, actions) = drive(DialogState::Idle, &raw("ask patches [ set color red ]"), deps());
    let EngineAction::ShowDiagnostics { diagnostics, .. } = &actions[0] else {
        panic!()
    };
    assert_eq!(diagnostics[0].code, codes::WRONG_CONTEXT);
}
