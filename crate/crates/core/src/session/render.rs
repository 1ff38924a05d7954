//! Plain-text rendering of a transcript, laid out like the command center.
//!
//! With the assistant off, user input is echoed after an `observer> `
//! prompt and every successful command is confirmed. With it on, input is
//! echoed bare and the confirmation is left out when the command printed
//! something.

use super::{Payload, SessionEvent};
use crate::dialog::{EngineAction, Features, UserEvent};
use crate::runtime::ExecStatus;

pub const PROMPT: &str = "observer> ";
pub const EXECUTED_PLAIN: &str = "The command was executed successfully.";
pub const EXECUTED_ASSISTED: &str = "Successfully executed the code.";

pub fn still_errors(n: usize) -> String {
    format!("Sorry, there are still {n} errors in the code snippet.")
}

pub fn runtime_error(message: &str) -> String {
    format!("Sorry, the code stopped with an error: {message}")
}

/// Renders every event in order. Features come from the config record, or
/// the defaults when there is none.
pub fn render_text(events: &[SessionEvent]) -> String {
    let features = events
        .iter()
        .find_map(|e| match &e.payload {
            Payload::Config(c) => Some(c.features),
            _ => None,
        })
        .unwrap_or_default();
    let mut text = render_lines(events, features).join("\n");
    text.push('\n');
    text
}

/// Renders events as separate lines under the given features.
pub fn render_lines(events: &[SessionEvent], mut features: Features) -> Vec<String> {
    let mut lines: Vec<String> = Vec::new();
    let mut printed = false;
    for e in events {
        match &e.payload {
            Payload::Config(c) => features = c.features,
            Payload::User(u) => {
                printed = false;
                let text = match u {
                    UserEvent::RawMessage(m) if features.assistant => m.clone(),
                    UserEvent::RawMessage(m) => format!("{PROMPT}{m}"),
                    UserEvent::OptionSelected(label) => label.clone(),
                    UserEvent::RunRequested => "Run".into(),
                    UserEvent::AskEdit(text) | UserEvent::FollowUp(text) => text.clone(),
                    UserEvent::NavigateVersion(v) => format!("Version {v}"),
                };
                lines.push(text);
            }
            Payload::Action(a) => render_action(a, &mut lines),
            Payload::Output(line) => {
                printed = true;
                lines.push(line.clone());
            }
            Payload::Executed(ExecStatus::Success) => {
                if !features.assistant {
                    lines.push(EXECUTED_PLAIN.into());
                } else if !printed {
                    lines.push(EXECUTED_ASSISTED.into());
                }
            }
            Payload::Executed(ExecStatus::RuntimeError(d)) => lines.push(runtime_error(&d.message)),
            Payload::ViewDelta(_) | Payload::BackendReplied { .. } => {}
            Payload::BackendCancelled { .. } => lines.push("(cancelled)".into()),
        }
    }
    lines
}

fn render_action(action: &EngineAction, lines: &mut Vec<String>) {
    match action {
        EngineAction::Say(s) | EngineAction::ShowDisclaimer(s) => lines.push(s.clone()),
        EngineAction::OfferOptions(options) => lines.extend(options.iter().cloned()),
        EngineAction::AskSlots(questions) => {
            for q in questions {
                lines.push(q.question.clone());
                lines.push(format!("e.g. {}", q.chips.join(" ")));
            }
        }
        EngineAction::ShowDiagnostics { diagnostics, .. } => {
            lines.push(still_errors(diagnostics.len()));
            for d in diagnostics {
                if !d.related.is_empty() {
                    lines.push(format!("• {}", d.related.join(", ")));
                }
                lines.push(d.message.clone());
            }
        }
        EngineAction::PresentCandidate {
            candidate,
            position,
            total,
        } => {
            lines.push("```".into());
            lines.push(candidate.source.clone());
            lines.push("```".into());
            lines.push(format!("{position} / {total}"));
        }
        EngineAction::ShowSummary(pairs) => {
            lines.push("Below is a summary of my request:".into());
            lines.extend(pairs.iter().map(|(k, v)| format!("- {k}: {v}")));
        }
        EngineAction::ShowHelp(entry) => lines.push(entry.render()),
        EngineAction::Execute { .. } | EngineAction::CallBackend(_) => {}
    }
}
