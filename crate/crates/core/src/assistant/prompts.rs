//! Prompt builders. All of them are pure.

use std::collections::BTreeMap;

use thiserror::Error;

use super::ChatTurn;
use crate::diagnostic::Diagnostic;
use crate::dialog::SlotSchema;

pub const MAX_INTENTS: usize = 4;

const PERSONA: &str = "You are a patient tutor inside the command center of a Logo-family \
agent-based modeling environment. The learner is a novice. Keep answers short and concrete. \
Never pretend to be certain: your code and explanations can have mistakes, and the learner \
stays in charge.";

const EXPLAIN: &str = "Task: explain the error. Say in plain words what the error message means \
and which part of the code causes it. Do not write out a full corrected program unless the \
learner asks for one.";

const FIX: &str = "Task: fix the code. Make the smallest change that removes the errors. Keep \
every comment the learner wrote. Start with one sentence noting the code can still have \
mistakes, then give the complete revised program in a single fenced code block.";

const CLARIFY: &str = "Task: clarify the request. Do not write code. Split the request into at \
most 4 separate needs the learner could work on one at a time. Reply with one short label per \
line, each line starting with \"- \".";

const DRAFT: &str = "Task: write a first version of the code for the summarized request. Put a \
comment line above each command saying what it does. Give the program in a single fenced code \
block. Do not give step-by-step instructions.";

const EDIT: &str = "Task: revise the current code as the learner asks. Keep their comments and \
change as little as possible. Give the complete revised program in a single fenced code block.";

const FOLLOW_UP: &str = "Task: answer the learner's follow-up question about the code and the \
error discussed so far. Do not write out a full corrected program unless asked.";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PromptError {
    #[error("no diagnostics to explain or fix")]
    NoDiagnostics,
    #[error("the message is empty")]
    EmptyMessage,
    #[error("required slot {0:?} has no value")]
    MissingSlot(String),
}

fn system(task: &str) -> ChatTurn {
    ChatTurn::system(format!("{PERSONA}\n\n{task}"))
}

fn with_history(task: &str, history: &[ChatTurn], user: String) -> Vec<ChatTurn> {
    let mut turns = Vec::with_capacity(history.len() + 2);
    turns.push(system(task));
    turns.extend(history.iter().filter(|t| t.role != super::Role::System).cloned());
    turns.push(ChatTurn::user(user));
    turns
}

/// Source with each diagnostic written as a comment after the line it
/// starts on.
fn annotate(source: &str, diagnostics: &[Diagnostic]) -> String {
    let mut out = String::new();
    let mut offset = 0;
    let mut placed = vec![false; diagnostics.len()];
    for line in source.split('\n') {
        let end = offset + line.len();
        out.push_str(line);
        out.push('\n');
        for (i, d) in diagnostics.iter().enumerate() {
            if !placed[i] && d.span.start >= offset && d.span.start <= end {
                placed[i] = true;
                let width = d.span.len().max(1);
                let col = d.span.start - offset;
                out.push_str(&format!(
                    ";{}{} ERROR: {}\n",
                    " ".repeat(col.saturating_sub(1)),
                    "^".repeat(width),
                    d.message
                ));
            }
        }
        offset = end + 1;
    }
    for (d, _) in diagnostics.iter().zip(placed).filter(|(_, p)| !p) {
        out.push_str(&format!("; ERROR: {}\n", d.message));
    }
    out
}

fn code_with_errors(source: &str, diagnostics: &[Diagnostic]) -> String {
    let mut text = format!("```\n{}```\n\nErrors:\n", annotate(source, diagnostics));
    for d in diagnostics {
        text.push_str(&format!("- {}\n", d.message));
    }
    text
}

pub fn build_explain_prompt(
    diagnostics: &[Diagnostic],
    source: &str,
    history: &[ChatTurn],
) -> Result<Vec<ChatTurn>, PromptError> {
    if diagnostics.is_empty() {
        return Err(PromptError::NoDiagnostics);
    }
    let user = format!(
        "Please explain the error in my code.\n\n{}",
        code_with_errors(source, diagnostics)
    );
    Ok(with_history(EXPLAIN, history, user))
}

pub fn build_fix_prompt(
    diagnostics: &[Diagnostic],
    source: &str,
    history: &[ChatTurn],
) -> Result<Vec<ChatTurn>, PromptError> {
    if diagnostics.is_empty() {
        return Err(PromptError::NoDiagnostics);
    }
    let user = format!(
        "Please help me fix this code.\n\n{}",
        code_with_errors(source, diagnostics)
    );
    Ok(with_history(FIX, history, user))
}

pub fn build_clarify_prompt(message: &str, history: &[ChatTurn]) -> Result<Vec<ChatTurn>, PromptError> {
    let message = message.trim();
    if message.is_empty() {
        return Err(PromptError::EmptyMessage);
    }
    Ok(with_history(CLARIFY, history, message.to_owned()))
}

/// Lines of the form `- label` (also `* label` and `1. label`), at most
/// [`MAX_INTENTS`].
pub fn parse_intents(response: &str) -> Vec<String> {
    response
        .lines()
        .filter_map(|line| {
            let line = line.trim();
            let rest = line
                .strip_prefix("- ")
                .or_else(|| line.strip_prefix("* "))
                .or_else(|| {
                    let digits = line.find(|c: char| !c.is_ascii_digit())?;
                    (digits > 0).then(|| line[digits..].strip_prefix(". "))?
                })?;
            let label = rest.trim().trim_matches(['[', ']', '*']).trim();
            (!label.is_empty()).then(|| label.to_owned())
        })
        .take(MAX_INTENTS)
        .collect()
}

/// The "- key: value" lines shown to the user before drafting.
pub fn slot_summary(schema: &SlotSchema, filled: &BTreeMap<String, String>) -> Vec<(String, String)> {
    schema
        .slots
        .iter()
        .filter_map(|s| filled.get(&s.key).map(|v| (s.key.clone(), v.clone())))
        .collect()
}

pub fn build_draft_prompt(
    schema: &SlotSchema,
    filled: &BTreeMap<String, String>,
) -> Result<Vec<ChatTurn>, PromptError> {
    if let Some(missing) = schema
        .slots
        .iter()
        .find(|s| s.required && filled.get(&s.key).is_none_or(|v| v.trim().is_empty()))
    {
        return Err(PromptError::MissingSlot(missing.key.clone()));
    }
    let mut user = format!("I want to {}.\nBelow is a summary of my request:\n", schema.intent);
    for (key, value) in slot_summary(schema, filled) {
        user.push_str(&format!("- {key}: {value}\n"));
    }
    Ok(vec![system(DRAFT), ChatTurn::user(user)])
}

pub fn build_edit_prompt(source: &str, instruction: &str, history: &[ChatTurn]) -> Result<Vec<ChatTurn>, PromptError> {
    let instruction = instruction.trim();
    if instruction.is_empty() {
        return Err(PromptError::EmptyMessage);
    }
    let user = format!("Current code:\n```\n{source}\n```\n\n{instruction}");
    Ok(with_history(EDIT, history, user))
}

pub fn build_followup_prompt(question: &str, history: &[ChatTurn]) -> Result<Vec<ChatTurn>, PromptError> {
    let question = question.trim();
    if question.is_empty() {
        return Err(PromptError::EmptyMessage);
    }
    Ok(with_history(FOLLOW_UP, history, question.to_owned()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assistant::Role;
    use crate::dialog::schema_for;
    use crate::{check_source, PrimitiveRegistry};

    const A2_ERROR: &str = "You can't use COLOR in a patch context, because COLOR is turtle/link-only.";

    #[test]
    fn explain_prompt_embeds_error() {
        let src = "ask patches [ set color red ]";
        let (_, diags) = check_source(src, PrimitiveRegistry::builtin());
        let turns = build_explain_prompt(&diags, src, &[]).unwrap();
        assert_eq!(turns.len(), 2);
        assert_eq!(turns[0].role, Role::System);
        assert!(turns[1].content.contains(A2_ERROR));
        let caret = format!(";{}^^^^^ ERROR: You can't use COLOR", " ".repeat(17));
        assert!(turns[1].content.contains(&caret));
        assert_eq!(turns, build_explain_prompt(&diags, src, &[]).unwrap());
    }

    #[test]
    fn fix_needs_diagnostics() {
        assert_eq!(build_fix_prompt(&[], "fd 1", &[]), Err(PromptError::NoDiagnostics));
        assert_eq!(build_explain_prompt(&[], "fd 1", &[]), Err(PromptError::NoDiagnostics));
    }

    #[test]
    fn history_sits_between_system_and_user() {
        let src = "fd";
        let (_, diags) = check_source(src, PrimitiveRegistry::builtin());
        let history = [ChatTurn::user("q"), ChatTurn::assistant("a")];
        let turns = build_fix_prompt(&diags, src, &history).unwrap();
        let roles: Vec<Role> = turns.iter().map(|t| t.role).collect();
        assert_eq!(roles, [Role::System, Role::User, Role::Assistant, Role::User]);
    }

    #[test]
    fn draft_requires_slots() {
        let schema = schema_for("create turtles");
        let mut filled = BTreeMap::new();
        filled.insert("breed".to_owned(), "turtles".to_owned());
        assert_eq!(
            build_draft_prompt(&schema, &filled),
            Err(PromptError::MissingSlot("number".into()))
        );
        filled.insert("number".to_owned(), "10".to_owned());
        filled.insert("position".to_owned(), "random".to_owned());
        let turns = build_draft_prompt(&schema, &filled).unwrap();
        assert!(turns[1]
            .content
            .ends_with("Below is a summary of my request:\n- breed: turtles\n- number: 10\n- position: random\n"));
    }

    #[test]
    fn intents_are_parsed_and_capped() {
        let text = "Several needs:\n- Create turtles\n- Make turtles move\nthanks";
        assert_eq!(parse_intents(text), ["Create turtles", "Make turtles move"]);
        let many = "1. a\n2. b\n* c\n- d\n- e";
        assert_eq!(parse_intents(many), ["a", "b", "c", "d"]);
        assert!(parse_intents("no list here").is_empty());
    }
}
