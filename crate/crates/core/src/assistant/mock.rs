use serde::Deserialize;
use thiserror::Error;

use super::{BackendError, BackendIdentity, ChatTurn, GenerationParams, ModelBackend, Role};

const BUILTIN_RULES: &str = include_str!("../../data/mock_backend.toml");

/// Reply for prompts no rule matches. It contains no code and no intent
/// list, so callers treat it as a question back to the user.
pub const MOCK_FALLBACK: &str = "Could you tell me a bit more about what you want the turtles or patches to do?";

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
pub struct MockRule {
    pub name: String,
    #[serde(default)]
    pub system_contains: Vec<String>,
    #[serde(default)]
    pub user_contains: Vec<String>,
    pub response: String,
}

impl MockRule {
    fn matches(&self, system: &str, user: &str) -> bool {
        self.system_contains.iter().all(|s| system.contains(s.as_str()))
            && self.user_contains.iter().all(|s| user.contains(s.as_str()))
    }
}

#[derive(Debug, Error)]
#[error("mock rules: {0}")]
pub struct MockRulesError(String);

#[derive(Debug, Deserialize)]
struct RulesFile {
    rule: Vec<MockRule>,
}

/// Deterministic backend answering from a rule table.
#[derive(Debug, Clone)]
pub struct MockBackend {
    rules: Vec<MockRule>,
}

impl Default for MockBackend {
    fn default() -> Self {
        MockBackend::builtin()
    }
}

impl MockBackend {
    pub fn builtin() -> Self {
        MockBackend::from_toml_str(BUILTIN_RULES).expect("builtin mock rules are valid")
    }

    pub fn from_toml_str(text: &str) -> Result<Self, MockRulesError> {
        let file: RulesFile = toml::from_str(text).map_err(|e| MockRulesError(e.to_string()))?;
        Ok(MockBackend { rules: file.rule })
    }

    pub fn rules(&self) -> &[MockRule] {
        &self.rules
    }

    /// Name of the rule that answers `turns`, if any.
    pub fn matching_rule(&self, turns: &[ChatTurn]) -> Option<&MockRule> {
        let system = turns
            .iter()
            .find(|t| t.role == Role::System)
            .map_or("", |t| t.content.as_str());
        let user = turns
            .iter()
            .rev()
            .find(|t| t.role == Role::User)
            .map_or("", |t| t.content.as_str());
        self.rules.iter().find(|r| r.matches(system, user))
    }
}

impl ModelBackend for MockBackend {
    fn identity(&self) -> BackendIdentity {
        BackendIdentity {
            backend: "mock".into(),
            model: "rules".into(),
        }
    }

    fn complete(&self, turns: &[ChatTurn], _params: &GenerationParams) -> Result<String, BackendError> {
        Ok(self
            .matching_rule(turns)
            .map_or(MOCK_FALLBACK, |r| r.response.trim_end())
            .to_owned())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assistant::{build_clarify_prompt, build_fix_prompt, extract_candidate, parse_intents};
    use crate::{check_source, pretty_print, PrimitiveRegistry};

    fn ask(mock: &MockBackend, turns: &[ChatTurn]) -> String {
        mock.complete(turns, &GenerationParams::default()).unwrap()
    }

    #[test]
    fn clarify_splits_moving_turtles() {
        let mock = MockBackend::builtin();
        let reply = ask(&mock, &build_clarify_prompt("create moving turtles", &[]).unwrap());
        assert_eq!(parse_intents(&reply), ["Create turtles", "Make turtles move"]);
    }

    #[test]
    fn fix_of_ask_turtle() {
        let reg = PrimitiveRegistry::builtin();
        let src = "; Move all turtles\nask turtle [\n  ; Set heading to up\n  set heading 90\n  ; Move forward random between 1-2 units\n  fd (1 + random 2)\n]";
        let (_, diags) = check_source(src, reg);
        let reply = ask(&MockBackend::builtin(), &build_fix_prompt(&diags, src, &[]).unwrap());
        let fixed = extract_candidate(&reply, 4, reg).unwrap();
        assert!(fixed.diagnostics.is_empty());
        let printed = pretty_print(fixed.ast.as_ref().unwrap());
        assert!(printed.contains("ask turtles ["));
        assert!(printed.contains("; Set heading to up"));
    }

    #[test]
    fn unmatched_prompt_gets_fallback() {
        let turns = [ChatTurn::system("something else"), ChatTurn::user("hi")];
        assert_eq!(ask(&MockBackend::builtin(), &turns), MOCK_FALLBACK);
    }

    #[test]
    fn every_rule_is_reachable() {
        let mock = MockBackend::builtin();
        for (i, rule) in mock.rules().iter().enumerate() {
            let turns = [
                ChatTurn::system(rule.system_contains.join(" ")),
                ChatTurn::user(rule.user_contains.join(" ")),
            ];
            let hit = mock.matching_rule(&turns).unwrap();
            assert_eq!(hit.name, rule.name, "rule {i} is shadowed");
        }
    }
}
