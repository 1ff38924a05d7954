//! Language-model plumbing: the backend contract, prompt builders, response
//! parsing and the deterministic mock backend.

mod mock;
mod prompts;

#[cfg(feature = "http-backend")]
mod http;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ast::Ast;
use crate::diagnostic::Diagnostic;
use crate::primitives::PrimitiveRegistry;

#[cfg(feature = "http-backend")]
pub use http::HttpBackend;
pub use mock::{MockBackend, MockRule, MOCK_FALLBACK};
pub use prompts::{
    build_clarify_prompt, build_draft_prompt, build_edit_prompt, build_explain_prompt, build_fix_prompt,
    build_followup_prompt, parse_intents, slot_summary, PromptError, MAX_INTENTS,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    System,
    User,
    Assistant,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChatTurn {
    pub role: Role,
    pub content: String,
}

impl ChatTurn {
    pub fn system(content: impl Into<String>) -> Self {
        ChatTurn {
            role: Role::System,
            content: content.into(),
        }
    }

    pub fn user(content: impl Into<String>) -> Self {
        ChatTurn {
            role: Role::User,
            content: content.into(),
        }
    }

    pub fn assistant(content: impl Into<String>) -> Self {
        ChatTurn {
            role: Role::Assistant,
            content: content.into(),
        }
    }
}

/// What a backend call is for. Carried by dialog actions and transcripts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PromptKind {
    Explain,
    Fix,
    Clarify,
    Draft,
    Edit,
    FollowUp,
}

impl PromptKind {
    pub const ALL: [PromptKind; 6] = [
        PromptKind::Explain,
        PromptKind::Fix,
        PromptKind::Clarify,
        PromptKind::Draft,
        PromptKind::Edit,
        PromptKind::FollowUp,
    ];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationParams {
    pub temperature: f32,
    pub max_tokens: u32,
}

impl Default for GenerationParams {
    fn default() -> Self {
        GenerationParams {
            temperature: 0.2,
            max_tokens: 800,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BackendIdentity {
    pub backend: String,
    pub model: String,
}

impl fmt::Display for BackendIdentity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.backend, self.model)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BackendError {
    #[error("backend request failed: {0}")]
    Transport(String),
    #[error("backend returned an unusable response: {0}")]
    BadResponse(String),
    #[error("backend is not configured: {0}")]
    Config(String),
}

/// Settings for an OpenAI-style chat-completions endpoint.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HttpConfig {
    /// Base URL; `/chat/completions` is appended.
    pub endpoint: String,
    pub model: String,
    /// Environment variable holding the bearer token, if one is needed.
    #[serde(default)]
    pub api_key_env: Option<String>,
    #[serde(default = "default_timeout")]
    pub timeout_secs: u64,
}

fn default_timeout() -> u64 {
    60
}

/// A language-model provider. Implementations must be interchangeable: the
/// engine only ever looks at the returned text.
pub trait ModelBackend: Send + Sync {
    fn identity(&self) -> BackendIdentity;

    fn complete(&self, turns: &[ChatTurn], params: &GenerationParams) -> Result<String, BackendError>;
}

/// A program version offered to the user.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CodeCandidate {
    pub source: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ast: Option<Ast>,
    pub diagnostics: Vec<Diagnostic>,
    pub version: u32,
}

impl CodeCandidate {
    /// Validates `source` with the parser and the context checker.
    pub fn from_source(source: &str, version: u32, registry: &PrimitiveRegistry) -> Self {
        let (ast, diagnostics) = crate::check_source(source, registry);
        CodeCandidate {
            source: source.to_owned(),
            ast,
            diagnostics,
            version,
        }
    }

    /// Clean candidates are the only ones that may be run.
    pub fn runnable(&self) -> Option<&Ast> {
        if self.diagnostics.is_empty() {
            self.ast.as_ref()
        } else {
            None
        }
    }
}

/// Code blocks fenced with three or more backticks, in order.
pub fn fenced_blocks(text: &str) -> Vec<String> {
    let mut blocks = Vec::new();
    let mut current: Option<(usize, Vec<&str>)> = None;
    for line in text.lines() {
        let trimmed = line.trim_start();
        let ticks = trimmed.chars().take_while(|&c| c == '`').count();
        match current.take() {
            None if ticks >= 3 => current = Some((ticks, Vec::new())),
            None => {}
            Some((open, body)) if ticks >= open && trimmed[ticks..].trim().is_empty() => {
                blocks.push(body.join("\n"));
            }
            Some((open, mut body)) => {
                body.push(line);
                current = Some((open, body));
            }
        }
    }
    if let Some((_, body)) = current {
        blocks.push(body.join("\n"));
    }
    blocks
}

/// Takes the first fenced block of a model response and validates it.
pub fn extract_candidate(response: &str, version: u32, registry: &PrimitiveRegistry) -> Option<CodeCandidate> {
    let blocks = fenced_blocks(response);
    if blocks.len() > 1 {
        log::warn!("response has {} code blocks; using the first", blocks.len());
    }
    let source = blocks.into_iter().next()?;
    Some(CodeCandidate::from_source(source.trim_matches('\n'), version, registry))
}

/// Response text with fenced blocks removed.
pub fn prose(response: &str) -> String {
    let mut out = Vec::new();
    let mut fence = 0;
    for line in response.lines() {
        let trimmed = line.trim_start();
        let ticks = trimmed.chars().take_while(|&c| c == '`').count();
        if fence == 0 && ticks >= 3 {
            fence = ticks;
        } else if fence > 0 && ticks >= fence && trimmed[ticks..].trim().is_empty() {
            fence = 0;
        } else if fence == 0 {
            out.push(line);
        }
    }
    out.join("\n").trim().to_owned()
}
