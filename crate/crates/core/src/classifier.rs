//! Routes a raw message to execution, error recovery, help, or conversation.
//!
//! Rules, applied in order:
//!
//! 1. Blank input is `Natural("")`.
//! 2. Exactly `help <word>` is a help query.
//! 3. Input that mentions an English function word, where fewer than half of
//!    the words are known or hyphenated names, or whose first word is neither
//!    a primitive nor hyphenated, is natural language.
//! 4. Everything else is code: clean parse and context check gives
//!    `ValidCode`, otherwise `BrokenCode` with every diagnostic.

use serde::{Deserialize, Serialize};

use crate::ast::Ast;
use crate::context::check_context;
use crate::diagnostic::Diagnostic;
use crate::lexer::{tokenize, TokenKind};
use crate::parser::parse;
use crate::primitives::{AgentContext, PrimitiveRegistry};

/// Words that mark English prose. Names the registry knows are never
/// treated as prose even if listed here.
pub const FUNCTION_WORDS: &[&str] = &[
    "a", "about", "all", "am", "an", "and", "are", "be", "but", "can", "could", "do", "does", "for", "from", "get",
    "give", "have", "how", "i", "i'm", "if", "in", "is", "it", "let", "like", "make", "me", "my", "need", "not", "on",
    "or", "please", "should", "so", "some", "that", "the", "them", "then", "there", "they", "this", "to", "want",
    "what", "when", "where", "which", "why", "will", "with", "would", "you", "your",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", content = "value", rename_all = "kebab-case")]
pub enum InputClass {
    ValidCode(Ast),
    BrokenCode(Vec<Diagnostic>),
    Natural(String),
    HelpQuery(String),
}

impl InputClass {
    /// Short label used by the corpus file and logs.
    pub fn label(&self) -> &'static str {
        match self {
            InputClass::ValidCode(_) => "valid-code",
            InputClass::BrokenCode(_) => "broken-code",
            InputClass::Natural(_) => "natural",
            InputClass::HelpQuery(_) => "help-query",
        }
    }
}

pub fn classify(message: &str, registry: &PrimitiveRegistry, context: AgentContext) -> InputClass {
    let text = message.trim();
    if text.is_empty() {
        return InputClass::Natural(String::new());
    }
    let words: Vec<&str> = text.split_whitespace().collect();
    if let [head, name] = words.as_slice() {
        if head.eq_ignore_ascii_case("help") {
            return InputClass::HelpQuery(name.to_lowercase());
        }
    }

    let lexed = match tokenize(text) {
        Ok(lexed) => lexed,
        Err(diags) => {
            let first = words[0].trim_start_matches(['[', '(']).to_lowercase();
            return if registry.lookup(&first).is_some_and(|s| s.is_command()) {
                InputClass::BrokenCode(diags)
            } else {
                InputClass::Natural(text.to_owned())
            };
        }
    };

    let names: Vec<String> = lexed
        .tokens
        .iter()
        .filter(|t| t.kind == TokenKind::Identifier)
        .map(|t| t.lexeme.to_lowercase())
        .collect();
    let known = |w: &str| registry.is_known(w) || registry.color(w).is_some();
    let prose = names
        .iter()
        .any(|w| !known(w) && FUNCTION_WORDS.contains(&w.trim_end_matches(['?', '!', ',', '.'])));
    let recognized = names.iter().filter(|w| known(w) || w.contains('-')).count();
    let first_is_command = lexed
        .tokens
        .first()
        .is_some_and(|t| t.kind == TokenKind::Identifier && registry.lookup(&t.lexeme).is_some());
    let first_is_hyphenated = lexed
        .tokens
        .first()
        .is_some_and(|t| t.kind == TokenKind::Identifier && t.lexeme.contains('-'));

    if prose || (recognized * 2) < names.len() || !(first_is_command || first_is_hyphenated) {
        return InputClass::Natural(text.to_owned());
    }

    match parse(&lexed, registry) {
        Ok(mut ast) => {
            let diags = check_context(&ast, context, registry);
            if diags.is_empty() {
                ast.span = crate::diagnostic::Span::new(0, text.len());
                InputClass::ValidCode(ast)
            } else {
                InputClass::BrokenCode(diags)
            }
        }
        Err(diags) => InputClass::BrokenCode(diags),
    }
}

/// One labeled example from a classification corpus.
#[derive(Debug, Clone, PartialEq, Deserialize, Serialize)]
pub struct CorpusItem {
    pub message: String,
    pub expected: String,
}

#[derive(Debug, Deserialize)]
struct CorpusFile {
    item: Vec<CorpusItem>,
}

/// The shipped corpus (`data/classifier_corpus.toml`).
pub fn builtin_corpus() -> Vec<CorpusItem> {
    parse_corpus(include_str!("../data/classifier_corpus.toml")).expect("builtin corpus parses")
}

pub fn parse_corpus(text: &str) -> Result<Vec<CorpusItem>, toml::de::Error> {
    toml::from_str::<CorpusFile>(text).map(|f| f.item)
}
