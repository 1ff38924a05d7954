//! A hybrid natural-language and Logo command center for agent-based models.

pub mod assistant;
pub mod ast;
pub mod classifier;
pub mod context;
pub mod diagnostic;
pub mod dialog;
#[cfg(any(test, feature = "testing"))]
pub mod gen;
pub mod lexer;
pub mod parser;
pub mod pretty;
pub mod primitives;
pub mod runtime;
pub mod session;

pub use ast::{Ast, Block, Expr, Statement};
pub use classifier::{classify, InputClass};
pub use context::check_context;
pub use diagnostic::{Diagnostic, Severity, Span};
pub use lexer::{tokenize, Token, TokenKind};
pub use parser::{parse, parse_source};
pub use pretty::pretty_print;
pub use primitives::{AgentContext, HelpEntry, PrimitiveRegistry, PrimitiveSpec};
pub use runtime::{execute, new_world, snapshot, ExecOutcome, ExecStatus, ViewModel, World, WorldBounds};

/// Parses `source` and, if that succeeds, checks it as observer code.
/// Returns the tree (when parsing succeeded) and every diagnostic found.
pub fn check_source(source: &str, registry: &PrimitiveRegistry) -> (Option<Ast>, Vec<Diagnostic>) {
    match parse_source(source, registry) {
        Ok(ast) => {
            let diags = check_context(&ast, AgentContext::Observer, registry);
            (Some(ast), diags)
        }
        Err(diags) => (None, diags),
    }
}
