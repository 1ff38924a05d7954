//! Syntax tree for parsed command sequences.
//!
//! Names are stored in canonical lower-case form (aliases resolved); spans
//! point at the original, case-preserving source text.

use serde::{Deserialize, Serialize};

use crate::diagnostic::Span;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Ast {
    pub statements: Vec<Statement>,
    /// Comments after the last statement.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trailing_comments: Vec<String>,
    pub span: Span,
}

/// A command call. Comments that precede it are attached as leading trivia.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Statement {
    pub command: String,
    pub args: Vec<Expr>,
    pub span: Span,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub comments: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Block {
    pub statements: Vec<Statement>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trailing_comments: Vec<String>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "expr", rename_all = "kebab-case")]
pub enum Expr {
    Number {
        value: f64,
        span: Span,
    },
    String {
        value: String,
        span: Span,
    },
    ColorName {
        name: String,
        span: Span,
    },
    /// Agentset names (`turtles`) and variable names in `set`.
    Identifier {
        name: String,
        span: Span,
    },
    /// Prefix reporters and infix operators (two arguments, left first).
    ReporterCall {
        name: String,
        args: Vec<Expr>,
        span: Span,
    },
    Block(Block),
}

impl Expr {
    pub fn span(&self) -> Span {
        match self {
            Expr::Number { span, .. }
            | Expr::String { span, .. }
            | Expr::ColorName { span, .. }
            | Expr::Identifier { span, .. }
            | Expr::ReporterCall { span, .. } => *span,
            Expr::Block(b) => b.span,
        }
    }

    pub fn number(value: f64) -> Expr {
        Expr::Number {
            value,
            span: Span::default(),
        }
    }

    pub fn ident(name: &str) -> Expr {
        Expr::Identifier {
            name: name.to_owned(),
            span: Span::default(),
        }
    }

    pub fn call(name: &str, args: Vec<Expr>) -> Expr {
        Expr::ReporterCall {
            name: name.to_owned(),
            args,
            span: Span::default(),
        }
    }

    pub fn block(statements: Vec<Statement>) -> Expr {
        Expr::Block(Block {
            statements,
            trailing_comments: Vec::new(),
            span: Span::default(),
        })
    }

    fn clear_spans(&mut self) {
        match self {
            Expr::Number { span, .. }
            | Expr::String { span, .. }
            | Expr::ColorName { span, .. }
            | Expr::Identifier { span, .. } => *span = Span::default(),
            Expr::ReporterCall { args, span, .. } => {
                *span = Span::default();
                args.iter_mut().for_each(Expr::clear_spans);
            }
            Expr::Block(b) => b.clear_spans(),
        }
    }

    fn visit_spans(&self, parent: Span, f: &mut impl FnMut(Span, Span)) {
        f(parent, self.span());
        match self {
            Expr::ReporterCall { args, span, .. } => args.iter().for_each(|a| a.visit_spans(*span, f)),
            Expr::Block(b) => b.statements.iter().for_each(|s| s.visit_spans(b.span, f)),
            _ => {}
        }
    }
}

impl Statement {
    pub fn new(command: &str, args: Vec<Expr>) -> Statement {
        Statement {
            command: command.to_owned(),
            args,
            span: Span::default(),
            comments: Vec::new(),
        }
    }

    pub fn with_comment(mut self, text: &str) -> Statement {
        self.comments.push(text.to_owned());
        self
    }

    fn clear_spans(&mut self) {
        self.span = Span::default();
        self.args.iter_mut().for_each(Expr::clear_spans);
    }

    fn visit_spans(&self, parent: Span, f: &mut impl FnMut(Span, Span)) {
        f(parent, self.span);
        self.args.iter().for_each(|a| a.visit_spans(self.span, f));
    }
}

impl Block {
    fn clear_spans(&mut self) {
        self.span = Span::default();
        self.statements.iter_mut().for_each(Statement::clear_spans);
    }
}

impl Ast {
    pub fn new(statements: Vec<Statement>) -> Ast {
        Ast {
            statements,
            trailing_comments: Vec::new(),
            span: Span::default(),
        }
    }

    /// Copy with every span zeroed, for structural comparison.
    pub fn without_spans(&self) -> Ast {
        let mut copy = self.clone();
        copy.span = Span::default();
        copy.statements.iter_mut().for_each(Statement::clear_spans);
        copy
    }

    /// Structural equality: same tree and comments, spans ignored.
    pub fn same_structure(&self, other: &Ast) -> bool {
        self.without_spans() == other.without_spans()
    }

    /// Calls `f(parent, child)` for every node span in the tree.
    pub fn visit_spans(&self, mut f: impl FnMut(Span, Span)) {
        for s in &self.statements {
            s.visit_spans(self.span, &mut f);
        }
    }

    pub fn is_empty(&self) -> bool {
        self.statements.is_empty()
    }
}
