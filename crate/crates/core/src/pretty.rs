//! Canonical source rendering.
//!
//! Blocks stay on one line (`[ fd 1 ]`) unless they hold comments, more than
//! one statement, or a nested multi-line block. Infix expressions used as
//! arguments are parenthesized, and a prefix reporter that is followed by an
//! infix operator is parenthesized so it cannot swallow the operator.

use crate::ast::{Ast, Block, Expr, Statement};
use crate::primitives::PrimitiveRegistry;

const INDENT: &str = "  ";

pub fn pretty_print(ast: &Ast) -> String {
    let printer = Printer {
        registry: PrimitiveRegistry::builtin(),
    };
    printer.program(ast)
}

/// Same as [`pretty_print`] with a custom registry (for operator precedence).
pub fn pretty_print_with(ast: &Ast, registry: &PrimitiveRegistry) -> String {
    Printer { registry }.program(ast)
}

/// Integers print without a decimal point; everything else uses the
/// shortest representation that reads back to the same value.
pub fn format_number(value: f64) -> String {
    if value.fract() == 0.0 && value.abs() < 1e15 {
        format!("{}", value as i64)
    } else {
        format!("{value}")
    }
}

struct Printer<'a> {
    registry: &'a PrimitiveRegistry,
}

impl Printer<'_> {
    fn program(&self, ast: &Ast) -> String {
        let mut lines = Vec::new();
        for s in &ast.statements {
            self.statement(s, 0, &mut lines);
        }
        for c in &ast.trailing_comments {
            lines.push(comment(c));
        }
        lines.join("\n")
    }

    fn statement(&self, s: &Statement, depth: usize, lines: &mut Vec<String>) {
        let pad = INDENT.repeat(depth);
        for c in &s.comments {
            lines.push(format!("{pad}{}", comment(c)));
        }
        let mut head = format!("{pad}{}", s.command);
        for arg in &s.args {
            match arg {
                Expr::Block(b) if self.block_is_multiline(b) => {
                    head.push_str(" [");
                    lines.push(head);
                    for inner in &b.statements {
                        self.statement(inner, depth + 1, lines);
                    }
                    for c in &b.trailing_comments {
                        lines.push(format!("{pad}{INDENT}{}", comment(c)));
                    }
                    head = format!("{pad}]");
                }
                Expr::Block(b) => {
                    head.push(' ');
                    head.push_str(&self.inline_block(b));
                }
                other => {
                    head.push(' ');
                    head.push_str(&self.argument(other));
                }
            }
        }
        lines.push(head);
    }

    fn block_is_multiline(&self, b: &Block) -> bool {
        match b.statements.as_slice() {
            [] => !b.trailing_comments.is_empty(),
            [only] => {
                !b.trailing_comments.is_empty()
                    || !only.comments.is_empty()
                    || only
                        .args
                        .iter()
                        .any(|a| matches!(a, Expr::Block(inner) if self.block_is_multiline(inner)))
            }
            _ => true,
        }
    }

    fn inline_block(&self, b: &Block) -> String {
        match b.statements.first() {
            None => "[ ]".to_owned(),
            Some(s) => {
                let mut lines = Vec::new();
                self.statement(s, 0, &mut lines);
                format!("[ {} ]", lines.join(" "))
            }
        }
    }

    fn precedence(&self, expr: &Expr) -> Option<u8> {
        match expr {
            Expr::ReporterCall { name, args, .. } if args.len() == 2 => {
                self.registry.lookup(name).and_then(|s| s.infix)
            }
            _ => None,
        }
    }

    /// An argument of a prefix primitive.
    fn argument(&self, expr: &Expr) -> String {
        if self.precedence(expr).is_some() {
            format!("({})", self.expr(expr, true))
        } else {
            self.expr(expr, true)
        }
    }

    /// `tail` is false when an infix operator follows this expression.
    fn expr(&self, expr: &Expr, tail: bool) -> String {
        match expr {
            Expr::Number { value, .. } => format_number(*value),
            Expr::String { value, .. } => format!("\"{value}\""),
            Expr::ColorName { name, .. } | Expr::Identifier { name, .. } => name.clone(),
            Expr::Block(b) => self.inline_block(b),
            Expr::ReporterCall { name, args, .. } => {
                if let Some(prec) = self.precedence(expr) {
                    let left = match self.precedence(&args[0]) {
                        Some(p) if p < prec => format!("({})", self.expr(&args[0], true)),
                        _ => self.expr(&args[0], false),
                    };
                    let right = match self.precedence(&args[1]) {
                        Some(p) if p <= prec => format!("({})", self.expr(&args[1], true)),
                        _ => self.expr(&args[1], tail),
                    };
                    format!("{left} {name} {right}")
                } else if args.is_empty() {
                    name.clone()
                } else {
                    let mut out = name.clone();
                    for a in args {
                        out.push(' ');
                        out.push_str(&self.argument(a));
                    }
                    if tail {
                        out
                    } else {
                        format!("({out})")
                    }
                }
            }
        }
    }
}

fn comment(text: &str) -> String {
    if text.is_empty() {
        ";".to_owned()
    } else {
        format!("; {text}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_source;

    fn round(src: &str) -> String {
        pretty_print(&parse_source(src, PrimitiveRegistry::builtin()).unwrap())
    }

    #[test]
    fn canonical_input_is_unchanged() {
        for src in [
            "create-turtles 100",
            "ask turtles [ fd random 10 ]",
            "print \"hello world!\"",
            "ask patches [ set pcolor red ]",
            "fd (1 + random 2)",
            "print (1 + 2 * 3)",
            "ask turtles [ ]",
        ] {
            assert_eq!(round(src), src);
        }
    }

    #[test]
    fn draft_listing_layout() {
        let listing = "; Create 10 turtles using the breed name \"turtles\"\n\
                       create-turtles 10 [\n  \
                         ; Set the turtles' positions randomly\n  \
                         setxy random-xcor random-ycor\n\
                       ]";
        assert_eq!(round(listing), listing);
    }

    #[test]
    fn normalizes_spacing_and_case() {
        assert_eq!(round("ASK   turtles[fd 1]"), "ask turtles [ fd 1 ]");
        assert_eq!(round("fd 1 + 2"), "fd (1 + 2)");
        assert_eq!(round("fd (((3)))"), "fd 3");
    }

    #[test]
    fn numbers() {
        assert_eq!(format_number(10.0), "10");
        assert_eq!(format_number(-0.0), "0");
        assert_eq!(format_number(2.5), "2.5");
        assert_eq!(format_number(9.9), "9.9");
        assert_eq!(format_number(0.1 + 0.2), "0.30000000000000004");
    }

    #[test]
    fn prefix_reporter_before_operator_is_wrapped() {
        let ast = Ast::new(vec![Statement::new(
            "print",
            vec![Expr::call(
                "+",
                vec![
                    Expr::call(
                        "*",
                        vec![Expr::number(1.0), Expr::call("random", vec![Expr::number(2.0)])],
                    ),
                    Expr::number(3.0),
                ],
            )],
        )]);
        let text = pretty_print(&ast);
        assert_eq!(text, "print (1 * (random 2) + 3)");
        let back = parse_source(&text, PrimitiveRegistry::builtin()).unwrap();
        assert!(back.same_structure(&ast));
    }

    #[test]
    fn multi_statement_blocks_break_lines() {
        assert_eq!(
            round("ask turtles [ rt 90 fd 1 ]"),
            "ask turtles [\n  right 90\n  fd 1\n]"
        );
    }
}
