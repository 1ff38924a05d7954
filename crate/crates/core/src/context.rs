//! Agent-context checking.
//!
//! Top-level code runs as the observer; a command block runs in the context
//! its primitive declares (`ask turtles [...]` runs as turtles). Every
//! primitive and every variable named by `set` must be legal where it
//! appears.

use crate::ast::{Ast, Expr, Statement};
use crate::diagnostic::{codes, Diagnostic, Span};
use crate::primitives::{AgentContext, PrimitiveRegistry, PrimitiveSpec, ValueType, Yields};

/// The context-error sentence, e.g. for `color` used by a patch.
pub fn context_message(spec: &PrimitiveSpec, ctx: AgentContext) -> String {
    let name = spec.name.to_uppercase();
    let article = if ctx == AgentContext::Observer { "an" } else { "a" };
    format!(
        "You can't use {name} in {article} {ctx} context, because {name} is {}-only.",
        spec.context_list()
    )
}

pub fn check_context(ast: &Ast, start: AgentContext, registry: &PrimitiveRegistry) -> Vec<Diagnostic> {
    let mut checker = Checker {
        registry,
        diags: Vec::new(),
    };
    for s in &ast.statements {
        checker.statement(s, start);
    }
    checker.diags
}

/// Kind of agents an agent or agentset expression evaluates to, when it can
/// be known without running the program.
pub fn agent_kind(expr: &Expr, registry: &PrimitiveRegistry) -> Option<AgentContext> {
    let (name, args) = match expr {
        Expr::Identifier { name, .. } => (name, &[][..]),
        Expr::ReporterCall { name, args, .. } => (name, args.as_slice()),
        _ => return None,
    };
    match registry.lookup(name)?.yields? {
        Yields::Agents(kind) => Some(kind),
        Yields::FromArgument => args.first().and_then(|a| agent_kind(a, registry)),
    }
}

/// Context a command's block argument runs in.
pub fn block_context(spec: &PrimitiveSpec, args: &[Expr], registry: &PrimitiveRegistry) -> Option<AgentContext> {
    match spec.body? {
        Yields::Agents(kind) => Some(kind),
        Yields::FromArgument => {
            let agents = spec
                .params
                .iter()
                .zip(args)
                .find(|(p, _)| matches!(p.ty, ValueType::Agentset | ValueType::Agent))?;
            agent_kind(agents.1, registry)
        }
    }
}

struct Checker<'a> {
    registry: &'a PrimitiveRegistry,
    diags: Vec<Diagnostic>,
}

impl Checker<'_> {
    fn require(&mut self, spec: &PrimitiveSpec, ctx: AgentContext, span: Span) {
        if !spec.allows(ctx) {
            self.diags.push(
                Diagnostic::error(codes::WRONG_CONTEXT, context_message(spec, ctx), span)
                    .with_related(spec.name.clone()),
            );
        }
    }

    fn statement(&mut self, s: &Statement, ctx: AgentContext) {
        let Some(spec) = self.registry.lookup(&s.command) else {
            return;
        };
        let head = Span::new(s.span.start, s.span.start + s.command.len().min(s.span.len()));
        self.require(spec, ctx, head);

        let body_ctx = block_context(spec, &s.args, self.registry);
        for (param, arg) in spec.params.iter().zip(&s.args) {
            match (param.ty, arg) {
                (ValueType::VariableName, Expr::Identifier { name, span }) => {
                    if let Some(var) = self.registry.lookup(name) {
                        self.require(var, ctx, *span);
                    }
                }
                (_, Expr::Block(block)) => {
                    if let Some(inner) = body_ctx {
                        for s in &block.statements {
                            self.statement(s, inner);
                        }
                    }
                }
                (_, expr) => self.expr(expr, ctx),
            }
        }
    }

    fn expr(&mut self, expr: &Expr, ctx: AgentContext) {
        match expr {
            Expr::Identifier { name, span } => {
                if let Some(spec) = self.registry.lookup(name) {
                    self.require(spec, ctx, *span);
                }
            }
            Expr::ReporterCall { name, args, span } => {
                if let Some(spec) = self.registry.lookup(name) {
                    let head = if spec.is_infix() || args.is_empty() {
                        *span
                    } else {
                        Span::new(span.start, span.start + name.len().min(span.len()))
                    };
                    self.require(spec, ctx, head);
                }
                for a in args {
                    self.expr(a, ctx);
                }
            }
            Expr::Block(block) => {
                for s in &block.statements {
                    self.statement(s, ctx);
                }
            }
            Expr::Number { .. } | Expr::String { .. } | Expr::ColorName { .. } => {}
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parser::parse_source;

    fn check(src: &str) -> Vec<Diagnostic> {
        let reg = PrimitiveRegistry::builtin();
        let ast = parse_source(src, reg).unwrap();
        check_context(&ast, AgentContext::Observer, reg)
    }

    #[test]
    fn color_in_patch_context() {
        let src = "ask patches [ set color red ]";
        let d = check(src);
        assert_eq!(d.len(), 1);
        assert_eq!(
            d[0].message,
            "You can't use COLOR in a patch context, because COLOR is turtle/link-only."
        );
        assert_eq!(&src[d[0].span.range()], "color");
        assert_eq!(d[0].related, ["color"]);
        assert_eq!(d[0].code, codes::WRONG_CONTEXT);
    }

    #[test]
    fn legal_programs_are_clean() {
        for src in [
            "ask turtles [ fd random 10 ]",
            "ask patches [ set pcolor red ]",
            "create-turtles 10 [ setxy random-xcor random-ycor ]",
            "ask one-of turtles [ set color blue ]",
            "ask turtles [ ask neighbors [ set pcolor green ] ]",
            "ask turtles [ set pcolor yellow ]",
            "print count turtles",
        ] {
            assert!(check(src).is_empty(), "{src}: {:?}", check(src));
        }
    }

    #[test]
    fn observer_errors() {
        let d = check("fd 1");
        assert_eq!(
            d[0].message,
            "You can't use FD in an observer context, because FD is turtle-only."
        );
        let d = check("ask turtles [ create-turtles 1 ]");
        assert_eq!(
            d[0].message,
            "You can't use CREATE-TURTLES in a turtle context, because CREATE-TURTLES is observer-only."
        );
        assert_eq!(check("print heading").len(), 1);
        assert_eq!(check("ask patches [ print neighbors fd 1 ]").len(), 1);
        assert_eq!(check("print pxcor").len(), 1);
    }

    #[test]
    fn nested_contexts() {
        let d = check("ask turtles [ ask patches [ set heading 3 ] ]");
        assert_eq!(d.len(), 1);
        assert!(d[0].message.starts_with("You can't use HEADING in a patch context"));
        let d = check("ask one-of patches [ die ]");
        assert_eq!(d.len(), 1);
    }
}
