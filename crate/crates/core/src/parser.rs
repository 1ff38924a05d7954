//! Arity-directed recursive descent parser.
//!
//! The dialect has no call parentheses, so the registry decides how many
//! arguments each primitive consumes. Grammar, informally:
//!
//! ```text
//! program    -> statement*
//! statement  -> COMMAND argument*          ; count and kinds from the registry
//! argument   -> block | variable | expr
//! block      -> '[' statement* ']'
//! expr       -> primary (INFIX expr)*      ; precedence climbing, left assoc
//! primary    -> NUMBER | STRING | COLOR | '(' expr ')'
//!             | REPORTER expr*             ; each argument is a full expr
//! ```
//!
//! On a broken statement the parser records a diagnostic and skips ahead to
//! the next command word or closing bracket, so one call reports every
//! recoverable problem.

use crate::ast::{Ast, Block, Expr, Statement};
use crate::diagnostic::{codes, Diagnostic, Span};
use crate::lexer::{tokenize, Comment, Lexed, Token, TokenKind};
use crate::primitives::{PrimitiveRegistry, PrimitiveSpec, ValueType};

/// Parse an already tokenized program.
pub fn parse(lexed: &Lexed, registry: &PrimitiveRegistry) -> Result<Ast, Vec<Diagnostic>> {
    let mut parser = Parser {
        tokens: &lexed.tokens,
        comments: &lexed.comments,
        pos: 0,
        next_comment: 0,
        last_end: 0,
        registry,
        diags: Vec::new(),
    };
    let ast = parser.program();
    if parser.diags.is_empty() {
        Ok(ast)
    } else {
        Err(parser.diags)
    }
}

/// Tokenize and parse in one step. The resulting tree spans the whole source.
pub fn parse_source(source: &str, registry: &PrimitiveRegistry) -> Result<Ast, Vec<Diagnostic>> {
    let lexed = tokenize(source)?;
    let mut ast = parse(&lexed, registry)?;
    ast.span = Span::new(0, source.len());
    Ok(ast)
}

/// Static result type of an expression.
pub fn type_of(expr: &Expr, registry: &PrimitiveRegistry) -> ValueType {
    match expr {
        Expr::Number { .. } | Expr::ColorName { .. } => ValueType::Number,
        Expr::String { .. } => ValueType::String,
        Expr::Block(_) => ValueType::Block,
        Expr::Identifier { name, .. } | Expr::ReporterCall { name, .. } => {
            registry.lookup(name).and_then(|s| s.result).unwrap_or(ValueType::Value)
        }
    }
}

fn inputs(n: usize) -> String {
    if n == 1 {
        "1 input".to_owned()
    } else {
        format!("{n} inputs")
    }
}

struct Parser<'a> {
    tokens: &'a [Token],
    comments: &'a [Comment],
    pos: usize,
    next_comment: usize,
    last_end: usize,
    registry: &'a PrimitiveRegistry,
    diags: Vec<Diagnostic>,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&'a Token> {
        self.tokens.get(self.pos)
    }

    fn peek_kind(&self) -> Option<TokenKind> {
        self.peek().map(|t| t.kind)
    }

    fn bump(&mut self) -> Option<&'a Token> {
        let tok = self.tokens.get(self.pos)?;
        self.pos += 1;
        self.last_end = tok.span.end;
        Some(tok)
    }

    fn error(&mut self, code: &str, message: String, span: Span) -> &mut Diagnostic {
        self.diags.push(Diagnostic::error(code, message, span));
        self.diags.last_mut().expect("just pushed")
    }

    fn take_comments_before(&mut self, offset: usize) -> Vec<String> {
        let mut out = Vec::new();
        while let Some(c) = self.comments.get(self.next_comment) {
            if c.span.start >= offset {
                break;
            }
            out.push(c.text.clone());
            self.next_comment += 1;
        }
        out
    }

    fn is_command_word(&self, tok: &Token) -> bool {
        tok.is(TokenKind::Identifier) && self.registry.lookup(&tok.lexeme).is_some_and(PrimitiveSpec::is_command)
    }

    /// True where an argument cannot start: end of input, a closer, or the
    /// next command.
    fn at_argument_end(&self) -> bool {
        match self.peek() {
            None => true,
            Some(t) => matches!(t.kind, TokenKind::CloseBracket | TokenKind::CloseParen) || self.is_command_word(t),
        }
    }

    fn program(&mut self) -> Ast {
        let mut statements = Vec::new();
        while let Some(tok) = self.peek() {
            if tok.is(TokenKind::CloseBracket) {
                self.bump();
                self.error(
                    codes::UNBALANCED_BLOCK,
                    "This closing bracket has no matching opening bracket.".into(),
                    tok.span,
                );
                continue;
            }
            match self.statement() {
                Some(s) => statements.push(s),
                None => self.recover(),
            }
        }
        let trailing_comments = self.take_comments_before(usize::MAX);
        let start = self
            .tokens
            .first()
            .map(|t| t.span.start)
            .into_iter()
            .chain(self.comments.first().map(|c| c.span.start))
            .min()
            .unwrap_or(0);
        let end = self
            .tokens
            .last()
            .map(|t| t.span.end)
            .into_iter()
            .chain(self.comments.last().map(|c| c.span.end))
            .max()
            .unwrap_or(0);
        Ast {
            statements,
            trailing_comments,
            span: Span::new(start, end),
        }
    }

    /// Skip to the next statement boundary at the current nesting level.
    fn recover(&mut self) {
        while let Some(tok) = self.peek() {
            match tok.kind {
                TokenKind::CloseBracket => break,
                TokenKind::OpenBracket => self.skip_brackets(),
                _ if self.is_command_word(tok) => break,
                _ => {
                    self.bump();
                }
            }
        }
    }

    fn skip_brackets(&mut self) {
        let open = self.bump().expect("caller saw an open bracket");
        let mut depth = 1usize;
        while let Some(tok) = self.bump() {
            match tok.kind {
                TokenKind::OpenBracket => depth += 1,
                TokenKind::CloseBracket => {
                    depth -= 1;
                    if depth == 0 {
                        return;
                    }
                }
                _ => {}
            }
        }
        self.error(
            codes::UNBALANCED_BLOCK,
            "This opening bracket has no matching closing bracket.".into(),
            open.span,
        );
    }

    fn statement(&mut self) -> Option<Statement> {
        let head = self.peek()?;
        let comments = self.take_comments_before(head.span.start);
        self.bump();
        let upper = head.lexeme.to_uppercase();

        let spec = match head.kind {
            TokenKind::Identifier => self.registry.lookup(&head.lexeme),
            TokenKind::OpenBracket => {
                self.pos -= 1;
                self.skip_brackets();
                self.error(
                    codes::EXPECTED_COMMAND,
                    "Expected a command here, but found a block.".into(),
                    head.span,
                );
                return None;
            }
            TokenKind::CloseParen | TokenKind::OpenParen => {
                self.error(
                    codes::UNEXPECTED_TOKEN,
                    format!("Unexpected `{}`.", head.lexeme),
                    head.span,
                );
                return None;
            }
            _ => None,
        };

        let Some(spec) = spec else {
            if head.is(TokenKind::Identifier) && !self.registry.is_known(&head.lexeme) {
                self.error(
                    codes::UNKNOWN_PRIMITIVE,
                    format!("Nothing named {upper} has been defined."),
                    head.span,
                )
                .related
                .push(head.lexeme.to_lowercase());
            } else {
                self.error(
                    codes::EXPECTED_COMMAND,
                    format!("Expected a command here, but found {}.", head.lexeme),
                    head.span,
                );
            }
            return None;
        };

        if spec.help_only {
            self.error(
                codes::UNSUPPORTED_PRIMITIVE,
                format!("{upper} can't be used in the command center."),
                head.span,
            )
            .related
            .push(spec.name.clone());
            return None;
        }
        if !spec.is_command() {
            self.error(
                codes::EXPECTED_COMMAND,
                format!("Expected a command here, but {upper} is a reporter."),
                head.span,
            )
            .related
            .push(spec.name.clone());
            return None;
        }

        let args = self.arguments(spec, head)?;
        Some(Statement {
            command: spec.name.clone(),
            args,
            span: Span::new(head.span.start, self.last_end),
            comments,
        })
    }

    fn missing_argument(&mut self, spec: &PrimitiveSpec, head: &Token) {
        self.error(
            codes::MISSING_ARGUMENT,
            format!("{} expected {}.", head.lexeme.to_uppercase(), inputs(spec.min_arity())),
            head.span,
        )
        .related
        .push(spec.name.clone());
    }

    fn check_type(&mut self, spec: &PrimitiveSpec, expected: ValueType, expr: &Expr) {
        let actual = type_of(expr, self.registry);
        if !expected.accepts(actual) {
            self.error(
                codes::TYPE_MISMATCH,
                format!(
                    "{} expected this input to be {}, but got {} instead.",
                    spec.name.to_uppercase(),
                    expected.describe(),
                    actual.describe()
                ),
                expr.span(),
            )
            .related
            .push(spec.name.clone());
        }
    }

    fn arguments(&mut self, spec: &PrimitiveSpec, head: &Token) -> Option<Vec<Expr>> {
        let mut args = Vec::with_capacity(spec.params.len());
        // A value that follows a variable name takes the variable's type.
        let mut assigned: Option<ValueType> = None;
        for param in &spec.params {
            match param.ty {
                ValueType::Block => {
                    if self.peek_kind() == Some(TokenKind::OpenBracket) {
                        args.push(Expr::Block(self.block()?));
                    } else if param.optional {
                        break;
                    } else {
                        self.missing_argument(spec, head);
                        return None;
                    }
                }
                ValueType::VariableName => {
                    if self.at_argument_end() {
                        self.missing_argument(spec, head);
                        return None;
                    }
                    let var = self.variable()?;
                    if let Expr::Identifier { name, .. } = &var {
                        assigned = self.registry.lookup(name).filter(|s| s.settable).and_then(|s| s.result);
                    }
                    args.push(var);
                }
                ty => {
                    let ty = match (ty, assigned.take()) {
                        (ValueType::Value, Some(var_ty)) => var_ty,
                        (ty, _) => ty,
                    };
                    if self.at_argument_end() {
                        if param.optional {
                            break;
                        }
                        self.missing_argument(spec, head);
                        return None;
                    }
                    let expr = self.expression(0)?;
                    self.check_type(spec, ty, &expr);
                    args.push(expr);
                }
            }
        }
        Some(args)
    }

    fn variable(&mut self) -> Option<Expr> {
        let tok = self.peek()?;
        if !tok.is(TokenKind::Identifier) {
            let expr = self.expression(0)?;
            self.error(
                codes::NOT_SETTABLE,
                "This isn't something you can use SET on.".into(),
                expr.span(),
            );
            return Some(expr);
        }
        self.bump();
        match self.registry.lookup(&tok.lexeme) {
            Some(spec) if spec.settable => Some(Expr::Identifier {
                name: spec.name.clone(),
                span: tok.span,
            }),
            Some(_) => {
                self.error(
                    codes::NOT_SETTABLE,
                    "This isn't something you can use SET on.".into(),
                    tok.span,
                )
                .related
                .push(tok.lexeme.to_lowercase());
                Some(Expr::Identifier {
                    name: tok.lexeme.to_lowercase(),
                    span: tok.span,
                })
            }
            None => {
                let code = if self.registry.color(&tok.lexeme).is_some() {
                    codes::NOT_SETTABLE
                } else {
                    codes::UNKNOWN_IDENTIFIER
                };
                let message = if code == codes::NOT_SETTABLE {
                    "This isn't something you can use SET on.".to_owned()
                } else {
                    format!("Nothing named {} has been defined.", tok.lexeme.to_uppercase())
                };
                self.error(code, message, tok.span)
                    .related
                    .push(tok.lexeme.to_lowercase());
                Some(Expr::Identifier {
                    name: tok.lexeme.to_lowercase(),
                    span: tok.span,
                })
            }
        }
    }

    fn block(&mut self) -> Option<Block> {
        let open = self.bump().expect("caller saw an open bracket");
        let mut statements = Vec::new();
        loop {
            match self.peek() {
                None => {
                    self.error(
                        codes::UNBALANCED_BLOCK,
                        "This opening bracket has no matching closing bracket.".into(),
                        open.span,
                    );
                    return None;
                }
                Some(t) if t.is(TokenKind::CloseBracket) => {
                    let trailing_comments = self.take_comments_before(t.span.start);
                    self.bump();
                    return Some(Block {
                        statements,
                        trailing_comments,
                        span: open.span.to(t.span),
                    });
                }
                Some(_) => match self.statement() {
                    Some(s) => statements.push(s),
                    None => self.recover(),
                },
            }
        }
    }

    fn infix_spec(&self) -> Option<(&'a PrimitiveSpec, u8)> {
        let tok = self.peek()?;
        if !tok.is(TokenKind::Identifier) {
            return None;
        }
        let spec = self.registry.lookup(&tok.lexeme)?;
        spec.infix.map(|p| (spec, p))
    }

    fn expression(&mut self, min_prec: u8) -> Option<Expr> {
        let mut lhs = self.primary()?;
        while let Some((spec, prec)) = self.infix_spec() {
            if prec < min_prec {
                break;
            }
            let op = self.bump().expect("peeked");
            if self.at_argument_end() {
                self.missing_argument(spec, op);
                return None;
            }
            let rhs = self.expression(prec + 1)?;
            self.check_type(spec, spec.params[0].ty, &lhs);
            self.check_type(spec, spec.params[1].ty, &rhs);
            let span = lhs.span().to(rhs.span());
            lhs = Expr::ReporterCall {
                name: spec.name.clone(),
                args: vec![lhs, rhs],
                span,
            };
        }
        Some(lhs)
    }

    fn primary(&mut self) -> Option<Expr> {
        let Some(tok) = self.peek() else {
            let span = Span::new(self.last_end, self.last_end);
            self.error(codes::MISSING_ARGUMENT, "Expected an input here.".into(), span);
            return None;
        };
        match tok.kind {
            TokenKind::Number => {
                self.bump();
                Some(Expr::Number {
                    value: tok.number().expect("lexer validated the number"),
                    span: tok.span,
                })
            }
            TokenKind::String => {
                self.bump();
                Some(Expr::String {
                    value: tok.string_value().expect("string token").to_owned(),
                    span: tok.span,
                })
            }
            TokenKind::OpenParen => {
                self.bump();
                if self.at_argument_end() {
                    self.error(
                        codes::MISSING_ARGUMENT,
                        "Expected an input inside the parentheses.".into(),
                        tok.span,
                    );
                    return None;
                }
                let inner = self.expression(0)?;
                if self.peek_kind() == Some(TokenKind::CloseParen) {
                    self.bump();
                    Some(inner)
                } else {
                    self.error(
                        codes::UNEXPECTED_TOKEN,
                        "Expected a closing parenthesis.".into(),
                        tok.span,
                    );
                    None
                }
            }
            TokenKind::OpenBracket => {
                self.skip_brackets();
                self.error(codes::UNEXPECTED_TOKEN, "A block is not allowed here.".into(), tok.span);
                None
            }
            TokenKind::CloseBracket | TokenKind::CloseParen => {
                self.error(codes::MISSING_ARGUMENT, "Expected an input here.".into(), tok.span);
                None
            }
            TokenKind::Identifier => self.identifier_expr(tok),
        }
    }

    fn identifier_expr(&mut self, tok: &'a Token) -> Option<Expr> {
        if self.registry.color(&tok.lexeme).is_some() {
            self.bump();
            return Some(Expr::ColorName {
                name: tok.lexeme.to_lowercase(),
                span: tok.span,
            });
        }
        let Some(spec) = self.registry.lookup(&tok.lexeme) else {
            self.bump();
            self.error(
                codes::UNKNOWN_IDENTIFIER,
                format!("Nothing named {} has been defined.", tok.lexeme.to_uppercase()),
                tok.span,
            )
            .related
            .push(tok.lexeme.to_lowercase());
            return Some(Expr::Identifier {
                name: tok.lexeme.to_lowercase(),
                span: tok.span,
            });
        };
        if spec.help_only {
            self.bump();
            self.error(
                codes::UNSUPPORTED_PRIMITIVE,
                format!("{} can't be used in the command center.", tok.lexeme.to_uppercase()),
                tok.span,
            )
            .related
            .push(spec.name.clone());
            return None;
        }
        if spec.is_command() || spec.is_infix() {
            self.bump();
            self.missing_argument(spec, tok);
            return None;
        }
        self.bump();
        if spec.params.is_empty() {
            let span = tok.span;
            return Some(if spec.result == Some(ValueType::Agentset) {
                Expr::Identifier {
                    name: spec.name.clone(),
                    span,
                }
            } else {
                Expr::ReporterCall {
                    name: spec.name.clone(),
                    args: Vec::new(),
                    span,
                }
            });
        }
        let mut args = Vec::with_capacity(spec.params.len());
        for param in &spec.params {
            if self.at_argument_end() {
                self.missing_argument(spec, tok);
                return None;
            }
            let arg = self.expression(0)?;
            self.check_type(spec, param.ty, &arg);
            args.push(arg);
        }
        Some(Expr::ReporterCall {
            name: spec.name.clone(),
            args,
            span: Span::new(tok.span.start, self.last_end),
        })
    }
}
