//! Random program generator for fuzz tests.
//!
//! Programs are built as syntax trees in the shape the parser produces, so
//! `parse(pretty_print(p))` should give `p` back. Most choices respect agent
//! contexts; with probability `stray` a primitive is picked regardless, which
//! yields programs the context checker must reject.

use crate::ast::{Ast, Block, Expr, Statement};
use crate::diagnostic::Span;
use crate::primitives::{AgentContext, PrimitiveRegistry, PrimitiveSpec, ValueType, Yields};
use crate::runtime::Pcg32;

const WORDS: [&str; 8] = ["hello", "world!", "turtle", "step", "x y", "42", "a-b", "done"];

#[derive(Debug, Clone)]
pub struct GenConfig {
    pub max_statements: usize,
    pub max_depth: usize,
    /// Chance (0..=1) of ignoring the agent context when picking a primitive.
    pub stray: f64,
    /// Chance of attaching a comment to a statement.
    pub comments: f64,
    /// Largest literal passed to `create-turtles`.
    pub max_create: u32,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            max_statements: 4,
            max_depth: 3,
            stray: 0.1,
            comments: 0.1,
            max_create: 5,
        }
    }
}

pub struct ProgramGenerator<'r> {
    rng: Pcg32,
    registry: &'r PrimitiveRegistry,
    config: GenConfig,
}

impl<'r> ProgramGenerator<'r> {
    pub fn new(seed: u64, registry: &'r PrimitiveRegistry, config: GenConfig) -> Self {
        ProgramGenerator {
            rng: Pcg32::new(seed, 7),
            registry,
            config,
        }
    }

    pub fn program(&mut self) -> Ast {
        let n = 1 + self.below(self.config.max_statements);
        let statements = (0..n).map(|_| self.statement(AgentContext::Observer, 0)).collect();
        Ast::new(statements)
    }

    fn below(&mut self, n: usize) -> usize {
        self.rng.below(n.max(1) as u32) as usize
    }

    fn chance(&mut self, p: f64) -> bool {
        self.rng.unit_f64() < p
    }

    fn pick<T: Copy>(&mut self, items: &[T]) -> T {
        items[self.below(items.len())]
    }

    /// Usable specs matching `filter`, legal in `ctx` unless straying.
    fn candidates(&mut self, ctx: AgentContext, filter: impl Fn(&PrimitiveSpec) -> bool) -> Vec<&'r PrimitiveSpec> {
        let stray = self.chance(self.config.stray);
        let all: Vec<&'r PrimitiveSpec> = self.registry.specs().filter(|s| !s.help_only && filter(s)).collect();
        let legal: Vec<_> = all.iter().copied().filter(|s| s.allows(ctx)).collect();
        if stray || legal.is_empty() {
            all
        } else {
            legal
        }
    }

    fn statement(&mut self, ctx: AgentContext, depth: usize) -> Statement {
        let deep = depth >= self.config.max_depth;
        let options = self.candidates(ctx, |s| {
            s.is_command() && !(deep && s.params.iter().any(|p| p.ty == ValueType::Block))
        });
        let spec = self.pick(&options);
        let mut args = Vec::new();
        let mut body_ctx = match spec.body {
            Some(Yields::Agents(kind)) => kind,
            _ => ctx,
        };
        let mut assigned = ValueType::Value;
        for param in &spec.params {
            if param.optional && !self.chance(0.5) {
                break;
            }
            let arg = match param.ty {
                ValueType::Block => Expr::Block(self.block(body_ctx, depth + 1)),
                ValueType::Agentset | ValueType::Agent => {
                    let (expr, kind) = self.agents(ctx, depth);
                    body_ctx = kind;
                    expr
                }
                ValueType::VariableName => {
                    let vars = self.candidates(ctx, |s| s.settable);
                    let var = self.pick(&vars);
                    assigned = var.result.unwrap_or(ValueType::Value);
                    Expr::ident(&var.name)
                }
                ValueType::Number if spec.name == "create-turtles" => {
                    Expr::number(f64::from(self.rng.below(self.config.max_create + 1)))
                }
                ValueType::Value if assigned != ValueType::Value => self.typed(assigned, ctx, depth),
                ty => self.typed(ty, ctx, depth),
            };
            args.push(arg);
        }
        let mut s = Statement::new(&spec.name, args);
        if self.chance(self.config.comments) {
            s.comments.push(self.pick(&WORDS).to_owned());
        }
        s
    }

    fn block(&mut self, ctx: AgentContext, depth: usize) -> Block {
        let n = self.below(3);
        Block {
            statements: (0..n).map(|_| self.statement(ctx, depth)).collect(),
            trailing_comments: Vec::new(),
            span: Span::default(),
        }
    }

    fn typed(&mut self, ty: ValueType, ctx: AgentContext, depth: usize) -> Expr {
        match ty {
            ValueType::Boolean => self.boolean(ctx, depth),
            ValueType::String => self.string(),
            ValueType::Agentset | ValueType::Agent => self.agents(ctx, depth).0,
            ValueType::Number => self.number(ctx, depth),
            _ => match self.below(6) {
                0 => self.string(),
                1 => self.boolean(ctx, depth),
                _ => self.number(ctx, depth),
            },
        }
    }

    fn string(&mut self) -> Expr {
        Expr::String {
            value: self.pick(&WORDS).to_owned(),
            span: Span::default(),
        }
    }

    fn literal(&mut self) -> Expr {
        let n = if self.chance(0.2) {
            f64::from(self.rng.below(100)) / 4.0
        } else {
            f64::from(self.rng.below(20))
        };
        Expr::number(n)
    }

    fn number(&mut self, ctx: AgentContext, depth: usize) -> Expr {
        if depth >= self.config.max_depth + 2 {
            return self.literal();
        }
        match self.below(8) {
            0 | 1 => self.literal(),
            2 => {
                let colors: Vec<&str> = self.registry.colors().map(|(n, _)| n).collect();
                Expr::ColorName {
                    name: self.pick(&colors).to_owned(),
                    span: Span::default(),
                }
            }
            3 => {
                let vars = self.candidates(ctx, |s| {
                    s.is_reporter() && s.params.is_empty() && s.result == Some(ValueType::Number)
                });
                Expr::call(&self.pick(&vars).name, Vec::new())
            }
            4 => Expr::call("random", vec![self.literal()]),
            5 => {
                let (set, _) = self.agents(ctx, depth + 1);
                Expr::call("count", vec![set])
            }
            _ => {
                let op = self.pick(&["+", "-", "*", "/"]);
                let left = self.number(ctx, depth + 1);
                let right = if op == "/" {
                    Expr::number(f64::from(1 + self.rng.below(9)))
                } else {
                    self.number(ctx, depth + 1)
                };
                Expr::call(op, vec![left, right])
            }
        }
    }

    fn boolean(&mut self, ctx: AgentContext, depth: usize) -> Expr {
        let op = self.pick(&["<", ">", "<=", ">=", "=", "!="]);
        let left = self.number(ctx, depth + 1);
        let right = self.number(ctx, depth + 1);
        Expr::call(op, vec![left, right])
    }

    /// An agentset expression and the kind of agents it holds.
    fn agents(&mut self, ctx: AgentContext, depth: usize) -> (Expr, AgentContext) {
        let sets = self.candidates(ctx, |s| {
            s.is_reporter() && s.params.is_empty() && matches!(s.yields, Some(Yields::Agents(_)))
        });
        let spec = self.pick(&sets);
        let kind = match spec.yields {
            Some(Yields::Agents(kind)) => kind,
            _ => unreachable!(),
        };
        let base = Expr::ident(&spec.name);
        if depth < self.config.max_depth && self.chance(0.25) {
            (Expr::call("one-of", vec![base]), kind)
        } else {
            (base, kind)
        }
    }
}

/// Programs that fail to survive `parse(pretty_print(p))`, as
/// `(index, printed source)`.
pub fn round_trip_failures(seed: u64, count: usize, registry: &PrimitiveRegistry) -> Vec<(usize, String)> {
    let config = GenConfig {
        stray: 0.3,
        comments: 0.3,
        ..GenConfig::default()
    };
    let mut gen = ProgramGenerator::new(seed, registry, config);
    let mut failures = Vec::new();
    for i in 0..count {
        let ast = gen.program();
        let text = crate::pretty_print(&ast);
        match crate::parse_source(&text, registry) {
            Ok(back) if back.same_structure(&ast) && crate::pretty_print(&back) == text => {}
            _ => failures.push((i, text)),
        }
    }
    failures
}

#[derive(Debug, Clone, PartialEq)]
pub struct SoundnessReport {
    pub accepted: usize,
    pub rejected: usize,
    /// Checked programs that still hit a context error at run time.
    pub failures: Vec<(String, crate::Diagnostic)>,
}

/// Generates programs until `count` pass the context checker and runs each
/// on a small world.
pub fn soundness_run(seed: u64, count: usize, registry: &PrimitiveRegistry) -> SoundnessReport {
    let mut gen = ProgramGenerator::new(seed, registry, GenConfig::default());
    let mut report = SoundnessReport {
        accepted: 0,
        rejected: 0,
        failures: Vec::new(),
    };
    while report.accepted < count {
        let ast = gen.program();
        if !crate::check_context(&ast, AgentContext::Observer, registry).is_empty() {
            report.rejected += 1;
            continue;
        }
        report.accepted += 1;
        let mut world = crate::runtime::World::new(crate::WorldBounds::square(3), report.accepted as u64)
            .expect("small square world");
        let out = crate::runtime::execute_limited(&ast, &mut world, registry, 200_000);
        if let Some(d) = out.error() {
            if d.code == crate::diagnostic::codes::RUNTIME_CONTEXT {
                report.failures.push((crate::pretty_print(&ast), d.clone()));
            }
        }
    }
    report
}
