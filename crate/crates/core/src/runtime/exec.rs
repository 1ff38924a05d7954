//! Tree-walking interpreter.

use serde::{Deserialize, Serialize};

use super::value::{AgentRef, AgentsetKind, Value};
use super::{normalize_heading, wrap_color, Turtle, World, BASE_COLORS, MAX_TURTLES};
use crate::ast::{Ast, Expr, Statement};
use crate::context::context_message;
use crate::diagnostic::{codes, Diagnostic, Span};
use crate::pretty::format_number;
use crate::primitives::{AgentContext, PrimitiveRegistry, PrimitiveSpec};

/// Upper bound on statements plus reporter calls per `execute`.
pub const STEP_LIMIT: u64 = 5_000_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", content = "diagnostic", rename_all = "kebab-case")]
pub enum ExecStatus {
    Success,
    RuntimeError(Diagnostic),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExecOutcome {
    pub status: ExecStatus,
    /// Lines printed by this run only.
    pub output_lines: Vec<String>,
}

impl ExecOutcome {
    pub fn is_success(&self) -> bool {
        self.status == ExecStatus::Success
    }

    pub fn error(&self) -> Option<&Diagnostic> {
        match &self.status {
            ExecStatus::Success => None,
            ExecStatus::RuntimeError(d) => Some(d),
        }
    }
}

/// Runs `ast` as the observer. The world is updated in place; on a runtime
/// error, effects of statements that already ran are kept.
pub fn execute(ast: &Ast, world: &mut World, registry: &PrimitiveRegistry) -> ExecOutcome {
    execute_limited(ast, world, registry, STEP_LIMIT)
}

/// [`execute`] with a custom step budget.
pub fn execute_limited(ast: &Ast, world: &mut World, registry: &PrimitiveRegistry, limit: u64) -> ExecOutcome {
    let mut interp = Interp {
        world,
        registry,
        output: Vec::new(),
        steps: 0,
        limit,
    };
    let status = match interp.block(&ast.statements, Agent::Observer) {
        Ok(_) => ExecStatus::Success,
        Err(d) => ExecStatus::RuntimeError(d),
    };
    ExecOutcome {
        status,
        output_lines: interp.output,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Agent {
    Observer,
    Turtle(u64),
    Patch(usize),
}

impl Agent {
    fn context(self) -> AgentContext {
        match self {
            Agent::Observer => AgentContext::Observer,
            Agent::Turtle(_) => AgentContext::Turtle,
            Agent::Patch(_) => AgentContext::Patch,
        }
    }
}

impl From<AgentRef> for Agent {
    fn from(r: AgentRef) -> Self {
        match r {
            AgentRef::Turtle(id) => Agent::Turtle(id),
            AgentRef::Patch(i) => Agent::Patch(i),
        }
    }
}

#[derive(Debug, PartialEq)]
enum Flow {
    Continue,
    /// The running turtle died; the rest of its block is skipped.
    Died,
}

type Res<T> = Result<T, Diagnostic>;

struct Interp<'a> {
    world: &'a mut World,
    registry: &'a PrimitiveRegistry,
    output: Vec<String>,
    steps: u64,
    limit: u64,
}

/// Order in which an agentset's members run a block: turtles by id,
/// patches row-major. Agentsets are built already sorted, so this only
/// has to drop turtles that died since the set was taken.
fn iteration_order(world: &World, members: &[AgentRef]) -> Vec<AgentRef> {
    members
        .iter()
        .copied()
        .filter(|m| match m {
            AgentRef::Turtle(id) => world.turtles.contains_key(id),
            AgentRef::Patch(_) => true,
        })
        .collect()
}

fn upper(name: &str) -> String {
    name.to_uppercase()
}

impl Interp<'_> {
    fn tick(&mut self, span: Span) -> Res<()> {
        self.steps += 1;
        if self.steps > self.limit {
            return Err(Diagnostic::error(
                codes::STEP_LIMIT,
                format!("Stopped after {} steps.", self.limit),
                span,
            ));
        }
        Ok(())
    }

    fn alive(&self, agent: Agent) -> bool {
        match agent {
            Agent::Turtle(id) => self.world.turtles.contains_key(&id),
            _ => true,
        }
    }

    fn block(&mut self, statements: &[Statement], agent: Agent) -> Res<Flow> {
        for s in statements {
            if self.statement(s, agent)? == Flow::Died || !self.alive(agent) {
                return Ok(Flow::Died);
            }
        }
        Ok(Flow::Continue)
    }

    fn lookup(&self, name: &str, span: Span) -> Res<PrimitiveSpec> {
        let spec = self.registry.lookup(name).ok_or_else(|| {
            Diagnostic::error(
                codes::UNKNOWN_PRIMITIVE,
                format!("Nothing named {} has been defined.", upper(name)),
                span,
            )
        })?;
        if spec.help_only {
            return Err(Diagnostic::error(
                codes::UNSUPPORTED_PRIMITIVE,
                format!("{} can't be used in the command center.", upper(name)),
                span,
            ));
        }
        Ok(spec.clone())
    }

    fn require(&self, spec: &PrimitiveSpec, agent: Agent, span: Span) -> Res<()> {
        let ctx = agent.context();
        if spec.allows(ctx) {
            Ok(())
        } else {
            Err(
                Diagnostic::error(codes::RUNTIME_CONTEXT, context_message(spec, ctx), span)
                    .with_related(spec.name.clone()),
            )
        }
    }

    fn statement(&mut self, s: &Statement, agent: Agent) -> Res<Flow> {
        self.tick(s.span)?;
        let spec = self.lookup(&s.command, s.span)?;
        self.require(&spec, agent, s.span)?;
        let name = spec.name.as_str();
        match name {
            "create-turtles" => {
                let n = self.number(&s.args[0], agent, name)?;
                self.create_turtles(n, s.args.get(1), s.span)?;
            }
            "ask" => {
                let target = self.eval(&s.args[0], agent)?;
                let members = match target {
                    Value::Agentset(members, _) => members,
                    Value::Agent(a) => vec![a],
                    Value::Nobody => {
                        return Err(Diagnostic::error(
                            codes::NOBODY,
                            "ASK expected input to be an agent or agentset but got NOBODY instead.",
                            s.args[0].span(),
                        )
                        .with_related("ask"))
                    }
                    other => return Err(self.type_error(name, "an agent or agentset", &other, s.args[0].span())),
                };
                let body = block_statements(&s.args[1], name)?;
                for m in iteration_order(self.world, &members) {
                    if self.alive(m.into()) {
                        self.block(body, m.into())?;
                    }
                }
            }
            "fd" => {
                let d = self.number(&s.args[0], agent, name)?;
                let id = self.turtle_id(agent, &spec, s.span)?;
                let bounds = self.world.bounds;
                let t = self.world.turtles.get_mut(&id).expect("live turtle");
                let (dx, dy) = direction(t.heading);
                t.xcor = bounds.wrap_x(t.xcor + d * dx);
                t.ycor = bounds.wrap_y(t.ycor + d * dy);
            }
            "right" | "left" => {
                let mut d = self.number(&s.args[0], agent, name)?;
                if name == "left" {
                    d = -d;
                }
                let id = self.turtle_id(agent, &spec, s.span)?;
                let t = self.world.turtles.get_mut(&id).expect("live turtle");
                t.heading = normalize_heading(t.heading + d);
            }
            "setxy" => {
                let x = self.number(&s.args[0], agent, name)?;
                let y = self.number(&s.args[1], agent, name)?;
                let id = self.turtle_id(agent, &spec, s.span)?;
                let bounds = self.world.bounds;
                let t = self.world.turtles.get_mut(&id).expect("live turtle");
                t.xcor = bounds.wrap_x(x);
                t.ycor = bounds.wrap_y(y);
            }
            "set" => self.set(s, agent)?,
            "print" => {
                let v = self.eval(&s.args[0], agent)?;
                let line = self.render(&v);
                self.output.push(line.clone());
                self.world.output.push(line);
            }
            "clear-all" => {
                self.world.turtles.clear();
                self.world.patches.iter_mut().for_each(|p| *p = 0.0);
            }
            "die" => {
                let id = self.turtle_id(agent, &spec, s.span)?;
                self.world.turtles.remove(&id);
                return Ok(Flow::Died);
            }
            other => {
                return Err(Diagnostic::error(
                    codes::EXPECTED_COMMAND,
                    format!("Expected a command here, but {} is a reporter.", upper(other)),
                    s.span,
                ))
            }
        }
        Ok(Flow::Continue)
    }

    fn create_turtles(&mut self, n: f64, body: Option<&Expr>, span: Span) -> Res<()> {
        let n = if n > 0.0 { n.trunc() } else { 0.0 };
        if self.world.turtles.len() as f64 + n > MAX_TURTLES as f64 {
            return Err(Diagnostic::error(
                codes::TOO_MANY_TURTLES,
                format!("The world can hold at most {MAX_TURTLES} turtles."),
                span,
            )
            .with_related("create-turtles"));
        }
        let mut ids = Vec::with_capacity(n as usize);
        for _ in 0..n as usize {
            let id = self.world.next_turtle_id;
            self.world.next_turtle_id += 1;
            let color = BASE_COLORS[self.world.rng.below(BASE_COLORS.len() as u32) as usize];
            let heading = f64::from(self.world.rng.below(360));
            self.world.turtles.insert(
                id,
                Turtle {
                    id,
                    xcor: 0.0,
                    ycor: 0.0,
                    heading,
                    color,
                },
            );
            ids.push(id);
        }
        if let Some(body) = body {
            let body = block_statements(body, "create-turtles")?;
            for id in ids {
                if self.world.turtles.contains_key(&id) {
                    self.block(body, Agent::Turtle(id))?;
                }
            }
        }
        Ok(())
    }

    fn set(&mut self, s: &Statement, agent: Agent) -> Res<()> {
        let (var, var_span) = match &s.args[0] {
            Expr::Identifier { name, span } => (name.as_str(), *span),
            Expr::ReporterCall { name, args, span } if args.is_empty() => (name.as_str(), *span),
            other => {
                return Err(Diagnostic::error(
                    codes::NOT_SETTABLE,
                    "This isn't something you can use SET on.",
                    other.span(),
                ))
            }
        };
        let spec = self.lookup(var, var_span)?;
        if !spec.settable {
            return Err(Diagnostic::error(
                codes::NOT_SETTABLE,
                "This isn't something you can use SET on.",
                var_span,
            ));
        }
        self.require(&spec, agent, var_span)?;
        let value = self.number(&s.args[1], agent, "set")?;
        let bounds = self.world.bounds;
        match (spec.name.as_str(), agent) {
            ("pcolor", _) => {
                let patch = self.patch_of(agent);
                self.world.patches[patch] = wrap_color(value);
            }
            (var, Agent::Turtle(id)) => {
                let t = self.world.turtles.get_mut(&id).expect("live turtle");
                match var {
                    "heading" => t.heading = normalize_heading(value),
                    "xcor" => t.xcor = bounds.wrap_x(value),
                    "ycor" => t.ycor = bounds.wrap_y(value),
                    "color" => t.color = wrap_color(value),
                    _ => unreachable!("settable variable without runtime support: {var}"),
                }
            }
            _ => unreachable!("context already checked"),
        }
        Ok(())
    }

    fn turtle_id(&self, agent: Agent, spec: &PrimitiveSpec, span: Span) -> Res<u64> {
        match agent {
            Agent::Turtle(id) => Ok(id),
            _ => Err(Diagnostic::error(
                codes::RUNTIME_CONTEXT,
                context_message(spec, agent.context()),
                span,
            )),
        }
    }

    fn turtle(&self, agent: Agent) -> &Turtle {
        match agent {
            Agent::Turtle(id) => &self.world.turtles[&id],
            _ => unreachable!("context already checked"),
        }
    }

    fn patch_of(&self, agent: Agent) -> usize {
        match agent {
            Agent::Patch(i) => i,
            Agent::Turtle(_) => {
                let t = self.turtle(agent);
                self.world.bounds.patch_at(t.xcor, t.ycor)
            }
            Agent::Observer => unreachable!("context already checked"),
        }
    }

    fn number(&mut self, expr: &Expr, agent: Agent, who: &str) -> Res<f64> {
        match self.eval(expr, agent)? {
            Value::Number(n) => Ok(n),
            other => Err(self.type_error(who, "a number", &other, expr.span())),
        }
    }

    fn type_error(&self, who: &str, wanted: &str, got: &Value, span: Span) -> Diagnostic {
        Diagnostic::error(
            codes::RUNTIME_TYPE,
            format!(
                "{} expected this input to be {wanted}, but got {} instead.",
                upper(who),
                self.describe(got)
            ),
            span,
        )
        .with_related(who.to_owned())
    }

    fn describe(&self, v: &Value) -> String {
        match v {
            Value::String(s) => format!("the string {s:?}"),
            Value::Number(_) | Value::Boolean(_) => format!("{} {}", v.type_name(), self.render(v)),
            _ => v.type_name().to_owned(),
        }
    }

    fn render(&self, v: &Value) -> String {
        match v {
            Value::Agent(AgentRef::Patch(i)) => {
                let (x, y) = self.world.bounds.patch_coords(*i);
                format!("(patch {x} {y})")
            }
            other => other.to_string(),
        }
    }

    fn eval(&mut self, expr: &Expr, agent: Agent) -> Res<Value> {
        match expr {
            Expr::Number { value, span } => {
                check_finite(*value, &format_number(*value), *span)?;
                Ok(Value::Number(*value))
            }
            Expr::String { value, .. } => Ok(Value::String(value.clone())),
            Expr::ColorName { name, span } => self.registry.color(name).map(Value::Number).ok_or_else(|| {
                Diagnostic::error(
                    codes::UNKNOWN_IDENTIFIER,
                    format!("Nothing named {} has been defined.", upper(name)),
                    *span,
                )
            }),
            Expr::Identifier { name, span } => {
                if self
                    .registry
                    .lookup(name)
                    .is_some_and(|s| s.is_reporter() && s.params.is_empty())
                {
                    self.reporter(name, &[], *span, agent)
                } else {
                    Err(Diagnostic::error(
                        codes::UNKNOWN_IDENTIFIER,
                        format!("Nothing named {} has been defined.", upper(name)),
                        *span,
                    ))
                }
            }
            Expr::ReporterCall { name, args, span } => self.reporter(name, args, *span, agent),
            Expr::Block(b) => Err(Diagnostic::error(
                codes::RUNTIME_TYPE,
                "A command block can't be used as a value here.",
                b.span,
            )),
        }
    }

    fn reporter(&mut self, name: &str, args: &[Expr], span: Span, agent: Agent) -> Res<Value> {
        self.tick(span)?;
        let spec = self.lookup(name, span)?;
        self.require(&spec, agent, span)?;
        if args.len() < spec.min_arity() {
            return Err(Diagnostic::error(
                codes::MISSING_ARGUMENT,
                format!("{} expected {} inputs.", upper(name), spec.min_arity()),
                span,
            ));
        }
        let name = spec.name.as_str();
        let bounds = self.world.bounds;
        let v = match name {
            "heading" => Value::Number(self.turtle(agent).heading),
            "xcor" => Value::Number(self.turtle(agent).xcor),
            "ycor" => Value::Number(self.turtle(agent).ycor),
            "color" => Value::Number(self.turtle(agent).color),
            "pxcor" => Value::Number(f64::from(bounds.patch_coords(self.patch_of(agent)).0)),
            "pycor" => Value::Number(f64::from(bounds.patch_coords(self.patch_of(agent)).1)),
            "pcolor" => Value::Number(self.world.patches[self.patch_of(agent)]),
            "random" => {
                let n = self.number(&args[0], agent, name)?;
                Value::Number(self.random(n, span)?)
            }
            "random-xcor" => {
                let u = self.world.rng.unit_f64();
                let lo = f64::from(bounds.min_pxcor) - 0.5;
                Value::Number(bounds.wrap_x(lo + u * bounds.width() as f64))
            }
            "random-ycor" => {
                let u = self.world.rng.unit_f64();
                let lo = f64::from(bounds.min_pycor) - 0.5;
                Value::Number(bounds.wrap_y(lo + u * bounds.height() as f64))
            }
            "turtles" => Value::Agentset(
                self.world.turtles.keys().map(|&id| AgentRef::Turtle(id)).collect(),
                AgentsetKind::Turtles,
            ),
            "patches" => Value::Agentset(
                (0..self.world.patches.len()).map(AgentRef::Patch).collect(),
                AgentsetKind::Patches,
            ),
            "neighbors" => {
                let (px, py) = bounds.patch_coords(self.patch_of(agent));
                let mut found = Vec::with_capacity(8);
                for dy in -1..=1 {
                    for dx in -1..=1 {
                        if dx == 0 && dy == 0 {
                            continue;
                        }
                        let x = bounds.wrap_x(f64::from(px + dx));
                        let y = bounds.wrap_y(f64::from(py + dy));
                        let i = bounds.patch_at(x, y);
                        if i != self.patch_of(agent) && !found.contains(&i) {
                            found.push(i);
                        }
                    }
                }
                found.sort_unstable();
                Value::Agentset(found.into_iter().map(AgentRef::Patch).collect(), AgentsetKind::Patches)
            }
            "one-of" => match self.eval(&args[0], agent)? {
                Value::Agentset(members, _) if members.is_empty() => Value::Nobody,
                Value::Agentset(members, _) => {
                    let pick = self.world.rng.below(members.len() as u32) as usize;
                    Value::Agent(members[pick])
                }
                a @ Value::Agent(_) => a,
                other => return Err(self.type_error(name, "an agentset", &other, args[0].span())),
            },
            "count" => match self.eval(&args[0], agent)? {
                Value::Agentset(members, _) => Value::Number(members.len() as f64),
                Value::Agent(_) => Value::Number(1.0),
                other => return Err(self.type_error(name, "an agentset", &other, args[0].span())),
            },
            "scale-color" => {
                let mut n = [0.0; 4];
                for (slot, arg) in n.iter_mut().zip(args) {
                    *slot = self.number(arg, agent, name)?;
                }
                Value::Number(scale_color(n[0], n[1], n[2], n[3]))
            }
            "=" | "!=" => {
                let a = self.eval(&args[0], agent)?;
                let b = self.eval(&args[1], agent)?;
                Value::Boolean((a == b) == (name == "="))
            }
            "<" | ">" | "<=" | ">=" => {
                let a = self.number(&args[0], agent, name)?;
                let b = self.number(&args[1], agent, name)?;
                Value::Boolean(match name {
                    "<" => a < b,
                    ">" => a > b,
                    "<=" => a <= b,
                    _ => a >= b,
                })
            }
            "+" | "-" | "*" | "/" => {
                let a = self.number(&args[0], agent, name)?;
                let b = self.number(&args[1], agent, name)?;
                let r = match name {
                    "+" => a + b,
                    "-" => a - b,
                    "*" => a * b,
                    _ => {
                        if b == 0.0 {
                            return Err(
                                Diagnostic::error(codes::DIVISION_BY_ZERO, "Division by zero.", span).with_related("/")
                            );
                        }
                        a / b
                    }
                };
                check_finite(r, name, span)?;
                Value::Number(r)
            }
            other => {
                return Err(Diagnostic::error(
                    codes::RUNTIME_TYPE,
                    format!("{} can't be used as a value.", upper(other)),
                    span,
                ))
            }
        };
        Ok(v)
    }

    fn random(&mut self, n: f64, span: Span) -> Res<f64> {
        if n < 0.0 {
            return Err(Diagnostic::error(
                codes::NEGATIVE_RANDOM,
                format!(
                    "RANDOM expected a non-negative input, but got {} instead.",
                    format_number(n)
                ),
                span,
            )
            .with_related("random"));
        }
        check_finite(n, "random", span)?;
        let n = n.trunc();
        Ok(if n == 0.0 {
            0.0
        } else if n <= f64::from(u32::MAX) {
            f64::from(self.world.rng.below(n as u32))
        } else {
            (self.world.rng.unit_f64() * n).floor()
        })
    }
}

fn block_statements<'e>(expr: &'e Expr, who: &str) -> Res<&'e [Statement]> {
    match expr {
        Expr::Block(b) => Ok(&b.statements),
        other => Err(Diagnostic::error(
            codes::RUNTIME_TYPE,
            format!("{} expected a command block.", upper(who)),
            other.span(),
        )),
    }
}

fn check_finite(x: f64, who: &str, span: Span) -> Res<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Diagnostic::error(
            codes::NUMBER_TOO_LARGE,
            format!("{} produced a number too large to represent.", upper(who)),
            span,
        )
        .with_related(who.to_owned()))
    }
}

/// Unit step `(dx, dy)` for a heading in degrees (0 is north, clockwise).
/// Right angles are exact.
fn direction(heading: f64) -> (f64, f64) {
    match heading {
        0.0 => (0.0, 1.0),
        90.0 => (1.0, 0.0),
        180.0 => (0.0, -1.0),
        270.0 => (-1.0, 0.0),
        h => {
            let r = h.to_radians();
            (r.sin(), r.cos())
        }
    }
}

/// Shade of `color`'s hue proportional to where `value` falls in
/// `[min, max]`; a reversed range inverts the scale.
pub fn scale_color(color: f64, value: f64, min: f64, max: f64) -> f64 {
    let base = (wrap_color(color) / 10.0).floor() * 10.0;
    let perc = if min > max {
        if value < max {
            1.0
        } else if value > min {
            0.0
        } else {
            (min - value) / (min - max)
        }
    } else if value > max {
        1.0
    } else if value < min {
        0.0
    } else {
        (value - min) / (max - min)
    };
    let perc = perc * 10.0;
    let perc = if perc.is_nan() { 0.0 } else { perc.clamp(0.0, 9.9999) };
    base + perc
}
