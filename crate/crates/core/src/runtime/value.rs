use std::fmt;

use crate::pretty::format_number;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AgentRef {
    Turtle(u64),
    /// Row-major patch index.
    Patch(usize),
}

/// A runtime value. Agentsets are snapshots of agent references, ordered
/// by turtle id or by patch index.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Number(f64),
    Boolean(bool),
    String(String),
    Agent(AgentRef),
    Agentset(Vec<AgentRef>, AgentsetKind),
    Nobody,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AgentsetKind {
    Turtles,
    Patches,
}

impl Value {
    pub fn type_name(&self) -> &'static str {
        match self {
            Value::Number(_) => "a number",
            Value::Boolean(_) => "TRUE/FALSE",
            Value::String(_) => "a string",
            Value::Agent(_) => "an agent",
            Value::Agentset(..) => "an agentset",
            Value::Nobody => "NOBODY",
        }
    }
}

/// Printed form. Patch coordinates need the world, so agents print through
/// [`super::exec`] instead; this covers the rest.
impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Number(n) => f.write_str(&format_number(*n)),
            Value::Boolean(b) => write!(f, "{b}"),
            Value::String(s) => f.write_str(s),
            Value::Agent(AgentRef::Turtle(id)) => write!(f, "(turtle {id})"),
            Value::Agent(AgentRef::Patch(i)) => write!(f, "(patch #{i})"),
            Value::Agentset(items, kind) => {
                let noun = match (kind, items.len()) {
                    (AgentsetKind::Turtles, 1) => "turtle",
                    (AgentsetKind::Turtles, _) => "turtles",
                    (AgentsetKind::Patches, 1) => "patch",
                    (AgentsetKind::Patches, _) => "patches",
                };
                write!(f, "(agentset, {} {noun})", items.len())
            }
            Value::Nobody => f.write_str("nobody"),
        }
    }
}
