//! Primitive metadata: arity, types, legal agent contexts and help text.
//!
//! The registry is the single source of truth for the parser, the context
//! checker, the runtime and the `help` command. The built-in table lives in
//! `data/primitives.toml`; [`PrimitiveRegistry::from_toml_str`] loads the same
//! format from anywhere else.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

const BUILTIN_TABLE: &str = include_str!("../data/primitives.toml");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AgentContext {
    Observer,
    Turtle,
    Patch,
    Link,
}

impl AgentContext {
    pub const ALL: [AgentContext; 4] = [
        AgentContext::Observer,
        AgentContext::Turtle,
        AgentContext::Patch,
        AgentContext::Link,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AgentContext::Observer => "observer",
            AgentContext::Turtle => "turtle",
            AgentContext::Patch => "patch",
            AgentContext::Link => "link",
        }
    }

    /// Heading form used by help entries ("Turtles", "Observer").
    pub fn title(self) -> &'static str {
        match self {
            AgentContext::Observer => "Observer",
            AgentContext::Turtle => "Turtles",
            AgentContext::Patch => "Patches",
            AgentContext::Link => "Links",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|c| c.as_str() == s)
    }
}

impl fmt::Display for AgentContext {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PrimitiveKind {
    Command,
    Reporter,
}

/// Semantic type of a parameter or a reporter result.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ValueType {
    Number,
    Boolean,
    String,
    Agentset,
    Agent,
    Value,
    Block,
    VariableName,
}

impl ValueType {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "number" => ValueType::Number,
            "boolean" => ValueType::Boolean,
            "string" => ValueType::String,
            "agentset" => ValueType::Agentset,
            "agent" => ValueType::Agent,
            "value" => ValueType::Value,
            "block" => ValueType::Block,
            "variable-name" => ValueType::VariableName,
            _ => return None,
        })
    }

    pub fn describe(self) -> &'static str {
        match self {
            ValueType::Number => "a number",
            ValueType::Boolean => "TRUE/FALSE",
            ValueType::String => "a string",
            ValueType::Agentset => "an agent or agentset",
            ValueType::Agent => "an agent",
            ValueType::Value => "anything",
            ValueType::Block => "a command block",
            ValueType::VariableName => "a variable name",
        }
    }

    /// Whether an expression of type `actual` may fill a slot of this type.
    /// `Value` on either side is permissive.
    pub fn accepts(self, actual: ValueType) -> bool {
        match (self, actual) {
            (ValueType::Value, t) => !matches!(t, ValueType::Block | ValueType::VariableName),
            (_, ValueType::Value) => !matches!(self, ValueType::Block | ValueType::VariableName),
            (ValueType::Agentset, ValueType::Agent) => true,
            (expected, actual) => expected == actual,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Param {
    pub ty: ValueType,
    pub optional: bool,
}

/// Which kind of agents an agent-valued reporter produces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Yields {
    Agents(AgentContext),
    /// Same agent kind as the first argument (`one-of turtles`).
    FromArgument,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrimitiveSpec {
    pub name: String,
    pub kind: PrimitiveKind,
    pub params: Vec<Param>,
    pub result: Option<ValueType>,
    pub contexts: Vec<AgentContext>,
    pub summary: String,
    pub see_also: Vec<String>,
    pub settable: bool,
    pub yields: Option<Yields>,
    /// Context of the command block argument, if the primitive takes one.
    pub body: Option<Yields>,
    pub infix: Option<u8>,
    pub help_only: bool,
    pub aliases: Vec<String>,
}

impl PrimitiveSpec {
    pub fn is_command(&self) -> bool {
        self.kind == PrimitiveKind::Command
    }

    pub fn is_reporter(&self) -> bool {
        self.kind == PrimitiveKind::Reporter
    }

    pub fn is_infix(&self) -> bool {
        self.infix.is_some()
    }

    pub fn allows(&self, ctx: AgentContext) -> bool {
        self.contexts.contains(&ctx)
    }

    pub fn min_arity(&self) -> usize {
        self.params.iter().filter(|p| !p.optional).count()
    }

    pub fn max_arity(&self) -> usize {
        self.params.len()
    }

    /// `turtle/link`, as used in context errors.
    pub fn context_list(&self) -> String {
        self.contexts.iter().map(|c| c.as_str()).collect::<Vec<_>>().join("/")
    }

    /// `Turtles, Links`, as used in help headers.
    pub fn context_titles(&self) -> String {
        self.contexts.iter().map(|c| c.title()).collect::<Vec<_>>().join(", ")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HelpEntry {
    pub name: String,
    pub contexts: Vec<String>,
    pub summary: String,
    pub see_also: Vec<String>,
}

impl HelpEntry {
    /// Three-line command center rendering.
    pub fn render(&self) -> String {
        format!(
            "{} - {}\n{} (full text)\nSee also: {}",
            self.name,
            self.contexts.join(", "),
            self.summary,
            self.see_also.join(", ")
        )
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum RegistryError {
    #[error("malformed primitive table: {0}")]
    Syntax(String),
    #[error("primitive `{name}`: {problem}")]
    Invalid { name: String, problem: String },
    #[error("`{0}` is defined twice")]
    Duplicate(String),
    #[error("`{from}` lists unknown see-also entry `{to}`")]
    DanglingSeeAlso { from: String, to: String },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTable {
    #[serde(default)]
    colors: BTreeMap<String, f64>,
    #[serde(default, rename = "primitive")]
    primitives: Vec<RawPrimitive>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPrimitive {
    name: String,
    kind: PrimitiveKind,
    #[serde(default)]
    params: Vec<String>,
    result: Option<String>,
    agents: Option<String>,
    body: Option<String>,
    contexts: Vec<String>,
    #[serde(default)]
    settable: bool,
    infix: Option<u8>,
    #[serde(default)]
    help_only: bool,
    #[serde(default)]
    aliases: Vec<String>,
    summary: String,
    #[serde(default)]
    see_also: Vec<String>,
}

impl RawPrimitive {
    fn into_spec(self) -> Result<PrimitiveSpec, RegistryError> {
        let name = self.name.to_lowercase();
        let invalid = |problem: String| RegistryError::Invalid {
            name: name.clone(),
            problem,
        };

        let mut params = Vec::with_capacity(self.params.len());
        for (i, p) in self.params.iter().enumerate() {
            let (ty, optional) = match p.strip_suffix('?') {
                Some(base) => (base, true),
                None => (p.as_str(), false),
            };
            let ty = ValueType::parse(ty).ok_or_else(|| invalid(format!("unknown type `{p}`")))?;
            if optional && i + 1 != self.params.len() {
                return Err(invalid("only the last parameter may be optional".into()));
            }
            params.push(Param { ty, optional });
        }

        let result = match (&self.kind, self.result.as_deref()) {
            (PrimitiveKind::Command, None) => None,
            (PrimitiveKind::Command, Some(_)) => return Err(invalid("commands cannot have a result".into())),
            (PrimitiveKind::Reporter, Some(r)) => {
                Some(ValueType::parse(r).ok_or_else(|| invalid(format!("unknown result `{r}`")))?)
            }
            (PrimitiveKind::Reporter, None) => return Err(invalid("reporters need a result type".into())),
        };

        let mut contexts = Vec::new();
        for c in &self.contexts {
            let ctx = AgentContext::parse(c).ok_or_else(|| invalid(format!("unknown context `{c}`")))?;
            if !contexts.contains(&ctx) {
                contexts.push(ctx);
            }
        }
        if contexts.is_empty() {
            return Err(invalid("at least one legal context is required".into()));
        }
        contexts.sort();

        let agent_kind = |field: Option<&str>| -> Result<Option<Yields>, RegistryError> {
            Ok(match field {
                None => None,
                Some("from-arg") => Some(Yields::FromArgument),
                Some(a) => Some(Yields::Agents(
                    AgentContext::parse(a).ok_or_else(|| invalid(format!("unknown agent kind `{a}`")))?,
                )),
            })
        };
        let yields = agent_kind(self.agents.as_deref())?;
        let body = agent_kind(self.body.as_deref())?;
        if body.is_some() != params.iter().any(|p| p.ty == ValueType::Block) {
            return Err(invalid(
                "`body` must be given exactly when a block parameter exists".into(),
            ));
        }
        if self.infix.is_some() && params.len() != 2 {
            return Err(invalid("infix operators take exactly two operands".into()));
        }
        if self.settable && !params.is_empty() {
            return Err(invalid("settable variables take no parameters".into()));
        }
        if self.summary.trim().is_empty() {
            return Err(invalid("summary is empty".into()));
        }

        Ok(PrimitiveSpec {
            name,
            kind: self.kind,
            params,
            result,
            contexts,
            summary: self.summary,
            see_also: self.see_also.iter().map(|s| s.to_lowercase()).collect(),
            settable: self.settable,
            yields,
            body,
            infix: self.infix,
            help_only: self.help_only,
            aliases: self.aliases.iter().map(|s| s.to_lowercase()).collect(),
        })
    }
}

/// Immutable, case-insensitive table of primitives and color constants.
#[derive(Debug, Clone)]
pub struct PrimitiveRegistry {
    specs: Vec<PrimitiveSpec>,
    index: HashMap<String, usize>,
    colors: Vec<(String, f64)>,
}

impl PrimitiveRegistry {
    /// The table shipped with the crate.
    pub fn builtin() -> &'static PrimitiveRegistry {
        static BUILTIN: OnceLock<PrimitiveRegistry> = OnceLock::new();
        BUILTIN
            .get_or_init(|| PrimitiveRegistry::from_toml_str(BUILTIN_TABLE).expect("built-in primitive table is valid"))
    }

    pub fn from_toml_str(text: &str) -> Result<Self, RegistryError> {
        let raw: RawTable = toml::from_str(text).map_err(|e| RegistryError::Syntax(e.to_string()))?;
        let mut specs = Vec::with_capacity(raw.primitives.len());
        let mut index = HashMap::new();
        for p in raw.primitives {
            let spec = p.into_spec()?;
            let slot = specs.len();
            for key in std::iter::once(&spec.name).chain(&spec.aliases) {
                if index.insert(key.clone(), slot).is_some() {
                    return Err(RegistryError::Duplicate(key.clone()));
                }
            }
            specs.push(spec);
        }
        for spec in &specs {
            for see in &spec.see_also {
                if !index.contains_key(see) {
                    return Err(RegistryError::DanglingSeeAlso {
                        from: spec.name.clone(),
                        to: see.clone(),
                    });
                }
            }
        }
        let mut colors = Vec::with_capacity(raw.colors.len());
        for (name, value) in raw.colors {
            let name = name.to_lowercase();
            if index.contains_key(&name) {
                return Err(RegistryError::Duplicate(name));
            }
            if !(0.0..140.0).contains(&value) {
                return Err(RegistryError::Invalid {
                    name,
                    problem: "color constants must lie in [0, 140)".into(),
                });
            }
            colors.push((name, value));
        }
        Ok(PrimitiveRegistry { specs, index, colors })
    }

    pub fn lookup(&self, name: &str) -> Option<&PrimitiveSpec> {
        let key = name.to_lowercase();
        self.index.get(&key).map(|&i| &self.specs[i])
    }

    pub fn color(&self, name: &str) -> Option<f64> {
        let key = name.to_lowercase();
        self.colors.iter().find(|(n, _)| *n == key).map(|&(_, v)| v)
    }

    /// True for any primitive name, alias or color constant.
    pub fn is_known(&self, name: &str) -> bool {
        self.lookup(name).is_some() || self.color(name).is_some()
    }

    pub fn specs(&self) -> impl Iterator<Item = &PrimitiveSpec> {
        self.specs.iter()
    }

    pub fn colors(&self) -> impl Iterator<Item = (&str, f64)> {
        self.colors.iter().map(|(n, v)| (n.as_str(), *v))
    }

    pub fn help(&self, name: &str) -> Option<HelpEntry> {
        let spec = self.lookup(name)?;
        Some(HelpEntry {
            name: spec.name.clone(),
            contexts: spec.contexts.iter().map(|c| c.title().to_owned()).collect(),
            summary: spec.summary.clone(),
            see_also: spec.see_also.clone(),
        })
    }
}

/// Free-function form of [`PrimitiveRegistry::help`].
pub fn help(name: &str, registry: &PrimitiveRegistry) -> Option<HelpEntry> {
    registry.help(name)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reg() -> &'static PrimitiveRegistry {
        PrimitiveRegistry::builtin()
    }

    #[test]
    fn color_is_turtle_link_reporter() {
        let spec = reg().lookup("color").unwrap();
        assert_eq!(spec.contexts, vec![AgentContext::Turtle, AgentContext::Link]);
        assert!(spec.is_reporter());
        assert!(spec.settable);
        assert_eq!(spec.context_list(), "turtle/link");
    }

    #[test]
    fn lookup_is_case_insensitive() {
        assert_eq!(reg().lookup("COLOR"), reg().lookup("color"));
        assert_eq!(reg().lookup("Create-Turtles").unwrap().name, "create-turtles");
        assert!(reg().lookup("colour").is_none());
    }

    #[test]
    fn aliases_resolve_to_canonical_spec() {
        assert_eq!(reg().lookup("forward").unwrap().name, "fd");
        assert_eq!(reg().lookup("CRT").unwrap().name, "create-turtles");
    }

    #[test]
    fn help_pcolor_matches_command_center() {
        let entry = help("pcolor", reg()).unwrap();
        assert_eq!(
            entry.render(),
            "pcolor - Turtles, Patches\n\
             Reports a patch's color and changes a patch's color when used with the set primitive. (full text)\n\
             See also: color, set, patches, neighbors"
        );
    }

    #[test]
    fn help_color_header_and_see_also() {
        let entry = help("color", reg()).unwrap();
        let rendered = entry.render();
        assert_eq!(rendered.lines().next(), Some("color - Turtles, Links"));
        assert_eq!(entry.see_also, ["pcolor", "scale-color", "turtles-own", "of"]);
        assert!(help("colour", reg()).is_none());
    }

    #[test]
    fn every_see_also_resolves() {
        for spec in reg().specs() {
            for see in &spec.see_also {
                assert!(reg().lookup(see).is_some(), "{} -> {}", spec.name, see);
            }
        }
    }

    #[test]
    fn spec_shape_invariants() {
        for spec in reg().specs() {
            assert!(!spec.contexts.is_empty(), "{}", spec.name);
            match spec.kind {
                PrimitiveKind::Command => assert!(spec.result.is_none(), "{}", spec.name),
                PrimitiveKind::Reporter => assert!(spec.result.is_some(), "{}", spec.name),
            }
        }
    }

    #[test]
    fn transcript_primitives_are_present() {
        for name in [
            "create-turtles",
            "ask",
            "fd",
            "set",
            "setxy",
            "print",
            "heading",
            "color",
            "pcolor",
            "random",
            "random-xcor",
            "random-ycor",
            "turtles",
            "patches",
            "clear-all",
            "die",
            "right",
            "left",
            "one-of",
        ] {
            assert!(reg().lookup(name).is_some(), "{name}");
        }
        for c in ["red", "blue", "green", "white", "black", "gray", "yellow", "orange"] {
            assert!(reg().color(c).is_some(), "{c}");
        }
    }

    #[test]
    fn color_table_values() {
        // Base color table of the reference language: black 0, white 9.9,
        // and each hue's central shade at 10k + 5.
        let expected = [
            ("black", 0.0),
            ("gray", 5.0),
            ("white", 9.9),
            ("red", 15.0),
            ("orange", 25.0),
            ("brown", 35.0),
            ("yellow", 45.0),
            ("green", 55.0),
            ("lime", 65.0),
            ("turquoise", 75.0),
            ("cyan", 85.0),
            ("sky", 95.0),
            ("blue", 105.0),
            ("violet", 115.0),
            ("magenta", 125.0),
            ("pink", 135.0),
        ];
        for (name, value) in expected {
            assert_eq!(reg().color(name), Some(value), "{name}");
        }
        assert_eq!(reg().color("RED"), Some(15.0));
    }

    #[test]
    fn rejects_dangling_see_also() {
        let text = r#"
            [[primitive]]
            name = "fd"
            kind = "command"
            params = ["number"]
            contexts = ["turtle"]
            summary = "moves"
            see_also = ["bk"]
        "#;
        assert_eq!(
            PrimitiveRegistry::from_toml_str(text).unwrap_err(),
            RegistryError::DanglingSeeAlso {
                from: "fd".into(),
                to: "bk".into()
            }
        );
    }

    #[test]
    fn rejects_command_with_result_and_empty_contexts() {
        let with_result = r#"
            [[primitive]]
            name = "go"
            kind = "command"
            result = "number"
            contexts = ["observer"]
            summary = "x"
        "#;
        assert!(matches!(
            PrimitiveRegistry::from_toml_str(with_result),
            Err(RegistryError::Invalid { .. })
        ));
        let no_ctx = r#"
            [[primitive]]
            name = "go"
            kind = "command"
            contexts = []
            summary = "x"
        "#;
        assert!(matches!(
            PrimitiveRegistry::from_toml_str(no_ctx),
            Err(RegistryError::Invalid { .. })
        ));
    }

    #[test]
    fn type_acceptance() {
        assert!(ValueType::Agentset.accepts(ValueType::Agent));
        assert!(ValueType::Number.accepts(ValueType::Value));
        assert!(!ValueType::Number.accepts(ValueType::Boolean));
        assert!(!ValueType::Value.accepts(ValueType::Block));
    }
}
