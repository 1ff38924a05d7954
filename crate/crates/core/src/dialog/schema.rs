use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use thiserror::Error;

const BUILTIN_INTENTS: &str = include_str!("../../data/intents.toml");

/// Name of the fallback intent in an intents file.
pub const FALLBACK_INTENT: &str = "*";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlotSpec {
    pub key: String,
    pub question: String,
    pub chips: Vec<String>,
    #[serde(default = "yes")]
    pub required: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlotSchema {
    pub intent: String,
    pub slots: Vec<SlotSpec>,
}

impl SlotSchema {
    pub fn slot(&self, key: &str) -> Option<&SlotSpec> {
        self.slots.iter().find(|s| s.key == key)
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SchemaError {
    #[error("intents file: {0}")]
    Toml(String),
    #[error("intent {0:?} has no required slot")]
    NoRequiredSlot(String),
    #[error("slot {slot:?} of intent {intent:?} has no example chips")]
    NoChips { intent: String, slot: String },
    #[error("intents file has no fallback intent named \"*\"")]
    NoFallback,
}

#[derive(Debug, Deserialize)]
struct IntentsFile {
    intent: Vec<IntentEntry>,
}

#[derive(Debug, Deserialize)]
struct IntentEntry {
    name: String,
    slot: Vec<SlotSpec>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntentCatalog {
    schemas: Vec<SlotSchema>,
    fallback: Vec<SlotSpec>,
}

impl IntentCatalog {
    pub fn builtin() -> &'static IntentCatalog {
        static CATALOG: OnceLock<IntentCatalog> = OnceLock::new();
        CATALOG.get_or_init(|| IntentCatalog::from_toml_str(BUILTIN_INTENTS).expect("builtin intents are valid"))
    }

    pub fn from_toml_str(text: &str) -> Result<Self, SchemaError> {
        let file: IntentsFile = toml::from_str(text).map_err(|e| SchemaError::Toml(e.to_string()))?;
        let mut schemas = Vec::new();
        let mut fallback = None;
        for entry in file.intent {
            if !entry.slot.iter().any(|s| s.required) {
                return Err(SchemaError::NoRequiredSlot(entry.name));
            }
            if let Some(s) = entry.slot.iter().find(|s| s.chips.is_empty()) {
                return Err(SchemaError::NoChips {
                    intent: entry.name,
                    slot: s.key.clone(),
                });
            }
            if entry.name == FALLBACK_INTENT {
                fallback = Some(entry.slot);
            } else {
                schemas.push(SlotSchema {
                    intent: entry.name.to_lowercase(),
                    slots: entry.slot,
                });
            }
        }
        Ok(IntentCatalog {
            schemas,
            fallback: fallback.ok_or(SchemaError::NoFallback)?,
        })
    }

    /// Schema for `intent`; unknown intents get the fallback slots.
    pub fn schema_for(&self, intent: &str) -> SlotSchema {
        let key = intent.trim().to_lowercase();
        self.schemas
            .iter()
            .find(|s| s.intent == key)
            .cloned()
            .unwrap_or_else(|| SlotSchema {
                intent: key,
                slots: self.fallback.clone(),
            })
    }

    pub fn intents(&self) -> impl Iterator<Item = &str> {
        self.schemas.iter().map(|s| s.intent.as_str())
    }
}

pub fn schema_for(intent: &str) -> SlotSchema {
    IntentCatalog::builtin().schema_for(intent)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn create_turtles_schema() {
        let s = schema_for("Create turtles");
        let keys: Vec<_> = s.slots.iter().map(|s| s.key.as_str()).collect();
        assert_eq!(keys, ["breed", "number", "position"]);
        assert_eq!(s.slots[0].chips, ["turtles", "rabbits", "cars"]);
        assert_eq!(s.slots[1].chips, ["10", "50", "random between 20-30"]);
        assert_eq!(s.slots[2].chips, ["random", "at (0,0)", "around a specific patch"]);
        assert_eq!(s.slots[1].question, "How many turtles do you want to create?");
    }

    #[test]
    fn unknown_intent_falls_back() {
        let s = schema_for("paint the sky");
        assert_eq!(s.intent, "paint the sky");
        assert_eq!(s.slots.len(), 1);
        assert!(s.slots[0].required);
    }

    #[test]
    fn validation() {
        let no_required = "[[intent]]\nname = \"*\"\n[[intent.slot]]\nkey = \"a\"\nquestion = \"?\"\nchips = [\"x\"]\nrequired = false\n";
        assert!(matches!(
            IntentCatalog::from_toml_str(no_required),
            Err(SchemaError::NoRequiredSlot(_))
        ));
        let no_chips = "[[intent]]\nname = \"*\"\n[[intent.slot]]\nkey = \"a\"\nquestion = \"?\"\nchips = []\n";
        assert!(matches!(
            IntentCatalog::from_toml_str(no_chips),
            Err(SchemaError::NoChips { .. })
        ));
        let no_fallback = "[[intent]]\nname = \"x\"\n[[intent.slot]]\nkey = \"a\"\nquestion = \"?\"\nchips = [\"y\"]\n";
        assert_eq!(IntentCatalog::from_toml_str(no_fallback), Err(SchemaError::NoFallback));
    }
}
