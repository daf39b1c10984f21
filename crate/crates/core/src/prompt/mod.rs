//! Item-generation prompts: built-in assembly, custom prompt checks,
//! response parsing and the adaptive generation loop.

mod builtin;
mod generate;
mod parse;

use std::fmt;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::item::{AttributeSpec, Item};

pub use builtin::{build_builtin_prompt, allocate_counts, FORMAT_INSTRUCTION, STRICT_REMINDER};
pub use generate::{generate_item_pool, MAX_CONSECUTIVE_FAILURES};
pub use parse::{parse_generated_items, ParsedBatch};

fn default_true() -> bool {
    true
}

/// Everything needed to generate an item pool.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationSpec {
    pub attributes: AttributeSpec,
    #[serde(default)]
    pub domain: Option<String>,
    #[serde(default)]
    pub scale_title: Option<String>,
    #[serde(default)]
    pub audience: Option<String>,
    #[serde(default)]
    pub item_type_definitions: IndexMap<String, String>,
    #[serde(default)]
    pub response_options: Vec<String>,
    #[serde(default)]
    pub item_examples: Vec<Item>,
    #[serde(default)]
    pub prompt_notes: Option<String>,
    #[serde(default)]
    pub system_role: Option<String>,
    /// Custom mode: one complete prompt per item type.
    #[serde(default)]
    pub main_prompts: Option<IndexMap<String, String>>,
    pub target_n: usize,
    #[serde(default = "default_true")]
    pub adaptive: bool,
}

impl GenerationSpec {
    pub fn new(attributes: AttributeSpec, target_n: usize) -> Self {
        Self {
            attributes,
            domain: None,
            scale_title: None,
            audience: None,
            item_type_definitions: IndexMap::new(),
            response_options: Vec::new(),
            item_examples: Vec::new(),
            prompt_notes: None,
            system_role: None,
            main_prompts: None,
            target_n,
            adaptive: true,
        }
    }

    pub fn is_custom(&self) -> bool {
        self.main_prompts.is_some()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PromptViolation {
    MissingType { item_type: String },
    ExtraType { item_type: String },
    MissingAttribute { item_type: String, attribute: String },
}

impl fmt::Display for PromptViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PromptViolation::MissingType { item_type } => {
                write!(f, "no custom prompt for item type `{item_type}`")
            }
            PromptViolation::ExtraType { item_type } => {
                write!(f, "custom prompt for undeclared item type `{item_type}`")
            }
            PromptViolation::MissingAttribute { item_type, attribute } => write!(
                f,
                "custom prompt for `{item_type}` never mentions attribute `{attribute}`"
            ),
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct PromptReport {
    pub violations: Vec<PromptViolation>,
}

impl PromptReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for PromptReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Check custom prompts: the type keys must equal the declared types and each
/// prompt must contain every attribute of its type verbatim (case-sensitive).
/// Outside custom mode the report is empty.
pub fn validate_custom_prompts(spec: &GenerationSpec) -> PromptReport {
    let Some(prompts) = &spec.main_prompts else {
        return PromptReport::default();
    };
    let mut violations = Vec::new();
    for (item_type, attributes) in spec.attributes.iter() {
        match prompts.get(item_type) {
            None => violations.push(PromptViolation::MissingType {
                item_type: item_type.to_string(),
            }),
            Some(prompt) => {
                for attribute in attributes {
                    if !prompt.contains(attribute.as_str()) {
                        violations.push(PromptViolation::MissingAttribute {
                            item_type: item_type.to_string(),
                            attribute: attribute.clone(),
                        });
                    }
                }
            }
        }
    }
    for item_type in prompts.keys() {
        if !spec.attributes.contains_type(item_type) {
            violations.push(PromptViolation::ExtraType {
                item_type: item_type.clone(),
            });
        }
    }
    PromptReport { violations }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec() -> GenerationSpec {
        let mut s = GenerationSpec::new(
            AttributeSpec::new([
                ("openness", vec!["creative", "curious"]),
                ("neuroticism", vec!["anxious", "insecure"]),
            ]),
            8,
        );
        s.main_prompts = Some(IndexMap::from([
            ("openness".to_string(), "Cover creative and curious.".to_string()),
            ("neuroticism".to_string(), "Cover anxious and insecure.".to_string()),
        ]));
        s
    }

    #[test]
    fn complete_prompts_pass() {
        assert!(validate_custom_prompts(&spec()).is_valid());
    }

    #[test]
    fn missing_attribute_is_named() {
        let mut s = spec();
        s.main_prompts.as_mut().unwrap()["openness"] = "Cover creative only.".into();
        let r = validate_custom_prompts(&s);
        assert_eq!(
            r.violations,
            vec![PromptViolation::MissingAttribute {
                item_type: "openness".into(),
                attribute: "curious".into()
            }]
        );
    }

    #[test]
    fn key_set_differences() {
        let mut s = spec();
        let prompts = s.main_prompts.as_mut().unwrap();
        prompts.shift_remove("neuroticism");
        prompts.insert("extraversion".into(), "x".into());
        let r = validate_custom_prompts(&s);
        assert_eq!(r.violations.len(), 2);
        assert!(r.violations.contains(&PromptViolation::MissingType {
            item_type: "neuroticism".into()
        }));
        assert!(r.violations.contains(&PromptViolation::ExtraType {
            item_type: "extraversion".into()
        }));
    }

    #[test]
    fn attribute_match_is_case_sensitive() {
        let mut s = spec();
        s.main_prompts.as_mut().unwrap()["openness"] = "Cover Creative and curious.".into();
        assert_eq!(validate_custom_prompts(&s).violations.len(), 1);
    }
}
