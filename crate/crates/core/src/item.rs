//! Items, attribute specifications and item pools.

use std::collections::{HashMap, HashSet};
use std::fmt;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

/// A single candidate item.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Item {
    #[serde(rename = "ID")]
    pub id: String,
    pub statement: String,
    pub attribute: String,
    #[serde(rename = "type")]
    pub item_type: String,
    /// Community assigned by the final EGA, once known.
    #[serde(rename = "EGA_com", default, skip_serializing_if = "Option::is_none")]
    pub ega_community: Option<u32>,
}

impl Item {
    pub fn new(
        id: impl Into<String>,
        statement: impl Into<String>,
        attribute: impl Into<String>,
        item_type: impl Into<String>,
    ) -> Self {
        Self {
            id: id.into(),
            statement: statement.into(),
            attribute: attribute.into(),
            item_type: item_type.into(),
            ega_community: None,
        }
    }
}

/// Item types and the attributes (facets) each should cover, in declaration order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct AttributeSpec {
    types: IndexMap<String, Vec<String>>,
}

impl AttributeSpec {
    pub fn new<T, A, I>(types: I) -> Self
    where
        T: Into<String>,
        A: Into<String>,
        I: IntoIterator<Item = (T, Vec<A>)>,
    {
        let types = types
            .into_iter()
            .map(|(t, attrs)| {
                (
                    t.into().trim().to_string(),
                    attrs.into_iter().map(|a| a.into().trim().to_string()).collect(),
                )
            })
            .collect();
        Self { types }
    }

    /// Derive a spec from the types and attributes present in `items`,
    /// in order of first appearance.
    pub fn from_items(items: &[Item]) -> Self {
        let mut types: IndexMap<String, Vec<String>> = IndexMap::new();
        for item in items {
            let attrs = types.entry(item.item_type.trim().to_string()).or_default();
            let attr = item.attribute.trim();
            if !attrs.iter().any(|a| a == attr) {
                attrs.push(attr.to_string());
            }
        }
        Self { types }
    }

    pub fn type_names(&self) -> impl Iterator<Item = &str> {
        self.types.keys().map(String::as_str)
    }

    pub fn attributes(&self, item_type: &str) -> Option<&[String]> {
        self.types.get(item_type).map(Vec::as_slice)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &[String])> {
        self.types.iter().map(|(k, v)| (k.as_str(), v.as_slice()))
    }

    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }

    pub fn contains_type(&self, item_type: &str) -> bool {
        self.types.contains_key(item_type)
    }

    /// Structural problems of the spec itself.
    pub fn violations(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        for (t, attrs) in &self.types {
            if attrs.len() < 2 {
                out.push(Violation::TooFewAttributes {
                    item_type: t.clone(),
                    count: attrs.len(),
                });
            }
            let mut seen = HashSet::new();
            for a in attrs {
                if !seen.insert(a.as_str()) {
                    out.push(Violation::DuplicateAttribute {
                        item_type: t.clone(),
                        attribute: a.clone(),
                    });
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Generated,
    #[default]
    UserSupplied,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ItemPool {
    pub items: Vec<Item>,
    pub provenance: Provenance,
}

impl ItemPool {
    pub fn new(items: Vec<Item>, provenance: Provenance) -> Self {
        Self { items, provenance }
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn ids(&self) -> Vec<String> {
        self.items.iter().map(|i| i.id.clone()).collect()
    }

    /// Items of one type, preserving pool order.
    pub fn of_type(&self, item_type: &str) -> ItemPool {
        ItemPool {
            items: self
                .items
                .iter()
                .filter(|i| i.item_type == item_type)
                .cloned()
                .collect(),
            provenance: self.provenance,
        }
    }

    /// Item types in order of first appearance.
    pub fn type_names(&self) -> Vec<String> {
        let mut seen = HashSet::new();
        self.items
            .iter()
            .filter(|i| seen.insert(i.item_type.as_str()))
            .map(|i| i.item_type.clone())
            .collect()
    }

    /// Keep only the items whose id is in `keep`, preserving order.
    pub fn retain_ids(&self, keep: &HashSet<&str>) -> ItemPool {
        ItemPool {
            items: self
                .items
                .iter()
                .filter(|i| keep.contains(i.id.as_str()))
                .cloned()
                .collect(),
            provenance: self.provenance,
        }
    }
}

/// A problem that makes a pool unusable.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    DuplicateId { id: String },
    EmptyStatement { id: String },
    UnknownType { id: String, item_type: String },
    UnknownAttribute { id: String, item_type: String, attribute: String },
    TooFewAttributes { item_type: String, count: usize },
    DuplicateAttribute { item_type: String, attribute: String },
    EmptyType { item_type: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateId { id } => write!(f, "duplicate ID `{id}`"),
            Violation::EmptyStatement { id } => write!(f, "item `{id}` has an empty statement"),
            Violation::UnknownType { id, item_type } => {
                write!(f, "item `{id}` has unknown type `{item_type}`")
            }
            Violation::UnknownAttribute { id, item_type, attribute } => write!(
                f,
                "item `{id}` has attribute `{attribute}` not declared for type `{item_type}`"
            ),
            Violation::TooFewAttributes { item_type, count } => write!(
                f,
                "type `{item_type}` declares {count} attribute(s); at least 2 are required"
            ),
            Violation::DuplicateAttribute { item_type, attribute } => {
                write!(f, "type `{item_type}` declares attribute `{attribute}` twice")
            }
            Violation::EmptyType { item_type } => write!(f, "type `{item_type}` has no items"),
        }
    }
}

/// A suspicious but legal input.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Warning {
    DuplicateStatement { ids: Vec<String> },
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Warning::DuplicateStatement { ids } => {
                write!(f, "identical statements for items {}", ids.join(", "))
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
    pub warnings: Vec<Warning>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let lines: Vec<String> = self
            .violations
            .iter()
            .map(|v| v.to_string())
            .chain(self.warnings.iter().map(|w| format!("warning: {w}")))
            .collect();
        write!(f, "{}", lines.join("; "))
    }
}

/// Check `pool` against `spec`, reporting every problem found.
pub fn validate_pool(pool: &ItemPool, spec: &AttributeSpec) -> ValidationReport {
    let mut report = ValidationReport {
        violations: spec.violations(),
        warnings: Vec::new(),
    };

    let mut id_counts: IndexMap<&str, usize> = IndexMap::new();
    for item in &pool.items {
        *id_counts.entry(item.id.trim()).or_default() += 1;
    }
    for (id, n) in &id_counts {
        if *n > 1 {
            report.violations.push(Violation::DuplicateId { id: id.to_string() });
        }
    }

    let mut per_type: HashMap<&str, usize> = HashMap::new();
    for item in &pool.items {
        let id = item.id.trim();
        if item.statement.trim().is_empty() {
            report.violations.push(Violation::EmptyStatement { id: id.to_string() });
        }
        let t = item.item_type.trim();
        match spec.attributes(t) {
            None => report.violations.push(Violation::UnknownType {
                id: id.to_string(),
                item_type: t.to_string(),
            }),
            Some(attrs) => {
                *per_type.entry(t).or_default() += 1;
                let a = item.attribute.trim();
                if !attrs.iter().any(|x| x == a) {
                    report.violations.push(Violation::UnknownAttribute {
                        id: id.to_string(),
                        item_type: t.to_string(),
                        attribute: a.to_string(),
                    });
                }
            }
        }
    }
    for t in spec.type_names() {
        if !per_type.contains_key(t) {
            report.violations.push(Violation::EmptyType { item_type: t.to_string() });
        }
    }

    let mut by_statement: IndexMap<&str, Vec<String>> = IndexMap::new();
    for item in &pool.items {
        let s = item.statement.trim();
        if !s.is_empty() {
            by_statement.entry(s).or_default().push(item.id.trim().to_string());
        }
    }
    for ids in by_statement.into_values() {
        if ids.len() > 1 {
            report.warnings.push(Warning::DuplicateStatement { ids });
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big5() -> AttributeSpec {
        AttributeSpec::new([
            ("openness", vec!["creative", "perceptual", "curious", "philosophical"]),
            ("conscientiousness", vec!["organized", "responsible", "disciplined", "prudent"]),
        ])
    }

    fn openness_pool() -> ItemPool {
        let items = ["creative", "perceptual", "curious", "philosophical"]
            .iter()
            .enumerate()
            .map(|(i, a)| Item::new(format!("{}", i + 1), format!("I am someone who is {a}."), *a, "openness"))
            .chain(std::iter::once(Item::new("5", "I keep my desk tidy.", "organized", "conscientiousness")))
            .collect();
        ItemPool::new(items, Provenance::Generated)
    }

    #[test]
    fn valid_big_five_pool() {
        let report = validate_pool(&openness_pool(), &big5());
        assert!(report.is_valid(), "{report}");
        assert!(report.warnings.is_empty());
    }

    #[test]
    fn duplicate_id_reported_once() {
        let mut pool = openness_pool();
        pool.items[0].id = "AI_3".into();
        pool.items[1].id = "AI_3".into();
        let report = validate_pool(&pool, &big5());
        assert_eq!(report.violations, vec![Violation::DuplicateId { id: "AI_3".into() }]);
    }

    #[test]
    fn unknown_attribute() {
        let mut pool = openness_pool();
        pool.items[2].attribute = "tidy".into();
        let report = validate_pool(&pool, &big5());
        assert_eq!(
            report.violations,
            vec![Violation::UnknownAttribute {
                id: "3".into(),
                item_type: "openness".into(),
                attribute: "tidy".into()
            }]
        );
    }

    #[test]
    fn attribute_match_is_case_sensitive() {
        let mut pool = openness_pool();
        pool.items[0].attribute = "Creative".into();
        assert_eq!(validate_pool(&pool, &big5()).violations.len(), 1);
        pool.items[0].attribute = "  creative ".into();
        assert!(validate_pool(&pool, &big5()).is_valid());
    }

    #[test]
    fn reports_every_problem() {
        let mut pool = openness_pool();
        pool.items[0].statement = "   ".into();
        pool.items[1].item_type = "grit".into();
        let spec = AttributeSpec::new([
            ("openness", vec!["creative", "perceptual", "curious", "philosophical"]),
            ("conscientiousness", vec!["organized"]),
        ]);
        let report = validate_pool(&pool, &spec);
        assert_eq!(report.violations.len(), 3, "{report}");
        assert!(report
            .violations
            .contains(&Violation::TooFewAttributes { item_type: "conscientiousness".into(), count: 1 }));
    }

    #[test]
    fn duplicate_statements_are_warnings() {
        let mut pool = openness_pool();
        pool.items[1].statement = pool.items[0].statement.clone();
        let report = validate_pool(&pool, &big5());
        assert!(report.is_valid());
        assert_eq!(
            report.warnings,
            vec![Warning::DuplicateStatement { ids: vec!["1".into(), "2".into()] }]
        );
    }

    #[test]
    fn spec_from_items_keeps_first_appearance_order() {
        let spec = AttributeSpec::from_items(&openness_pool().items);
        assert_eq!(spec.type_names().collect::<Vec<_>>(), ["openness", "conscientiousness"]);
        assert_eq!(spec.attributes("openness").unwrap()[3], "philosophical");
    }

    #[test]
    fn validation_is_pure() {
        let mut pool = openness_pool();
        pool.items[0].id = "2".into();
        let a = format!("{:?}", validate_pool(&pool, &big5()));
        let b = format!("{:?}", validate_pool(&pool, &big5()));
        assert_eq!(a, b);
    }
}
