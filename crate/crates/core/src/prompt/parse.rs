use crate::error::{Error, Result};
use crate::item::Item;

/// Items parsed from one response.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParsedBatch {
    pub items: Vec<Item>,
    /// Non-blank lines that did not match the grammar.
    pub skipped: usize,
}

/// Remove a leading list marker such as `-`, `*`, `•`, `3.` or `3)`.
fn strip_marker(line: &str) -> &str {
    let line = line.trim();
    for bullet in ["- ", "* ", "• "] {
        if let Some(rest) = line.strip_prefix(bullet) {
            return rest.trim_start();
        }
    }
    let digits = line.bytes().take_while(u8::is_ascii_digit).count();
    if digits > 0 {
        let rest = &line[digits..];
        if let Some(rest) = rest.strip_prefix('.').or_else(|| rest.strip_prefix(')')) {
            return rest.trim_start();
        }
    }
    line
}

/// Parse `attribute | statement` lines into items of `item_type`, numbering
/// them from `next_id`. The attribute must be one of `attributes` exactly;
/// anything else is skipped and counted.
///
/// A response without a single parsable line is a [`Error::Parse`].
pub fn parse_generated_items(
    response: &str,
    item_type: &str,
    attributes: &[String],
    next_id: &mut usize,
) -> Result<ParsedBatch> {
    let mut items = Vec::new();
    let mut skipped = 0;
    for raw in response.lines() {
        if raw.trim().is_empty() {
            continue;
        }
        let line = strip_marker(raw);
        let parsed = line.split_once('|').and_then(|(attr, statement)| {
            let attr = attr.trim();
            let statement = statement.trim();
            (!statement.is_empty() && attributes.iter().any(|a| a == attr))
                .then(|| (attr.to_string(), statement.to_string()))
        });
        match parsed {
            Some((attr, statement)) => {
                items.push(Item::new(next_id.to_string(), statement, attr, item_type));
                *next_id += 1;
            }
            None => skipped += 1,
        }
    }
    if items.is_empty() {
        return Err(Error::Parse { skipped });
    }
    Ok(ParsedBatch { items, skipped })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn attrs() -> Vec<String> {
        ["creative", "perceptual", "curious", "philosophical"]
            .iter()
            .map(|s| s.to_string())
            .collect()
    }

    #[test]
    fn parses_grammar_lines() {
        let mut next = 7;
        let b = parse_generated_items(
            "creative | I am someone who often loses myself in creative projects.",
            "openness",
            &attrs(),
            &mut next,
        )
        .unwrap();
        assert_eq!(
            b.items,
            vec![Item::new(
                "7",
                "I am someone who often loses myself in creative projects.",
                "creative",
                "openness"
            )]
        );
        assert_eq!(b.skipped, 0);
        assert_eq!(next, 8);
    }

    #[test]
    fn strips_list_markers_and_skips_unknown_attributes() {
        let text = "1. curious | I ask many questions.\n- organised | I keep lists.\n\n* perceptual | I notice small details.";
        let b = parse_generated_items(text, "openness", &attrs(), &mut 1).unwrap();
        assert_eq!(b.items.len(), 2);
        assert_eq!(b.skipped, 1);
        assert_eq!(b.items[0].attribute, "curious");
        assert_eq!(b.items[1].id, "2");
    }

    #[test]
    fn free_text_list_is_a_parse_error() {
        let text = "1. I plan my tasks carefully.\n2. I keep my promises.";
        assert!(matches!(
            parse_generated_items(text, "openness", &attrs(), &mut 1),
            Err(Error::Parse { skipped: 2 })
        ));
    }

    #[test]
    fn pipe_inside_statement_is_kept() {
        let b = parse_generated_items("curious | I like this | and that.", "openness", &attrs(), &mut 1).unwrap();
        assert_eq!(b.items[0].statement, "I like this | and that.");
    }
}
