use super::GenerationSpec;
use crate::error::{Error, Result};

/// Output-format instruction appended to every generation prompt.
pub const FORMAT_INSTRUCTION: &str = "Output format: write one item per line as \
`attribute | statement`, where attribute is exactly one of the attribute names \
given above, spelled as given. Do not number the lines and do not write anything \
else.";

/// Added after a response that contained no parsable line.
pub const STRICT_REMINDER: &str = "Your previous reply could not be read. Reply \
with nothing but lines of the form `attribute | statement`.";

/// Split `n` items over `k` attributes as evenly as possible; the remainder
/// goes one each to the first attributes in declaration order.
pub fn allocate_counts(n: usize, k: usize) -> Vec<usize> {
    if k == 0 {
        return Vec::new();
    }
    (0..k).map(|i| n / k + usize::from(i < n % k)).collect()
}

/// Assemble the built-in prompt for one batch of `batch_n` items.
///
/// Sections, in order: task framing, type definition, attribute list, count
/// instruction, response options, example items, the do-not-repeat list
/// (only when `prior_items` is non-empty), the output format, and finally
/// the prompt notes.
pub fn build_builtin_prompt(
    spec: &GenerationSpec,
    item_type: &str,
    prior_items: &[String],
    batch_n: usize,
) -> Result<String> {
    let attributes = spec
        .attributes
        .attributes(item_type)
        .ok_or_else(|| Error::Input(format!("unknown item type `{item_type}`")))?;
    if batch_n == 0 {
        return Err(Error::Input("batch size must be at least 1".into()));
    }

    let mut sections: Vec<String> = Vec::new();

    let mut framing = format!("Write new items for a psychometric scale measuring {item_type}.");
    if let Some(title) = &spec.scale_title {
        framing.push_str(&format!(" The scale is titled \"{title}\"."));
    }
    if let Some(domain) = &spec.domain {
        framing.push_str(&format!(" Research domain: {domain}."));
    }
    if let Some(audience) = &spec.audience {
        framing.push_str(&format!(" Intended respondents: {audience}."));
    }
    sections.push(framing);

    if let Some(definition) = spec.item_type_definitions.get(item_type) {
        sections.push(format!("Definition of {item_type}: {definition}"));
    }

    sections.push(format!(
        "The items must cover these attributes of {item_type}: {}.",
        attributes.join(", ")
    ));

    let counts = allocate_counts(batch_n, attributes.len());
    let plan: Vec<String> = attributes
        .iter()
        .zip(&counts)
        .filter(|(_, c)| **c > 0)
        .map(|(a, c)| format!("{a}: {c}"))
        .collect();
    sections.push(format!(
        "Write exactly {batch_n} items in total, split across attributes as follows: {}.",
        plan.join(", ")
    ));

    if !spec.response_options.is_empty() {
        sections.push(format!(
            "Respondents will answer each item using these response options: {}.",
            spec.response_options.join(", ")
        ));
    }

    let examples: Vec<&str> = spec
        .item_examples
        .iter()
        .filter(|i| i.item_type == item_type)
        .map(|i| i.statement.as_str())
        .collect();
    if !examples.is_empty() {
        let mut block = String::from("Example items showing the desired style:");
        for e in examples {
            block.push_str("\n- ");
            block.push_str(e);
        }
        sections.push(block);
    }

    if !prior_items.is_empty() {
        sections.push(repetition_block(prior_items));
    }

    sections.push(FORMAT_INSTRUCTION.to_string());

    if let Some(notes) = &spec.prompt_notes {
        sections.push(notes.clone());
    }
    Ok(sections.join("\n\n"))
}

/// The do-not-repeat block listing every prior statement verbatim.
pub(crate) fn repetition_block(prior_items: &[String]) -> String {
    let mut block =
        String::from("Do not repeat or rephrase any of these previously written items:");
    for s in prior_items {
        block.push_str("\n- ");
        block.push_str(s);
    }
    block
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::item::{AttributeSpec, Item};

    fn big5_openness() -> GenerationSpec {
        GenerationSpec::new(
            AttributeSpec::new([(
                "openness",
                vec!["creative", "perceptual", "curious", "philosophical"],
            )]),
            8,
        )
    }

    #[test]
    fn allocation_is_even_with_round_robin_remainder() {
        assert_eq!(allocate_counts(8, 4), vec![2, 2, 2, 2]);
        assert_eq!(allocate_counts(6, 4), vec![2, 2, 1, 1]);
        assert_eq!(allocate_counts(3, 4), vec![1, 1, 1, 0]);
    }

    #[test]
    fn notes_come_last() {
        let mut spec = big5_openness();
        let note = "Every item starts with 'I am someone who'.";
        spec.prompt_notes = Some(note.into());
        let p = build_builtin_prompt(&spec, "openness", &[], 8).unwrap();
        assert!(p.ends_with(note));
        assert!(p.contains("creative: 2, perceptual: 2, curious: 2, philosophical: 2"));
        assert!(!p.contains("Do not repeat"));
    }

    #[test]
    fn prior_items_are_listed_verbatim() {
        let prior: Vec<String> = (0..8).map(|i| format!("I am someone who does thing {i}.")).collect();
        let p = build_builtin_prompt(&big5_openness(), "openness", &prior, 8).unwrap();
        let block = &p[p.find("Do not repeat").unwrap()..];
        for s in &prior {
            assert!(block.contains(s.as_str()));
        }
    }

    #[test]
    fn section_order() {
        let mut spec = big5_openness();
        spec.domain = Some("personality measurement".into());
        spec.item_type_definitions.insert("openness".into(), "DEF".into());
        spec.response_options = vec!["disagree".into(), "agree".into()];
        spec.item_examples = vec![Item::new("e1", "EXAMPLE", "creative", "openness")];
        spec.prompt_notes = Some("NOTES".into());
        let p = build_builtin_prompt(&spec, "openness", &["PRIOR".to_string()], 4).unwrap();
        let pos = |s: &str| p.find(s).unwrap();
        let order = [
            pos("personality measurement"),
            pos("DEF"),
            pos("cover these attributes"),
            pos("exactly 4 items"),
            pos("disagree, agree"),
            pos("EXAMPLE"),
            pos("PRIOR"),
            pos("Output format"),
            pos("NOTES"),
        ];
        assert!(order.windows(2).all(|w| w[0] < w[1]), "{order:?}");
    }

    #[test]
    fn deterministic_and_rejects_unknown_type() {
        let spec = big5_openness();
        assert_eq!(
            build_builtin_prompt(&spec, "openness", &[], 5).unwrap(),
            build_builtin_prompt(&spec, "openness", &[], 5).unwrap()
        );
        assert!(build_builtin_prompt(&spec, "grit", &[], 5).is_err());
    }
}
