use std::collections::HashSet;

use super::builtin::{build_builtin_prompt, repetition_block, FORMAT_INSTRUCTION, STRICT_REMINDER};
use super::parse::parse_generated_items;
use super::{validate_custom_prompts, GenerationSpec};
use crate::backend::ChatModel;
use crate::error::{Error, Result, Shortfall};
use crate::item::{validate_pool, Item, ItemPool, Provenance};

/// Batches in a row that may fail to parse or add nothing new before a type
/// is given up on.
pub const MAX_CONSECUTIVE_FAILURES: usize = 5;

fn custom_prompt(base: &str, prior: &[String], adaptive: bool) -> String {
    let mut prompt = base.to_string();
    if adaptive && !prior.is_empty() {
        prompt.push_str("\n\n");
        prompt.push_str(&repetition_block(prior));
    }
    prompt.push_str("\n\n");
    prompt.push_str(FORMAT_INSTRUCTION);
    prompt
}

/// Generate `target_n` items per item type through `chat`.
///
/// Batches of `min(remaining, 2 × attributes)` are requested one after the
/// other; in adaptive mode every earlier statement of the type is listed as
/// off limits. Statements equal to an earlier one (ignoring case) are
/// dropped. Ids are numbered `1..=N` over the final pool in type order.
pub fn generate_item_pool(spec: &GenerationSpec, chat: &dyn ChatModel) -> Result<ItemPool> {
    if spec.target_n == 0 {
        return Err(Error::Input("target_n must be at least 1".into()));
    }
    let spec_violations = spec.attributes.violations();
    if !spec_violations.is_empty() {
        let text: Vec<String> = spec_violations.iter().map(ToString::to_string).collect();
        return Err(Error::Input(text.join("; ")));
    }
    if spec.is_custom() {
        let report = validate_custom_prompts(spec);
        if !report.is_valid() {
            return Err(Error::Input(report.to_string()));
        }
    }

    let mut items: Vec<Item> = Vec::new();
    let mut shortfalls = Vec::new();
    for (item_type, attributes) in spec.attributes.iter() {
        let mut accepted: Vec<Item> = Vec::new();
        let mut seen: HashSet<String> = HashSet::new();
        let mut failures = 0;
        let mut strict = false;
        let mut next_id = 1;
        while accepted.len() < spec.target_n && failures < MAX_CONSECUTIVE_FAILURES {
            let remaining = spec.target_n - accepted.len();
            let batch_n = remaining.min(2 * attributes.len());
            let prior: Vec<String> = if spec.adaptive {
                accepted.iter().map(|i| i.statement.clone()).collect()
            } else {
                Vec::new()
            };
            let mut prompt = match &spec.main_prompts {
                Some(custom) => custom_prompt(&custom[item_type], &prior, spec.adaptive),
                None => build_builtin_prompt(spec, item_type, &prior, batch_n)?,
            };
            if strict {
                prompt.push_str("\n\n");
                prompt.push_str(STRICT_REMINDER);
            }
            let response = chat.complete(&prompt, spec.system_role.as_deref())?;
            match parse_generated_items(&response, item_type, attributes, &mut next_id) {
                Ok(batch) => {
                    strict = false;
                    let before = accepted.len();
                    for item in batch.items {
                        if accepted.len() == spec.target_n {
                            break;
                        }
                        if seen.insert(item.statement.to_lowercase()) {
                            accepted.push(item);
                        }
                    }
                    if accepted.len() == before {
                        failures += 1;
                    } else {
                        failures = 0;
                    }
                    log::debug!(
                        "{item_type}: {} of {} items after batch of {batch_n}",
                        accepted.len(),
                        spec.target_n
                    );
                }
                Err(Error::Parse { skipped }) => {
                    log::warn!("{item_type}: unparsable response ({skipped} lines), retrying");
                    strict = true;
                    failures += 1;
                }
                Err(e) => return Err(e),
            }
        }
        if accepted.len() < spec.target_n {
            shortfalls.push(Shortfall {
                item_type: item_type.to_string(),
                generated: accepted.len(),
                target: spec.target_n,
            });
        }
        items.extend(accepted);
    }

    for (n, item) in items.iter_mut().enumerate() {
        item.id = (n + 1).to_string();
    }
    let pool = ItemPool::new(items, Provenance::Generated);
    if !shortfalls.is_empty() {
        return Err(Error::Generation {
            shortfalls,
            partial: Box::new(pool),
        });
    }
    let report = validate_pool(&pool, &spec.attributes);
    if !report.is_valid() {
        return Err(Error::InvalidPool(report));
    }
    Ok(pool)
}
