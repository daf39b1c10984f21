//! Files written for a run. Everything is rendered in memory first, then
//! each file is written through a temporary sibling and a rename.

use std::path::Path;

use aigenie_core::io::{write_atomic, write_embeddings_csv, write_items_csv};
use aigenie_core::uva::write_uva_log_csv;
use aigenie_core::{EmbeddingMatrix, GenieResult, Item, ItemPool};

pub type Artifact = (String, Vec<u8>);

/// File-name form of an item type: anything outside `[A-Za-z0-9_-]`
/// becomes `_`.
pub fn slug(name: &str) -> String {
    let s: String = name
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect();
    if s.is_empty() {
        "_".into()
    } else {
        s
    }
}

fn items_csv(items: &[Item], with_community: bool) -> aigenie_core::Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_items_csv(items, &mut buf, with_community)?;
    Ok(buf)
}

fn embeddings_csv(emb: &EmbeddingMatrix) -> aigenie_core::Result<Vec<u8>> {
    let mut buf = Vec::new();
    write_embeddings_csv(emb, &mut buf)?;
    Ok(buf)
}

pub fn pool_artifacts(pool: &ItemPool) -> aigenie_core::Result<Vec<Artifact>> {
    Ok(vec![("items.csv".into(), items_csv(&pool.items, false)?)])
}

pub fn embedding_artifacts(pool: &ItemPool, emb: &EmbeddingMatrix) -> aigenie_core::Result<Vec<Artifact>> {
    let mut files = pool_artifacts(pool)?;
    files.push(("embeddings.csv".into(), embeddings_csv(emb)?));
    Ok(files)
}

/// `result.json`, the combined and per-type final item tables, plot
/// documents with their data tables, embeddings and UVA logs.
pub fn genie_artifacts(result: &GenieResult) -> aigenie_core::Result<Vec<Artifact>> {
    let mut json = serde_json::to_vec_pretty(result)?;
    json.push(b'\n');
    let mut files = vec![("result.json".to_string(), json)];

    let all_final: Vec<Item> = result
        .item_type_level
        .values()
        .flat_map(|t| t.final_items.iter().cloned())
        .collect();
    files.push(("final_items.csv".into(), items_csv(&all_final, true)?));

    for (name, t) in &result.item_type_level {
        let s = slug(name);
        files.push((format!("final_items_{s}.csv"), items_csv(&t.final_items, true)?));
        files.push((format!("network_{s}.svg"), t.network_plot.svg.clone().into_bytes()));
        files.push((format!("network_{s}.csv"), t.network_plot.table.clone().into_bytes()));
        files.push((format!("stability_{s}.svg"), t.stability_plot.svg.clone().into_bytes()));
        files.push((format!("stability_{s}.csv"), t.stability_plot.table.clone().into_bytes()));
        files.push((format!("embeddings_{s}_full.csv"), embeddings_csv(&t.embeddings.full)?));
        if let Some(sparse) = &t.embeddings.sparse {
            files.push((format!("embeddings_{s}_sparse.csv"), embeddings_csv(sparse)?));
        }
        let mut log = Vec::new();
        write_uva_log_csv(&t.uva, &mut log)?;
        files.push((format!("uva_log_{s}.csv"), log));
    }
    Ok(files)
}

pub fn write_all(dir: &Path, files: &[Artifact]) -> aigenie_core::Result<()> {
    for (name, bytes) in files {
        write_atomic(&dir.join(name), bytes)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slugs_are_file_safe() {
        assert_eq!(slug("job_replacement"), "job_replacement");
        assert_eq!(slug("AI anxiety/ethics"), "AI_anxiety_ethics");
        assert_eq!(slug(""), "_");
    }
}
