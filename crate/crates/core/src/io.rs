//! Item tables (CSV / JSON) and embedding matrix CSV files.
//!
//! Item tables carry the columns `ID`, `statement`, `attribute`, `type`
//! (matched case-insensitively, any order; extra columns ignored). Final item
//! tables add `EGA_com`. Embedding CSVs have one header row of item IDs and
//! one row per embedding dimension.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use nalgebra::DMatrix;

use crate::embedding::{EmbeddingKind, EmbeddingMatrix};
use crate::error::{Error, Result};
use crate::item::{validate_pool, AttributeSpec, Item, ItemPool, Provenance};

const REQUIRED: [&str; 4] = ["statement", "attribute", "type", "ID"];

/// Load and validate an item table. `.json` files are read as a JSON array
/// of objects; anything else as CSV. When `spec` is `None` the attribute
/// spec is derived from the table itself.
pub fn load_pool(path: &Path, spec: Option<&AttributeSpec>) -> Result<ItemPool> {
    let is_json = path
        .extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"));
    let file = fs::File::open(path)?;
    let items = if is_json {
        read_items_json(file)?
    } else {
        read_items_csv(file)?
    };
    let pool = ItemPool::new(items, Provenance::UserSupplied);
    let derived;
    let spec = match spec {
        Some(s) => s,
        None => {
            derived = AttributeSpec::from_items(&pool.items);
            &derived
        }
    };
    let report = validate_pool(&pool, spec);
    if !report.is_valid() {
        return Err(Error::InvalidPool(report));
    }
    Ok(pool)
}

pub fn read_items_csv<R: Read>(reader: R) -> Result<Vec<Item>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_reader(reader);
    let headers = rdr.headers()?.clone();
    let column = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h.trim().eq_ignore_ascii_case(name))
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };
    let [statement, attribute, item_type, id] = [
        column(REQUIRED[0])?,
        column(REQUIRED[1])?,
        column(REQUIRED[2])?,
        column(REQUIRED[3])?,
    ];
    let community = column("EGA_com").ok();

    let mut items = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let field = |i: usize| record.get(i).unwrap_or("").trim().to_string();
        let mut item = Item::new(field(id), field(statement), field(attribute), field(item_type));
        if let Some(c) = community {
            item.ega_community = record.get(c).and_then(|v| v.trim().parse().ok());
        }
        items.push(item);
    }
    Ok(items)
}

pub fn read_items_json<R: Read>(reader: R) -> Result<Vec<Item>> {
    let raw: Vec<serde_json::Map<String, serde_json::Value>> = serde_json::from_reader(reader)?;
    raw.into_iter()
        .map(|obj| {
            let get = |name: &str| -> Result<String> {
                let v = obj
                    .iter()
                    .find(|(k, _)| k.eq_ignore_ascii_case(name))
                    .map(|(_, v)| v)
                    .ok_or_else(|| Error::MissingColumn(name.to_string()))?;
                Ok(match v {
                    serde_json::Value::String(s) => s.trim().to_string(),
                    other => other.to_string(),
                })
            };
            let mut item = Item::new(get("ID")?, get("statement")?, get("attribute")?, get("type")?);
            item.ega_community = obj
                .iter()
                .find(|(k, _)| k.eq_ignore_ascii_case("EGA_com"))
                .and_then(|(_, v)| v.as_u64())
                .and_then(|c| u32::try_from(c).ok());
            Ok(item)
        })
        .collect()
}

/// Write an item table as CSV. `EGA_com` is emitted when `with_community`.
pub fn write_items_csv<W: Write>(items: &[Item], writer: W, with_community: bool) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    if with_community {
        w.write_record(["ID", "statement", "attribute", "type", "EGA_com"])?;
    } else {
        w.write_record(["ID", "statement", "attribute", "type"])?;
    }
    for item in items {
        let mut rec = vec![
            item.id.clone(),
            item.statement.clone(),
            item.attribute.clone(),
            item.item_type.clone(),
        ];
        if with_community {
            rec.push(item.ega_community.map(|c| c.to_string()).unwrap_or_default());
        }
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_items_json<W: Write>(items: &[Item], writer: W) -> Result<()> {
    serde_json::to_writer_pretty(writer, items)?;
    Ok(())
}

/// Read an embedding CSV. Files named `*_sparse.csv` are tagged sparse.
pub fn load_embeddings(path: &Path) -> Result<EmbeddingMatrix> {
    let kind = if path
        .file_name()
        .and_then(|n| n.to_str())
        .is_some_and(|n| n.ends_with("_sparse.csv"))
    {
        EmbeddingKind::Sparse
    } else {
        EmbeddingKind::Full
    };
    read_embeddings_csv(fs::File::open(path)?, kind)
}

pub fn read_embeddings_csv<R: Read>(reader: R, kind: EmbeddingKind) -> Result<EmbeddingMatrix> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).from_reader(reader);
    let ids: Vec<String> = rdr.headers()?.iter().map(|h| h.trim().to_string()).collect();
    if ids.is_empty() || ids.iter().all(String::is_empty) {
        return Err(Error::Schema("embedding file has no item-id header".into()));
    }
    let mut data = Vec::new();
    let mut rows = 0;
    for record in rdr.records() {
        let record = record?;
        for field in record.iter() {
            let v: f64 = field.trim().parse().map_err(|_| {
                Error::Schema(format!("non-numeric embedding value `{field}` in row {}", rows + 2))
            })?;
            data.push(v);
        }
        rows += 1;
    }
    let values = DMatrix::from_row_slice(rows, ids.len(), &data);
    EmbeddingMatrix::new(values, ids, kind)
}

pub fn write_embeddings_csv<W: Write>(emb: &EmbeddingMatrix, writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(emb.item_ids())?;
    let v = emb.values();
    for r in 0..v.nrows() {
        w.write_record((0..v.ncols()).map(|c| v[(r, c)].to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// Write `bytes` to `path` through a temporary sibling and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|p| !p.as_os_str().is_empty());
    if let Some(dir) = dir {
        fs::create_dir_all(dir)?;
    }
    let name = path
        .file_name()
        .and_then(|n| n.to_str())
        .ok_or_else(|| Error::Input(format!("bad output path {}", path.display())))?;
    let tmp = path.with_file_name(format!(".{name}.tmp"));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_csv_is_schema_error() {
        let err = read_items_csv("".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::MissingColumn(_)));
    }

    #[test]
    fn missing_column_named() {
        let err = read_items_csv("statement,attribute,ID\nx,y,1\n".as_bytes()).unwrap_err();
        assert!(matches!(err, Error::MissingColumn(ref c) if c == "type"));
    }

    #[test]
    fn header_case_and_order_and_extras() {
        let csv = "Notes,id,TYPE,Statement,Attribute\nfoo,7,openness,I paint.,creative\n";
        let items = read_items_csv(csv.as_bytes()).unwrap();
        assert_eq!(items, vec![Item::new("7", "I paint.", "creative", "openness")]);
    }

    #[test]
    fn json_items_accept_numeric_ids() {
        let json = r#"[{"ID": 3, "statement": "I paint.", "attribute": "creative", "type": "openness"}]"#;
        let items = read_items_json(json.as_bytes()).unwrap();
        assert_eq!(items[0].id, "3");
    }

    #[test]
    fn embedding_csv_round_trip_is_exact() {
        let emb = EmbeddingMatrix::from_columns(
            vec!["a".into(), "b".into()],
            &[vec![0.1, -1e-9, 3.0], vec![1.0 / 3.0, 2.5e10, -0.0]],
        )
        .unwrap();
        let mut buf = Vec::new();
        write_embeddings_csv(&emb, &mut buf).unwrap();
        let back = read_embeddings_csv(buf.as_slice(), EmbeddingKind::Full).unwrap();
        assert_eq!(back, emb);
    }
}
