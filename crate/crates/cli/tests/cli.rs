#[path = "../../llm/tests/support/mod.rs"]
mod mock;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use aigenie_core::io::{write_embeddings_csv, write_items_csv};
use aigenie_core::synthetic::{planted_pool, PlantedSpec};
use mock::MockServer;

fn aigenie(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aigenie"))
        .args(args)
        .env_remove("OPENAI_API_KEY")
        .env_remove("ANTHROPIC_API_KEY")
        .env_remove("GROQ_API_KEY")
        .env_remove("JINA_API_KEY")
        .env_remove("HF_TOKEN")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Writes a planted pool and its embeddings; returns their paths.
fn planted_files(dir: &Path, spec: &PlantedSpec, seed: u64) -> (PathBuf, PathBuf) {
    let planted = planted_pool(spec, seed);
    let items = dir.join("items.csv");
    let emb = dir.join("emb_full.csv");
    write_items_csv(&planted.pool.items, std::fs::File::create(&items).unwrap(), false).unwrap();
    write_embeddings_csv(&planted.embeddings, std::fs::File::create(&emb).unwrap()).unwrap();
    (items, emb)
}

fn small_spec() -> PlantedSpec {
    PlantedSpec {
        item_type: "openness".into(),
        n_attributes: 3,
        items_per_attribute: 6,
        dims: 96,
        n_duplicates: 2,
        n_bridges: 0,
        ..PlantedSpec::default()
    }
}

#[test]
fn reduce_writes_every_artifact() {
    let dir = tempfile::tempdir().unwrap();
    let (items, emb) = planted_files(dir.path(), &small_spec(), 3);
    let out = dir.path().join("out");
    let o = aigenie(&[
        "reduce",
        "--items",
        items.to_str().unwrap(),
        "--embeddings",
        emb.to_str().unwrap(),
        "--seed",
        "7",
        "--n-boot",
        "20",
        "--out",
        out.to_str().unwrap(),
        "--offline",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    for name in [
        "result.json",
        "final_items.csv",
        "final_items_openness.csv",
        "network_openness.svg",
        "network_openness.csv",
        "stability_openness.svg",
        "stability_openness.csv",
        "embeddings_openness_full.csv",
        "uva_log_openness.csv",
    ] {
        assert!(out.join(name).is_file(), "missing {name}");
    }
    let result: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("result.json")).unwrap()).unwrap();
    let t = &result["item_type_level"]["openness"];
    assert_eq!(t["start_N"], 20);
    assert_eq!(t["UVA"]["n_removed"], 2);
    let svg = std::fs::read_to_string(out.join("network_openness.svg")).unwrap();
    let annotation = format!("NMI: {:.2}%", t["final_NMI"].as_f64().unwrap());
    assert!(svg.contains(&annotation));
    // No stray temporary files.
    assert!(std::fs::read_dir(&out)
        .unwrap()
        .all(|e| !e.unwrap().file_name().to_string_lossy().ends_with(".tmp")));
}

#[test]
fn small_pool_exits_degraded() {
    let dir = tempfile::tempdir().unwrap();
    let spec = PlantedSpec {
        n_attributes: 2,
        items_per_attribute: 3,
        n_duplicates: 0,
        ..small_spec()
    };
    let (items, emb) = planted_files(dir.path(), &spec, 1);
    let out = dir.path().join("out");
    let o = aigenie(&[
        "reduce",
        "--items",
        items.to_str().unwrap(),
        "--embeddings",
        emb.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--offline",
    ]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(out.join("result.json").is_file());
}

#[test]
fn embeddings_missing_items_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let (items, _) = planted_files(dir.path(), &small_spec(), 3);
    let other = planted_pool(&PlantedSpec { items_per_attribute: 5, ..small_spec() }, 3);
    let emb = dir.path().join("short.csv");
    write_embeddings_csv(&other.embeddings, std::fs::File::create(&emb).unwrap()).unwrap();
    let o = aigenie(&[
        "reduce",
        "--items",
        items.to_str().unwrap(),
        "--embeddings",
        emb.to_str().unwrap(),
        "--offline",
        "--out",
        dir.path().join("out").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!dir.path().join("out").exists());
}

#[test]
fn reduce_without_embeddings_offline_is_a_provider_error() {
    let dir = tempfile::tempdir().unwrap();
    let (items, _) = planted_files(dir.path(), &small_spec(), 3);
    let cfg = dir.path().join("cfg.toml");
    std::fs::write(&cfg, "[providers.openai]\napi_key = \"sk-test\"\n").unwrap();
    let o = aigenie(&[
        "reduce",
        "--config",
        cfg.to_str().unwrap(),
        "--items",
        items.to_str().unwrap(),
        "--offline",
    ]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("offline"));
}

fn provider_config(dir: &Path, server: &MockServer, extra: &str) -> PathBuf {
    let cfg = dir.join("cfg.toml");
    std::fs::write(
        &cfg,
        format!(
            "{extra}\n[providers.groq]\napi_key = \"gsk-test\"\nbase_url = \"{}\"\n\n[providers.openai]\napi_key = \"sk-test\"\nbase_url = \"{}\"\n",
            server.url, server.url
        ),
    )
    .unwrap();
    cfg
}

#[test]
fn models_lists_filtered_catalog() {
    let server = MockServer::fixed(mock::fixture("groq_models.json"));
    let dir = tempfile::tempdir().unwrap();
    let cfg = provider_config(dir.path(), &server, "");
    let o = aigenie(&["models", "--config", cfg.to_str().unwrap(), "--provider", "groq", "--type", "chat"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines,
        [
            "groq\tchat\tllama-3.3-70b-versatile",
            "groq\tchat\tqwen-2.5-72b",
            "groq\tchat\tgemma2-9b-it"
        ]
    );
    assert_eq!(server.hits(), 1);
}

#[test]
fn models_without_providers_reports_the_gap() {
    let o = aigenie(&["models"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("no providers configured"));
}

#[test]
fn chat_prints_the_response() {
    let server = MockServer::fixed(mock::fixture("openai_chat.json"));
    let dir = tempfile::tempdir().unwrap();
    let cfg = provider_config(dir.path(), &server, "");
    let o = aigenie(&[
        "chat",
        "--config",
        cfg.to_str().unwrap(),
        "--model",
        "gpt-4o",
        "--temperature",
        "1.5",
        "--prompt",
        "Generate 5 items measuring conscientiousness for a personality scale.",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).starts_with("1. I complete my tasks thoroughly and on time."));
    let req = &server.recorded()[0];
    assert_eq!(req.json()["temperature"], 1.5);
}

#[test]
fn chat_offline_never_connects() {
    let server = MockServer::fixed(mock::fixture("openai_chat.json"));
    let dir = tempfile::tempdir().unwrap();
    let cfg = provider_config(dir.path(), &server, "");
    let o = aigenie(&["chat", "--config", cfg.to_str().unwrap(), "--prompt", "hi", "--offline"]);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(server.connections.load(std::sync::atomic::Ordering::SeqCst), 0);
}

#[test]
fn bad_temperature_is_rejected_before_any_call() {
    let server = MockServer::fixed(mock::fixture("openai_chat.json"));
    let dir = tempfile::tempdir().unwrap();
    let cfg = provider_config(dir.path(), &server, "");
    let o = aigenie(&["chat", "--config", cfg.to_str().unwrap(), "--prompt", "hi", "--top-p", "0"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(server.hits(), 0);
}

/// Answers chat requests with fresh `attribute | statement` lines and
/// embedding requests with text-derived vectors.
fn full_stack_server() -> MockServer {
    MockServer::start(|req, n| {
        if req.path.ends_with("/chat/completions") {
            let attrs = ["creative", "curious", "imaginative"];
            let lines: Vec<String> = (0..6)
                .map(|i| format!("{} | Generated statement {n}-{i} about ideas.", attrs[i % 3]))
                .collect();
            let body = serde_json::json!({"choices":[{"message":{"content": lines.join("\n")}}]});
            (200, body.to_string())
        } else {
            let inputs = req.json()["input"].as_array().unwrap().clone();
            let data: Vec<serde_json::Value> = inputs
                .iter()
                .enumerate()
                .map(|(i, t)| {
                    let text = t.as_str().unwrap();
                    let mut h = text.bytes().fold(1469598103934665603u64, |h, b| (h ^ b as u64).wrapping_mul(1099511628211));
                    let v: Vec<f64> = (0..48)
                        .map(|_| {
                            h ^= h << 13;
                            h ^= h >> 7;
                            h ^= h << 17;
                            (h % 2001) as f64 / 1000.0 - 1.0
                        })
                        .collect();
                    serde_json::json!({"index": i, "embedding": v})
                })
                .collect();
            (200, serde_json::json!({ "data": data }).to_string())
        }
    })
}

#[test]
fn run_drives_generation_embedding_and_reduction() {
    let server = full_stack_server();
    let dir = tempfile::tempdir().unwrap();
    let extra = r#"
[generation]
target_n = 12
[generation.attributes]
openness = ["creative", "curious", "imaginative"]

[chat]
model = "llama3"

[embedding]
model = "text-embedding-3-small"

[pipeline]
n_boot = 10
"#;
    let cfg = provider_config(dir.path(), &server, extra);
    let out = dir.path().join("out");
    let o = aigenie(&["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(matches!(o.status.code(), Some(0) | Some(3)), "{}", stderr(&o));
    assert!(out.join("result.json").is_file());
    let meta = std::fs::read_to_string(out.join("run.json")).unwrap();
    assert!(meta.contains("llama-3.3-70b-versatile"));
    assert!(meta.contains("\"max_tokens\": null"));
    assert!(!meta.contains("gsk-test") && !meta.contains("sk-test"));
    let paths: Vec<String> = server.recorded().iter().map(|r| r.path.clone()).collect();
    assert!(paths.iter().any(|p| p == "/v1/chat/completions"));
    assert!(paths.iter().any(|p| p == "/v1/embeddings"));

    let items_only = dir.path().join("items_only");
    let o = aigenie(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        items_only.to_str().unwrap(),
        "--items-only",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(items_only.join("items.csv").is_file());
    assert!(!items_only.join("result.json").exists());
}
