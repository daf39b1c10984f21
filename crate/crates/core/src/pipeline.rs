//! The full reduction pipeline: model selection, UVA, embedding selection,
//! bootstrap stability pruning and the final EGA, per item type.

use indexmap::IndexMap;
use rayon::prelude::*;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};

use crate::backend::{ChatModel, Embedder};
use crate::bootega::{boot_ega, stability_reduce, BootOptions, BootReport};
use crate::ega::{ega_scored, EgaOptions, EgaResult};
use crate::embedding::{EmbeddingKind, EmbeddingMatrix};
use crate::error::{Error, Result};
use crate::item::{Item, ItemPool};
use crate::network::{sparsify_embeddings, NetworkMethod, DEFAULT_MIDDLE_FRACTION};
use crate::partition::Partition;
use crate::prompt::{generate_item_pool, GenerationSpec};
use crate::report::{render_plots, PlotDocument};
use crate::seed::stage_seed;
use crate::uva::{uva_reduce, UvaReport, DEFAULT_WTO_CUTOFF, MIN_STAGE_ITEMS};

/// Smallest pool a reduction run (and each of its reducing stages) accepts.
pub const MIN_POOL: usize = 8;

/// Key used in `item_type_level` when all types are reduced together.
pub const ALL_TOGETHER_KEY: &str = "all_together";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelChoice {
    #[default]
    Auto,
    Glasso,
    Tmfg,
}

impl ModelChoice {
    fn candidates(self) -> &'static [NetworkMethod] {
        match self {
            ModelChoice::Auto => &[NetworkMethod::Glasso, NetworkMethod::Tmfg],
            ModelChoice::Glasso => &[NetworkMethod::Glasso],
            ModelChoice::Tmfg => &[NetworkMethod::Tmfg],
        }
    }
}

impl std::str::FromStr for ModelChoice {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "auto" => Ok(ModelChoice::Auto),
            other => other.parse::<NetworkMethod>().map(|m| match m {
                NetworkMethod::Glasso => ModelChoice::Glasso,
                NetworkMethod::Tmfg => ModelChoice::Tmfg,
            }),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineOptions {
    pub ega_model: ModelChoice,
    pub all_together: bool,
    pub run_overall: bool,
    pub keep_org: bool,
    pub items_only: bool,
    pub embeddings_only: bool,
    pub uva_cutoff: f64,
    pub stability_threshold: f64,
    pub n_boot: usize,
    pub seed: u64,
    /// Prune only the least stable item per bootstrap iteration.
    pub prune_one: bool,
    pub sparsify_fraction: f64,
    pub ega: EgaOptions,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        Self {
            ega_model: ModelChoice::Auto,
            all_together: false,
            run_overall: false,
            keep_org: false,
            items_only: false,
            embeddings_only: false,
            uva_cutoff: DEFAULT_WTO_CUTOFF,
            stability_threshold: crate::bootega::DEFAULT_STABILITY_THRESHOLD,
            n_boot: crate::bootega::DEFAULT_REPLICATES,
            seed: 0,
            prune_one: false,
            sparsify_fraction: DEFAULT_MIDDLE_FRACTION,
            ega: EgaOptions::default(),
        }
    }
}

impl PipelineOptions {
    pub fn validate(&self) -> Result<()> {
        if self.items_only && self.embeddings_only {
            return Err(Error::Input("items_only and embeddings_only are mutually exclusive".into()));
        }
        if !(self.uva_cutoff > 0.0 && self.uva_cutoff <= 1.0) {
            return Err(Error::Input(format!("uva_cutoff must be in (0, 1], got {}", self.uva_cutoff)));
        }
        if !(0.0..=1.0).contains(&self.stability_threshold) {
            return Err(Error::Input(format!(
                "stability_threshold must be in [0, 1], got {}",
                self.stability_threshold
            )));
        }
        if self.n_boot == 0 {
            return Err(Error::Input("n_boot must be at least 1".into()));
        }
        if !(self.sparsify_fraction > 0.0 && self.sparsify_fraction < 1.0) {
            return Err(Error::Input(format!(
                "sparsify_fraction must be in (0, 1), got {}",
                self.sparsify_fraction
            )));
        }
        Ok(())
    }
}

/// Embedding matrices of a reduction run.
///
/// `full` and `sparse` cover the final items; `org` (with `keep_org`) is the
/// full embedding of the starting pool.
#[derive(Debug, Clone, PartialEq)]
pub struct TypeEmbeddings {
    pub full: EmbeddingMatrix,
    pub sparse: Option<EmbeddingMatrix>,
    pub selected: EmbeddingKind,
    pub org: Option<EmbeddingMatrix>,
}

fn matrix_summary(m: &EmbeddingMatrix) -> serde_json::Value {
    serde_json::json!({ "kind": m.kind(), "dims": m.dims(), "n_items": m.n_items() })
}

impl Serialize for TypeEmbeddings {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("TypeEmbeddings", 4)?;
        s.serialize_field("full", &matrix_summary(&self.full))?;
        s.serialize_field("sparse", &self.sparse.as_ref().map(matrix_summary))?;
        s.serialize_field("selected", &self.selected)?;
        s.serialize_field("org", &self.org.as_ref().map(matrix_summary))?;
        s.end()
    }
}

/// NMI of each candidate in a model or embedding comparison.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Comparison {
    pub glasso: Option<f64>,
    pub tmfg: Option<f64>,
    pub full: Option<f64>,
    pub sparse: Option<f64>,
}

/// Result of one reduction run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TypeResult {
    #[serde(rename = "final_NMI")]
    pub final_nmi: Option<f64>,
    #[serde(rename = "initial_NMI")]
    pub initial_nmi: Option<f64>,
    pub embeddings: TypeEmbeddings,
    #[serde(rename = "UVA")]
    pub uva: UvaReport,
    #[serde(rename = "bootEGA")]
    pub boot_ega: BootReport,
    #[serde(rename = "EGA_model_selected")]
    pub ega_model_selected: Option<NetworkMethod>,
    pub final_items: Vec<Item>,
    #[serde(rename = "final_EGA")]
    pub final_ega: Option<EgaResult>,
    #[serde(rename = "initial_EGA")]
    pub initial_ega: Option<EgaResult>,
    #[serde(rename = "start_N")]
    pub start_n: usize,
    #[serde(rename = "final_N")]
    pub final_n: usize,
    pub network_plot: PlotDocument,
    pub stability_plot: PlotDocument,
    pub comparison: Comparison,
    pub degraded: bool,
    pub notes: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_items: Option<Vec<Item>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OverallAnalysis {
    #[serde(rename = "EGA")]
    pub ega: EgaResult,
    #[serde(rename = "NMI")]
    pub nmi: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Overall {
    pub final_items: Vec<Item>,
    /// Full embeddings of the final items of every run, concatenated.
    pub embeddings: EmbeddingMatrix,
    pub analysis: Option<OverallAnalysis>,
    pub initial_items: Option<Vec<Item>>,
    pub notes: Vec<String>,
}

impl Serialize for Overall {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut s = serializer.serialize_struct("Overall", 5)?;
        s.serialize_field("final_items", &self.final_items)?;
        s.serialize_field("embeddings", &matrix_summary(&self.embeddings))?;
        s.serialize_field("analysis", &self.analysis)?;
        if let Some(items) = &self.initial_items {
            s.serialize_field("initial_items", items)?;
        }
        s.serialize_field("notes", &self.notes)?;
        s.end()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenieResult {
    pub item_type_level: IndexMap<String, TypeResult>,
    pub overall: Overall,
    pub options: PipelineOptions,
    /// NMI normalization used in every score.
    pub nmi_normalization: &'static str,
}

impl GenieResult {
    pub fn degraded(&self) -> bool {
        self.item_type_level.values().any(|t| t.degraded)
    }
}

fn truth_from(items: &[Item], label: impl Fn(&Item) -> String) -> Result<Partition> {
    let ids: Vec<String> = items.iter().map(|i| i.id.clone()).collect();
    let labels: Vec<String> = items.iter().map(label).collect();
    Partition::from_labels(ids, &labels)
}

/// Pick the better of several scored EGA results: highest NMI, earlier
/// candidate on ties.
fn best_of<T>(scored: Vec<(T, EgaResult)>) -> Option<(T, EgaResult)> {
    let mut best: Option<(T, EgaResult)> = None;
    for (tag, r) in scored {
        let better = match &best {
            None => true,
            Some((_, cur)) => r.nmi.unwrap_or(f64::NEG_INFINITY) > cur.nmi.unwrap_or(f64::NEG_INFINITY),
        };
        if better {
            best = Some((tag, r));
        }
    }
    best
}

fn with_communities(items: &[Item], partition: &Partition) -> Vec<Item> {
    items
        .iter()
        .map(|i| Item {
            ega_community: partition.get(&i.id),
            ..i.clone()
        })
        .collect()
}

/// Reduce one pool against reference labels `truth`.
///
/// Pools under [`MIN_POOL`] items skip every stage that cannot run and the
/// result is flagged `degraded` instead of failing.
pub fn run_reduction(
    pool: &ItemPool,
    emb_full: &EmbeddingMatrix,
    truth: &Partition,
    opts: &PipelineOptions,
) -> Result<TypeResult> {
    opts.validate()?;
    let ids = pool.ids();
    let emb = emb_full.select(&ids)?;
    let truth = truth.restrict(&ids)?;
    let start_n = pool.len();
    let mut notes: Vec<String> = Vec::new();
    let mut comparison = Comparison::default();
    let mut result = TypeResult {
        final_nmi: None,
        initial_nmi: None,
        embeddings: TypeEmbeddings {
            full: emb.clone(),
            sparse: None,
            selected: EmbeddingKind::Full,
            org: opts.keep_org.then(|| emb.clone()),
        },
        uva: UvaReport::skipped(opts.uva_cutoff),
        boot_ega: BootReport::skipped(opts.stability_threshold),
        ega_model_selected: None,
        final_items: pool.items.clone(),
        final_ega: None,
        initial_ega: None,
        start_n,
        final_n: start_n,
        network_plot: PlotDocument::default(),
        stability_plot: PlotDocument::default(),
        comparison: Comparison::default(),
        degraded: false,
        notes: Vec::new(),
        initial_items: opts.keep_org.then(|| pool.items.clone()),
    };

    if start_n < MIN_POOL {
        result.degraded = true;
        result.notes.push(format!(
            "pool of {start_n} items is below the minimum of {MIN_POOL}; reduction skipped"
        ));
        return finish(result, opts);
    }

    // Step 2: initial EGA, model selection.
    let mut scored = Vec::new();
    for &method in opts.ega_model.candidates() {
        match ega_scored(&emb, method, &truth, &opts.ega) {
            Ok(r) => {
                match method {
                    NetworkMethod::Glasso => comparison.glasso = r.nmi,
                    NetworkMethod::Tmfg => comparison.tmfg = r.nmi,
                }
                scored.push((method, r));
            }
            Err(e) => notes.push(format!("initial EGA with {method} failed: {e}")),
        }
    }
    let (method, initial) =
        best_of(scored).ok_or_else(|| Error::Input(format!("initial EGA failed: {}", notes.join("; "))))?;
    result.ega_model_selected = Some(method);
    result.initial_nmi = initial.nmi;
    result.initial_ega = Some(initial);

    // Step 3: UVA. Auto mode measures redundancy on the glasso network,
    // whose partial correlations keep wTO local to true neighbours.
    let uva_method = match opts.ega_model {
        ModelChoice::Tmfg => NetworkMethod::Tmfg,
        _ => NetworkMethod::Glasso,
    };
    let (after_uva, uva) = uva_reduce(pool, &emb, uva_method, opts.uva_cutoff, &opts.ega)?;
    if uva.truncated {
        notes.push("UVA stopped early to keep at least four items".into());
    }
    result.uva = uva;

    // Pre-UVA stability reference, always on the full embedding.
    let boot_org = boot_ega(
        &emb,
        method,
        opts.n_boot,
        stage_seed(opts.seed, "bootega-org", 0),
        &opts.ega,
    );

    let uva_ids = after_uva.ids();
    let emb_uva = emb.select(&uva_ids)?;
    let truth_uva = truth.restrict(&uva_ids)?;
    let (final_pool, selected_emb) = if after_uva.len() < MIN_POOL {
        result.degraded = true;
        notes.push(format!(
            "{} items remain after UVA, below the minimum of {MIN_POOL}; embedding selection and bootstrap pruning skipped",
            after_uva.len()
        ));
        (after_uva, emb_uva)
    } else {
        // Step 4: full vs sparse embeddings on the post-UVA pool.
        let mut candidates = Vec::new();
        match ega_scored(&emb_uva, method, &truth_uva, &opts.ega) {
            Ok(r) => {
                comparison.full = r.nmi;
                candidates.push((emb_uva.clone(), r));
            }
            Err(e) => notes.push(format!("EGA on full embeddings failed: {e}")),
        }
        match sparsify_embeddings(&emb_uva, opts.sparsify_fraction)
            .and_then(|s| ega_scored(&s, method, &truth_uva, &opts.ega).map(|r| (s, r)))
        {
            Ok((s, r)) => {
                comparison.sparse = r.nmi;
                result.embeddings.sparse = Some(s.clone());
                candidates.push((s, r));
            }
            Err(e) => notes.push(format!("EGA on sparse embeddings failed: {e}")),
        }
        let selected = best_of(candidates).map(|(m, _)| m).unwrap_or_else(|| emb_uva.clone());
        result.embeddings.selected = selected.kind();

        // Step 5: bootstrap stability pruning.
        let boot = BootOptions {
            n_replicates: opts.n_boot,
            threshold: opts.stability_threshold,
            seed: opts.seed,
            prune_one: opts.prune_one,
        };
        let (pruned, mut report) = stability_reduce(&after_uva, &selected, method, &boot, &opts.ega)?;
        if report.truncated {
            notes.push("bootstrap pruning stopped early to keep at least four items".into());
        }
        report.initial_boot_with_redundancies = match boot_org {
            Ok(b) => Some(b),
            Err(e) => {
                notes.push(format!("pre-UVA bootstrap failed: {e}"));
                None
            }
        };
        result.boot_ega = report;
        (pruned, selected)
    };

    // Step 6: final EGA.
    let final_ids = final_pool.ids();
    if final_pool.len() >= MIN_STAGE_ITEMS {
        let final_emb = selected_emb.select(&final_ids)?;
        match ega_scored(&final_emb, method, &truth.restrict(&final_ids)?, &opts.ega) {
            Ok(r) => {
                result.final_nmi = r.nmi;
                result.final_items = with_communities(&final_pool.items, &r.communities);
                result.final_ega = Some(r);
            }
            Err(e) => {
                result.degraded = true;
                notes.push(format!("final EGA failed: {e}"));
                result.final_items = final_pool.items.clone();
            }
        }
    } else {
        result.degraded = true;
        result.final_items = final_pool.items.clone();
    }
    result.final_n = result.final_items.len();
    result.embeddings.full = emb.select(&final_ids)?;
    if let Some(s) = &result.embeddings.sparse {
        result.embeddings.sparse = Some(s.select(&final_ids)?);
    }
    result.comparison = comparison;
    result.notes.extend(notes);
    finish(result, opts)
}

fn finish(mut result: TypeResult, opts: &PipelineOptions) -> Result<TypeResult> {
    let (network, stability) = render_plots(&result, opts.seed);
    result.network_plot = network;
    result.stability_plot = stability;
    Ok(result)
}

/// Where item embeddings come from.
pub enum EmbeddingSource<'a> {
    /// A matrix whose columns cover every pool item id.
    Precomputed(&'a EmbeddingMatrix),
    /// Embed statements on demand, one request batch per item type.
    Backend(&'a dyn Embedder),
}

fn embed_pool(pool: &ItemPool, source: &EmbeddingSource<'_>) -> Result<EmbeddingMatrix> {
    match source {
        EmbeddingSource::Precomputed(m) => {
            let have: std::collections::HashSet<&str> = m.item_ids().iter().map(String::as_str).collect();
            let missing: Vec<&str> =
                pool.items.iter().map(|i| i.id.as_str()).filter(|id| !have.contains(id)).collect();
            if !missing.is_empty() {
                return Err(Error::Input(format!(
                    "embedding matrix has no column for items: {}",
                    missing.join(", ")
                )));
            }
            m.select(&pool.ids())
        }
        EmbeddingSource::Backend(embedder) => {
            let mut parts = Vec::new();
            for item_type in pool.type_names() {
                let sub = pool.of_type(&item_type);
                let texts: Vec<String> = sub.items.iter().map(|i| i.statement.clone()).collect();
                let raw = embedder.embed(&texts)?;
                if raw.n_items() != texts.len() {
                    return Err(Error::Input(format!(
                        "embedder returned {} vectors for {} statements",
                        raw.n_items(),
                        texts.len()
                    )));
                }
                parts.push(EmbeddingMatrix::new(raw.values().clone(), sub.ids(), EmbeddingKind::Full)?);
            }
            let refs: Vec<&EmbeddingMatrix> = parts.iter().collect();
            let all = EmbeddingMatrix::concat(&refs)?;
            all.select(&pool.ids())
        }
    }
}

/// Reduce a ready item pool: per type by default, or pooled with
/// `all_together`, optionally followed by a cross-type EGA.
pub fn run_genie(pool: &ItemPool, source: EmbeddingSource<'_>, opts: &PipelineOptions) -> Result<GenieResult> {
    opts.validate()?;
    let emb = embed_pool(pool, &source)?;
    let types = pool.type_names();
    let mut item_type_level = IndexMap::new();

    if opts.all_together && types.len() > 1 {
        let combined: Vec<Item> = pool
            .items
            .iter()
            .map(|i| Item {
                attribute: format!("{} {}", i.item_type, i.attribute),
                ..i.clone()
            })
            .collect();
        let truth = truth_from(&combined, |i| i.attribute.clone())?;
        let combined_pool = ItemPool::new(combined, pool.provenance);
        item_type_level.insert(
            ALL_TOGETHER_KEY.to_string(),
            run_reduction(&combined_pool, &emb, &truth, opts)?,
        );
    } else {
        let runs: Vec<(String, TypeResult)> = types
            .par_iter()
            .map(|item_type| {
                let sub = pool.of_type(item_type);
                let truth = truth_from(&sub.items, |i| i.attribute.clone())?;
                log::info!("reducing {item_type} ({} items)", sub.len());
                Ok((item_type.clone(), run_reduction(&sub, &emb, &truth, opts)?))
            })
            .collect::<Result<_>>()?;
        item_type_level.extend(runs);
    }

    let final_items: Vec<Item> = item_type_level
        .values()
        .flat_map(|t| t.final_items.iter().cloned())
        .collect();
    let final_ids: Vec<String> = final_items.iter().map(|i| i.id.clone()).collect();
    let overall_emb = emb.select(&final_ids)?;
    let mut overall_notes = Vec::new();
    let analysis = if opts.run_overall {
        overall_analysis(&final_items, &overall_emb, opts, &mut overall_notes)?
    } else {
        None
    };
    Ok(GenieResult {
        item_type_level,
        overall: Overall {
            final_items,
            embeddings: overall_emb,
            analysis,
            initial_items: opts.keep_org.then(|| pool.items.clone()),
            notes: overall_notes,
        },
        options: opts.clone(),
        nmi_normalization: "danon (sum of entropies), natural log",
    })
}

/// EGA without reduction on the combined final pool, scored against the
/// item types.
fn overall_analysis(
    items: &[Item],
    emb: &EmbeddingMatrix,
    opts: &PipelineOptions,
    notes: &mut Vec<String>,
) -> Result<Option<OverallAnalysis>> {
    if items.len() < MIN_STAGE_ITEMS {
        notes.push(format!("overall analysis skipped: only {} final items", items.len()));
        return Ok(None);
    }
    let truth = truth_from(items, |i| i.item_type.clone())?;
    let mut scored = Vec::new();
    for &method in opts.ega_model.candidates() {
        match ega_scored(emb, method, &truth, &opts.ega) {
            Ok(r) => scored.push((method, r)),
            Err(e) => notes.push(format!("overall EGA with {method} failed: {e}")),
        }
    }
    Ok(best_of(scored).map(|(_, ega)| OverallAnalysis {
        nmi: ega.nmi.unwrap_or(0.0),
        ega,
    }))
}

/// What [`run_aigenie`] produced, depending on the short-circuit flags.
#[derive(Debug, Clone, PartialEq)]
pub enum AigenieOutput {
    Items(ItemPool),
    Embeddings(ItemPool, EmbeddingMatrix),
    Full(Box<GenieResult>),
}

/// Generate items, embed them and reduce them.
pub fn run_aigenie(
    spec: &GenerationSpec,
    opts: &PipelineOptions,
    chat: &dyn ChatModel,
    embedder: &dyn Embedder,
) -> Result<AigenieOutput> {
    opts.validate()?;
    let pool = generate_item_pool(spec, chat)?;
    if opts.items_only {
        return Ok(AigenieOutput::Items(pool));
    }
    let emb = embed_pool(&pool, &EmbeddingSource::Backend(embedder))?;
    if opts.embeddings_only {
        return Ok(AigenieOutput::Embeddings(pool, emb));
    }
    let result = run_genie(&pool, EmbeddingSource::Precomputed(&emb), opts)?;
    Ok(AigenieOutput::Full(Box::new(result)))
}

/// Accounting check: removed plus kept equals the starting count.
pub fn accounting_holds(t: &TypeResult) -> bool {
    t.uva.n_removed + t.boot_ega.n_removed + t.final_n == t.start_n
}
