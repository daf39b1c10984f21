//! The `aigenie` command line.
//!
//! [`run`] is the whole program minus process setup, so tests can drive it
//! in-process and inspect the offline guard's counters afterwards.
//!
//! Exit codes: 0 success, 1 validation or usage error, 2 provider error,
//! 3 the reduction ran but was degraded.

pub mod artifacts;
pub mod config;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use aigenie_core::io::{load_embeddings, load_pool};
use aigenie_core::prompt::generate_item_pool;
use aigenie_core::{
    run_aigenie, run_genie, AigenieOutput, BackendError, BackendErrorKind, EmbeddingSource, Error, ModelChoice,
    PipelineOptions,
};
use aigenie_llm::{
    list_available_models, resolve_model, ChatBackend, ChatParams, EmbedBackend, LlmClient, ModelKind, Provider,
};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::artifacts::{embedding_artifacts, genie_artifacts, pool_artifacts, write_all, Artifact};
use crate::config::{RunConfig, DEFAULT_EMBEDDING_MODEL};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VALIDATION: i32 = 1;
pub const EXIT_PROVIDER: i32 = 2;
pub const EXIT_DEGRADED: i32 = 3;

const DEFAULT_OUT: &str = "aigenie-out";
const DEFAULT_CHAT_MODEL: &str = "gpt-4o";

#[derive(Debug)]
pub enum CliError {
    /// Bad flags, config or input files.
    Validation(String),
    /// A provider call failed (including offline refusals).
    Provider(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) => EXIT_VALIDATION,
            CliError::Provider(_) => EXIT_PROVIDER,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "{m}"),
            CliError::Provider(m) => write!(f, "provider error: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Backend(_) | Error::Generation { .. } => CliError::Provider(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<BackendError> for CliError {
    fn from(e: BackendError) -> Self {
        match e.kind {
            BackendErrorKind::Input => CliError::Validation(e.message),
            _ => CliError::Provider(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "aigenie", version, about = "Generate, embed and reduce psychometric item pools")]
pub struct Cli {
    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for artifacts.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Run seed (bootstrap replicates and plot layouts).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Refuse every network request.
    #[arg(long, global = true)]
    offline: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate items, embed them and reduce the pool.
    Run(RunArgs),
    /// Reduce an existing item pool.
    Reduce(ReduceArgs),
    /// Generate items only.
    Generate(GenerateArgs),
    /// List models offered by the configured providers.
    Models(ModelsArgs),
    /// Send prompts to a chat model and print the responses.
    Chat(ChatArgs),
}

#[derive(Debug, Args)]
struct PipelineArgs {
    /// Network model: auto, glasso or tmfg.
    #[arg(long = "ega-model")]
    ega_model: Option<ModelChoice>,
    /// Reduce all item types as one pool.
    #[arg(long)]
    all_together: bool,
    /// Also run EGA over the combined final pool.
    #[arg(long)]
    overall: bool,
    /// Keep the starting pool's embedding in the result.
    #[arg(long)]
    keep_org: bool,
    #[arg(long)]
    n_boot: Option<usize>,
    #[arg(long)]
    uva_cutoff: Option<f64>,
    #[arg(long)]
    stability_threshold: Option<f64>,
    /// Remove only the least stable item per bootstrap iteration.
    #[arg(long)]
    prune_one: bool,
}

impl PipelineArgs {
    fn apply(&self, opts: &mut PipelineOptions) {
        if let Some(m) = self.ega_model {
            opts.ega_model = m;
        }
        opts.all_together |= self.all_together;
        opts.run_overall |= self.overall;
        opts.keep_org |= self.keep_org;
        opts.prune_one |= self.prune_one;
        if let Some(n) = self.n_boot {
            opts.n_boot = n;
        }
        if let Some(c) = self.uva_cutoff {
            opts.uva_cutoff = c;
        }
        if let Some(t) = self.stability_threshold {
            opts.stability_threshold = t;
        }
    }
}

#[derive(Debug, Args)]
struct RunArgs {
    #[command(flatten)]
    pipeline: PipelineArgs,
    /// Chat model or alias used for generation.
    #[arg(long)]
    chat_model: Option<String>,
    #[arg(long)]
    embedding_model: Option<String>,
    /// Items per type.
    #[arg(long)]
    target_n: Option<usize>,
    /// Stop after generation.
    #[arg(long)]
    items_only: bool,
    /// Stop after embedding.
    #[arg(long)]
    embeddings_only: bool,
}

#[derive(Debug, Args)]
struct ReduceArgs {
    /// Item table (CSV or JSON) with ID, statement, attribute and type.
    #[arg(long)]
    items: PathBuf,
    /// Precomputed embedding CSV (one column per item ID). Without it the
    /// items are embedded through the configured provider.
    #[arg(long)]
    embeddings: Option<PathBuf>,
    #[arg(long)]
    embedding_model: Option<String>,
    #[command(flatten)]
    pipeline: PipelineArgs,
}

#[derive(Debug, Args)]
struct GenerateArgs {
    #[arg(long)]
    chat_model: Option<String>,
    #[arg(long)]
    target_n: Option<usize>,
}

#[derive(Debug, Args)]
struct ModelsArgs {
    #[arg(long)]
    provider: Option<Provider>,
    /// chat or embedding.
    #[arg(long = "type")]
    kind: Option<ModelKind>,
}

#[derive(Debug, Args)]
struct ChatArgs {
    #[arg(long)]
    model: Option<String>,
    /// Prompt text; repeat for several prompts.
    #[arg(long, required = true)]
    prompt: Vec<String>,
    #[arg(long)]
    temperature: Option<f64>,
    #[arg(long)]
    top_p: Option<f64>,
    /// Responses per prompt.
    #[arg(long)]
    reps: Option<usize>,
    #[arg(long)]
    system_role: Option<String>,
    #[arg(long)]
    max_tokens: Option<u32>,
    /// Provider, when it cannot be told from the model name.
    #[arg(long)]
    provider: Option<Provider>,
}

/// Chat and embedding settings recorded next to generated artifacts.
/// Keys are never included.
#[derive(Debug, Serialize)]
struct RunMeta<'a> {
    command: &'a str,
    seed: u64,
    offline: bool,
    chat_provider: Option<Provider>,
    chat_model: Option<&'a str>,
    temperature: Option<f64>,
    top_p: Option<f64>,
    /// `None` means the provider's default was used.
    max_tokens: Option<u32>,
    embedding_provider: Option<Provider>,
    embedding_model: Option<&'a str>,
}

struct Context {
    config: RunConfig,
    out: PathBuf,
    seed: u64,
    offline: bool,
}

/// Parse `args` (program name first) and run the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(stderr, "{text}")
            } else {
                write!(stdout, "{text}")
            };
            return code;
        }
    };
    aigenie_llm::set_offline(cli.offline);
    match execute(cli, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, CliError> {
    let config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    let seed = cli.seed.or(config.seed).unwrap_or(config.pipeline.seed);
    let out = cli
        .out
        .clone()
        .or_else(|| config.out.clone())
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
    let ctx = Context {
        config,
        out,
        seed,
        offline: cli.offline,
    };
    match cli.command {
        Command::Run(args) => cmd_run(&ctx, args, stdout),
        Command::Reduce(args) => cmd_reduce(&ctx, args, stdout),
        Command::Generate(args) => cmd_generate(&ctx, args, stdout),
        Command::Models(args) => cmd_models(&ctx, args, stdout, stderr),
        Command::Chat(args) => cmd_chat(&ctx, args, stdout),
    }
}

fn pipeline_options(ctx: &Context, args: &PipelineArgs) -> Result<PipelineOptions, CliError> {
    let mut opts = ctx.config.pipeline.clone();
    args.apply(&mut opts);
    opts.seed = ctx.seed;
    opts.validate()?;
    Ok(opts)
}

fn client_for(ctx: &Context, provider: Provider) -> Result<Arc<LlmClient>, CliError> {
    Ok(Arc::new(LlmClient::new(ctx.config.provider(provider))?))
}

/// Model id and provider: explicit provider first, then the name.
fn pick_provider(model: &str, explicit: Option<Provider>) -> Result<(Provider, String), CliError> {
    let resolved = resolve_model(model);
    explicit
        .or(resolved.provider)
        .map(|p| (p, resolved.id))
        .ok_or_else(|| {
            CliError::Validation(format!(
                "cannot tell which provider serves `{model}`; set the provider explicitly"
            ))
        })
}

fn chat_params(ctx: &Context, model: Option<&str>) -> ChatParams {
    let mut params = ctx.config.chat.clone().unwrap_or_default();
    if let Some(m) = model {
        params.model = m.to_string();
    } else if ctx.config.chat.is_none() {
        params.model = DEFAULT_CHAT_MODEL.into();
    }
    params
}

fn embedding_backend(ctx: &Context, model: Option<&str>) -> Result<(EmbedBackend, Provider, String), CliError> {
    let model = model
        .map(str::to_string)
        .or_else(|| ctx.config.embedding.model.clone())
        .unwrap_or_else(|| DEFAULT_EMBEDDING_MODEL.into());
    let (provider, id) = pick_provider(&model, ctx.config.embedding.provider)?;
    let client = client_for(ctx, provider)?;
    Ok((EmbedBackend::new(client, id.clone()), provider, id))
}

fn finish(ctx: &Context, files: &[Artifact], degraded: bool, stdout: &mut dyn Write) -> Result<i32, CliError> {
    write_all(&ctx.out, files)?;
    let _ = writeln!(stdout, "wrote {} files to {}", files.len(), ctx.out.display());
    if degraded {
        let _ = writeln!(stdout, "warning: reduction was degraded; see notes in result.json");
        Ok(EXIT_DEGRADED)
    } else {
        Ok(EXIT_OK)
    }
}

fn meta_artifact(meta: &RunMeta<'_>) -> Result<Artifact, CliError> {
    let mut bytes = serde_json::to_vec_pretty(meta).map_err(|e| CliError::Validation(e.to_string()))?;
    bytes.push(b'\n');
    Ok(("run.json".into(), bytes))
}

fn generation_spec(ctx: &Context, target_n: Option<usize>) -> Result<aigenie_core::prompt::GenerationSpec, CliError> {
    let mut spec = ctx
        .config
        .generation
        .clone()
        .ok_or_else(|| CliError::Validation("generation needs a [generation] section in --config".into()))?;
    if let Some(n) = target_n {
        if n == 0 {
            return Err(CliError::Validation("--target-n must be at least 1".into()));
        }
        spec.target_n = n;
    }
    Ok(spec)
}

fn cmd_run(ctx: &Context, args: RunArgs, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let spec = generation_spec(ctx, args.target_n)?;
    let mut opts = pipeline_options(ctx, &args.pipeline)?;
    opts.items_only = args.items_only;
    opts.embeddings_only = args.embeddings_only;
    opts.validate()?;

    let mut params = chat_params(ctx, args.chat_model.as_deref());
    let (chat_provider, chat_id) = pick_provider(&params.model, ctx.config.chat_provider)?;
    params.model = chat_id;
    let chat = ChatBackend::new(client_for(ctx, chat_provider)?, params.clone());
    let (embedder, emb_provider, emb_id) = embedding_backend(ctx, args.embedding_model.as_deref())?;

    let meta = RunMeta {
        command: "run",
        seed: ctx.seed,
        offline: ctx.offline,
        chat_provider: Some(chat_provider),
        chat_model: Some(&params.model),
        temperature: Some(params.temperature),
        top_p: Some(params.top_p),
        max_tokens: params.max_tokens,
        embedding_provider: Some(emb_provider),
        embedding_model: Some(&emb_id),
    };
    let (mut files, degraded) = match run_aigenie(&spec, &opts, &chat, &embedder)? {
        AigenieOutput::Items(pool) => (pool_artifacts(&pool)?, false),
        AigenieOutput::Embeddings(pool, emb) => (embedding_artifacts(&pool, &emb)?, false),
        AigenieOutput::Full(result) => {
            let degraded = result.degraded();
            (genie_artifacts(&result)?, degraded)
        }
    };
    files.push(meta_artifact(&meta)?);
    finish(ctx, &files, degraded, stdout)
}

fn cmd_reduce(ctx: &Context, args: ReduceArgs, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let opts = pipeline_options(ctx, &args.pipeline)?;
    let spec = ctx.config.generation.as_ref().map(|g| &g.attributes);
    let pool = load_pool(&args.items, spec).map_err(|e| input_error(&args.items, e))?;
    let result = match &args.embeddings {
        Some(path) => {
            let emb = load_embeddings(path).map_err(|e| input_error(path, e))?;
            run_genie(&pool, EmbeddingSource::Precomputed(&emb), &opts)?
        }
        None => {
            let (embedder, _, _) = embedding_backend(ctx, args.embedding_model.as_deref())?;
            run_genie(&pool, EmbeddingSource::Backend(&embedder), &opts)?
        }
    };
    finish(ctx, &genie_artifacts(&result)?, result.degraded(), stdout)
}

fn input_error(path: &Path, e: Error) -> CliError {
    match e {
        Error::Io(io) => CliError::Validation(format!("cannot read {}: {io}", path.display())),
        other => CliError::from(other),
    }
}

fn cmd_generate(ctx: &Context, args: GenerateArgs, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let spec = generation_spec(ctx, args.target_n)?;
    let mut params = chat_params(ctx, args.chat_model.as_deref());
    let (provider, id) = pick_provider(&params.model, ctx.config.chat_provider)?;
    params.model = id;
    let chat = ChatBackend::new(client_for(ctx, provider)?, params.clone());
    let meta = RunMeta {
        command: "generate",
        seed: ctx.seed,
        offline: ctx.offline,
        chat_provider: Some(provider),
        chat_model: Some(&params.model),
        temperature: Some(params.temperature),
        top_p: Some(params.top_p),
        max_tokens: params.max_tokens,
        embedding_provider: None,
        embedding_model: None,
    };
    match generate_item_pool(&spec, &chat) {
        Ok(pool) => {
            let mut files = pool_artifacts(&pool)?;
            files.push(meta_artifact(&meta)?);
            finish(ctx, &files, false, stdout)
        }
        Err(Error::Generation { shortfalls, partial }) => {
            // Keep what was generated before reporting the shortfall.
            let mut files = pool_artifacts(&partial)?;
            files.push(meta_artifact(&meta)?);
            write_all(&ctx.out, &files)?;
            Err(Error::Generation { shortfalls, partial }.into())
        }
        Err(e) => Err(e.into()),
    }
}

fn cmd_models(
    ctx: &Context,
    args: ModelsArgs,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32, CliError> {
    // Providers from the config plus any whose key is in the environment.
    let mut clients = Vec::new();
    for provider in Provider::ALL {
        if args.provider.is_some_and(|p| p != provider) {
            continue;
        }
        let cfg = ctx.config.provider(provider);
        let configured = ctx.config.providers.iter().any(|p| p.provider == provider);
        if configured || cfg.resolve_key().is_some() {
            clients.push(LlmClient::new(cfg)?);
        }
    }
    let catalog = list_available_models(&clients, args.provider, args.kind);
    for e in &catalog.entries {
        let _ = writeln!(stdout, "{}\t{}\t{}", e.provider, e.kind, e.id);
    }
    for e in &catalog.errors {
        let who = e.provider.map(|p| p.to_string()).unwrap_or_else(|| "catalog".into());
        let _ = writeln!(stderr, "warning: {who}: {}", e.message);
    }
    if catalog.entries.is_empty() && !catalog.errors.is_empty() {
        Ok(EXIT_PROVIDER)
    } else {
        Ok(EXIT_OK)
    }
}

fn cmd_chat(ctx: &Context, args: ChatArgs, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let mut params = chat_params(ctx, args.model.as_deref());
    if let Some(t) = args.temperature {
        params.temperature = t;
    }
    if let Some(p) = args.top_p {
        params.top_p = p;
    }
    if let Some(r) = args.reps {
        params.reps = r;
    }
    if args.system_role.is_some() {
        params.system_role = args.system_role;
    }
    if args.max_tokens.is_some() {
        params.max_tokens = args.max_tokens;
    }
    params.validate()?;
    let (provider, id) = pick_provider(&params.model, args.provider.or(ctx.config.chat_provider))?;
    params.model = id;
    let result = client_for(ctx, provider)?.chat(&args.prompt, &params)?;
    let many = result.responses.len() > 1;
    for r in &result.responses {
        if many {
            let _ = writeln!(stdout, "--- prompt {} response {} ---", r.prompt_index + 1, r.rep + 1);
        }
        let _ = writeln!(stdout, "{}", r.text);
    }
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_args(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(std::iter::once("aigenie").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn unknown_flag_prints_usage_and_exits_one() {
        let (code, _, err) = run_args(&["reduce", "--bogus"]);
        assert_eq!(code, EXIT_VALIDATION);
        assert!(err.contains("Usage"));
    }

    #[test]
    fn help_exits_zero() {
        let (code, out, _) = run_args(&["--help"]);
        assert_eq!(code, EXIT_OK);
        assert!(out.contains("reduce"));
    }

    #[test]
    fn missing_items_file_is_a_validation_error() {
        let (code, _, err) = run_args(&["reduce", "--items", "/nonexistent/items.csv", "--offline"]);
        assert_eq!(code, EXIT_VALIDATION);
        assert!(err.contains("cannot read"));
    }

    #[test]
    fn unknown_model_provider_is_a_validation_error() {
        assert!(matches!(pick_provider("mystery-model", None), Err(CliError::Validation(_))));
        assert_eq!(pick_provider("sonnet", None).unwrap().0, Provider::Anthropic);
        assert_eq!(
            pick_provider("mystery-model", Some(Provider::Groq)).unwrap(),
            (Provider::Groq, "mystery-model".to_string())
        );
    }
}
