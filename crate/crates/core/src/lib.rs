//! Item pool reduction for generated psychometric scales.
//!
//! Items are embedded, correlated and turned into a network (EBICglasso or
//! TMFG). Walktrap communities define the dimensional structure, unique
//! variable analysis drops redundant items and bootstrap stability analysis
//! drops unstable ones.

pub mod backend;
pub mod bootega;
pub mod community;
pub mod ega;
pub mod embedding;
pub mod error;
pub mod io;
pub mod item;
pub mod network;
pub mod partition;
pub mod pipeline;
pub mod prompt;
pub mod report;
pub mod seed;
pub mod synthetic;
pub mod uva;

pub use community::{nmi, walktrap, NmiScore};
pub use backend::{ChatModel, Embedder};
pub use ega::{ega, EgaOptions, EgaResult};
pub use embedding::{EmbeddingKind, EmbeddingMatrix};
pub use error::{BackendError, BackendErrorKind, Error, Result, Shortfall};
pub use item::{AttributeSpec, Item, ItemPool, Provenance, ValidationReport};
pub use network::{CorrelationMatrix, Network, NetworkMethod};
pub use partition::Partition;
pub use pipeline::{run_aigenie, run_genie, run_reduction, AigenieOutput, EmbeddingSource, GenieResult, ModelChoice, PipelineOptions, TypeResult};
pub use report::{render_plots, PlotDocument};
