//! Exploratory graph analysis: network estimation plus walktrap communities.

use serde::{Deserialize, Serialize};

use crate::community::{nmi, walktrap, DEFAULT_STEPS};
use crate::embedding::EmbeddingMatrix;
use crate::error::Result;
use crate::network::{estimate_network, item_correlations, GlassoOptions, Network, NetworkMethod};
use crate::partition::Partition;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EgaOptions {
    pub glasso: GlassoOptions,
    pub walktrap_steps: usize,
}

impl Default for EgaOptions {
    fn default() -> Self {
        Self {
            glasso: GlassoOptions::default(),
            walktrap_steps: DEFAULT_STEPS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EgaResult {
    pub model: NetworkMethod,
    pub n_communities: usize,
    /// NMI against the reference labels, when one was supplied.
    #[serde(rename = "NMI")]
    pub nmi: Option<f64>,
    pub network: Network,
    pub communities: Partition,
}

/// Estimate the item network of `emb` and detect its communities.
///
/// Glasso uses the embedding dimension count as the number of observations.
pub fn ega(emb: &EmbeddingMatrix, method: NetworkMethod, opts: &EgaOptions) -> Result<EgaResult> {
    let corr = item_correlations(emb)?;
    let network = estimate_network(&corr, method, emb.dims(), &opts.glasso)?;
    let communities = walktrap(&network, opts.walktrap_steps);
    Ok(EgaResult {
        model: method,
        n_communities: communities.n_communities(),
        nmi: None,
        network,
        communities,
    })
}

/// [`ega`] followed by NMI against `truth`.
pub fn ega_scored(
    emb: &EmbeddingMatrix,
    method: NetworkMethod,
    truth: &Partition,
    opts: &EgaOptions,
) -> Result<EgaResult> {
    let mut r = ega(emb, method, opts)?;
    r.nmi = Some(nmi(&r.communities, truth)?.value());
    Ok(r)
}
