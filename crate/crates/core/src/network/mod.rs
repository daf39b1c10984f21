//! Item correlation matrices and weighted item networks.

mod correlation;
mod glasso;
mod sparsify;
mod tmfg;

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::ser::SerializeStruct;
use serde::{Deserialize, Serialize, Serializer};

pub use correlation::{ensure_positive_definite, item_correlations, CorrelationMatrix};
pub use glasso::{
    ebic, ebic_glasso, ebic_glasso_path, glasso, gaussian_loglik, lambda_grid, GlassoFit,
    GlassoOptions, GlassoSelection,
};
pub use sparsify::{sparsify_embeddings, DEFAULT_MIDDLE_FRACTION};
pub use tmfg::{tmfg, tmfg_with_faces, TmfgResult};

/// Default ridge floor for positive-definiteness repair.
pub const PD_EPS: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NetworkMethod {
    Glasso,
    Tmfg,
}

impl NetworkMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            NetworkMethod::Glasso => "glasso",
            NetworkMethod::Tmfg => "tmfg",
        }
    }
}

impl fmt::Display for NetworkMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for NetworkMethod {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "glasso" | "ebicglasso" => Ok(NetworkMethod::Glasso),
            "tmfg" => Ok(NetworkMethod::Tmfg),
            other => Err(format!("unknown network method `{other}` (expected glasso or tmfg)")),
        }
    }
}

/// Symmetric weighted adjacency over items with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct Network {
    weights: DMatrix<f64>,
    item_ids: Vec<String>,
    method: NetworkMethod,
    selection: Option<GlassoSelection>,
}

impl Network {
    /// Wrap a user-supplied adjacency. The upper triangle is mirrored and
    /// the diagonal zeroed.
    pub fn from_weights(weights: DMatrix<f64>, item_ids: Vec<String>, method: NetworkMethod) -> crate::Result<Self> {
        if weights.nrows() != weights.ncols() || weights.nrows() != item_ids.len() {
            return Err(crate::Error::Input(format!(
                "adjacency is {}x{} for {} items",
                weights.nrows(),
                weights.ncols(),
                item_ids.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(crate::Error::Input("adjacency has non-finite weights".into()));
        }
        Ok(Self::from_parts(weights, item_ids, method, None))
    }

    pub(crate) fn from_parts(
        mut weights: DMatrix<f64>,
        item_ids: Vec<String>,
        method: NetworkMethod,
        selection: Option<GlassoSelection>,
    ) -> Self {
        let p = weights.nrows();
        for i in 0..p {
            weights[(i, i)] = 0.0;
            for j in (i + 1)..p {
                weights[(j, i)] = weights[(i, j)];
            }
        }
        Self {
            weights,
            item_ids,
            method,
            selection,
        }
    }

    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    pub fn item_ids(&self) -> &[String] {
        &self.item_ids
    }

    pub fn method(&self) -> NetworkMethod {
        self.method
    }

    /// Lambda-path selection details for glasso networks.
    pub fn selection(&self) -> Option<&GlassoSelection> {
        self.selection.as_ref()
    }

    pub fn len(&self) -> usize {
        self.item_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.item_ids.is_empty()
    }

    /// Upper-triangle nonzero edges as `(i, j, weight)`.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let p = self.len();
        let mut out = Vec::new();
        for i in 0..p {
            for j in (i + 1)..p {
                let w = self.weights[(i, j)];
                if w != 0.0 {
                    out.push((i, j, w));
                }
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.edges().len()
    }

    /// Subnetwork induced by the given row indices.
    pub fn induced(&self, keep: &[usize]) -> Network {
        let w = DMatrix::from_fn(keep.len(), keep.len(), |r, c| self.weights[(keep[r], keep[c])]);
        Network {
            weights: w,
            item_ids: keep.iter().map(|&i| self.item_ids[i].clone()).collect(),
            method: self.method,
            selection: self.selection.clone(),
        }
    }
}

impl Serialize for Network {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let edges: Vec<(&str, &str, f64)> = self
            .edges()
            .into_iter()
            .map(|(i, j, w)| (self.item_ids[i].as_str(), self.item_ids[j].as_str(), w))
            .collect();
        let mut s = serializer.serialize_struct("Network", 4)?;
        s.serialize_field("method", &self.method)?;
        s.serialize_field("n_nodes", &self.len())?;
        s.serialize_field("glasso", &self.selection)?;
        s.serialize_field("edges", &edges)?;
        s.end()
    }
}

/// Estimate a network from a correlation matrix.
///
/// The correlation matrix is PD-repaired first. `n_obs` is the number of
/// embedding dimensions behind `c` and feeds the EBIC for glasso.
pub fn estimate_network(
    c: &CorrelationMatrix,
    method: NetworkMethod,
    n_obs: usize,
    opts: &GlassoOptions,
) -> crate::Result<Network> {
    match method {
        NetworkMethod::Glasso => {
            let repaired = ensure_positive_definite(c, PD_EPS);
            ebic_glasso(&repaired, n_obs, opts)
        }
        NetworkMethod::Tmfg => tmfg(c),
    }
}
