//! Community detection and partition agreement.

mod nmi;
mod walktrap;

pub use nmi::{nmi, NmiScore};
pub use walktrap::{modularity, walktrap, DEFAULT_STEPS};
