//! Concrete streaming algorithms implementing [`StreamingAlgorithm`].
//!
//! | id                  | topology        | output          |
//! |---------------------|-----------------|-----------------|
//! | `store-all`         | bipartite       | maximum matching |
//! | `store-all-cover`   | bipartite       | minimum vertex cover |
//! | `subsample`         | bipartite       | matching of a hashed edge sample |
//! | `group-contraction` | any             | `n^eps`-approximate vertex cover |
//! | `full-cover`        | any             | every vertex |
//!
//! [`StreamingAlgorithm`]: crate::stream::StreamingAlgorithm

mod bitmap;
mod contraction;
mod full_cover;
mod store_all;
mod subsample;

pub use contraction::{
    GroupContractionParams, GroupContractionVc, GroupPartition, PairCounters,
    CONTRACTION_HEADER_BITS,
};
pub use full_cover::FullCover;
pub use store_all::{StoreAll, StoreAllCover, STORE_ALL_EMPTY_BITS};
pub use subsample::{SubsampleMatching, SubsampleParams};

use crate::stream::{StreamError, Topology};

pub(crate) fn require_bipartite(id: &str, topology: Topology) -> Result<usize, StreamError> {
    match topology {
        Topology::Bipartite { n } if n > 0 => Ok(n),
        found => Err(StreamError::UnsupportedTopology {
            algorithm: id.to_string(),
            found,
        }),
    }
}
