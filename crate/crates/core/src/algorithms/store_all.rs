use super::bitmap::EdgeBitmap;
use super::require_bipartite;
use crate::graph::{maximum_matching, minimum_vertex_cover_bipartite, Matching, VertexCover};
use crate::matrix::graph_of;
use crate::stream::{
    EdgeUpdate, PayloadHeader, Snapshot, StreamError, StreamingAlgorithm, Topology,
};

/// Snapshot size of a store-all instance holding no edges: the 6-byte
/// payload header plus the empty-bitmap flag byte.
pub const STORE_ALL_EMPTY_BITS: u64 = 56;

/// Keeps the exact edge set; extracts a maximum matching.
///
/// A never-erring 1-approximation. Non-empty snapshots cost
/// `56 + 8 * ceil(n^2 / 8)` bits regardless of how many edges are present.
#[derive(Clone, Debug)]
pub struct StoreAll {
    n: usize,
    edges: EdgeBitmap,
}

const STORE_ALL_CODE: u8 = 1;
const STORE_ALL_COVER_CODE: u8 = 2;

impl StoreAll {
    pub fn edge_count(&self) -> usize {
        self.edges.edges
    }

    fn encode(&self, code: u8) -> Vec<u8> {
        let mut out = Vec::new();
        PayloadHeader {
            code,
            topology: Topology::Bipartite { n: self.n },
        }
        .encode(&mut out);
        self.edges.encode(&mut out);
        out
    }

    fn decode(snapshot: &Snapshot, id: &str, code: u8) -> Result<Self, StreamError> {
        let (topology, rest) = PayloadHeader::decode(snapshot, id, code)?;
        let n = require_bipartite(id, topology)?;
        Ok(Self {
            n,
            edges: EdgeBitmap::decode(n, rest)?,
        })
    }
}

impl StreamingAlgorithm for StoreAll {
    type Params = ();
    type Output = Matching;
    const ID: &'static str = "store-all";

    fn init(topology: Topology, _: &(), _seed: u64) -> Result<Self, StreamError> {
        let n = require_bipartite(Self::ID, topology)?;
        Ok(Self {
            n,
            edges: EdgeBitmap::new(n),
        })
    }

    fn process(&mut self, update: &EdgeUpdate) -> Result<(), StreamError> {
        self.edges.apply(update)
    }

    fn snapshot(&self) -> Snapshot {
        Snapshot::new(Self::ID, self.encode(STORE_ALL_CODE))
    }

    fn restore(snapshot: &Snapshot) -> Result<Self, StreamError> {
        Self::decode(snapshot, Self::ID, STORE_ALL_CODE)
    }

    fn extract(&self) -> Matching {
        maximum_matching(&graph_of(&self.edges.bits))
    }
}

/// Store-all variant that extracts an exact minimum vertex cover (König).
///
/// Cover ids: left `u`, right `n + v`.
#[derive(Clone, Debug)]
pub struct StoreAllCover(StoreAll);

impl StreamingAlgorithm for StoreAllCover {
    type Params = ();
    type Output = VertexCover;
    const ID: &'static str = "store-all-cover";

    fn init(topology: Topology, _: &(), seed: u64) -> Result<Self, StreamError> {
        require_bipartite(Self::ID, topology)?;
        StoreAll::init(topology, &(), seed).map(Self)
    }

    fn process(&mut self, update: &EdgeUpdate) -> Result<(), StreamError> {
        self.0.process(update)
    }

    fn snapshot(&self) -> Snapshot {
        Snapshot::new(Self::ID, self.0.encode(STORE_ALL_COVER_CODE))
    }

    fn restore(snapshot: &Snapshot) -> Result<Self, StreamError> {
        StoreAll::decode(snapshot, Self::ID, STORE_ALL_COVER_CODE).map(Self)
    }

    fn extract(&self) -> VertexCover {
        minimum_vertex_cover_bipartite(&graph_of(&self.0.edges.bits))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream::{run, run_split, GraphStream};

    fn bip(n: usize, updates: Vec<EdgeUpdate>) -> GraphStream {
        GraphStream::new(Topology::Bipartite { n }, updates)
    }

    #[test]
    fn identity_edges_give_perfect_matching() {
        let s = bip(6, (1..=6).map(|i| EdgeUpdate::insert(i, i)).collect());
        assert_eq!(run::<StoreAll>(&(), 0, &s).unwrap().len(), 6);
        assert_eq!(run::<StoreAllCover>(&(), 0, &s).unwrap().len(), 6);
    }

    #[test]
    fn insert_then_delete_everything() {
        let mut ups: Vec<_> = (1..=3)
            .flat_map(|u| (1..=3).map(move |v| EdgeUpdate::insert(u, v)))
            .collect();
        let dels: Vec<_> = ups.iter().map(|u| EdgeUpdate::delete(u.u, u.v)).collect();
        let (snap, m) =
            run_split::<StoreAll>(&(), 0, &bip(3, ups.clone()), &bip(3, dels.clone())).unwrap();
        assert!(m.is_empty());
        assert_eq!(snap.bit_length(), STORE_ALL_EMPTY_BITS + 8 * 2);
        ups.extend(dels);
        assert!(run::<StoreAll>(&(), 0, &bip(3, ups)).unwrap().is_empty());
    }

    #[test]
    fn snapshot_sizes() {
        let fresh = StoreAll::init(Topology::Bipartite { n: 20 }, &(), 0).unwrap();
        assert_eq!(fresh.snapshot().bit_length(), STORE_ALL_EMPTY_BITS);
        let mut a = fresh.clone();
        for m in 1..=30 {
            a.process(&EdgeUpdate::insert(m % 20 + 1, m / 20 + 1))
                .unwrap();
            assert_eq!(a.snapshot().bit_length(), STORE_ALL_EMPTY_BITS + 400);
        }
    }

    #[test]
    fn rejects_strictness_violations_and_foreign_snapshots() {
        let mut a = StoreAll::init(Topology::Bipartite { n: 2 }, &(), 0).unwrap();
        assert!(a.process(&EdgeUpdate::delete(1, 1)).is_err());
        a.process(&EdgeUpdate::insert(1, 1)).unwrap();
        assert!(a.process(&EdgeUpdate::insert(1, 1)).is_err());
        assert!(a.process(&EdgeUpdate::insert(3, 1)).is_err());
        let cover = StoreAllCover::init(Topology::Bipartite { n: 2 }, &(), 0).unwrap();
        assert!(matches!(
            StoreAll::restore(&cover.snapshot()),
            Err(StreamError::AlgorithmMismatch { .. })
        ));
        assert!(StoreAll::init(Topology::General { n: 4 }, &(), 0).is_err());
    }
}
