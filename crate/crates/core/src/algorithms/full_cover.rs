use crate::graph::VertexCover;
use crate::stream::{
    EdgeUpdate, PayloadHeader, Snapshot, StreamError, StreamingAlgorithm, Topology,
};

const CODE: u8 = 5;

/// Trivial cover: remembers only the topology and returns every vertex.
///
/// Its snapshot is the 48-bit payload header. Bipartite right vertices use
/// ids `n + 1..=2n`.
#[derive(Clone, Debug)]
pub struct FullCover {
    topology: Topology,
}

impl StreamingAlgorithm for FullCover {
    type Params = ();
    type Output = VertexCover;
    const ID: &'static str = "full-cover";

    fn init(topology: Topology, _: &(), _seed: u64) -> Result<Self, StreamError> {
        Ok(Self { topology })
    }

    fn process(&mut self, update: &EdgeUpdate) -> Result<(), StreamError> {
        match self.topology.endpoints(update.u, update.v) {
            Some(_) => Ok(()),
            None => Err(StreamError::Contract {
                update: *update,
                reason: "endpoint out of range".into(),
            }),
        }
    }

    fn snapshot(&self) -> Snapshot {
        let mut out = Vec::new();
        PayloadHeader {
            code: CODE,
            topology: self.topology,
        }
        .encode(&mut out);
        Snapshot::new(Self::ID, out)
    }

    fn restore(snapshot: &Snapshot) -> Result<Self, StreamError> {
        let (topology, rest) = PayloadHeader::decode(snapshot, Self::ID, CODE)?;
        if !rest.is_empty() {
            return Err(StreamError::MalformedSnapshot("trailing bytes".into()));
        }
        Ok(Self { topology })
    }

    fn extract(&self) -> VertexCover {
        VertexCover::new(1..=self.topology.vertex_count())
    }
}
