use super::bitmap::EdgeBitmap;
use super::require_bipartite;
use crate::graph::{maximum_matching, Matching};
use crate::matrix::graph_of;
use crate::rng::mix64;
use crate::stream::{
    EdgeUpdate, PayloadHeader, Snapshot, StreamError, StreamingAlgorithm, Topology,
};

const CODE: u8 = 4;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SubsampleParams {
    /// Probability in `[0, 1]` that a given edge is retained.
    pub p: f64,
}

/// Keeps each edge independently with probability `p`, decided by a
/// seeded hash of the edge so that insertions and deletions agree.
/// Extracts a maximum matching of the retained subgraph.
///
/// Snapshot: payload header, `p` as `f64`, the hash seed as `u64`, then the
/// retained-edge bitmap in the store-all encoding.
#[derive(Clone, Debug)]
pub struct SubsampleMatching {
    n: usize,
    p: f64,
    seed: u64,
    edges: EdgeBitmap,
}

impl SubsampleMatching {
    pub fn retains(&self, u: usize, v: usize) -> bool {
        retained(self.seed, self.p, u, v)
    }

    pub fn retained_edges(&self) -> usize {
        self.edges.edges
    }
}

fn retained(seed: u64, p: f64, u: usize, v: usize) -> bool {
    if p >= 1.0 {
        return true;
    }
    let h = mix64(mix64(seed ^ (u as u64).rotate_left(32)) ^ v as u64);
    // Top 53 bits as a uniform fraction in [0, 1).
    ((h >> 11) as f64 / (1u64 << 53) as f64) < p
}

impl StreamingAlgorithm for SubsampleMatching {
    type Params = SubsampleParams;
    type Output = Matching;
    const ID: &'static str = "subsample";

    fn describe(params: &SubsampleParams) -> String {
        format!("p={}", params.p)
    }

    fn init(topology: Topology, params: &SubsampleParams, seed: u64) -> Result<Self, StreamError> {
        let n = require_bipartite(Self::ID, topology)?;
        if !(0.0..=1.0).contains(&params.p) {
            return Err(StreamError::InvalidParameter(format!(
                "retention probability must lie in [0, 1], got {}",
                params.p
            )));
        }
        Ok(Self {
            n,
            p: params.p,
            seed,
            edges: EdgeBitmap::new(n),
        })
    }

    fn process(&mut self, update: &EdgeUpdate) -> Result<(), StreamError> {
        if (1..=self.n).contains(&update.u)
            && (1..=self.n).contains(&update.v)
            && !self.retains(update.u, update.v)
        {
            return Ok(());
        }
        self.edges.apply(update)
    }

    fn snapshot(&self) -> Snapshot {
        let mut out = Vec::new();
        PayloadHeader {
            code: CODE,
            topology: Topology::Bipartite { n: self.n },
        }
        .encode(&mut out);
        out.extend_from_slice(&self.p.to_le_bytes());
        out.extend_from_slice(&self.seed.to_le_bytes());
        self.edges.encode(&mut out);
        Snapshot::new(Self::ID, out)
    }

    fn restore(snapshot: &Snapshot) -> Result<Self, StreamError> {
        let (topology, rest) = PayloadHeader::decode(snapshot, Self::ID, CODE)?;
        let n = require_bipartite(Self::ID, topology)?;
        if rest.len() < 16 {
            return Err(StreamError::MalformedSnapshot(
                "truncated parameters".into(),
            ));
        }
        let p = f64::from_le_bytes(rest[..8].try_into().unwrap());
        let seed = u64::from_le_bytes(rest[8..16].try_into().unwrap());
        let mut alg = Self::init(topology, &SubsampleParams { p }, seed)?;
        alg.edges = EdgeBitmap::decode(n, &rest[16..])?;
        if alg.edges.bits.ones().any(|(u, v)| !alg.retains(u, v)) {
            return Err(StreamError::MalformedSnapshot(
                "bitmap holds an unsampled edge".into(),
            ));
        }
        Ok(alg)
    }

    fn extract(&self) -> Matching {
        maximum_matching(&graph_of(&self.edges.bits))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithms::StoreAll;
    use crate::graph::BipartiteGraph;
    use crate::matrix::BitMatrix;
    use crate::stream::{run, GraphStream};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn stream_of(b: &BitMatrix) -> GraphStream {
        GraphStream::new(
            Topology::Bipartite { n: b.n() },
            b.ones().map(|(u, v)| EdgeUpdate::insert(u, v)).collect(),
        )
    }

    #[test]
    fn extremes() {
        let b = BitMatrix::random(10, &mut ChaCha8Rng::seed_from_u64(1));
        let s = stream_of(&b);
        let all = run::<SubsampleMatching>(&SubsampleParams { p: 1.0 }, 5, &s).unwrap();
        assert_eq!(all, run::<StoreAll>(&(), 0, &s).unwrap());
        assert!(run::<SubsampleMatching>(&SubsampleParams { p: 0.0 }, 5, &s)
            .unwrap()
            .is_empty());
        assert!(SubsampleMatching::init(
            Topology::Bipartite { n: 3 },
            &SubsampleParams { p: 1.5 },
            0
        )
        .is_err());
    }

    #[test]
    fn matches_oracle_on_retained_subgraph() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let b = BitMatrix::random(12, &mut rng);
        let s = stream_of(&b);
        let params = SubsampleParams { p: 0.5 };
        let mut total = 0.0;
        let mut oracle_total = 0.0;
        for seed in 0..200 {
            let out = run::<SubsampleMatching>(&params, seed, &s).unwrap();
            let kept: Vec<_> = b
                .ones()
                .filter(|&(u, v)| retained(seed, 0.5, u, v))
                .collect();
            let g = BipartiteGraph::from_edges(12, 12, kept).unwrap();
            assert!(g.is_valid_matching(&out));
            oracle_total += maximum_matching(&g).len() as f64;
            total += out.len() as f64;
        }
        assert_eq!(total, oracle_total);
        // Retention rate over many edges is close to p.
        let kept = (1..=100)
            .flat_map(|u| (1..=100).map(move |v| (u, v)))
            .filter(|&(u, v)| retained(rng.gen(), 0.5, u, v))
            .count();
        assert!((kept as f64 / 1e4 - 0.5).abs() < 0.02, "{kept}");
    }

    #[test]
    fn deletions_of_unsampled_edges_are_ignored() {
        let mut a =
            SubsampleMatching::init(Topology::Bipartite { n: 6 }, &SubsampleParams { p: 0.3 }, 9)
                .unwrap();
        for u in 1..=6 {
            for v in 1..=6 {
                a.process(&EdgeUpdate::insert(u, v)).unwrap();
            }
        }
        let kept = a.retained_edges();
        for u in 1..=6 {
            for v in 1..=6 {
                a.process(&EdgeUpdate::delete(u, v)).unwrap();
            }
        }
        assert!(kept > 0);
        assert_eq!(a.retained_edges(), 0);
        let b = SubsampleMatching::restore(&a.snapshot()).unwrap();
        assert_eq!(b.snapshot(), a.snapshot());
    }
}
