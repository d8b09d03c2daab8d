//! Deterministic `n^eps`-approximate vertex cover by group contraction.
//!
//! The vertex set is cut into `g = ceil(n^(1-eps))` contiguous groups of at
//! most `ceil(n^eps)` vertices. While streaming, the algorithm keeps one
//! counter per unordered pair of groups (diagonal included) holding the
//! number of present edges between them. At extraction the contracted graph
//! has an edge between two groups iff their counter is nonzero, and a
//! self-loop on a group iff an edge lies inside it. A minimum cover of the
//! contracted graph, expanded back to vertices, covers every surviving edge
//! and is at most `ceil(n^eps)` times larger than an optimal cover.

use std::ops::RangeInclusive;

use crate::graph::{
    greedy_two_approx_cover, ExactCoverSolver, GeneralGraph, VertexCover, DEFAULT_EXACT_CAP,
};
use crate::stream::{
    width_for, BitReader, BitWriter, EdgeUpdate, PayloadHeader, Sign, Snapshot, StreamError,
    StreamingAlgorithm, Topology, PAYLOAD_HEADER_BYTES,
};

const CODE: u8 = 3;
const DENSE: u8 = 0;
const SPARSE: u8 = 1;

/// Fixed snapshot prefix: payload header, `epsilon` as `f64`, the exact
/// solver cap as `u32` and the counter-table mode byte.
pub const CONTRACTION_HEADER_BITS: u64 = 8 * (PAYLOAD_HEADER_BYTES as u64 + 8 + 4 + 1);

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GroupContractionParams {
    /// In `(0, 1]`; groups hold about `n^epsilon` vertices.
    pub epsilon: f64,
    /// Largest contracted graph solved exactly. Beyond it the algorithm
    /// falls back to a 2-approximate cover (see
    /// [`GroupContractionVc::solves_exactly`]).
    pub exact_cap: usize,
}

impl Default for GroupContractionParams {
    fn default() -> Self {
        Self {
            epsilon: 0.5,
            exact_cap: DEFAULT_EXACT_CAP,
        }
    }
}

/// `ceil(x)` that treats values within `1e-9` of an integer as that integer,
/// so that e.g. `256^0.75` yields 64 rather than 65.
fn robust_ceil(x: f64) -> usize {
    let r = x.round();
    if (x - r).abs() < 1e-9 {
        r as usize
    } else {
        x.ceil() as usize
    }
}

/// Contiguous, balanced partition of `1..=n` into `ceil(n^(1-eps))` groups.
///
/// The first `n mod g` groups hold one vertex more than the rest; every
/// group has at most `ceil(n / g) <= ceil(n^eps)` vertices.
#[derive(Clone, Debug, PartialEq)]
pub struct GroupPartition {
    n: usize,
    epsilon: f64,
    groups: usize,
    base: usize,
    larger: usize,
}

impl GroupPartition {
    pub fn new(n: usize, epsilon: f64) -> Result<Self, StreamError> {
        if n == 0 {
            return Err(StreamError::InvalidParameter("empty vertex set".into()));
        }
        if !(epsilon > 0.0 && epsilon <= 1.0) {
            return Err(StreamError::InvalidParameter(format!(
                "epsilon must lie in (0, 1], got {epsilon}"
            )));
        }
        let groups = robust_ceil((n as f64).powf(1.0 - epsilon)).clamp(1, n);
        Ok(Self {
            n,
            epsilon,
            groups,
            base: n / groups,
            larger: n % groups,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn group_count(&self) -> usize {
        self.groups
    }

    /// `ceil(n^eps)`, the approximation factor guaranteed by the partition.
    pub fn size_bound(&self) -> usize {
        robust_ceil((self.n as f64).powf(self.epsilon))
    }

    pub fn max_group_size(&self) -> usize {
        self.base + (self.larger > 0) as usize
    }

    /// 1-based group of vertex `v`.
    pub fn group_of(&self, v: usize) -> usize {
        let v0 = v - 1;
        let split = self.larger * (self.base + 1);
        if v0 < split {
            v0 / (self.base + 1) + 1
        } else {
            self.larger + (v0 - split) / self.base + 1
        }
    }

    pub fn members(&self, group: usize) -> RangeInclusive<usize> {
        let g0 = group - 1;
        let start = if g0 < self.larger {
            g0 * (self.base + 1)
        } else {
            self.larger * (self.base + 1) + (g0 - self.larger) * self.base
        };
        let size = self.base + (g0 < self.larger) as usize;
        start + 1..=start + size
    }
}

/// Symmetric `g x g` table of edge counts, stored as its upper triangle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairCounters {
    g: usize,
    counts: Vec<u64>,
}

impl PairCounters {
    pub fn new(g: usize) -> Self {
        Self {
            g,
            counts: vec![0; g * (g + 1) / 2],
        }
    }

    pub fn group_count(&self) -> usize {
        self.g
    }

    /// Number of stored counters, `g (g + 1) / 2`.
    pub fn slots(&self) -> usize {
        self.counts.len()
    }

    fn slot(&self, a: usize, b: usize) -> usize {
        let (i, j) = if a <= b {
            (a - 1, b - 1)
        } else {
            (b - 1, a - 1)
        };
        // Row i of the upper triangle starts after rows 0..i of lengths g, g-1, ...
        i * self.g - i * i.saturating_sub(1) / 2 + (j - i)
    }

    pub fn get(&self, a: usize, b: usize) -> u64 {
        self.counts[self.slot(a, b)]
    }

    pub fn nonzero(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }

    /// `(a, b, count)` for every nonzero counter with `a <= b`.
    pub fn iter_nonzero(&self) -> impl Iterator<Item = (usize, usize, u64)> + '_ {
        (1..=self.g).flat_map(move |a| {
            (a..=self.g).filter_map(move |b| {
                let c = self.get(a, b);
                (c > 0).then_some((a, b, c))
            })
        })
    }
}

/// The group-contraction vertex cover algorithm.
///
/// Works on general and bipartite streams; for bipartite streams the
/// vertex universe is `2n` with right vertex `v` at id `n + v`, and the
/// returned cover uses the same ids.
///
/// Snapshot encoding after the fixed [`CONTRACTION_HEADER_BITS`] prefix,
/// with `P = g (g + 1) / 2` slots and counters of width
/// `w = ceil(log2(N^2 + 1))` for a universe of `N` vertices:
///
/// * dense: all `P` counters, `w` bits each, upper-triangle row order;
/// * sparse: the number of nonzero counters in `width(P)` bits, then one
///   `(slot index, count)` pair per nonzero counter, `width(P - 1) + w` bits.
///
/// The shorter of the two is written (dense on ties), then padded to a
/// byte. The total is therefore at most `CONTRACTION_HEADER_BITS + P w + 7`.
#[derive(Clone, Debug)]
pub struct GroupContractionVc {
    topology: Topology,
    params: GroupContractionParams,
    partition: GroupPartition,
    counters: PairCounters,
}

impl GroupContractionVc {
    pub fn partition(&self) -> &GroupPartition {
        &self.partition
    }

    pub fn counters(&self) -> &PairCounters {
        &self.counters
    }

    /// False when the contracted graph exceeds the exact-solver cap and
    /// [`extract`](StreamingAlgorithm::extract) returns a 2-approximate
    /// cover of it instead, i.e. a `2 ceil(n^eps)`-approximation overall.
    pub fn solves_exactly(&self) -> bool {
        self.partition.group_count() <= self.params.exact_cap
    }

    pub fn counter_width(&self) -> u32 {
        let n = self.topology.vertex_count() as u64;
        width_for(n * n)
    }

    /// Upper bound on the snapshot size for this configuration.
    pub fn snapshot_bound_bits(&self) -> u64 {
        CONTRACTION_HEADER_BITS
            + (self.counters.slots() as u64 * self.counter_width() as u64).div_ceil(8) * 8
    }

    /// The contracted multigraph with multiplicities collapsed.
    pub fn contracted_graph(&self) -> GeneralGraph {
        let mut g = GeneralGraph::new(self.partition.group_count());
        for (a, b, _) in self.counters.iter_nonzero() {
            g.add_edge(a, b).expect("group ids in range");
        }
        g
    }

    fn slot_mut(&mut self, a: usize, b: usize) -> &mut u64 {
        let s = self.counters.slot(a, b);
        &mut self.counters.counts[s]
    }
}

impl StreamingAlgorithm for GroupContractionVc {
    type Params = GroupContractionParams;
    type Output = VertexCover;
    const ID: &'static str = "group-contraction";

    fn describe(params: &GroupContractionParams) -> String {
        format!("eps={};cap={}", params.epsilon, params.exact_cap)
    }

    fn init(
        topology: Topology,
        params: &GroupContractionParams,
        _seed: u64,
    ) -> Result<Self, StreamError> {
        let partition = GroupPartition::new(topology.vertex_count(), params.epsilon)?;
        if topology.vertex_count() > u32::MAX as usize || params.exact_cap > u32::MAX as usize {
            return Err(StreamError::InvalidParameter("size exceeds u32".into()));
        }
        Ok(Self {
            topology,
            params: *params,
            counters: PairCounters::new(partition.group_count()),
            partition,
        })
    }

    fn process(&mut self, update: &EdgeUpdate) -> Result<(), StreamError> {
        let (a, b) =
            self.topology
                .endpoints(update.u, update.v)
                .ok_or_else(|| StreamError::Contract {
                    update: *update,
                    reason: "endpoint out of range".into(),
                })?;
        let (ga, gb) = (self.partition.group_of(a), self.partition.group_of(b));
        let count = self.slot_mut(ga, gb);
        match update.sign {
            Sign::Insert => *count += 1,
            Sign::Delete if *count == 0 => {
                return Err(StreamError::Contract {
                    update: *update,
                    reason: "counter underflow".into(),
                })
            }
            Sign::Delete => *count -= 1,
        }
        Ok(())
    }

    fn snapshot(&self) -> Snapshot {
        let mut out = Vec::new();
        PayloadHeader {
            code: CODE,
            topology: self.topology,
        }
        .encode(&mut out);
        out.extend_from_slice(&self.params.epsilon.to_le_bytes());
        out.extend_from_slice(&(self.params.exact_cap as u32).to_le_bytes());

        let w = self.counter_width();
        let slots = self.counters.slots() as u64;
        let index_width = width_for(slots - 1);
        let nonzero = self.counters.nonzero() as u64;
        let dense_bits = slots * w as u64;
        let sparse_bits = width_for(slots) as u64 + nonzero * (index_width + w) as u64;

        let mut body = BitWriter::new();
        if dense_bits <= sparse_bits {
            out.push(DENSE);
            for &c in &self.counters.counts {
                body.write(c, w);
            }
        } else {
            out.push(SPARSE);
            body.write(nonzero, width_for(slots));
            for (s, &c) in self.counters.counts.iter().enumerate() {
                if c > 0 {
                    body.write(s as u64, index_width);
                    body.write(c, w);
                }
            }
        }
        out.extend(body.finish());
        Snapshot::new(Self::ID, out)
    }

    fn restore(snapshot: &Snapshot) -> Result<Self, StreamError> {
        let bad = |m: &str| StreamError::MalformedSnapshot(m.to_string());
        let (topology, rest) = PayloadHeader::decode(snapshot, Self::ID, CODE)?;
        if rest.len() < 13 {
            return Err(bad("truncated parameters"));
        }
        let epsilon = f64::from_le_bytes(rest[..8].try_into().unwrap());
        let exact_cap = u32::from_le_bytes(rest[8..12].try_into().unwrap()) as usize;
        let mode = rest[12];
        let mut alg = Self::init(topology, &GroupContractionParams { epsilon, exact_cap }, 0)?;

        let w = alg.counter_width();
        let slots = alg.counters.slots();
        let mut r = BitReader::new(&rest[13..]);
        let truncated = || bad("truncated counters");
        match mode {
            DENSE => {
                for s in 0..slots {
                    alg.counters.counts[s] = r.read(w).ok_or_else(truncated)?;
                }
            }
            SPARSE => {
                let nonzero = r.read(width_for(slots as u64)).ok_or_else(truncated)?;
                let index_width = width_for(slots as u64 - 1);
                let mut last = None;
                for _ in 0..nonzero {
                    let s = r.read(index_width).ok_or_else(truncated)? as usize;
                    let c = r.read(w).ok_or_else(truncated)?;
                    if s >= slots || c == 0 || last.is_some_and(|l| s <= l) {
                        return Err(bad("sparse entries out of order"));
                    }
                    alg.counters.counts[s] = c;
                    last = Some(s);
                }
            }
            _ => return Err(bad("unknown counter mode")),
        }
        if !r.at_padding() {
            return Err(bad("trailing bytes"));
        }
        Ok(alg)
    }

    fn extract(&self) -> VertexCover {
        let contracted = self.contracted_graph();
        let chosen = if self.solves_exactly() {
            ExactCoverSolver::new(self.params.exact_cap)
                .solve(&contracted)
                .expect("group count within cap")
        } else {
            greedy_two_approx_cover(&contracted)
        };
        VertexCover::new(chosen.iter().flat_map(|g| self.partition.members(g)))
    }
}
