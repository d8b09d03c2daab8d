//! Strict-turnstile graph streams and the streaming-algorithm contract.
//!
//! A stream is a sequence of signed edge updates over a simple graph: at
//! every prefix each edge is present zero or one times. Algorithms consume
//! updates one at a time and expose their whole memory as a [`Snapshot`],
//! whose size is the message length in the Alice/Bob split.

mod bits;
mod contract;
mod snapshot;

use std::collections::HashSet;
use std::fmt;

use thiserror::Error;

pub(crate) use bits::{width_for, BitReader, BitWriter};
pub use contract::{measure_space, run, run_split, StreamingAlgorithm};
pub(crate) use snapshot::{PayloadHeader, PAYLOAD_HEADER_BYTES};
pub use snapshot::{Snapshot, SNAPSHOT_FILE_HEADER_BYTES, SNAPSHOT_MAGIC, SNAPSHOT_VERSION};

#[derive(Debug, Error, PartialEq)]
pub enum StreamError {
    #[error("stream violation: {0}")]
    Violation(#[from] StreamViolation),
    #[error("update {update} rejected: {reason}")]
    Contract { update: EdgeUpdate, reason: String },
    #[error("snapshot belongs to {found:?}, expected {expected:?}")]
    AlgorithmMismatch { expected: String, found: String },
    #[error("malformed snapshot: {0}")]
    MalformedSnapshot(String),
    #[error("topology {found} not supported by {algorithm}")]
    UnsupportedTopology { algorithm: String, found: Topology },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("parse error on line {line}: {detail}")]
    Parse { line: usize, detail: String },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    Insert,
    Delete,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct EdgeUpdate {
    pub u: usize,
    pub v: usize,
    pub sign: Sign,
}

impl EdgeUpdate {
    pub fn insert(u: usize, v: usize) -> Self {
        Self {
            u,
            v,
            sign: Sign::Insert,
        }
    }

    pub fn delete(u: usize, v: usize) -> Self {
        Self {
            u,
            v,
            sign: Sign::Delete,
        }
    }
}

/// `+ u v` or `- u v`.
impl fmt::Display for EdgeUpdate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self.sign {
            Sign::Insert => '+',
            Sign::Delete => '-',
        };
        write!(f, "{s} {} {}", self.u, self.v)
    }
}

/// Vertex universe of a stream.
///
/// `Bipartite { n }`: updates carry a left id `u` and a right id `v`, both in
/// `1..=n`. `General { n }`: unordered pairs of distinct ids in `1..=n`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Topology {
    Bipartite { n: usize },
    General { n: usize },
}

impl Topology {
    pub fn n(&self) -> usize {
        match *self {
            Topology::Bipartite { n } | Topology::General { n } => n,
        }
    }

    /// `2n` for bipartite streams, `n` otherwise.
    pub fn vertex_count(&self) -> usize {
        match *self {
            Topology::Bipartite { n } => 2 * n,
            Topology::General { n } => n,
        }
    }

    pub fn max_edges(&self) -> usize {
        match *self {
            Topology::Bipartite { n } => n * n,
            Topology::General { n } => n * n.saturating_sub(1) / 2,
        }
    }

    /// Maps an update's endpoints to flattened vertex ids, `u <= v` for
    /// general graphs and right ids shifted by `n` for bipartite ones.
    pub fn endpoints(&self, u: usize, v: usize) -> Option<(usize, usize)> {
        match *self {
            Topology::Bipartite { n } => {
                ((1..=n).contains(&u) && (1..=n).contains(&v)).then_some((u, n + v))
            }
            Topology::General { n } => ((1..=n).contains(&u) && (1..=n).contains(&v) && u != v)
                .then_some((u.min(v), u.max(v))),
        }
    }
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Topology::Bipartite { n } => write!(f, "bipartite(n={n})"),
            Topology::General { n } => write!(f, "general(n={n})"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphStream {
    pub topology: Topology,
    pub updates: Vec<EdgeUpdate>,
}

impl GraphStream {
    pub fn new(topology: Topology, updates: Vec<EdgeUpdate>) -> Self {
        Self { topology, updates }
    }

    pub fn len(&self) -> usize {
        self.updates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.updates.is_empty()
    }

    /// Edges present after the whole stream, as flattened endpoint pairs.
    pub fn surviving_edges(&self) -> Result<Vec<(usize, usize)>, StreamViolation> {
        let present = replay(self)?;
        let mut edges: Vec<_> = present.into_iter().collect();
        edges.sort_unstable();
        Ok(edges)
    }

    /// Parses the stream text format.
    ///
    /// Header `"n m"` (an optional third token `bipartite` or `general`
    /// overrides `default_bipartite`), then `m` lines `"+ u v"` / `"- u v"`.
    pub fn parse(text: &str, default_bipartite: bool) -> Result<Self, StreamError> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or(StreamError::Parse {
            line: 1,
            detail: "missing header".into(),
        })?;
        let tokens: Vec<&str> = header.split_whitespace().collect();
        let bad_header = || StreamError::Parse {
            line: 1,
            detail: format!("bad header {header:?}"),
        };
        let (n, m, bipartite) = match tokens[..] {
            [n, m] => (n, m, default_bipartite),
            [n, m, "bipartite"] => (n, m, true),
            [n, m, "general"] => (n, m, false),
            _ => return Err(bad_header()),
        };
        let n: usize = n.parse().map_err(|_| bad_header())?;
        let m: usize = m.parse().map_err(|_| bad_header())?;
        let topology = if bipartite {
            Topology::Bipartite { n }
        } else {
            Topology::General { n }
        };
        let mut updates = Vec::with_capacity(m);
        for (idx, line) in lines {
            let bad = || StreamError::Parse {
                line: idx + 1,
                detail: format!("bad update {line:?}"),
            };
            let tokens: Vec<&str> = line.split_whitespace().collect();
            let [sign, u, v] = tokens[..] else {
                return Err(bad());
            };
            let u = u.parse().map_err(|_| bad())?;
            let v = v.parse().map_err(|_| bad())?;
            updates.push(match sign {
                "+" => EdgeUpdate::insert(u, v),
                "-" => EdgeUpdate::delete(u, v),
                _ => return Err(bad()),
            });
        }
        if updates.len() != m {
            return Err(StreamError::Parse {
                line: 1,
                detail: format!("header announces {m} updates, found {}", updates.len()),
            });
        }
        Ok(Self { topology, updates })
    }
}

/// Text format; bipartite streams carry a `bipartite` header tag.
impl fmt::Display for GraphStream {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.topology {
            Topology::Bipartite { n } => writeln!(f, "{n} {} bipartite", self.updates.len())?,
            Topology::General { n } => writeln!(f, "{n} {}", self.updates.len())?,
        }
        for u in &self.updates {
            writeln!(f, "{u}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    DeleteAbsent,
    DuplicateInsert,
    EndpointOutOfRange,
    TooLong,
}

/// First offending update, `index` 1-based.
#[derive(Clone, Copy, Debug, Error, PartialEq, Eq)]
#[error("{kind:?} at update {index}")]
pub struct StreamViolation {
    pub index: usize,
    pub kind: ViolationKind,
}

/// Checks the strict-turnstile property on every prefix.
pub fn validate_stream(s: &GraphStream) -> Result<(), StreamViolation> {
    replay(s).map(|_| ())
}

fn replay(s: &GraphStream) -> Result<HashSet<(usize, usize)>, StreamViolation> {
    let limit = 2 * s.topology.max_edges();
    let mut present = HashSet::new();
    for (idx, up) in s.updates.iter().enumerate() {
        let fail = |kind| StreamViolation {
            index: idx + 1,
            kind,
        };
        if idx >= limit {
            return Err(fail(ViolationKind::TooLong));
        }
        let key = s
            .topology
            .endpoints(up.u, up.v)
            .ok_or(fail(ViolationKind::EndpointOutOfRange))?;
        match up.sign {
            Sign::Insert if !present.insert(key) => {
                return Err(fail(ViolationKind::DuplicateInsert))
            }
            Sign::Delete if !present.remove(&key) => return Err(fail(ViolationKind::DeleteAbsent)),
            _ => {}
        }
    }
    Ok(present)
}
