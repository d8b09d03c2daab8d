use super::{StreamError, Topology};

/// Serialized memory state of a streaming algorithm.
///
/// The payload is the algorithm's canonical encoding; its length in bits
/// is the space the algorithm uses and the size of the one-way message.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Snapshot {
    algorithm: String,
    payload: Vec<u8>,
}

pub const SNAPSHOT_MAGIC: [u8; 8] = *b"BINDSNAP";
pub const SNAPSHOT_VERSION: u16 = 1;
/// Magic, version, id length and payload length.
pub const SNAPSHOT_FILE_HEADER_BYTES: usize = 16;

impl Snapshot {
    pub fn new(algorithm: impl Into<String>, payload: Vec<u8>) -> Self {
        Self {
            algorithm: algorithm.into(),
            payload,
        }
    }

    pub fn algorithm(&self) -> &str {
        &self.algorithm
    }

    pub fn payload(&self) -> &[u8] {
        &self.payload
    }

    pub fn bit_length(&self) -> u64 {
        8 * self.payload.len() as u64
    }

    /// File layout: 16-byte header (`BINDSNAP`, version `u16`, id length
    /// `u16`, payload length `u32`, all little-endian), the algorithm id in
    /// UTF-8, then the raw payload.
    pub fn to_file_bytes(&self) -> Vec<u8> {
        let id = self.algorithm.as_bytes();
        let mut out =
            Vec::with_capacity(SNAPSHOT_FILE_HEADER_BYTES + id.len() + self.payload.len());
        out.extend_from_slice(&SNAPSHOT_MAGIC);
        out.extend_from_slice(&SNAPSHOT_VERSION.to_le_bytes());
        out.extend_from_slice(&(id.len() as u16).to_le_bytes());
        out.extend_from_slice(&(self.payload.len() as u32).to_le_bytes());
        out.extend_from_slice(id);
        out.extend_from_slice(&self.payload);
        out
    }

    pub fn from_file_bytes(bytes: &[u8]) -> Result<Self, StreamError> {
        let bad = |what: &str| StreamError::MalformedSnapshot(what.to_string());
        if bytes.len() < SNAPSHOT_FILE_HEADER_BYTES || bytes[..8] != SNAPSHOT_MAGIC {
            return Err(bad("missing magic"));
        }
        let version = u16::from_le_bytes([bytes[8], bytes[9]]);
        if version != SNAPSHOT_VERSION {
            return Err(bad("unsupported version"));
        }
        let id_len = u16::from_le_bytes([bytes[10], bytes[11]]) as usize;
        let payload_len = u32::from_le_bytes(bytes[12..16].try_into().unwrap()) as usize;
        let rest = &bytes[SNAPSHOT_FILE_HEADER_BYTES..];
        if rest.len() != id_len + payload_len {
            return Err(bad("length mismatch"));
        }
        let algorithm = std::str::from_utf8(&rest[..id_len]).map_err(|_| bad("id is not UTF-8"))?;
        Ok(Self::new(algorithm, rest[id_len..].to_vec()))
    }
}

/// Algorithm code `u8`, topology kind `u8` (0 general, 1 bipartite), `n` as
/// `u32` little-endian.
pub(crate) const PAYLOAD_HEADER_BYTES: usize = 6;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct PayloadHeader {
    pub code: u8,
    pub topology: Topology,
}

impl PayloadHeader {
    pub fn encode(&self, out: &mut Vec<u8>) {
        let (kind, n) = match self.topology {
            Topology::General { n } => (0u8, n),
            Topology::Bipartite { n } => (1u8, n),
        };
        out.push(self.code);
        out.push(kind);
        out.extend_from_slice(&(n as u32).to_le_bytes());
    }

    /// Checks the id and code, returning the topology and the remaining bytes.
    pub fn decode<'a>(
        snapshot: &'a Snapshot,
        id: &str,
        code: u8,
    ) -> Result<(Topology, &'a [u8]), StreamError> {
        if snapshot.algorithm() != id {
            return Err(StreamError::AlgorithmMismatch {
                expected: id.to_string(),
                found: snapshot.algorithm().to_string(),
            });
        }
        let p = snapshot.payload();
        if p.len() < PAYLOAD_HEADER_BYTES {
            return Err(StreamError::MalformedSnapshot("truncated header".into()));
        }
        if p[0] != code {
            return Err(StreamError::MalformedSnapshot(format!(
                "algorithm code {} does not match {id}",
                p[0]
            )));
        }
        let n = u32::from_le_bytes(p[2..6].try_into().unwrap()) as usize;
        let topology = match p[1] {
            0 => Topology::General { n },
            1 => Topology::Bipartite { n },
            k => return Err(StreamError::MalformedSnapshot(format!("topology kind {k}"))),
        };
        Ok((topology, &p[PAYLOAD_HEADER_BYTES..]))
    }
}
