use crate::matrix::BitMatrix;
use crate::stream::{EdgeUpdate, Sign, StreamError};

/// Exact `n x n` edge bitmap with strict-turnstile checks.
///
/// Encoding: one flag byte, `0` for an empty graph, otherwise `1` followed
/// by the packed row-major bitmap (`ceil(n^2 / 8)` bytes).
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct EdgeBitmap {
    pub bits: BitMatrix,
    pub edges: usize,
}

impl EdgeBitmap {
    pub fn new(n: usize) -> Self {
        Self {
            bits: BitMatrix::zeros(n),
            edges: 0,
        }
    }

    pub fn apply(&mut self, up: &EdgeUpdate) -> Result<(), StreamError> {
        let n = self.bits.n();
        if !(1..=n).contains(&up.u) || !(1..=n).contains(&up.v) {
            return Err(StreamError::Contract {
                update: *up,
                reason: "endpoint out of range".into(),
            });
        }
        let present = self.bits.get(up.u, up.v);
        match (up.sign, present) {
            (Sign::Insert, false) => {
                self.bits.set(up.u, up.v, true);
                self.edges += 1;
            }
            (Sign::Delete, true) => {
                self.bits.set(up.u, up.v, false);
                self.edges -= 1;
            }
            (Sign::Insert, true) => {
                return Err(StreamError::Contract {
                    update: *up,
                    reason: "edge already present".into(),
                })
            }
            (Sign::Delete, false) => {
                return Err(StreamError::Contract {
                    update: *up,
                    reason: "edge absent".into(),
                })
            }
        }
        Ok(())
    }

    pub fn encode(&self, out: &mut Vec<u8>) {
        if self.edges == 0 {
            out.push(0);
        } else {
            out.push(1);
            out.extend_from_slice(&self.bits.to_packed_bytes());
        }
    }

    pub fn decode(n: usize, bytes: &[u8]) -> Result<Self, StreamError> {
        let bad = |m: String| StreamError::MalformedSnapshot(m);
        match bytes.split_first() {
            Some((0, [])) => Ok(Self::new(n)),
            Some((1, rest)) => {
                let bits = BitMatrix::from_packed_bytes(n, rest).map_err(|e| bad(e.to_string()))?;
                let edges = bits.count_ones();
                if edges == 0 {
                    return Err(bad("empty bitmap must use the empty flag".into()));
                }
                Ok(Self { bits, edges })
            }
            _ => Err(bad("bad bitmap flag or trailing bytes".into())),
        }
    }
}
