use super::{validate_stream, EdgeUpdate, GraphStream, Snapshot, StreamError, Topology};

/// A streaming algorithm whose entire memory can be serialized.
///
/// Any randomness is fixed in [`init`](Self::init) from the explicit seed
/// and is part of the snapshot, so `process` is deterministic and a
/// restored instance continues exactly where the original stopped.
pub trait StreamingAlgorithm: Sized {
    type Params;
    type Output: PartialEq + std::fmt::Debug;

    /// Identifier stored with every snapshot.
    const ID: &'static str;

    /// `key=value` pairs describing `params`, joined by `;`.
    fn describe(_params: &Self::Params) -> String {
        String::new()
    }

    fn init(topology: Topology, params: &Self::Params, seed: u64) -> Result<Self, StreamError>;

    fn process(&mut self, update: &EdgeUpdate) -> Result<(), StreamError>;

    fn snapshot(&self) -> Snapshot;

    /// Rebuilds an instance; rejects snapshots of other algorithms.
    fn restore(snapshot: &Snapshot) -> Result<Self, StreamError>;

    fn extract(&self) -> Self::Output;

    fn process_all<'a, I>(&mut self, updates: I) -> Result<(), StreamError>
    where
        I: IntoIterator<Item = &'a EdgeUpdate>,
    {
        updates.into_iter().try_for_each(|u| self.process(u))
    }
}

/// Space used by a snapshot, in bits.
pub fn measure_space(snapshot: &Snapshot) -> u64 {
    snapshot.bit_length()
}

/// Unsplit execution: one instance sees the whole stream.
pub fn run<A: StreamingAlgorithm>(
    params: &A::Params,
    seed: u64,
    stream: &GraphStream,
) -> Result<A::Output, StreamError> {
    validate_stream(stream)?;
    let mut alg = A::init(stream.topology, params, seed)?;
    alg.process_all(&stream.updates)?;
    Ok(alg.extract())
}

/// One-way split: Alice runs the prefix and hands over a snapshot, Bob
/// restores it in a fresh instance and runs the suffix.
pub fn run_split<A: StreamingAlgorithm>(
    params: &A::Params,
    seed: u64,
    prefix: &GraphStream,
    suffix: &GraphStream,
) -> Result<(Snapshot, A::Output), StreamError> {
    if prefix.topology != suffix.topology {
        return Err(StreamError::InvalidParameter(format!(
            "prefix topology {} differs from suffix topology {}",
            prefix.topology, suffix.topology
        )));
    }
    let whole = GraphStream::new(
        prefix.topology,
        prefix
            .updates
            .iter()
            .chain(&suffix.updates)
            .copied()
            .collect(),
    );
    validate_stream(&whole)?;

    let mut alice = A::init(prefix.topology, params, seed)?;
    alice.process_all(&prefix.updates)?;
    let message = alice.snapshot();
    drop(alice);

    let mut bob = A::restore(&message)?;
    bob.process_all(&suffix.updates)?;
    Ok((message, bob.extract()))
}
