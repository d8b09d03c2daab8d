//! Alice's side and the shared randomness common to both BInd reductions.
//!
//! Run `r` of either reduction draws a uniform mask `X` and a pair of
//! permutations `(s1, s2)` from the public seed. Alice inserts the edges of
//! `G(A')` with `A' = permute(A xor X)` in a random order and sends the
//! algorithm's snapshot. Bob, who sees `A` on his window, knows which of
//! those edges come from the window and deletes some of them.

use rand::seq::SliceRandom;

use crate::bind::{BobView, ProtocolError};
use crate::matrix::{BitMatrix, Permutation, PermutationPair};
use crate::rng::{derive_rng, derive_seed, Role};
use crate::stream::{EdgeUpdate, Snapshot, StreamingAlgorithm, Topology};

/// Mask and permutations of one run, derived from `(seed, run)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunRandomness {
    pub mask: BitMatrix,
    pub perms: PermutationPair,
}

impl RunRandomness {
    pub fn derive(seed: u64, run: u64, n: usize) -> Self {
        let mask = BitMatrix::random(n, &mut derive_rng(seed, run, Role::Mask));
        let rows = Permutation::random(n, &mut derive_rng(seed, run, Role::RowPermutation));
        let cols = Permutation::random(n, &mut derive_rng(seed, run, Role::ColumnPermutation));
        Self {
            mask,
            perms: PermutationPair::new(rows, cols).expect("equal sizes"),
        }
    }

    /// `A' = permute(A xor X)`.
    pub fn encode(&self, a: &BitMatrix) -> Result<BitMatrix, ProtocolError> {
        Ok(a.xor(&self.mask)?.permute(&self.perms)?)
    }

    /// Image `(s1(i), s2(j))` of an original position.
    pub fn place(&self, (i, j): (usize, usize)) -> (usize, usize) {
        (self.perms.rows.apply(i), self.perms.cols.apply(j))
    }
}

/// Seed handed to the streaming algorithm of run `run`.
pub fn algorithm_seed(seed: u64, run: u64) -> u64 {
    derive_seed(seed, run, Role::Algorithm)
}

/// Streams the edges of `G(A')` for run `run` in a seed-derived random
/// order through a fresh instance of `A` and returns its snapshot.
pub fn alice_encode<A: StreamingAlgorithm>(
    a: &BitMatrix,
    params: &A::Params,
    seed: u64,
    run: u64,
) -> Result<Snapshot, ProtocolError> {
    alice_encode_with::<A>(
        a,
        &RunRandomness::derive(seed, run, a.n()),
        params,
        seed,
        run,
    )
}

/// [`alice_encode`] with explicit mask and permutations.
pub fn alice_encode_with<A: StreamingAlgorithm>(
    a: &BitMatrix,
    rr: &RunRandomness,
    params: &A::Params,
    seed: u64,
    run: u64,
) -> Result<Snapshot, ProtocolError> {
    let encoded = rr.encode(a)?;
    let mut edges: Vec<(usize, usize)> = encoded.ones().collect();
    edges.shuffle(&mut derive_rng(seed, run, Role::AliceOrder));
    let mut alg = A::init(
        Topology::Bipartite { n: a.n() },
        params,
        algorithm_seed(seed, run),
    )?;
    for (u, v) in edges {
        alg.process(&EdgeUpdate::insert(u, v))?;
    }
    Ok(alg.snapshot())
}

/// An edge of `G(A')` that Bob can place: its original window position and
/// its permuted image.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct KnownEdge {
    pub original: (usize, usize),
    pub edge: (usize, usize),
}

/// `E_S`: window positions where `A xor X` is one, with their images, in
/// row-major window order.
pub fn known_edges(view: &BobView, rr: &RunRandomness) -> Vec<KnownEdge> {
    view.entries()
        .filter(|&(i, j, a)| a ^ rr.mask.get(i, j))
        .map(|(i, j, _)| KnownEdge {
            original: (i, j),
            edge: rr.place((i, j)),
        })
        .collect()
}

/// True for `(x + q, y + q)` with `1 <= q <= k - 1`.
pub fn on_window_diagonal(view: &BobView, (i, j): (usize, usize)) -> bool {
    let w = view.window();
    i > w.x() && i - w.x() == j.wrapping_sub(w.y()) && i - w.x() < w.k()
}

/// Restores Alice's snapshot, deletes `deletions` in a seed-derived random
/// order and returns the instance.
pub(crate) fn bob_replay<A: StreamingAlgorithm>(
    snapshot: &Snapshot,
    mut deletions: Vec<(usize, usize)>,
    seed: u64,
    run: u64,
) -> Result<A, ProtocolError> {
    let mut alg = A::restore(snapshot)?;
    deletions.shuffle(&mut derive_rng(seed, run, Role::BobOrder));
    for (u, v) in deletions {
        alg.process(&EdgeUpdate::delete(u, v))?;
    }
    Ok(alg)
}

/// Checks that `view` fits the configured `n` and `k`.
pub(crate) fn check_view(view: &BobView, n: usize, k: usize) -> Result<(), ProtocolError> {
    let w = view.window();
    if w.n() != n || w.k() != k {
        return Err(ProtocolError::ViewMismatch(format!(
            "window has n = {}, k = {}; configuration has n = {n}, k = {k}",
            w.n(),
            w.k()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithms::StoreAll;
    use crate::bind::BIndInstance;
    use crate::matrix::IndexWindow;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn randomness_is_shared_and_varies_by_run() {
        assert_eq!(
            RunRandomness::derive(5, 1, 16),
            RunRandomness::derive(5, 1, 16)
        );
        assert_ne!(
            RunRandomness::derive(5, 1, 16),
            RunRandomness::derive(5, 2, 16)
        );
        assert_ne!(
            RunRandomness::derive(5, 1, 16),
            RunRandomness::derive(6, 1, 16)
        );
    }

    #[test]
    fn masked_matrix_streams_no_edges() {
        let rr = RunRandomness::derive(3, 1, 8);
        let snap = alice_encode::<StoreAll>(&rr.mask, &(), 3, 1).unwrap();
        let empty = StoreAll::init(Topology::Bipartite { n: 8 }, &(), 0)
            .unwrap()
            .snapshot();
        assert_eq!(snap, empty);
        assert_eq!(alice_encode::<StoreAll>(&rr.mask, &(), 3, 1).unwrap(), snap);
    }

    #[test]
    fn all_ones_streams_every_edge() {
        let a = BitMatrix::all_ones(4);
        let plain = RunRandomness {
            mask: BitMatrix::zeros(4),
            perms: PermutationPair::identity(4),
        };
        let snap = alice_encode_with::<StoreAll>(&a, &plain, &(), 0, 1).unwrap();
        assert_eq!(StoreAll::restore(&snap).unwrap().edge_count(), 16);

        let rr = RunRandomness::derive(0, 1, 4);
        let snap = alice_encode::<StoreAll>(&a, &(), 0, 1).unwrap();
        assert_eq!(
            StoreAll::restore(&snap).unwrap().edge_count(),
            16 - rr.mask.count_ones()
        );
    }

    #[test]
    fn known_edges_are_edges_of_the_encoding() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let inst = BIndInstance::random(20, 7, &mut rng).unwrap();
        let rr = RunRandomness::derive(11, 4, 20);
        let enc = rr.encode(inst.matrix()).unwrap();
        let known = known_edges(inst.view(), &rr);
        let w = IndexWindow::new(20, 7, inst.x(), inst.y()).unwrap();
        let expected = w
            .indices()
            .filter(|&(i, j)| enc.get(rr.place((i, j)).0, rr.place((i, j)).1))
            .count();
        assert_eq!(known.len(), expected);
        assert!(known.iter().all(|e| enc.get(e.edge.0, e.edge.1)));
    }

    #[test]
    fn diagonal_excludes_corner() {
        let inst = BIndInstance::new(BitMatrix::zeros(10), 4, 2, 3).unwrap();
        let v = inst.view();
        assert!(!on_window_diagonal(v, (2, 3)));
        assert!(on_window_diagonal(v, (3, 4)));
        assert!(on_window_diagonal(v, (5, 6)));
        assert!(!on_window_diagonal(v, (6, 7)));
        assert!(!on_window_diagonal(v, (3, 5)));
        assert!(!on_window_diagonal(v, (4, 3)));
    }
}
