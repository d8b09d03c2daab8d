#![allow(dead_code)]

use std::collections::BTreeSet;

use bindlab::algorithms::{
    FullCover, GroupContractionParams, GroupContractionVc, StoreAll, StoreAllCover,
    SubsampleMatching, SubsampleParams,
};
use bindlab::stream::{
    run, run_split, EdgeUpdate, GraphStream, Snapshot, StreamingAlgorithm, Topology,
};
use rand::seq::IteratorRandom;
use rand::Rng;

/// Random valid insert/delete stream of `len` updates: inserts pick an
/// absent pair, deletes a present one. Capped at the contract length
/// `2 * max_edges`.
pub fn random_stream<R: Rng>(
    topology: Topology,
    len: usize,
    insert_bias: f64,
    rng: &mut R,
) -> GraphStream {
    let n = topology.n();
    let pairs: Vec<(usize, usize)> = match topology {
        Topology::Bipartite { .. } => (1..=n).flat_map(|u| (1..=n).map(move |v| (u, v))).collect(),
        Topology::General { .. } => (1..=n)
            .flat_map(|u| (u + 1..=n).map(move |v| (u, v)))
            .collect(),
    };
    let mut present = BTreeSet::new();
    let len = len.min(2 * topology.max_edges());
    let mut updates = Vec::with_capacity(len);
    for _ in 0..len {
        let insert =
            present.is_empty() || (present.len() < pairs.len() && rng.gen_bool(insert_bias));
        if insert {
            let &(u, v) = pairs
                .iter()
                .filter(|p| !present.contains(*p))
                .choose(rng)
                .unwrap();
            present.insert((u, v));
            // general updates may name endpoints in either order
            let (u, v) = if matches!(topology, Topology::General { .. }) && rng.gen_bool(0.5) {
                (v, u)
            } else {
                (u, v)
            };
            updates.push(EdgeUpdate::insert(u, v));
        } else {
            let &(u, v) = present.iter().choose(rng).unwrap();
            present.remove(&(u, v));
            updates.push(EdgeUpdate::delete(u, v));
        }
    }
    GraphStream::new(topology, updates)
}

/// Minimum vertex cover size by branching on an uncovered edge; loops
/// force their vertex.
pub fn brute_min_cover(edges: &[(usize, usize)]) -> usize {
    fn go(edges: &[(usize, usize)], taken: &mut Vec<usize>, best: &mut usize) {
        if taken.len() >= *best {
            return;
        }
        match edges
            .iter()
            .find(|(u, v)| !taken.contains(u) && !taken.contains(v))
        {
            None => *best = taken.len(),
            Some(&(u, v)) => {
                for w in if u == v { vec![u] } else { vec![u, v] } {
                    taken.push(w);
                    go(edges, taken, best);
                    taken.pop();
                }
            }
        }
    }
    let mut best = usize::MAX;
    go(edges, &mut Vec::new(), &mut best);
    best
}

/// Maximum matching size by trying every edge subset in order.
pub fn brute_matching(edges: &[(usize, usize)]) -> usize {
    fn go(edges: &[(usize, usize)], used: &mut Vec<usize>) -> usize {
        let Some((&(u, v), rest)) = edges.split_first() else {
            return 0;
        };
        let skip = go(rest, used);
        if used.contains(&u) || used.contains(&v) {
            return skip;
        }
        used.extend([u, v]);
        let take = 1 + go(rest, used);
        used.truncate(used.len() - 2);
        skip.max(take)
    }
    go(edges, &mut Vec::new())
}

/// Final snapshot after Alice runs `updates[..at]`, hands over her snapshot
/// and Bob runs the rest.
pub fn split_snapshot<A: StreamingAlgorithm>(
    params: &A::Params,
    seed: u64,
    s: &GraphStream,
    at: usize,
) -> Snapshot {
    let mut alice = A::init(s.topology, params, seed).unwrap();
    alice.process_all(&s.updates[..at]).unwrap();
    let mut bob = A::restore(&alice.snapshot()).unwrap();
    bob.process_all(&s.updates[at..]).unwrap();
    bob.snapshot()
}

pub fn check_every_split<A: StreamingAlgorithm>(params: &A::Params, seed: u64, s: &GraphStream) {
    let whole = split_snapshot::<A>(params, seed, s, s.len());
    let out = run::<A>(params, seed, s).unwrap();
    for at in 0..=s.len() {
        assert_eq!(
            split_snapshot::<A>(params, seed, s, at),
            whole,
            "{} split at {at}",
            A::ID
        );
        let prefix = GraphStream::new(s.topology, s.updates[..at].to_vec());
        let suffix = GraphStream::new(s.topology, s.updates[at..].to_vec());
        assert_eq!(
            run_split::<A>(params, seed, &prefix, &suffix).unwrap().1,
            out,
            "{} split at {at}",
            A::ID
        );
    }
}

pub fn check_idempotent<A: StreamingAlgorithm>(params: &A::Params, seed: u64, s: &GraphStream) {
    let mut alg = A::init(s.topology, params, seed).unwrap();
    for u in &s.updates {
        let snap = alg.snapshot();
        let again = A::restore(&snap).unwrap();
        assert_eq!(again.snapshot(), snap, "{}", A::ID);
        assert_eq!(again.extract(), alg.extract(), "{}", A::ID);
        alg.process(u).unwrap();
    }
}

pub fn all_algorithms(s: &GraphStream, seed: u64) {
    let gc = GroupContractionParams {
        epsilon: 0.5,
        ..Default::default()
    };
    let sub = SubsampleParams { p: 0.5 };
    if matches!(s.topology, Topology::Bipartite { .. }) {
        check_every_split::<StoreAll>(&(), seed, s);
        check_every_split::<StoreAllCover>(&(), seed, s);
        check_every_split::<SubsampleMatching>(&sub, seed, s);
        check_idempotent::<StoreAll>(&(), seed, s);
        check_idempotent::<StoreAllCover>(&(), seed, s);
        check_idempotent::<SubsampleMatching>(&sub, seed, s);
    }
    check_every_split::<GroupContractionVc>(&gc, seed, s);
    check_every_split::<FullCover>(&(), seed, s);
    check_idempotent::<GroupContractionVc>(&gc, seed, s);
    check_idempotent::<FullCover>(&(), seed, s);
}
