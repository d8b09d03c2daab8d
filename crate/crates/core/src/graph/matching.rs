use std::collections::VecDeque;

use super::{BipartiteGraph, GeneralGraph, Matching};

const FREE: usize = usize::MAX;

/// Maximum-cardinality matching via Hopcroft-Karp.
///
/// Left vertices are scanned in increasing order and neighbours in sorted
/// order, so the result is a deterministic function of the graph. Edges are
/// returned sorted by left endpoint.
pub fn maximum_matching(g: &BipartiteGraph) -> Matching {
    let n_left = g.n_left();
    let adj: Vec<Vec<usize>> = (1..=n_left)
        .map(|u| g.neighbors(u).map(|v| v - 1).collect())
        .collect();
    let mut match_left = vec![FREE; n_left];
    let mut match_right = vec![FREE; g.n_right()];
    let mut dist = vec![0usize; n_left];

    while bfs(&adj, &match_left, &match_right, &mut dist) {
        let mut cursor = vec![0usize; n_left];
        for u in 0..n_left {
            if match_left[u] == FREE {
                augment(
                    u,
                    &adj,
                    &mut match_left,
                    &mut match_right,
                    &mut dist,
                    &mut cursor,
                );
            }
        }
    }

    Matching::new(
        match_left
            .iter()
            .enumerate()
            .filter(|(_, &v)| v != FREE)
            .map(|(u, &v)| (u + 1, v + 1))
            .collect(),
    )
}

/// Builds the layered graph; true iff some free right vertex is reachable.
fn bfs(
    adj: &[Vec<usize>],
    match_left: &[usize],
    match_right: &[usize],
    dist: &mut [usize],
) -> bool {
    let mut queue = VecDeque::new();
    for (u, d) in dist.iter_mut().enumerate() {
        if match_left[u] == FREE {
            *d = 0;
            queue.push_back(u);
        } else {
            *d = FREE;
        }
    }
    let mut found = false;
    while let Some(u) = queue.pop_front() {
        for &v in &adj[u] {
            let w = match_right[v];
            if w == FREE {
                found = true;
            } else if dist[w] == FREE {
                dist[w] = dist[u] + 1;
                queue.push_back(w);
            }
        }
    }
    found
}

fn augment(
    u: usize,
    adj: &[Vec<usize>],
    match_left: &mut [usize],
    match_right: &mut [usize],
    dist: &mut [usize],
    cursor: &mut [usize],
) -> bool {
    while cursor[u] < adj[u].len() {
        let v = adj[u][cursor[u]];
        cursor[u] += 1;
        let w = match_right[v];
        let ok = w == FREE
            || (dist[w] == dist[u] + 1 && augment(w, adj, match_left, match_right, dist, cursor));
        if ok {
            match_left[u] = v;
            match_right[v] = u;
            return true;
        }
    }
    dist[u] = FREE;
    false
}

/// Greedy maximal matching scanning edges in sorted order; loops are skipped.
pub fn greedy_maximal_matching(g: &GeneralGraph) -> Matching {
    let mut used = vec![false; g.vertex_count() + 1];
    let mut out = Vec::new();
    for (u, v) in g.edges() {
        if u != v && !used[u] && !used[v] {
            used[u] = true;
            used[v] = true;
            out.push((u, v));
        }
    }
    Matching::new(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{graph_of, BitMatrix};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Largest matching by trying every edge subset, pruning non-matchings.
    fn brute_force_matching(edges: &[(usize, usize)]) -> usize {
        fn go(edges: &[(usize, usize)], used_l: u64, used_r: u64) -> usize {
            match edges.split_first() {
                None => 0,
                Some((&(u, v), rest)) => {
                    let skip = go(rest, used_l, used_r);
                    if used_l >> u & 1 == 0 && used_r >> v & 1 == 0 {
                        skip.max(1 + go(rest, used_l | 1 << u, used_r | 1 << v))
                    } else {
                        skip
                    }
                }
            }
        }
        go(edges, 0, 0)
    }

    #[test]
    fn identity_and_empty() {
        assert_eq!(
            maximum_matching(&graph_of(&BitMatrix::identity(8))).len(),
            8
        );
        assert_eq!(maximum_matching(&graph_of(&BitMatrix::zeros(8))).len(), 0);
        assert_eq!(maximum_matching(&BipartiteGraph::new(0, 0)).len(), 0);
    }

    #[test]
    fn agrees_with_exhaustive_search() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..50 {
            let density = rng.gen_range(0.1..0.6);
            let mut b = BitMatrix::zeros(8);
            for i in 1..=8 {
                for j in 1..=8 {
                    b.set(i, j, rng.gen_bool(density));
                }
            }
            let g = graph_of(&b);
            let m = maximum_matching(&g);
            assert!(g.is_valid_matching(&m));
            let edges: Vec<_> = g.edges().collect();
            assert_eq!(m.len(), brute_force_matching(&edges));
        }
    }

    #[test]
    fn needs_augmenting_paths() {
        // Greedy on sorted edges takes (1,1) and strands vertex 2.
        let g = BipartiteGraph::from_edges(2, 2, [(1, 1), (1, 2), (2, 1)]).unwrap();
        assert_eq!(maximum_matching(&g).len(), 2);
    }

    #[test]
    fn greedy_is_maximal() {
        let g = GeneralGraph::from_edges(5, [(1, 2), (2, 3), (3, 4), (4, 5), (5, 5)]).unwrap();
        let m = greedy_maximal_matching(&g);
        assert!(g.is_valid_matching(&m));
        assert_eq!(m.edges(), &[(1, 2), (3, 4)]);
    }
}
