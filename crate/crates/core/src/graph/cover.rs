use std::collections::VecDeque;

use super::matching::{greedy_maximal_matching, maximum_matching};
use super::{BipartiteGraph, GeneralGraph, GraphError, VertexCover};

pub const DEFAULT_EXACT_CAP: usize = 64;

/// Minimum vertex cover of a bipartite graph via König's theorem.
///
/// Ids follow the flattened convention: left `u`, right `n_left + v`.
pub fn minimum_vertex_cover_bipartite(g: &BipartiteGraph) -> VertexCover {
    let (nl, nr) = (g.n_left(), g.n_right());
    let mut match_left = vec![0usize; nl + 1];
    let mut match_right = vec![0usize; nr + 1];
    for &(u, v) in maximum_matching(g).iter() {
        match_left[u] = v;
        match_right[v] = u;
    }

    // Alternating reachability from free left vertices.
    let mut seen_left = vec![false; nl + 1];
    let mut seen_right = vec![false; nr + 1];
    let mut queue: VecDeque<usize> = (1..=nl).filter(|&u| match_left[u] == 0).collect();
    for &u in &queue {
        seen_left[u] = true;
    }
    while let Some(u) = queue.pop_front() {
        for v in g.neighbors(u) {
            if v == match_left[u] || seen_right[v] {
                continue;
            }
            seen_right[v] = true;
            let w = match_right[v];
            if w != 0 && !seen_left[w] {
                seen_left[w] = true;
                queue.push_back(w);
            }
        }
    }

    VertexCover::new(
        (1..=nl)
            .filter(|&u| !seen_left[u])
            .chain((1..=nr).filter(|&v| seen_right[v]).map(|v| nl + v)),
    )
}

/// Endpoints of a greedy maximal matching plus every looped vertex.
pub fn greedy_two_approx_cover(g: &GeneralGraph) -> VertexCover {
    let m = greedy_maximal_matching(g);
    VertexCover::new(m.iter().flat_map(|&(u, v)| [u, v]).chain(g.loops()))
}

pub fn minimum_vertex_cover_exact(g: &GeneralGraph) -> Result<VertexCover, GraphError> {
    ExactCoverSolver::default().solve(g)
}

/// Exact minimum vertex cover for small general graphs.
///
/// Looped vertices are forced in up front and the rest of the graph is
/// split into connected components. Bipartite components are solved by
/// König's theorem; the others by branch and bound. Each search node applies the degree-0
/// and degree-1 rules, prunes with a greedy-matching lower bound, then
/// branches on the highest-degree vertex (lowest id on ties): first taking
/// the vertex, then taking its whole neighbourhood. For a degree-1 vertex
/// whose neighbour also has degree 1 the lower id is taken. The first
/// optimum found in this order is returned, which makes the tie-break
/// deterministic.
#[derive(Clone, Copy, Debug)]
pub struct ExactCoverSolver {
    cap: usize,
}

impl Default for ExactCoverSolver {
    fn default() -> Self {
        Self {
            cap: DEFAULT_EXACT_CAP,
        }
    }
}

impl ExactCoverSolver {
    pub fn new(cap: usize) -> Self {
        Self { cap }
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    pub fn solve(&self, g: &GeneralGraph) -> Result<VertexCover, GraphError> {
        let n = g.vertex_count();
        if n > self.cap {
            return Err(GraphError::CapacityExceeded { n, cap: self.cap });
        }
        let mut adj = vec![VSet::empty(n); n];
        for (u, v) in g.edges() {
            if u != v {
                adj[u - 1].insert(v - 1);
                adj[v - 1].insert(u - 1);
            }
        }
        let mut looped = vec![false; n];
        let mut chosen: Vec<usize> = Vec::new();
        for u in g.loops() {
            looped[u - 1] = true;
            chosen.push(u - 1);
        }
        let mut search = Search {
            adj,
            best: Vec::new(),
            best_len: usize::MAX,
        };
        for component in components(&search.adj, &looped) {
            if component.len() < 2 {
                continue;
            }
            match two_colouring(&search.adj, &looped, &component) {
                Some(colour) => chosen.extend(koenig_on(&search.adj, &looped, &component, &colour)),
                None => {
                    let mut active = VSet::empty(n);
                    for &v in &component {
                        active.insert(v);
                    }
                    search.best.clear();
                    search.best_len = usize::MAX;
                    search.branch(active, &mut Vec::new());
                    chosen.append(&mut search.best);
                }
            }
        }
        Ok(VertexCover::new(chosen.into_iter().map(|v| v + 1)))
    }
}

/// Connected components of the graph restricted to non-looped vertices.
fn components(adj: &[VSet], looped: &[bool]) -> Vec<Vec<usize>> {
    let n = adj.len();
    let mut seen = looped.to_vec();
    let mut out = Vec::new();
    for s in 0..n {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut comp = vec![s];
        let mut i = 0;
        while i < comp.len() {
            for w in adj[comp[i]].iter() {
                if !seen[w] {
                    seen[w] = true;
                    comp.push(w);
                }
            }
            i += 1;
        }
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

/// Side of each vertex (indexed like `component`) if the component is
/// bipartite; the lowest vertex gets side `false`.
fn two_colouring(adj: &[VSet], looped: &[bool], component: &[usize]) -> Option<Vec<bool>> {
    let mut side = vec![None; adj.len()];
    side[component[0]] = Some(false);
    let mut queue = VecDeque::from([component[0]]);
    while let Some(v) = queue.pop_front() {
        let s = side[v].expect("coloured on enqueue");
        for w in adj[v].iter().filter(|&w| !looped[w]) {
            match side[w] {
                None => {
                    side[w] = Some(!s);
                    queue.push_back(w);
                }
                Some(t) if t == s => return None,
                Some(_) => {}
            }
        }
    }
    Some(
        component
            .iter()
            .map(|&v| side[v].expect("connected"))
            .collect(),
    )
}

fn koenig_on(adj: &[VSet], looped: &[bool], component: &[usize], colour: &[bool]) -> Vec<usize> {
    let left: Vec<usize> = component
        .iter()
        .zip(colour)
        .filter(|(_, &c)| !c)
        .map(|(&v, _)| v)
        .collect();
    let right: Vec<usize> = component
        .iter()
        .zip(colour)
        .filter(|(_, &c)| c)
        .map(|(&v, _)| v)
        .collect();
    let mut local = vec![0usize; adj.len()];
    for (i, &v) in left.iter().enumerate() {
        local[v] = i + 1;
    }
    for (i, &v) in right.iter().enumerate() {
        local[v] = i + 1;
    }
    let mut g = BipartiteGraph::new(left.len(), right.len());
    for &u in &left {
        for w in adj[u].iter().filter(|&w| !looped[w]) {
            g.add_edge(local[u], local[w]).expect("local ids in range");
        }
    }
    minimum_vertex_cover_bipartite(&g)
        .iter()
        .map(|id| {
            if id <= left.len() {
                left[id - 1]
            } else {
                right[id - left.len() - 1]
            }
        })
        .collect()
}

struct Search {
    adj: Vec<VSet>,
    best: Vec<usize>,
    best_len: usize,
}

impl Search {
    fn degree(&self, v: usize, active: &VSet) -> usize {
        self.adj[v].intersection_len(active)
    }

    fn branch(&mut self, mut active: VSet, chosen: &mut Vec<usize>) {
        let mark = chosen.len();
        loop {
            let mut changed = false;
            for v in active.to_vec() {
                if !active.contains(v) {
                    continue;
                }
                match self.degree(v, &active) {
                    0 => {
                        active.remove(v);
                        changed = true;
                    }
                    1 => {
                        let u = self.adj[v].first_common(&active).expect("degree 1");
                        let pick = if self.degree(u, &active) == 1 {
                            v.min(u)
                        } else {
                            u
                        };
                        chosen.push(pick);
                        active.remove(pick);
                        changed = true;
                    }
                    _ => {}
                }
            }
            if !changed {
                break;
            }
        }

        if chosen.len() >= self.best_len {
            chosen.truncate(mark);
            return;
        }
        // Degree-0 vertices were dropped, so an empty set means no edges left.
        if active.is_empty() {
            self.best = chosen.clone();
            self.best_len = chosen.len();
            chosen.truncate(mark);
            return;
        }
        if chosen.len() + self.matching_bound(&active) >= self.best_len {
            chosen.truncate(mark);
            return;
        }

        let mut pivot = usize::MAX;
        let mut pivot_degree = 0;
        for v in active.iter() {
            let d = self.degree(v, &active);
            if d > pivot_degree {
                pivot = v;
                pivot_degree = d;
            }
        }

        let mut take_pivot = active.clone();
        take_pivot.remove(pivot);
        chosen.push(pivot);
        self.branch(take_pivot, chosen);
        chosen.pop();

        let nb = self.adj[pivot].intersection(&active);
        if chosen.len() + nb.len() < self.best_len {
            let mut rest = active;
            rest.remove(pivot);
            rest.subtract(&nb);
            chosen.extend(nb.iter());
            self.branch(rest, chosen);
        }
        chosen.truncate(mark);
    }

    fn matching_bound(&self, active: &VSet) -> usize {
        let mut free = active.clone();
        let mut size = 0;
        for v in active.iter() {
            if !free.contains(v) {
                continue;
            }
            if let Some(u) = self.adj[v].first_common(&free) {
                free.remove(u);
                free.remove(v);
                size += 1;
            }
        }
        size
    }
}

#[derive(Clone, Debug)]
struct VSet {
    words: Vec<u64>,
}

impl VSet {
    fn empty(n: usize) -> Self {
        Self {
            words: vec![0; n.div_ceil(64)],
        }
    }

    fn insert(&mut self, v: usize) {
        self.words[v / 64] |= 1 << (v % 64);
    }

    fn remove(&mut self, v: usize) {
        self.words[v / 64] &= !(1 << (v % 64));
    }

    fn contains(&self, v: usize) -> bool {
        self.words[v / 64] >> (v % 64) & 1 == 1
    }

    fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    fn intersection_len(&self, other: &VSet) -> usize {
        self.words
            .iter()
            .zip(&other.words)
            .map(|(a, b)| (a & b).count_ones() as usize)
            .sum()
    }

    fn intersection(&self, other: &VSet) -> VSet {
        VSet {
            words: self
                .words
                .iter()
                .zip(&other.words)
                .map(|(a, b)| a & b)
                .collect(),
        }
    }

    fn subtract(&mut self, other: &VSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a &= !b;
        }
    }

    fn first_common(&self, other: &VSet) -> Option<usize> {
        self.words
            .iter()
            .zip(&other.words)
            .enumerate()
            .find_map(|(i, (a, b))| {
                let w = a & b;
                (w != 0).then(|| i * 64 + w.trailing_zeros() as usize)
            })
    }

    fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &word)| {
            let mut w = word;
            std::iter::from_fn(move || {
                (w != 0).then(|| {
                    let t = w.trailing_zeros() as usize;
                    w &= w - 1;
                    i * 64 + t
                })
            })
        })
    }

    fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{graph_of, BitMatrix};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Smallest covering vertex subset, by enumerating all masks.
    fn brute_force_cover(n: usize, edges: &[(usize, usize)]) -> usize {
        (0u32..1 << n)
            .filter(|mask| {
                edges
                    .iter()
                    .all(|&(u, v)| mask >> (u - 1) & 1 == 1 || mask >> (v - 1) & 1 == 1)
            })
            .map(|mask| mask.count_ones() as usize)
            .min()
            .unwrap()
    }

    fn random_general(rng: &mut ChaCha8Rng, n: usize) -> GeneralGraph {
        let p = rng.gen_range(0.1..0.7);
        let mut g = GeneralGraph::new(n);
        for u in 1..=n {
            for v in u..=n {
                let q = if u == v { 0.05 } else { p };
                if rng.gen_bool(q) {
                    g.add_edge(u, v).unwrap();
                }
            }
        }
        g
    }

    fn petersen() -> GeneralGraph {
        let mut edges = Vec::new();
        for i in 0..5 {
            edges.push((i + 1, (i + 1) % 5 + 1));
            edges.push((i + 6, (i + 2) % 5 + 6));
            edges.push((i + 1, i + 6));
        }
        GeneralGraph::from_edges(10, edges).unwrap()
    }

    #[test]
    fn small_named_graphs() {
        let tri = GeneralGraph::from_edges(3, [(1, 2), (2, 3), (1, 3)]).unwrap();
        assert_eq!(minimum_vertex_cover_exact(&tri).unwrap().len(), 2);

        let star = GeneralGraph::from_edges(6, (2..=6).map(|l| (1, l))).unwrap();
        assert_eq!(
            minimum_vertex_cover_exact(&star).unwrap(),
            VertexCover::new([1])
        );

        let p = petersen();
        let edges = p.edges();
        let oracle = brute_force_cover(10, &edges);
        assert_eq!(oracle, 6);
        let c = minimum_vertex_cover_exact(&p).unwrap();
        assert!(p.is_valid_cover(&c));
        assert_eq!(c.len(), oracle);
    }

    #[test]
    fn loops_are_forced_and_ties_prefer_low_ids() {
        let g = GeneralGraph::from_edges(4, [(3, 3), (1, 2)]).unwrap();
        assert_eq!(
            minimum_vertex_cover_exact(&g).unwrap(),
            VertexCover::new([1, 3])
        );
        let lone = GeneralGraph::from_edges(4, [(2, 4)]).unwrap();
        assert_eq!(
            minimum_vertex_cover_exact(&lone).unwrap(),
            VertexCover::new([2])
        );
    }

    #[test]
    fn capacity_is_enforced() {
        let g = GeneralGraph::new(65);
        assert_eq!(
            minimum_vertex_cover_exact(&g),
            Err(GraphError::CapacityExceeded { n: 65, cap: 64 })
        );
        assert!(ExactCoverSolver::new(128).solve(&g).unwrap().is_empty());
    }

    #[test]
    fn exact_matches_exhaustive_search_up_to_ten_vertices() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in 1..=10 {
            for _ in 0..40 {
                let g = random_general(&mut rng, n);
                let c = minimum_vertex_cover_exact(&g).unwrap();
                assert!(g.is_valid_cover(&c));
                assert!(g.loops().all(|u| c.contains(u)));
                assert_eq!(c.len(), brute_force_cover(n, &g.edges()), "{g}");
                assert!(c.len() >= greedy_maximal_matching(&g).len());
                let approx = greedy_two_approx_cover(&g);
                assert!(g.is_valid_cover(&approx));
                assert!(approx.len() <= 2 * c.len() + g.loops().count());
            }
        }
    }

    #[test]
    fn koenig_single_edge_and_perfect_matching() {
        let g = BipartiteGraph::from_edges(1, 1, [(1, 1)]).unwrap();
        assert_eq!(minimum_vertex_cover_bipartite(&g).len(), 1);
        let pm = graph_of(&BitMatrix::identity(6));
        assert_eq!(minimum_vertex_cover_bipartite(&pm).len(), 6);
    }

    #[test]
    fn bipartite_cover_matches_exhaustive_search() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let mut b = BitMatrix::zeros(7);
            let p = rng.gen_range(0.1..0.5);
            for i in 1..=7 {
                for j in 1..=7 {
                    b.set(i, j, rng.gen_bool(p));
                }
            }
            let g = graph_of(&b);
            let c = minimum_vertex_cover_bipartite(&g);
            assert!(g.is_valid_cover(&c));
            let flat: Vec<_> = g.edges().map(|(u, v)| (u, 7 + v)).collect();
            assert_eq!(c.len(), brute_force_cover(14, &flat));
            assert_eq!(c.len(), maximum_matching(&g).len());
        }
    }

    #[test]
    fn exact_solver_handles_hub_heavy_graphs_past_default_cap() {
        // Contracted reduction graphs: a handful of hubs touching everything.
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let n = 110;
        let mut g = GeneralGraph::new(n);
        for hub in [3, 40, 77, 101] {
            for v in 1..=n {
                if v != hub && rng.gen_bool(0.9) {
                    g.add_edge(hub, v).unwrap();
                }
            }
        }
        g.add_edge(12, 13).unwrap();
        let c = ExactCoverSolver::new(128).solve(&g).unwrap();
        assert!(g.is_valid_cover(&c));
        assert_eq!(c.len(), 5);
    }
}
