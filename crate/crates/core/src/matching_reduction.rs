//! BInd protocol from any streaming matching algorithm.
//!
//! Per run Alice streams `G(A')` and sends the snapshot. Bob deletes every
//! edge he knows from his window except those on the window diagonal
//! `(x+q, y+q)`, `1 <= q < k`. What remains is the diagonal edges plus the
//! `2(n-k)` rows and columns outside the window, so a large matching must
//! use many diagonal edges, and the target position `(x, y)` looks like
//! just another diagonal entry after the permutation. Bob keeps a uniform
//! `tau`-subset `M` of the returned matching; if the permuted target is in
//! `M`, the edge is present in `A'`, so `A[x][y] = not X[x][y]` is claimed.
//! Over many runs Bob answers by majority of claims, ties going to 1.

use rand::seq::index::sample;
use rayon::prelude::*;

use crate::bind::{BobAnswer, BobView, Message, OneWayProtocol, ProtocolError};
use crate::graph::Matching;
use crate::matrix::{BitMatrix, IndexWindow};
use crate::reduction::{
    alice_encode, bob_replay, check_view, known_edges, on_window_diagonal, KnownEdge, RunRandomness,
};
use crate::rng::{derive_rng, Role};
use crate::stream::{Snapshot, StreamingAlgorithm};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MatchRunConfig {
    pub n: usize,
    pub k: usize,
    /// Approximation factor `C >= 1` assumed of the algorithm.
    pub c: f64,
    pub runs: usize,
    pub tau: usize,
}

/// `floor(0.99 k / (2C))`.
pub fn trim_target(k: usize, c: f64) -> usize {
    (0.99 * k as f64 / (2.0 * c)).floor() as usize
}

impl MatchRunConfig {
    /// Validates and derives `tau`.
    pub fn new(n: usize, k: usize, c: f64, runs: usize) -> Result<Self, ProtocolError> {
        let bad = |m: String| Err(ProtocolError::Config(m));
        if k == 0 || k >= n {
            return bad(format!("need 1 <= k and n - k >= 1, got n = {n}, k = {k}"));
        }
        if !c.is_finite() || c < 1.0 {
            return bad(format!("approximation factor must be >= 1, got {c}"));
        }
        if runs == 0 {
            return bad("at least one run required".into());
        }
        let tau = trim_target(k, c);
        if tau == 0 {
            return bad(format!(
                "trim target 0.99 k / 2C rounds to 0 for k = {k}, C = {c}"
            ));
        }
        Ok(Self { n, k, c, runs, tau })
    }

    /// `ceil(100 C)` runs.
    pub fn with_default_runs(n: usize, k: usize, c: f64) -> Result<Self, ProtocolError> {
        Self::new(n, k, c, (100.0 * c).ceil() as usize)
    }

    /// `C = n^eps`, `k = n - ceil(n^(1-eps) / 40)`, `ceil(100 C)` runs.
    pub fn for_epsilon(n: usize, epsilon: f64) -> Result<Self, ProtocolError> {
        let nf = n as f64;
        let k = n.saturating_sub((nf.powf(1.0 - epsilon) / 40.0).ceil() as usize);
        Self::with_default_runs(n, k, nf.powf(epsilon))
    }
}

/// Everything Bob computes in one run.
#[derive(Clone, Debug, PartialEq)]
pub struct MatchRunArtifacts {
    pub run: u64,
    /// `E_S` in the permuted labelling.
    pub known: Vec<(usize, usize)>,
    /// `E_diag`, the part of `E_S` Bob keeps.
    pub diagonal: Vec<(usize, usize)>,
    /// `E_del = E_S \ E_diag`.
    pub deleted: Vec<(usize, usize)>,
    /// The algorithm's matching after the deletions.
    pub returned: Matching,
    /// `M`: empty or exactly `tau` edges of `returned`.
    pub trimmed: Matching,
    /// `(s1(x), s2(y))`.
    pub target: (usize, usize),
    pub mask_bit: bool,
    /// `Q`: the target edge is in `M`.
    pub hit: bool,
}

impl MatchRunArtifacts {
    /// The bit claimed for `A[x][y]` when `Q = 1`.
    pub fn claim(&self) -> Option<bool> {
        self.hit.then_some(!self.mask_bit)
    }
}

/// Empty if `|m| < tau`, else a uniform `tau`-subset drawn with `rng`.
pub fn trim<R: rand::Rng + ?Sized>(m: &Matching, tau: usize, rng: &mut R) -> Matching {
    if m.len() < tau {
        return Matching::new(Vec::new());
    }
    let mut picked: Vec<usize> = sample(rng, m.len(), tau).into_vec();
    picked.sort_unstable();
    Matching::new(picked.into_iter().map(|i| m.edges()[i]).collect())
}

/// Bob's side of run `run`.
pub fn bob_run<A>(
    view: &BobView,
    cfg: &MatchRunConfig,
    run: u64,
    snapshot: &Snapshot,
    seed: u64,
) -> Result<MatchRunArtifacts, ProtocolError>
where
    A: StreamingAlgorithm<Output = Matching>,
{
    check_view(view, cfg.n, cfg.k)?;
    let rr = RunRandomness::derive(seed, run, cfg.n);
    let known_all = known_edges(view, &rr);
    let (diag, del): (Vec<&KnownEdge>, Vec<&KnownEdge>) = known_all
        .iter()
        .partition(|e| on_window_diagonal(view, e.original));
    let deleted: Vec<_> = del.iter().map(|e| e.edge).collect();

    let alg: A = bob_replay(snapshot, deleted.clone(), seed, run)?;
    let returned = alg.extract();
    let trimmed = trim(&returned, cfg.tau, &mut derive_rng(seed, run, Role::Trim));

    let w = view.window();
    let target = rr.place((w.x(), w.y()));
    Ok(MatchRunArtifacts {
        run,
        known: known_all.iter().map(|e| e.edge).collect(),
        diagonal: diag.iter().map(|e| e.edge).collect(),
        deleted,
        returned,
        hit: trimmed.contains(target),
        trimmed,
        target,
        mask_bit: rr.mask.get(w.x(), w.y()),
    })
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct ClaimTally {
    pub p0: u64,
    pub p1: u64,
}

impl ClaimTally {
    pub fn add(&mut self, claim: Option<bool>) {
        match claim {
            Some(true) => self.p1 += 1,
            Some(false) => self.p0 += 1,
            None => {}
        }
    }

    pub fn total(&self) -> u64 {
        self.p0 + self.p1
    }
}

/// 1 iff `p1 >= p0`.
pub fn decide(tally: &ClaimTally) -> bool {
    tally.p1 >= tally.p0
}

/// Result of a full multi-run execution.
#[derive(Clone, Debug, PartialEq)]
pub struct MatchSolve {
    pub answer: bool,
    pub tally: ClaimTally,
    pub total_bits: u64,
    pub max_snapshot_bits: u64,
    pub runs: Vec<MatchRunArtifacts>,
}

/// Runs `cfg.runs` independent runs (indices `1..=runs`) and decides.
pub fn solve_bind<A>(
    matrix: &BitMatrix,
    view: &BobView,
    cfg: &MatchRunConfig,
    params: &A::Params,
    seed: u64,
) -> Result<MatchSolve, ProtocolError>
where
    A: StreamingAlgorithm<Output = Matching>,
    A::Params: Sync,
{
    let message = alice_message::<A>(matrix, cfg, params, seed)?;
    let runs = bob_runs::<A>(view, cfg, &message, seed)?;
    let mut tally = ClaimTally::default();
    for r in &runs {
        tally.add(r.claim());
    }
    Ok(MatchSolve {
        answer: decide(&tally),
        tally,
        total_bits: message.bit_length(),
        max_snapshot_bits: message.max_part_bits(),
        runs,
    })
}

fn alice_message<A>(
    matrix: &BitMatrix,
    cfg: &MatchRunConfig,
    params: &A::Params,
    seed: u64,
) -> Result<Message, ProtocolError>
where
    A: StreamingAlgorithm,
    A::Params: Sync,
{
    if matrix.n() != cfg.n {
        return Err(ProtocolError::Config(format!(
            "matrix is {0}x{0}, expected n = {1}",
            matrix.n(),
            cfg.n
        )));
    }
    let parts = (1..=cfg.runs as u64)
        .into_par_iter()
        .map(|run| alice_encode::<A>(matrix, params, seed, run))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Message::new(parts))
}

fn bob_runs<A>(
    view: &BobView,
    cfg: &MatchRunConfig,
    message: &Message,
    seed: u64,
) -> Result<Vec<MatchRunArtifacts>, ProtocolError>
where
    A: StreamingAlgorithm<Output = Matching>,
{
    if message.parts.len() != cfg.runs {
        return Err(ProtocolError::Config(format!(
            "message has {} parts for {} runs",
            message.parts.len(),
            cfg.runs
        )));
    }
    message
        .parts
        .par_iter()
        .enumerate()
        .map(|(i, snap)| bob_run::<A>(view, cfg, i as u64 + 1, snap, seed))
        .collect()
}

/// The reduction packaged as a [`OneWayProtocol`].
#[derive(Clone, Debug)]
pub struct MatchingProtocol<A: StreamingAlgorithm> {
    pub cfg: MatchRunConfig,
    pub params: A::Params,
}

impl<A: StreamingAlgorithm> MatchingProtocol<A> {
    pub fn new(cfg: MatchRunConfig, params: A::Params) -> Self {
        Self { cfg, params }
    }
}

impl<A> OneWayProtocol for MatchingProtocol<A>
where
    A: StreamingAlgorithm<Output = Matching>,
    A::Params: Sync + std::fmt::Debug,
{
    fn id(&self) -> String {
        format!("matching/{}", A::ID)
    }

    fn params(&self) -> String {
        let base = format!(
            "C={};runs={};tau={}",
            self.cfg.c, self.cfg.runs, self.cfg.tau
        );
        match A::describe(&self.params) {
            d if d.is_empty() => base,
            d => format!("{base};{d}"),
        }
    }

    fn alice(&self, matrix: &BitMatrix, k: usize, seed: u64) -> Result<Message, ProtocolError> {
        if k != self.cfg.k {
            return Err(ProtocolError::Config(format!(
                "k = {k}, configured {}",
                self.cfg.k
            )));
        }
        alice_message::<A>(matrix, &self.cfg, &self.params, seed)
    }

    fn bob(
        &self,
        view: &BobView,
        message: &Message,
        seed: u64,
    ) -> Result<BobAnswer, ProtocolError> {
        let mut tally = ClaimTally::default();
        for r in bob_runs::<A>(view, &self.cfg, message, seed)? {
            tally.add(r.claim());
        }
        Ok(BobAnswer::Bit(decide(&tally)))
    }
}

/// Window positions where `A xor X` is one, minus the window diagonal.
/// The unpermuted counterpart of `E_del`.
pub fn unpermuted_deletions(
    a: &BitMatrix,
    mask: &BitMatrix,
    window: &IndexWindow,
) -> Vec<(usize, usize)> {
    let (x, y) = (window.x(), window.y());
    window
        .indices()
        .filter(|&(i, j)| a.get(i, j) ^ mask.get(i, j))
        .filter(|&(i, j)| !(i > x && i - x == j.wrapping_sub(y)))
        .collect()
}

/// `(0.99/2C - 2(n-k)/k, 0.99/2C)`: bounds on the per-run claim probability.
pub fn claim_prob_bounds(c: f64, n: usize, k: usize) -> (f64, f64) {
    let hi = 0.99 / (2.0 * c);
    (hi - 2.0 * (n - k) as f64 / k as f64, hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algorithms::{StoreAll, SubsampleMatching, SubsampleParams};
    use crate::bind::{evaluate_protocol, BIndInstance, InstanceSource};
    use crate::graph::maximum_matching;
    use crate::matrix::graph_of;
    use crate::reduction::alice_encode;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn config_validation() {
        let cfg = MatchRunConfig::new(256, 240, 1.0, 100).unwrap();
        assert_eq!(cfg.tau, 118);
        assert!(MatchRunConfig::new(16, 16, 1.0, 1).is_err());
        assert!(MatchRunConfig::new(16, 4, 0.5, 1).is_err());
        assert!(MatchRunConfig::new(16, 4, 1.0, 0).is_err());
        assert!(MatchRunConfig::new(16, 2, 1.0, 1).is_err());
        let t = MatchRunConfig::for_epsilon(256, 0.25).unwrap();
        assert_eq!((t.k, t.runs, t.tau), (254, 400, 31));
    }

    #[test]
    fn bounds() {
        let (lo, hi) = claim_prob_bounds(1.0, 256, 240);
        assert!((lo - 0.361_666).abs() < 1e-4 && (hi - 0.495).abs() < 1e-12);
        let (lo, hi) = claim_prob_bounds(3.0, 100, 100);
        assert_eq!(lo, hi);
        for n in [256usize, 1024, 4096] {
            for eps in [0.1, 0.25, 0.4] {
                let cfg = MatchRunConfig::for_epsilon(n, eps).unwrap();
                let (lo, _) = claim_prob_bounds(cfg.c, n, cfg.k);
                assert!(lo >= 2.0 / (5.0 * cfg.c) - 1e-12, "n={n} eps={eps}");
            }
        }
    }

    #[test]
    fn trimming() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let m = Matching::new((1..=10).map(|i| (i, i)).collect());
        assert!(trim(&m, 11, &mut rng).is_empty());
        assert_eq!(trim(&m, 10, &mut rng), m);
        let mut counts = [0u32; 10];
        for _ in 0..10_000 {
            let t = trim(&m, 5, &mut rng);
            assert_eq!(t.len(), 5);
            for &(i, _) in t.iter() {
                counts[i - 1] += 1;
            }
        }
        assert!(
            counts.iter().all(|&c| (c as f64 / 1e4 - 0.5).abs() < 0.02),
            "{counts:?}"
        );
    }

    #[test]
    fn decisions() {
        assert!(decide(&ClaimTally { p0: 2, p1: 3 }));
        assert!(decide(&ClaimTally { p0: 0, p1: 0 }));
        assert!(!decide(&ClaimTally { p0: 5, p1: 1 }));
        let mut t = ClaimTally::default();
        t.add(Some(true));
        t.add(None);
        t.add(Some(false));
        assert_eq!((t.p0, t.p1, t.total()), (1, 1, 2));
    }

    #[test]
    fn claims_negate_the_mask() {
        let mut a = MatchRunArtifacts {
            run: 1,
            known: vec![],
            diagonal: vec![],
            deleted: vec![],
            returned: Matching::new(vec![]),
            trimmed: Matching::new(vec![]),
            target: (1, 1),
            mask_bit: true,
            hit: true,
        };
        assert_eq!(a.claim(), Some(false));
        a.hit = false;
        assert_eq!(a.claim(), None);
    }

    #[test]
    fn exact_algorithm_runs_are_consistent() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let cfg = MatchRunConfig::new(48, 40, 1.0, 1).unwrap();
        for trial in 0..20u64 {
            let inst = BIndInstance::random(48, 40, &mut rng).unwrap();
            let snap = alice_encode::<StoreAll>(inst.matrix(), &(), trial, 1).unwrap();
            let r = bob_run::<StoreAll>(inst.view(), &cfg, 1, &snap, trial).unwrap();
            assert_eq!(r.known.len(), r.diagonal.len() + r.deleted.len());
            assert!(r.diagonal.len() < cfg.k);
            assert!(r.trimmed.is_empty() || r.trimmed.len() == cfg.tau);
            assert!(r.trimmed.iter().all(|&e| r.returned.contains(e)));
            // Survivors: G(A') minus the deletions, matched exactly.
            let rr = RunRandomness::derive(trial, 1, 48);
            let mut enc = rr.encode(inst.matrix()).unwrap();
            for &(u, v) in &r.deleted {
                enc.set(u, v, false);
            }
            assert_eq!(r.returned.len(), maximum_matching(&graph_of(&enc)).len());
            if let Some(bit) = r.claim() {
                assert_eq!(bit, inst.answer());
            }
            let w = inst.view().window();
            let f = unpermuted_deletions(inst.matrix(), &rr.mask, w);
            assert_eq!(f.len(), r.deleted.len());
        }
    }

    #[test]
    fn unpermuted_deletion_examples() {
        let w = IndexWindow::new(6, 3, 2, 2).unwrap();
        let z = BitMatrix::zeros(6);
        assert!(unpermuted_deletions(&z, &z, &w).is_empty());
        assert_eq!(
            unpermuted_deletions(&BitMatrix::all_ones(6), &z, &w).len(),
            6
        );
    }

    #[test]
    fn rejects_mismatched_views() {
        let inst = BIndInstance::random(20, 5, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
        let cfg = MatchRunConfig::new(20, 6, 1.0, 1).unwrap();
        let snap = alice_encode::<StoreAll>(inst.matrix(), &(), 0, 1).unwrap();
        assert!(bob_run::<StoreAll>(inst.view(), &cfg, 1, &snap, 0).is_err());
    }

    #[test]
    fn solving_is_deterministic() {
        let inst = BIndInstance::random(32, 26, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let cfg = MatchRunConfig::new(32, 26, 1.0, 10).unwrap();
        let a = solve_bind::<StoreAll>(inst.matrix(), inst.view(), &cfg, &(), 5).unwrap();
        let b = solve_bind::<StoreAll>(inst.matrix(), inst.view(), &cfg, &(), 5).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.runs.len(), 10);
        assert!(a.total_bits <= 10 * a.max_snapshot_bits);
        if a.tally.total() > 0 {
            assert_eq!(a.answer, inst.answer());
        }
    }

    #[test]
    fn empty_sample_always_answers_one() {
        let p = MatchingProtocol::<SubsampleMatching>::new(
            MatchRunConfig::new(24, 20, 1.0, 3).unwrap(),
            SubsampleParams { p: 0.0 },
        );
        let stats = evaluate_protocol(&p, InstanceSource::UniformMatrix, 24, 20, 400, 1).unwrap();
        assert!(stats
            .outcomes
            .iter()
            .all(|o| o.answer == BobAnswer::Bit(true)));
        assert!(
            (stats.success_rate() - 0.5).abs() < 0.08,
            "{}",
            stats.success_rate()
        );
    }
}
