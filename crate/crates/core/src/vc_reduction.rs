//! BInd protocol from any streaming vertex cover algorithm.
//!
//! Alice's side is the same as in the matching reduction. Bob deletes every
//! edge he knows from his window, leaving a graph whose edges all touch the
//! `2(n-k)` rows and columns outside the window or the target position, so
//! it has a cover of at most `2(n-k) + 1` vertices. A small cover rarely
//! touches the permuted target `(s1(x), s2(y))`; when it misses both
//! endpoints, a valid cover proves the target edge absent, i.e.
//! `A[x][y] = X[x][y]`. Bob answers from the first run whose cover misses
//! the target, and fails if every run's cover touches it.

use rayon::prelude::*;

use crate::bind::{BobAnswer, BobView, Message, OneWayProtocol, ProtocolError};
use crate::graph::VertexCover;
use crate::matrix::BitMatrix;
use crate::reduction::{alice_encode, bob_replay, check_view, known_edges, RunRandomness};
use crate::stream::{Snapshot, StreamingAlgorithm};

pub const DEFAULT_VC_RUNS: usize = 40;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct VcRunConfig {
    pub n: usize,
    pub k: usize,
    /// Approximation factor `C >= 1` assumed of the algorithm.
    pub c: f64,
    pub runs: usize,
}

impl VcRunConfig {
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
        Ok(Self { n, k, c, runs })
    }

    /// `C = n^eps` and `k = n - ceil(n^(1-eps) / 40)`.
    pub fn for_epsilon(n: usize, epsilon: f64, runs: usize) -> Result<Self, ProtocolError> {
        let nf = n as f64;
        let k = n.saturating_sub((nf.powf(1.0 - epsilon) / 40.0).ceil() as usize);
        Self::new(n, k, nf.powf(epsilon), runs)
    }
}

/// Everything Bob computes in one run.
#[derive(Clone, Debug, PartialEq)]
pub struct VcRunArtifacts {
    pub run: u64,
    /// `E_S` in the permuted labelling; all of it is deleted.
    pub known: Vec<(usize, usize)>,
    /// Cover ids: left `u`, right `n + v`.
    pub cover: VertexCover,
    /// `(s1(x), s2(y))`.
    pub target: (usize, usize),
    pub mask_bit: bool,
    /// `Q`: the cover contains an endpoint of the target.
    pub touched: bool,
}

/// Bob's side of run `run`.
pub fn bob_run_vc<A>(
    view: &BobView,
    cfg: &VcRunConfig,
    run: u64,
    snapshot: &Snapshot,
    seed: u64,
) -> Result<VcRunArtifacts, ProtocolError>
where
    A: StreamingAlgorithm<Output = VertexCover>,
{
    check_view(view, cfg.n, cfg.k)?;
    let rr = RunRandomness::derive(seed, run, cfg.n);
    let known: Vec<_> = known_edges(view, &rr).into_iter().map(|e| e.edge).collect();
    let alg: A = bob_replay(snapshot, known.clone(), seed, run)?;
    let cover = alg.extract();
    let w = view.window();
    let target = rr.place((w.x(), w.y()));
    Ok(VcRunArtifacts {
        run,
        known,
        touched: cover.contains(target.0) || cover.contains(cfg.n + target.1),
        cover,
        target,
        mask_bit: rr.mask.get(w.x(), w.y()),
    })
}

/// `X[x][y]` of the lowest-indexed run with `Q = 0`, or `Fail`.
pub fn decide_vc<'a, I>(runs: I) -> BobAnswer
where
    I: IntoIterator<Item = &'a VcRunArtifacts>,
{
    runs.into_iter()
        .filter(|r| !r.touched)
        .min_by_key(|r| r.run)
        .map_or(BobAnswer::Fail, |r| BobAnswer::Bit(r.mask_bit))
}

/// `2(n-k) + 1`: cover size of `G(A') - E_S` never exceeds this.
pub fn cover_bound(n: usize, k: usize) -> usize {
    2 * (n - k) + 1
}

/// `3C (2(n-k) + 1) / k`: bound on `Pr[Q = 1]` when the target is absent.
pub fn cover_prob_bound(c: f64, n: usize, k: usize) -> f64 {
    3.0 * c * cover_bound(n, k) as f64 / k as f64
}

#[derive(Clone, Debug, PartialEq)]
pub struct VcSolve {
    pub answer: BobAnswer,
    pub total_bits: u64,
    pub max_snapshot_bits: u64,
    pub runs: Vec<VcRunArtifacts>,
}

pub fn solve_bind_vc<A>(
    matrix: &BitMatrix,
    view: &BobView,
    cfg: &VcRunConfig,
    params: &A::Params,
    seed: u64,
) -> Result<VcSolve, ProtocolError>
where
    A: StreamingAlgorithm<Output = VertexCover>,
    A::Params: Sync,
{
    let message = alice_message::<A>(matrix, cfg, params, seed)?;
    let runs = bob_runs::<A>(view, cfg, &message, seed)?;
    Ok(VcSolve {
        answer: decide_vc(&runs),
        total_bits: message.bit_length(),
        max_snapshot_bits: message.max_part_bits(),
        runs,
    })
}

fn alice_message<A>(
    matrix: &BitMatrix,
    cfg: &VcRunConfig,
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
    cfg: &VcRunConfig,
    message: &Message,
    seed: u64,
) -> Result<Vec<VcRunArtifacts>, ProtocolError>
where
    A: StreamingAlgorithm<Output = VertexCover>,
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
        .map(|(i, snap)| bob_run_vc::<A>(view, cfg, i as u64 + 1, snap, seed))
        .collect()
}

/// The reduction packaged as a [`OneWayProtocol`].
#[derive(Clone, Debug)]
pub struct VcProtocol<A: StreamingAlgorithm> {
    pub cfg: VcRunConfig,
    pub params: A::Params,
}

impl<A: StreamingAlgorithm> VcProtocol<A> {
    pub fn new(cfg: VcRunConfig, params: A::Params) -> Self {
        Self { cfg, params }
    }
}

impl<A> OneWayProtocol for VcProtocol<A>
where
    A: StreamingAlgorithm<Output = VertexCover>,
    A::Params: Sync + std::fmt::Debug,
{
    fn id(&self) -> String {
        format!("vc/{}", A::ID)
    }

    fn params(&self) -> String {
        let base = format!("C={};runs={}", self.cfg.c, self.cfg.runs);
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
        Ok(decide_vc(&bob_runs::<A>(view, &self.cfg, message, seed)?))
    }
}
