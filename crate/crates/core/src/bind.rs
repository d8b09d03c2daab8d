//! Augmented Index and Augmented Bi-Index, the packing of one into the
//! other, and a generic evaluator for one-way protocols.
//!
//! In Augmented Bi-Index (BInd) Alice holds an `n x n` bit matrix `A`; Bob
//! holds `x, y` in `[n-k]` and every entry of the `k x k` block at `(x, y)`
//! except the corner, and must output `A[x][y]`. Augmented Index (Ind) is
//! the one-dimensional version: Bob holds `l` and `V[l+1..]` and must
//! output `V[l]`.
//!
//! An Ind instance of length `(n-k)^2` is packed row-major into the
//! top-left `(n-k) x (n-k)` block of an otherwise zero matrix, with `l`
//! mapped to `(x, y)` where `l = y + (n-k)(x-1)`. Every window entry inside
//! the block then lies strictly after `l`, so Bob's view is computable from
//! the Ind suffix alone.

use std::fmt;

use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::graph::GraphError;
use crate::matrix::{BitMatrix, IndexWindow, MatrixError};
use crate::rng::{derive_rng, derive_seed, Role};
use crate::stream::{Snapshot, StreamError};

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("Bob's view does not match the configuration: {0}")]
    ViewMismatch(String),
    #[error("suffix too short for position {position} (index {index})")]
    SuffixInsufficient { position: usize, index: usize },
    #[error(transparent)]
    Matrix(#[from] MatrixError),
    #[error(transparent)]
    Stream(#[from] StreamError),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Augmented Index: `V` and the 1-based index `l`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndInstance {
    v: Vec<bool>,
    l: usize,
}

impl IndInstance {
    pub fn new(v: Vec<bool>, l: usize) -> Result<Self, ProtocolError> {
        if !(1..=v.len()).contains(&l) {
            return Err(ProtocolError::Config(format!(
                "index {l} outside 1..={}",
                v.len()
            )));
        }
        Ok(Self { v, l })
    }

    pub fn random<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Result<Self, ProtocolError> {
        if m == 0 {
            return Err(ProtocolError::Config("empty index vector".into()));
        }
        let v = (0..m).map(|_| rng.gen()).collect();
        Self::new(v, rng.gen_range(1..=m))
    }

    pub fn m(&self) -> usize {
        self.v.len()
    }

    pub fn index(&self) -> usize {
        self.l
    }

    pub fn bits(&self) -> &[bool] {
        &self.v
    }

    pub fn answer(&self) -> bool {
        self.v[self.l - 1]
    }

    /// `V[l+1..=m]`, everything Bob is given.
    pub fn suffix(&self) -> &[bool] {
        &self.v[self.l..]
    }
}

impl fmt::Display for IndInstance {
    /// `m l` on the first line, then `V` as a 0/1 string.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} {}", self.m(), self.l)?;
        let bits: String = self.v.iter().map(|&b| if b { '1' } else { '0' }).collect();
        writeln!(f, "{bits}")
    }
}

/// Bob's side of a BInd instance: the window and its `k^2 - 1` bits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BobView {
    window: IndexWindow,
    // Row-major over the full k x k block; the corner slot stays false.
    bits: Vec<bool>,
}

impl BobView {
    pub fn from_matrix(a: &BitMatrix, window: IndexWindow) -> Result<Self, ProtocolError> {
        if a.n() != window.n() {
            return Err(ProtocolError::ViewMismatch(format!(
                "matrix is {0}x{0}, window expects n = {1}",
                a.n(),
                window.n()
            )));
        }
        let mut view = Self::blank(window);
        for (i, j) in window.indices() {
            view.put(i, j, a.get(i, j));
        }
        Ok(view)
    }

    fn blank(window: IndexWindow) -> Self {
        Self {
            window,
            bits: vec![false; window.k() * window.k()],
        }
    }

    fn slot(&self, i: usize, j: usize) -> usize {
        (i - self.window.x()) * self.window.k() + (j - self.window.y())
    }

    fn put(&mut self, i: usize, j: usize, b: bool) {
        let s = self.slot(i, j);
        self.bits[s] = b;
    }

    pub fn window(&self) -> &IndexWindow {
        &self.window
    }

    /// `A[i][j]` for `(i, j)` in the window, `None` elsewhere and at the corner.
    pub fn get(&self, i: usize, j: usize) -> Option<bool> {
        self.window
            .contains(i, j)
            .then(|| self.bits[self.slot(i, j)])
    }

    /// `(i, j, bit)` over the window in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, bool)> + '_ {
        self.window
            .indices()
            .map(|(i, j)| (i, j, self.bits[self.slot(i, j)]))
    }
}

/// Augmented Bi-Index: Alice's matrix together with Bob's view of it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BIndInstance {
    matrix: BitMatrix,
    view: BobView,
}

impl BIndInstance {
    pub fn new(matrix: BitMatrix, k: usize, x: usize, y: usize) -> Result<Self, ProtocolError> {
        let window = IndexWindow::new(matrix.n(), k, x, y)?;
        let view = BobView::from_matrix(&matrix, window)?;
        Ok(Self { matrix, view })
    }

    pub fn random<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Result<Self, ProtocolError> {
        check_sizes(n, k)?;
        let matrix = BitMatrix::random(n, rng);
        let x = rng.gen_range(1..=n - k);
        let y = rng.gen_range(1..=n - k);
        Self::new(matrix, k, x, y)
    }

    pub fn matrix(&self) -> &BitMatrix {
        &self.matrix
    }

    pub fn view(&self) -> &BobView {
        &self.view
    }

    pub fn n(&self) -> usize {
        self.matrix.n()
    }

    pub fn k(&self) -> usize {
        self.view.window.k()
    }

    pub fn x(&self) -> usize {
        self.view.window.x()
    }

    pub fn y(&self) -> usize {
        self.view.window.y()
    }

    pub fn answer(&self) -> bool {
        self.matrix.get(self.x(), self.y())
    }
}

fn check_sizes(n: usize, k: usize) -> Result<(), ProtocolError> {
    if k == 0 || k >= n {
        return Err(ProtocolError::Config(format!(
            "need 1 <= k < n, got n = {n}, k = {k}"
        )));
    }
    Ok(())
}

/// `(x, y)` with `l = y + side (x - 1)`.
pub fn position_of(l: usize, side: usize) -> (usize, usize) {
    ((l - 1) / side + 1, (l - 1) % side + 1)
}

/// Packs an Ind instance of length `(n-k)^2` into a BInd instance.
pub fn pack_ind_to_bind(
    inst: &IndInstance,
    n: usize,
    k: usize,
) -> Result<BIndInstance, ProtocolError> {
    check_sizes(n, k)?;
    let side = n - k;
    if inst.m() != side * side {
        return Err(ProtocolError::Config(format!(
            "vector length {} does not fill a {side}x{side} block",
            inst.m()
        )));
    }
    let mut a = BitMatrix::zeros(n);
    for (p, &b) in inst.bits().iter().enumerate() {
        let (i, j) = position_of(p + 1, side);
        a.set(i, j, b);
    }
    let (x, y) = position_of(inst.index(), side);
    BIndInstance::new(a, k, x, y)
}

/// Bob's view built from the Ind suffix alone, without seeing `A`.
///
/// Window entries outside the packed block are zero; entries inside it are
/// read from `suffix`, which holds positions `l+1..=(n-k)^2`.
pub fn view_from_suffix(
    n: usize,
    k: usize,
    l: usize,
    suffix: &[bool],
) -> Result<BobView, ProtocolError> {
    check_sizes(n, k)?;
    let side = n - k;
    if !(1..=side * side).contains(&l) || suffix.len() != side * side - l {
        return Err(ProtocolError::Config(format!(
            "index {l} with suffix of length {} does not fit a {side}x{side} block",
            suffix.len()
        )));
    }
    let (x, y) = position_of(l, side);
    let window = IndexWindow::new(n, k, x, y)?;
    let mut view = BobView::blank(window);
    for (i, j) in window.indices() {
        if i <= side && j <= side {
            let p = j + side * (i - 1);
            if p <= l {
                return Err(ProtocolError::SuffixInsufficient {
                    position: p,
                    index: l,
                });
            }
            view.put(i, j, suffix[p - l - 1]);
        }
    }
    Ok(view)
}

/// How the bits of `V` are laid out in the block. Bob always locates the
/// target with the row-major formula `l = y + (n-k)(x-1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Layout {
    RowMajor,
    ColumnMajor,
}

impl Layout {
    fn position(self, i: usize, j: usize, side: usize) -> usize {
        match self {
            Layout::RowMajor => j + side * (i - 1),
            Layout::ColumnMajor => i + side * (j - 1),
        }
    }
}

/// True iff every window entry inside the block sits at a position after
/// `l` under `layout`.
pub fn suffix_sufficient_under(layout: Layout, n: usize, k: usize, l: usize) -> bool {
    let side = n - k;
    let (x, y) = position_of(l, side);
    let Ok(window) = IndexWindow::new(n, k, x, y) else {
        return false;
    };
    let sufficient = window
        .indices()
        .filter(|&(i, j)| i <= side && j <= side)
        .all(|(i, j)| layout.position(i, j, side) > l);
    sufficient
}

/// Suffix sufficiency of the row-major packing for this instance.
pub fn verify_suffix_sufficiency(inst: &IndInstance, n: usize, k: usize) -> bool {
    k >= 1
        && k < n
        && inst.m() == (n - k) * (n - k)
        && suffix_sufficient_under(Layout::RowMajor, n, k, inst.index())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BobAnswer {
    Bit(bool),
    Fail,
}

impl BobAnswer {
    pub fn is_correct(self, truth: bool) -> bool {
        self == BobAnswer::Bit(truth)
    }
}

impl fmt::Display for BobAnswer {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BobAnswer::Bit(b) => write!(f, "{}", *b as u8),
            BobAnswer::Fail => f.write_str("fail"),
        }
    }
}

/// Alice's single message: one snapshot per parallel run.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Message {
    pub parts: Vec<Snapshot>,
}

impl Message {
    pub fn new(parts: Vec<Snapshot>) -> Self {
        Self { parts }
    }

    pub fn bit_length(&self) -> u64 {
        self.parts.iter().map(Snapshot::bit_length).sum()
    }

    pub fn max_part_bits(&self) -> u64 {
        self.parts
            .iter()
            .map(Snapshot::bit_length)
            .max()
            .unwrap_or(0)
    }
}

/// A one-way protocol for BInd with public randomness `seed`.
///
/// `n` and `k` are public; Alice sees only the matrix, Bob only his view
/// and the message.
pub trait OneWayProtocol: Sync {
    fn id(&self) -> String;

    /// Free-form parameter string for reports.
    fn params(&self) -> String {
        String::new()
    }

    fn alice(&self, matrix: &BitMatrix, k: usize, seed: u64) -> Result<Message, ProtocolError>;

    fn bob(&self, view: &BobView, message: &Message, seed: u64)
        -> Result<BobAnswer, ProtocolError>;
}

/// Alice sends `A` bit for bit.
#[derive(Clone, Copy, Debug, Default)]
pub struct VerbatimProtocol;

impl OneWayProtocol for VerbatimProtocol {
    fn id(&self) -> String {
        "verbatim".into()
    }

    fn alice(&self, matrix: &BitMatrix, _k: usize, _seed: u64) -> Result<Message, ProtocolError> {
        Ok(Message::new(vec![Snapshot::new(
            "verbatim",
            matrix.to_packed_bytes(),
        )]))
    }

    fn bob(
        &self,
        view: &BobView,
        message: &Message,
        _seed: u64,
    ) -> Result<BobAnswer, ProtocolError> {
        let w = view.window();
        let part = message
            .parts
            .first()
            .ok_or_else(|| ProtocolError::Config("empty message".into()))?;
        let a = BitMatrix::from_packed_bytes(w.n(), part.payload())?;
        Ok(BobAnswer::Bit(a.get(w.x(), w.y())))
    }
}

/// Alice sends nothing; Bob always answers the same bit.
#[derive(Clone, Copy, Debug)]
pub struct ConstantProtocol(pub bool);

impl OneWayProtocol for ConstantProtocol {
    fn id(&self) -> String {
        "constant".into()
    }

    fn params(&self) -> String {
        format!("bit={}", self.0 as u8)
    }

    fn alice(&self, _: &BitMatrix, _k: usize, _seed: u64) -> Result<Message, ProtocolError> {
        Ok(Message::default())
    }

    fn bob(&self, _: &BobView, _: &Message, _seed: u64) -> Result<BobAnswer, ProtocolError> {
        Ok(BobAnswer::Bit(self.0))
    }
}

/// Distribution of evaluation instances.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum InstanceSource {
    /// `A` uniform, `(x, y)` uniform in `[n-k]^2`.
    UniformMatrix,
    /// `V` uniform of length `(n-k)^2`, `l` uniform, packed row-major.
    #[default]
    PackedIndex,
}

impl InstanceSource {
    pub fn sample<R: Rng + ?Sized>(
        self,
        n: usize,
        k: usize,
        rng: &mut R,
    ) -> Result<BIndInstance, ProtocolError> {
        match self {
            InstanceSource::UniformMatrix => BIndInstance::random(n, k, rng),
            InstanceSource::PackedIndex => {
                check_sizes(n, k)?;
                let ind = IndInstance::random((n - k) * (n - k), rng)?;
                pack_ind_to_bind(&ind, n, k)
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TrialOutcome {
    pub trial: u64,
    pub answer: BobAnswer,
    pub truth: bool,
    pub bits: u64,
}

impl TrialOutcome {
    pub fn correct(&self) -> bool {
        self.answer.is_correct(self.truth)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProtocolStats {
    pub trials: u64,
    pub successes: u64,
    pub fails: u64,
    pub mean_bits: f64,
    pub max_bits: u64,
    /// Sorted by trial index.
    pub outcomes: Vec<TrialOutcome>,
}

impl ProtocolStats {
    pub fn success_rate(&self) -> f64 {
        self.successes as f64 / self.trials as f64
    }

    /// Wrong bits, as opposed to explicit failures.
    pub fn wrong_bits(&self) -> u64 {
        self.trials - self.successes - self.fails
    }
}

/// Header matching [`ProtocolStats::csv_record`].
pub const PROTOCOL_CSV_HEADER: [&str; 9] = [
    "protocol_id",
    "n",
    "k",
    "params",
    "trials",
    "successes",
    "mean_bits",
    "max_bits",
    "seed",
];

impl ProtocolStats {
    pub fn csv_record(
        &self,
        protocol: &dyn OneWayProtocol,
        n: usize,
        k: usize,
        seed: u64,
    ) -> Vec<String> {
        vec![
            protocol.id(),
            n.to_string(),
            k.to_string(),
            protocol.params(),
            self.trials.to_string(),
            self.successes.to_string(),
            format!("{:.3}", self.mean_bits),
            self.max_bits.to_string(),
            seed.to_string(),
        ]
    }
}

/// Runs `protocol` on `trials` fresh instances in parallel.
///
/// Trial `t` samples its instance from `(seed, t)` and gives the protocol
/// public randomness derived from `(seed, t)`, so results do not depend on
/// scheduling. A `Fail` answer counts as incorrect.
pub fn evaluate_protocol<P: OneWayProtocol + ?Sized>(
    protocol: &P,
    source: InstanceSource,
    n: usize,
    k: usize,
    trials: u64,
    seed: u64,
) -> Result<ProtocolStats, ProtocolError> {
    if trials == 0 {
        return Err(ProtocolError::Config("at least one trial required".into()));
    }
    check_sizes(n, k)?;
    let outcomes = (0..trials)
        .into_par_iter()
        .map(|t| {
            let inst = source.sample(n, k, &mut derive_rng(seed, t, Role::Instance))?;
            let shared = derive_seed(seed, t, Role::Trial);
            let message = protocol.alice(inst.matrix(), k, shared)?;
            let answer = protocol.bob(inst.view(), &message, shared)?;
            Ok(TrialOutcome {
                trial: t,
                answer,
                truth: inst.answer(),
                bits: message.bit_length(),
            })
        })
        .collect::<Result<Vec<_>, ProtocolError>>()?;

    let successes = outcomes.iter().filter(|o| o.correct()).count() as u64;
    let fails = outcomes
        .iter()
        .filter(|o| o.answer == BobAnswer::Fail)
        .count() as u64;
    let total_bits: u64 = outcomes.iter().map(|o| o.bits).sum();
    Ok(ProtocolStats {
        trials,
        successes,
        fails,
        mean_bits: total_bits as f64 / trials as f64,
        max_bits: outcomes.iter().map(|o| o.bits).max().unwrap_or(0),
        outcomes,
    })
}
