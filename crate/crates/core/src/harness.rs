//! Verification campaigns, protocol trials, space curves and fixtures.
//!
//! Every entry point validates its parameters before doing any work, derives all
//! randomness from the seed and per-trial indices, and returns rows
//! in a canonical order, so reruns are byte-identical regardless of thread
//! count.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::algorithms::{
    FullCover, GroupContractionParams, GroupContractionVc, GroupPartition, StoreAll, StoreAllCover,
    SubsampleMatching, SubsampleParams,
};
use crate::bind::{
    evaluate_protocol, pack_ind_to_bind, BIndInstance, IndInstance, InstanceSource, OneWayProtocol,
    ProtocolError, ProtocolStats,
};
use crate::graph::maximum_matching;
use crate::matching_reduction::{
    bob_run, claim_prob_bounds, unpermuted_deletions, MatchRunConfig, MatchingProtocol,
};
use crate::matrix::{graph_of, BitMatrix, MatrixError};
use crate::reduction::{alice_encode, RunRandomness};
use crate::rng::{derive_rng, derive_seed, Role};
use crate::stream::{EdgeUpdate, GraphStream, StreamError, StreamingAlgorithm, Topology};
use crate::vc_reduction::{
    bob_run_vc, cover_bound, cover_prob_bound, VcProtocol, VcRunConfig, DEFAULT_VC_RUNS,
};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Stream(#[from] StreamError),
    #[error(transparent)]
    Matrix(#[from] MatrixError),
}

impl HarnessError {
    /// Process exit code: configuration problems map to 2.
    pub fn exit_code(&self) -> i32 {
        2
    }
}

fn config<T>(msg: impl Into<String>) -> Result<T, HarnessError> {
    Err(HarnessError::Config(msg.into()))
}

/// One checked quantity.
#[derive(Clone, Debug, PartialEq)]
pub struct ReportRow {
    pub experiment: String,
    pub params: String,
    pub metric: String,
    pub observed: f64,
    pub bound: f64,
    /// Distance to the bound, positive when the check holds.
    pub margin: f64,
    pub pass: bool,
}

pub const REPORT_CSV_HEADER: [&str; 7] = [
    "experiment",
    "params",
    "metric",
    "observed",
    "bound",
    "margin",
    "pass",
];

impl ReportRow {
    pub fn at_most(
        experiment: &str,
        params: &str,
        metric: &str,
        observed: f64,
        bound: f64,
    ) -> Self {
        Self::new(
            experiment,
            params,
            metric,
            observed,
            bound,
            bound - observed,
        )
    }

    pub fn at_least(
        experiment: &str,
        params: &str,
        metric: &str,
        observed: f64,
        bound: f64,
    ) -> Self {
        Self::new(
            experiment,
            params,
            metric,
            observed,
            bound,
            observed - bound,
        )
    }

    fn new(
        experiment: &str,
        params: &str,
        metric: &str,
        observed: f64,
        bound: f64,
        margin: f64,
    ) -> Self {
        Self {
            experiment: experiment.into(),
            params: params.into(),
            metric: metric.into(),
            observed,
            bound,
            margin,
            pass: margin >= -1e-12,
        }
    }

    pub fn csv_record(&self) -> Vec<String> {
        vec![
            self.experiment.clone(),
            self.params.clone(),
            self.metric.clone(),
            format!("{:.6}", self.observed),
            format!("{:.6}", self.bound),
            format!("{:.6}", self.margin),
            self.pass.to_string(),
        ]
    }
}

impl fmt::Display for ReportRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} [{}] observed={:.4} bound={:.4} margin={:+.4} {}",
            self.experiment,
            self.metric,
            self.params,
            self.observed,
            self.bound,
            self.margin,
            if self.pass { "PASS" } else { "FAIL" }
        )
    }
}

pub fn all_pass(rows: &[ReportRow]) -> bool {
    rows.iter().all(|r| r.pass)
}

/// 0 when every row passes, 1 otherwise.
pub fn exit_code(rows: &[ReportRow]) -> i32 {
    if all_pass(rows) {
        0
    } else {
        1
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Check {
    MatchingSize,
    ClaimRate,
    Iso,
    VcSize,
    CoverRate,
    DiagZeros,
}

impl Check {
    pub const ALL: [Check; 6] = [
        Check::MatchingSize,
        Check::ClaimRate,
        Check::Iso,
        Check::VcSize,
        Check::CoverRate,
        Check::DiagZeros,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Check::MatchingSize => "matching-size",
            Check::ClaimRate => "claim-rate",
            Check::Iso => "iso",
            Check::VcSize => "vc-size",
            Check::CoverRate => "cover-rate",
            Check::DiagZeros => "diag-zeros",
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Check {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, HarnessError> {
        Check::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| HarnessError::Config(format!("unknown check {s:?}")))
    }
}

/// Parameters of a verification campaign. Unused fields are ignored by
/// checks that do not need them.
#[derive(Clone, Debug, PartialEq)]
pub struct VerifySpec {
    pub check: Check,
    pub n: usize,
    pub k: usize,
    /// Approximation factor for `claim-rate`.
    pub c: f64,
    /// Group exponent for `cover-rate`.
    pub epsilon: f64,
    /// Trials, or conditioned runs for `cover-rate`.
    pub trials: usize,
    pub seed: u64,
    /// Absolute slack on rates; relative slack on size windows.
    pub tolerance: f64,
    /// Required in-window fraction for size windows.
    pub quantile: f64,
    pub exact_cap: usize,
}

impl VerifySpec {
    /// Defaults for `check` at the given sizes.
    pub fn new(check: Check, n: usize, k: usize, trials: usize, seed: u64) -> Self {
        Self {
            check,
            n,
            k,
            c: 1.0,
            epsilon: 0.25,
            trials,
            seed,
            tolerance: 0.05,
            quantile: 0.99,
            exact_cap: 128,
        }
    }

    fn params(&self) -> String {
        let base = format!(
            "n={};k={};trials={};seed={}",
            self.n, self.k, self.trials, self.seed
        );
        match self.check {
            Check::ClaimRate => format!("{base};C={};tol={}", self.c, self.tolerance),
            Check::CoverRate => format!("{base};eps={};tol={}", self.epsilon, self.tolerance),
            Check::MatchingSize | Check::DiagZeros => {
                format!("{base};tol={};q={}", self.tolerance, self.quantile)
            }
            Check::Iso | Check::VcSize => base,
        }
    }

    fn validate(&self) -> Result<(), HarnessError> {
        if self.k == 0 || self.k >= self.n {
            return config(format!(
                "n - k >= 1 and k >= 1 required, got n = {}, k = {}",
                self.n, self.k
            ));
        }
        if self.trials == 0 {
            return config("at least one trial required");
        }
        if !(0.0..1.0).contains(&self.tolerance) {
            return config(format!(
                "tolerance must lie in [0, 1), got {}",
                self.tolerance
            ));
        }
        if !(0.0..=1.0).contains(&self.quantile) {
            return config(format!(
                "quantile must lie in [0, 1], got {}",
                self.quantile
            ));
        }
        if self.check == Check::ClaimRate && MatchRunConfig::new(self.n, self.k, self.c, 1).is_err()
        {
            return config(format!(
                "claim-rate needs C >= 1 and 0.99 k / 2C >= 1, got C = {}",
                self.c
            ));
        }
        if self.check == Check::CoverRate {
            let g = GroupPartition::new(2 * self.n, self.epsilon)?.group_count();
            if g > self.exact_cap {
                return config(format!(
                    "{g} groups exceed the exact-solver capacity {}; raise --exact-cap or epsilon",
                    self.exact_cap
                ));
            }
        }
        Ok(())
    }
}

/// Instance and run seed of trial `t`.
fn trial_setup(
    n: usize,
    k: usize,
    seed: u64,
    t: u64,
) -> Result<(BIndInstance, u64), ProtocolError> {
    let inst = BIndInstance::random(n, k, &mut derive_rng(seed, t, Role::Instance))?;
    Ok((inst, derive_seed(seed, t, Role::Trial)))
}

fn par_trials<T, F>(trials: usize, f: F) -> Result<Vec<T>, HarnessError>
where
    T: Send,
    F: Fn(u64) -> Result<T, HarnessError> + Send + Sync,
{
    (0..trials as u64).into_par_iter().map(f).collect()
}

pub fn run_verify(spec: &VerifySpec) -> Result<Vec<ReportRow>, HarnessError> {
    spec.validate()?;
    match spec.check {
        Check::MatchingSize => matching_size(spec),
        Check::ClaimRate => claim_rate(spec),
        Check::Iso => isomorphism(spec),
        Check::VcSize => vc_size(spec),
        Check::CoverRate => cover_rate(spec),
        Check::DiagZeros => diag_zeros(spec),
    }
}

/// `mu(G(A') - E_del)` for every trial, computed by the store-all reduction.
pub fn survivor_matching_sizes(
    n: usize,
    k: usize,
    trials: usize,
    seed: u64,
) -> Result<Vec<usize>, HarnessError> {
    let cfg = MatchRunConfig::new(n, k, 1.0, 1)?;
    par_trials(trials, |t| {
        let (inst, s) = trial_setup(n, k, seed, t)?;
        let snap = alice_encode::<StoreAll>(inst.matrix(), &(), s, 1)?;
        Ok(bob_run::<StoreAll>(inst.view(), &cfg, 1, &snap, s)?
            .returned
            .len())
    })
}

fn matching_size(spec: &VerifySpec) -> Result<Vec<ReportRow>, HarnessError> {
    let (n, k) = (spec.n, spec.k);
    let sizes = survivor_matching_sizes(n, k, spec.trials, spec.seed)?;
    let half = k as f64 / 2.0;
    let lo = (1.0 - spec.tolerance) * half;
    let hi = (1.0 + spec.tolerance) * half + 2.0 * (n - k) as f64;
    let inside = sizes
        .iter()
        .filter(|&&m| (lo..=hi).contains(&(m as f64)))
        .count();
    let below = sizes.iter().filter(|&&m| (m as f64) < lo).count();
    let above = sizes.iter().filter(|&&m| (m as f64) > hi).count();
    let p = spec.params();
    let trials = spec.trials as f64;
    Ok(vec![
        ReportRow::at_least(
            "matching-size",
            &p,
            "in_window_fraction",
            inside as f64 / trials,
            spec.quantile,
        ),
        ReportRow::at_most(
            "matching-size",
            &p,
            "below_window_fraction",
            below as f64 / trials,
            1.0 - spec.quantile,
        ),
        ReportRow::at_most(
            "matching-size",
            &p,
            "above_window_fraction",
            above as f64 / trials,
            1.0 - spec.quantile,
        ),
    ])
}

/// Per-trial `(Q, claim correct)` from single store-all runs.
pub fn claim_outcomes(
    n: usize,
    k: usize,
    c: f64,
    trials: usize,
    seed: u64,
) -> Result<Vec<(bool, bool)>, HarnessError> {
    let cfg = MatchRunConfig::new(n, k, c, 1)?;
    par_trials(trials, |t| {
        let (inst, s) = trial_setup(n, k, seed, t)?;
        let snap = alice_encode::<StoreAll>(inst.matrix(), &(), s, 1)?;
        let r = bob_run::<StoreAll>(inst.view(), &cfg, 1, &snap, s)?;
        Ok((r.hit, r.claim() == Some(inst.answer())))
    })
}

fn claim_rate(spec: &VerifySpec) -> Result<Vec<ReportRow>, HarnessError> {
    let out = claim_outcomes(spec.n, spec.k, spec.c, spec.trials, spec.seed)?;
    let hits = out.iter().filter(|o| o.0).count();
    let correct = out.iter().filter(|o| o.0 && o.1).count();
    let rate = hits as f64 / out.len() as f64;
    let (lo, hi) = claim_prob_bounds(spec.c, spec.n, spec.k);
    let accuracy = if hits == 0 {
        1.0
    } else {
        correct as f64 / hits as f64
    };
    let p = spec.params();
    Ok(vec![
        ReportRow::at_least(
            "claim-rate",
            &p,
            "claim_rate_vs_lower",
            rate,
            lo - spec.tolerance,
        ),
        ReportRow::at_most(
            "claim-rate",
            &p,
            "claim_rate_vs_upper",
            rate,
            hi + spec.tolerance,
        ),
        ReportRow::at_least("claim-rate", &p, "claim_accuracy", accuracy, 1.0),
    ])
}

/// Per trial: `mu` of the survivors as returned by store-all, recomputed
/// directly from `A'` minus `E_del`, and `mu(G - F)` on the unpermuted side.
pub fn isomorphism_triples(
    n: usize,
    k: usize,
    trials: usize,
    seed: u64,
) -> Result<Vec<[usize; 3]>, HarnessError> {
    let cfg = MatchRunConfig::new(n, k, 1.0, 1)?;
    par_trials(trials, |t| {
        let (inst, s) = trial_setup(n, k, seed, t)?;
        let snap = alice_encode::<StoreAll>(inst.matrix(), &(), s, 1)?;
        let r = bob_run::<StoreAll>(inst.view(), &cfg, 1, &snap, s)?;
        let rr = RunRandomness::derive(s, 1, n);
        let mut survivors = rr.encode(inst.matrix())?;
        for &(u, v) in &r.deleted {
            survivors.set(u, v, false);
        }
        let mut unpermuted = inst.matrix().xor(&rr.mask)?;
        for (i, j) in unpermuted_deletions(inst.matrix(), &rr.mask, inst.view().window()) {
            unpermuted.set(i, j, false);
        }
        Ok([
            r.returned.len(),
            maximum_matching(&graph_of(&survivors)).len(),
            maximum_matching(&graph_of(&unpermuted)).len(),
        ])
    })
}

fn isomorphism(spec: &VerifySpec) -> Result<Vec<ReportRow>, HarnessError> {
    let triples = isomorphism_triples(spec.n, spec.k, spec.trials, spec.seed)?;
    let mismatches = triples
        .iter()
        .filter(|t| t[0] != t[1] || t[1] != t[2])
        .count();
    Ok(vec![ReportRow::at_most(
        "iso",
        &spec.params(),
        "mismatches",
        mismatches as f64,
        0.0,
    )])
}

/// Exact minimum cover size of `G(A') - E_S` per trial.
pub fn residual_cover_sizes(
    n: usize,
    k: usize,
    trials: usize,
    seed: u64,
) -> Result<Vec<usize>, HarnessError> {
    let cfg = VcRunConfig::new(n, k, 1.0, 1)?;
    par_trials(trials, |t| {
        let (inst, s) = trial_setup(n, k, seed, t)?;
        let snap = alice_encode::<StoreAllCover>(inst.matrix(), &(), s, 1)?;
        Ok(bob_run_vc::<StoreAllCover>(inst.view(), &cfg, 1, &snap, s)?
            .cover
            .len())
    })
}

fn vc_size(spec: &VerifySpec) -> Result<Vec<ReportRow>, HarnessError> {
    let sizes = residual_cover_sizes(spec.n, spec.k, spec.trials, spec.seed)?;
    let bound = cover_bound(spec.n, spec.k) as f64;
    let violations = sizes.iter().filter(|&&s| s as f64 > bound).count();
    let p = spec.params();
    Ok(vec![
        ReportRow::at_most(
            "vc-size",
            &p,
            "max_cover_size",
            *sizes.iter().max().unwrap_or(&0) as f64,
            bound,
        ),
        ReportRow::at_most("vc-size", &p, "violations", violations as f64, 0.0),
    ])
}

/// One group-contraction reduction run, seen from outside the protocol.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CoverRunSample {
    /// `A'` has the permuted target edge.
    pub target_present: bool,
    /// Bob's `Q`.
    pub touched: bool,
    /// The returned set covers `G(A') - E_S`.
    pub valid: bool,
    pub cover_size: usize,
}

/// Single-run samples of the vertex cover reduction with group contraction,
/// drawn in batches of `batch` until `min_absent` samples have the target
/// absent from `A'`.
pub fn cover_run_samples(
    n: usize,
    k: usize,
    params: GroupContractionParams,
    min_absent: usize,
    seed: u64,
) -> Result<Vec<CoverRunSample>, HarnessError> {
    let c = (n as f64).powf(params.epsilon);
    let cfg = VcRunConfig::new(n, k, c, 1)?;
    let batch = min_absent.max(1);
    let mut samples = Vec::new();
    let mut next = 0u64;
    while samples
        .iter()
        .filter(|s: &&CoverRunSample| !s.target_present)
        .count()
        < min_absent
    {
        let start = next;
        let mut chunk = par_trials(batch, |i| {
            let (inst, s) = trial_setup(n, k, seed, start + i)?;
            let snap = alice_encode::<GroupContractionVc>(inst.matrix(), &params, s, 1)?;
            let r = bob_run_vc::<GroupContractionVc>(inst.view(), &cfg, 1, &snap, s)?;
            let mut survivors = RunRandomness::derive(s, 1, n).encode(inst.matrix())?;
            for &(u, v) in &r.known {
                survivors.set(u, v, false);
            }
            let valid = survivors
                .ones()
                .all(|(u, v)| r.cover.contains(u) || r.cover.contains(n + v));
            Ok(CoverRunSample {
                target_present: survivors.get(r.target.0, r.target.1),
                touched: r.touched,
                valid,
                cover_size: r.cover.len(),
            })
        })?;
        samples.append(&mut chunk);
        next += batch as u64;
    }
    Ok(samples)
}

fn cover_rate(spec: &VerifySpec) -> Result<Vec<ReportRow>, HarnessError> {
    let params = GroupContractionParams {
        epsilon: spec.epsilon,
        exact_cap: spec.exact_cap,
    };
    let samples = cover_run_samples(spec.n, spec.k, params, spec.trials, spec.seed)?;
    let absent: Vec<_> = samples.iter().filter(|s| !s.target_present).collect();
    let touched = absent.iter().filter(|s| s.touched).count();
    let rate = touched as f64 / absent.len() as f64;
    let c = (spec.n as f64).powf(spec.epsilon);
    let bound = cover_prob_bound(c, spec.n, spec.k);
    let invalid = samples.iter().filter(|s| !s.valid).count();
    let p = spec.params();
    Ok(vec![
        ReportRow::at_most(
            "cover-rate",
            &p,
            "touch_rate_given_absent",
            rate,
            bound + spec.tolerance,
        ),
        ReportRow::at_most("cover-rate", &p, "invalid_covers", invalid as f64, 0.0),
    ])
}

/// Zeros of `A xor X` on the `k` diagonal positions `(x+q, y+q)`,
/// `0 <= q < k`, which become the permuted diagonal of `A'`.
pub fn diagonal_zero_counts(
    n: usize,
    k: usize,
    trials: usize,
    seed: u64,
) -> Result<Vec<usize>, HarnessError> {
    par_trials(trials, |t| {
        let (inst, s) = trial_setup(n, k, seed, t)?;
        let masked = inst.matrix().xor(&RunRandomness::derive(s, 1, n).mask)?;
        Ok((0..k)
            .filter(|&q| !masked.get(inst.x() + q, inst.y() + q))
            .count())
    })
}

fn diag_zeros(spec: &VerifySpec) -> Result<Vec<ReportRow>, HarnessError> {
    let counts = diagonal_zero_counts(spec.n, spec.k, spec.trials, spec.seed)?;
    let threshold = (1.0 - spec.tolerance) * spec.k as f64 / 2.0;
    let ok = counts.iter().filter(|&&c| c as f64 >= threshold).count();
    Ok(vec![ReportRow::at_least(
        "diag-zeros",
        &spec.params(),
        "enough_zeros_fraction",
        ok as f64 / counts.len() as f64,
        spec.quantile,
    )])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProtocolKind {
    Matching,
    Vc,
}

impl FromStr for ProtocolKind {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, HarnessError> {
        match s {
            "matching" => Ok(ProtocolKind::Matching),
            "vc" => Ok(ProtocolKind::Vc),
            _ => config(format!("unknown protocol kind {s:?}")),
        }
    }
}

/// Streaming algorithm plugged into a reduction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum AlgChoice {
    StoreAll,
    Subsample { p: f64 },
    StoreAllCover,
    GroupContraction { epsilon: f64, exact_cap: usize },
    FullCover,
}

impl AlgChoice {
    /// Parses an algorithm id; `p`, `epsilon` and `exact_cap` fill in the
    /// parameters of the algorithms that take them.
    pub fn parse(id: &str, p: f64, epsilon: f64, exact_cap: usize) -> Result<Self, HarnessError> {
        Ok(match id {
            "store-all" | "storeall" => AlgChoice::StoreAll,
            "subsample" => AlgChoice::Subsample { p },
            "store-all-cover" => AlgChoice::StoreAllCover,
            "group-contraction" => AlgChoice::GroupContraction { epsilon, exact_cap },
            "full-cover" => AlgChoice::FullCover,
            _ => return config(format!("unknown algorithm {id:?}")),
        })
    }

    fn kind(self) -> ProtocolKind {
        match self {
            AlgChoice::StoreAll | AlgChoice::Subsample { .. } => ProtocolKind::Matching,
            _ => ProtocolKind::Vc,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProtocolSpec {
    pub kind: ProtocolKind,
    pub alg: AlgChoice,
    pub n: usize,
    pub k: usize,
    pub c: f64,
    pub runs: usize,
    pub trials: usize,
    pub seed: u64,
    pub source: InstanceSource,
    /// Success rate the report row requires.
    pub min_success: f64,
}

impl ProtocolSpec {
    /// Matching reduction with `ceil(100 C)` runs.
    pub fn matching(alg: AlgChoice, n: usize, k: usize, c: f64, trials: usize, seed: u64) -> Self {
        Self {
            kind: ProtocolKind::Matching,
            alg,
            n,
            k,
            c,
            runs: (100.0 * c).ceil() as usize,
            trials,
            seed,
            source: InstanceSource::default(),
            min_success: 0.9,
        }
    }

    /// Vertex cover reduction with `C = n^eps`, the given `k` and 40 runs.
    pub fn vc(alg: AlgChoice, n: usize, k: usize, epsilon: f64, trials: usize, seed: u64) -> Self {
        Self {
            kind: ProtocolKind::Vc,
            alg,
            n,
            k,
            c: (n as f64).powf(epsilon),
            runs: DEFAULT_VC_RUNS,
            trials,
            seed,
            source: InstanceSource::default(),
            min_success: 0.9,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProtocolReport {
    pub protocol_id: String,
    pub params: String,
    pub stats: ProtocolStats,
    pub rows: Vec<ReportRow>,
    /// Summary in the protocol CSV schema.
    pub summary: Vec<String>,
}

pub const TRIAL_CSV_HEADER: [&str; 5] = ["trial", "answer", "truth", "correct", "total_bits"];

impl ProtocolReport {
    pub fn trial_records(&self) -> impl Iterator<Item = Vec<String>> + '_ {
        self.stats.outcomes.iter().map(|o| {
            vec![
                o.trial.to_string(),
                o.answer.to_string(),
                (o.truth as u8).to_string(),
                o.correct().to_string(),
                o.bits.to_string(),
            ]
        })
    }
}

pub fn run_protocol(spec: &ProtocolSpec) -> Result<ProtocolReport, HarnessError> {
    if spec.trials == 0 {
        return config("at least one trial required");
    }
    if spec.alg.kind() != spec.kind {
        return config(format!(
            "{:?} does not fit the {:?} reduction",
            spec.alg, spec.kind
        ));
    }
    match spec.alg {
        AlgChoice::StoreAll => {
            let cfg = MatchRunConfig::new(spec.n, spec.k, spec.c, spec.runs)?;
            finish(spec, &MatchingProtocol::<StoreAll>::new(cfg, ()))
        }
        AlgChoice::Subsample { p } => {
            let cfg = MatchRunConfig::new(spec.n, spec.k, spec.c, spec.runs)?;
            finish(
                spec,
                &MatchingProtocol::<SubsampleMatching>::new(cfg, SubsampleParams { p }),
            )
        }
        AlgChoice::StoreAllCover => {
            let cfg = VcRunConfig::new(spec.n, spec.k, spec.c, spec.runs)?;
            finish(spec, &VcProtocol::<StoreAllCover>::new(cfg, ()))
        }
        AlgChoice::GroupContraction { epsilon, exact_cap } => {
            let cfg = VcRunConfig::new(spec.n, spec.k, spec.c, spec.runs)?;
            let g = GroupPartition::new(2 * spec.n, epsilon)?.group_count();
            if g > exact_cap {
                return config(format!(
                    "{g} groups exceed the exact-solver capacity {exact_cap}"
                ));
            }
            finish(
                spec,
                &VcProtocol::<GroupContractionVc>::new(
                    cfg,
                    GroupContractionParams { epsilon, exact_cap },
                ),
            )
        }
        AlgChoice::FullCover => {
            let cfg = VcRunConfig::new(spec.n, spec.k, spec.c, spec.runs)?;
            finish(spec, &VcProtocol::<FullCover>::new(cfg, ()))
        }
    }
}

fn finish<P: OneWayProtocol>(
    spec: &ProtocolSpec,
    protocol: &P,
) -> Result<ProtocolReport, HarnessError> {
    let stats = evaluate_protocol(
        protocol,
        spec.source,
        spec.n,
        spec.k,
        spec.trials as u64,
        spec.seed,
    )?;
    let params = protocol.params();
    let label = format!(
        "n={};k={};trials={};seed={};{params}",
        spec.n, spec.k, spec.trials, spec.seed
    );
    let experiment = protocol.id();
    let mut rows = vec![ReportRow::at_least(
        &experiment,
        &label,
        "success_rate",
        stats.success_rate(),
        spec.min_success,
    )];
    if spec.kind == ProtocolKind::Vc {
        rows.push(ReportRow::at_most(
            &experiment,
            &label,
            "wrong_bits",
            stats.wrong_bits() as f64,
            0.0,
        ));
    }
    let summary = stats.csv_record(protocol, spec.n, spec.k, spec.seed);
    Ok(ProtocolReport {
        protocol_id: experiment,
        params,
        stats,
        rows,
        summary,
    })
}

/// Algorithm measured by a space curve.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SpaceAlg {
    StoreAll,
    GroupContraction { epsilon: f64 },
}

impl SpaceAlg {
    /// Growth exponent of the snapshot size in `n`, up to log factors.
    pub fn expected_slope(self) -> f64 {
        match self {
            SpaceAlg::StoreAll => 2.0,
            SpaceAlg::GroupContraction { epsilon } => 2.0 - 2.0 * epsilon,
        }
    }

    pub fn default_tolerance(self) -> f64 {
        match self {
            SpaceAlg::StoreAll => 0.1,
            SpaceAlg::GroupContraction { .. } => 0.3,
        }
    }

    fn id(self) -> String {
        match self {
            SpaceAlg::StoreAll => StoreAll::ID.to_string(),
            SpaceAlg::GroupContraction { epsilon } => {
                format!("{}(eps={epsilon})", GroupContractionVc::ID)
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SpaceCurveSpec {
    pub alg: SpaceAlg,
    pub ns: Vec<usize>,
    /// Insert probability per potential edge.
    pub density: f64,
    pub seed: u64,
    pub tolerance: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpacePoint {
    pub n: usize,
    pub updates: usize,
    pub surviving_edges: usize,
    pub bits: u64,
}

pub const SPACE_CSV_HEADER: [&str; 5] = ["alg", "n", "updates", "surviving_edges", "bits"];

#[derive(Clone, Debug, PartialEq)]
pub struct SpaceCurve {
    pub points: Vec<SpacePoint>,
    pub slope: f64,
    pub rows: Vec<ReportRow>,
    pub alg_id: String,
}

/// Dense random bipartite stream over `n + n` vertices: each pair is
/// inserted with probability `density` in random order, then a random
/// quarter of the inserted edges is deleted.
pub fn dense_random_stream<R: Rng + ?Sized>(n: usize, density: f64, rng: &mut R) -> GraphStream {
    let mut edges: Vec<(usize, usize)> = (1..=n)
        .flat_map(|u| (1..=n).map(move |v| (u, v)))
        .filter(|_| rng.gen_bool(density))
        .collect();
    edges.shuffle(rng);
    let mut updates: Vec<EdgeUpdate> = edges
        .iter()
        .map(|&(u, v)| EdgeUpdate::insert(u, v))
        .collect();
    let mut doomed = edges;
    doomed.shuffle(rng);
    doomed.truncate(doomed.len() / 4);
    updates.extend(doomed.into_iter().map(|(u, v)| EdgeUpdate::delete(u, v)));
    GraphStream::new(Topology::Bipartite { n }, updates)
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(points: &[(f64, f64)]) -> f64 {
    let logs: Vec<(f64, f64)> = points.iter().map(|&(x, y)| (x.ln(), y.ln())).collect();
    let m = logs.len() as f64;
    let mx = logs.iter().map(|p| p.0).sum::<f64>() / m;
    let my = logs.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = logs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = logs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    sxy / sxx
}

pub fn space_curve(spec: &SpaceCurveSpec) -> Result<SpaceCurve, HarnessError> {
    let mut ns = spec.ns.clone();
    ns.sort_unstable();
    ns.dedup();
    if ns.len() < 2 || ns[0] == 0 {
        return config("need at least two distinct positive sizes");
    }
    if !(0.0..=1.0).contains(&spec.density) {
        return config(format!("density must lie in [0, 1], got {}", spec.density));
    }
    let points = ns
        .par_iter()
        .map(|&n| {
            let stream = dense_random_stream(
                n,
                spec.density,
                &mut derive_rng(spec.seed, n as u64, Role::Stream),
            );
            let surviving = stream.surviving_edges().map_err(StreamError::from)?.len();
            let alg_seed = derive_seed(spec.seed, n as u64, Role::Algorithm);
            let bits = match spec.alg {
                SpaceAlg::StoreAll => final_bits::<StoreAll>(&(), alg_seed, &stream)?,
                SpaceAlg::GroupContraction { epsilon } => {
                    let params = GroupContractionParams {
                        epsilon,
                        ..Default::default()
                    };
                    final_bits::<GroupContractionVc>(&params, alg_seed, &stream)?
                }
            };
            Ok(SpacePoint {
                n,
                updates: stream.len(),
                surviving_edges: surviving,
                bits,
            })
        })
        .collect::<Result<Vec<_>, HarnessError>>()?;
    let slope = log_log_slope(
        &points
            .iter()
            .map(|p| (p.n as f64, p.bits as f64))
            .collect::<Vec<_>>(),
    );
    let expected = spec.alg.expected_slope();
    let label = format!(
        "ns={};density={};seed={};tol={}",
        ns.iter()
            .map(|n| n.to_string())
            .collect::<Vec<_>>()
            .join("/"),
        spec.density,
        spec.seed,
        spec.tolerance
    );
    let alg_id = spec.alg.id();
    let experiment = format!("space-curve/{alg_id}");
    let rows = vec![
        ReportRow::at_least(
            &experiment,
            &label,
            "slope_vs_lower",
            slope,
            expected - spec.tolerance,
        ),
        ReportRow::at_most(
            &experiment,
            &label,
            "slope_vs_upper",
            slope,
            expected + spec.tolerance,
        ),
    ];
    Ok(SpaceCurve {
        points,
        slope,
        rows,
        alg_id,
    })
}

fn final_bits<A: StreamingAlgorithm>(
    params: &A::Params,
    seed: u64,
    stream: &GraphStream,
) -> Result<u64, HarnessError> {
    let mut alg = A::init(stream.topology, params, seed)?;
    alg.process_all(&stream.updates)?;
    Ok(alg.snapshot().bit_length())
}

/// Random Augmented Index instance of length `m`.
pub fn gen_ind(m: usize, seed: u64) -> Result<IndInstance, HarnessError> {
    Ok(IndInstance::random(
        m,
        &mut derive_rng(seed, 0, Role::Instance),
    )?)
}

/// Random Ind instance of length `(n-k)^2` packed into BInd.
pub fn gen_bind(
    n: usize,
    k: usize,
    seed: u64,
) -> Result<(IndInstance, BIndInstance), HarnessError> {
    if k == 0 || k >= n {
        return config(format!(
            "n - k >= 1 and k >= 1 required, got n = {n}, k = {k}"
        ));
    }
    let ind = gen_ind((n - k) * (n - k), seed)?;
    let bind = pack_ind_to_bind(&ind, n, k)?;
    Ok((ind, bind))
}

/// Bob's side of a BInd instance as text: `n k x y`, then the `k x k`
/// window with `*` at the hidden corner.
pub fn bind_query_text(inst: &BIndInstance) -> String {
    let mut out = format!("{} {} {} {}\n", inst.n(), inst.k(), inst.x(), inst.y());
    for i in inst.x()..inst.x() + inst.k() {
        for j in inst.y()..inst.y() + inst.k() {
            out.push(match inst.view().get(i, j) {
                Some(true) => '1',
                Some(false) => '0',
                None => '*',
            });
        }
        out.push('\n');
    }
    out
}

pub fn gen_stream(n: usize, density: f64, seed: u64) -> Result<GraphStream, HarnessError> {
    if n == 0 || !(0.0..=1.0).contains(&density) {
        return config(format!(
            "need n >= 1 and density in [0, 1], got n = {n}, density = {density}"
        ));
    }
    Ok(dense_random_stream(
        n,
        density,
        &mut derive_rng(seed, 0, Role::Stream),
    ))
}

/// Parses a matrix file in the [`BitMatrix`] text format.
pub fn read_matrix(text: &str) -> Result<BitMatrix, HarnessError> {
    Ok(text.parse::<BitMatrix>()?)
}
