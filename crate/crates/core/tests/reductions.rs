mod common;

use bindlab::algorithms::{StoreAll, StoreAllCover};
use bindlab::bind::{BIndInstance, BobAnswer};
use bindlab::matching_reduction::{bob_run, MatchRunConfig};
use bindlab::reduction::{alice_encode, RunRandomness};
use bindlab::vc_reduction::{bob_run_vc, cover_bound, decide_vc, VcRunConfig};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn instance(n: usize, k: usize, seed: u64) -> BIndInstance {
    BIndInstance::random(n, k, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
}

/// Edges of `A xor X` with the window minus its diagonal removed, in
/// original coordinates, right ids shifted by `n`.
fn unpermuted_residual(
    inst: &BIndInstance,
    rr: &RunRandomness,
    keep_diagonal: bool,
) -> Vec<(usize, usize)> {
    let (n, k, x, y) = (inst.n(), inst.k(), inst.x(), inst.y());
    let in_window =
        |i: usize, j: usize| (x..x + k).contains(&i) && (y..y + k).contains(&j) && (i, j) != (x, y);
    let on_diagonal = |i: usize, j: usize| i > x && i - x == j - y;
    let mut edges = Vec::new();
    for i in 1..=n {
        for j in 1..=n {
            let bit = inst.matrix().get(i, j) ^ rr.mask.get(i, j);
            let removed = in_window(i, j) && !(keep_diagonal && on_diagonal(i, j));
            if bit && !removed {
                edges.push((i, n + j));
            }
        }
    }
    edges
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn survivors_match_the_unpermuted_residual(n in 4usize..=6, kf in 0.0f64..1.0, seed in any::<u64>(), run in 1u64..5) {
        // tau >= 1 needs k >= 3
        let k = 3 + ((n - 4) as f64 * kf) as usize;
        let inst = instance(n, k, seed);
        let cfg = MatchRunConfig::new(n, k, 1.0, 1).unwrap();
        let snap = alice_encode::<StoreAll>(inst.matrix(), &(), seed, run).unwrap();
        let r = bob_run::<StoreAll>(inst.view(), &cfg, run, &snap, seed).unwrap();
        let rr = RunRandomness::derive(seed, run, n);
        prop_assert_eq!(r.returned.len(), common::brute_matching(&unpermuted_residual(&inst, &rr, true)));
        if let Some(bit) = r.claim() {
            prop_assert_eq!(bit, inst.answer());
        }
    }

    #[test]
    fn residual_cover_is_small_and_exact(n in 3usize..=7, kf in 0.0f64..1.0, seed in any::<u64>(), run in 1u64..5) {
        let k = 1 + ((n - 2) as f64 * kf) as usize;
        let inst = instance(n, k, seed);
        let cfg = VcRunConfig::new(n, k, 1.0, 1).unwrap();
        let snap = alice_encode::<StoreAllCover>(inst.matrix(), &(), seed, run).unwrap();
        let r = bob_run_vc::<StoreAllCover>(inst.view(), &cfg, run, &snap, seed).unwrap();
        let rr = RunRandomness::derive(seed, run, n);
        let opt = common::brute_min_cover(&unpermuted_residual(&inst, &rr, false));
        prop_assert_eq!(r.cover.len(), opt);
        prop_assert!(opt <= cover_bound(n, k));
        match decide_vc([&r]) {
            BobAnswer::Bit(b) => prop_assert_eq!(b, inst.answer()),
            BobAnswer::Fail => prop_assert!(r.touched),
        }
    }
}

/// `P[Bin(k, 1/2) >= t]` by exact summation in log space.
fn binomial_upper_tail(k: usize, t: usize) -> f64 {
    let ln_fact = |m: usize| (1..=m).map(|i| (i as f64).ln()).sum::<f64>();
    (t..=k)
        .map(|j| (ln_fact(k) - ln_fact(j) - ln_fact(k - j) - k as f64 * 2f64.ln()).exp())
        .sum()
}

#[test]
fn diagonal_zeros_follow_the_binomial_tail() {
    let (n, k, trials) = (256, 240, 2000);
    let counts = bindlab::harness::diagonal_zero_counts(n, k, trials, 17).unwrap();
    let threshold = (0.95 * k as f64 / 2.0).ceil() as usize;
    let observed = counts.iter().filter(|&&c| c >= threshold).count() as f64 / trials as f64;
    let exact = binomial_upper_tail(k, threshold);
    assert!((observed - exact).abs() < 0.03, "{observed} vs {exact}");
    assert!(exact < 0.9);
}

#[test]
fn survivor_matching_is_diagonal_plus_border() {
    // mean of mu(G(A') - E_del) sits at (k - 1) / 2 + 2 (n - k)
    let (n, k, trials) = (128, 112, 300);
    let sizes = bindlab::harness::survivor_matching_sizes(n, k, trials, 5).unwrap();
    let mean = sizes.iter().sum::<usize>() as f64 / trials as f64;
    let model = (k - 1) as f64 / 2.0 + 2.0 * (n - k) as f64;
    let sd = ((k - 1) as f64).sqrt() / 2.0;
    assert!(
        (mean - model).abs() < 4.0 * sd / (trials as f64).sqrt() + 1.0,
        "{mean} vs {model}"
    );
}
