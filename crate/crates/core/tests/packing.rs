use bindlab::bind::{
    pack_ind_to_bind, position_of, suffix_sufficient_under, verify_suffix_sufficiency,
    view_from_suffix, IndInstance, Layout,
};
use bindlab::harness::gen_bind;
use proptest::prelude::*;

/// Every valid `(n, k, l)` with `4 <= n <= 12` and a random vector.
#[test]
fn suffix_determines_view_exhaustively() {
    let mut checked = 0;
    for n in 4..=12usize {
        for k in 1..n {
            let side = n - k;
            let m = side * side;
            for l in 1..=m {
                let bits: Vec<bool> = (0..m).map(|i| (i * 7 + n * 3 + k + l) % 5 < 2).collect();
                let ind = IndInstance::new(bits.clone(), l).unwrap();
                let bind = pack_ind_to_bind(&ind, n, k).unwrap();
                assert_eq!(bind.answer(), bits[l - 1]);
                assert_eq!((bind.x(), bind.y()), position_of(l, side));
                assert_eq!(bind.matrix().get(bind.x(), bind.y()), bits[l - 1]);
                let view = view_from_suffix(n, k, l, &bits[l..]).unwrap();
                assert_eq!(&view, bind.view(), "n={n} k={k} l={l}");
                assert!(verify_suffix_sufficiency(&ind, n, k));
                checked += 1;
            }
        }
    }
    assert!(checked > 1000);
}

#[test]
fn mismatched_layout_leaks_the_prefix() {
    // column-major placement with the row-major index map
    let bad = (4..=12usize)
        .flat_map(|n| (1..n).flat_map(move |k| (1..=(n - k) * (n - k)).map(move |l| (n, k, l))))
        .filter(|&(n, k, l)| !suffix_sufficient_under(Layout::ColumnMajor, n, k, l))
        .count();
    assert!(bad > 0);
    assert!(!suffix_sufficient_under(Layout::ColumnMajor, 7, 2, 6));
}

#[test]
fn nine_by_four_layout() {
    let (ind, bind) = gen_bind(9, 4, 7).unwrap();
    let m = bind.matrix();
    for i in 1..=9 {
        for j in 1..=9 {
            let expected = i <= 5 && j <= 5 && ind.bits()[(i - 1) * 5 + (j - 1)];
            assert_eq!(m.get(i, j), expected, "({i},{j})");
        }
    }
}

proptest! {
    #[test]
    fn packing_preserves_the_answer(n in 3usize..40, kf in 0.0f64..1.0, seed in any::<u64>()) {
        let k = 1 + ((n - 2) as f64 * kf) as usize;
        let (ind, bind) = gen_bind(n, k, seed).unwrap();
        prop_assert_eq!(bind.answer(), ind.answer());
        prop_assert_eq!(view_from_suffix(n, k, ind.index(), ind.suffix()).unwrap(), bind.view().clone());
    }
}
