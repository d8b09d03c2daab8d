//! Square binary matrices, XOR masking, row/column permutation and the
//! `S(x, y)` index window.
//!
//! All public indices are 1-based (`1..=n`), rows first. Storage is packed
//! into `u64` words per row; conversion to 0-based offsets happens only
//! inside this module.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use thiserror::Error;

use crate::graph::BipartiteGraph;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MatrixError {
    #[error("matrix side must be positive")]
    Empty,
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("not a permutation of 1..={n}: {detail}")]
    NotBijective { n: usize, detail: String },
    #[error("invalid window: n={n} k={k} x={x} y={y}")]
    InvalidWindow {
        n: usize,
        k: usize,
        x: usize,
        y: usize,
    },
    #[error("parse error on line {line}: {detail}")]
    Parse { line: usize, detail: String },
}

const WORD: usize = 64;

/// An `n x n` matrix over `{0, 1}`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    n: usize,
    words: usize,
    bits: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(n: usize) -> Self {
        assert!(n > 0, "matrix side must be positive");
        let words = n.div_ceil(WORD);
        Self {
            n,
            words,
            bits: vec![0; n * words],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 1..=n {
            m.set(i, i, true);
        }
        m
    }

    pub fn all_ones(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for w in m.bits.iter_mut() {
            *w = !0;
        }
        m.clear_padding();
        m
    }

    /// Every entry independently uniform on `{0, 1}`.
    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut m = Self::zeros(n);
        for w in m.bits.iter_mut() {
            *w = rng.gen();
        }
        m.clear_padding();
        m
    }

    /// Builds a matrix from rows of `0`/`1` values.
    pub fn from_rows<T: AsRef<[u8]>>(rows: &[T]) -> Result<Self, MatrixError> {
        let n = rows.len();
        if n == 0 {
            return Err(MatrixError::Empty);
        }
        let mut m = Self::zeros(n);
        for (r, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != n {
                return Err(MatrixError::DimensionMismatch {
                    left: n,
                    right: row.len(),
                });
            }
            for (c, &b) in row.iter().enumerate() {
                match b {
                    0 => {}
                    1 => m.set(r + 1, c + 1, true),
                    _ => {
                        return Err(MatrixError::Parse {
                            line: r + 1,
                            detail: format!("entry {b} is not a bit"),
                        })
                    }
                }
            }
        }
        Ok(m)
    }

    fn clear_padding(&mut self) {
        let tail = self.n % WORD;
        if tail != 0 {
            let mask = (1u64 << tail) - 1;
            for r in 0..self.n {
                self.bits[r * self.words + self.words - 1] &= mask;
            }
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    fn locate(&self, i: usize, j: usize) -> (usize, u64) {
        assert!(
            (1..=self.n).contains(&i) && (1..=self.n).contains(&j),
            "index ({i}, {j}) outside 1..={}",
            self.n
        );
        let c = j - 1;
        ((i - 1) * self.words + c / WORD, 1u64 << (c % WORD))
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> bool {
        let (w, mask) = self.locate(i, j);
        self.bits[w] & mask != 0
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: bool) {
        let (w, mask) = self.locate(i, j);
        if value {
            self.bits[w] |= mask;
        } else {
            self.bits[w] &= !mask;
        }
    }

    pub fn count_ones(&self) -> usize {
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn row_sums(&self) -> Vec<usize> {
        self.bits
            .chunks(self.words)
            .map(|row| row.iter().map(|w| w.count_ones() as usize).sum())
            .collect()
    }

    pub fn col_sums(&self) -> Vec<usize> {
        let mut sums = vec![0; self.n];
        for (_, j) in self.ones() {
            sums[j - 1] += 1;
        }
        sums
    }

    /// Positions of all `1` entries in row-major order.
    pub fn ones(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.bits
            .chunks(self.words)
            .enumerate()
            .flat_map(|(r, row)| {
                row.iter().enumerate().flat_map(move |(wi, &word)| {
                    let mut w = word;
                    std::iter::from_fn(move || {
                        if w == 0 {
                            return None;
                        }
                        let t = w.trailing_zeros() as usize;
                        w &= w - 1;
                        Some((r + 1, wi * WORD + t + 1))
                    })
                })
            })
    }

    /// Entry-wise XOR.
    pub fn xor(&self, other: &BitMatrix) -> Result<BitMatrix, MatrixError> {
        if self.n != other.n {
            return Err(MatrixError::DimensionMismatch {
                left: self.n,
                right: other.n,
            });
        }
        let bits = self
            .bits
            .iter()
            .zip(&other.bits)
            .map(|(a, b)| a ^ b)
            .collect();
        Ok(BitMatrix {
            n: self.n,
            words: self.words,
            bits,
        })
    }

    /// Moves entry `(i, j)` to `(rows(i), cols(j))`.
    pub fn permute(&self, perms: &PermutationPair) -> Result<BitMatrix, MatrixError> {
        if perms.n() != self.n {
            return Err(MatrixError::DimensionMismatch {
                left: self.n,
                right: perms.n(),
            });
        }
        let mut out = BitMatrix::zeros(self.n);
        for (i, j) in self.ones() {
            out.set(perms.rows.apply(i), perms.cols.apply(j), true);
        }
        Ok(out)
    }

    /// Packed row-major bit image: entry `(i, j)` is bit `(i-1)*n + (j-1)`,
    /// least significant bit first within each byte.
    pub fn to_packed_bytes(&self) -> Vec<u8> {
        let total = self.n * self.n;
        let mut out = vec![0u8; total.div_ceil(8)];
        for (i, j) in self.ones() {
            let p = (i - 1) * self.n + (j - 1);
            out[p / 8] |= 1 << (p % 8);
        }
        out
    }

    pub fn from_packed_bytes(n: usize, bytes: &[u8]) -> Result<BitMatrix, MatrixError> {
        if n == 0 {
            return Err(MatrixError::Empty);
        }
        let total = n * n;
        if bytes.len() != total.div_ceil(8) {
            return Err(MatrixError::DimensionMismatch {
                left: total.div_ceil(8),
                right: bytes.len(),
            });
        }
        let mut m = BitMatrix::zeros(n);
        for (bi, &byte) in bytes.iter().enumerate() {
            let mut b = byte;
            while b != 0 {
                let p = bi * 8 + b.trailing_zeros() as usize;
                b &= b - 1;
                if p >= total {
                    return Err(MatrixError::Parse {
                        line: 0,
                        detail: "nonzero padding bits".into(),
                    });
                }
                m.set(p / n + 1, p % n + 1, true);
            }
        }
        Ok(m)
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitMatrix({})", self.n)?;
        if self.n <= 16 {
            for i in 1..=self.n {
                f.write_str("\n  ")?;
                for j in 1..=self.n {
                    f.write_str(if self.get(i, j) { "1" } else { "0" })?;
                }
            }
        }
        Ok(())
    }
}

/// Text fixture format: a line with `n`, then `n` lines of `n` characters
/// `'0'`/`'1'`.
impl fmt::Display for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}", self.n)?;
        for i in 1..=self.n {
            let row: String = (1..=self.n)
                .map(|j| if self.get(i, j) { '1' } else { '0' })
                .collect();
            writeln!(f, "{row}")?;
        }
        Ok(())
    }
}

impl FromStr for BitMatrix {
    type Err = MatrixError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut lines = s.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines.next().ok_or(MatrixError::Empty)?;
        let n: usize = header.trim().parse().map_err(|_| MatrixError::Parse {
            line: 1,
            detail: format!("bad side length {header:?}"),
        })?;
        if n == 0 {
            return Err(MatrixError::Empty);
        }
        let mut m = BitMatrix::zeros(n);
        let mut rows = 0;
        for (idx, line) in lines {
            rows += 1;
            if rows > n {
                return Err(MatrixError::Parse {
                    line: idx + 1,
                    detail: "too many rows".into(),
                });
            }
            let line = line.trim();
            if line.chars().count() != n {
                return Err(MatrixError::Parse {
                    line: idx + 1,
                    detail: format!("expected {n} columns"),
                });
            }
            for (c, ch) in line.chars().enumerate() {
                match ch {
                    '0' => {}
                    '1' => m.set(rows, c + 1, true),
                    _ => {
                        return Err(MatrixError::Parse {
                            line: idx + 1,
                            detail: format!("unexpected character {ch:?}"),
                        })
                    }
                }
            }
        }
        if rows != n {
            return Err(MatrixError::Parse {
                line: rows + 1,
                detail: format!("expected {n} rows, found {rows}"),
            });
        }
        Ok(m)
    }
}

/// A bijection on `1..=n`, stored as its image.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Permutation {
    image: Vec<usize>,
}

impl Permutation {
    pub fn new(image: Vec<usize>) -> Result<Self, MatrixError> {
        let n = image.len();
        if n == 0 {
            return Err(MatrixError::Empty);
        }
        let mut seen = vec![false; n];
        for &v in &image {
            if v == 0 || v > n {
                return Err(MatrixError::NotBijective {
                    n,
                    detail: format!("value {v} out of range"),
                });
            }
            if std::mem::replace(&mut seen[v - 1], true) {
                return Err(MatrixError::NotBijective {
                    n,
                    detail: format!("value {v} repeated"),
                });
            }
        }
        Ok(Self { image })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            image: (1..=n).collect(),
        }
    }

    pub fn random<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut image: Vec<usize> = (1..=n).collect();
        image.shuffle(rng);
        Self { image }
    }

    pub fn n(&self) -> usize {
        self.image.len()
    }

    #[inline]
    pub fn apply(&self, i: usize) -> usize {
        self.image[i - 1]
    }

    pub fn inverse(&self) -> Self {
        let mut inv = vec![0; self.image.len()];
        for (i, &v) in self.image.iter().enumerate() {
            inv[v - 1] = i + 1;
        }
        Self { image: inv }
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }
}

/// One line of `n` space-separated integers: the images of `1..=n`.
impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for v in &self.image {
            if !first {
                f.write_str(" ")?;
            }
            first = false;
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

impl FromStr for Permutation {
    type Err = MatrixError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let image = s
            .split_whitespace()
            .map(|t| {
                t.parse::<usize>().map_err(|_| MatrixError::Parse {
                    line: 1,
                    detail: format!("bad integer {t:?}"),
                })
            })
            .collect::<Result<Vec<_>, _>>()?;
        Permutation::new(image)
    }
}

/// Row permutation and column permutation of the same size.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PermutationPair {
    pub rows: Permutation,
    pub cols: Permutation,
}

impl PermutationPair {
    pub fn new(rows: Permutation, cols: Permutation) -> Result<Self, MatrixError> {
        if rows.n() != cols.n() {
            return Err(MatrixError::DimensionMismatch {
                left: rows.n(),
                right: cols.n(),
            });
        }
        Ok(Self { rows, cols })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            rows: Permutation::identity(n),
            cols: Permutation::identity(n),
        }
    }

    pub fn n(&self) -> usize {
        self.rows.n()
    }

    pub fn inverse(&self) -> Self {
        Self {
            rows: self.rows.inverse(),
            cols: self.cols.inverse(),
        }
    }
}

pub fn xor_mask(a: &BitMatrix, mask: &BitMatrix) -> Result<BitMatrix, MatrixError> {
    a.xor(mask)
}

pub fn permute(b: &BitMatrix, perms: &PermutationPair) -> Result<BitMatrix, MatrixError> {
    b.permute(perms)
}

/// The `k x k` block with upper-left corner `(x, y)`, minus the corner.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct IndexWindow {
    n: usize,
    k: usize,
    x: usize,
    y: usize,
}

impl IndexWindow {
    /// Requires `1 <= k < n` and `1 <= x, y <= n - k`.
    pub fn new(n: usize, k: usize, x: usize, y: usize) -> Result<Self, MatrixError> {
        let valid = k >= 1 && k < n && (1..=n - k).contains(&x) && (1..=n - k).contains(&y);
        if !valid {
            return Err(MatrixError::InvalidWindow { n, k, x, y });
        }
        Ok(Self { n, k, x, y })
    }

    pub fn n(&self) -> usize {
        self.n
    }
    pub fn k(&self) -> usize {
        self.k
    }
    pub fn x(&self) -> usize {
        self.x
    }
    pub fn y(&self) -> usize {
        self.y
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        (self.x..self.x + self.k).contains(&i)
            && (self.y..self.y + self.k).contains(&j)
            && (i, j) != (self.x, self.y)
    }

    /// `S(x, y)` in row-major order; always `k*k - 1` entries.
    pub fn indices(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let (x, y, k) = (self.x, self.y, self.k);
        (x..x + k)
            .flat_map(move |i| (y..y + k).map(move |j| (i, j)))
            .filter(move |&p| p != (x, y))
    }

    pub fn len(&self) -> usize {
        self.k * self.k - 1
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn diagonal(&self) -> Vec<(usize, usize)> {
        diagonal_indices(self.x, self.y, self.k)
    }
}

pub fn window_indices(w: &IndexWindow) -> Vec<(usize, usize)> {
    w.indices().collect()
}

/// `(x + q, y + q)` for `q = 0..k`, starting at the corner itself.
pub fn diagonal_indices(x: usize, y: usize, k: usize) -> Vec<(usize, usize)> {
    (0..k).map(|q| (x + q, y + q)).collect()
}

/// Reads `b` as the incidence matrix of a bipartite graph: rows are the
/// left part, columns the right part.
pub fn graph_of(b: &BitMatrix) -> BipartiteGraph {
    BipartiteGraph::from_sorted_unique(b.n(), b.n(), b.ones())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn m(rows: &[&[u8]]) -> BitMatrix {
        BitMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn xor_examples() {
        let a = m(&[&[1, 0], &[0, 1]]);
        let x = m(&[&[1, 1], &[0, 0]]);
        assert_eq!(xor_mask(&a, &x).unwrap(), m(&[&[0, 1], &[0, 1]]));
        assert_eq!(xor_mask(&a, &a).unwrap(), BitMatrix::zeros(2));
        assert_eq!(xor_mask(&a, &BitMatrix::zeros(2)).unwrap(), a);
        assert!(matches!(
            xor_mask(&a, &BitMatrix::zeros(3)),
            Err(MatrixError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn xor_of_random_mask_is_balanced() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let a = m(&[&[1, 0, 1], &[0, 0, 0], &[1, 1, 1]]);
        let samples = 10_000;
        let mut counts = vec![0usize; 9];
        for _ in 0..samples {
            let r = xor_mask(&a, &BitMatrix::random(3, &mut rng)).unwrap();
            for (i, j) in r.ones() {
                counts[(i - 1) * 3 + j - 1] += 1;
            }
        }
        for c in counts {
            let f = c as f64 / samples as f64;
            assert!((f - 0.5).abs() <= 0.02, "marginal {f}");
        }
    }

    #[test]
    fn permute_examples() {
        let b = m(&[&[1, 1], &[0, 1]]);
        assert_eq!(b.permute(&PermutationPair::identity(2)).unwrap(), b);
        let swap = PermutationPair::new(
            Permutation::new(vec![2, 1]).unwrap(),
            Permutation::identity(2),
        )
        .unwrap();
        assert_eq!(b.permute(&swap).unwrap(), m(&[&[0, 1], &[1, 1]]));
    }

    #[test]
    fn rejects_non_bijections() {
        assert!(Permutation::new(vec![1, 1]).is_err());
        assert!(Permutation::new(vec![0, 1]).is_err());
        assert!(Permutation::new(vec![1, 3]).is_err());
        assert!("2 1 3".parse::<Permutation>().is_ok());
        assert!("2 x".parse::<Permutation>().is_err());
    }

    #[test]
    fn window_examples() {
        let w = IndexWindow::new(5, 1, 2, 3).unwrap();
        assert!(window_indices(&w).is_empty());
        let w = IndexWindow::new(5, 2, 1, 1).unwrap();
        assert_eq!(window_indices(&w), vec![(1, 2), (2, 1), (2, 2)]);
        let w = IndexWindow::new(9, 4, 3, 3).unwrap();
        let s = window_indices(&w);
        assert_eq!(s.len(), 15);
        assert!(s
            .iter()
            .all(|&(i, j)| (3..=6).contains(&i) && (3..=6).contains(&j)));
        assert!(!s.contains(&(3, 3)));
        assert!(IndexWindow::new(5, 5, 1, 1).is_err());
        assert!(IndexWindow::new(5, 2, 4, 1).is_err());
        assert!(IndexWindow::new(5, 2, 0, 1).is_err());
    }

    #[test]
    fn diagonal_examples() {
        assert_eq!(diagonal_indices(4, 2, 1), vec![(4, 2)]);
        assert_eq!(diagonal_indices(1, 1, 3), vec![(1, 1), (2, 2), (3, 3)]);
        let w = IndexWindow::new(10, 4, 2, 5).unwrap();
        let s = window_indices(&w);
        let overlap = w.diagonal().iter().filter(|p| s.contains(p)).count();
        assert_eq!(overlap, 3);
    }

    #[test]
    fn graph_of_examples() {
        let g = graph_of(&BitMatrix::identity(5));
        assert_eq!(g.edge_count(), 5);
        assert!((1..=5).all(|i| g.has_edge(i, i)));
        assert_eq!(graph_of(&BitMatrix::zeros(4)).edge_count(), 0);
        assert_eq!(graph_of(&BitMatrix::all_ones(2)).edge_count(), 4);
    }

    #[test]
    fn text_format_round_trip() {
        let a = m(&[&[1, 0, 1], &[0, 0, 0], &[1, 1, 0]]);
        let text = a.to_string();
        assert_eq!(text, "3\n101\n000\n110\n");
        assert_eq!(text.parse::<BitMatrix>().unwrap(), a);
        assert!("2\n10\n1\n".parse::<BitMatrix>().is_err());
        assert!("2\n10\n".parse::<BitMatrix>().is_err());
        assert!("2\n12\n00\n".parse::<BitMatrix>().is_err());
    }

    fn arb_matrix() -> impl Strategy<Value = (BitMatrix, PermutationPair)> {
        (1usize..70, any::<u64>()).prop_map(|(n, seed)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let b = BitMatrix::random(n, &mut rng);
            let p = PermutationPair::new(
                Permutation::random(n, &mut rng),
                Permutation::random(n, &mut rng),
            )
            .unwrap();
            (b, p)
        })
    }

    proptest! {
        #[test]
        fn permute_is_entrywise_relabel((b, p) in arb_matrix()) {
            let out = b.permute(&p).unwrap();
            for i in 1..=b.n() {
                for j in 1..=b.n() {
                    prop_assert_eq!(out.get(p.rows.apply(i), p.cols.apply(j)), b.get(i, j));
                }
            }
            prop_assert_eq!(out.permute(&p.inverse()).unwrap(), b.clone());
        }

        #[test]
        fn permute_preserves_line_sum_multisets((b, p) in arb_matrix()) {
            let out = b.permute(&p).unwrap();
            let sorted = |mut v: Vec<usize>| { v.sort_unstable(); v };
            prop_assert_eq!(sorted(out.row_sums()), sorted(b.row_sums()));
            prop_assert_eq!(sorted(out.col_sums()), sorted(b.col_sums()));
        }

        #[test]
        fn graph_edge_count_is_popcount((b, _p) in arb_matrix()) {
            prop_assert_eq!(graph_of(&b).edge_count(), b.count_ones());
            let packed = b.to_packed_bytes();
            prop_assert_eq!(BitMatrix::from_packed_bytes(b.n(), &packed).unwrap(), b);
        }
    }
}
