// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

//! Binary linear algebra over GF(2).
//!
//! A [`ParityMatrix`] stores its rows bit-packed into `u64` words, so a row
//! addition costs `O(n / 64)`. Row `i` holds the parity computed on qubit `i`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use thiserror::Error;

const WORD_BITS: usize = 64;

#[inline]
fn words_for(len: usize) -> usize {
    len.div_ceil(WORD_BITS)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Gf2Error {
    #[error("row addition needs distinct rows, got {src} -> {dst}")]
    InvalidRowOp { src: usize, dst: usize },
    #[error("index {index} out of range for dimension {n}")]
    OutOfRange { index: usize, n: usize },
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("no combination of the active rows reaches the target; active submatrix is singular")]
    Inconsistent,
    #[error("parse error: {0}")]
    Parse(String),
}

/// A packed bit vector of fixed length.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitRow {
    len: usize,
    words: Vec<u64>,
}

impl BitRow {
    pub fn zeros(len: usize) -> Self {
        Self {
            len,
            words: vec![0; words_for(len)],
        }
    }

    pub fn unit(len: usize, index: usize) -> Self {
        let mut row = Self::zeros(len);
        row.set(index, true);
        row
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        let mut row = Self::zeros(bits.len());
        for (i, &b) in bits.iter().enumerate() {
            row.set(i, b);
        }
        row
    }

    pub(crate) fn from_words(len: usize, words: &[u64]) -> Self {
        Self {
            len,
            words: words.to_vec(),
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    pub fn get(&self, index: usize) -> bool {
        assert!(index < self.len, "bit index {index} out of range");
        self.words[index / WORD_BITS] >> (index % WORD_BITS) & 1 == 1
    }

    pub fn set(&mut self, index: usize, value: bool) {
        assert!(index < self.len, "bit index {index} out of range");
        let mask = 1u64 << (index % WORD_BITS);
        if value {
            self.words[index / WORD_BITS] |= mask;
        } else {
            self.words[index / WORD_BITS] &= !mask;
        }
    }

    pub fn xor_assign(&mut self, other: &BitRow) {
        assert_eq!(self.len, other.len);
        xor_words(&mut self.words, &other.words);
    }

    pub fn count_ones(&self) -> usize {
        popcount(&self.words)
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.len).filter(move |&i| self.get(i))
    }
}

impl fmt::Debug for BitRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitRow({self})")
    }
}

impl fmt::Display for BitRow {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.len {
            f.write_str(if self.get(i) { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl FromStr for BitRow {
    type Err = Gf2Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bits = s
            .trim()
            .chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(Gf2Error::Parse(format!("unexpected character {other:?}"))),
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self::from_bools(&bits))
    }
}

#[inline]
pub(crate) fn xor_words(dst: &mut [u64], src: &[u64]) {
    for (d, s) in dst.iter_mut().zip(src) {
        *d ^= *s;
    }
}

#[inline]
pub(crate) fn popcount(words: &[u64]) -> usize {
    words.iter().map(|w| w.count_ones() as usize).sum()
}

/// Number of ones in `v`.
pub fn hamming_weight(v: &BitRow) -> usize {
    v.count_ones()
}

/// Number of positions where `x` and `y` differ.
pub fn hamming_distance(x: &BitRow, y: &BitRow) -> Result<usize, Gf2Error> {
    if x.len != y.len {
        return Err(Gf2Error::LengthMismatch(x.len, y.len));
    }
    Ok(x.words
        .iter()
        .zip(&y.words)
        .map(|(a, b)| (a ^ b).count_ones() as usize)
        .sum())
}

/// Square binary matrix describing a linear reversible function.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ParityMatrix {
    n: usize,
    stride: usize,
    data: Vec<u64>,
}

impl ParityMatrix {
    pub fn zeros(n: usize) -> Self {
        let stride = words_for(n);
        Self {
            n,
            stride,
            data: vec![0; n * stride],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    pub fn from_rows(rows: &[BitRow]) -> Result<Self, Gf2Error> {
        let n = rows.len();
        let mut m = Self::zeros(n);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Gf2Error::LengthMismatch(row.len(), n));
            }
            m.row_words_mut(i).copy_from_slice(row.words());
        }
        Ok(m)
    }

    /// Builds a matrix from string rows such as `["0011", "1011", ...]`.
    pub fn from_strs(rows: &[&str]) -> Result<Self, Gf2Error> {
        let rows = rows
            .iter()
            .map(|s| s.parse::<BitRow>())
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_rows(&rows)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> bool {
        debug_assert!(row < self.n && col < self.n);
        self.data[row * self.stride + col / WORD_BITS] >> (col % WORD_BITS) & 1 == 1
    }

    pub fn set(&mut self, row: usize, col: usize, value: bool) {
        assert!(row < self.n && col < self.n);
        let mask = 1u64 << (col % WORD_BITS);
        let word = &mut self.data[row * self.stride + col / WORD_BITS];
        if value {
            *word |= mask;
        } else {
            *word &= !mask;
        }
    }

    #[inline]
    pub(crate) fn row_words(&self, row: usize) -> &[u64] {
        &self.data[row * self.stride..(row + 1) * self.stride]
    }

    #[inline]
    fn row_words_mut(&mut self, row: usize) -> &mut [u64] {
        &mut self.data[row * self.stride..(row + 1) * self.stride]
    }

    pub fn row(&self, row: usize) -> BitRow {
        BitRow::from_words(self.n, self.row_words(row))
    }

    pub fn row_weight(&self, row: usize) -> usize {
        popcount(self.row_words(row))
    }

    /// Whether row `row` equals the unit vector `e_row`.
    pub fn row_is_unit(&self, row: usize) -> bool {
        self.get(row, row) && self.row_weight(row) == 1
    }

    /// Whether column `col` equals the unit vector `e_col`.
    pub fn col_is_unit(&self, col: usize) -> bool {
        (0..self.n).all(|r| self.get(r, col) == (r == col))
    }

    /// Adds row `src` into row `dst` (left multiplication by an elementary matrix).
    pub fn row_add(&mut self, src: usize, dst: usize) -> Result<(), Gf2Error> {
        if src == dst {
            return Err(Gf2Error::InvalidRowOp { src, dst });
        }
        for index in [src, dst] {
            if index >= self.n {
                return Err(Gf2Error::OutOfRange { index, n: self.n });
            }
        }
        self.add_row(src, dst);
        Ok(())
    }

    #[inline]
    pub(crate) fn add_row(&mut self, src: usize, dst: usize) {
        debug_assert_ne!(src, dst);
        let s = self.stride;
        let (a, b) = if src < dst {
            let (lo, hi) = self.data.split_at_mut(dst * s);
            (&lo[src * s..(src + 1) * s], &mut hi[..s])
        } else {
            let (lo, hi) = self.data.split_at_mut(src * s);
            (&hi[..s], &mut lo[dst * s..(dst + 1) * s])
        };
        xor_words(b, a);
    }

    /// Applies `(src, dst)` row additions in order.
    pub fn apply_row_ops(&mut self, ops: &[(usize, usize)]) -> Result<(), Gf2Error> {
        for &(src, dst) in ops {
            self.row_add(src, dst)?;
        }
        Ok(())
    }

    pub fn rank(&self) -> usize {
        let mut rows: Vec<Vec<u64>> = (0..self.n).map(|r| self.row_words(r).to_vec()).collect();
        let mut rank = 0;
        for col in 0..self.n {
            let (w, b) = (col / WORD_BITS, col % WORD_BITS);
            let Some(pivot) = (rank..self.n).find(|&r| rows[r][w] >> b & 1 == 1) else {
                continue;
            };
            rows.swap(rank, pivot);
            let pivot_row = rows[rank].clone();
            for row in rows.iter_mut().skip(rank + 1) {
                if row[w] >> b & 1 == 1 {
                    xor_words(row, &pivot_row);
                }
            }
            rank += 1;
        }
        rank
    }

    pub fn is_invertible(&self) -> bool {
        self.rank() == self.n
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.n)
    }

    /// Upper triangular with ones on the diagonal.
    pub fn is_unit_upper_triangular(&self) -> bool {
        (0..self.n).all(|r| self.get(r, r) && (0..r).all(|c| !self.get(r, c)))
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.n);
        for r in 0..self.n {
            for c in 0..self.n {
                if self.get(r, c) {
                    t.set(c, r, true);
                }
            }
        }
        t
    }

    /// Finds the rows `S'` among `active` whose sum equals `M_i + e_i`.
    ///
    /// The system is solved over the active rows and columns only. Rows outside
    /// `active` are expected to be unit vectors, so they never contribute. Pivot
    /// ties go to the lowest row index, which makes the result deterministic.
    pub fn solve_combination(&self, active: &[usize], i: usize) -> Result<Vec<usize>, Gf2Error> {
        if !active.contains(&i) {
            return Err(Gf2Error::OutOfRange {
                index: i,
                n: self.n,
            });
        }
        let mut target = self.row_words(i).to_vec();
        target[i / WORD_BITS] ^= 1 << (i % WORD_BITS);

        let k = active.len();
        let combo_words = words_for(k);
        let mut rows: Vec<(Vec<u64>, Vec<u64>)> = active
            .iter()
            .enumerate()
            .map(|(slot, &r)| {
                let mut combo = vec![0u64; combo_words];
                combo[slot / WORD_BITS] |= 1 << (slot % WORD_BITS);
                (self.row_words(r).to_vec(), combo)
            })
            .collect();

        let mut cols: Vec<usize> = active.to_vec();
        cols.sort_unstable();
        // Gauss-Jordan: afterwards pivots[col] holds a row with a single pivot bit
        // among the pivot columns.
        let mut pivots: Vec<(usize, usize)> = Vec::with_capacity(k);
        let mut used = vec![false; k];
        for &col in &cols {
            let (w, b) = (col / WORD_BITS, col % WORD_BITS);
            let pivot = (0..k)
                .filter(|&s| !used[s] && rows[s].0[w] >> b & 1 == 1)
                .min_by_key(|&s| active[s]);
            let Some(p) = pivot else { continue };
            used[p] = true;
            let (pv, pc) = rows[p].clone();
            for (s, (v, c)) in rows.iter_mut().enumerate() {
                if s != p && v[w] >> b & 1 == 1 {
                    xor_words(v, &pv);
                    xor_words(c, &pc);
                }
            }
            pivots.push((col, p));
        }

        let mut combo = vec![0u64; combo_words];
        for &(col, p) in &pivots {
            if target[col / WORD_BITS] >> (col % WORD_BITS) & 1 == 1 {
                xor_words(&mut target, &rows[p].0);
                xor_words(&mut combo, &rows[p].1);
            }
        }
        if target.iter().any(|&w| w != 0) {
            return Err(Gf2Error::Inconsistent);
        }
        let mut out: Vec<usize> = (0..k)
            .filter(|&s| combo[s / WORD_BITS] >> (s % WORD_BITS) & 1 == 1)
            .map(|s| active[s])
            .collect();
        out.sort_unstable();
        Ok(out)
    }

    /// Samples uniform random bits until the matrix is invertible.
    pub fn random_invertible<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        assert!(n >= 1, "dimension must be positive");
        loop {
            let m = Self::random_bits(n, rng);
            if m.is_invertible() {
                return m;
            }
        }
    }

    pub(crate) fn random_bits<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let mut m = Self::zeros(n);
        let tail = n % WORD_BITS;
        let last_mask = if tail == 0 {
            u64::MAX
        } else {
            (1u64 << tail) - 1
        };
        for r in 0..n {
            let row = m.row_words_mut(r);
            for w in row.iter_mut() {
                *w = rng.gen();
            }
            if let Some(last) = row.last_mut() {
                *last &= last_mask;
            }
        }
        m
    }

    /// Identity with `k` uniformly random row additions applied.
    pub fn random_walk<R: Rng + ?Sized>(n: usize, k: usize, rng: &mut R) -> Self {
        assert!(n >= 2 || k == 0, "random walk needs at least two rows");
        let mut m = Self::identity(n);
        for _ in 0..k {
            let src = rng.gen_range(0..n);
            let mut dst = rng.gen_range(0..n - 1);
            if dst >= src {
                dst += 1;
            }
            m.add_row(src, dst);
        }
        m
    }

    /// Renders the fixture text format: `n` on the first line, then one row per line.
    pub fn to_text(&self) -> String {
        let mut out = format!("{}\n", self.n);
        for r in 0..self.n {
            out.push_str(&self.row(r).to_string());
            out.push('\n');
        }
        out
    }

    pub fn parse_text(text: &str) -> Result<Self, Gf2Error> {
        let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Gf2Error::Parse("empty matrix file".into()))?;
        let n: usize = header
            .parse()
            .map_err(|_| Gf2Error::Parse(format!("bad dimension line {header:?}")))?;
        let rows = lines
            .map(|l| l.parse::<BitRow>())
            .collect::<Result<Vec<_>, _>>()?;
        if rows.len() != n {
            return Err(Gf2Error::Parse(format!(
                "expected {n} rows, found {}",
                rows.len()
            )));
        }
        Self::from_rows(&rows)
    }
}

impl fmt::Debug for ParityMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ParityMatrix({})", self.n)?;
        for r in 0..self.n {
            writeln!(f, "  {}", self.row(r))?;
        }
        Ok(())
    }
}
