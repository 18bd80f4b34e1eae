//! Clusters of Pauli strings sharing one sparsity pattern, with bit-packed
//! sign matrices and the grand-sum coefficient solve.

use crate::lcu::pauli::PauliString;

/// Dense matrix of +/-1 entries packed one bit per entry (bit set = +1).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignMatrix {
    rows: usize,
    cols: usize,
    words_per_row: usize,
    bits: Vec<u64>,
}

impl SignMatrix {
    pub fn new(rows: usize, cols: usize) -> Self {
        let words_per_row = cols.div_ceil(64);
        Self {
            rows,
            cols,
            words_per_row,
            bits: vec![0; rows * words_per_row],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row_words(&self, r: usize) -> &[u64] {
        &self.bits[r * self.words_per_row..(r + 1) * self.words_per_row]
    }

    pub(crate) fn row_words_mut(&mut self, r: usize) -> &mut [u64] {
        &mut self.bits[r * self.words_per_row..(r + 1) * self.words_per_row]
    }

    #[inline]
    pub fn bit(&self, r: usize, c: usize) -> bool {
        self.bits[r * self.words_per_row + c / 64] >> (c % 64) & 1 == 1
    }

    /// Entry value `-1 + 2b`.
    #[inline]
    pub fn value(&self, r: usize, c: usize) -> i32 {
        if self.bit(r, c) {
            1
        } else {
            -1
        }
    }

    pub fn set(&mut self, r: usize, c: usize, plus: bool) {
        let w = &mut self.bits[r * self.words_per_row + c / 64];
        if plus {
            *w |= 1 << (c % 64);
        } else {
            *w &= !(1 << (c % 64));
        }
    }

    /// Integer dot product of two rows.
    pub fn row_dot(&self, a: usize, b: usize) -> i64 {
        let differ: u32 = self
            .row_words(a)
            .iter()
            .zip(self.row_words(b))
            .map(|(x, y)| (x ^ y).count_ones())
            .sum();
        self.cols as i64 - 2 * i64::from(differ)
    }

    pub(crate) fn from_raw(rows: usize, cols: usize, bits: Vec<u64>) -> Option<Self> {
        let words_per_row = cols.div_ceil(64);
        (bits.len() == rows * words_per_row).then_some(Self {
            rows,
            cols,
            words_per_row,
            bits,
        })
    }
}

/// All real (even-Y) Pauli strings whose nonzeros sit at `(k, k ^ mask)`.
///
/// Because every member is symmetric, only the canonical half of the pattern
/// is stored: positions `k` with the highest bit of `mask` clear (all `k` when
/// `mask == 0`). The full sign row follows from `S[m][k ^ mask] = S[m][k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cluster {
    pub n: u32,
    pub mask: u64,
    /// Z masks of the members, ascending.
    pub members: Vec<u64>,
    pub signs: SignMatrix,
}

impl Cluster {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn member(&self, m: usize) -> PauliString {
        PauliString::new(self.n, self.mask, self.members[m])
    }

    /// Number of stored pattern positions.
    pub fn half_len(&self) -> usize {
        self.signs.cols()
    }

    fn high_bit(&self) -> u64 {
        high_bit(self.mask)
    }

    /// Row index of canonical position `idx`.
    #[inline]
    pub fn canonical_row(&self, idx: usize) -> u64 {
        expand(idx as u64, self.high_bit())
    }

    /// Canonical position of row `k`, or `None` when `k` lies in the mirrored half.
    #[inline]
    pub fn canonical_index(&self, k: u64) -> Option<usize> {
        let hb = self.high_bit();
        if hb == 0 {
            Some(k as usize)
        } else if k & hb == 0 {
            Some(compress(k, hb) as usize)
        } else {
            None
        }
    }

    /// Sign of member `m` at `(k, k ^ mask)` for any row `k`.
    pub fn sign(&self, m: usize, k: u64) -> i32 {
        let k = match self.canonical_index(k) {
            Some(i) => i,
            None => self.canonical_index(k ^ self.mask).unwrap(),
        };
        self.signs.value(m, k)
    }

    /// Scale turning the canonical-half dot product into the coefficient `(1/2^n) S h`.
    pub fn coefficient_scale(&self) -> f64 {
        let dim = (1u64 << self.n) as f64;
        if self.mask == 0 {
            1.0 / dim
        } else {
            2.0 / dim
        }
    }

    /// Coefficients from canonical-half pattern values, one sign at a time.
    pub fn solve_direct(&self, h: &[f64]) -> Vec<f64> {
        assert_eq!(h.len(), self.half_len());
        let scale = self.coefficient_scale();
        (0..self.len())
            .map(|m| {
                let s: f64 = h
                    .iter()
                    .enumerate()
                    .map(|(c, &v)| if self.signs.bit(m, c) { v } else { -v })
                    .sum();
                s * scale
            })
            .collect()
    }

    /// Coefficients from canonical-half pattern values by a fast
    /// Walsh-Hadamard transform over the canonical index.
    ///
    /// For a member `z` the canonical-half sum is `sum_k h_k (-1)^{z.(k^mask)}`;
    /// `z.mask` is even, so this is the transform of `h` at `compress(z)`,
    /// times the member's `i^{#Y}` phase.
    pub fn solve_into(&self, h: &[f64], work: &mut Vec<f64>, out: &mut [f64]) {
        assert_eq!(h.len(), self.half_len());
        assert_eq!(out.len(), self.len());
        work.clear();
        work.extend_from_slice(h);
        fwht(work);
        let hb = self.high_bit();
        let scale = self.coefficient_scale();
        for (slot, &z) in out.iter_mut().zip(&self.members) {
            let phase = if (z & self.mask).count_ones() % 4 == 2 {
                -scale
            } else {
                scale
            };
            let idx = if hb == 0 { z } else { compress(z & !hb, hb) };
            *slot = phase * work[idx as usize];
        }
    }
}

/// In-place unnormalized Walsh-Hadamard transform; length must be a power of two.
pub fn fwht(a: &mut [f64]) {
    let n = a.len();
    debug_assert!(n.is_power_of_two());
    let mut h = 1;
    while h < n {
        for block in a.chunks_exact_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (x, y) in lo.iter_mut().zip(hi.iter_mut()) {
                let (p, q) = (*x, *y);
                *x = p + q;
                *y = p - q;
            }
        }
        h *= 2;
    }
}

#[inline]
fn high_bit(mask: u64) -> u64 {
    if mask == 0 {
        0
    } else {
        1 << (63 - mask.leading_zeros())
    }
}

/// Removes the (zero) bit `hb` from `k`.
#[inline]
fn compress(k: u64, hb: u64) -> u64 {
    (k & (hb - 1)) | ((k >> 1) & !(hb - 1))
}

/// Inserts a zero bit at position `hb` into `idx`.
#[inline]
fn expand(idx: u64, hb: u64) -> u64 {
    if hb == 0 {
        idx
    } else {
        (idx & (hb - 1)) | ((idx & !(hb - 1)) << 1)
    }
}

/// Builds the cluster for `mask` on `n` qubits.
///
/// Members are the even-Y strings with `x_mask == mask` in ascending `z_mask`
/// order; sign bits come from each member's entry at `(k, k ^ mask)`.
pub fn build_cluster(mask: u64, n: u32) -> Cluster {
    assert!(n <= 62, "qubit count {n} too large");
    let dim = 1u64 << n;
    assert!(mask < dim, "mask {mask:#b} out of range for {n} qubits");
    let members: Vec<u64> = (0..dim).filter(|z| (mask & z).count_ones() % 2 == 0).collect();
    let hb = high_bit(mask);
    let cols = if hb == 0 { dim as usize } else { (dim / 2) as usize };
    let mut signs = SignMatrix::new(members.len(), cols);
    for (m, &z) in members.iter().enumerate() {
        let s = PauliString::new(n, mask, z);
        let row = signs.row_words_mut(m);
        for c in 0..cols {
            if s.real_entry(expand(c as u64, hb)) > 0.0 {
                row[c / 64] |= 1 << (c % 64);
            }
        }
    }
    Cluster {
        n,
        mask,
        members,
        signs,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_qubit_x_cluster_excludes_y() {
        let c = build_cluster(1, 1);
        assert_eq!(c.len(), 1);
        assert_eq!(c.member(0).to_string(), "X");
    }

    #[test]
    fn two_qubit_xx_yy_cluster() {
        let c = build_cluster(3, 2);
        let names: Vec<_> = (0..c.len()).map(|m| c.member(m).to_string()).collect();
        assert_eq!(names, ["XX", "YY"]);
        // Kronecker construction: XX antidiagonal all +1, YY antidiagonal (-1, 1, 1, -1)
        let xx: Vec<i32> = (0..4).map(|k| c.sign(0, k)).collect();
        let yy: Vec<i32> = (0..4).map(|k| c.sign(1, k)).collect();
        assert_eq!(xx, [1, 1, 1, 1]);
        assert_eq!(yy, [-1, 1, 1, -1]);
    }

    #[test]
    fn member_counts() {
        assert_eq!(build_cluster(0, 4).len(), 16);
        for mask in 1..16 {
            assert_eq!(build_cluster(mask, 4).len(), 8);
        }
        assert_eq!(build_cluster(0b1_0000_0001, 9).len(), 256);
    }

    #[test]
    fn signs_reproduce_member_entries() {
        for n in 1..=5u32 {
            for mask in 0..1u64 << n {
                let c = build_cluster(mask, n);
                for m in 0..c.len() {
                    let s = c.member(m);
                    for k in 0..1u64 << n {
                        assert_eq!(f64::from(c.sign(m, k)), s.real_entry(k));
                    }
                }
            }
        }
    }

    #[test]
    fn fast_solve_matches_direct_solve() {
        for (mask, n) in [(0u64, 3u32), (5, 3), (0b100_0001, 7), (0b1_0000_0000, 9), (0, 7)] {
            let c = build_cluster(mask, n);
            let h: Vec<f64> = (0..c.half_len())
                .map(|i| ((i * 37 % 11) as f64 - 5.0) * 0.173)
                .collect();
            let direct = c.solve_direct(&h);
            let mut out = vec![0.0; c.len()];
            c.solve_into(&h, &mut Vec::new(), &mut out);
            for (a, b) in direct.iter().zip(&out) {
                assert!((a - b).abs() < 1e-12, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn canonical_index_round_trip() {
        let c = build_cluster(0b10110, 5);
        for idx in 0..c.half_len() {
            let k = c.canonical_row(idx);
            assert_eq!(c.canonical_index(k), Some(idx));
            assert_eq!(c.canonical_index(k ^ c.mask), None);
        }
    }
}
