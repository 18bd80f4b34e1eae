//! Entry-wise decomposition into signed-permutation unitaries.

use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;

/// Orthogonal 1-sparse matrix built around one symmetric entry pair.
///
/// Ones sit at `(i, j)` and `(j, i)` (or at `(i, i)` when `i == j`); every
/// other row `k` carries `fill` on the diagonal.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OneSparseTerm {
    pub coefficient: f64,
    pub i: usize,
    pub j: usize,
    pub fill: f64,
}

impl OneSparseTerm {
    /// Column and value of the nonzero in row `k`.
    pub fn entry(&self, k: usize) -> (usize, f64) {
        if k == self.i {
            (self.j, 1.0)
        } else if k == self.j {
            (self.i, 1.0)
        } else {
            (k, self.fill)
        }
    }
}

/// Pairs of terms with coefficient `h/2` and fills `+1` / `-1`, one pair per
/// stored upper-triangle entry (diagonal included).
#[derive(Debug, Clone, PartialEq)]
pub struct OneSparseLcu {
    pub rank: usize,
    pub terms: Vec<OneSparseTerm>,
}

impl OneSparseLcu {
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Sum of all terms, accumulated pair by pair so the fills cancel exactly.
    pub fn reconstruct(&self) -> SparseMatrix {
        let mut trip = Vec::new();
        for pair in self.terms.chunks(2) {
            for k in 0..self.rank {
                let mut v = 0.0;
                let mut col = k;
                for t in pair {
                    let (c, e) = t.entry(k);
                    col = c;
                    v += t.coefficient * e;
                }
                if v != 0.0 {
                    trip.push((k, col, v));
                }
            }
        }
        SparseMatrix::from_triplets(self.rank, &trip).expect("terms are in range")
    }
}

pub fn decompose_entrywise(h: &SparseMatrix) -> Result<OneSparseLcu> {
    if !h.is_symmetric() {
        return Err(Error::Contract(
            "entry-wise decomposition needs a symmetric matrix".into(),
        ));
    }
    let mut terms = Vec::new();
    for (r, c, v) in h.entries() {
        if c < r || v == 0.0 {
            continue;
        }
        for fill in [1.0, -1.0] {
            terms.push(OneSparseTerm {
                coefficient: v / 2.0,
                i: r,
                j: c,
                fill,
            });
        }
    }
    Ok(OneSparseLcu { rank: h.rank(), terms })
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dense(t: &OneSparseTerm, n: usize) -> DMatrix<f64> {
        let mut d = DMatrix::zeros(n, n);
        for k in 0..n {
            let (c, v) = t.entry(k);
            d[(k, c)] = v;
        }
        d
    }

    #[test]
    fn single_pair_example() {
        let h = SparseMatrix::from_triplets(4, &[(0, 1, 0.4), (1, 0, 0.4)]).unwrap();
        let lcu = decompose_entrywise(&h).unwrap();
        assert_eq!(lcu.len(), 2);
        let a = dense(&lcu.terms[0], 4);
        let b = dense(&lcu.terms[1], 4);
        #[rustfmt::skip]
        let ea = DMatrix::from_row_slice(4, 4, &[0., 1., 0., 0., 1., 0., 0., 0., 0., 0., 1., 0., 0., 0., 0., 1.]);
        #[rustfmt::skip]
        let eb = DMatrix::from_row_slice(4, 4, &[0., 1., 0., 0., 1., 0., 0., 0., 0., 0., -1., 0., 0., 0., 0., -1.]);
        assert_eq!((a, b), (ea, eb));
        assert!(lcu.terms.iter().all(|t| t.coefficient == 0.2));
    }

    #[test]
    fn terms_are_orthogonal() {
        for t in [
            OneSparseTerm {
                coefficient: 1.0,
                i: 1,
                j: 3,
                fill: -1.0,
            },
            OneSparseTerm {
                coefficient: 1.0,
                i: 2,
                j: 2,
                fill: 1.0,
            },
        ] {
            let d = dense(&t, 5);
            assert_eq!(&d * d.transpose(), DMatrix::identity(5, 5));
        }
    }

    #[test]
    fn diagonal_and_random_reconstruct_exactly() {
        let d = SparseMatrix::from_triplets(3, &[(0, 0, 0.3), (1, 1, -1.7), (2, 2, 2.9)]).unwrap();
        assert_eq!(decompose_entrywise(&d).unwrap().reconstruct().max_abs_diff(&d), 0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut trip = Vec::new();
        for r in 0..8 {
            for c in r..8 {
                if rng.gen_bool(0.5) {
                    let v: f64 = rng.gen_range(-3.0..3.0);
                    trip.push((r, c, v));
                    if r != c {
                        trip.push((c, r, v));
                    }
                }
            }
        }
        let h = SparseMatrix::from_triplets(8, &trip).unwrap();
        assert_eq!(decompose_entrywise(&h).unwrap().reconstruct().max_abs_diff(&h), 0.0);
    }

    #[test]
    fn asymmetric_rejected() {
        let a = SparseMatrix::from_triplets(2, &[(0, 1, 1.0)]).unwrap();
        assert!(decompose_entrywise(&a).is_err());
    }
}
