//! Pauli strings encoded as X/Z bit masks.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};

/// One of the four single-qubit Pauli matrices (identity included).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    /// The 2x2 matrix, row-major.
    pub fn matrix(self) -> [[Complex64; 2]; 2] {
        let o = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        match self {
            Pauli::I => [[one, o], [o, one]],
            Pauli::X => [[o, one], [one, o]],
            Pauli::Y => [[o, -i], [i, o]],
            Pauli::Z => [[one, o], [o, -one]],
        }
    }

    fn bits(self) -> (bool, bool) {
        match self {
            Pauli::I => (false, false),
            Pauli::X => (true, false),
            Pauli::Y => (true, true),
            Pauli::Z => (false, true),
        }
    }

    fn from_bits(x: bool, z: bool) -> Self {
        match (x, z) {
            (false, false) => Pauli::I,
            (true, false) => Pauli::X,
            (true, true) => Pauli::Y,
            (false, true) => Pauli::Z,
        }
    }
}

/// An `n`-qubit Pauli string.
///
/// Bit `q` of `x_mask` / `z_mask` carries the X / Z component of the symbol
/// acting on qubit `q`, and qubit `q` is bit `q` of a basis index. The textual
/// form is big-endian: the leftmost symbol acts on the highest qubit, matching
/// the order of the Kronecker product.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PauliString {
    pub n: u32,
    pub x_mask: u64,
    pub z_mask: u64,
}

impl PauliString {
    pub fn new(n: u32, x_mask: u64, z_mask: u64) -> Self {
        debug_assert!(n <= 63);
        let full = (1u64 << n) - 1;
        debug_assert!(x_mask & !full == 0 && z_mask & !full == 0);
        Self { n, x_mask, z_mask }
    }

    pub fn identity(n: u32) -> Self {
        Self::new(n, 0, 0)
    }

    pub fn symbol(&self, qubit: u32) -> Pauli {
        Pauli::from_bits(self.x_mask >> qubit & 1 == 1, self.z_mask >> qubit & 1 == 1)
    }

    pub fn y_count(&self) -> u32 {
        (self.x_mask & self.z_mask).count_ones()
    }

    /// Even number of Y factors: the matrix is real (and symmetric).
    pub fn is_real(&self) -> bool {
        self.y_count() % 2 == 0
    }

    /// Real sign of `i^(#Y)` for an even-Y string.
    fn y_phase_sign(&self) -> f64 {
        if self.y_count() % 4 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Column of the single nonzero in `row`.
    #[inline]
    pub fn column(&self, row: u64) -> u64 {
        row ^ self.x_mask
    }

    /// The nonzero entry in `row` as `i^(#Y) * (-1)^popcount(z & col)`.
    pub fn entry(&self, row: u64) -> Complex64 {
        let parity = (self.z_mask & self.column(row)).count_ones() & 1;
        let s = if parity == 0 { 1.0 } else { -1.0 };
        match self.y_count() % 4 {
            0 => Complex64::new(s, 0.0),
            1 => Complex64::new(0.0, s),
            2 => Complex64::new(-s, 0.0),
            _ => Complex64::new(0.0, -s),
        }
    }

    /// Real entry of an even-Y string in `row`, as +1 or -1.
    #[inline]
    pub fn real_entry(&self, row: u64) -> f64 {
        let parity = (self.z_mask & self.column(row)).count_ones() & 1;
        if parity == 0 {
            self.y_phase_sign()
        } else {
            -self.y_phase_sign()
        }
    }

    /// Entry in `row` evaluated as a product of single-qubit matrix entries.
    pub fn entry_by_kronecker(&self, row: u64) -> Complex64 {
        let col = self.column(row);
        (0..self.n).fold(Complex64::new(1.0, 0.0), |acc, q| {
            let m = self.symbol(q).matrix();
            acc * m[(row >> q & 1) as usize][(col >> q & 1) as usize]
        })
    }

    /// The string as a 1-sparse real matrix: entry `(col, value)` per row.
    pub fn string_matrix(&self) -> Result<Vec<(u64, f64)>> {
        if !self.is_real() {
            return Err(Error::Contract(format!(
                "{self} has an odd number of Y factors and is not a real matrix"
            )));
        }
        Ok((0..1u64 << self.n)
            .map(|r| (self.column(r), self.real_entry(r)))
            .collect())
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for q in (0..self.n).rev() {
            let c = match self.symbol(q) {
                Pauli::I => 'I',
                Pauli::X => 'X',
                Pauli::Y => 'Y',
                Pauli::Z => 'Z',
            };
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

impl FromStr for PauliString {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let n = s.chars().count() as u32;
        if n == 0 || n > 63 {
            return Err(Error::Parse(format!("Pauli string length {n} out of range")));
        }
        let (mut x, mut z) = (0u64, 0u64);
        for (pos, ch) in s.chars().enumerate() {
            let q = n - 1 - pos as u32;
            let (xb, zb) = match ch.to_ascii_uppercase() {
                'I' => Pauli::I,
                'X' => Pauli::X,
                'Y' => Pauli::Y,
                'Z' => Pauli::Z,
                other => return Err(Error::Parse(format!("bad Pauli symbol {other:?}"))),
            }
            .bits();
            x |= u64::from(xb) << q;
            z |= u64::from(zb) << q;
        }
        Ok(Self::new(n, x, z))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::DMatrix;

    fn kron(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
        a.kronecker(b)
    }

    fn pauli_dense(p: Pauli) -> DMatrix<Complex64> {
        let m = p.matrix();
        DMatrix::from_fn(2, 2, |r, c| m[r][c])
    }

    /// Explicit n-fold Kronecker product, highest qubit leftmost.
    fn kron_oracle(s: &PauliString) -> DMatrix<Complex64> {
        let mut acc = DMatrix::from_element(1, 1, Complex64::new(1.0, 0.0));
        for q in (0..s.n).rev() {
            acc = kron(&acc, &pauli_dense(s.symbol(q)));
        }
        acc
    }

    #[test]
    fn parse_and_display_round_trip() {
        for text in ["XIZY", "I", "ZZZ", "YXIZ"] {
            let p: PauliString = text.parse().unwrap();
            assert_eq!(p.to_string(), text);
        }
        let p: PauliString = "XZ".parse().unwrap();
        assert_eq!((p.x_mask, p.z_mask), (0b10, 0b01));
        assert!("XQ".parse::<PauliString>().is_err());
    }

    #[test]
    fn single_qubit_matrices() {
        let z: PauliString = "Z".parse().unwrap();
        assert_eq!(z.string_matrix().unwrap(), vec![(0, 1.0), (1, -1.0)]);
        let x: PauliString = "X".parse().unwrap();
        assert_eq!(x.string_matrix().unwrap(), vec![(1, 1.0), (0, 1.0)]);
        let y: PauliString = "Y".parse().unwrap();
        assert!(matches!(y.string_matrix(), Err(Error::Contract(_))));
    }

    #[test]
    fn yy_is_signed_antidiagonal() {
        let yy: PauliString = "YY".parse().unwrap();
        let m = yy.string_matrix().unwrap();
        assert_eq!(m, vec![(3, -1.0), (2, 1.0), (1, 1.0), (0, -1.0)]);
    }

    #[test]
    fn identity_string_is_identity() {
        let id = PauliString::identity(4);
        for (r, (c, v)) in id.string_matrix().unwrap().into_iter().enumerate() {
            assert_eq!((c, v), (r as u64, 1.0));
        }
    }

    #[test]
    fn entries_match_kronecker_oracle_exhaustively() {
        for n in 1..=4u32 {
            let dim = 1u64 << n;
            for x in 0..dim {
                for z in 0..dim {
                    let s = PauliString::new(n, x, z);
                    let dense = kron_oracle(&s);
                    for r in 0..dim {
                        let c = s.column(r);
                        assert_eq!(dense[(r as usize, c as usize)], s.entry(r), "{s} row {r}");
                        assert_eq!(s.entry_by_kronecker(r), s.entry(r));
                        let nnz = (0..dim)
                            .filter(|&cc| dense[(r as usize, cc as usize)].norm() > 0.0)
                            .count();
                        assert_eq!(nnz, 1);
                    }
                    if s.is_real() {
                        let m = s.string_matrix().unwrap();
                        for (r, (c, v)) in m.iter().enumerate() {
                            assert_eq!(dense[(r, *c as usize)], Complex64::new(*v, 0.0));
                            // even-Y strings are symmetric
                            assert_eq!(dense[(*c as usize, r)], Complex64::new(*v, 0.0));
                        }
                    }
                }
            }
        }
    }
}
