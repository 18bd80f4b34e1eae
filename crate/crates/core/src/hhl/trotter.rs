//! Time evolution `e^{iHt}`: Trotter products of Pauli exponentials and the
//! exact eigendecomposition oracle.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lcu::PauliString;
use crate::sparse::SparseMatrix;

pub type CMatrix = DMatrix<Complex64>;

/// Left-multiplies `m` by `exp(i theta P) = cos(theta) I + i sin(theta) P`.
pub fn apply_pauli_exponential(m: &mut CMatrix, p: &PauliString, theta: f64) {
    let (s, c) = theta.sin_cos();
    let is = Complex64::new(0.0, s);
    let src = m.clone();
    let dim = m.nrows();
    for r in 0..dim {
        let col = p.column(r as u64) as usize;
        let e = p.entry(r as u64);
        for j in 0..m.ncols() {
            m[(r, j)] = c * src[(r, j)] + is * e * src[(col, j)];
        }
    }
}

/// `(prod_j exp(i alpha_j t / r P_j))^r` with strings applied in descending
/// `|alpha|` order within each step.
pub fn build_trotter_unitary(terms: &[(PauliString, f64)], n: u32, t: f64, r: usize) -> Result<CMatrix> {
    if r < 1 {
        return Err(Error::Config("Trotter step count must be at least 1".into()));
    }
    if !(t > 0.0) {
        return Err(Error::Config(format!("evolution time must be positive, got {t}")));
    }
    let dim = 1usize << n;
    let mut order: Vec<&(PauliString, f64)> = terms.iter().collect();
    order.sort_by(|a, b| b.1.abs().total_cmp(&a.1.abs()));
    let mut step = CMatrix::identity(dim, dim);
    let dt = t / r as f64;
    for (p, alpha) in order {
        if p.n != n {
            return Err(Error::Dimension(format!("string {p} does not act on {n} qubits")));
        }
        apply_pauli_exponential(&mut step, p, alpha * dt);
    }
    Ok(matrix_power(&step, r))
}

/// `m^k` by binary exponentiation.
pub fn matrix_power(m: &CMatrix, mut k: usize) -> CMatrix {
    let dim = m.nrows();
    let mut result = CMatrix::identity(dim, dim);
    let mut base = m.clone();
    let mut first = true;
    while k > 0 {
        if k & 1 == 1 {
            result = if first { base.clone() } else { &result * &base };
            first = false;
        }
        k >>= 1;
        if k > 0 {
            base = &base * &base;
        }
    }
    result
}

/// `e^{iHt}` from the real symmetric eigendecomposition of `H`.
pub fn exact_unitary(h: &SparseMatrix, t: f64) -> Result<CMatrix> {
    if !h.is_symmetric() {
        return Err(Error::Contract("exact_unitary needs a symmetric matrix".into()));
    }
    let eig = SymmetricEigen::new(h.to_dense());
    let v: CMatrix = eig.eigenvectors.map(|x| Complex64::new(x, 0.0));
    let phases = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| Complex64::from_polar(1.0, l * t)));
    Ok(&v * phases * v.transpose())
}

/// Spectral norm of a complex matrix.
pub fn spectral_norm(m: &CMatrix) -> f64 {
    m.clone().singular_values().max()
}

/// Max-norm deviation of `U^H U` from the identity.
pub fn unitarity_error(u: &CMatrix) -> f64 {
    let dim = u.nrows();
    let p = u.adjoint() * u;
    (p - CMatrix::identity(dim, dim))
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_generator_gives_global_phase() {
        let u = build_trotter_unitary(&[(PauliString::identity(2), 1.0)], 2, 0.7, 3).unwrap();
        let expect = CMatrix::identity(4, 4) * Complex64::from_polar(1.0, 0.7);
        assert!((u - expect).iter().all(|z| z.norm() < 1e-14));
    }

    #[test]
    fn single_z_quarter_turn() {
        let z: PauliString = "Z".parse().unwrap();
        let u = build_trotter_unitary(&[(z, 1.0)], 1, PI / 2.0, 1).unwrap();
        let expect = CMatrix::from_row_slice(2, 2, &[c(0.0, 1.0), c(0.0, 0.0), c(0.0, 0.0), c(0.0, -1.0)]);
        assert!((u - expect).iter().all(|z| z.norm() < 1e-15));
    }

    #[test]
    fn exact_unitary_oracles() {
        let zero = SparseMatrix::from_triplets(2, &[(0, 0, 0.0)]).unwrap();
        let u = exact_unitary(&zero, 1.3).unwrap();
        assert!((u - CMatrix::identity(2, 2)).iter().all(|z| z.norm() < 1e-15));
        let z = SparseMatrix::from_triplets(2, &[(0, 0, 1.0), (1, 1, -1.0)]).unwrap();
        let u = exact_unitary(&z, PI).unwrap();
        assert!((u[(0, 0)] - c(-1.0, 0.0)).norm() < 1e-14);
        assert!((u[(1, 1)] - c(-1.0, 0.0)).norm() < 1e-14);
        assert!(unitarity_error(&u) < 1e-12);
    }

    #[test]
    fn commuting_terms_are_exact() {
        let zz: PauliString = "ZZ".parse().unwrap();
        let zi: PauliString = "ZI".parse().unwrap();
        let h = SparseMatrix::from_triplets(4, &[(0, 0, 1.5), (1, 1, 0.5), (2, 2, -1.5), (3, 3, -0.5)]).unwrap();
        let u = build_trotter_unitary(&[(zz, 0.5), (zi, 1.0)], 2, 0.9, 1).unwrap();
        let e = exact_unitary(&h, 0.9).unwrap();
        assert!(spectral_norm(&(u - e)) < 1e-14);
    }

    #[test]
    fn matrix_power_matches_repeated_product() {
        let x: PauliString = "X".parse().unwrap();
        let step = build_trotter_unitary(&[(x, 0.3)], 1, 1.0, 1).unwrap();
        let p7 = matrix_power(&step, 7);
        let mut q = CMatrix::identity(2, 2);
        for _ in 0..7 {
            q = &q * &step;
        }
        assert!((p7 - q).iter().all(|z| z.norm() < 1e-14));
        assert!(build_trotter_unitary(&[], 1, 1.0, 0).is_err());
    }
}
