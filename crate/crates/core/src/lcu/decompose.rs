//! Symmetrization, cluster discovery and the trace / Hadamard decompositions.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lcu::cluster::build_cluster;
use crate::lcu::template::{LcuTemplate, Pattern};
use crate::sparse::SparseMatrix;

/// Largest qubit count for which the automatic trace scan covers all `4^n` strings.
pub const FULL_TRACE_MAX_QUBITS: u32 = 6;

/// Hard ceiling for an explicitly requested full trace scan.
pub const FULL_TRACE_LIMIT_QUBITS: u32 = 10;

/// Which strings the trace method evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum TraceScan {
    /// Full scan up to [`FULL_TRACE_MAX_QUBITS`], pattern masks beyond.
    #[default]
    Auto,
    /// Every one of the `4^n` strings.
    Full,
    /// Only strings whose X mask occurs in the matrix pattern.
    PatternMasks,
}

/// `H = [[0, A], [A^T, 0]]`, keeping every stored entry of `A` (zeros included).
pub fn symmetrize(a: &SparseMatrix) -> SparseMatrix {
    let n = a.rank();
    let mut trip = Vec::with_capacity(2 * a.nnz());
    for (r, c, v) in a.entries() {
        trip.push((r, n + c, v));
        trip.push((n + c, r, v));
    }
    SparseMatrix::from_triplets(2 * n, &trip).expect("symmetrized entries are in range")
}

/// Upper-right block of a symmetrized matrix.
pub fn unsymmetrize(h: &SparseMatrix) -> Result<SparseMatrix> {
    let n = h.rank() / 2;
    if h.rank() != 2 * n {
        return Err(Error::Dimension(format!("rank {} is odd", h.rank())));
    }
    let trip: Vec<_> = h
        .entries()
        .filter(|&(r, c, _)| r < n && c >= n)
        .map(|(r, c, v)| (r, c - n, v))
        .collect();
    SparseMatrix::from_triplets(n, &trip)
}

/// Qubit count of a power-of-two rank.
pub fn qubits_for(rank: usize) -> Result<u32> {
    if rank == 0 || !rank.is_power_of_two() {
        return Err(Error::Dimension(format!("rank {rank} is not a power of two")));
    }
    Ok(rank.trailing_zeros())
}

/// Sorted distinct `row ^ col` over the stored entries.
pub fn find_clusters(h: &SparseMatrix) -> Result<Vec<u64>> {
    qubits_for(h.rank())?;
    let mut masks: Vec<u64> = h.entries().map(|(r, c, _)| (r ^ c) as u64).collect();
    masks.sort_unstable();
    masks.dedup();
    Ok(masks)
}

fn require_symmetric(h: &SparseMatrix) -> Result<u32> {
    let n = qubits_for(h.rank())?;
    if !h.is_symmetric() {
        return Err(Error::Contract(
            "matrix is not symmetric; symmetrize it before decomposing".into(),
        ));
    }
    Ok(n)
}

/// Decomposition by cluster discovery and the grand-sum coefficient solve.
pub fn decompose_hadamard(h: &SparseMatrix) -> Result<LcuTemplate> {
    let n = require_symmetric(h)?;
    let masks = find_clusters(h)?;
    let clusters = if h.rank() >= 1024 {
        masks.par_iter().map(|&m| build_cluster(m, n)).collect()
    } else {
        masks.iter().map(|&m| build_cluster(m, n)).collect()
    };
    let mut t = LcuTemplate::from_parts(n, clusters, Pattern::of(h), None)?;
    t.reevaluate(h)?;
    Ok(t)
}

/// Decomposition by `alpha = Tr(P H) / 2^n`, one string at a time.
///
/// The result carries the same clusters as [`decompose_hadamard`], with
/// coefficients from the trace formula. With a full scan every string outside
/// the pattern masks is evaluated too and must vanish; odd-Y strings must
/// vanish for a symmetric matrix.
pub fn decompose_trace(h: &SparseMatrix, scan: TraceScan) -> Result<LcuTemplate> {
    let n = require_symmetric(h)?;
    let full = match scan {
        TraceScan::Auto => n <= FULL_TRACE_MAX_QUBITS,
        TraceScan::Full => {
            if n > FULL_TRACE_LIMIT_QUBITS {
                return Err(Error::Config(format!(
                    "full trace scan over 4^{n} strings refused (limit n <= {FULL_TRACE_LIMIT_QUBITS})"
                )));
            }
            true
        }
        TraceScan::PatternMasks => false,
    };
    let masks = find_clusters(h)?;
    let dim = 1u64 << n;
    let scan_masks: Vec<u64> = if full { (0..dim).collect() } else { masks.clone() };

    let mut clusters = Vec::with_capacity(masks.len());
    let mut coefficients = Vec::new();
    let mut g = vec![0.0; dim as usize];
    for x in scan_masks {
        // g[r] = H[r ^ x][r]; the string's entry at (r, r ^ x) multiplies it in the trace
        for (r, slot) in g.iter_mut().enumerate() {
            *slot = h.get(r ^ x as usize, r);
        }
        let in_pattern = masks.binary_search(&x).is_ok();
        let mut alphas = Vec::new();
        for z in 0..dim {
            let mut s = 0.0;
            for (r, &v) in g.iter().enumerate() {
                if (z & (r as u64 ^ x)).count_ones() & 1 == 0 {
                    s += v;
                } else {
                    s -= v;
                }
            }
            let y = (x & z).count_ones();
            // phase i^y: real for even y, imaginary for odd y
            let alpha = if y % 4 < 2 { s } else { -s } / dim as f64;
            if y % 2 == 1 || !in_pattern {
                if alpha.abs() > 1e-12 {
                    return Err(Error::Contract(format!(
                        "string x={x:#b} z={z:#b} has coefficient {alpha:e} outside the real pattern decomposition"
                    )));
                }
                continue;
            }
            alphas.push(alpha);
        }
        if in_pattern {
            clusters.push(build_cluster(x, n));
            coefficients.extend(alphas);
        }
    }
    LcuTemplate::from_parts(n, clusters, Pattern::of(h), Some(coefficients))
}
