//! Register layout and the binary-tree amplitude loader.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::sparse::norm2;

/// Full HHL register: input (low bits), clock, then one ancilla (high bit).
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    pub n_in: u32,
    pub n_clock: u32,
    pub amps: Vec<Complex64>,
}

impl StateVector {
    /// `|ancilla=0, clock=0, input>` with the given input amplitudes.
    pub fn with_input(input: &[f64], n_clock: u32) -> Result<Self> {
        let len = input.len();
        if len == 0 || !len.is_power_of_two() {
            return Err(Error::Dimension(format!("input length {len} is not a power of two")));
        }
        let n_in = len.trailing_zeros();
        let mut amps = vec![Complex64::new(0.0, 0.0); 2 << (n_in + n_clock)];
        for (a, &v) in amps.iter_mut().zip(input) {
            *a = Complex64::new(v, 0.0);
        }
        Ok(Self { n_in, n_clock, amps })
    }

    pub fn input_len(&self) -> usize {
        1 << self.n_in
    }

    pub fn clock_len(&self) -> usize {
        1 << self.n_clock
    }

    /// Start of the input slice for (ancilla, clock).
    #[inline]
    pub fn offset(&self, ancilla: usize, clock: usize) -> usize {
        (clock << self.n_in) + (ancilla << (self.n_in + self.n_clock))
    }

    pub fn slice(&self, ancilla: usize, clock: usize) -> &[Complex64] {
        let o = self.offset(ancilla, clock);
        &self.amps[o..o + self.input_len()]
    }

    pub fn slice_mut(&mut self, ancilla: usize, clock: usize) -> &mut [Complex64] {
        let o = self.offset(ancilla, clock);
        let n = self.input_len();
        &mut self.amps[o..o + n]
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Probability of the ancilla reading 1.
    pub fn ancilla_probability(&self) -> f64 {
        let half = self.amps.len() / 2;
        self.amps[half..].iter().map(|a| a.norm_sqr()).sum()
    }
}

/// Angle tree of the divide-and-conquer loader. Level `l` holds `2^l`
/// rotation angles for qubit `n - 1 - l`, indexed by the higher-bit prefix.
pub fn loader_angles(b: &[f64]) -> Result<Vec<Vec<f64>>> {
    let len = b.len();
    if len == 0 || !len.is_power_of_two() {
        return Err(Error::Dimension(format!("vector length {len} is not a power of two")));
    }
    if norm2(b) == 0.0 || !b.iter().all(|v| v.is_finite()) {
        return Err(Error::Normalization("cannot load a zero or non-finite vector".into()));
    }
    let n = len.trailing_zeros() as usize;
    // norms[l][p]: norm of the block of b under prefix p at depth l
    let mut norms = vec![b.iter().map(|v| v * v).collect::<Vec<f64>>()];
    for _ in 0..n {
        let last = norms.last().unwrap();
        norms.push(last.chunks(2).map(|c| c[0] + c[1]).collect());
    }
    norms.reverse();
    let mut angles = Vec::with_capacity(n);
    for level in 0..n {
        let children = &norms[level + 1];
        let leaf = level + 1 == n;
        angles.push(
            (0..1usize << level)
                .map(|p| {
                    let (l, r) = (2 * p, 2 * p + 1);
                    if leaf {
                        // signed leaves: cos/sin carry the signs of b
                        2.0 * b[r].atan2(b[l])
                    } else {
                        2.0 * children[r].sqrt().atan2(children[l].sqrt())
                    }
                })
                .collect(),
        );
    }
    Ok(angles)
}

/// Loads `b / |b|` by applying the uniformly controlled R_y rotations of the
/// angle tree to `|0...0>`, most significant qubit first.
pub fn prepare_state(b: &[f64]) -> Result<Vec<f64>> {
    let angles = loader_angles(b)?;
    let len = b.len();
    let n = len.trailing_zeros();
    let mut amps = vec![0.0; len];
    amps[0] = 1.0;
    if n == 0 {
        amps[0] = b[0].signum();
        return Ok(amps);
    }
    for (level, row) in angles.iter().enumerate() {
        let q = n - 1 - level as u32;
        let bit = 1usize << q;
        for base in 0..len {
            if base & bit != 0 {
                continue;
            }
            let prefix = base >> (q + 1);
            let (s, c) = (row[prefix] / 2.0).sin_cos();
            let (a0, a1) = (amps[base], amps[base | bit]);
            amps[base] = c * a0 - s * a1;
            amps[base | bit] = s * a0 + c * a1;
        }
    }
    Ok(amps)
}
