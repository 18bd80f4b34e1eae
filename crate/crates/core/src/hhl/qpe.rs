//! Phase estimation on the clock register and the eigenvalue-inversion rotations.

use nalgebra::DVector;
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::hhl::precision::Precision;
use crate::hhl::state::StateVector;
use crate::hhl::trotter::CMatrix;

/// `U^(2^c)` for every clock bit `c`, by repeated squaring.
pub fn controlled_powers(u: &CMatrix, n_clock: u32) -> Vec<CMatrix> {
    let mut powers = Vec::with_capacity(n_clock as usize);
    let mut p = u.clone();
    for c in 0..n_clock {
        if c > 0 {
            p = &p * &p;
        }
        powers.push(p.clone());
    }
    powers
}

fn check_dims(state: &StateVector, u: &CMatrix) -> Result<()> {
    let n = state.input_len();
    if u.nrows() != n || u.ncols() != n {
        return Err(Error::Dimension(format!(
            "unitary is {}x{} but the input register has {n} amplitudes",
            u.nrows(),
            u.ncols()
        )));
    }
    Ok(())
}

/// Hadamard on every clock qubit (the clock axis is an `M`-point Walsh transform).
fn hadamard_clock(state: &mut StateVector) {
    let n_in = state.input_len();
    let m = state.clock_len();
    let scale = 1.0 / (m as f64).sqrt();
    for anc in 0..2 {
        let base = state.offset(anc, 0);
        let block = &mut state.amps[base..base + m * n_in];
        let mut h = 1;
        while h < m {
            for k in 0..m {
                if k & h == 0 {
                    for i in 0..n_in {
                        let (a, b) = (block[k * n_in + i], block[(k | h) * n_in + i]);
                        block[k * n_in + i] = a + b;
                        block[(k | h) * n_in + i] = a - b;
                    }
                }
            }
            h <<= 1;
        }
        block.iter_mut().for_each(|z| *z *= scale);
    }
}

/// Applies `powers[c]` to the input slice of every clock code with bit `c` set.
fn controlled_evolution(state: &mut StateVector, powers: &[CMatrix]) {
    for (c, p) in powers.iter().enumerate() {
        for anc in 0..2 {
            for k in 0..state.clock_len() {
                if k >> c & 1 == 0 {
                    continue;
                }
                let slice = state.slice_mut(anc, k);
                if slice.iter().all(|z| z.norm_sqr() == 0.0) {
                    continue;
                }
                let v = p * DVector::from_column_slice(slice);
                slice.copy_from_slice(v.as_slice());
            }
        }
    }
}

/// Fourier transform along the clock axis: `inverse = true` is the inverse QFT.
fn clock_fourier(state: &mut StateVector, inverse: bool) {
    let m = state.clock_len();
    let n_in = state.input_len();
    let mut planner = FftPlanner::new();
    // inverse QFT has kernel e^{-2 pi i jk/M}: rustfft's forward transform
    let fft = if inverse {
        planner.plan_fft_forward(m)
    } else {
        planner.plan_fft_inverse(m)
    };
    let scale = 1.0 / (m as f64).sqrt();
    let mut buf = vec![Complex64::new(0.0, 0.0); m];
    for anc in 0..2 {
        for i in 0..n_in {
            let base = state.offset(anc, 0) + i;
            for (k, b) in buf.iter_mut().enumerate() {
                *b = state.amps[base + k * n_in];
            }
            if buf.iter().all(|z| z.norm_sqr() == 0.0) {
                continue;
            }
            fft.process(&mut buf);
            for (k, b) in buf.iter().enumerate() {
                state.amps[base + k * n_in] = b * scale;
            }
        }
    }
}

/// Forward phase estimation: Hadamards, controlled powers, inverse QFT.
pub fn apply_qpe(state: &mut StateVector, u: &CMatrix) -> Result<()> {
    check_dims(state, u)?;
    let powers = controlled_powers(u, state.n_clock);
    apply_qpe_with_powers(state, &powers);
    Ok(())
}

pub(crate) fn apply_qpe_with_powers(state: &mut StateVector, powers: &[CMatrix]) {
    hadamard_clock(state);
    controlled_evolution(state, powers);
    clock_fourier(state, true);
}

/// Uncomputes [`apply_qpe`]: QFT, controlled inverse powers, Hadamards.
pub fn apply_inverse_qpe(state: &mut StateVector, u: &CMatrix) -> Result<()> {
    check_dims(state, u)?;
    let powers = controlled_powers(u, state.n_clock);
    apply_inverse_qpe_with_powers(state, &powers);
    Ok(())
}

pub(crate) fn apply_inverse_qpe_with_powers(state: &mut StateVector, powers: &[CMatrix]) {
    clock_fourier(state, false);
    let adjoints: Vec<CMatrix> = powers.iter().map(|p| p.adjoint()).collect();
    controlled_evolution(state, &adjoints);
    hadamard_clock(state);
}

/// Probability of each clock code, summed over input and ancilla.
pub fn clock_marginals(state: &StateVector) -> Vec<f64> {
    (0..state.clock_len())
        .map(|k| {
            (0..2)
                .map(|a| state.slice(a, k).iter().map(|z| z.norm_sqr()).sum::<f64>())
                .sum()
        })
        .collect()
}

/// Ancilla rotations `R_y(2 asin(C / lambda_k))` conditioned on each clock
/// code `k != 0` whose marginal reaches `prune_limit` (0 disables pruning).
/// Returns the number of rotations applied.
pub fn apply_eigeninversion(state: &mut StateVector, precision: &Precision, c: f64, prune_limit: f64) -> Result<usize> {
    if state.n_clock != precision.n_clock() {
        return Err(Error::Dimension(format!(
            "clock register has {} qubits, precision {precision} needs {}",
            state.n_clock,
            precision.n_clock()
        )));
    }
    let marginals = clock_marginals(state);
    let mut applied = 0;
    for (k, &p) in marginals.iter().enumerate().skip(1) {
        if prune_limit > 0.0 && p < prune_limit {
            continue;
        }
        let ratio = c / precision.code_value(k);
        if ratio.abs() > 1.0 {
            return Err(Error::Config(format!(
                "rotation constant {c} exceeds eigenvalue code {k}"
            )));
        }
        let half = ratio.asin();
        let (s, co) = half.sin_cos();
        let lo = state.offset(0, k);
        let hi = state.offset(1, k);
        for i in 0..state.input_len() {
            let (a0, a1) = (state.amps[lo + i], state.amps[hi + i]);
            state.amps[lo + i] = a0 * co - a1 * s;
            state.amps[hi + i] = a0 * s + a1 * co;
        }
        applied += 1;
    }
    Ok(applied)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn identity_leaves_clock_at_zero() {
        let mut s = StateVector::with_input(&[0.6, 0.8], 4).unwrap();
        apply_qpe(&mut s, &CMatrix::identity(2, 2)).unwrap();
        let m = clock_marginals(&s);
        assert!((m[0] - 1.0).abs() < 1e-12);
        assert!((s.norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exact_phases_give_one_hot_clock() {
        let nc = 6;
        let mc = 1usize << nc;
        for k in 0..mc {
            let phase = 2.0 * std::f64::consts::PI * k as f64 / mc as f64;
            let u = CMatrix::from_row_slice(
                2,
                2,
                &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), Complex64::from_polar(1.0, phase)],
            );
            let mut s = StateVector::with_input(&[0.0, 1.0], nc).unwrap();
            apply_qpe(&mut s, &u).unwrap();
            let m = clock_marginals(&s);
            assert!((m[k] - 1.0).abs() < 1e-10, "k = {k}: {}", m[k]);
        }
    }

    #[test]
    fn uniform_clock_marginals() {
        let mut s = StateVector::with_input(&[1.0], 3).unwrap();
        hadamard_clock(&mut s);
        for p in clock_marginals(&s) {
            assert!((p - 0.125).abs() < 1e-15);
        }
    }

    #[test]
    fn inverse_qpe_restores_state() {
        let phase = 0.37;
        let u = CMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::from_polar(1.0, -1.1),
                c(0.0, 0.0),
                c(0.0, 0.0),
                Complex64::from_polar(1.0, phase),
            ],
        );
        let start = StateVector::with_input(&[0.6, -0.8], 5).unwrap();
        let mut s = start.clone();
        apply_qpe(&mut s, &u).unwrap();
        assert!((s.norm() - 1.0).abs() < 1e-12);
        apply_inverse_qpe(&mut s, &u).unwrap();
        let err = s
            .amps
            .iter()
            .zip(&start.amps)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-10);
    }

    #[test]
    fn pruning_everything_applies_nothing() {
        let p = Precision::new(1, 2).unwrap();
        let mut s = StateVector::with_input(&[1.0, 0.0], p.n_clock()).unwrap();
        hadamard_clock(&mut s);
        let before = s.clone();
        assert_eq!(apply_eigeninversion(&mut s, &p, 0.25, 1.0).unwrap(), 0);
        assert_eq!(s, before);
        assert_eq!(apply_eigeninversion(&mut s, &p, 0.25, 0.0).unwrap(), 15);
        assert!((s.norm() - 1.0).abs() < 1e-12);
    }
}
