//! The HHL pipeline: load, estimate, invert, uncompute, project, rescale.

use std::time::Instant;

use crate::error::{Error, Result};
use crate::hhl::precision::Precision;
use crate::hhl::qpe::{
    apply_eigeninversion, apply_inverse_qpe_with_powers, apply_qpe_with_powers, clock_marginals, controlled_powers,
};
use crate::hhl::state::{prepare_state, StateVector};
use crate::hhl::trotter::build_trotter_unitary;
use crate::lcu::{symmetrize, LcuTemplate};
use crate::sparse::{norm2, SparseMatrix};

/// Success probabilities below this make the solution numerically invisible.
pub const MIN_SUCCESS_PROBABILITY: f64 = 1e-30;

pub const DIAGNOSTICS_CSV_HEADER: &str =
    "precision,n_clock,trotter_r,C,prune_limit,rotations,E,fidelity,l2,rms,seconds";

#[derive(Debug, Clone, PartialEq)]
pub struct HhlConfig {
    pub precision: Precision,
    pub trotter_steps: usize,
    /// Rotation constant; `None` uses `2^-n`.
    pub rotation_constant: Option<f64>,
    /// Clock-marginal prune limit; 0 applies every rotation.
    pub prune_limit: f64,
    /// Strings with `|alpha|` below this are left out of the evolution.
    pub coefficient_limit: f64,
}

impl HhlConfig {
    pub fn new(precision: Precision) -> Self {
        Self {
            precision,
            trotter_steps: 64,
            rotation_constant: None,
            prune_limit: 0.0,
            coefficient_limit: 0.0,
        }
    }

    pub fn rotation_constant(&self) -> f64 {
        self.rotation_constant.unwrap_or_else(|| self.precision.resolution())
    }

    pub fn validate(&self) -> Result<()> {
        if self.trotter_steps < 1 {
            return Err(Error::Config("trotter_steps must be at least 1".into()));
        }
        let c = self.rotation_constant();
        if !(c > 0.0 && c <= self.precision.resolution()) {
            return Err(Error::Config(format!(
                "rotation constant {c} must lie in (0, 2^-{}]",
                self.precision.n
            )));
        }
        if !(self.prune_limit >= 0.0) || !(self.coefficient_limit >= 0.0) {
            return Err(Error::Config("limits must be non-negative".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HhlResult {
    /// Dimensional solution.
    pub x: Vec<f64>,
    /// Normalized solution block.
    pub x_hat: Vec<f64>,
    /// Probability of measuring the ancilla in |1>.
    pub e: f64,
    /// Part of `e` with the clock returned to |0>; used for re-dimensionalization.
    pub e_solution: f64,
    pub rotations_applied: usize,
    /// Clock probability at code 0 after phase estimation (no rotation there).
    pub zero_code_probability: f64,
    pub fidelity: Option<f64>,
    pub l2: Option<f64>,
    pub rms: Option<f64>,
    pub seconds: f64,
}

impl HhlResult {
    pub fn csv_row(&self, config: &HhlConfig) -> String {
        let opt = |v: Option<f64>| v.map(|x| format!("{x:e}")).unwrap_or_default();
        let p = &config.precision;
        format!(
            "{p},{},{},{:e},{:e},{},{:e},{},{},{},{:.6}",
            p.n_clock(),
            config.trotter_steps,
            config.rotation_constant(),
            config.prune_limit,
            self.rotations_applied,
            self.e,
            opt(self.fidelity),
            opt(self.l2),
            opt(self.rms),
            self.seconds
        )
    }
}

fn normalized(x: &[f64]) -> Result<Vec<f64>> {
    let n = norm2(x);
    if n == 0.0 || !n.is_finite() {
        return Err(Error::Normalization(
            "cannot normalize a zero or non-finite vector".into(),
        ));
    }
    Ok(x.iter().map(|v| v / n).collect())
}

/// `|<a|b>|` of the normalized vectors.
pub fn fidelity(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Dimension(format!("lengths {} and {} differ", a.len(), b.len())));
    }
    let (a, b) = (normalized(a)?, normalized(b)?);
    Ok(a.iter().zip(&b).map(|(x, y)| x * y).sum::<f64>().abs())
}

/// (L2, RMS) of the difference of the normalized vectors; RMS = L2 / sqrt(N).
pub fn error_norms(a: &[f64], b: &[f64]) -> Result<(f64, f64)> {
    if a.len() != b.len() {
        return Err(Error::Dimension(format!("lengths {} and {} differ", a.len(), b.len())));
    }
    let (a, b) = (normalized(a)?, normalized(b)?);
    let d: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x - y).collect();
    let l2 = norm2(&d);
    Ok((l2, l2 / (a.len() as f64).sqrt()))
}

/// Solves `A x = b` through the symmetrized system `H (0, x) = (b, 0)`.
///
/// `template` must decompose `symmetrize(A)` with current coefficients.
pub fn hhl_solve(
    a: &SparseMatrix,
    b: &[f64],
    config: &HhlConfig,
    template: &LcuTemplate,
    reference: Option<&[f64]>,
) -> Result<HhlResult> {
    let start = Instant::now();
    config.validate()?;
    let n = a.rank();
    if b.len() != n {
        return Err(Error::Dimension(format!("rhs length {} for rank {n}", b.len())));
    }
    let h = symmetrize(a);
    if !template.pattern().matches(&h) {
        return Err(Error::Pattern("template does not match the symmetrized matrix".into()));
    }
    let b_norm = norm2(b);
    let mut padded = b.to_vec();
    padded.resize(2 * n, 0.0);
    let input = prepare_state(&padded)?;

    let p = config.precision;
    let terms: Vec<_> = template
        .active_strings()
        .into_iter()
        .filter(|(_, alpha)| alpha.abs() >= config.coefficient_limit)
        .collect();
    let u = build_trotter_unitary(&terms, template.n, p.evolution_time(), config.trotter_steps)?;
    let powers = controlled_powers(&u, p.n_clock());

    let mut state = StateVector::with_input(&input, p.n_clock())?;
    apply_qpe_with_powers(&mut state, &powers);
    let zero_code_probability = clock_marginals(&state)[0];
    let c = config.rotation_constant();
    let rotations_applied = apply_eigeninversion(&mut state, &p, c, config.prune_limit)?;
    apply_inverse_qpe_with_powers(&mut state, &powers);

    let e = state.ancilla_probability();
    let solution = state.slice(1, 0);
    let e_solution: f64 = solution.iter().map(|z| z.norm_sqr()).sum();
    if e_solution < MIN_SUCCESS_PROBABILITY {
        return Err(Error::InvisibleSolution(e_solution));
    }
    let scale = e_solution.sqrt();
    let x_block: Vec<f64> = solution[n..].iter().map(|z| z.re / scale).collect();
    let factor = b_norm * scale / c;
    let x: Vec<f64> = x_block.iter().map(|v| v * factor).collect();
    let x_hat = normalized(&x_block).unwrap_or(x_block);

    let (fid, l2, rms) = match reference {
        Some(r) => {
            let (l2, rms) = error_norms(&x_hat, r)?;
            (Some(fidelity(&x_hat, r)?), Some(l2), Some(rms))
        }
        None => (None, None, None),
    };
    Ok(HhlResult {
        x,
        x_hat,
        e,
        e_solution,
        rotations_applied,
        zero_code_probability,
        fidelity: fid,
        l2,
        rms,
        seconds: start.elapsed().as_secs_f64(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lcu::decompose_hadamard;
    use crate::sparse::direct_solve;

    fn solve(a: &SparseMatrix, b: &[f64], prec: &str) -> HhlResult {
        let t = decompose_hadamard(&symmetrize(a)).unwrap();
        let reference = direct_solve(a, b).unwrap();
        hhl_solve(a, b, &HhlConfig::new(prec.parse().unwrap()), &t, Some(&reference)).unwrap()
    }

    #[test]
    fn identity_recovers_rhs() {
        for prec in ["1.1", "1.3", "2.2"] {
            let r = solve(&SparseMatrix::identity(2), &[3.0, 4.0], prec);
            assert!(
                (r.x[0] - 3.0).abs() < 1e-6 && (r.x[1] - 4.0).abs() < 1e-6,
                "{prec}: {:?}",
                r.x
            );
            assert!(r.fidelity.unwrap() >= 1.0 - 1e-9);
        }
    }

    #[test]
    fn representable_diagonal() {
        let a = SparseMatrix::from_triplets(2, &[(0, 0, 1.0), (1, 1, 2.0)]).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let r = solve(&a, &[h, h], "2.2");
        assert!(r.fidelity.unwrap() >= 1.0 - 1e-9);
        assert!(
            (r.x[0] - h).abs() < 1e-6 && (r.x[1] - h / 2.0).abs() < 1e-6,
            "{:?}",
            r.x
        );
        assert!(r.e > 0.0 && r.e <= 1.0);
        assert_eq!(r.rotations_applied, 31);
    }

    #[test]
    fn fidelity_and_norm_oracles() {
        assert!((fidelity(&[1.0, 2.0], &[2.0, 4.0]).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(error_norms(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), (0.0, 0.0));
        assert_eq!(fidelity(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), 0.0);
        let (l2, rms) = error_norms(&[1.0, 0.0], &[0.0, 1.0]).unwrap();
        assert!((l2 - 2f64.sqrt()).abs() < 1e-15 && (rms - 1.0).abs() < 1e-15);
        assert!(fidelity(&[0.0], &[1.0]).is_err());
        // RMS is L2 / sqrt(N)
        assert!((0.3507 / 128f64.sqrt() - 0.0310).abs() < 5e-5);
    }

    #[test]
    fn rotation_constant_bound_enforced() {
        let mut c = HhlConfig::new("1.2".parse().unwrap());
        c.rotation_constant = Some(0.5);
        assert!(c.validate().is_err());
        c.rotation_constant = Some(0.25);
        assert!(c.validate().is_ok());
    }

    #[test]
    fn csv_row_has_all_columns() {
        let r = solve(&SparseMatrix::identity(2), &[1.0, 1.0], "1.1");
        let row = r.csv_row(&HhlConfig::new("1.1".parse().unwrap()));
        assert_eq!(row.split(',').count(), DIAGNOSTICS_CSV_HEADER.split(',').count());
    }
}
