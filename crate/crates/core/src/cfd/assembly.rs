//! Finite-volume assembly of the momentum and pressure-correction systems.

use crate::cfd::mesh::{CaseConfig, SimpleState};
use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;

/// Velocity component selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Component {
    U,
    V,
}

/// A matrix with its right-hand side.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearSystem {
    pub matrix: SparseMatrix,
    pub rhs: Vec<f64>,
}

/// Link coefficients of one control volume.
#[derive(Debug, Clone, Copy, Default)]
struct Links {
    east: f64,
    west: f64,
    north: f64,
    south: f64,
    center: f64,
}

/// First-order upwind links from face diffusion conductances and mass fluxes
/// (fluxes positive in the +x / +y direction).
fn upwind_links(d: [f64; 4], f: [f64; 4]) -> Links {
    let [de, dw, dn, ds] = d;
    let [fe, fw, fn_, fs] = f;
    let east = de + (-fe).max(0.0);
    let west = dw + fw.max(0.0);
    let north = dn + (-fn_).max(0.0);
    let south = ds + fs.max(0.0);
    let imbalance = fe - fw + fn_ - fs;
    Links {
        east,
        west,
        north,
        south,
        center: east + west + north + south + imbalance.max(0.0),
    }
}

/// Assembles `a_P phi = sum_nb a_nb phi_nb + b` for one velocity component.
///
/// Neighbours that are boundary faces are moved to the right-hand side with
/// their Dirichlet value; wall-parallel walls at half a cell distance add a
/// doubled viscous conductance. Every interior neighbour link is stored even
/// when its coefficient is zero so the pattern never changes.
pub fn assemble_momentum(state: &SimpleState, config: &CaseConfig, component: Component) -> Result<LinearSystem> {
    if !state.is_finite() {
        return Err(Error::Assembly("non-finite field values".into()));
    }
    match component {
        Component::U => assemble_u(state, config),
        Component::V => assemble_v(state, config),
    }
}

fn assemble_u(s: &SimpleState, cfg: &CaseConfig) -> Result<LinearSystem> {
    let m = &s.mesh;
    let nc = m.nc;
    let (rho, mu) = (cfg.density, cfg.viscosity);
    let alpha = cfg.relax_velocity;
    let n = m.u_unknowns();
    let mut trip = Vec::with_capacity(5 * n);
    let mut rhs = vec![0.0; n];
    let dx_diff = mu * m.dy / m.dx;
    let dy_diff = mu * m.dx / m.dy;
    for j in 0..nc {
        for i in 1..nc {
            let row = m.u_unknown(i, j);
            let u = |ii: usize| s.u[m.u_at(ii, j)];
            let fe = rho * 0.5 * (u(i) + u(i + 1)) * m.dy;
            let fw = rho * 0.5 * (u(i - 1) + u(i)) * m.dy;
            let top = j == nc - 1;
            let bottom = j == 0;
            let fn_ = rho * 0.5 * (s.v[m.v_at(i - 1, j + 1)] + s.v[m.v_at(i, j + 1)]) * m.dx;
            let fs = rho * 0.5 * (s.v[m.v_at(i - 1, j)] + s.v[m.v_at(i, j)]) * m.dx;
            let dn = if top { 2.0 * dy_diff } else { dy_diff };
            let ds = if bottom { 2.0 * dy_diff } else { dy_diff };
            let l = upwind_links([dx_diff, dx_diff, dn, ds], [fe, fw, fn_, fs]);
            let ap = l.center / alpha;
            let mut b = (s.p[m.p_at(i - 1, j)] - s.p[m.p_at(i, j)]) * m.dy;
            b += (1.0 - alpha) * ap * u(i);

            // east / west: faces i = 0 and i = nc are walls with u = 0
            if i + 1 < nc {
                trip.push((row, m.u_unknown(i + 1, j), -l.east));
            }
            if i > 1 {
                trip.push((row, m.u_unknown(i - 1, j), -l.west));
            }
            if top {
                b += l.north * s.lid_velocity;
            } else {
                trip.push((row, m.u_unknown(i, j + 1), -l.north));
            }
            if !bottom {
                trip.push((row, m.u_unknown(i, j - 1), -l.south));
            }
            trip.push((row, row, ap));
            rhs[row] = b;
        }
    }
    Ok(LinearSystem {
        matrix: SparseMatrix::from_triplets(n, &trip)?,
        rhs,
    })
}

fn assemble_v(s: &SimpleState, cfg: &CaseConfig) -> Result<LinearSystem> {
    let m = &s.mesh;
    let nc = m.nc;
    let (rho, mu) = (cfg.density, cfg.viscosity);
    let alpha = cfg.relax_velocity;
    let n = m.v_unknowns();
    let mut trip = Vec::with_capacity(5 * n);
    let mut rhs = vec![0.0; n];
    let dx_diff = mu * m.dy / m.dx;
    let dy_diff = mu * m.dx / m.dy;
    for j in 1..nc {
        for i in 0..nc {
            let row = m.v_unknown(i, j);
            let v = |jj: usize| s.v[m.v_at(i, jj)];
            let fn_ = rho * 0.5 * (v(j) + v(j + 1)) * m.dx;
            let fs = rho * 0.5 * (v(j - 1) + v(j)) * m.dx;
            let east_wall = i == nc - 1;
            let west_wall = i == 0;
            let fe = rho * 0.5 * (s.u[m.u_at(i + 1, j - 1)] + s.u[m.u_at(i + 1, j)]) * m.dy;
            let fw = rho * 0.5 * (s.u[m.u_at(i, j - 1)] + s.u[m.u_at(i, j)]) * m.dy;
            let de = if east_wall { 2.0 * dx_diff } else { dx_diff };
            let dw = if west_wall { 2.0 * dx_diff } else { dx_diff };
            let l = upwind_links([de, dw, dy_diff, dy_diff], [fe, fw, fn_, fs]);
            let ap = l.center / alpha;
            let mut b = (s.p[m.p_at(i, j - 1)] - s.p[m.p_at(i, j)]) * m.dx;
            b += (1.0 - alpha) * ap * v(j);

            if !east_wall {
                trip.push((row, m.v_unknown(i + 1, j), -l.east));
            }
            if !west_wall {
                trip.push((row, m.v_unknown(i - 1, j), -l.west));
            }
            // north / south: faces j = nc and j = 0 are walls with v = 0
            if j + 1 < nc {
                trip.push((row, m.v_unknown(i, j + 1), -l.north));
            }
            if j > 1 {
                trip.push((row, m.v_unknown(i, j - 1), -l.south));
            }
            trip.push((row, row, ap));
            rhs[row] = b;
        }
    }
    Ok(LinearSystem {
        matrix: SparseMatrix::from_triplets(n, &trip)?,
        rhs,
    })
}

/// Velocity-correction coefficients `d = dy / a_P` (u) and `dx / a_P` (v),
/// stored on the full face arrays with zero on boundary faces.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrectionCoefficients {
    pub du: Vec<f64>,
    pub dv: Vec<f64>,
}

impl CorrectionCoefficients {
    pub fn new(state: &SimpleState, au_diag: &[f64], av_diag: &[f64]) -> Result<Self> {
        let m = &state.mesh;
        if au_diag.len() != m.u_unknowns() || av_diag.len() != m.v_unknowns() {
            return Err(Error::Dimension(
                "momentum diagonal lengths do not match the mesh".into(),
            ));
        }
        if let Some(bad) = au_diag.iter().chain(av_diag).find(|&&a| !(a > 0.0)) {
            return Err(Error::Assembly(format!("momentum diagonal {bad} is not positive")));
        }
        let mut du = vec![0.0; state.u.len()];
        let mut dv = vec![0.0; state.v.len()];
        for j in 0..m.nc {
            for i in 1..m.nc {
                du[m.u_at(i, j)] = m.dy / au_diag[m.u_unknown(i, j)];
            }
        }
        for j in 1..m.nc {
            for i in 0..m.nc {
                dv[m.v_at(i, j)] = m.dx / av_diag[m.v_unknown(i, j)];
            }
        }
        Ok(Self { du, dv })
    }
}

/// Assembles the pressure-correction system on the `nc x nc` cells.
///
/// Rows follow `a_P p'_P - sum_nb a_nb p'_nb = -(net mass outflow of u*, v*)`.
/// Cell 0 is the anchor: its neighbour links are stored as zeros and its
/// right-hand side is zero, pinning the additive pressure constant.
pub fn assemble_pressure_correction(
    state: &SimpleState,
    config: &CaseConfig,
    au_diag: &[f64],
    av_diag: &[f64],
) -> Result<LinearSystem> {
    let coeffs = CorrectionCoefficients::new(state, au_diag, av_diag)?;
    let m = &state.mesh;
    let nc = m.nc;
    let rho = config.density;
    let n = m.pressure_unknowns();
    let residual = state.continuity_residual(rho);
    let mut trip = Vec::with_capacity(5 * n);
    let mut rhs = vec![0.0; n];
    for j in 0..nc {
        for i in 0..nc {
            let k = m.p_at(i, j);
            let anchor = k == 0;
            let mut links: Vec<(usize, f64)> = Vec::with_capacity(4);
            if i + 1 < nc {
                links.push((m.p_at(i + 1, j), rho * m.dy * coeffs.du[m.u_at(i + 1, j)]));
            }
            if i > 0 {
                links.push((m.p_at(i - 1, j), rho * m.dy * coeffs.du[m.u_at(i, j)]));
            }
            if j + 1 < nc {
                links.push((m.p_at(i, j + 1), rho * m.dx * coeffs.dv[m.v_at(i, j + 1)]));
            }
            if j > 0 {
                links.push((m.p_at(i, j - 1), rho * m.dx * coeffs.dv[m.v_at(i, j)]));
            }
            let ap: f64 = links.iter().map(|&(_, a)| a).sum();
            for (col, a) in links {
                trip.push((k, col, if anchor { 0.0 } else { -a }));
            }
            trip.push((k, k, ap));
            rhs[k] = if anchor { 0.0 } else { -residual[k] };
        }
    }
    Ok(LinearSystem {
        matrix: SparseMatrix::from_triplets(n, &trip)?,
        rhs,
    })
}

/// Applies the pressure correction to velocities and pressure.
///
/// Boundary faces keep their Dirichlet values because their coefficients are zero.
pub fn correct_fields(
    state: &SimpleState,
    config: &CaseConfig,
    p_corr: &[f64],
    au_diag: &[f64],
    av_diag: &[f64],
) -> Result<SimpleState> {
    let m = state.mesh;
    if p_corr.len() != m.pressure_unknowns() {
        return Err(Error::Dimension(
            "pressure correction length does not match mesh".into(),
        ));
    }
    if p_corr.iter().any(|x| !x.is_finite()) {
        return Err(Error::Assembly("non-finite pressure correction".into()));
    }
    let coeffs = CorrectionCoefficients::new(state, au_diag, av_diag)?;
    let mut next = state.clone();
    for j in 0..m.nc {
        for i in 1..m.nc {
            let f = m.u_at(i, j);
            next.u[f] -= coeffs.du[f] * (p_corr[m.p_at(i, j)] - p_corr[m.p_at(i - 1, j)]);
        }
    }
    for j in 1..m.nc {
        for i in 0..m.nc {
            let f = m.v_at(i, j);
            next.v[f] -= coeffs.dv[f] * (p_corr[m.p_at(i, j)] - p_corr[m.p_at(i, j - 1)]);
        }
    }
    for (p, dp) in next.p.iter_mut().zip(p_corr) {
        *p += config.relax_pressure * dp;
    }
    Ok(next)
}
