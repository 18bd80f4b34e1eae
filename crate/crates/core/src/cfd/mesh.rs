use crate::error::{Error, Result};

/// Physical and solver parameters of a lid-driven cavity case.
#[derive(Debug, Clone, PartialEq)]
pub struct CaseConfig {
    /// Coordinate mesh is `nodes_per_side x nodes_per_side`; must be `2^k + 1`, `k >= 2`.
    pub nodes_per_side: usize,
    pub density: f64,
    pub viscosity: f64,
    pub lid_velocity: f64,
    pub outer_max: usize,
    /// Convergence threshold on the RMS of the u, v and p updates.
    pub outer_tol: f64,
    pub gs_tol: f64,
    pub gs_max: usize,
    /// Momentum under-relaxation (1.0 applies full updates).
    pub relax_velocity: f64,
    /// Pressure under-relaxation (1.0 applies full corrections).
    pub relax_pressure: f64,
}

impl Default for CaseConfig {
    fn default() -> Self {
        Self {
            nodes_per_side: 5,
            density: 1.0,
            viscosity: 0.01,
            lid_velocity: 1.0,
            outer_max: 5000,
            outer_tol: 1e-12,
            gs_tol: 1e-13,
            gs_max: 1_000_000,
            relax_velocity: 0.7,
            relax_pressure: 0.11,
        }
    }
}

impl CaseConfig {
    pub fn with_nodes(nodes_per_side: usize) -> Self {
        Self {
            nodes_per_side,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.nodes_per_side;
        if n < 5 || !(n - 1).is_power_of_two() {
            return Err(Error::Config(format!(
                "nodes_per_side = {n} is not of the form 2^k + 1 with k >= 2"
            )));
        }
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::Config(format!("{name} must be positive and finite, got {v}")))
            }
        };
        positive("density", self.density)?;
        positive("viscosity", self.viscosity)?;
        positive("outer_tol", self.outer_tol)?;
        positive("gs_tol", self.gs_tol)?;
        if !(self.lid_velocity.is_finite() && self.lid_velocity >= 0.0) {
            return Err(Error::Config(format!(
                "lid_velocity must be finite and non-negative, got {}",
                self.lid_velocity
            )));
        }
        for (name, r) in [
            ("relax_velocity", self.relax_velocity),
            ("relax_pressure", self.relax_pressure),
        ] {
            if !(r > 0.0 && r <= 1.0) {
                return Err(Error::Config(format!("{name} must lie in (0, 1], got {r}")));
            }
        }
        if self.outer_max == 0 || self.gs_max == 0 {
            return Err(Error::Config("iteration limits must be at least 1".into()));
        }
        Ok(())
    }
}

/// Uniform staggered Cartesian mesh on the unit square.
///
/// Index maps (all row-major):
/// - u faces: `(nc + 1) x nc`, face `(i, j)` sits on the west side of cell `(i, j)`;
///   unknowns are the interior faces `1 <= i <= nc - 1`.
/// - v faces: `nc x (nc + 1)`, face `(i, j)` sits on the south side of cell `(i, j)`;
///   unknowns are `1 <= j <= nc - 1`.
/// - pressure cells: `nc x nc`, unknown `k = i + nc * j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StaggeredMesh {
    pub nc: usize,
    pub dx: f64,
    pub dy: f64,
}

impl StaggeredMesh {
    pub fn pressure_unknowns(&self) -> usize {
        self.nc * self.nc
    }

    pub fn u_unknowns(&self) -> usize {
        (self.nc - 1) * self.nc
    }

    pub fn v_unknowns(&self) -> usize {
        self.nc * (self.nc - 1)
    }

    /// Storage index of u face `(i, j)`, `0 <= i <= nc`.
    #[inline]
    pub fn u_at(&self, i: usize, j: usize) -> usize {
        i + (self.nc + 1) * j
    }

    /// Storage index of v face `(i, j)`, `0 <= j <= nc`.
    #[inline]
    pub fn v_at(&self, i: usize, j: usize) -> usize {
        i + self.nc * j
    }

    #[inline]
    pub fn p_at(&self, i: usize, j: usize) -> usize {
        i + self.nc * j
    }

    /// Unknown number of interior u face `(i, j)`.
    #[inline]
    pub fn u_unknown(&self, i: usize, j: usize) -> usize {
        (i - 1) + (self.nc - 1) * j
    }

    /// Unknown number of interior v face `(i, j)`.
    #[inline]
    pub fn v_unknown(&self, i: usize, j: usize) -> usize {
        i + self.nc * (j - 1)
    }
}

pub fn build_mesh(config: &CaseConfig) -> Result<StaggeredMesh> {
    config.validate()?;
    let nc = config.nodes_per_side - 1;
    let h = 1.0 / nc as f64;
    Ok(StaggeredMesh { nc, dx: h, dy: h })
}

/// Staggered flow fields.
///
/// Boundary faces hold their Dirichlet values (zero normal velocity on every
/// wall); the moving lid enters through `lid_velocity` as a wall condition on
/// the top row of u control volumes.
#[derive(Debug, Clone, PartialEq)]
pub struct SimpleState {
    pub mesh: StaggeredMesh,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub p: Vec<f64>,
    pub lid_velocity: f64,
    pub outer_iteration: usize,
}

impl SimpleState {
    /// Quiescent initial state.
    pub fn new(mesh: StaggeredMesh, lid_velocity: f64) -> Self {
        let nc = mesh.nc;
        Self {
            mesh,
            u: vec![0.0; (nc + 1) * nc],
            v: vec![0.0; nc * (nc + 1)],
            p: vec![0.0; nc * nc],
            lid_velocity,
            outer_iteration: 0,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.u.iter().chain(&self.v).chain(&self.p).all(|x| x.is_finite())
    }

    /// Interior u values in unknown order.
    pub fn u_interior(&self) -> Vec<f64> {
        let m = &self.mesh;
        let mut out = Vec::with_capacity(m.u_unknowns());
        for j in 0..m.nc {
            for i in 1..m.nc {
                out.push(self.u[m.u_at(i, j)]);
            }
        }
        out
    }

    pub fn v_interior(&self) -> Vec<f64> {
        let m = &self.mesh;
        let mut out = Vec::with_capacity(m.v_unknowns());
        for j in 1..m.nc {
            for i in 0..m.nc {
                out.push(self.v[m.v_at(i, j)]);
            }
        }
        out
    }

    pub fn set_u_interior(&mut self, x: &[f64]) {
        let m = self.mesh;
        for j in 0..m.nc {
            for i in 1..m.nc {
                self.u[m.u_at(i, j)] = x[m.u_unknown(i, j)];
            }
        }
    }

    pub fn set_v_interior(&mut self, x: &[f64]) {
        let m = self.mesh;
        for j in 1..m.nc {
            for i in 0..m.nc {
                self.v[m.v_at(i, j)] = x[m.v_unknown(i, j)];
            }
        }
    }

    /// Net mass outflow of every pressure cell, in pressure-unknown order.
    pub fn continuity_residual(&self, density: f64) -> Vec<f64> {
        let m = &self.mesh;
        let mut r = Vec::with_capacity(m.pressure_unknowns());
        for j in 0..m.nc {
            for i in 0..m.nc {
                let du = self.u[m.u_at(i + 1, j)] - self.u[m.u_at(i, j)];
                let dv = self.v[m.v_at(i, j + 1)] - self.v[m.v_at(i, j)];
                r.push(density * (du * m.dy + dv * m.dx));
            }
        }
        r
    }
}
