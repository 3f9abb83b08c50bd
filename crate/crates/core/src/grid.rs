//! Phase-space grid, Maxwellian weight and discrete norms.
//!
//! The phase space is [0,1] x [-vmax, vmax] with cell-centered uniform grids
//! in both directions and midpoint quadrature.  Velocity nodes are mirrored
//! around v = 0 by construction, so j -> nv-1-j maps v_j to -v_j bitwise.
//! Spatial derivatives use second-order central differences with one-sided
//! second-order stencils at the endpoints; the same stencils are used in v.

use crate::error::{Error, Result};

/// sqrt(2*pi)
const SQRT_2PI: f64 = 2.5066282746310002;

/// The global Maxwellian M(v) = exp(-v^2/2)/sqrt(2*pi).
pub fn maxwellian(v: f64) -> f64 {
    (-0.5 * v * v).exp() / SQRT_2PI
}

/// sqrt(M(v)); taking the square root of the rounded M keeps
/// sqrt_m[j]^2 == m[j] to one ulp, which the collision stencil relies on.
pub fn sqrt_maxwellian(v: f64) -> f64 {
    maxwellian(v).sqrt()
}

/// Cell-centered discretization of the phase space.
#[derive(Debug, Clone)]
pub struct PhaseGrid {
    /// Number of spatial cells on [0,1].
    pub nx: usize,
    /// Number of velocity cells on [-vmax, vmax]; always even.
    pub nv: usize,
    /// Velocity truncation V.
    pub vmax: f64,
    /// Spatial cell width, 1/nx.
    pub dx: f64,
    /// Velocity cell width, 2*vmax/nv.
    pub dv: f64,
    /// Cell centers x_i = (i + 1/2) dx.
    pub x_nodes: Vec<f64>,
    /// Cell centers v_j, mirrored exactly: v_j = -v_{nv-1-j}.
    pub v_nodes: Vec<f64>,
    /// Midpoint quadrature weights in v (all equal to dv).
    pub w_v: Vec<f64>,
    /// Maxwellian at the velocity nodes.
    pub m: Vec<f64>,
    /// sqrt(Maxwellian) at the velocity nodes.
    pub sqrt_m: Vec<f64>,
    /// Maxwellian at the nv-1 interior velocity faces.
    pub m_face: Vec<f64>,
}

/// Build a grid, enforcing the symmetry and tail-mass invariants.
///
/// `tail_tol` bounds the Maxwellian value at the truncation boundary;
/// the default used throughout the crate is 1e-12.
pub fn build_grid(nx: usize, nv: usize, vmax: f64, tail_tol: f64) -> Result<PhaseGrid> {
    if nx < 4 {
        return Err(Error::Grid(format!("nx must be >= 4, got {nx}")));
    }
    if nv < 8 {
        return Err(Error::Grid(format!("nv must be >= 8, got {nv}")));
    }
    if !nv.is_multiple_of(2) {
        return Err(Error::Grid(format!(
            "nv must be even to keep the velocity grid mirror-symmetric, got {nv}"
        )));
    }
    if vmax <= 0.0 || !vmax.is_finite() {
        return Err(Error::Grid(format!("vmax must be positive, got {vmax}")));
    }
    if maxwellian(vmax) >= tail_tol {
        // smallest V with M(V) < tail_tol
        let needed = (-2.0 * (tail_tol * SQRT_2PI).ln()).sqrt();
        return Err(Error::Grid(format!(
            "M(vmax) = {:.3e} exceeds the tail tolerance {:.1e}; vmax must be at least {:.3}",
            maxwellian(vmax),
            tail_tol,
            needed
        )));
    }

    let dx = 1.0 / nx as f64;
    let dv = 2.0 * vmax / nv as f64;
    let x_nodes: Vec<f64> = (0..nx).map(|i| (i as f64 + 0.5) * dx).collect();

    // Build the negative half and mirror it so v_j + v_{nv-1-j} == 0 bitwise.
    let mut v_nodes = vec![0.0; nv];
    for j in 0..nv / 2 {
        let v = -vmax + (j as f64 + 0.5) * dv;
        v_nodes[j] = v;
        v_nodes[nv - 1 - j] = -v;
    }

    let m: Vec<f64> = v_nodes.iter().map(|&v| maxwellian(v)).collect();
    let sqrt_m: Vec<f64> = v_nodes.iter().map(|&v| sqrt_maxwellian(v)).collect();
    let m_face: Vec<f64> = (0..nv - 1)
        .map(|j| maxwellian(0.5 * (v_nodes[j] + v_nodes[j + 1])))
        .collect();

    Ok(PhaseGrid {
        nx,
        nv,
        vmax,
        dx,
        dv,
        x_nodes,
        v_nodes,
        w_v: vec![dv; nv],
        m,
        sqrt_m,
        m_face,
    })
}

impl PhaseGrid {
    /// Flat index of cell (i, j) in a row-major nx*nv field.
    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        i * self.nv + j
    }

    /// Velocity index of -v_j.
    #[inline]
    pub fn mirror(&self, j: usize) -> usize {
        self.nv - 1 - j
    }

    /// Midpoint quadrature of a full phase-space field.
    pub fn integrate(&self, g: &[f64]) -> f64 {
        g.iter().sum::<f64>() * self.dx * self.dv
    }
}

/// Squared norms of a grid function: plain L2, the velocity-weighted
/// omega-norm, the V-norm with the spatial derivative, and their combination.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedNormReport {
    /// ||g||^2
    pub l2: f64,
    /// ||g||^2 + ||d_v g||^2 + ||v g||^2
    pub omega: f64,
    /// ||g||^2 + ||d_x g||^2
    pub v_norm: f64,
    /// omega-norm of g plus omega-norm of d_x g
    pub v_omega: f64,
}

/// d/dx of a phase-space field at every cell, second order.
pub fn dx_derivative(g: &[f64], grid: &PhaseGrid) -> Vec<f64> {
    let (nx, nv) = (grid.nx, grid.nv);
    let two_dx = 2.0 * grid.dx;
    let mut out = vec![0.0; nx * nv];
    for j in 0..nv {
        out[j] = (-3.0 * g[j] + 4.0 * g[nv + j] - g[2 * nv + j]) / two_dx;
        for i in 1..nx - 1 {
            out[i * nv + j] = (g[(i + 1) * nv + j] - g[(i - 1) * nv + j]) / two_dx;
        }
        out[(nx - 1) * nv + j] = (3.0 * g[(nx - 1) * nv + j] - 4.0 * g[(nx - 2) * nv + j]
            + g[(nx - 3) * nv + j])
            / two_dx;
    }
    out
}

/// d/dv of a phase-space field at every cell, second order.
pub fn dv_derivative(g: &[f64], grid: &PhaseGrid) -> Vec<f64> {
    let (nx, nv) = (grid.nx, grid.nv);
    let two_dv = 2.0 * grid.dv;
    let mut out = vec![0.0; nx * nv];
    for i in 0..nx {
        let row = &g[i * nv..(i + 1) * nv];
        let o = &mut out[i * nv..(i + 1) * nv];
        o[0] = (-3.0 * row[0] + 4.0 * row[1] - row[2]) / two_dv;
        for j in 1..nv - 1 {
            o[j] = (row[j + 1] - row[j - 1]) / two_dv;
        }
        o[nv - 1] = (3.0 * row[nv - 1] - 4.0 * row[nv - 2] + row[nv - 3]) / two_dv;
    }
    out
}

/// d/dx of a purely spatial field (length nx), second order.
pub fn dx_derivative_1d(s: &[f64], dx: f64) -> Vec<f64> {
    let n = s.len();
    let two_dx = 2.0 * dx;
    let mut out = vec![0.0; n];
    out[0] = (-3.0 * s[0] + 4.0 * s[1] - s[2]) / two_dx;
    for i in 1..n - 1 {
        out[i] = (s[i + 1] - s[i - 1]) / two_dx;
    }
    out[n - 1] = (3.0 * s[n - 1] - 4.0 * s[n - 2] + s[n - 3]) / two_dx;
    out
}

/// All four squared norms of a phase-space field by midpoint quadrature.
pub fn norms(g: &[f64], grid: &PhaseGrid) -> Result<WeightedNormReport> {
    if g.len() != grid.nx * grid.nv {
        return Err(Error::InvalidInput(format!(
            "field has {} entries, grid expects {}",
            g.len(),
            grid.nx * grid.nv
        )));
    }
    if g.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("field contains non-finite values".into()));
    }
    let w = grid.dx * grid.dv;
    let gx = dx_derivative(g, grid);
    let gv = dv_derivative(g, grid);
    let gxv = dv_derivative(&gx, grid);

    let mut l2 = 0.0;
    let mut dv2 = 0.0;
    let mut vg2 = 0.0;
    let mut dx2 = 0.0;
    let mut dxv2 = 0.0;
    let mut vdx2 = 0.0;
    for i in 0..grid.nx {
        for j in 0..grid.nv {
            let k = i * grid.nv + j;
            let v = grid.v_nodes[j];
            l2 += g[k] * g[k];
            dv2 += gv[k] * gv[k];
            vg2 += v * g[k] * v * g[k];
            dx2 += gx[k] * gx[k];
            dxv2 += gxv[k] * gxv[k];
            vdx2 += v * gx[k] * v * gx[k];
        }
    }
    let l2 = l2 * w;
    let omega = l2 + (dv2 + vg2) * w;
    let v_norm = l2 + dx2 * w;
    let omega_dx = (dx2 + dxv2 + vdx2) * w;
    Ok(WeightedNormReport {
        l2,
        omega,
        v_norm,
        v_omega: omega + omega_dx,
    })
}
