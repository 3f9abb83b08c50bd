//! Collision operator, equilibrium projection and macroscopic moments.
//!
//! The linearized Fokker-Planck operator acts on the weighted unknown
//! h = f/sqrt(M) and is discretized in divergence form,
//!
//! ```text
//!     (L h)_j = (1/sqrt(M_j)) [ M_{j+1/2} (g_{j+1}-g_j) - M_{j-1/2} (g_j-g_{j-1}) ] / dv^2,
//! ```
//!
//! with g = h/sqrt(M) and zero flux through the outermost faces.  This keeps
//! the discrete operator symmetric in the plain L2 inner product, negative
//! semidefinite, and annihilates sqrt(M) exactly, so the sampled Maxwellian
//! is a genuine steady state of the solver and the quadratic form
//! -<Lh,h> is a sum of squares.

use crate::error::{Error, Result};
use crate::grid::{dv_derivative, norms, PhaseGrid};

/// The weighted kinetic unknown h(t, x_i, v_j) = f/sqrt(M), row-major in x.
#[derive(Debug, Clone)]
pub struct DistributionState {
    pub h: Vec<f64>,
    pub nx: usize,
    pub nv: usize,
    /// Current time.
    pub t: f64,
}

impl DistributionState {
    pub fn new(h: Vec<f64>, grid: &PhaseGrid, t: f64) -> Result<Self> {
        if h.len() != grid.nx * grid.nv {
            return Err(Error::InvalidInput(format!(
                "state has {} entries, grid expects {}",
                h.len(),
                grid.nx * grid.nv
            )));
        }
        if h.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("state contains non-finite values".into()));
        }
        Ok(Self { h, nx: grid.nx, nv: grid.nv, t })
    }

    pub fn zeros(grid: &PhaseGrid) -> Self {
        Self { h: vec![0.0; grid.nx * grid.nv], nx: grid.nx, nv: grid.nv, t: 0.0 }
    }
}

/// Density and flux moments of a state.
#[derive(Debug, Clone)]
pub struct MacroState {
    pub sigma: Vec<f64>,
    pub u: Vec<f64>,
    pub t: f64,
}

/// Pi h = (integral of h sqrt(M) dv) sqrt(M), the projection onto the
/// collision equilibrium subspace.
pub fn project_pi(state: &DistributionState, grid: &PhaseGrid) -> Vec<f64> {
    let (nx, nv) = (grid.nx, grid.nv);
    let mut out = vec![0.0; nx * nv];
    for i in 0..nx {
        let row = &state.h[i * nv..(i + 1) * nv];
        let sig: f64 =
            row.iter().zip(grid.sqrt_m.iter()).map(|(h, s)| h * s).sum::<f64>() * grid.dv;
        let o = &mut out[i * nv..(i + 1) * nv];
        for (o_j, s) in o.iter_mut().zip(grid.sqrt_m.iter()) {
            *o_j = sig * s;
        }
    }
    out
}

/// sigma = integral of h sqrt(M) dv and u = integral of v h sqrt(M) dv.
pub fn moments(state: &DistributionState, grid: &PhaseGrid) -> MacroState {
    let (nx, nv) = (grid.nx, grid.nv);
    let mut sigma = vec![0.0; nx];
    let mut u = vec![0.0; nx];
    for i in 0..nx {
        let row = &state.h[i * nv..(i + 1) * nv];
        let mut s = 0.0;
        let mut f = 0.0;
        for (j, h) in row.iter().enumerate() {
            let w = h * grid.sqrt_m[j];
            s += w;
            f += grid.v_nodes[j] * w;
        }
        sigma[i] = s * grid.dv;
        u[i] = f * grid.dv;
    }
    MacroState { sigma, u, t: state.t }
}

/// Symmetric tridiagonal representation of the discrete collision operator,
/// acting along v for each fixed x.
#[derive(Debug, Clone)]
pub struct CollisionOperator {
    /// Diagonal entries, length nv.
    pub diag: Vec<f64>,
    /// Off-diagonal entries (symmetric), length nv-1.
    pub off: Vec<f64>,
}

impl CollisionOperator {
    pub fn new(grid: &PhaseGrid) -> Self {
        let nv = grid.nv;
        let inv_dv2 = 1.0 / (grid.dv * grid.dv);
        let mut diag = vec![0.0; nv];
        let mut off = vec![0.0; nv - 1];
        for f in 0..nv - 1 {
            let c = grid.m_face[f] * inv_dv2;
            diag[f] -= c / (grid.sqrt_m[f] * grid.sqrt_m[f]);
            diag[f + 1] -= c / (grid.sqrt_m[f + 1] * grid.sqrt_m[f + 1]);
            off[f] = c / (grid.sqrt_m[f] * grid.sqrt_m[f + 1]);
        }
        Self { diag, off }
    }

    /// Apply L to one x-column of h.
    pub fn apply_column(&self, h: &[f64], out: &mut [f64]) {
        let n = h.len();
        out[0] = self.diag[0] * h[0] + self.off[0] * h[1];
        for j in 1..n - 1 {
            out[j] = self.off[j - 1] * h[j - 1] + self.diag[j] * h[j] + self.off[j] * h[j + 1];
        }
        out[n - 1] = self.off[n - 2] * h[n - 2] + self.diag[n - 1] * h[n - 1];
    }
}

/// Apply the collision operator to the whole state.
pub fn collision_apply(state: &DistributionState, grid: &PhaseGrid) -> Vec<f64> {
    let op = CollisionOperator::new(grid);
    let mut out = vec![0.0; state.h.len()];
    for i in 0..grid.nx {
        op.apply_column(
            &state.h[i * grid.nv..(i + 1) * grid.nv],
            &mut out[i * grid.nv..(i + 1) * grid.nv],
        );
    }
    out
}

/// Prefactored Thomas solve of (I - mu L) x = b along v, reused across
/// x-columns and time steps.
#[derive(Debug, Clone)]
pub struct ImplicitCollision {
    sub: Vec<f64>,
    diag_f: Vec<f64>,
    sup_f: Vec<f64>,
}

impl ImplicitCollision {
    pub fn factor(op: &CollisionOperator, mu: f64) -> Self {
        let n = op.diag.len();
        let mut sub = vec![0.0; n];
        let mut b = vec![0.0; n];
        let mut c = vec![0.0; n];
        for j in 0..n {
            b[j] = 1.0 - mu * op.diag[j];
            if j > 0 {
                sub[j] = -mu * op.off[j - 1];
            }
            if j < n - 1 {
                c[j] = -mu * op.off[j];
            }
        }
        let mut diag_f = vec![0.0; n];
        let mut sup_f = vec![0.0; n];
        diag_f[0] = b[0];
        sup_f[0] = c[0] / b[0];
        for j in 1..n {
            diag_f[j] = b[j] - sub[j] * sup_f[j - 1];
            if j < n - 1 {
                sup_f[j] = c[j] / diag_f[j];
            }
        }
        Self { sub, diag_f, sup_f }
    }

    /// Solve one column in place.
    pub fn solve_column(&self, h: &mut [f64]) {
        let n = h.len();
        h[0] /= self.diag_f[0];
        for j in 1..n {
            h[j] = (h[j] - self.sub[j] * h[j - 1]) / self.diag_f[j];
        }
        for j in (0..n - 1).rev() {
            h[j] -= self.sup_f[j] * h[j + 1];
        }
    }
}

/// The dissipation quadratic form -<Lh,h> evaluated in summation-by-parts
/// form, which is a sum of squares at the discrete level.
pub fn dissipation_form(state: &DistributionState, grid: &PhaseGrid) -> f64 {
    let (nx, nv) = (grid.nx, grid.nv);
    let inv_dv = 1.0 / grid.dv;
    let mut total = 0.0;
    for i in 0..nx {
        let row = &state.h[i * nv..(i + 1) * nv];
        let mut acc = 0.0;
        for f in 0..nv - 1 {
            let dg = (row[f + 1] / grid.sqrt_m[f + 1] - row[f] / grid.sqrt_m[f]) * inv_dv;
            acc += grid.m_face[f] * dg * dg;
        }
        total += acc;
    }
    total * grid.dx * grid.dv
}

/// Both sides of the coercivity estimates for the collision operator.
#[derive(Debug, Clone, Copy)]
pub struct CoercivityCheck {
    /// -<Lh, h>, summation-by-parts form (exactly nonnegative).
    pub lhs: f64,
    /// lambda * ||(1-Pi)h||_omega^2.
    pub rhs_omega: f64,
    /// lambda * ( ||d_v (1-Pi)h||^2 + ||v (1-Pi)h||^2 - ||(1-Pi)h||^2 ).
    pub rhs_second: f64,
}

/// Coercivity constant of the collision operator.
pub const LAMBDA: f64 = 0.25;

/// Evaluate the dissipation form of h against both coercivity right-hand
/// sides, formed on the non-equilibrium part (1-Pi)h.
pub fn coercivity_check(state: &DistributionState, grid: &PhaseGrid) -> Result<CoercivityCheck> {
    let lhs = dissipation_form(state, grid);
    let pi = project_pi(state, grid);
    let mut perp = state.h.clone();
    for (p, q) in perp.iter_mut().zip(pi.iter()) {
        *p -= q;
    }
    let n = norms(&perp, grid)?;
    let dvp = dv_derivative(&perp, grid);
    let w = grid.dx * grid.dv;
    let mut dv2 = 0.0;
    let mut vp2 = 0.0;
    for i in 0..grid.nx {
        for j in 0..grid.nv {
            let k = i * grid.nv + j;
            dv2 += dvp[k] * dvp[k];
            let vv = grid.v_nodes[j] * perp[k];
            vp2 += vv * vv;
        }
    }
    Ok(CoercivityCheck {
        lhs,
        rhs_omega: LAMBDA * n.omega,
        rhs_second: LAMBDA * (dv2 * w + vp2 * w - n.l2),
    })
}
