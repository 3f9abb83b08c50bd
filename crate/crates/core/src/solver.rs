//! Time integration of the kinetic equation with feedback boundaries.
//!
//! The equation is advanced in the rescaled form
//!
//! ```text
//!     d_t h + (v/eps) d_x h - (1/eps^2) L h = (E/eps)(d_v - v/2) h
//! ```
//!
//! by Strang splitting: an implicit half-step of the collision operator,
//! one explicit step of transport plus field, and a second implicit
//! half-step.  Transport uses second-order upwind-biased reconstruction
//! (slope (1 - nu)/2 per velocity, two upstream cells); incoming ghost
//! layers apply the feedback relation cell layer by cell layer, which
//! reduces to exact wrap-around for the periodic matrix and to an exact
//! mirror extension for the reflective one.  The collision half-steps are
//! backward Euler, so the splitting is stable for every eps in (0,1] under
//! the transport CFL bound dt <= eps dx / vmax alone.

use crate::boundary::{boundary_functionals, compute_cb, evaluate_i, flux_balance, FeedbackMatrix};
use crate::error::{Error, Result};
use crate::grid::{build_grid, dx_derivative_1d, norms, PhaseGrid};
use crate::operators::{moments, CollisionOperator, DistributionState, ImplicitCollision};
use crate::stability::{decay_envelope, FieldSpec, StabilityConstants};

use std::f64::consts::PI;

/// Default CFL fraction applied to the stability bound when dt is automatic.
pub const CFL_FRACTION: f64 = 0.45;

/// Supported initial-data families; data is prepared in f-space and
/// mean-corrected so the total mass vanishes to round-off.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialCondition {
    /// f0 = cos(2 pi x) M(v)
    CosineDensity,
    /// f0 = sin(2 pi x) v M(v)
    OddFlux,
    /// Tabulated f0 values, row-major nx * nv.
    CustomTable(Vec<f64>),
}

/// Full configuration of one kinetic run.
#[derive(Debug, Clone)]
pub struct SimConfig {
    pub nx: usize,
    pub nv: usize,
    pub vmax: f64,
    pub tail_tol: f64,
    pub epsilon: f64,
    pub k: FeedbackMatrix,
    pub field: FieldSpec,
    pub c_s: f64,
    /// Hypocoercivity coupling weight in the energy.
    pub a: f64,
    pub t_end: f64,
    /// Fixed time step; `None` selects CFL_FRACTION times the bound.
    pub dt: Option<f64>,
    pub output_every: usize,
    pub initial: InitialCondition,
    /// Reject configurations whose decay hypotheses fail.
    pub strict: bool,
}

impl SimConfig {
    pub fn defaults() -> Self {
        Self {
            nx: 64,
            nv: 64,
            vmax: 8.0,
            tail_tol: 1e-12,
            epsilon: 1.0,
            k: FeedbackMatrix::periodic(),
            field: FieldSpec::Zero,
            c_s: 1.0,
            a: 0.05,
            t_end: 1.0,
            dt: None,
            output_every: 50,
            initial: InitialCondition::CosineDensity,
            strict: true,
        }
    }
}

/// Per-output-time diagnostics.
#[derive(Debug, Clone)]
pub struct EnergyRecord {
    pub t: f64,
    /// ||h||^2
    pub l2: f64,
    /// ||h||_V^2
    pub v_norm: f64,
    /// (1/2)||h||_V^2 + eps a <u, d_x sigma>
    pub e_h: f64,
    /// <u, d_x sigma>
    pub cross_term: f64,
    /// total mass of f
    pub mass: f64,
    pub a: f64,
    pub b: f64,
    pub a_x: f64,
    pub b_x: f64,
    pub c_b: Option<f64>,
    pub i_term: f64,
    pub flux_residual: f64,
    /// (5/4) ||h0||_V^2 e^{-2 xi t}, NaN when no rate is available.
    pub envelope: f64,
}

/// Stability bound on the time step: transport CFL plus, for nonzero
/// fields, the explicit velocity-advection and reaction limits.
pub fn dt_bound(grid: &PhaseGrid, epsilon: f64, field: &FieldSpec) -> f64 {
    let mut bound = epsilon * grid.dx / grid.vmax;
    let e_max = field.sup_norms()[0];
    if e_max > 0.0 {
        bound = bound.min(epsilon * grid.dv / e_max);
        bound = bound.min(2.0 * epsilon / (e_max * grid.vmax));
    }
    bound
}

/// Build h0 = f0/sqrt(M) with the total mass removed in f-space.
pub fn prepare_initial(config: &SimConfig, grid: &PhaseGrid) -> Result<DistributionState> {
    let (nx, nv) = (grid.nx, grid.nv);
    let mut f = vec![0.0; nx * nv];
    match &config.initial {
        InitialCondition::CosineDensity => {
            for i in 0..nx {
                let cx = (2.0 * PI * grid.x_nodes[i]).cos();
                for j in 0..nv {
                    f[grid.idx(i, j)] = cx * grid.m[j];
                }
            }
        }
        InitialCondition::OddFlux => {
            for i in 0..nx {
                let sx = (2.0 * PI * grid.x_nodes[i]).sin();
                for j in 0..nv {
                    f[grid.idx(i, j)] = sx * grid.v_nodes[j] * grid.m[j];
                }
            }
        }
        InitialCondition::CustomTable(tab) => {
            if tab.len() != nx * nv {
                return Err(Error::InvalidInput(format!(
                    "custom table has {} entries, grid expects {}",
                    tab.len(),
                    nx * nv
                )));
            }
            if tab.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidInput("custom table contains non-finite values".into()));
            }
            f.copy_from_slice(tab);
        }
    }
    // remove the mean as a multiple of the discrete Maxwellian so the
    // discrete mass vanishes exactly
    let mass: f64 = grid.integrate(&f);
    let m_mass: f64 = grid.m.iter().sum::<f64>() * grid.dv; // times int dx = 1
    let scale = mass / m_mass;
    let mut h = vec![0.0; nx * nv];
    for i in 0..nx {
        for j in 0..nv {
            let k = grid.idx(i, j);
            h[k] = (f[k] - scale * grid.m[j]) / grid.sqrt_m[j];
        }
    }
    DistributionState::new(h, grid, 0.0)
}

/// One-step integrator; owns the factored implicit collision solve and the
/// scratch buffers so repeated stepping does not allocate.
pub struct Stepper<'g> {
    grid: &'g PhaseGrid,
    k: FeedbackMatrix,
    epsilon: f64,
    dt: f64,
    bound: f64,
    half_collision: ImplicitCollision,
    e_at_x: Vec<f64>,
    /// per-velocity CFL number |v| dt / (eps dx)
    nu: Vec<f64>,
    faces: Vec<f64>,
    scratch: Vec<f64>,
}

impl<'g> Stepper<'g> {
    pub fn new(config: &SimConfig, grid: &'g PhaseGrid, dt: f64) -> Result<Self> {
        if !(config.epsilon > 0.0 && config.epsilon <= 1.0) {
            return Err(Error::Config(format!(
                "kinetic stepping requires epsilon in (0, 1], got {}",
                config.epsilon
            )));
        }
        let bound = dt_bound(grid, config.epsilon, &config.field);
        if dt > bound * (1.0 + 1e-12) {
            return Err(Error::Solver(format!(
                "dt = {dt:.6e} violates the stability bound {bound:.6e} \
                 (= min of eps*dx/vmax and the field limits)"
            )));
        }
        let op = CollisionOperator::new(grid);
        let mu = 0.5 * dt / (config.epsilon * config.epsilon);
        let half_collision = ImplicitCollision::factor(&op, mu);
        let e_at_x = grid.x_nodes.iter().map(|&x| config.field.eval(x)).collect();
        let nu = grid
            .v_nodes
            .iter()
            .map(|&v| v.abs() * dt / (config.epsilon * grid.dx))
            .collect();
        Ok(Self {
            grid,
            k: config.k,
            epsilon: config.epsilon,
            dt,
            bound,
            half_collision,
            e_at_x,
            nu,
            faces: vec![0.0; grid.nx + 1],
            scratch: vec![0.0; grid.nx * grid.nv],
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn stability_bound(&self) -> f64 {
        self.bound
    }

    fn collision_half_step(&self, state: &mut DistributionState) {
        let nv = self.grid.nv;
        for i in 0..self.grid.nx {
            self.half_collision.solve_column(&mut state.h[i * nv..(i + 1) * nv]);
        }
    }

    fn transport_field_step(&mut self, state: &mut DistributionState) {
        let g = self.grid;
        let (nx, nv) = (g.nx, g.nv);
        let h = &state.h;
        let hn = &mut self.scratch;
        let k = &self.k;
        let rate = self.dt / (self.epsilon * g.dx);
        let last = (nx - 1) * nv;
        let penult = (nx - 2) * nv;

        for j in 0..nv {
            let v = g.v_nodes[j];
            let jm = g.mirror(j);
            let half_slope = 0.5 * (1.0 - self.nu[j]);
            let c = v * rate;
            if v > 0.0 {
                // incoming ghost layers at x = 0
                let g1 = k.k00 * h[jm] + k.k10 * h[last + j];
                let g2 = k.k00 * h[nv + jm] + k.k10 * h[penult + j];
                let mut w_prev = g1;
                let mut face_prev = g1 + half_slope * (g1 - g2);
                for i in 0..nx {
                    let w = h[i * nv + j];
                    let face = w + half_slope * (w - w_prev);
                    hn[i * nv + j] = w - c * (face - face_prev);
                    face_prev = face;
                    w_prev = w;
                }
            } else {
                // incoming ghost layers at x = 1
                let g1 = k.k01 * h[j] + k.k11 * h[last + jm];
                let g2 = k.k01 * h[nv + j] + k.k11 * h[penult + jm];
                let faces = &mut self.faces;
                faces[nx] = g1 + half_slope * (g1 - g2);
                faces[nx - 1] = {
                    let w = h[last + j];
                    w + half_slope * (w - g1)
                };
                for f in (0..nx - 1).rev() {
                    let w = h[f * nv + j];
                    let w_up = h[(f + 1) * nv + j];
                    faces[f] = w + half_slope * (w - w_up);
                }
                for i in 0..nx {
                    hn[i * nv + j] = h[i * nv + j] - c * (faces[i + 1] - faces[i]);
                }
            }
        }

        // explicit field term (E/eps)(d_v - v/2) h from the pre-step state
        let inv_eps = 1.0 / self.epsilon;
        let two_dv = 2.0 * g.dv;
        for i in 0..nx {
            let e = self.e_at_x[i];
            if e == 0.0 {
                continue;
            }
            let coeff = self.dt * e * inv_eps;
            let row = &h[i * nv..(i + 1) * nv];
            let out = &mut hn[i * nv..(i + 1) * nv];
            for j in 0..nv {
                let up = if j + 1 < nv { row[j + 1] } else { 0.0 };
                let dn = if j > 0 { row[j - 1] } else { 0.0 };
                let dvh = (up - dn) / two_dv;
                out[j] += coeff * (dvh - 0.5 * g.v_nodes[j] * row[j]);
            }
        }

        std::mem::swap(&mut state.h, &mut self.scratch);
    }

    /// Advance the state by one time step.
    pub fn step(&mut self, state: &mut DistributionState) -> Result<()> {
        self.collision_half_step(state);
        self.transport_field_step(state);
        self.collision_half_step(state);
        state.t += self.dt;
        if state.h.iter().any(|x| !x.is_finite()) {
            return Err(Error::Solver(format!(
                "non-finite state detected at t = {:.6e}",
                state.t
            )));
        }
        Ok(())
    }
}

/// Single-step convenience wrapper over [`Stepper`].
pub fn step(state: &DistributionState, config: &SimConfig, grid: &PhaseGrid) -> Result<DistributionState> {
    let dt = match config.dt {
        Some(dt) => dt,
        None => CFL_FRACTION * dt_bound(grid, config.epsilon, &config.field),
    };
    let mut stepper = Stepper::new(config, grid, dt)?;
    let mut next = state.clone();
    stepper.step(&mut next)?;
    Ok(next)
}

/// Assemble the full diagnostic record for a state.
pub fn compute_energy(
    state: &DistributionState,
    grid: &PhaseGrid,
    config: &SimConfig,
    xi: Option<f64>,
    h0_v2: f64,
) -> Result<EnergyRecord> {
    let n = norms(&state.h, grid)?;
    let mac = moments(state, grid);
    let dsig = dx_derivative_1d(&mac.sigma, grid.dx);
    let cross_term: f64 = mac
        .u
        .iter()
        .zip(dsig.iter())
        .map(|(u, s)| u * s)
        .sum::<f64>()
        * grid.dx;
    let e_h = 0.5 * n.v_norm + config.epsilon * config.a * cross_term;

    // norm equivalence (1 -/+ a eps)/2 * ||h||_V^2 around E_h
    let scale = n.v_norm.max(1e-300);
    let lo = 0.5 * (1.0 - config.a * config.epsilon) * n.v_norm;
    let hi = 0.5 * (1.0 + config.a * config.epsilon) * n.v_norm;
    let violation = (lo - e_h).max(e_h - hi) / scale;
    if violation > 1e-10 {
        return Err(Error::Solver(format!(
            "energy equivalence violated by relative {violation:.3e} at t = {}; \
             this indicates a quadrature inconsistency",
            state.t
        )));
    }

    let mut mass = 0.0;
    for i in 0..grid.nx {
        for j in 0..grid.nv {
            mass += state.h[grid.idx(i, j)] * grid.sqrt_m[j];
        }
    }
    mass *= grid.dx * grid.dv;

    let bf = boundary_functionals(state, grid);
    let c_b = compute_cb(bf.a, bf.b, bf.a_x, bf.b_x)?;
    let i_term = evaluate_i(&config.k, bf.a, bf.b, bf.a_x, bf.b_x, config.a);
    let flux_residual = flux_balance(state, grid, &config.k);
    let envelope = match xi {
        Some(xi) => decay_envelope(state.t, h0_v2, xi),
        None => f64::NAN,
    };

    Ok(EnergyRecord {
        t: state.t,
        l2: n.l2,
        v_norm: n.v_norm,
        e_h,
        cross_term,
        mass,
        a: bf.a,
        b: bf.b,
        a_x: bf.a_x,
        b_x: bf.b_x,
        c_b,
        i_term,
        flux_residual,
        envelope,
    })
}

/// Everything a finished run exposes for analysis.
#[derive(Debug, Clone)]
pub struct RunResult {
    pub records: Vec<EnergyRecord>,
    pub final_state: DistributionState,
    /// ||h0||_V^2 of the prepared initial data.
    pub h0_v2: f64,
    /// Decay rate implied by the configuration, when its hypotheses hold.
    pub xi: Option<f64>,
    /// Time integral of u(s,1) - u(s,0), accumulated every step.
    pub flux_time_integral: f64,
}

/// Run a configuration to t_end, emitting a record every `output_every`
/// steps plus the final state.
pub fn run(config: &SimConfig) -> Result<RunResult> {
    let grid = build_grid(config.nx, config.nv, config.vmax, config.tail_tol)?;

    // the decay rate (and hence the envelope column) exists only when the
    // constants validate and the matrix matches a stabilizing profile
    let constants = StabilityConstants::build(&config.field, config.c_s, config.a, config.epsilon);
    let profile = crate::boundary::check_constraints(&config.k, None, config.a, config.epsilon);
    let profile_ok = profile.theorem_selected != crate::boundary::TheoremProfile::None;
    if config.strict {
        if let Err(e) = &constants {
            return Err(Error::Validation(format!("strict mode rejected the configuration: {e}")));
        }
        if !profile_ok {
            return Err(Error::Validation(format!(
                "strict mode rejected the feedback matrix: {}",
                profile.reason.unwrap_or_else(|| "no profile".into())
            )));
        }
    }
    let xi = match constants {
        Ok(c) if profile_ok => Some(c.xi),
        _ => None,
    };

    let mut state = prepare_initial(config, &grid)?;
    let h0_v2 = norms(&state.h, &grid)?.v_norm;

    let (dt, nsteps) = match config.dt {
        Some(dt) => {
            if dt <= 0.0 || !dt.is_finite() {
                return Err(Error::Config(format!("dt must be positive, got {dt}")));
            }
            (dt, (config.t_end / dt).ceil() as usize)
        }
        None => {
            let raw = CFL_FRACTION * dt_bound(&grid, config.epsilon, &config.field);
            if config.t_end <= 0.0 {
                (raw, 0)
            } else {
                let n = (config.t_end / raw).ceil() as usize;
                (config.t_end / n as f64, n)
            }
        }
    };

    let mut records = Vec::new();
    let mut flux_time_integral = 0.0;
    if nsteps == 0 {
        records.push(compute_energy(&state, &grid, config, xi, h0_v2)?);
        return Ok(RunResult { records, final_state: state, h0_v2, xi, flux_time_integral });
    }

    let mut stepper = Stepper::new(config, &grid, dt)?;
    let every = config.output_every.max(1);
    for s in 0..nsteps {
        state.t = s as f64 * dt;
        if s % every == 0 {
            records.push(compute_energy(&state, &grid, config, xi, h0_v2)?);
        }
        // signed boundary-flux imbalance, accumulated in time
        {
            let tr = crate::boundary::incoming_values(&state, &grid, &config.k);
            let mut u0 = 0.0;
            let mut u1 = 0.0;
            for j in 0..grid.nv {
                let w = grid.v_nodes[j] * grid.sqrt_m[j];
                u0 += w * tr.x0[j];
                u1 += w * tr.x1[j];
            }
            flux_time_integral += dt * (u1 - u0) * grid.dv;
        }
        stepper.step(&mut state)?;
    }
    state.t = nsteps as f64 * dt;
    records.push(compute_energy(&state, &grid, config, xi, h0_v2)?);
    Ok(RunResult { records, final_state: state, h0_v2, xi, flux_time_integral })
}
