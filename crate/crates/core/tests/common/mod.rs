//! Shared generators and oracles for the integration suites.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use vfp_stab::grid::PhaseGrid;
use vfp_stab::operators::DistributionState;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random phase-space state, band-limited in x (Fourier modes 0..=3) and in
/// v (superpositions of cos(w v + theta) sqrt(M) with w in [0.5, 3]).
/// Pooling several independent x-mode blocks keeps the state generic.
pub fn random_band_limited(grid: &PhaseGrid, rng: &mut ChaCha8Rng) -> DistributionState {
    let mut h = vec![0.0; grid.nx * grid.nv];
    for k in 0..4usize {
        for phase in 0..2usize {
            let mut profile = vec![0.0; grid.nv];
            for _ in 0..3 {
                let w: f64 = rng.gen_range(0.5..3.0);
                let theta: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
                let amp: f64 = rng.gen_range(-1.0..1.0);
                for (j, p) in profile.iter_mut().enumerate() {
                    *p += amp * (w * grid.v_nodes[j] + theta).cos();
                }
            }
            let coupling: f64 = rng.gen_range(-1.0..1.0);
            for i in 0..grid.nx {
                let xarg = 2.0 * std::f64::consts::PI * k as f64 * grid.x_nodes[i];
                let xfun = if phase == 0 { xarg.cos() } else { xarg.sin() };
                for j in 0..grid.nv {
                    h[grid.idx(i, j)] += coupling * xfun * profile[j] * grid.sqrt_m[j];
                }
            }
        }
    }
    DistributionState::new(h, grid, 0.0).expect("finite by construction")
}

/// Normalize a state to unit discrete L2 norm (no-op for the zero state).
pub fn normalize(state: &mut DistributionState, grid: &PhaseGrid) {
    let n2: f64 = state.h.iter().map(|x| x * x).sum::<f64>() * grid.dx * grid.dv;
    if n2 > 0.0 {
        let inv = 1.0 / n2.sqrt();
        for x in &mut state.h {
            *x *= inv;
        }
    }
}

/// Subtract the equilibrium projection in place.
#[allow(dead_code)] // not every test binary needs it
pub fn remove_projection(state: &mut DistributionState, grid: &PhaseGrid) {
    let pi = vfp_stab::operators::project_pi(state, grid);
    for (h, p) in state.h.iter_mut().zip(pi.iter()) {
        *h -= p;
    }
}
