//! Post-processing of run records: decay-rate fits, envelope checks,
//! kinetic-versus-macroscopic comparisons and boundary-layer detection.

use crate::error::{Error, Result};
use crate::macroscopic::{run_macro, MacroConfig, MacroScheme, SigmaInit};
use crate::operators::moments;
use crate::solver::{run, EnergyRecord, InitialCondition, SimConfig};
use crate::stability::decay_envelope;

/// Least-squares exponential fit through (t, ln v_norm).
#[derive(Debug, Clone, Copy)]
pub struct DecayFit {
    /// Empirical rate: v_norm ~ e^{-2 rate t}, comparable to xi.
    pub rate: f64,
    pub intercept: f64,
    pub r2: f64,
    /// Window was truncated at a vanishing record.
    pub truncated: bool,
}

/// Fit the decay rate on records inside [t_lo, t_hi].
pub fn fit_decay_rate(records: &[EnergyRecord], window: (f64, f64)) -> Result<DecayFit> {
    let mut pts: Vec<(f64, f64)> = Vec::new();
    let mut truncated = false;
    for r in records {
        if r.t < window.0 || r.t > window.1 {
            continue;
        }
        if r.v_norm <= 1e-300 {
            truncated = true;
            break;
        }
        pts.push((r.t, r.v_norm.ln()));
    }
    if pts.len() < 5 {
        return Err(Error::InvalidInput(format!(
            "need at least 5 usable records in the fit window, got {}",
            pts.len()
        )));
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom == 0.0 {
        return Err(Error::InvalidInput("degenerate fit window".into()));
    }
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    let mean_y = sy / n;
    let ss_tot: f64 = pts.iter().map(|p| (p.1 - mean_y) * (p.1 - mean_y)).sum();
    let ss_res: f64 = pts
        .iter()
        .map(|p| {
            let e = p.1 - (slope * p.0 + intercept);
            e * e
        })
        .sum();
    let r2 = if ss_tot == 0.0 { 1.0 } else { 1.0 - ss_res / ss_tot };
    Ok(DecayFit { rate: -slope / 2.0, intercept, r2, truncated })
}

/// Worst excess of v_norm over the decay envelope.
#[derive(Debug, Clone, Copy)]
pub struct EnvelopeCheck {
    pub max_violation: f64,
    pub first_violation_t: Option<f64>,
}

pub fn check_envelope(records: &[EnergyRecord], xi: f64, h0_v2: f64) -> EnvelopeCheck {
    let mut max_violation = f64::NEG_INFINITY;
    let mut first_violation_t = None;
    for r in records {
        let excess = r.v_norm - decay_envelope(r.t, h0_v2, xi);
        if excess > max_violation {
            max_violation = excess;
        }
        if excess > 0.0 && first_violation_t.is_none() {
            first_violation_t = Some(r.t);
        }
    }
    EnvelopeCheck { max_violation, first_violation_t }
}

/// Ratio of the worst error near the boundaries to the worst error over the
/// interior third; saturates when the interior error is at round-off.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LayerIndicator {
    Ratio(f64),
    Saturated,
}

impl LayerIndicator {
    pub fn as_ratio(&self) -> Option<f64> {
        match self {
            LayerIndicator::Ratio(r) => Some(*r),
            LayerIndicator::Saturated => None,
        }
    }
}

impl std::fmt::Display for LayerIndicator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LayerIndicator::Ratio(r) => write!(f, "{r}"),
            LayerIndicator::Saturated => write!(f, "saturated"),
        }
    }
}

pub fn boundary_layer_indicator(
    sigma_kin: &[f64],
    sigma_macro: &[f64],
    margin_cells: usize,
) -> Result<LayerIndicator> {
    let nx = sigma_kin.len();
    if sigma_macro.len() != nx {
        return Err(Error::InvalidInput(format!(
            "density fields disagree in size: {} vs {}",
            nx,
            sigma_macro.len()
        )));
    }
    if margin_cells == 0 || 2 * margin_cells >= nx {
        return Err(Error::InvalidInput(format!(
            "margin of {margin_cells} cells does not fit a grid of {nx}"
        )));
    }
    let err = |i: usize| (sigma_kin[i] - sigma_macro[i]).abs();
    let mut boundary = 0.0f64;
    for i in 0..margin_cells {
        boundary = boundary.max(err(i)).max(err(nx - 1 - i));
    }
    let mut interior = 0.0f64;
    for i in nx / 3..2 * nx / 3 {
        interior = interior.max(err(i));
    }
    if interior < 1e-14 {
        return Ok(LayerIndicator::Saturated);
    }
    Ok(LayerIndicator::Ratio(boundary / interior))
}

/// One row of the Knudsen-sweep table.
#[derive(Debug, Clone)]
pub struct ApRow {
    pub epsilon: f64,
    pub l2_diff: f64,
    pub layer: LayerIndicator,
}

/// Default margin for the layer indicator.
pub const LAYER_MARGIN_CELLS: usize = 3;

/// Run the kinetic configuration at each Knudsen number against the
/// periodic macroscopic reference on the shared grid; rows come back
/// ordered by epsilon descending.
pub fn ap_study(base: &SimConfig, epsilons: &[f64]) -> Result<Vec<ApRow>> {
    if epsilons.is_empty() {
        return Err(Error::InvalidInput("epsilon sweep must be nonempty".into()));
    }
    for &e in epsilons {
        if !(e > 0.0 && e <= 1.0) {
            return Err(Error::InvalidInput(format!("sweep epsilon must lie in (0,1], got {e}")));
        }
    }
    let sigma0 = match base.initial {
        InitialCondition::CosineDensity => SigmaInit::Cosine,
        InitialCondition::OddFlux => SigmaInit::Zero,
        InitialCondition::CustomTable(_) => {
            return Err(Error::InvalidInput(
                "the sweep needs an analytic initial family shared with the macro solver".into(),
            ))
        }
    };
    let macro_cfg = MacroConfig {
        nx: base.nx,
        field: base.field,
        k0: crate::boundary::FeedbackMatrix::periodic(),
        t_end: base.t_end,
        dt: None,
        scheme: MacroScheme::Explicit,
        sigma0,
        output_every: usize::MAX,
    };
    let macro_run = run_macro(&macro_cfg)?;
    let sigma_macro = macro_run.final_sigma();

    let mut eps_sorted: Vec<f64> = epsilons.to_vec();
    eps_sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());

    let grid = crate::grid::build_grid(base.nx, base.nv, base.vmax, base.tail_tol)?;
    let mut rows = Vec::new();
    for &eps in &eps_sorted {
        let cfg = SimConfig { epsilon: eps, ..base.clone() };
        let result = run(&cfg)?;
        let mac = moments(&result.final_state, &grid);
        let mut diff2 = 0.0;
        for (a, b) in mac.sigma.iter().zip(sigma_macro.iter()) {
            diff2 += (a - b) * (a - b);
        }
        let l2_diff = (diff2 * grid.dx).sqrt();
        let layer = boundary_layer_indicator(&mac.sigma, sigma_macro, LAYER_MARGIN_CELLS)?;
        rows.push(ApRow { epsilon: eps, l2_diff, layer });
    }
    Ok(rows)
}
