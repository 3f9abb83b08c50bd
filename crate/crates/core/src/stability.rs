//! Electric-field validation, the admissible coupling interval and the
//! exponential decay rate.
//!
//! The decay machinery requires the field sup-norms to sit below a fraction
//! of the coercivity and Poincare constants, the coupling weight a to lie in
//! an explicit interval, and yields the rate
//!
//! ```text
//!     xi = min{ (lambda - C_E - 4a)/eps^2,  (a(3 C_s - 2 C_E) - 4 C_E)/8 },
//! ```
//!
//! with only the second branch at eps = 0.

use crate::error::{Error, Result};
use crate::operators::LAMBDA;

use std::f64::consts::PI;

/// Supported electric-field families.  The sine field is
/// E(t,x) = c sin(2 pi x), time-independent; it vanishes at both
/// boundaries and has periodic second derivative by construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FieldSpec {
    Zero,
    Sine { amplitude: f64 },
}

impl FieldSpec {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            FieldSpec::Zero => 0.0,
            FieldSpec::Sine { amplitude } => amplitude * (2.0 * PI * x).sin(),
        }
    }

    /// Analytic sup-norms of E, d_x E and d_x^3 E.
    pub fn sup_norms(&self) -> [f64; 3] {
        match self {
            FieldSpec::Zero => [0.0; 3],
            FieldSpec::Sine { amplitude } => {
                let c = amplitude.abs();
                [c, 2.0 * PI * c, 8.0 * PI * PI * PI * c]
            }
        }
    }

    /// C_E = 2 max(||E||, ||d_x E||, ||d_x^3 E||); for the sine family this
    /// is 16 pi^3 |c|.
    pub fn c_e(&self) -> f64 {
        let s = self.sup_norms();
        2.0 * s[0].max(s[1]).max(s[2])
    }
}

/// Result of validating a field against the smallness condition
/// C_E <= lambda C_s / 8.
#[derive(Debug, Clone)]
pub struct FieldValidation {
    pub c_e: f64,
    pub pass: bool,
    pub reasons: Vec<String>,
}

pub fn validate_field(spec: &FieldSpec, lambda: f64, c_s: f64) -> Result<FieldValidation> {
    if !lambda.is_finite() || !c_s.is_finite() || c_s <= 0.0 || c_s > 1.0 {
        return Err(Error::InvalidInput(format!(
            "need 0 < C_s <= 1 and finite lambda, got C_s = {c_s}, lambda = {lambda}"
        )));
    }
    if let FieldSpec::Sine { amplitude } = spec {
        if !amplitude.is_finite() {
            return Err(Error::InvalidInput("sine field amplitude must be finite".into()));
        }
    }
    let c_e = spec.c_e();
    let bound = lambda * c_s / 8.0;
    let mut reasons = Vec::new();
    let pass = c_e <= bound;
    if !pass {
        reasons.push(format!(
            "field too large: C_E = {c_e:.6e} exceeds lambda*C_s/8 = {bound:.6e}"
        ));
    }
    Ok(FieldValidation { c_e, pass, reasons })
}

/// Which upper bound applies to the coupling weight.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AdmissibleMode {
    /// min(C_B, (lambda - C_E)/4) when a trajectory bound on C_B is known.
    SmallField,
    /// (lambda - C_E)/4.
    Periodic,
}

/// The admissible open interval for the coupling weight a.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AInterval {
    pub lower: f64,
    pub upper: f64,
}

impl AInterval {
    pub fn is_empty(&self) -> bool {
        self.lower >= self.upper
    }

    pub fn contains(&self, a: f64) -> bool {
        a > self.lower && a < self.upper
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }
}

/// lower = 4 C_E / (3 C_s - 2 C_E); upper depends on the mode.
pub fn admissible_a(
    lambda: f64,
    c_s: f64,
    c_e: f64,
    mode: AdmissibleMode,
    c_b_min: Option<f64>,
) -> Result<AInterval> {
    let denom = 3.0 * c_s - 2.0 * c_e;
    if denom <= 0.0 {
        return Err(Error::Validation(format!(
            "3 C_s - 2 C_E = {denom:.6e} must be positive"
        )));
    }
    let lower = 4.0 * c_e / denom;
    let rate_upper = (lambda - c_e) / 4.0;
    let upper = match mode {
        AdmissibleMode::Periodic => rate_upper,
        AdmissibleMode::SmallField => match c_b_min {
            Some(cb) => cb.min(rate_upper),
            None => rate_upper,
        },
    };
    Ok(AInterval { lower, upper })
}

/// The decay rate; at eps = 0 only the macroscopic branch applies.
pub fn compute_xi(lambda: f64, c_e: f64, c_s: f64, a: f64, epsilon: f64) -> Result<f64> {
    let interval = admissible_a(lambda, c_s, c_e, AdmissibleMode::Periodic, None)?;
    if a <= interval.lower {
        return Err(Error::Validation(format!(
            "a = {a} violates the lower bound 4 C_E/(3 C_s - 2 C_E) = {:.6e}",
            interval.lower
        )));
    }
    if a >= interval.upper {
        return Err(Error::Validation(format!(
            "a = {a} violates the upper bound (lambda - C_E)/4 = {:.6e}",
            interval.upper
        )));
    }
    if epsilon < 0.0 {
        return Err(Error::InvalidInput(format!("epsilon must be >= 0, got {epsilon}")));
    }
    let macro_branch = (a * (3.0 * c_s - 2.0 * c_e) - 4.0 * c_e) / 8.0;
    if epsilon == 0.0 {
        return Ok(macro_branch);
    }
    let kinetic_branch = (lambda - c_e - 4.0 * a) / (epsilon * epsilon);
    Ok(kinetic_branch.min(macro_branch))
}

/// The decay envelope (5/4) ||h0||_V^2 e^{-2 xi t}.
pub fn decay_envelope(t: f64, h0_v2: f64, xi: f64) -> f64 {
    1.25 * h0_v2 * (-2.0 * xi * t).exp()
}

/// Validated bundle of the constants entering a stabilization run.
#[derive(Debug, Clone)]
pub struct StabilityConstants {
    pub lambda: f64,
    pub c_s: f64,
    pub c_e: f64,
    pub a: f64,
    pub epsilon: f64,
    pub xi: f64,
    pub a_interval: AInterval,
}

impl StabilityConstants {
    /// Validate the field, the interval and the rate together.
    pub fn build(field: &FieldSpec, c_s: f64, a: f64, epsilon: f64) -> Result<Self> {
        let fv = validate_field(field, LAMBDA, c_s)?;
        if !fv.pass {
            return Err(Error::Validation(fv.reasons.join("; ")));
        }
        let a_interval = admissible_a(LAMBDA, c_s, fv.c_e, AdmissibleMode::Periodic, None)?;
        let xi = compute_xi(LAMBDA, fv.c_e, c_s, a, epsilon)?;
        Ok(Self { lambda: LAMBDA, c_s, c_e: fv.c_e, a, epsilon, xi, a_interval })
    }
}
