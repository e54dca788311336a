//! Ground-state profile `Q_omega`, single-component solitons and the
//! two-soliton initial data used by the collision experiments.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::GridSpec;
use crate::splitstep::FieldPair;

/// Parameters of one travelling soliton.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolitonSpec {
    pub omega: f64,
    pub v: f64,
    pub x0: f64,
    pub gamma: f64,
    /// 1 or 2.
    pub component: u8,
}

impl SolitonSpec {
    pub fn new(omega: f64, v: f64, x0: f64, component: u8) -> Self {
        Self {
            omega,
            v,
            x0,
            gamma: 0.0,
            component,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega.is_finite() && self.omega > 0.0) {
            return Err(Error::Domain(format!(
                "soliton frequency must be positive, got {}",
                self.omega
            )));
        }
        if !(self.v.is_finite() && self.x0.is_finite() && self.gamma.is_finite()) {
            return Err(Error::Domain("soliton parameters must be finite".into()));
        }
        if !matches!(self.component, 1 | 2) {
            return Err(Error::Domain(format!(
                "soliton component must be 1 or 2, got {}",
                self.component
            )));
        }
        Ok(())
    }
}

/// Self-interaction strengths `mu1`, `mu2` and cross coupling `beta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoupledParams {
    pub mu1: f64,
    pub mu2: f64,
    pub beta: f64,
}

impl CoupledParams {
    pub fn new(mu1: f64, mu2: f64, beta: f64) -> Self {
        Self { mu1, mu2, beta }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mu1.is_finite() && self.mu1 > 0.0 && self.mu2.is_finite() && self.mu2 > 0.0) {
            return Err(Error::Domain(format!(
                "self-interaction strengths must be positive, got mu1 = {}, mu2 = {}",
                self.mu1, self.mu2
            )));
        }
        if !self.beta.is_finite() {
            return Err(Error::Domain("coupling beta must be finite".into()));
        }
        Ok(())
    }

    pub fn mu(&self, component: u8) -> f64 {
        if component == 1 {
            self.mu1
        } else {
            self.mu2
        }
    }

    /// `mu1 = mu2 = beta`.
    pub fn is_integrable(&self) -> bool {
        self.mu1 == self.mu2 && self.mu1 == self.beta
    }
}

/// `Q_omega(x) = sqrt(2 omega) sech(sqrt(omega) x)`, the positive even
/// solution of `-Q'' + omega Q - Q^3 = 0`.
pub fn ground_profile(omega: f64, x: f64) -> Result<f64> {
    if !(omega.is_finite() && omega > 0.0) {
        return Err(Error::Domain(format!(
            "ground profile needs omega > 0, got {omega}"
        )));
    }
    Ok(q_unchecked(omega, x))
}

#[inline]
pub(crate) fn q_unchecked(omega: f64, x: f64) -> f64 {
    let s = omega.sqrt();
    // cosh overflows to inf past |x| ~ 710, which correctly yields 0.
    (2.0 * omega).sqrt() / (s * x).cosh()
}

/// `R_j(t, x_k)` sampled on the grid.
pub fn soliton_field(
    spec: &SolitonSpec,
    mu: f64,
    t: f64,
    grid: &GridSpec,
) -> Result<Vec<Complex64>> {
    spec.validate()?;
    if !(mu.is_finite() && mu > 0.0) {
        return Err(Error::Domain(format!("mu must be positive, got {mu}")));
    }
    let SolitonSpec {
        omega,
        v,
        x0,
        gamma,
        ..
    } = *spec;
    let amp = 1.0 / mu.sqrt();
    let temporal = omega * t - v * v * t / 4.0 + gamma;
    Ok(grid
        .nodes()
        .iter()
        .map(|&x| {
            let phase = temporal + v * x / 2.0;
            Complex64::from_polar(amp * q_unchecked(omega, x - v * t - x0), phase)
        })
        .collect())
}

/// Two-soliton initial data at time `t0`, one soliton per component.
pub fn initial_data(
    spec1: &SolitonSpec,
    spec2: &SolitonSpec,
    params: &CoupledParams,
    t0: f64,
    grid: &GridSpec,
) -> Result<FieldPair> {
    if spec1.component != 1 || spec2.component != 2 {
        return Err(Error::Config(crate::config::ConfigError::new(
            None,
            format!(
                "initial data expects solitons on components (1, 2), got ({}, {})",
                spec1.component, spec2.component
            ),
        )));
    }
    params.validate()?;
    Ok(FieldPair {
        u1: soliton_field(spec1, params.mu1, t0, grid)?,
        u2: soliton_field(spec2, params.mu2, t0, grid)?,
        t: t0,
    })
}
