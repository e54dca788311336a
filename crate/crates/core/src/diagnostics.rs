//! Conserved and localized quantities of the coupled flow, plus error norms.
//!
//! With `M(u) = |u|^2 / 2`, `E(u, mu) = |u_x|^2 / 2 - mu |u|_4^4 / 4` and
//! `P(u) = Im \int u conj(u_x) / 2`, the flow conserves `M(u_1)`, `M(u_2)`,
//! the total energy `E(u_1, mu_1) + E(u_2, mu_2) - beta/2 \int |u_1|^2 |u_2|^2`
//! and the total momentum `P(u_1) + P(u_2)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Result};
use crate::grid::GridSpec;
use crate::profiles::CoupledParams;
use crate::splitstep::FieldPair;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub m1: f64,
    pub m2: f64,
    pub energy: f64,
    pub momentum: f64,
    pub ploc1: f64,
    pub ploc2: f64,
}

impl DiagnosticsRecord {
    pub fn compute(
        pair: &FieldPair,
        params: &CoupledParams,
        grid: &GridSpec,
        cutoff_l: f64,
    ) -> Result<Self> {
        pair.check(grid)?;
        let d1 = grid.spectral_derivative(&pair.u1)?;
        let d2 = grid.spectral_derivative(&pair.u2)?;
        let density = momentum_density(pair, &d1, &d2);
        let (ploc1, ploc2) = split_momentum(&density, grid, cutoff_l);
        Ok(Self {
            t: pair.t,
            m1: mass(&pair.u1, grid)?,
            m2: mass(&pair.u2, grid)?,
            energy: energy_with_derivatives(pair, &d1, &d2, params, grid),
            momentum: grid.spacing() * density.iter().sum::<f64>(),
            ploc1,
            ploc2,
        })
    }
}

/// `M(u) = (1/2) \int |u|^2`.
pub fn mass(u: &[Complex64], grid: &GridSpec) -> Result<f64> {
    check_len(grid.len(), u.len())?;
    Ok(0.5 * grid.spacing() * u.iter().map(|z| z.norm_sqr()).sum::<f64>())
}

pub fn energy(pair: &FieldPair, params: &CoupledParams, grid: &GridSpec) -> Result<f64> {
    pair.check(grid)?;
    let d1 = grid.spectral_derivative(&pair.u1)?;
    let d2 = grid.spectral_derivative(&pair.u2)?;
    Ok(energy_with_derivatives(pair, &d1, &d2, params, grid))
}

/// Scalar energy `E(u, mu)` of one component.
pub fn scalar_energy(u: &[Complex64], mu: f64, grid: &GridSpec) -> Result<f64> {
    let du = grid.spectral_derivative(u)?;
    let kinetic: f64 = du.iter().map(|z| z.norm_sqr()).sum();
    let quartic: f64 = u.iter().map(|z| z.norm_sqr().powi(2)).sum();
    Ok(grid.spacing() * (0.5 * kinetic - 0.25 * mu * quartic))
}

fn energy_with_derivatives(
    pair: &FieldPair,
    d1: &[Complex64],
    d2: &[Complex64],
    params: &CoupledParams,
    grid: &GridSpec,
) -> f64 {
    let mut sum = 0.0;
    for k in 0..grid.len() {
        let r1 = pair.u1[k].norm_sqr();
        let r2 = pair.u2[k].norm_sqr();
        sum += 0.5 * (d1[k].norm_sqr() + d2[k].norm_sqr())
            - 0.25 * (params.mu1 * r1 * r1 + params.mu2 * r2 * r2)
            - 0.5 * params.beta * r1 * r2;
    }
    grid.spacing() * sum
}

fn momentum_density(pair: &FieldPair, d1: &[Complex64], d2: &[Complex64]) -> Vec<f64> {
    (0..pair.u1.len())
        .map(|k| 0.5 * ((pair.u1[k] * d1[k].conj()).im + (pair.u2[k] * d2[k].conj()).im))
        .collect()
}

fn split_momentum(density: &[f64], grid: &GridSpec, cutoff_l: f64) -> (f64, f64) {
    let (mut p1, mut p2) = (0.0, 0.0);
    for (p, &x) in density.iter().zip(grid.nodes()) {
        let w = cutoff_chi(x / cutoff_l);
        p1 += w * p;
        p2 += (1.0 - w) * p;
    }
    (grid.spacing() * p1, grid.spacing() * p2)
}

/// Total momentum `P(u_1) + P(u_2)`.
pub fn momentum(pair: &FieldPair, grid: &GridSpec) -> Result<f64> {
    pair.check(grid)?;
    let d1 = grid.spectral_derivative(&pair.u1)?;
    let d2 = grid.spectral_derivative(&pair.u2)?;
    Ok(grid.spacing() * momentum_density(pair, &d1, &d2).iter().sum::<f64>())
}

/// Momentum weighted by `chi(x / L)` for `j = 1` and `1 - chi(x / L)` for `j = 2`.
pub fn localized_momentum(pair: &FieldPair, grid: &GridSpec, cutoff_l: f64, j: u8) -> Result<f64> {
    if !(cutoff_l.is_finite() && cutoff_l > 0.0) {
        return Err(crate::Error::Domain(format!(
            "cutoff length must be positive, got {cutoff_l}"
        )));
    }
    if !matches!(j, 1 | 2) {
        return Err(crate::Error::Domain(format!(
            "component must be 1 or 2, got {j}"
        )));
    }
    pair.check(grid)?;
    let d1 = grid.spectral_derivative(&pair.u1)?;
    let d2 = grid.spectral_derivative(&pair.u2)?;
    let (p1, p2) = split_momentum(&momentum_density(pair, &d1, &d2), grid, cutoff_l);
    Ok(if j == 1 { p1 } else { p2 })
}

/// C^3 monotone cutoff: 0 for `x <= -1`, 1 for `x >= 1`, and the septic
/// smoothstep `35 s^4 - 84 s^5 + 70 s^6 - 20 s^7` of `s = (x + 1) / 2` between.
pub fn cutoff_chi(x: f64) -> f64 {
    if x <= -1.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        let s = 0.5 * (x + 1.0);
        s.powi(4) * (35.0 + s * (-84.0 + s * (70.0 - 20.0 * s)))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorNorms {
    pub sup: f64,
    pub l2: f64,
}

pub fn error_norms(f: &[Complex64], g: &[Complex64], grid: &GridSpec) -> Result<ErrorNorms> {
    check_len(grid.len(), f.len())?;
    check_len(grid.len(), g.len())?;
    let mut sup: f64 = 0.0;
    let mut sq = 0.0;
    for (a, b) in f.iter().zip(g) {
        let d = (a - b).norm();
        sup = sup.max(d);
        sq += d * d;
    }
    Ok(ErrorNorms {
        sup,
        l2: (grid.spacing() * sq).sqrt(),
    })
}

/// `log2(e_coarse / e_fine)` for errors at step sizes `tau` and `tau / 2`.
pub fn observed_order(e_coarse: f64, e_fine: f64) -> f64 {
    (e_coarse / e_fine).log2()
}
