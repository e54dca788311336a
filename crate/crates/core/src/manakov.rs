//! Closed-form outcome of a two-soliton collision in the integrable case
//! `mu1 = mu2 = beta`: the solitons keep speed and amplitude and pick up a
//! translation `tau_j` and a unit phase factor `theta_j`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::grid::GridSpec;
use crate::profiles::{q_unchecked, SolitonSpec};
use crate::splitstep::FieldPair;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ManakovShift {
    pub chi1: Complex64,
    pub chi2: Complex64,
    pub tau1: f64,
    pub tau2: f64,
    pub theta1: Complex64,
    pub theta2: Complex64,
}

impl ManakovShift {
    /// No translation and no phase change.
    pub fn identity() -> Self {
        let one = Complex64::new(1.0, 0.0);
        Self {
            chi1: one,
            chi2: one,
            tau1: 0.0,
            tau2: 0.0,
            theta1: one,
            theta2: one,
        }
    }

    pub fn tau(&self, j: u8) -> f64 {
        if j == 1 {
            self.tau1
        } else {
            self.tau2
        }
    }
}

pub fn collision_shift(omega1: f64, omega2: f64, v1: f64, v2: f64) -> Result<ManakovShift> {
    if !(omega1.is_finite() && omega1 > 0.0 && omega2.is_finite() && omega2 > 0.0) {
        return Err(Error::Domain(format!(
            "collision shift needs positive frequencies, got {omega1}, {omega2}"
        )));
    }
    if !(v1.is_finite() && v2.is_finite()) {
        return Err(Error::Domain("velocities must be finite".into()));
    }
    let (s1, s2) = (omega1.sqrt(), omega2.sqrt());
    let dv = v1 - v2;
    if dv == 0.0 && s1 == s2 {
        return Err(Error::Domain(
            "collision shift is undefined for identical velocities and frequencies".into(),
        ));
    }
    let numerator = Complex64::new(dv, 2.0 * (s1 + s2));
    let chi1 = numerator / Complex64::new(dv, 2.0 * (s1 - s2));
    let chi2 = numerator / Complex64::new(dv, -2.0 * (s1 - s2));
    Ok(ManakovShift {
        chi1,
        chi2,
        tau1: -chi1.norm().ln() / s1,
        tau2: chi2.norm().ln() / s2,
        theta1: chi1 / chi1.norm(),
        theta2: chi2 / chi2.norm(),
    })
}

/// Outgoing solitons predicted at time `t`. `mu` scales amplitudes by
/// `1/sqrt(mu)` (1 in the integrable experiments). Only meaningful once the
/// predicted solitons are well separated.
pub fn predicted_outgoing(
    shift: &ManakovShift,
    spec1: &SolitonSpec,
    spec2: &SolitonSpec,
    mu: f64,
    t: f64,
    grid: &GridSpec,
) -> Result<FieldPair> {
    spec1.validate()?;
    spec2.validate()?;
    if !(mu.is_finite() && mu > 0.0) {
        return Err(Error::Domain(format!("mu must be positive, got {mu}")));
    }
    let build = |spec: &SolitonSpec, theta: Complex64, tau: f64| -> Vec<Complex64> {
        let amp = 1.0 / mu.sqrt();
        let temporal = (spec.omega - spec.v * spec.v / 4.0) * t + spec.gamma;
        grid.nodes()
            .iter()
            .map(|&x| {
                let q = q_unchecked(spec.omega, x - spec.v * t - spec.x0 - tau);
                theta * Complex64::from_polar(amp * q, temporal + spec.v * x / 2.0)
            })
            .collect()
    };
    Ok(FieldPair {
        u1: build(spec1, shift.theta1, shift.tau1),
        u2: build(spec2, shift.theta2, shift.tau2),
        t,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElasticError {
    /// `sup_k | |u_j|^2 - |u_hat_j|^2 |` per component.
    pub sup_density_error: [f64; 2],
    /// Translation of the numerical density relative to the predicted one.
    pub fitted_shift: [f64; 2],
}

pub fn elastic_error(
    numeric: &FieldPair,
    predicted: &FieldPair,
    grid: &GridSpec,
) -> Result<ElasticError> {
    numeric.check(grid)?;
    predicted.check(grid)?;
    let [n1, n2] = numeric.densities();
    let [p1, p2] = predicted.densities();
    let sup = |a: &[f64], b: &[f64]| {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    };
    Ok(ElasticError {
        sup_density_error: [sup(&n1, &p1), sup(&n2, &p2)],
        fitted_shift: [
            fitted_translation(&n1, &p1, grid)?,
            fitted_translation(&n2, &p2, grid)?,
        ],
    })
}

/// Translation `s` maximizing the periodic cross-correlation
/// `sum_k a(x_k) b(x_k - s)`, refined below the grid spacing by a parabola
/// through the three correlation values around the discrete maximum.
pub fn fitted_translation(a: &[f64], b: &[f64], grid: &GridSpec) -> Result<f64> {
    check_len(grid.len(), a.len())?;
    check_len(grid.len(), b.len())?;
    let n = grid.len();
    let mut fa: Vec<Complex64> = a.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    let mut fb: Vec<Complex64> = b.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    grid.forward_in_place(&mut fa);
    grid.forward_in_place(&mut fb);
    let mut corr: Vec<Complex64> = fa.iter().zip(&fb).map(|(x, y)| x * y.conj()).collect();
    grid.inverse_in_place(&mut corr);
    let (best, _) = corr
        .iter()
        .enumerate()
        .fold((0usize, f64::NEG_INFINITY), |acc, (k, z)| {
            if z.re > acc.1 {
                (k, z.re)
            } else {
                acc
            }
        });
    let at = |k: isize| corr[k.rem_euclid(n as isize) as usize].re;
    let (ym, y0, yp) = (
        at(best as isize - 1),
        at(best as isize),
        at(best as isize + 1),
    );
    let denom = ym - 2.0 * y0 + yp;
    let frac = if denom < 0.0 {
        0.5 * (ym - yp) / denom
    } else {
        0.0
    };
    let lag = crate::grid::mode_number(best, n) as f64 + frac;
    Ok(lag * grid.spacing())
}
