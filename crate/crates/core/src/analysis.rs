//! Post-collision analysis: sharp left/right split, L2 bookkeeping, peak
//! trajectories and comparison against gradient-flow ground states.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::gradientflow::GroundStateResult;
use crate::grid::GridSpec;
use crate::splitstep::FieldPair;

/// Left part keeps nodes with `x <= 0`; right part keeps the rest.
pub fn split_at_origin(pair: &FieldPair, grid: &GridSpec) -> Result<(FieldPair, FieldPair)> {
    pair.check(grid)?;
    let zero = Complex64::new(0.0, 0.0);
    let mask = |u: &[Complex64], keep_left: bool| -> Vec<Complex64> {
        u.iter()
            .zip(grid.nodes())
            .map(|(&z, &x)| if (x <= 0.0) == keep_left { z } else { zero })
            .collect()
    };
    let left = FieldPair {
        u1: mask(&pair.u1, true),
        u2: mask(&pair.u2, true),
        t: pair.t,
    };
    let right = FieldPair {
        u1: mask(&pair.u1, false),
        u2: mask(&pair.u2, false),
        t: pair.t,
    };
    Ok((left, right))
}

/// `\int |u_j|^2` per component, without the 1/2 of the mass functional.
pub fn l2_masses(pair: &FieldPair, grid: &GridSpec) -> Result<[f64; 2]> {
    pair.check(grid)?;
    let [d1, d2] = pair.densities();
    Ok([grid.quadrature(&d1)?, grid.quadrature(&d2)?])
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensitySnapshot {
    pub t: f64,
    pub densities: [Vec<f64>; 2],
}

impl DensitySnapshot {
    pub fn of(pair: &FieldPair) -> Self {
        Self {
            t: pair.t,
            densities: pair.densities(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub position: f64,
    pub height: f64,
    /// The maximum was attained at more than one node within 1e-12.
    pub ambiguous: bool,
}

/// Discrete argmax refined by a parabola through its two neighbours.
pub fn locate_peak(density: &[f64], grid: &GridSpec) -> Result<Peak> {
    check_len(grid.len(), density.len())?;
    let n = density.len();
    let (best, max) =
        density
            .iter()
            .enumerate()
            .fold((0usize, f64::NEG_INFINITY), |acc, (k, &v)| {
                if v > acc.1 {
                    (k, v)
                } else {
                    acc
                }
            });
    let ambiguous = density.iter().filter(|&&v| v >= max - 1e-12).count() > 1;
    let at = |k: isize| density[k.rem_euclid(n as isize) as usize];
    let (ym, y0, yp) = (at(best as isize - 1), max, at(best as isize + 1));
    let denom = ym - 2.0 * y0 + yp;
    let (frac, height) = if denom < 0.0 {
        let frac = 0.5 * (ym - yp) / denom;
        (frac, y0 - 0.25 * (ym - yp) * frac)
    } else {
        (0.0, y0)
    };
    Ok(Peak {
        position: grid.nodes()[best] + frac * grid.spacing(),
        height,
        ambiguous,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeakTrack {
    pub times: Vec<f64>,
    /// Unwrapped across the periodic boundary.
    pub positions: [Vec<f64>; 2],
    pub heights: [Vec<f64>; 2],
    pub velocities: [f64; 2],
    pub ambiguous: [bool; 2],
}

/// Peak trajectory per component and the least-squares velocity over the
/// trailing `window` fraction of snapshots (at least two).
pub fn peak_track(
    snapshots: &[DensitySnapshot],
    grid: &GridSpec,
    window: f64,
) -> Result<PeakTrack> {
    if snapshots.len() < 2 {
        return Err(Error::Domain(format!(
            "peak tracking needs at least 2 snapshots, got {}",
            snapshots.len()
        )));
    }
    if !(window > 0.0 && window <= 1.0) {
        return Err(Error::Domain(format!(
            "velocity window must lie in (0, 1], got {window}"
        )));
    }
    let period = 2.0 * grid.half_width();
    let mut track = PeakTrack {
        times: snapshots.iter().map(|s| s.t).collect(),
        positions: [Vec::new(), Vec::new()],
        heights: [Vec::new(), Vec::new()],
        velocities: [0.0; 2],
        ambiguous: [false; 2],
    };
    for j in 0..2 {
        for snap in snapshots {
            let peak = locate_peak(&snap.densities[j], grid)?;
            let mut x = peak.position;
            if let Some(&prev) = track.positions[j].last() {
                x -= period * ((x - prev) / period).round();
            }
            track.positions[j].push(x);
            track.heights[j].push(peak.height);
            track.ambiguous[j] |= peak.ambiguous;
        }
    }
    let count = ((snapshots.len() as f64 * window).ceil() as usize).clamp(2, snapshots.len());
    let start = snapshots.len() - count;
    for j in 0..2 {
        track.velocities[j] = ls_slope(&track.times[start..], &track.positions[j][start..]);
    }
    Ok(track)
}

fn ls_slope(t: &[f64], x: &[f64]) -> f64 {
    let n = t.len() as f64;
    let tm = t.iter().sum::<f64>() / n;
    let xm = x.iter().sum::<f64>() / n;
    let num: f64 = t.iter().zip(x).map(|(a, b)| (a - tm) * (b - xm)).sum();
    let den: f64 = t.iter().map(|a| (a - tm).powi(2)).sum();
    num / den
}

/// Maximizer of a smooth function given value/derivative/curvature oracle,
/// starting from `x`. Newton steps are clamped to `max_step`.
fn newton_peak(mut x: f64, max_step: f64, eval: impl Fn(f64) -> [f64; 3]) -> f64 {
    for _ in 0..50 {
        let [_, d1, d2] = eval(x);
        if d2 >= 0.0 {
            break;
        }
        let dx = (-d1 / d2).clamp(-max_step, max_step);
        x += dx;
        if dx.abs() < 1e-13 * (1.0 + x.abs()) {
            break;
        }
    }
    x
}

/// Peak of a nodal density, refined on its trigonometric interpolant.
pub fn spectral_peak(density: &[f64], grid: &GridSpec) -> Result<f64> {
    let start = locate_peak(density, grid)?.position;
    let mut hat: Vec<Complex64> = density.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    grid.forward_in_place(&mut hat);
    Ok(newton_peak(start, grid.spacing(), |x| {
        let [v, d1, d2] = grid.interpolate(&hat, x);
        [v.re, d1.re, d2.re]
    }))
}

/// Density of a ground-state profile resampled onto the spectral grid after
/// moving its peak to `target_peak`.
pub fn aligned_profile_density(
    gs: &GroundStateResult,
    j: u8,
    target_peak: f64,
    grid: &GridSpec,
) -> Result<Vec<f64>> {
    let fd = gs.grid;
    let profile = gs.profile(j);
    let series = fd.sine_series(profile)?;
    let (k, _) = profile
        .iter()
        .enumerate()
        .fold((0usize, f64::NEG_INFINITY), |acc, (k, &v)| {
            if v > acc.1 {
                (k, v)
            } else {
                acc
            }
        });
    let start = fd.interior_nodes()[k];
    let own_peak = newton_peak(start, fd.spacing(), |x| fd.interpolate(&series, x));
    let shift = target_peak - own_peak;
    Ok(grid
        .nodes()
        .iter()
        .map(|&x| fd.interpolate(&series, x - shift)[0].powi(2))
        .collect())
}

/// `sup_k | |u_j^-(x_k)|^2 - phi_j(x_k - s_j)^2 |` with `s_j` aligning the peaks.
pub fn compare_to_ground_state(
    left: &FieldPair,
    gs: &GroundStateResult,
    grid: &GridSpec,
) -> Result<[f64; 2]> {
    left.check(grid)?;
    let densities = left.densities();
    let mut out = [0.0; 2];
    for j in 0..2 {
        let rho = &densities[j];
        let peak = spectral_peak(rho, grid)?;
        let model = aligned_profile_density(gs, j as u8 + 1, peak, grid)?;
        out[j] = rho
            .iter()
            .zip(&model)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
    }
    Ok(out)
}

/// Summary of a collision run, serialized with flat keys.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CollisionReport {
    pub t_final: f64,
    pub total_mass_1: f64,
    pub total_mass_2: f64,
    pub left_mass_1: f64,
    pub left_mass_2: f64,
    pub right_mass_1: f64,
    pub right_mass_2: f64,
    pub peak_position_1: f64,
    pub peak_position_2: f64,
    pub peak_height_1: f64,
    pub peak_height_2: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub velocity_estimate_1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub velocity_estimate_2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub ground_state_mass_1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub ground_state_mass_2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub ground_state_omega_1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub ground_state_omega_2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub ground_state_iterations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub ground_state_sup_error_1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub ground_state_sup_error_2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub predicted_shift_1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub predicted_shift_2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub fitted_shift_1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub fitted_shift_2: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub elastic_sup_error_1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub elastic_sup_error_2: Option<f64>,
}

impl CollisionReport {
    /// Mass split and peak data of the final state.
    pub fn from_final_state(pair: &FieldPair, grid: &GridSpec) -> Result<Self> {
        let (left, right) = split_at_origin(pair, grid)?;
        let total = l2_masses(pair, grid)?;
        let l = l2_masses(&left, grid)?;
        let r = l2_masses(&right, grid)?;
        let [d1, d2] = pair.densities();
        let p1 = locate_peak(&d1, grid)?;
        let p2 = locate_peak(&d2, grid)?;
        Ok(Self {
            t_final: pair.t,
            total_mass_1: total[0],
            total_mass_2: total[1],
            left_mass_1: l[0],
            left_mass_2: l[1],
            right_mass_1: r[0],
            right_mass_2: r[1],
            peak_position_1: p1.position,
            peak_position_2: p2.position,
            peak_height_1: p1.height,
            peak_height_2: p2.height,
            ..Self::default()
        })
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}
