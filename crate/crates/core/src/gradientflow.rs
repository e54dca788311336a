//! Normalized gradient flow for the coupled ground state with prescribed
//! L2 norms, discretized by semi-implicit backward Euler finite differences
//! with homogeneous Dirichlet ends.
//!
//! Each iteration solves, per component,
//! `(1/tau - D_h - mu_j phi_j^2 - beta phi_{3-j}^2) phi_j* = phi_j / tau`
//! with the potentials frozen at the previous iterate, then rescales
//! `phi_j* ` so that `h sum phi_j^2` equals its target.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profiles::CoupledParams;

/// Finite-difference grid on `[-a, a]` with `n` intervals. Unknowns live on
/// the `n - 1` interior nodes; both end values are zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FdGrid {
    pub half_width: f64,
    pub intervals: usize,
}

impl FdGrid {
    pub fn new(half_width: f64, intervals: usize) -> Result<Self> {
        if !(half_width.is_finite() && half_width > 0.0) {
            return Err(Error::Domain(format!(
                "flow domain half width must be positive, got {half_width}"
            )));
        }
        if intervals < 4 {
            return Err(Error::Domain(format!(
                "flow grid needs at least 4 intervals, got {intervals}"
            )));
        }
        Ok(Self {
            half_width,
            intervals,
        })
    }

    /// Default domain `a = 16 max(1, 1/sqrt(omega_hat))` with `omega_hat`
    /// the scalar frequency of the heavier component, `(mu a^2 / 4)^2`, and
    /// spacing at most 1/16.
    pub fn default_for(params: &CoupledParams, targets: [f64; 2]) -> Result<Self> {
        let omega_hat = (params.mu1 * targets[0] / 4.0)
            .max(params.mu2 * targets[1] / 4.0)
            .powi(2);
        if !(omega_hat.is_finite() && omega_hat > 0.0) {
            return Err(Error::Domain("flow targets must be positive".into()));
        }
        let a = 16.0 * (1.0 / omega_hat.sqrt()).max(1.0);
        let intervals = (2.0 * a * 16.0).ceil() as usize;
        Self::new(a, intervals)
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.intervals as f64
    }

    pub fn interior_len(&self) -> usize {
        self.intervals - 1
    }

    pub fn interior_nodes(&self) -> Vec<f64> {
        let h = self.spacing();
        (1..self.intervals)
            .map(|i| -self.half_width + i as f64 * h)
            .collect()
    }

    /// Evaluates the sine-series interpolant of interior values (odd
    /// extension about both ends) at `x`, returning value, first and second
    /// derivatives. Zero outside the domain.
    pub fn interpolate(&self, coeffs: &SineSeries, x: f64) -> [f64; 3] {
        if x <= -self.half_width || x >= self.half_width {
            return [0.0; 3];
        }
        let k = std::f64::consts::PI / (2.0 * self.half_width);
        let theta = k * (x + self.half_width);
        let step = num_complex::Complex64::cis(theta);
        let mut rot = step;
        let mut out = [0.0; 3];
        for (idx, &b) in coeffs.0.iter().enumerate() {
            let freq = (idx + 1) as f64 * k;
            out[0] += b * rot.im;
            out[1] += b * freq * rot.re;
            out[2] -= b * freq * freq * rot.im;
            rot *= step;
        }
        out
    }

    pub fn sine_series(&self, interior: &[f64]) -> Result<SineSeries> {
        check_len(self.interior_len(), interior)?;
        let m = self.intervals;
        let coeffs = (1..m)
            .map(|n| {
                let theta = std::f64::consts::PI * n as f64 / m as f64;
                let step = num_complex::Complex64::cis(theta);
                let mut rot = step;
                let mut acc = 0.0;
                for &v in interior {
                    acc += v * rot.im;
                    rot *= step;
                }
                2.0 * acc / m as f64
            })
            .collect();
        Ok(SineSeries(coeffs))
    }
}

fn check_len(expected: usize, v: &[f64]) -> Result<()> {
    crate::error::check_len(expected, v.len())
}

#[derive(Debug, Clone, PartialEq)]
pub struct SineSeries(pub Vec<f64>);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FlowConfig {
    pub tau: f64,
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            tau: 0.1,
            tol: 1e-8,
            max_iter: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundStateResult {
    pub grid: FdGrid,
    pub phi1: Vec<f64>,
    pub phi2: Vec<f64>,
    pub omega1: f64,
    pub omega2: f64,
    pub iterations: usize,
    pub residual: f64,
    /// Discrete energy of the initial guess followed by every iterate.
    pub energy_trace: Vec<f64>,
}

impl GroundStateResult {
    pub fn profile(&self, j: u8) -> &[f64] {
        if j == 1 {
            &self.phi1
        } else {
            &self.phi2
        }
    }
}

/// Thomas algorithm for `lower[i] x[i-1] + diag[i] x[i] + upper[i] x[i+1] = rhs[i]`.
/// `lower[0]` and `upper[n-1]` are ignored.
pub fn tridiagonal_solve(
    lower: &[f64],
    diag: &[f64],
    upper: &[f64],
    rhs: &[f64],
) -> Result<Vec<f64>> {
    let n = diag.len();
    check_len(n, lower)?;
    check_len(n, upper)?;
    check_len(n, rhs)?;
    if n == 0 {
        return Ok(Vec::new());
    }
    let scale = diag
        .iter()
        .chain(lower)
        .chain(upper)
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let tiny = f64::EPSILON * scale.max(f64::MIN_POSITIVE);

    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut pivot = diag[0];
    if pivot.abs() <= tiny || !pivot.is_finite() {
        return Err(Error::Singular { row: 0 });
    }
    c[0] = upper[0] / pivot;
    d[0] = rhs[0] / pivot;
    for i in 1..n {
        pivot = diag[i] - lower[i] * c[i - 1];
        if pivot.abs() <= tiny || !pivot.is_finite() {
            return Err(Error::Singular { row: i });
        }
        c[i] = if i + 1 < n { upper[i] / pivot } else { 0.0 };
        d[i] = (rhs[i] - lower[i] * d[i - 1]) / pivot;
    }
    let mut x = d;
    for i in (0..n - 1).rev() {
        x[i] -= c[i] * x[i + 1];
    }
    Ok(x)
}

fn l2_sq(phi: &[f64], h: f64) -> f64 {
    h * phi.iter().map(|v| v * v).sum::<f64>()
}

/// One backward-Euler step followed by projection onto the mass constraints.
/// `targets[j]` is the prescribed `\int phi_j^2`.
pub fn befd_step(
    phi: &[Vec<f64>; 2],
    params: &CoupledParams,
    targets: [f64; 2],
    tau: f64,
    h: f64,
) -> Result<[Vec<f64>; 2]> {
    if !(tau.is_finite() && tau > 0.0 && h.is_finite() && h > 0.0) {
        return Err(Error::Domain(format!(
            "flow step needs tau, h > 0; got {tau}, {h}"
        )));
    }
    let n = phi[0].len();
    check_len(n, &phi[1])?;
    let inv_h2 = 1.0 / (h * h);
    let off = vec![-inv_h2; n];
    let mut out: [Vec<f64>; 2] = [Vec::new(), Vec::new()];
    for j in 0..2 {
        let (own, other) = (&phi[j], &phi[1 - j]);
        let mu = if j == 0 { params.mu1 } else { params.mu2 };
        let diag: Vec<f64> = own
            .iter()
            .zip(other)
            .map(|(p, q)| 1.0 / tau + 2.0 * inv_h2 - mu * p * p - params.beta * q * q)
            .collect();
        let rhs: Vec<f64> = own.iter().map(|p| p / tau).collect();
        let star = tridiagonal_solve(&off, &diag, &off, &rhs)
            .map_err(|e| Error::StepFailure(format!("component {}: {e}", j + 1)))?;
        let norm_sq = l2_sq(&star, h);
        if !(norm_sq.is_finite() && norm_sq > 0.0) {
            return Err(Error::StepFailure(format!(
                "component {} collapsed to zero norm",
                j + 1
            )));
        }
        let scale = (targets[j] / norm_sq).sqrt();
        out[j] = star.into_iter().map(|v| v * scale).collect();
    }
    Ok(out)
}

/// `\int |phi'|^2` from midpoint differences, including the two boundary edges.
fn gradient_sq(phi: &[f64], h: f64) -> f64 {
    let n = phi.len();
    let at = |i: isize| -> f64 {
        if i < 0 || i as usize >= n {
            0.0
        } else {
            phi[i as usize]
        }
    };
    (0..=n as isize)
        .map(|i| {
            let d = (at(i) - at(i - 1)) / h;
            d * d
        })
        .sum::<f64>()
        * h
}

/// Frequency of one component from the Rayleigh-type quotient
/// `[\int (-|phi_j'|^2 + mu_j phi_j^4 + beta phi_1^2 phi_2^2)] / \int phi_j^2`.
pub fn omega_component(phi: &[Vec<f64>; 2], params: &CoupledParams, h: f64, j: u8) -> Result<f64> {
    check_len(phi[0].len(), &phi[1])?;
    let idx = usize::from(j == 2);
    let own = &phi[idx];
    let mass = l2_sq(own, h);
    if mass.is_nan() || mass <= 0.0 {
        return Err(Error::Domain(format!(
            "component {j} has zero mass; its frequency is undefined"
        )));
    }
    let mu = if idx == 0 { params.mu1 } else { params.mu2 };
    let quartic = h * own.iter().map(|p| p.powi(4)).sum::<f64>();
    let cross = h * phi[0]
        .iter()
        .zip(&phi[1])
        .map(|(a, b)| a * a * b * b)
        .sum::<f64>();
    Ok((-gradient_sq(own, h) + mu * quartic + params.beta * cross) / mass)
}

pub fn compute_omega(phi: &[Vec<f64>; 2], params: &CoupledParams, h: f64) -> Result<(f64, f64)> {
    Ok((
        omega_component(phi, params, h, 1)?,
        omega_component(phi, params, h, 2)?,
    ))
}

/// Discrete total energy of real profiles.
pub fn discrete_energy(phi: &[Vec<f64>; 2], params: &CoupledParams, h: f64) -> f64 {
    let quartic = |p: &[f64]| h * p.iter().map(|v| v.powi(4)).sum::<f64>();
    let cross = h * phi[0]
        .iter()
        .zip(&phi[1])
        .map(|(a, b)| a * a * b * b)
        .sum::<f64>();
    0.5 * (gradient_sq(&phi[0], h) + gradient_sq(&phi[1], h))
        - 0.25 * (params.mu1 * quartic(&phi[0]) + params.mu2 * quartic(&phi[1]))
        - 0.5 * params.beta * cross
}

/// `-D_h phi_j + omega_j phi_j - mu_j phi_j^3 - beta phi_{3-j}^2 phi_j`, sup norm.
pub fn stationary_residual(
    phi: &[Vec<f64>; 2],
    params: &CoupledParams,
    omegas: (f64, f64),
    h: f64,
) -> f64 {
    let n = phi[0].len();
    let mut worst: f64 = 0.0;
    for j in 0..2 {
        let (own, other) = (&phi[j], &phi[1 - j]);
        let (mu, omega) = if j == 0 {
            (params.mu1, omegas.0)
        } else {
            (params.mu2, omegas.1)
        };
        for i in 0..n {
            let left = if i > 0 { own[i - 1] } else { 0.0 };
            let right = if i + 1 < n { own[i + 1] } else { 0.0 };
            let lap = (left - 2.0 * own[i] + right) / (h * h);
            let r = -lap + omega * own[i]
                - mu * own[i].powi(3)
                - params.beta * other[i].powi(2) * own[i];
            worst = worst.max(r.abs());
        }
    }
    worst
}

/// Gaussian `exp(-x^2/2)` scaled to each target.
pub fn initial_guess(grid: &FdGrid, targets: [f64; 2]) -> [Vec<f64>; 2] {
    let h = grid.spacing();
    let base: Vec<f64> = grid
        .interior_nodes()
        .iter()
        .map(|x| (-x * x / 2.0).exp())
        .collect();
    let norm_sq = l2_sq(&base, h);
    let scaled = |target: f64| {
        let s = (target / norm_sq).sqrt();
        base.iter().map(|v| v * s).collect::<Vec<_>>()
    };
    [scaled(targets[0]), scaled(targets[1])]
}

pub fn solve_ground_state(
    params: &CoupledParams,
    targets: [f64; 2],
    grid: &FdGrid,
    config: &FlowConfig,
) -> Result<GroundStateResult> {
    if !targets.iter().all(|t| t.is_finite() && *t > 0.0) {
        return Err(Error::Domain(format!(
            "flow mass targets must be positive, got {targets:?}"
        )));
    }
    if !(config.tol.is_finite() && config.tol > 0.0) {
        return Err(Error::Domain(format!(
            "flow tolerance must be positive, got {}",
            config.tol
        )));
    }
    let h = grid.spacing();
    let mut phi = initial_guess(grid, targets);
    let mut trace = vec![discrete_energy(&phi, params, h)];
    let mut residual = f64::INFINITY;
    for iter in 1..=config.max_iter {
        let next = befd_step(&phi, params, targets, config.tau, h)?;
        residual = next
            .iter()
            .zip(&phi)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
            / config.tau;
        phi = next;
        trace.push(discrete_energy(&phi, params, h));
        if residual <= config.tol {
            if phi.iter().flatten().any(|&v| v < 0.0) {
                return Err(Error::StepFailure(
                    "converged profile lost positivity".into(),
                ));
            }
            let (omega1, omega2) = compute_omega(&phi, params, h)?;
            let [phi1, phi2] = phi;
            return Ok(GroundStateResult {
                grid: *grid,
                phi1,
                phi2,
                omega1,
                omega2,
                iterations: iter,
                residual,
                energy_trace: trace,
            });
        }
    }
    Err(Error::NonConvergence {
        iterations: config.max_iter,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[allow(clippy::needless_range_loop)]
    fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
        // Gaussian elimination with partial pivoting.
        let n = b.len();
        for col in 0..n {
            let p = (col..n)
                .max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))
                .unwrap();
            a.swap(col, p);
            b.swap(col, p);
            for row in col + 1..n {
                let f = a[row][col] / a[col][col];
                for k in col..n {
                    a[row][k] -= f * a[col][k];
                }
                b[row] -= f * b[col];
            }
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|k| a[i][k] * x[k]).sum();
            x[i] = (b[i] - s) / a[i][i];
        }
        x
    }

    fn tri_mul(lower: &[f64], diag: &[f64], upper: &[f64], x: &[f64]) -> Vec<f64> {
        let n = x.len();
        (0..n)
            .map(|i| {
                let mut v = diag[i] * x[i];
                if i > 0 {
                    v += lower[i] * x[i - 1];
                }
                if i + 1 < n {
                    v += upper[i] * x[i + 1];
                }
                v
            })
            .collect()
    }

    #[test]
    fn identity_system() {
        let rhs = vec![1.0, -2.0, 3.5, 0.25];
        let x = tridiagonal_solve(&[0.0; 4], &[1.0; 4], &[0.0; 4], &rhs).unwrap();
        assert_eq!(x, rhs);
    }

    #[test]
    fn three_by_three_against_dense() {
        let lower = [0.0, 1.0, 1.0];
        let diag = [2.0, 2.0, 2.0];
        let upper = [1.0, 1.0, 0.0];
        let rhs = [1.0, 0.0, 1.0];
        let x = tridiagonal_solve(&lower, &diag, &upper, &rhs).unwrap();
        let dense = dense_solve(
            vec![
                vec![2.0, 1.0, 0.0],
                vec![1.0, 2.0, 1.0],
                vec![0.0, 1.0, 2.0],
            ],
            rhs.to_vec(),
        );
        // Dense elimination gives (1, -1, 1).
        for (a, b) in x.iter().zip(&dense) {
            assert!((a - b).abs() < 1e-14);
        }
        assert!(
            (x[0] - 1.0).abs() < 1e-14 && (x[1] + 1.0).abs() < 1e-14 && (x[2] - 1.0).abs() < 1e-14
        );
    }

    #[test]
    fn dirichlet_laplacian_recovers_known_vector() {
        let n = 200;
        let lower = vec![-1.0; n];
        let upper = vec![-1.0; n];
        let diag = vec![2.0; n];
        let known: Vec<f64> = (0..n)
            .map(|i| ((i as f64) * 0.37).sin() + 0.01 * i as f64)
            .collect();
        let rhs = tri_mul(&lower, &diag, &upper, &known);
        let x = tridiagonal_solve(&lower, &diag, &upper, &rhs).unwrap();
        let err = x
            .iter()
            .zip(&known)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-10, "{err}");
    }

    #[test]
    fn zero_pivot_is_singular() {
        let err =
            tridiagonal_solve(&[0.0, 1.0], &[0.0, 1.0], &[1.0, 0.0], &[1.0, 1.0]).unwrap_err();
        assert!(matches!(err, Error::Singular { row: 0 }));
        // [[1, 1], [1, 1]] eliminates to a zero pivot in row 1.
        let err =
            tridiagonal_solve(&[0.0, 1.0], &[1.0, 1.0], &[1.0, 0.0], &[1.0, 1.0]).unwrap_err();
        assert!(matches!(err, Error::Singular { row: 1 }));
    }

    proptest! {
        #[test]
        fn diagonally_dominant_residual(
            off in proptest::collection::vec(-1.0f64..1.0, 2..60),
            rhs_seed in -5.0f64..5.0,
        ) {
            let n = off.len();
            let lower = off.clone();
            let upper: Vec<f64> = off.iter().rev().cloned().collect();
            let diag: Vec<f64> = (0..n).map(|i| 2.5 + (i as f64 * 0.1).sin()).collect();
            let rhs: Vec<f64> = (0..n).map(|i| rhs_seed * (i as f64 + 1.0).cos()).collect();
            let x = tridiagonal_solve(&lower, &diag, &upper, &rhs).unwrap();
            let back = tri_mul(&lower, &diag, &upper, &x);
            let scale = rhs.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
            let res = back.iter().zip(&rhs).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            prop_assert!(res <= 1e-10 * scale);
        }
    }

    #[test]
    fn befd_normalizes_exactly() {
        let grid = FdGrid::new(8.0, 128).unwrap();
        let params = CoupledParams::new(1.0, 2.0, -0.5);
        let targets = [1.7, 0.3];
        let mut phi = initial_guess(&grid, [1.0, 1.0]);
        for _ in 0..5 {
            phi = befd_step(&phi, &params, targets, 0.1, grid.spacing()).unwrap();
            for j in 0..2 {
                let m = l2_sq(&phi[j], grid.spacing());
                assert!((m - targets[j]).abs() <= 1e-12 * targets[j]);
            }
        }
    }

    #[test]
    fn linear_flow_converges_to_lowest_sine_mode() {
        let grid = FdGrid::new(4.0, 64).unwrap();
        let params = CoupledParams::new(0.0, 0.0, 0.0);
        let h = grid.spacing();
        let mut phi = initial_guess(&grid, [1.0, 2.0]);
        for _ in 0..3000 {
            phi = befd_step(&phi, &params, [1.0, 2.0], 0.5, h).unwrap();
        }
        let mode: Vec<f64> = (1..64)
            .map(|i| (std::f64::consts::PI * i as f64 / 64.0).sin())
            .collect();
        let norm = l2_sq(&mode, h);
        for (j, target) in [1.0f64, 2.0].iter().enumerate() {
            let s = (target / norm).sqrt();
            let err = phi[j]
                .iter()
                .zip(&mode)
                .map(|(a, b)| (a - s * b).abs())
                .fold(0.0, f64::max);
            assert!(err < 1e-10, "component {j}: {err}");
        }
        // Its eigenvalue: -omega = 4/h^2 sin^2(pi / (2n)) with opposite sign convention.
        let expected = -4.0 / (h * h) * (std::f64::consts::PI / 128.0).sin().powi(2);
        let (w1, _) = compute_omega(&phi, &params, h).unwrap();
        assert!((w1 - expected).abs() < 1e-10, "{w1} vs {expected}");
    }

    #[test]
    fn omega_of_sampled_soliton_profile() {
        let grid = FdGrid::new(16.0, 512).unwrap();
        let h = grid.spacing();
        let params = CoupledParams::new(1.0, 1.0, 0.0);
        for &omega in &[1.0f64, 4.0] {
            let q: Vec<f64> = grid
                .interior_nodes()
                .iter()
                .map(|&x| crate::profiles::ground_profile(omega, x).unwrap())
                .collect();
            let mass = l2_sq(&q, h);
            assert!((mass - 4.0 * omega.sqrt()).abs() < 1e-8);
            let w = omega_component(&[q.clone(), q], &params, h, 1).unwrap();
            // mass-frequency relation omega = (mu a^2 / 4)^2
            assert!((w - (mass / 4.0).powi(2)).abs() < 1e-3 * omega, "{w}");
        }
    }

    #[test]
    fn zero_component_has_undefined_omega() {
        let grid = FdGrid::new(8.0, 64).unwrap();
        let [p1, _] = initial_guess(&grid, [1.0, 1.0]);
        let phi = [p1, vec![0.0; 63]];
        let params = CoupledParams::new(1.0, 1.0, 1.0);
        assert!(omega_component(&phi, &params, grid.spacing(), 1)
            .unwrap()
            .is_finite());
        let err = compute_omega(&phi, &params, grid.spacing()).unwrap_err();
        assert!(matches!(err, Error::Domain(ref m) if m.contains("component 2")));
    }

    #[test]
    fn scalar_ground_state() {
        let grid = FdGrid::new(16.0, 512).unwrap();
        let params = CoupledParams::new(1.0, 1.0, 0.0);
        let res = solve_ground_state(&params, [4.0, 4.0], &grid, &FlowConfig::default()).unwrap();
        assert!((res.omega1 - 1.0).abs() < 1e-3);
        assert!((res.omega2 - 1.0).abs() < 1e-3);
        let err = res
            .phi1
            .iter()
            .zip(grid.interior_nodes())
            .map(|(p, x)| (p - 2f64.sqrt() / x.cosh()).abs())
            .fold(0.0, f64::max);
        assert!(err <= 1e-3, "{err}");
        let resid = stationary_residual(
            &[res.phi1.clone(), res.phi2.clone()],
            &params,
            (res.omega1, res.omega2),
            grid.spacing(),
        );
        assert!(resid <= 10.0 * 1e-8, "stationary residual {resid}");
    }

    #[test]
    fn converged_state_is_a_fixed_point() {
        let grid = FdGrid::new(12.0, 256).unwrap();
        let params = CoupledParams::new(1.0, 1.0, 0.8);
        let config = FlowConfig {
            tau: 0.1,
            tol: 1e-12,
            max_iter: 100_000,
        };
        let res = solve_ground_state(&params, [3.0, 1.0], &grid, &config).unwrap();
        let phi = [res.phi1.clone(), res.phi2.clone()];
        let next = befd_step(&phi, &params, [3.0, 1.0], 0.1, grid.spacing()).unwrap();
        let diff = next
            .iter()
            .zip(&phi)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max);
        assert!(diff <= 1e-10, "{diff}");
    }

    #[test]
    fn symmetric_problem_gives_equal_components() {
        let grid = FdGrid::new(12.0, 256).unwrap();
        for &beta in &[-0.5, 0.5, 2.0] {
            let params = CoupledParams::new(1.5, 1.5, beta);
            let res =
                solve_ground_state(&params, [2.0, 2.0], &grid, &FlowConfig::default()).unwrap();
            let diff = res
                .phi1
                .iter()
                .zip(&res.phi2)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            assert!(diff <= 1e-8, "beta {beta}: {diff}");
        }
    }

    #[test]
    fn energy_decreases_and_mass_is_exact() {
        let grid = FdGrid::new(16.0, 512).unwrap();
        let params = CoupledParams::new(1.0, 1.0, 3.0);
        let targets = [3.5, 0.1];
        let res = solve_ground_state(&params, targets, &grid, &FlowConfig::default()).unwrap();
        for w in res.energy_trace.windows(2).skip(10) {
            assert!(w[1] <= w[0] + 1e-12, "energy rose {} -> {}", w[0], w[1]);
        }
        for (j, t) in targets.iter().enumerate() {
            let m = l2_sq(res.profile(j as u8 + 1), grid.spacing());
            assert!((m - t).abs() <= 1e-12 * t);
        }
        assert!(res.phi1.iter().chain(&res.phi2).all(|&v| v >= 0.0));
    }

    #[test]
    fn grid_refinement_is_second_order() {
        let params = CoupledParams::new(1.0, 1.0, 0.0);
        let config = FlowConfig {
            tau: 0.1,
            tol: 1e-11,
            max_iter: 100_000,
        };
        let omegas: Vec<f64> = [128usize, 256, 512]
            .iter()
            .map(|&n| {
                let grid = FdGrid::new(16.0, n).unwrap();
                solve_ground_state(&params, [4.0, 4.0], &grid, &config)
                    .unwrap()
                    .omega1
            })
            .collect();
        let ratio = (omegas[0] - omegas[1]) / (omegas[1] - omegas[2]);
        assert!((3.5..=4.5).contains(&ratio), "{omegas:?} ratio {ratio}");
    }

    #[test]
    fn non_convergence_reports_residual() {
        let grid = FdGrid::new(8.0, 64).unwrap();
        let params = CoupledParams::new(1.0, 1.0, 0.0);
        let config = FlowConfig {
            tau: 0.1,
            tol: 1e-8,
            max_iter: 3,
        };
        match solve_ground_state(&params, [1.0, 1.0], &grid, &config) {
            Err(Error::NonConvergence {
                iterations: 3,
                residual,
            }) => assert!(residual > 1e-8),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn sine_interpolation_reproduces_nodes_and_smooth_profiles() {
        let grid = FdGrid::new(16.0, 512).unwrap();
        let q: Vec<f64> = grid
            .interior_nodes()
            .iter()
            .map(|&x| 2f64.sqrt() / x.cosh())
            .collect();
        let series = grid.sine_series(&q).unwrap();
        for (i, &x) in grid.interior_nodes().iter().enumerate().step_by(37) {
            assert!((grid.interpolate(&series, x)[0] - q[i]).abs() < 1e-12);
        }
        for &x in &[-3.21, 0.0123, 1.5, 7.77] {
            let [v, d1, _] = grid.interpolate(&series, x);
            assert!((v - 2f64.sqrt() / f64::cosh(x)).abs() < 1e-9);
            assert!((d1 + 2f64.sqrt() * f64::tanh(x) / f64::cosh(x)).abs() < 1e-8);
        }
        assert_eq!(grid.interpolate(&series, 20.0), [0.0; 3]);
    }

    #[test]
    fn default_domain() {
        let g = FdGrid::default_for(&CoupledParams::new(1.0, 1.0, 3.0), [3.893, 0.069]).unwrap();
        assert!(g.half_width >= 16.0 && g.spacing() <= 1.0 / 16.0);
        let g = FdGrid::default_for(&CoupledParams::new(1.0, 1.0, 0.0), [1.0, 1.0]).unwrap();
        // omega_hat = 1/16 widens the domain to 64.
        assert!((g.half_width - 64.0).abs() < 1e-12);
    }
}
