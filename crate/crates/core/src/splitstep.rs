//! Second-order Strang splitting with a Fourier spectral linear step.
//!
//! One step of size `tau` is `N(tau/2) L(tau) N(tau/2)` where
//! `N(dt)` rotates each component by `exp(i dt (mu_j |u_j|^2 + beta |u_{3-j}|^2))`
//! and `L(tau)` multiplies each spectrum by `exp(-i tau nu_m^2)`.

use num_complex::Complex64;

use crate::error::{check_len, Error, Result};
use crate::grid::GridSpec;
use crate::profiles::CoupledParams;

#[derive(Debug, Clone, PartialEq)]
pub struct FieldPair {
    pub u1: Vec<Complex64>,
    pub u2: Vec<Complex64>,
    pub t: f64,
}

impl FieldPair {
    pub fn zeros(n: usize, t: f64) -> Self {
        Self {
            u1: vec![Complex64::new(0.0, 0.0); n],
            u2: vec![Complex64::new(0.0, 0.0); n],
            t,
        }
    }

    pub fn component(&self, j: u8) -> &[Complex64] {
        if j == 1 {
            &self.u1
        } else {
            &self.u2
        }
    }

    pub fn densities(&self) -> [Vec<f64>; 2] {
        [
            self.u1.iter().map(|z| z.norm_sqr()).collect(),
            self.u2.iter().map(|z| z.norm_sqr()).collect(),
        ]
    }

    pub fn is_finite(&self) -> bool {
        self.u1
            .iter()
            .chain(&self.u2)
            .all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub(crate) fn check(&self, grid: &GridSpec) -> Result<()> {
        check_len(grid.len(), self.u1.len())?;
        check_len(grid.len(), self.u2.len())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvolveConfig {
    pub tau: f64,
    pub t_final: f64,
    /// Steps between snapshot callbacks; 0 disables them.
    pub snapshot_stride: usize,
    /// Steps between diagnostics callbacks; 0 disables them.
    pub diagnostics_stride: usize,
}

impl EvolveConfig {
    pub fn new(tau: f64, t_final: f64) -> Self {
        Self {
            tau,
            t_final,
            snapshot_stride: 0,
            diagnostics_stride: 0,
        }
    }

    /// Number of steps from `t_start` to `t_final`. The span must be an
    /// integer multiple of `tau` up to rounding.
    pub fn step_count(&self, t_start: f64) -> Result<usize> {
        if !(self.tau.is_finite() && self.tau > 0.0) {
            return Err(Error::Domain(format!(
                "time step must be positive, got {}",
                self.tau
            )));
        }
        let span = (self.t_final - t_start).abs();
        let steps = span / self.tau;
        let rounded = steps.round();
        if !steps.is_finite() || (steps - rounded).abs() > 1e-9 * rounded.max(1.0) {
            return Err(Error::Domain(format!(
                "time span {span} is not an integer multiple of tau = {}",
                self.tau
            )));
        }
        Ok(rounded as usize)
    }
}

/// Receives states during [`evolve`]. Both hooks default to no-ops.
pub trait EvolveSink {
    fn on_diagnostics(&mut self, _step: usize, _state: &FieldPair) -> Result<()> {
        Ok(())
    }

    fn on_snapshot(&mut self, _step: usize, _state: &FieldPair) -> Result<()> {
        Ok(())
    }
}

impl EvolveSink for () {}

/// Nonlinear sub-flow over `dt`, using moduli frozen at entry.
pub fn nonlinear_half_step(state: &mut FieldPair, params: &CoupledParams, dt: f64) {
    let CoupledParams { mu1, mu2, beta } = *params;
    for (a, b) in state.u1.iter_mut().zip(state.u2.iter_mut()) {
        let d1 = a.norm_sqr();
        let d2 = b.norm_sqr();
        *a *= Complex64::cis(dt * (mu1 * d1 + beta * d2));
        *b *= Complex64::cis(dt * (mu2 * d2 + beta * d1));
    }
}

/// Exact free Schrodinger flow `i u_t + u_xx = 0` over `tau` on the grid.
pub fn linear_full_step(state: &mut FieldPair, grid: &GridSpec, tau: f64) -> Result<()> {
    state.check(grid)?;
    let multiplier = free_multiplier(grid, tau);
    for u in [&mut state.u1, &mut state.u2] {
        grid.forward_in_place(u);
        u.iter_mut().zip(&multiplier).for_each(|(z, m)| *z *= m);
        grid.inverse_in_place(u);
    }
    Ok(())
}

fn free_multiplier(grid: &GridSpec, tau: f64) -> Vec<Complex64> {
    grid.freqs()
        .iter()
        .map(|&nu| Complex64::cis(-tau * nu * nu))
        .collect()
}

/// Strang propagator with a precomputed linear multiplier for one step size.
#[derive(Debug, Clone)]
pub struct Propagator {
    grid: GridSpec,
    params: CoupledParams,
    tau: f64,
    multiplier: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

impl Propagator {
    /// `tau` may be negative for backward integration.
    pub fn new(grid: &GridSpec, params: CoupledParams, tau: f64) -> Result<Self> {
        if !(tau.is_finite() && tau != 0.0) {
            return Err(Error::Domain(format!(
                "time step must be finite and nonzero, got {tau}"
            )));
        }
        Ok(Self {
            grid: grid.clone(),
            params,
            tau,
            multiplier: free_multiplier(grid, tau),
            scratch: vec![Complex64::new(0.0, 0.0); grid.scratch_len()],
        })
    }

    /// Zero every mode with `|m| > N/3` after each linear step (2/3 rule).
    /// Off by default.
    pub fn with_dealiasing(mut self) -> Self {
        let n = self.grid.len();
        for (k, m) in self.multiplier.iter_mut().enumerate() {
            if 3 * crate::grid::mode_number(k, n).unsigned_abs() as usize > n {
                *m = Complex64::new(0.0, 0.0);
            }
        }
        self
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn params(&self) -> &CoupledParams {
        &self.params
    }

    /// Advances `state` by one step; the time is set by the caller through `t_after`.
    fn advance(&mut self, state: &mut FieldPair) {
        let half = 0.5 * self.tau;
        nonlinear_half_step(state, &self.params, half);
        for u in [&mut state.u1, &mut state.u2] {
            self.grid.forward_with_scratch(u, &mut self.scratch);
            u.iter_mut()
                .zip(&self.multiplier)
                .for_each(|(z, m)| *z *= m);
            self.grid.inverse_with_scratch(u, &mut self.scratch);
        }
        nonlinear_half_step(state, &self.params, half);
    }

    pub fn strang_step(&mut self, state: &mut FieldPair) -> Result<()> {
        state.check(&self.grid)?;
        let t_before = state.t;
        self.advance(state);
        state.t = t_before + self.tau;
        if !state.is_finite() {
            return Err(Error::Diverged {
                t: state.t,
                last_good: t_before,
            });
        }
        Ok(())
    }
}

/// One Strang step on a fresh propagator; prefer [`Propagator`] in loops.
pub fn strang_step(
    state: &mut FieldPair,
    params: &CoupledParams,
    grid: &GridSpec,
    tau: f64,
) -> Result<()> {
    Propagator::new(grid, *params, tau)?.strang_step(state)
}

/// Integrates from `state.t` to `config.t_final` (in either direction),
/// calling the sink at step 0, every stride, and at the final step.
pub fn evolve<S: EvolveSink + ?Sized>(
    state: &mut FieldPair,
    params: &CoupledParams,
    grid: &GridSpec,
    config: &EvolveConfig,
    sink: &mut S,
) -> Result<()> {
    state.check(grid)?;
    let steps = config.step_count(state.t)?;
    let t_start = state.t;
    let direction = if config.t_final >= t_start { 1.0 } else { -1.0 };
    let mut prop = Propagator::new(grid, *params, direction * config.tau)?;
    evolve_with(&mut prop, state, t_start, steps, config, sink)?;
    state.t = config.t_final;
    Ok(())
}

pub(crate) fn evolve_with<S: EvolveSink + ?Sized>(
    prop: &mut Propagator,
    state: &mut FieldPair,
    t_start: f64,
    steps: usize,
    config: &EvolveConfig,
    sink: &mut S,
) -> Result<()> {
    let due =
        |stride: usize, step: usize| stride > 0 && (step.is_multiple_of(stride) || step == steps);
    if due(config.diagnostics_stride, 0) {
        sink.on_diagnostics(0, state)?;
    }
    if due(config.snapshot_stride, 0) {
        sink.on_snapshot(0, state)?;
    }
    for step in 1..=steps {
        let last_good = state.t;
        prop.advance(state);
        // Times are recomputed from the start to avoid accumulating rounding.
        state.t = t_start + step as f64 * prop.tau;
        if !state.is_finite() {
            return Err(Error::Diverged {
                t: state.t,
                last_good,
            });
        }
        if due(config.diagnostics_stride, step) {
            sink.on_diagnostics(step, state)?;
        }
        if due(config.snapshot_stride, step) {
            sink.on_snapshot(step, state)?;
        }
    }
    Ok(())
}
