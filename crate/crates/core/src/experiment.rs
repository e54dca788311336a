//! Running configured experiments: evolution with a background writer,
//! followed by the report pipelines.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;
use std::sync::mpsc;
use std::thread;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::analysis::{
    compare_to_ground_state, l2_masses, peak_track, split_at_origin, CollisionReport,
    DensitySnapshot, PeakTrack,
};
use crate::config::{GroundStateSection, MassSource, OutputFormat, RunConfig};
use crate::diagnostics::{observed_order, DiagnosticsRecord};
use crate::error::{Error, Result};
use crate::gradientflow::{solve_ground_state, FdGrid, GroundStateResult};
use crate::grid::GridSpec;
use crate::io::{write_diagnostics_header, write_diagnostics_row, write_snapshot};
use crate::manakov::{collision_shift, elastic_error, predicted_outgoing, ManakovShift};
use crate::profiles::initial_data;
use crate::splitstep::{evolve, EvolveConfig, EvolveSink, FieldPair};

/// Everything a run produces, in memory.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub initial: FieldPair,
    pub final_state: FieldPair,
    pub diagnostics: Vec<DiagnosticsRecord>,
    pub track: Option<PeakTrack>,
    pub ground_state: Option<GroundStateResult>,
    pub manakov: Option<ManakovShift>,
    pub report: CollisionReport,
}

enum WriteJob {
    Diagnostics(DiagnosticsRecord),
    Snapshot(usize, FieldPair),
}

struct RunSink<'a> {
    grid: &'a GridSpec,
    config: &'a RunConfig,
    diagnostics: Vec<DiagnosticsRecord>,
    densities: Vec<DensitySnapshot>,
    writer: Option<mpsc::Sender<WriteJob>>,
}

impl RunSink<'_> {
    fn send(&self, job: WriteJob) -> Result<()> {
        if let Some(tx) = &self.writer {
            // A closed channel means the writer stopped on an error, which
            // surfaces when it is joined.
            let _ = tx.send(job);
        }
        Ok(())
    }
}

impl EvolveSink for RunSink<'_> {
    fn on_diagnostics(&mut self, _step: usize, state: &FieldPair) -> Result<()> {
        let rec = DiagnosticsRecord::compute(
            state,
            &self.config.params,
            self.grid,
            self.config.run.cutoff_l,
        )?;
        self.diagnostics.push(rec);
        if self.config.output.wants(OutputFormat::Diagnostics) {
            self.send(WriteJob::Diagnostics(rec))?;
        }
        Ok(())
    }

    fn on_snapshot(&mut self, step: usize, state: &FieldPair) -> Result<()> {
        self.densities.push(DensitySnapshot::of(state));
        if self.config.output.wants(OutputFormat::Snapshots) {
            self.send(WriteJob::Snapshot(step, state.clone()))?;
        }
        Ok(())
    }
}

fn write_loop(
    rx: mpsc::Receiver<WriteJob>,
    dir: &Path,
    grid: &GridSpec,
    diagnostics: bool,
) -> Result<()> {
    let mut diag = if diagnostics {
        let mut w = BufWriter::new(File::create(dir.join("diagnostics.csv"))?);
        write_diagnostics_header(&mut w)?;
        Some(w)
    } else {
        None
    };
    for job in rx {
        match job {
            WriteJob::Diagnostics(rec) => {
                if let Some(w) = diag.as_mut() {
                    write_diagnostics_row(w, &rec)?;
                }
            }
            WriteJob::Snapshot(step, pair) => {
                let path = dir
                    .join("snapshots")
                    .join(format!("snapshot_{step:06}.csv"));
                let mut w = BufWriter::new(File::create(path)?);
                write_snapshot(&mut w, &pair, grid)?;
                w.flush()?;
            }
        }
    }
    if let Some(mut w) = diag {
        w.flush()?;
    }
    Ok(())
}

/// Builds the initial data, evolves it and runs the report pipelines.
/// Files are written to the configured directory for each requested format;
/// with no formats nothing touches the file system.
pub fn run_experiment(config: &RunConfig) -> Result<RunOutcome> {
    let grid = GridSpec::new(config.grid.half_width, config.grid.points)?;
    let initial = initial_data(
        &config.soliton1,
        &config.soliton2,
        &config.params,
        config.run.t0,
        &grid,
    )?;
    let evolve_cfg = EvolveConfig {
        tau: config.run.tau,
        t_final: config.run.t_final,
        snapshot_stride: config.run.snapshot_stride,
        diagnostics_stride: config.run.diagnostics_stride,
    };
    let dir = config.output.directory.clone();
    let writes_files = !config.output.formats.is_empty();
    if writes_files {
        fs::create_dir_all(&dir)?;
        fs::write(dir.join("config.cfg"), config.to_text())?;
    }
    if config.output.wants(OutputFormat::Snapshots) {
        fs::create_dir_all(dir.join("snapshots"))?;
    }
    let streams = config.output.wants(OutputFormat::Diagnostics)
        || config.output.wants(OutputFormat::Snapshots);

    let mut state = initial.clone();
    let sink = thread::scope(|scope| -> Result<RunSink<'_>> {
        let (tx, rx) = mpsc::channel();
        let writer = streams.then(|| {
            let (dir, grid) = (&dir, &grid);
            let diag = config.output.wants(OutputFormat::Diagnostics);
            scope.spawn(move || write_loop(rx, dir, grid, diag))
        });
        let mut sink = RunSink {
            grid: &grid,
            config,
            diagnostics: Vec::new(),
            densities: Vec::new(),
            writer: writer.is_some().then_some(tx),
        };
        let stepped = evolve(&mut state, &config.params, &grid, &evolve_cfg, &mut sink);
        sink.writer = None;
        let written = match writer {
            Some(handle) => handle
                .join()
                .unwrap_or_else(|_| Err(Error::StepFailure("output writer panicked".into()))),
            None => Ok(()),
        };
        stepped?;
        written?;
        Ok(sink)
    })?;
    let RunSink {
        diagnostics,
        densities,
        ..
    } = sink;

    let mut report = CollisionReport::from_final_state(&state, &grid)?;
    let track = if densities.len() >= 2 {
        let track = peak_track(&densities, &grid, config.run.velocity_window)?;
        report.velocity_estimate_1 = Some(track.velocities[0]);
        report.velocity_estimate_2 = Some(track.velocities[1]);
        Some(track)
    } else {
        None
    };

    let ground_state = match &config.groundstate {
        Some(gs_cfg) => {
            let (left, _) = split_at_origin(&state, &grid)?;
            let targets = match gs_cfg.masses {
                MassSource::FromLeftSplit => l2_masses(&left, &grid)?,
                MassSource::Explicit(m) => m,
            };
            let gs = solve_configured_ground_state(config, gs_cfg, targets)?;
            let errors = compare_to_ground_state(&left, &gs, &grid)?;
            report.ground_state_mass_1 = Some(targets[0]);
            report.ground_state_mass_2 = Some(targets[1]);
            report.ground_state_omega_1 = Some(gs.omega1);
            report.ground_state_omega_2 = Some(gs.omega2);
            report.ground_state_iterations = Some(gs.iterations);
            report.ground_state_sup_error_1 = Some(errors[0]);
            report.ground_state_sup_error_2 = Some(errors[1]);
            Some(gs)
        }
        None => None,
    };

    let manakov = if config.params.is_integrable() {
        let (s1, s2) = (&config.soliton1, &config.soliton2);
        let shift = collision_shift(s1.omega, s2.omega, s1.v, s2.v)?;
        let mu = config.params.mu1;
        let t = state.t;
        let predicted = predicted_outgoing(&shift, s1, s2, mu, t, &grid)?;
        let unshifted = predicted_outgoing(&ManakovShift::identity(), s1, s2, mu, t, &grid)?;
        let err = elastic_error(&state, &predicted, &grid)?;
        let fit = elastic_error(&state, &unshifted, &grid)?;
        report.predicted_shift_1 = Some(shift.tau1);
        report.predicted_shift_2 = Some(shift.tau2);
        report.fitted_shift_1 = Some(fit.fitted_shift[0]);
        report.fitted_shift_2 = Some(fit.fitted_shift[1]);
        report.elastic_sup_error_1 = Some(err.sup_density_error[0]);
        report.elastic_sup_error_2 = Some(err.sup_density_error[1]);
        Some(shift)
    } else {
        None
    };

    if config.output.wants(OutputFormat::Report) {
        fs::write(dir.join("report.json"), report.to_json()? + "\n")?;
    }

    Ok(RunOutcome {
        initial,
        final_state: state,
        diagnostics,
        track,
        ground_state,
        manakov,
        report,
    })
}

fn flow_grid(config: &RunConfig, gs: &GroundStateSection, targets: [f64; 2]) -> Result<FdGrid> {
    let default = FdGrid::default_for(&config.params, targets)?;
    let a = gs.fd_half_width.unwrap_or(default.half_width);
    match gs.fd_spacing {
        Some(h) => FdGrid::new(a, (2.0 * a / h).round() as usize),
        None if gs.fd_half_width.is_some() => FdGrid::new(a, (2.0 * a * 16.0).ceil() as usize),
        None => Ok(default),
    }
}

fn solve_configured_ground_state(
    config: &RunConfig,
    gs: &GroundStateSection,
    targets: [f64; 2],
) -> Result<GroundStateResult> {
    let grid = flow_grid(config, gs, targets)?;
    solve_ground_state(&config.params, targets, &grid, &gs.flow)
}

/// Ground state for a config whose `[groundstate]` block lists explicit masses.
pub fn run_ground_state(config: &RunConfig) -> Result<GroundStateResult> {
    let gs = config.groundstate.as_ref().ok_or_else(|| {
        Error::Config(crate::config::ConfigError::new(
            None,
            "missing section [groundstate]",
        ))
    })?;
    let targets = match gs.masses {
        MassSource::Explicit(m) => m,
        MassSource::FromLeftSplit => {
            return Err(Error::Config(crate::config::ConfigError::new(
                None,
                "masses = from-left-split needs a collision run; use `run` or give explicit masses",
            )))
        }
    };
    solve_configured_ground_state(config, gs, targets)
}

/// Writes the profiles as `x,phi1,phi2` including the zero end values.
pub fn write_ground_state<W: Write>(mut w: W, gs: &GroundStateResult) -> Result<()> {
    writeln!(w, "x,phi1,phi2")?;
    let h = gs.grid.spacing();
    let a = gs.grid.half_width;
    let n = gs.grid.intervals;
    for k in 0..=n {
        let (p1, p2) = if k == 0 || k == n {
            (0.0, 0.0)
        } else {
            (gs.phi1[k - 1], gs.phi2[k - 1])
        };
        writeln!(w, "{:.16e},{p1:.16e},{p2:.16e}", -a + k as f64 * h)?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub taus: Vec<f64>,
    pub reference_tau: f64,
    /// Sup error over both components at the final time.
    pub errors: Vec<f64>,
    pub orders: Vec<f64>,
}

impl ConvergenceReport {
    pub fn passes(&self, low: f64, high: f64) -> bool {
        !self.orders.is_empty() && self.orders.iter().all(|p| (low..=high).contains(p))
    }
}

fn final_state(config: &RunConfig, grid: &GridSpec, tau: f64) -> Result<FieldPair> {
    let mut state = initial_data(
        &config.soliton1,
        &config.soliton2,
        &config.params,
        config.run.t0,
        grid,
    )?;
    evolve(
        &mut state,
        &config.params,
        grid,
        &EvolveConfig::new(tau, config.run.t_final),
        &mut (),
    )?;
    Ok(state)
}

/// Runs the configured problem at each of `taus` and at `reference_tau`,
/// and reports observed orders between successive step sizes.
pub fn convergence_study(
    config: &RunConfig,
    taus: &[f64],
    reference_tau: f64,
) -> Result<ConvergenceReport> {
    let grid = GridSpec::new(config.grid.half_width, config.grid.points)?;
    let reference = final_state(config, &grid, reference_tau)?;
    let sup = |a: &[Complex64], b: &[Complex64]| {
        a.iter()
            .zip(b)
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max)
    };
    let mut errors = Vec::with_capacity(taus.len());
    for &tau in taus {
        let s = final_state(config, &grid, tau)?;
        errors.push(sup(&s.u1, &reference.u1).max(sup(&s.u2, &reference.u2)));
    }
    let orders = errors
        .windows(2)
        .map(|w| observed_order(w[0], w[1]))
        .collect();
    Ok(ConvergenceReport {
        taus: taus.to_vec(),
        reference_tau,
        errors,
        orders,
    })
}

/// The tau, tau/2, tau/4 study against a tau/100 reference.
pub fn default_convergence_study(config: &RunConfig) -> Result<ConvergenceReport> {
    let tau = config.run.tau;
    convergence_study(config, &[tau, tau / 2.0, tau / 4.0], tau / 100.0)
}
