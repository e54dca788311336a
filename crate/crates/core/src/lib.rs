//! Coupled cubic nonlinear Schrodinger system
//!
//! ```text
//! i d_t u_j + d_xx u_j + (mu_j |u_j|^2 + beta |u_{3-j}|^2) u_j = 0,  j = 1, 2
//! ```
//!
//! on a periodic interval: Strang split-step Fourier integration, soliton
//! initial data, conserved-quantity diagnostics, the closed-form Manakov
//! collision shifts, a normalized gradient flow for coupled ground states,
//! and post-collision analysis.

pub mod analysis;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod experiment;
pub mod gradientflow;
pub mod grid;
pub mod io;
pub mod manakov;
pub mod profiles;
pub mod splitstep;

pub use config::{parse_config, ConfigError, RunConfig};
pub use error::{Error, Result};
pub use grid::{make_grid, GridSpec};
pub use profiles::{CoupledParams, SolitonSpec};
pub use splitstep::{evolve, strang_step, EvolveConfig, FieldPair};
