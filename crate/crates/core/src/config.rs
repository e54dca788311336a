//! Line-oriented experiment configuration.
//!
//! ```text
//! # comment
//! [grid]
//! a = 20
//! N = 1024
//! [params]
//! mu1 = 1
//! mu2 = 1
//! beta = 1
//! [soliton1]
//! omega = 5
//! v = 1
//! x0 = 0
//! [soliton2]
//! omega = 1
//! v = -1
//! x0 = 0
//! [run]
//! t0 = -10
//! t_final = 10
//! tau = 0.001
//! ```
//!
//! Sections `[output]` and `[groundstate]` are optional. Values are bare
//! tokens (no quoting); lists are comma separated.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use crate::gradientflow::FlowConfig;
use crate::profiles::{CoupledParams, SolitonSpec};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub msg: String,
}

impl ConfigError {
    pub fn new(line: Option<usize>, msg: impl Into<String>) -> Self {
        Self {
            line,
            msg: msg.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "config error at line {line}: {}", self.msg),
            None => write!(f, "config error: {}", self.msg),
        }
    }
}

impl std::error::Error for ConfigError {}

type CResult<T> = std::result::Result<T, ConfigError>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridConfig {
    pub half_width: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSection {
    pub t0: f64,
    pub t_final: f64,
    pub tau: f64,
    pub snapshot_stride: usize,
    pub diagnostics_stride: usize,
    pub cutoff_l: f64,
    /// Trailing fraction of snapshots used for velocity estimates.
    pub velocity_window: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum OutputFormat {
    Diagnostics,
    Snapshots,
    Report,
}

impl OutputFormat {
    fn name(self) -> &'static str {
        match self {
            OutputFormat::Diagnostics => "diagnostics",
            OutputFormat::Snapshots => "snapshots",
            OutputFormat::Report => "report",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputConfig {
    pub directory: PathBuf,
    pub formats: Vec<OutputFormat>,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            directory: PathBuf::from("output"),
            formats: vec![
                OutputFormat::Diagnostics,
                OutputFormat::Snapshots,
                OutputFormat::Report,
            ],
        }
    }
}

impl OutputConfig {
    pub fn wants(&self, format: OutputFormat) -> bool {
        self.formats.contains(&format)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MassSource {
    /// Use the left-split L2 masses of the final state.
    FromLeftSplit,
    Explicit([f64; 2]),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroundStateSection {
    pub masses: MassSource,
    pub fd_half_width: Option<f64>,
    pub fd_spacing: Option<f64>,
    pub flow: FlowConfig,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub grid: GridConfig,
    pub params: CoupledParams,
    pub soliton1: SolitonSpec,
    pub soliton2: SolitonSpec,
    pub run: RunSection,
    pub output: OutputConfig,
    pub groundstate: Option<GroundStateSection>,
}

pub const DEFAULT_SNAPSHOT_STRIDE: usize = 1000;
pub const DEFAULT_DIAGNOSTICS_STRIDE: usize = 100;
pub const DEFAULT_CUTOFF_L: f64 = 4.0;
pub const DEFAULT_VELOCITY_WINDOW: f64 = 0.2;

const SECTIONS: &[(&str, &[&str])] = &[
    ("grid", &["a", "N"]),
    ("params", &["mu1", "mu2", "beta"]),
    ("soliton1", &["omega", "v", "x0", "gamma"]),
    ("soliton2", &["omega", "v", "x0", "gamma"]),
    (
        "run",
        &[
            "t0",
            "t_final",
            "tau",
            "snapshot_stride",
            "diagnostics_stride",
            "cutoff_L",
            "velocity_window",
        ],
    ),
    ("output", &["directory", "formats"]),
    (
        "groundstate",
        &["masses", "fd_a", "fd_h", "tau", "tol", "max_iter"],
    ),
];

#[derive(Debug, Clone)]
struct Entry {
    value: String,
    line: Option<usize>,
}

#[derive(Debug, Clone, Default)]
struct Section {
    line: Option<usize>,
    entries: BTreeMap<String, Entry>,
}

/// Sections and key/value pairs before validation.
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    sections: BTreeMap<String, Section>,
}

fn allowed_keys(section: &str) -> Option<&'static [&'static str]> {
    SECTIONS
        .iter()
        .find(|(name, _)| *name == section)
        .map(|(_, keys)| *keys)
}

impl RawConfig {
    pub fn parse(text: &str) -> CResult<Self> {
        let mut raw = RawConfig::default();
        let mut current: Option<String> = None;
        for (idx, full_line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = full_line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest
                    .strip_suffix(']')
                    .ok_or_else(|| ConfigError::new(Some(line_no), "unterminated section header"))?
                    .trim();
                if allowed_keys(name).is_none() {
                    return Err(ConfigError::new(
                        Some(line_no),
                        format!("unknown section [{name}]"),
                    ));
                }
                if raw.sections.contains_key(name) {
                    return Err(ConfigError::new(
                        Some(line_no),
                        format!("duplicate section [{name}]"),
                    ));
                }
                raw.sections.insert(
                    name.to_string(),
                    Section {
                        line: Some(line_no),
                        entries: BTreeMap::new(),
                    },
                );
                current = Some(name.to_string());
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                ConfigError::new(
                    Some(line_no),
                    format!("expected `key = value`, got `{line}`"),
                )
            })?;
            let (key, value) = (key.trim(), value.trim());
            let section = current.as_deref().ok_or_else(|| {
                ConfigError::new(
                    Some(line_no),
                    format!("key `{key}` appears before any section"),
                )
            })?;
            raw.insert(section, key, value, Some(line_no))?;
        }
        Ok(raw)
    }

    fn insert(
        &mut self,
        section: &str,
        key: &str,
        value: &str,
        line: Option<usize>,
    ) -> CResult<()> {
        let keys = allowed_keys(section)
            .ok_or_else(|| ConfigError::new(line, format!("unknown section [{section}]")))?;
        if !keys.contains(&key) {
            return Err(ConfigError::new(
                line,
                format!("unknown key `{key}` in section [{section}]"),
            ));
        }
        if value.is_empty() {
            return Err(ConfigError::new(line, format!("empty value for `{key}`")));
        }
        let sec = self.sections.entry(section.to_string()).or_default();
        if line.is_some() && sec.entries.get(key).is_some_and(|e| e.line.is_some()) {
            return Err(ConfigError::new(
                line,
                format!("duplicate key `{key}` in [{section}]"),
            ));
        }
        sec.entries.insert(
            key.to_string(),
            Entry {
                value: value.to_string(),
                line,
            },
        );
        Ok(())
    }

    /// Applies `section.key=value` on top of the parsed text.
    pub fn apply_override(&mut self, spec: &str) -> CResult<()> {
        let spec = spec.trim_start_matches('-');
        let (path, value) = spec.split_once('=').ok_or_else(|| {
            ConfigError::new(None, format!("override `{spec}` must be section.key=value"))
        })?;
        let (section, key) = path.split_once('.').ok_or_else(|| {
            ConfigError::new(None, format!("override `{path}` must be section.key"))
        })?;
        self.insert(section.trim(), key.trim(), value.trim(), None)
            .map_err(|e| ConfigError::new(None, format!("override --{path}: {}", e.msg)))
    }

    pub fn validate(&self) -> CResult<RunConfig> {
        let grid = {
            let s = self.section("grid")?;
            let cfg = GridConfig {
                half_width: s.positive("a")?,
                points: s.usize("N")?,
            };
            if cfg.points < 8 || !cfg.points.is_power_of_two() {
                return Err(s.error("N", "N must be a power of two >= 8"));
            }
            cfg
        };
        let params = {
            let s = self.section("params")?;
            CoupledParams::new(s.positive("mu1")?, s.positive("mu2")?, s.float("beta")?)
        };
        let soliton = |name: &str, component: u8| -> CResult<SolitonSpec> {
            let s = self.section(name)?;
            Ok(SolitonSpec {
                omega: s.positive("omega")?,
                v: s.float("v")?,
                x0: s.float("x0")?,
                gamma: s.float_or("gamma", 0.0)?,
                component,
            })
        };
        let soliton1 = soliton("soliton1", 1)?;
        let soliton2 = soliton("soliton2", 2)?;
        let run = {
            let s = self.section("run")?;
            let run = RunSection {
                t0: s.float("t0")?,
                t_final: s.float("t_final")?,
                tau: s.positive("tau")?,
                snapshot_stride: s.usize_or("snapshot_stride", DEFAULT_SNAPSHOT_STRIDE)?,
                diagnostics_stride: s.usize_or("diagnostics_stride", DEFAULT_DIAGNOSTICS_STRIDE)?,
                cutoff_l: s.positive_or("cutoff_L", DEFAULT_CUTOFF_L)?,
                velocity_window: s.positive_or("velocity_window", DEFAULT_VELOCITY_WINDOW)?,
            };
            if run.t_final <= run.t0 {
                return Err(s.error("t_final", "t_final must exceed t0"));
            }
            let steps = (run.t_final - run.t0) / run.tau;
            if (steps - steps.round()).abs() > 1e-9 * steps.round().max(1.0) {
                return Err(s.error("tau", "t_final - t0 must be an integer multiple of tau"));
            }
            if run.velocity_window > 1.0 {
                return Err(s.error("velocity_window", "velocity_window must lie in (0, 1]"));
            }
            run
        };
        let output = match self.sections.get("output") {
            None => OutputConfig::default(),
            Some(_) => {
                let s = self.section("output")?;
                let mut out = OutputConfig::default();
                if let Some(dir) = s.get("directory") {
                    out.directory = PathBuf::from(&dir.value);
                }
                if let Some(formats) = s.get("formats") {
                    let mut list = Vec::new();
                    for item in formats.value.split(',').map(str::trim) {
                        let f = match item {
                            "diagnostics" => OutputFormat::Diagnostics,
                            "snapshots" => OutputFormat::Snapshots,
                            "report" => OutputFormat::Report,
                            "none" => continue,
                            other => {
                                return Err(ConfigError::new(
                                    formats.line,
                                    format!("unknown output format `{other}`"),
                                ))
                            }
                        };
                        if !list.contains(&f) {
                            list.push(f);
                        }
                    }
                    list.sort();
                    out.formats = list;
                }
                out
            }
        };
        let groundstate = match self.sections.get("groundstate") {
            None => None,
            Some(_) => {
                let s = self.section("groundstate")?;
                let masses = match s.get("masses") {
                    None => MassSource::FromLeftSplit,
                    Some(e) if e.value == "from-left-split" => MassSource::FromLeftSplit,
                    Some(e) => {
                        let parts: Vec<&str> = e.value.split(',').map(str::trim).collect();
                        if parts.len() != 2 {
                            return Err(ConfigError::new(
                                e.line,
                                "masses must be `from-left-split` or two comma-separated values",
                            ));
                        }
                        let mut vals = [0.0; 2];
                        for (slot, p) in vals.iter_mut().zip(&parts) {
                            *slot = parse_float(p, e.line, "masses")?;
                            if *slot <= 0.0 {
                                return Err(ConfigError::new(e.line, "masses must be positive"));
                            }
                        }
                        MassSource::Explicit(vals)
                    }
                };
                let defaults = FlowConfig::default();
                Some(GroundStateSection {
                    masses,
                    fd_half_width: s.optional_positive("fd_a")?,
                    fd_spacing: s.optional_positive("fd_h")?,
                    flow: FlowConfig {
                        tau: s.positive_or("tau", defaults.tau)?,
                        tol: s.positive_or("tol", defaults.tol)?,
                        max_iter: s.usize_or("max_iter", defaults.max_iter)?,
                    },
                })
            }
        };
        Ok(RunConfig {
            grid,
            params,
            soliton1,
            soliton2,
            run,
            output,
            groundstate,
        })
    }

    fn section<'s>(&'s self, name: &'s str) -> CResult<SectionView<'s>> {
        self.sections
            .get(name)
            .map(|section| SectionView { name, section })
            .ok_or_else(|| ConfigError::new(None, format!("missing section [{name}]")))
    }
}

struct SectionView<'a> {
    name: &'a str,
    section: &'a Section,
}

fn parse_float(value: &str, line: Option<usize>, key: &str) -> CResult<f64> {
    let v: f64 = value.parse().map_err(|_| {
        ConfigError::new(line, format!("`{key}`: expected a number, got `{value}`"))
    })?;
    if !v.is_finite() {
        return Err(ConfigError::new(line, format!("`{key}` must be finite")));
    }
    Ok(v)
}

impl SectionView<'_> {
    fn get(&self, key: &str) -> Option<&Entry> {
        self.section.entries.get(key)
    }

    fn require(&self, key: &str) -> CResult<&Entry> {
        self.get(key).ok_or_else(|| {
            ConfigError::new(
                self.section.line,
                format!("missing key `{key}` in section [{}]", self.name),
            )
        })
    }

    fn error(&self, key: &str, msg: &str) -> ConfigError {
        let line = self.get(key).and_then(|e| e.line).or(self.section.line);
        ConfigError::new(line, msg)
    }

    fn float(&self, key: &str) -> CResult<f64> {
        let e = self.require(key)?;
        parse_float(&e.value, e.line, key)
    }

    fn float_or(&self, key: &str, default: f64) -> CResult<f64> {
        match self.get(key) {
            Some(e) => parse_float(&e.value, e.line, key),
            None => Ok(default),
        }
    }

    fn check_positive(&self, key: &str, v: f64) -> CResult<f64> {
        if v > 0.0 {
            Ok(v)
        } else {
            Err(self.error(key, &format!("`{key}` must be positive, got {v}")))
        }
    }

    fn positive(&self, key: &str) -> CResult<f64> {
        let v = self.float(key)?;
        self.check_positive(key, v)
    }

    fn positive_or(&self, key: &str, default: f64) -> CResult<f64> {
        let v = self.float_or(key, default)?;
        self.check_positive(key, v)
    }

    fn optional_positive(&self, key: &str) -> CResult<Option<f64>> {
        match self.get(key) {
            Some(_) => self.positive(key).map(Some),
            None => Ok(None),
        }
    }

    fn parse_usize(&self, e: &Entry, key: &str) -> CResult<usize> {
        e.value.parse().map_err(|_| {
            ConfigError::new(
                e.line,
                format!(
                    "`{key}`: expected a non-negative integer, got `{}`",
                    e.value
                ),
            )
        })
    }

    fn usize(&self, key: &str) -> CResult<usize> {
        let e = self.require(key)?;
        self.parse_usize(e, key)
    }

    fn usize_or(&self, key: &str, default: usize) -> CResult<usize> {
        match self.get(key) {
            Some(e) => self.parse_usize(e, key),
            None => Ok(default),
        }
    }
}

pub fn parse_config(text: &str) -> CResult<RunConfig> {
    RawConfig::parse(text)?.validate()
}

/// Parses `text`, then applies `section.key=value` overrides in order.
pub fn parse_config_with_overrides(text: &str, overrides: &[String]) -> CResult<RunConfig> {
    let mut raw = RawConfig::parse(text)?;
    for o in overrides {
        raw.apply_override(o)?;
    }
    raw.validate()
}

/// Shortest decimal that parses back to the same `f64`.
fn num(v: f64) -> String {
    format!("{v:?}")
}

impl RunConfig {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut push = |line: String| {
            s.push_str(&line);
            s.push('\n');
        };
        push("[grid]".into());
        push(format!("a = {}", num(self.grid.half_width)));
        push(format!("N = {}", self.grid.points));
        push(String::new());
        push("[params]".into());
        push(format!("mu1 = {}", num(self.params.mu1)));
        push(format!("mu2 = {}", num(self.params.mu2)));
        push(format!("beta = {}", num(self.params.beta)));
        for (name, spec) in [("soliton1", &self.soliton1), ("soliton2", &self.soliton2)] {
            push(String::new());
            push(format!("[{name}]"));
            push(format!("omega = {}", num(spec.omega)));
            push(format!("v = {}", num(spec.v)));
            push(format!("x0 = {}", num(spec.x0)));
            push(format!("gamma = {}", num(spec.gamma)));
        }
        push(String::new());
        push("[run]".into());
        push(format!("t0 = {}", num(self.run.t0)));
        push(format!("t_final = {}", num(self.run.t_final)));
        push(format!("tau = {}", num(self.run.tau)));
        push(format!("snapshot_stride = {}", self.run.snapshot_stride));
        push(format!(
            "diagnostics_stride = {}",
            self.run.diagnostics_stride
        ));
        push(format!("cutoff_L = {}", num(self.run.cutoff_l)));
        push(format!(
            "velocity_window = {}",
            num(self.run.velocity_window)
        ));
        push(String::new());
        push("[output]".into());
        push(format!("directory = {}", self.output.directory.display()));
        let formats: Vec<&str> = self.output.formats.iter().map(|f| f.name()).collect();
        push(format!(
            "formats = {}",
            if formats.is_empty() {
                "none".to_string()
            } else {
                formats.join(", ")
            }
        ));
        if let Some(gs) = &self.groundstate {
            push(String::new());
            push("[groundstate]".into());
            match gs.masses {
                MassSource::FromLeftSplit => push("masses = from-left-split".into()),
                MassSource::Explicit([a, b]) => push(format!("masses = {}, {}", num(a), num(b))),
            }
            if let Some(a) = gs.fd_half_width {
                push(format!("fd_a = {}", num(a)));
            }
            if let Some(h) = gs.fd_spacing {
                push(format!("fd_h = {}", num(h)));
            }
            push(format!("tau = {}", num(gs.flow.tau)));
            push(format!("tol = {}", num(gs.flow.tol)));
            push(format!("max_iter = {}", gs.flow.max_iter));
        }
        s
    }
}

/// The four collision experiments.
pub mod presets {
    use super::*;

    fn base(
        a: f64,
        n: usize,
        beta: f64,
        w: (f64, f64),
        v: (f64, f64),
        t_final: f64,
        dir: &str,
    ) -> RunConfig {
        RunConfig {
            grid: GridConfig {
                half_width: a,
                points: n,
            },
            params: CoupledParams::new(1.0, 1.0, beta),
            soliton1: SolitonSpec::new(w.0, v.0, 0.0, 1),
            soliton2: SolitonSpec::new(w.1, v.1, 0.0, 2),
            run: RunSection {
                t0: -10.0,
                t_final,
                tau: 1e-3,
                snapshot_stride: DEFAULT_SNAPSHOT_STRIDE,
                diagnostics_stride: DEFAULT_DIAGNOSTICS_STRIDE,
                cutoff_l: DEFAULT_CUTOFF_L,
                velocity_window: DEFAULT_VELOCITY_WINDOW,
            },
            output: OutputConfig {
                directory: PathBuf::from(dir),
                ..OutputConfig::default()
            },
            groundstate: None,
        }
    }

    /// Integrable case: elastic collision with translation and phase shifts.
    pub fn elastic() -> RunConfig {
        base(
            20.0,
            1024,
            1.0,
            (5.0, 1.0),
            (1.0, -1.0),
            10.0,
            "output/elastic",
        )
    }

    /// Strong attractive coupling: mass extraction, compared with a ground state.
    pub fn symmetric() -> RunConfig {
        let mut cfg = base(
            200.0,
            4096,
            3.0,
            (1.0, 1.0),
            (2.0, -2.0),
            40.0,
            "output/symmetric",
        );
        cfg.groundstate = Some(GroundStateSection {
            masses: MassSource::FromLeftSplit,
            fd_half_width: Some(32.0),
            fd_spacing: Some(1.0 / 16.0),
            flow: FlowConfig::default(),
        });
        cfg
    }

    /// Repulsive coupling at high speed: radiation.
    pub fn dispersive() -> RunConfig {
        base(
            500.0,
            8192,
            -1.0,
            (1.0, 1.0),
            (2.7, -2.7),
            90.0,
            "output/dispersive",
        )
    }

    /// Repulsive coupling at low speed: both solitons bounce back.
    pub fn reflexion() -> RunConfig {
        base(
            20.0,
            1024,
            -1.0,
            (1.0, 1.0),
            (0.5, -0.5),
            10.0,
            "output/reflexion",
        )
    }

    pub fn all() -> Vec<(&'static str, RunConfig)> {
        vec![
            ("elastic.cfg", elastic()),
            ("symmetric.cfg", symmetric()),
            ("dispersive.cfg", dispersive()),
            ("reflexion.cfg", reflexion()),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const ELASTIC: &str = "\
# integrable collision
[grid]
a = 20
N = 1024

[params]
mu1 = 1
mu2 = 1
beta = 1   # Manakov

[soliton1]
omega = 5
v = 1
x0 = 0

[soliton2]
omega = 1
v = -1
x0 = 0

[run]
t0 = -10
t_final = 10
tau = 1e-3
";

    #[test]
    fn parses_elastic_parameters() {
        let cfg = parse_config(ELASTIC).unwrap();
        assert_eq!(
            cfg.grid,
            GridConfig {
                half_width: 20.0,
                points: 1024
            }
        );
        assert_eq!(cfg.params, CoupledParams::new(1.0, 1.0, 1.0));
        assert_eq!(cfg.soliton1, SolitonSpec::new(5.0, 1.0, 0.0, 1));
        assert_eq!(cfg.soliton2, SolitonSpec::new(1.0, -1.0, 0.0, 2));
        assert_eq!(cfg.run.t0, -10.0);
        assert_eq!(cfg.run.t_final, 10.0);
        assert_eq!(cfg.run.tau, 1e-3);
        assert_eq!(cfg.run.snapshot_stride, 1000);
        assert_eq!(cfg.run.diagnostics_stride, 100);
        assert_eq!(cfg.run.cutoff_l, 4.0);
        assert_eq!(cfg.output, OutputConfig::default());
        assert!(cfg.groundstate.is_none());
        // Same as the built-in preset apart from the output directory.
        let mut preset = presets::elastic();
        preset.output = OutputConfig::default();
        assert_eq!(cfg, preset);
    }

    #[test]
    fn empty_file_names_first_missing_section() {
        let err = parse_config("").unwrap_err();
        assert!(err.msg.contains("[grid]"), "{err}");
        let err = parse_config("# nothing here\n\n").unwrap_err();
        assert!(err.msg.contains("[grid]"));
    }

    #[test]
    fn bad_number_reports_line() {
        let text = ELASTIC.replace("beta = 1   # Manakov", "beta = abc");
        let err = parse_config(&text).unwrap_err();
        assert_eq!(err.line, Some(9));
        assert!(err.msg.contains("beta"));
    }

    #[test]
    fn unknown_keys_and_sections_are_rejected() {
        let err = parse_config(
            &ELASTIC.replace("x0 = 0\n\n[soliton2]", "x0 = 0\nspeed = 3\n\n[soliton2]"),
        )
        .unwrap_err();
        assert_eq!(err.line, Some(15));
        assert!(err.msg.contains("speed"));
        let err = parse_config(&format!("{ELASTIC}\n[extras]\n")).unwrap_err();
        assert!(err.msg.contains("extras"));
        let err = parse_config("a = 1\n").unwrap_err();
        assert_eq!(err.line, Some(1));
    }

    #[test]
    fn constraint_violations_carry_locations() {
        let err = parse_config(&ELASTIC.replace("N = 1024", "N = 1000")).unwrap_err();
        assert_eq!(err.line, Some(4));
        let err = parse_config(&ELASTIC.replace("omega = 5", "omega = -5")).unwrap_err();
        assert_eq!(err.line, Some(12));
        let err = parse_config(&ELASTIC.replace("t_final = 10", "t_final = -20")).unwrap_err();
        assert!(err.msg.contains("t_final"));
        let err = parse_config(&ELASTIC.replace("tau = 1e-3", "tau = 0.3")).unwrap_err();
        assert!(err.msg.contains("multiple"));
        let err = parse_config(&ELASTIC.replace("mu2 = 1", "mu2 = 0")).unwrap_err();
        assert_eq!(err.line, Some(8));
        let err =
            parse_config(&ELASTIC.replace("x0 = 0\n\n[soliton2]", "\n[soliton2]")).unwrap_err();
        assert!(err.msg.contains("x0") && err.msg.contains("soliton1"));
        assert_eq!(err.line, Some(11));
        let err = parse_config(&ELASTIC.replace("a = 20", "a = inf")).unwrap_err();
        assert_eq!(err.line, Some(3));
    }

    #[test]
    fn duplicates_are_rejected() {
        assert!(parse_config(&ELASTIC.replace("N = 1024", "N = 1024\nN = 512")).is_err());
        assert!(parse_config(&format!("{ELASTIC}[grid]\n")).is_err());
    }

    #[test]
    fn overrides_take_precedence() {
        let cfg =
            parse_config_with_overrides(ELASTIC, &["--grid.N=2048".into(), "params.beta=3".into()])
                .unwrap();
        assert_eq!(cfg.grid.points, 2048);
        assert_eq!(cfg.params.beta, 3.0);
        assert!(parse_config_with_overrides(ELASTIC, &["--grid.M=4".into()]).is_err());
        assert!(parse_config_with_overrides(ELASTIC, &["--grid".into()]).is_err());
        let err = parse_config_with_overrides(ELASTIC, &["--grid.N=7".into()]).unwrap_err();
        assert!(err.msg.contains("power of two"));
    }

    #[test]
    fn groundstate_block() {
        let text =
            format!("{ELASTIC}\n[groundstate]\nmasses = 3.893, 0.069\nfd_a = 32\ntol = 1e-9\n");
        let gs = parse_config(&text).unwrap().groundstate.unwrap();
        assert_eq!(gs.masses, MassSource::Explicit([3.893, 0.069]));
        assert_eq!(gs.fd_half_width, Some(32.0));
        assert_eq!(gs.fd_spacing, None);
        assert_eq!(gs.flow.tol, 1e-9);
        assert_eq!(gs.flow.tau, 0.1);
        let text = format!("{ELASTIC}\n[groundstate]\nmasses = from-left-split\n");
        assert_eq!(
            parse_config(&text).unwrap().groundstate.unwrap().masses,
            MassSource::FromLeftSplit
        );
        let text = format!("{ELASTIC}\n[groundstate]\nmasses = 1, 2, 3\n");
        assert!(parse_config(&text).is_err());
    }

    #[test]
    fn output_block() {
        let text =
            format!("{ELASTIC}\n[output]\ndirectory = runs/a b\nformats = report, diagnostics\n");
        let out = parse_config(&text).unwrap().output;
        assert_eq!(out.directory, PathBuf::from("runs/a b"));
        assert_eq!(
            out.formats,
            vec![OutputFormat::Diagnostics, OutputFormat::Report]
        );
        let text = format!("{ELASTIC}\n[output]\nformats = pdf\n");
        assert!(parse_config(&text).is_err());
    }

    #[test]
    fn presets_match_experiment_parameters() {
        let e = presets::elastic();
        assert_eq!(
            (
                e.soliton1.omega,
                e.soliton2.omega,
                e.soliton1.v,
                e.soliton2.v
            ),
            (5.0, 1.0, 1.0, -1.0)
        );
        assert_eq!(
            (e.grid.half_width, e.grid.points, e.params.beta),
            (20.0, 1024, 1.0)
        );
        let s = presets::symmetric();
        assert_eq!(
            (
                s.grid.half_width,
                s.grid.points,
                s.params.beta,
                s.run.t_final
            ),
            (200.0, 4096, 3.0, 40.0)
        );
        assert_eq!((s.soliton1.v, s.soliton2.v), (2.0, -2.0));
        let d = presets::dispersive();
        assert_eq!(
            (d.grid.half_width, d.grid.points, d.params.beta),
            (500.0, 8192, -1.0)
        );
        assert_eq!((d.soliton1.v, d.soliton2.v), (2.7, -2.7));
        let r = presets::reflexion();
        assert_eq!(
            (r.grid.half_width, r.grid.points, r.params.beta),
            (20.0, 1024, -1.0)
        );
        assert_eq!((r.soliton1.v, r.soliton2.v), (0.5, -0.5));
        for (_, cfg) in presets::all() {
            assert_eq!(cfg.run.t0, -10.0);
            assert_eq!(cfg.run.tau, 1e-3);
            assert_eq!(parse_config(&cfg.to_text()).unwrap(), cfg);
        }
    }

    proptest! {
        #[test]
        fn text_roundtrip(
            a in 0.1f64..1e3, log_n in 3u32..14, beta in -5.0f64..5.0,
            w1 in 0.01f64..10.0, v2 in -5.0f64..5.0, gamma in -3.0f64..3.0,
            steps in 1usize..100_000, stride in 0usize..5000,
        ) {
            let mut cfg = presets::reflexion();
            cfg.grid = GridConfig { half_width: a, points: 1 << log_n };
            cfg.params.beta = beta;
            cfg.soliton1.omega = w1;
            cfg.soliton2.v = v2;
            cfg.soliton2.gamma = gamma;
            cfg.run.tau = 0.5;
            cfg.run.t_final = cfg.run.t0 + steps as f64 * 0.5;
            cfg.run.snapshot_stride = stride;
            prop_assert_eq!(parse_config(&cfg.to_text()).unwrap(), cfg);
        }

        #[test]
        fn never_panics_on_arbitrary_text(text in "\\PC{0,200}") {
            let _ = parse_config(&text);
        }
    }
}
