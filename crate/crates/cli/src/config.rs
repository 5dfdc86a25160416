//! Sweep configuration files.
//!
//! ```toml
//! [model]
//! U = -2.0            # omega defaults to -U/2
//! g = 0.5             # or g_left / g_right
//! delta_mu = 1.0      # fixed bias when the sweep axis is something else
//!
//! [reservoirs]
//! gamma = 0.01        # or gamma_left / gamma_right
//! temperature = 0.0   # or temperature_left / temperature_right
//!
//! [loss]
//! rate = 0.0
//! channels = ["down", "up"]
//!
//! [sweep]
//! axis = "delta_mu"   # delta_mu | temperature | g | U | gamma_I
//! start = 0.1
//! stop = 3.0
//! points = 150
//!
//! [[series]]          # optional; overrides model/reservoir/loss values
//! g = 0.1
//!
//! [solver]
//! method = "fourier-space"   # or time-propagation | monodromy | cross-check
//! kmax = "adaptive"          # or an integer
//! tol = 0.01
//! grid = 1000
//!
//! [output]
//! path = "currents.csv"
//! plot_data = "currents.dat"
//! ```

use std::fmt;
use std::path::PathBuf;

use floquet_junction::model::Spin;
use floquet_junction::solvers::DEFAULT_KMAX_SCHEDULE;
use floquet_junction::{KmaxPolicy, Method};
use serde::Deserialize;

/// A configuration problem, optionally anchored to a line of the source.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl ConfigError {
    fn new(line: Option<usize>, message: impl Into<String>) -> Self {
        Self {
            line,
            message: message.into(),
        }
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
pub enum Axis {
    #[serde(rename = "delta_mu")]
    DeltaMu,
    #[serde(rename = "temperature")]
    Temperature,
    #[serde(rename = "g")]
    G,
    #[serde(rename = "U")]
    U,
    #[serde(rename = "gamma_I")]
    GammaI,
}

impl Axis {
    pub fn name(self) -> &'static str {
        match self {
            Axis::DeltaMu => "delta_mu",
            Axis::Temperature => "temperature",
            Axis::G => "g",
            Axis::U => "U",
            Axis::GammaI => "gamma_I",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SolverChoice {
    Single(Method),
    /// All three methods at the cutoff chosen by the Fourier-space solver.
    CrossCheck,
}

impl SolverChoice {
    pub fn parse(name: &str) -> Option<Self> {
        if name == "cross-check" {
            Some(SolverChoice::CrossCheck)
        } else {
            Method::from_name(name).map(SolverChoice::Single)
        }
    }
}

/// Physical parameters of one curve.
#[derive(Debug, Clone, PartialEq)]
pub struct PointParams {
    /// Single-particle energy; `None` means `−U/2`.
    pub omega: Option<f64>,
    pub u: f64,
    pub g_left: f64,
    pub g_right: f64,
    pub delta_mu: f64,
    pub gamma_left: f64,
    pub gamma_right: f64,
    pub temperature_left: f64,
    pub temperature_right: f64,
    pub loss_rate: f64,
    pub channels: Vec<Spin>,
}

impl PointParams {
    pub fn omega(&self) -> f64 {
        self.omega.unwrap_or(-self.u / 2.0)
    }

    /// Coupling used to normalize currents.
    pub fn gamma(&self) -> f64 {
        self.gamma_left.max(self.gamma_right)
    }

    /// Applies the swept value.
    pub fn with_axis(&self, axis: Axis, value: f64) -> Self {
        let mut p = self.clone();
        match axis {
            Axis::DeltaMu => p.delta_mu = value,
            Axis::Temperature => {
                p.temperature_left = value;
                p.temperature_right = value;
            }
            Axis::G => {
                p.g_left = value;
                p.g_right = value;
            }
            Axis::U => p.u = value,
            Axis::GammaI => p.loss_rate = value,
        }
        p
    }
}

/// One curve of a sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct Series {
    pub label: String,
    pub params: PointParams,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl Range {
    /// Evenly spaced values including both ends.
    pub fn values(&self) -> Vec<f64> {
        let n = self.points;
        (0..n)
            .map(|i| self.start + (self.stop - self.start) * i as f64 / (n - 1) as f64)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct OutputSpec {
    pub path: Option<PathBuf>,
    pub plot_data: Option<PathBuf>,
    /// Adds a `delta_mu_over_abs_U` column.
    pub rescaled_bias: bool,
}

/// A validated sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub series: Vec<Series>,
    pub axis: Axis,
    pub range: Range,
    /// Multiplies bias values by `|U|` of each point.
    pub bias_in_units_of_u: bool,
    pub solver: SolverChoice,
    pub kmax: KmaxPolicy,
    pub grid: usize,
    pub output: OutputSpec,
}

impl SweepConfig {
    pub fn axis_values(&self) -> Vec<f64> {
        self.range.values()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let r = &self.range;
        if r.points == 0 {
            return Err(ConfigError::new(None, "sweep is empty (points = 0)"));
        }
        if r.points < 2 {
            return Err(ConfigError::new(None, "sweep needs at least 2 points"));
        }
        if !(r.start < r.stop) || !r.start.is_finite() || !r.stop.is_finite() {
            return Err(ConfigError::new(None, format!("sweep needs start < stop, got {} and {}", r.start, r.stop)));
        }
        if self.series.is_empty() {
            return Err(ConfigError::new(None, "no series to sweep"));
        }
        for s in &self.series {
            let p = &s.params;
            let checks = [
                ("gamma_left", p.gamma_left),
                ("gamma_right", p.gamma_right),
                ("temperature_left", p.temperature_left),
                ("temperature_right", p.temperature_right),
                ("loss rate", p.loss_rate),
            ];
            for (name, v) in checks {
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(ConfigError::new(None, format!("series '{}': {name} must be nonnegative, got {v}", s.label)));
                }
            }
            if !(p.gamma() > 0.0) {
                return Err(ConfigError::new(None, format!("series '{}': a lead coupling must be positive", s.label)));
            }
            let nonneg_axis = matches!(self.axis, Axis::Temperature | Axis::GammaI);
            if nonneg_axis && r.start < 0.0 {
                return Err(ConfigError::new(None, format!("{} cannot be negative", self.axis.name())));
            }
        }
        if self.grid < 8 {
            return Err(ConfigError::new(None, format!("grid must be at least 8, got {}", self.grid)));
        }
        if let KmaxPolicy::Adaptive { tol, .. } = &self.kmax {
            if !(*tol > 0.0) {
                return Err(ConfigError::new(None, format!("tol must be positive, got {tol}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    model: RawModel,
    reservoirs: RawReservoirs,
    #[serde(default)]
    loss: RawLoss,
    sweep: RawSweep,
    #[serde(default)]
    series: Vec<RawSeries>,
    #[serde(default)]
    solver: RawSolver,
    #[serde(default)]
    output: RawOutput,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawModel {
    #[serde(rename = "U")]
    u: f64,
    omega: Option<f64>,
    g: Option<f64>,
    g_left: Option<f64>,
    g_right: Option<f64>,
    delta_mu: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawReservoirs {
    gamma: Option<f64>,
    gamma_left: Option<f64>,
    gamma_right: Option<f64>,
    temperature: Option<f64>,
    temperature_left: Option<f64>,
    temperature_right: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawLoss {
    rate: Option<f64>,
    channels: Option<Vec<String>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    axis: Axis,
    start: f64,
    stop: f64,
    points: usize,
    #[serde(default)]
    bias_in_units_of_u: bool,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSeries {
    label: Option<String>,
    #[serde(rename = "U")]
    u: Option<f64>,
    omega: Option<f64>,
    g: Option<f64>,
    delta_mu: Option<f64>,
    gamma: Option<f64>,
    temperature: Option<f64>,
    #[serde(rename = "gamma_I")]
    gamma_i: Option<f64>,
    channels: Option<Vec<String>>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    method: Option<String>,
    kmax: Option<toml::Value>,
    tol: Option<f64>,
    grid: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    path: Option<PathBuf>,
    plot_data: Option<PathBuf>,
    #[serde(default)]
    rescaled_bias: bool,
}

/// 1-based line of `offset` in `src`.
fn line_at(src: &str, offset: usize) -> usize {
    src[..offset.min(src.len())].matches('\n').count() + 1
}

/// Line of `key = …` inside `[section]`, for anchoring validation errors.
fn line_of_key(src: &str, section: &str, key: &str) -> Option<usize> {
    let mut current = String::new();
    for (i, raw) in src.lines().enumerate() {
        let line = raw.trim();
        if line.starts_with('[') {
            current = line.trim_matches(|c| c == '[' || c == ']').trim().to_string();
            continue;
        }
        if current == section {
            if let Some((k, _)) = line.split_once('=') {
                if k.trim() == key {
                    return Some(i + 1);
                }
            }
        }
    }
    None
}

fn parse_channels(names: &[String], line: Option<usize>) -> Result<Vec<Spin>, ConfigError> {
    let mut out = Vec::new();
    for n in names {
        let s = match n.as_str() {
            "down" => Spin::Down,
            "up" => Spin::Up,
            other => return Err(ConfigError::new(line, format!("unknown loss channel '{other}' (use \"down\" or \"up\")"))),
        };
        if !out.contains(&s) {
            out.push(s);
        }
    }
    Ok(out)
}

pub fn parse_kmax(value: &str, tol: f64) -> Option<KmaxPolicy> {
    if value == "adaptive" {
        return Some(KmaxPolicy::Adaptive {
            tol,
            schedule: DEFAULT_KMAX_SCHEDULE.to_vec(),
        });
    }
    value.parse::<usize>().ok().map(KmaxPolicy::Fixed)
}

/// Parses and validates a configuration file's contents.
pub fn parse_config(src: &str) -> Result<SweepConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(src).map_err(|e| {
        let line = e.span().map(|s| line_at(src, s.start));
        ConfigError::new(line, e.message().to_string())
    })?;

    let m = &raw.model;
    let r = &raw.reservoirs;
    let g = m.g.unwrap_or(0.0);
    let gamma = r.gamma.unwrap_or(0.0);
    let temperature = r.temperature.unwrap_or(0.0);
    let channels = match &raw.loss.channels {
        Some(c) => parse_channels(c, line_of_key(src, "loss", "channels"))?,
        None => vec![Spin::Down, Spin::Up],
    };
    let base = PointParams {
        omega: m.omega,
        u: m.u,
        g_left: m.g_left.unwrap_or(g),
        g_right: m.g_right.unwrap_or(g),
        delta_mu: m.delta_mu.unwrap_or(0.0),
        gamma_left: r.gamma_left.unwrap_or(gamma),
        gamma_right: r.gamma_right.unwrap_or(gamma),
        temperature_left: r.temperature_left.unwrap_or(temperature),
        temperature_right: r.temperature_right.unwrap_or(temperature),
        loss_rate: raw.loss.rate.unwrap_or(0.0),
        channels,
    };

    let mut series = Vec::new();
    if raw.series.is_empty() {
        series.push(Series {
            label: "default".into(),
            params: base.clone(),
        });
    }
    for (i, s) in raw.series.iter().enumerate() {
        let mut p = base.clone();
        if let Some(v) = s.u {
            p.u = v;
        }
        if let Some(v) = s.omega {
            p.omega = Some(v);
        }
        if let Some(v) = s.g {
            p.g_left = v;
            p.g_right = v;
        }
        if let Some(v) = s.delta_mu {
            p.delta_mu = v;
        }
        if let Some(v) = s.gamma {
            p.gamma_left = v;
            p.gamma_right = v;
        }
        if let Some(v) = s.temperature {
            p.temperature_left = v;
            p.temperature_right = v;
        }
        if let Some(v) = s.gamma_i {
            p.loss_rate = v;
        }
        if let Some(c) = &s.channels {
            p.channels = parse_channels(c, None)?;
        }
        series.push(Series {
            label: s.label.clone().unwrap_or_else(|| format!("series{}", i + 1)),
            params: p,
        });
    }

    let tol = raw.solver.tol.unwrap_or(1e-2);
    let kmax = match &raw.solver.kmax {
        None => parse_kmax("adaptive", tol).unwrap(),
        Some(toml::Value::Integer(k)) if *k >= 0 => KmaxPolicy::Fixed(*k as usize),
        Some(toml::Value::String(s)) => parse_kmax(s, tol)
            .ok_or_else(|| ConfigError::new(line_of_key(src, "solver", "kmax"), format!("invalid kmax '{s}'")))?,
        Some(other) => {
            return Err(ConfigError::new(
                line_of_key(src, "solver", "kmax"),
                format!("kmax must be \"adaptive\" or a nonnegative integer, got {other}"),
            ))
        }
    };
    let method = raw.solver.method.as_deref().unwrap_or("fourier-space");
    let solver = SolverChoice::parse(method).ok_or_else(|| {
        ConfigError::new(
            line_of_key(src, "solver", "method"),
            format!("unknown solver '{method}' (fourier-space, time-propagation, monodromy, cross-check)"),
        )
    })?;

    let cfg = SweepConfig {
        series,
        axis: raw.sweep.axis,
        range: Range {
            start: raw.sweep.start,
            stop: raw.sweep.stop,
            points: raw.sweep.points,
        },
        bias_in_units_of_u: raw.sweep.bias_in_units_of_u,
        solver,
        kmax,
        grid: raw.solver.grid.unwrap_or(floquet_junction::floquet::DEFAULT_GRID),
        output: OutputSpec {
            path: raw.output.path,
            plot_data: raw.output.plot_data,
            rescaled_bias: raw.output.rescaled_bias,
        },
    };
    cfg.validate().map_err(|e| anchor(src, e))?;
    Ok(cfg)
}

/// Attaches a line number to validation errors that name a known key.
fn anchor(src: &str, mut e: ConfigError) -> ConfigError {
    if e.line.is_some() {
        return e;
    }
    let keys = [
        ("sweep", "points", "points"),
        ("sweep", "start", "start"),
        ("sweep", "stop", "start"),
        ("solver", "grid", "grid"),
        ("solver", "tol", "tol"),
        ("reservoirs", "gamma", "coupling"),
        ("reservoirs", "gamma", "gamma"),
        ("reservoirs", "temperature", "temperature"),
        ("loss", "rate", "loss rate"),
    ];
    for (section, key, needle) in keys {
        if e.message.contains(needle) {
            if let Some(l) = line_of_key(src, section, key) {
                e.line = Some(l);
                return e;
            }
        }
    }
    e
}
