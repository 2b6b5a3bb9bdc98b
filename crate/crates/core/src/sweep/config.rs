//! Sweep configuration: a TOML document with sections, validated into a
//! [`SweepConfig`] with every default filled in.

use std::fmt;
use std::path::PathBuf;

use serde::Deserialize;

use crate::measures::Measure;
use crate::momentum::{Grid, Size};
use crate::params::{SystemParams, Temperature};
use crate::quench::{TemperatureScan, Window};
use crate::scaling::{Axis, MOMENTUM_SIZES};

pub const DEFAULT_GAMMA: f64 = 0.8;
pub const DEFAULT_PHI_POINTS: usize = 2048;

/// A configuration problem, reported before any work starts.
#[derive(Clone, Debug, PartialEq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Task {
    Spectrum,
    PhaseDiagram,
    ThermalMap,
    NgMap,
    Factorization,
    Quench,
    ErgodicityMap,
    Scaling,
    OracleCheck,
}

impl Task {
    pub const ALL: [Task; 9] = [
        Task::Spectrum,
        Task::PhaseDiagram,
        Task::ThermalMap,
        Task::NgMap,
        Task::Factorization,
        Task::Quench,
        Task::ErgodicityMap,
        Task::Scaling,
        Task::OracleCheck,
    ];

    pub fn label(self) -> &'static str {
        match self {
            Task::Spectrum => "spectrum",
            Task::PhaseDiagram => "phase-diagram",
            Task::ThermalMap => "thermal-map",
            Task::NgMap => "ng-map",
            Task::Factorization => "factorization",
            Task::Quench => "quench",
            Task::ErgodicityMap => "ergodicity-map",
            Task::Scaling => "scaling",
            Task::OracleCheck => "oracle-check",
        }
    }

    pub fn parse(s: &str) -> Result<Task, ConfigError> {
        Task::ALL
            .into_iter()
            .find(|t| t.label() == s)
            .ok_or_else(|| ConfigError(format!("unknown task '{s}'")))
    }

    /// Tasks that write one file per measure.
    pub fn per_measure(self) -> bool {
        matches!(
            self,
            Task::PhaseDiagram | Task::ThermalMap | Task::NgMap | Task::Quench | Task::ErgodicityMap | Task::Scaling
        )
    }
}

/// Evenly spaced values min..=max; a single point when count is 1.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AxisGrid {
    pub min: f64,
    pub max: f64,
    pub count: usize,
}

impl AxisGrid {
    pub fn point(x: f64) -> Self {
        AxisGrid { min: x, max: x, count: 1 }
    }

    /// Parses `MIN:MAX:COUNT` or a single number.
    pub fn parse(s: &str) -> Result<Self, ConfigError> {
        let parts: Vec<&str> = s.split(':').map(str::trim).collect();
        let num = |t: &str| t.parse::<f64>().map_err(|_| ConfigError(format!("bad number '{t}' in grid '{s}'")));
        let g = match parts.as_slice() {
            [x] => AxisGrid::point(num(x)?),
            [a, b, c] => AxisGrid {
                min: num(a)?,
                max: num(b)?,
                count: c.parse().map_err(|_| ConfigError(format!("bad count '{c}' in grid '{s}'")))?,
            },
            _ => return err(format!("grid '{s}' must be MIN:MAX:COUNT or a number")),
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.count < 1 {
            return err("grid count must be at least 1");
        }
        if !self.min.is_finite() || !self.max.is_finite() {
            return err("grid bounds must be finite");
        }
        if self.count == 1 && self.min != self.max {
            return err("a single-point grid needs MIN equal to MAX");
        }
        Ok(())
    }

    pub fn value(&self, i: usize) -> f64 {
        if self.count == 1 {
            self.min
        } else {
            self.min + (self.max - self.min) * i as f64 / (self.count - 1) as f64
        }
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.value(i)).collect()
    }
}

impl fmt::Display for AxisGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.min, self.max, self.count)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ScalingMode {
    /// Drift of the pseudo-critical point with N.
    Drift,
    /// Decay of the measure jump across the boundary with N.
    Jump,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalingSettings {
    pub mode: ScalingMode,
    pub axis: Axis,
    pub sizes: Vec<usize>,
    pub bracket: (f64, f64),
    /// Thermodynamic critical value along the axis.
    pub lambda_c: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleSettings {
    pub sizes: Vec<usize>,
    pub draws: usize,
    pub betas: Vec<f64>,
    pub times: Vec<f64>,
    pub tolerance: f64,
}

/// A validated sweep.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig {
    pub task: Task,
    pub j: f64,
    pub gamma: f64,
    pub lambda1: AxisGrid,
    pub lambda2: AxisGrid,
    pub phi_points: usize,
    /// Temperatures, slowest sweep axis for thermal maps; one entry elsewhere.
    pub temps: Vec<Temperature>,
    pub measures: Vec<Measure>,
    pub size: Size,
    /// Momentum lattice for finite sizes and the scaling task.
    pub lattice: Grid,
    pub out: Option<PathBuf>,
    pub workers: usize,
    pub times: AxisGrid,
    pub window: Window,
    pub scan: TemperatureScan,
    pub ng_points: usize,
    pub ng_t_max: f64,
    pub scaling: ScalingSettings,
    pub oracle: OracleSettings,
    /// Command-line overrides as (key, value), recorded in the metadata.
    pub overrides: Vec<(String, String)>,
}

impl SweepConfig {
    pub fn params(&self, lambda1: f64, lambda2: f64) -> Result<SystemParams, crate::Error> {
        SystemParams::new(self.j, self.gamma, lambda1, lambda2)
    }

    /// Applies a command-line override; the flag wins over the file.
    pub fn apply_override(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        match key {
            "gamma" => self.gamma = parse_f64(value, key)?,
            "lambda1" => self.lambda1 = AxisGrid::parse(value)?,
            "lambda2" => self.lambda2 = AxisGrid::parse(value)?,
            "beta" => self.temps = vec![parse_temperature(value)?],
            "measure" => self.measures = parse_measures(value)?,
            "size" => self.size = parse_size(value, self.lattice)?,
            "out" => self.out = Some(PathBuf::from(value)),
            "workers" => self.workers = parse_workers(value)?,
            _ => return err(format!("unknown override '{key}'")),
        }
        self.overrides.push((key.to_string(), value.to_string()));
        self.check()
    }

    fn check(&self) -> Result<(), ConfigError> {
        if let Err(e) = SystemParams::new(self.j, self.gamma, 0.0, 0.0) {
            return err(e.to_string());
        }
        if self.measures.is_empty() {
            return err("measure list is empty");
        }
        if self.temps.is_empty() {
            return err("temperature list is empty");
        }
        if self.temps.len() > 1 && self.task != Task::ThermalMap {
            return err(format!("task {} takes a single beta", self.task.label()));
        }
        Ok(())
    }
}

fn parse_f64(s: &str, key: &str) -> Result<f64, ConfigError> {
    s.trim().parse().map_err(|_| ConfigError(format!("{key}: expected a number, got '{s}'")))
}

fn parse_workers(s: &str) -> Result<usize, ConfigError> {
    match s.trim().parse::<usize>() {
        Ok(k) if k >= 1 => Ok(k),
        _ => err(format!("workers: expected a positive integer, got '{s}'")),
    }
}

pub fn parse_temperature(s: &str) -> Result<Temperature, ConfigError> {
    let s = s.trim();
    let beta = if s.eq_ignore_ascii_case("inf") { f64::INFINITY } else { parse_f64(s, "beta")? };
    Temperature::from_beta(beta).map_err(|e| ConfigError(e.to_string()))
}

pub fn parse_measures(s: &str) -> Result<Vec<Measure>, ConfigError> {
    let mut out = Vec::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let m = Measure::parse(part).ok_or_else(|| ConfigError(format!("unknown measure '{part}'")))?;
        if !out.contains(&m) {
            out.push(m);
        }
    }
    if out.is_empty() {
        return err("measure list is empty");
    }
    Ok(out)
}

pub fn parse_size(s: &str, grid: Grid) -> Result<Size, ConfigError> {
    let s = s.trim();
    if s.eq_ignore_ascii_case("inf") {
        return Ok(Size::Thermodynamic);
    }
    let n: usize = s.parse().map_err(|_| ConfigError(format!("size: expected N or inf, got '{s}'")))?;
    Size::finite(n, grid).map_err(|e| ConfigError(e.to_string()))
}

fn parse_lattice(s: &str) -> Result<Grid, ConfigError> {
    match s {
        "periodic" => Ok(Grid::Periodic),
        "antiperiodic" => Ok(Grid::Antiperiodic),
        "exact" => Ok(Grid::Exact),
        _ => err(format!("lattice: expected periodic, antiperiodic or exact, got '{s}'")),
    }
}

/// A number or a string such as "inf" or "MIN:MAX:COUNT".
#[derive(Deserialize, Clone, Debug)]
#[serde(untagged)]
enum Scalar {
    Int(i64),
    Float(f64),
    Text(String),
}

impl Scalar {
    fn text(&self) -> String {
        match self {
            Scalar::Int(i) => i.to_string(),
            Scalar::Float(x) => format!("{x:?}"),
            Scalar::Text(s) => s.clone(),
        }
    }
}

/// A single value or a list.
#[derive(Deserialize, Clone, Debug)]
#[serde(untagged)]
enum OneOrMany {
    Many(Vec<Scalar>),
    One(Scalar),
}

impl OneOrMany {
    fn items(&self) -> Vec<String> {
        match self {
            OneOrMany::Many(v) => v.iter().map(Scalar::text).collect(),
            OneOrMany::One(s) => s.text().split(',').map(|p| p.trim().to_string()).collect(),
        }
    }
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    task: Option<String>,
    #[serde(default)]
    system: RawSystem,
    #[serde(default)]
    grid: RawGrid,
    #[serde(default)]
    run: RawRun,
    #[serde(default)]
    quench: RawQuench,
    #[serde(default)]
    ergodicity: RawErgodicity,
    #[serde(default)]
    ng: RawNg,
    #[serde(default)]
    scaling: RawScaling,
    #[serde(default)]
    oracle: RawOracle,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawSystem {
    j: Option<f64>,
    gamma: Option<f64>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    lambda1: Option<Scalar>,
    lambda2: Option<Scalar>,
    phi_points: Option<usize>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawRun {
    beta: Option<OneOrMany>,
    measure: Option<OneOrMany>,
    size: Option<Scalar>,
    lattice: Option<String>,
    out: Option<String>,
    workers: Option<usize>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawQuench {
    times: Option<String>,
    window_start: Option<f64>,
    window_end: Option<f64>,
    window_samples: Option<usize>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawErgodicity {
    decade: Option<f64>,
    points: Option<usize>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawNg {
    points: Option<usize>,
    t_max: Option<f64>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawScaling {
    mode: Option<String>,
    axis: Option<String>,
    sizes: Option<Vec<usize>>,
    bracket: Option<(f64, f64)>,
    lambda_c: Option<f64>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawOracle {
    sizes: Option<Vec<usize>>,
    draws: Option<usize>,
    betas: Option<Vec<f64>>,
    times: Option<Vec<f64>>,
    tolerance: Option<f64>,
}

fn default_temps(task: Task) -> Vec<Temperature> {
    match task {
        Task::ThermalMap => vec![Temperature::Beta(2.0)],
        Task::Quench | Task::ErgodicityMap => vec![Temperature::Beta(100.0)],
        _ => vec![Temperature::Zero],
    }
}

/// Parses and validates a configuration document, filling defaults.
pub fn parse_config(text: &str) -> Result<SweepConfig, ConfigError> {
    parse_config_for(None, text)
}

/// As [`parse_config`], with the task given separately (as on the command
/// line); a document naming a different task is an error.
pub fn parse_config_for(task: Option<Task>, text: &str) -> Result<SweepConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(text).map_err(|e| ConfigError(e.to_string().trim_end().to_string()))?;
    let task = match (raw.task.as_deref(), task) {
        (None, None) => return err("missing task"),
        (None, Some(t)) => t,
        (Some(t), None) => Task::parse(t)?,
        (Some(t), Some(given)) => {
            let parsed = Task::parse(t)?;
            if parsed != given {
                return err(format!("config is for task {t}, not {}", given.label()));
            }
            parsed
        }
    };
    let axis = |v: &Option<Scalar>| -> Result<AxisGrid, ConfigError> {
        v.as_ref().map_or(Ok(AxisGrid::point(0.0)), |s| AxisGrid::parse(&s.text()))
    };
    let lattice = raw.run.lattice.as_deref().map_or(Ok(Grid::Periodic), parse_lattice)?;
    let size = raw.run.size.as_ref().map_or(Ok(Size::Thermodynamic), |s| parse_size(&s.text(), lattice))?;
    let temps = match &raw.run.beta {
        None => default_temps(task),
        Some(b) => b.items().iter().map(|s| parse_temperature(s)).collect::<Result<_, _>>()?,
    };
    let measures = match &raw.run.measure {
        None => vec![Measure::Ln, Measure::Qd],
        Some(m) => parse_measures(&m.items().join(","))?,
    };
    let window = Window {
        start: raw.quench.window_start.unwrap_or(Window::default().start),
        end: raw.quench.window_end.unwrap_or(Window::default().end),
        samples: raw.quench.window_samples.unwrap_or(Window::default().samples),
    };
    if !(window.end > window.start) || window.start < 0.0 || window.samples < 2 {
        return err("quench window needs 0 <= window_start < window_end and window_samples >= 2");
    }
    let times = match &raw.quench.times {
        None => AxisGrid { min: 0.0, max: 4.0 * std::f64::consts::PI, count: 201 },
        Some(s) => AxisGrid::parse(s)?,
    };
    if times.min < 0.0 || times.max < times.min {
        return err("quench times must be non-negative and increasing");
    }
    let scan = TemperatureScan {
        decade: raw.ergodicity.decade.unwrap_or(10.0),
        points: raw.ergodicity.points.unwrap_or(200),
    };
    if !(scan.decade > 1.0) || scan.points < 2 {
        return err("ergodicity scan needs decade > 1 and points >= 2");
    }
    let ng_points = raw.ng.points.unwrap_or(400);
    let ng_t_max = raw.ng.t_max.unwrap_or(2.0);
    if ng_points < 2 || !(ng_t_max > 0.0) {
        return err("ng scan needs points >= 2 and t_max > 0");
    }
    let scaling = scaling_settings(&raw.scaling)?;
    let oracle = RawOracle::settings(&raw.oracle)?;
    let phi_points = raw.grid.phi_points.unwrap_or(DEFAULT_PHI_POINTS);
    if phi_points < 1 {
        return err("phi_points must be at least 1");
    }
    let cfg = SweepConfig {
        task,
        j: raw.system.j.unwrap_or(1.0),
        gamma: raw.system.gamma.unwrap_or(DEFAULT_GAMMA),
        lambda1: axis(&raw.grid.lambda1)?,
        lambda2: axis(&raw.grid.lambda2)?,
        phi_points,
        temps,
        measures,
        size,
        lattice,
        out: raw.run.out.map(PathBuf::from),
        workers: match raw.run.workers {
            Some(0) => return err("workers must be at least 1"),
            Some(k) => k,
            None => std::thread::available_parallelism().map_or(1, |n| n.get()),
        },
        times,
        window,
        scan,
        ng_points,
        ng_t_max,
        scaling,
        oracle,
        overrides: Vec::new(),
    };
    cfg.check()?;
    Ok(cfg)
}

fn scaling_settings(raw: &RawScaling) -> Result<ScalingSettings, ConfigError> {
    let mode = match raw.mode.as_deref() {
        None | Some("drift") => ScalingMode::Drift,
        Some("jump") => ScalingMode::Jump,
        Some(m) => return err(format!("scaling mode: expected drift or jump, got '{m}'")),
    };
    let axis = match raw.axis.as_deref() {
        None | Some("lambda1") => Axis::Lambda1,
        Some("lambda2") => Axis::Lambda2,
        Some(a) => return err(format!("scaling axis: expected lambda1 or lambda2, got '{a}'")),
    };
    let sizes = raw.sizes.clone().unwrap_or_else(|| MOMENTUM_SIZES.to_vec());
    if let Some(&n) = sizes.iter().find(|&&n| n < 4 || n % 4 != 0) {
        return err(format!("scaling size {n} must be a positive multiple of 4"));
    }
    let bracket = raw.bracket.unwrap_or((0.8, 1.2));
    if !(bracket.1 > bracket.0) {
        return err("scaling bracket must be increasing");
    }
    Ok(ScalingSettings { mode, axis, sizes, bracket, lambda_c: raw.lambda_c.unwrap_or(1.0) })
}

impl RawOracle {
    fn settings(&self) -> Result<OracleSettings, ConfigError> {
        let s = OracleSettings {
            sizes: self.sizes.clone().unwrap_or_else(|| vec![4, 8, 12]),
            draws: self.draws.unwrap_or(20),
            betas: self.betas.clone().unwrap_or_else(|| vec![0.5, 2.0, 10.0]),
            times: self.times.clone().unwrap_or_else(|| vec![0.7, 1.7, 3.1]),
            tolerance: self.tolerance.unwrap_or(1e-8),
        };
        if let Some(&n) = s.sizes.iter().find(|&&n| !(4..=12).contains(&n) || n % 4 != 0) {
            return err(format!("oracle size {n} must be 4, 8 or 12"));
        }
        if s.betas.iter().any(|b| !(*b > 0.0 && b.is_finite())) {
            return err("oracle betas must be positive and finite");
        }
        if s.times.iter().any(|t| !(*t >= 0.0 && t.is_finite())) {
            return err("oracle times must be non-negative");
        }
        Ok(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_is_missing_task() {
        assert_eq!(parse_config("").unwrap_err().0, "missing task");
    }

    #[test]
    fn minimal_spectrum_defaults() {
        let c = parse_config("task = \"spectrum\"").unwrap();
        assert_eq!(c.task, Task::Spectrum);
        assert_eq!(c.gamma, 0.8);
        assert_eq!(c.phi_points, 2048);
        assert_eq!(c.lambda1, AxisGrid::point(0.0));
    }

    #[test]
    fn unknown_key_is_an_error() {
        let e = parse_config("task = \"spectrum\"\n[system]\ngama = 0.5\n").unwrap_err();
        assert!(e.0.contains("gama"), "{e}");
        let e = parse_config("task = \"spectrum\"\ncolour = 1\n").unwrap_err();
        assert!(e.0.contains("colour"), "{e}");
    }

    #[test]
    fn type_mismatch_reports_line() {
        let e = parse_config("task = \"spectrum\"\n[system]\ngamma = \"wide\"\n").unwrap_err();
        assert!(e.0.contains("line 3"), "{e}");
    }

    #[test]
    fn flag_overrides_file() {
        let mut c = parse_config("task = \"phase-diagram\"\n[system]\ngamma = 0.5\n").unwrap();
        c.apply_override("gamma", "0.2").unwrap();
        c.apply_override("beta", "inf").unwrap();
        c.apply_override("lambda1", "-2:2:5").unwrap();
        assert_eq!(c.gamma, 0.2);
        assert_eq!(c.temps, vec![Temperature::Zero]);
        assert_eq!(c.lambda1.values(), vec![-2.0, -1.0, 0.0, 1.0, 2.0]);
        assert_eq!(c.overrides[0], ("gamma".to_string(), "0.2".to_string()));
        assert!(c.apply_override("gamma", "0").is_err());
    }

    #[test]
    fn sections_and_lists() {
        let text = "task = \"thermal-map\"\n[grid]\nlambda1 = \"-1:1:3\"\nlambda2 = 0.5\n[run]\nbeta = [0.5, \"inf\"]\nmeasure = \"qd\"\nsize = 64\nlattice = \"exact\"\n";
        let c = parse_config(text).unwrap();
        assert_eq!(c.temps, vec![Temperature::Beta(0.5), Temperature::Zero]);
        assert_eq!(c.measures, vec![Measure::Qd]);
        assert_eq!(c.size, Size::Finite { n: 64, grid: Grid::Exact });
        assert_eq!(c.lambda2, AxisGrid::point(0.5));
    }

    #[test]
    fn task_from_caller() {
        assert_eq!(parse_config_for(Some(Task::Quench), "").unwrap().task, Task::Quench);
        assert!(parse_config_for(Some(Task::Quench), "task = \"scaling\"").is_err());
    }

    #[test]
    fn bad_grids_rejected() {
        assert!(AxisGrid::parse("0:1:0").is_err());
        assert!(AxisGrid::parse("0:inf:3").is_err());
        assert!(AxisGrid::parse("0:1").is_err());
        assert!(parse_config("task = \"spectrum\"\n[run]\nsize = 6\n").is_err());
        assert!(parse_config("task = \"nothing\"").is_err());
    }
}
