use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use spinbath_core::BathKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum CommandKind {
    Dynamics,
    TauX,
    BosonDynamics,
    Niba,
    ShibaTable,
    PhaseDiagram,
    GroundEnergy,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Dynamics => "dynamics",
            CommandKind::TauX => "tau-x",
            CommandKind::BosonDynamics => "boson-dynamics",
            CommandKind::Niba => "niba",
            CommandKind::ShibaTable => "shiba-table",
            CommandKind::PhaseDiagram => "phase-diagram",
            CommandKind::GroundEnergy => "ground-energy",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// `start:stop:count`, inclusive at both ends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl Grid {
    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let step = (self.stop - self.start) / (self.count - 1) as f64;
        (0..self.count).map(|k| self.start + step * k as f64).collect()
    }
}

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let [start, stop, count] = parts[..] else {
            return Err(format!("grid `{s}` must look like start:stop:count"));
        };
        let num = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("grid `{s}`: `{v}` is not a number ({e})"));
        let (start, stop) = (num(start)?, num(stop)?);
        let count: usize = count.trim().parse().map_err(|e| format!("grid `{s}`: bad count ({e})"))?;
        if !start.is_finite() || !stop.is_finite() {
            return Err(format!("grid `{s}` has non-finite ends"));
        }
        if count == 0 {
            return Err(format!("grid `{s}` is empty"));
        }
        if count > 1 && stop <= start {
            return Err(format!("grid `{s}` must be strictly increasing"));
        }
        if count == 1 && stop != start {
            return Err(format!("grid `{s}` has one point but two different ends"));
        }
        Ok(Self { start, stop, count })
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.stop, self.count)
    }
}

impl Serialize for Grid {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Grid {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// One run, from flags or from a JSON config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: CommandKind,
    #[serde(default = "default_bath")]
    pub bath: BathKind,
    #[serde(default)]
    pub delta: Option<f64>,
    #[serde(default)]
    pub alpha: Option<f64>,
    #[serde(default)]
    pub temperature: f64,
    /// End of the time grid in units of the inverse (renormalized) tunneling.
    #[serde(default = "default_tmax")]
    pub tmax: f64,
    #[serde(default = "default_points")]
    pub points: usize,
    #[serde(default)]
    pub tol_abs: Option<f64>,
    #[serde(default)]
    pub tol_rel: Option<f64>,
    #[serde(default)]
    pub delta_grid: Option<Grid>,
    #[serde(default)]
    pub temperature_grid: Option<Grid>,
    #[serde(default)]
    pub rows: Option<String>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub format: Format,
}

fn default_bath() -> BathKind {
    BathKind::Spin
}

fn default_tmax() -> f64 {
    20.0
}

fn default_points() -> usize {
    400
}

impl RunConfig {
    pub fn new(command: CommandKind) -> Self {
        Self {
            command,
            bath: default_bath(),
            delta: None,
            alpha: None,
            temperature: 0.0,
            tmax: default_tmax(),
            points: default_points(),
            tol_abs: None,
            tol_rel: None,
            delta_grid: None,
            temperature_grid: None,
            rows: None,
            output: None,
            format: Format::Csv,
        }
    }

    pub fn delta(&self) -> Result<f64, String> {
        self.delta.ok_or_else(|| format!("{} needs --delta", self.command.name()))
    }

    pub fn alpha(&self) -> Result<f64, String> {
        self.alpha.ok_or_else(|| format!("{} needs --alpha", self.command.name()))
    }

    /// Checks that do not need any numerics.
    pub fn validate(&self) -> Result<(), String> {
        let name = self.command.name();
        let positive = |v: Option<f64>, flag: &str| match v {
            Some(x) if !(x > 0.0 && x.is_finite()) => Err(format!("{name}: {flag} must be positive, got {x}")),
            _ => Ok(()),
        };
        positive(self.delta, "--delta")?;
        positive(self.tol_abs, "--tol-abs")?;
        positive(self.tol_rel, "--tol-rel")?;
        if let Some(a) = self.alpha {
            if !(a >= 0.0 && a.is_finite()) {
                return Err(format!("{name}: --alpha must be non-negative, got {a}"));
            }
        }
        if !(self.temperature >= 0.0 && self.temperature.is_finite()) {
            return Err(format!("{name}: --temperature must be non-negative, got {}", self.temperature));
        }
        if !(self.tmax > 0.0 && self.tmax.is_finite()) {
            return Err(format!("{name}: --tmax must be positive, got {}", self.tmax));
        }
        if self.points < 2 {
            return Err(format!("{name}: --points must be at least 2, got {}", self.points));
        }
        match self.command {
            CommandKind::Dynamics | CommandKind::TauX | CommandKind::BosonDynamics | CommandKind::Niba => {
                self.delta()?;
                self.alpha()?;
            }
            CommandKind::GroundEnergy => {
                self.delta()?;
                self.alpha()?;
            }
            CommandKind::ShibaTable | CommandKind::PhaseDiagram => {}
        }
        if self.command == CommandKind::Dynamics && self.bath == BathKind::Boson {
            return Err("dynamics is the spin-bath P(t); use boson-dynamics for the boson bath".into());
        }
        if self.command == CommandKind::PhaseDiagram && self.temperature_grid.is_some() {
            self.delta()?;
            if self.temperature_grid.is_some_and(|g| g.start < 0.0) {
                return Err("phase-diagram: --temperature-grid must not go below 0".into());
            }
        }
        if self.command == CommandKind::PhaseDiagram && self.delta_grid.is_none() && self.temperature_grid.is_none() {
            return Err("phase-diagram needs --delta-grid start:stop:count (or --temperature-grid with --delta)".into());
        }
        if self.command == CommandKind::ShibaTable {
            if let Some(rows) = self.rows.as_deref().filter(|r| *r != "table1") {
                return Err(format!("shiba-table: unknown row set {rows:?}, expected table1"));
            }
        }
        if self.command == CommandKind::PhaseDiagram && self.delta_grid.is_some_and(|g| g.start <= 0.0) {
            return Err("phase-diagram: --delta-grid must stay above 0".into());
        }
        Ok(())
    }
}

/// A batch file holds one run or a list of runs.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum BatchFile {
    Many(Vec<RunConfig>),
    One(Box<RunConfig>),
}

impl BatchFile {
    pub fn into_runs(self) -> Vec<RunConfig> {
        match self {
            BatchFile::Many(v) => v,
            BatchFile::One(r) => vec![*r],
        }
    }
}
