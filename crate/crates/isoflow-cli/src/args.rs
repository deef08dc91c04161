//! Argument types shared by the flag parser and the JSON run config.

use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::Args;
use isoflow::{Potential, PotentialConfig};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// A point given as `x,y` on the command line or `[x, y]` in a config.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PointRepr")]
pub struct Point(pub f64, pub f64);

#[derive(Deserialize)]
#[serde(untagged)]
enum PointRepr {
    Pair([f64; 2]),
    Text(String),
}

impl TryFrom<PointRepr> for Point {
    type Error = String;
    fn try_from(r: PointRepr) -> Result<Self, String> {
        match r {
            PointRepr::Pair([x, y]) => Ok(Point(x, y)),
            PointRepr::Text(s) => s.parse(),
        }
    }
}

impl FromStr for Point {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(',').map(str::trim).collect();
        if parts.len() != 2 {
            return Err(format!("expected x,y but got '{s}'"));
        }
        let x = parts[0].parse::<f64>().map_err(|e| format!("bad x in '{s}': {e}"))?;
        let y = parts[1].parse::<f64>().map_err(|e| format!("bad y in '{s}': {e}"))?;
        Ok(Point(x, y))
    }
}

/// A value or an inclusive sweep written `start:step:end`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SweepRepr", into = "String")]
pub struct Sweep {
    pub start: f64,
    pub step: f64,
    pub end: f64,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum SweepRepr {
    Value(f64),
    Text(String),
}

impl TryFrom<SweepRepr> for Sweep {
    type Error = String;
    fn try_from(r: SweepRepr) -> Result<Self, String> {
        match r {
            SweepRepr::Value(v) => Ok(Sweep { start: v, step: 0.0, end: v }),
            SweepRepr::Text(s) => s.parse(),
        }
    }
}

impl From<Sweep> for String {
    fn from(s: Sweep) -> String {
        if s.step == 0.0 {
            format!("{}", s.start)
        } else {
            format!("{}:{}:{}", s.start, s.step, s.end)
        }
    }
}

impl FromStr for Sweep {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let vals: Result<Vec<f64>, _> = s.split(':').map(|t| t.trim().parse::<f64>()).collect();
        let vals = vals.map_err(|e| format!("bad sweep '{s}': {e}"))?;
        let sweep = match vals.as_slice() {
            [v] => Sweep { start: *v, step: 0.0, end: *v },
            [a, h, b] => Sweep { start: *a, step: *h, end: *b },
            _ => return Err(format!("expected a value or start:step:end, got '{s}'")),
        };
        if !(sweep.start.is_finite() && sweep.step.is_finite() && sweep.end.is_finite()) {
            return Err(format!("sweep '{s}' is not finite"));
        }
        if vals.len() == 3 && (sweep.step <= 0.0 || sweep.end < sweep.start) {
            return Err(format!("sweep '{s}' needs a positive step and end >= start"));
        }
        Ok(sweep)
    }
}

impl Sweep {
    /// Values `start + k step` up to `end`, including `end` when it is hit
    /// within a millionth of a step.
    pub fn values(&self) -> Vec<f64> {
        if self.step == 0.0 {
            return vec![self.start];
        }
        let count = ((self.end - self.start) / self.step + 1e-6).floor() as usize;
        (0..=count).map(|k| self.start + self.step * k as f64).collect()
    }
}

/// A potential given as a path to a JSON file, or inline in a run config.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PotentialSource {
    Path(PathBuf),
    Inline(PotentialConfig),
}

impl FromStr for PotentialSource {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Ok(PotentialSource::Path(PathBuf::from(s)))
    }
}

impl PotentialSource {
    pub fn config(&self) -> Result<PotentialConfig, CliError> {
        match self {
            PotentialSource::Inline(c) => Ok(c.clone()),
            PotentialSource::Path(p) => {
                let text = read_text(p)?;
                PotentialConfig::from_json(&text).map_err(CliError::from)
            }
        }
    }

    pub fn build(&self) -> Result<(PotentialConfig, Potential), CliError> {
        let cfg = self.config()?;
        let pot = cfg.build()?;
        Ok((cfg, pot))
    }

    pub fn path(&self) -> Option<&Path> {
        match self {
            PotentialSource::Path(p) => Some(p),
            PotentialSource::Inline(_) => None,
        }
    }
}

pub fn read_text(p: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(p).map_err(|e| CliError::Usage(format!("cannot read {}: {e}", p.display())))
}

/// Inputs must exist and outputs must land in existing directories.
pub fn check_paths(inputs: &[Option<&Path>], outputs: &[Option<&Path>]) -> Result<(), CliError> {
    for p in inputs.iter().flatten() {
        if !p.is_file() {
            return Err(CliError::Usage(format!("input file {} does not exist", p.display())));
        }
    }
    for p in outputs.iter().flatten() {
        let parent = p.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
        if !parent.is_dir() {
            return Err(CliError::Usage(format!("output directory {} does not exist", parent.display())));
        }
    }
    Ok(())
}

fn default_onewell_nodes() -> usize {
    isoflow::onewell::DEFAULT_NODES
}
fn default_amplitude() -> f64 {
    0.02
}
fn default_twowell_nodes() -> usize {
    isoflow::twowell::DEFAULT_NODES
}
fn default_eigen_grid() -> usize {
    2000
}
fn default_degree() -> usize {
    isoflow::series::DEFAULT_MAX_DEGREE
}
fn default_radius() -> f64 {
    0.1
}
fn default_ring() -> usize {
    64
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct OnewellArgs {
    /// Well rates: `W = lambda1^2 x^2 + lambda2^2 y^2`.
    #[arg(long)]
    pub lambda1: f64,
    #[arg(long)]
    pub lambda2: f64,
    /// Start point, `x,y`; the well sits at the origin.
    #[arg(long, allow_hyphen_values = true)]
    pub p0: Point,
    /// Momentum constraint.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    #[serde(default)]
    pub area: f64,
    #[arg(long, default_value_t = default_onewell_nodes())]
    #[serde(default = "default_onewell_nodes")]
    pub nodes: usize,
    /// Number of seeded area-preserving perturbations to check against the calibration.
    #[arg(long, default_value_t = 0)]
    #[serde(default)]
    pub certify: usize,
    /// Amplitude of those perturbations.
    #[arg(long, default_value_t = default_amplitude())]
    #[serde(default = "default_amplitude")]
    pub amplitude: f64,
    #[arg(long)]
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    #[serde(default)]
    pub report: Option<PathBuf>,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct TwowellArgs {
    /// Potential config (JSON file).
    #[arg(long)]
    pub potential: PotentialSource,
    /// Target momentum `A0`.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    #[serde(default)]
    pub area: f64,
    #[arg(long, default_value_t = default_twowell_nodes())]
    #[serde(default = "default_twowell_nodes")]
    pub nodes: usize,
    /// Starts to try: segment, bubble, one-well-composite (comma separated).
    #[arg(long, value_delimiter = ',')]
    #[serde(default)]
    pub starts: Option<Vec<String>>,
    /// Override for the KKT tolerance.
    #[arg(long)]
    #[serde(default)]
    pub tolerance: Option<f64>,
    /// Override for the number of augmented-Lagrangian rounds.
    #[arg(long)]
    #[serde(default)]
    pub rounds: Option<usize>,
    /// Initial curve (CSV) tried as an extra start.
    #[arg(long)]
    #[serde(default)]
    pub init: Option<PathBuf>,
    /// Momentum sweep `start:step:end`; one minimization per value.
    #[arg(long, allow_hyphen_values = true)]
    #[serde(default)]
    pub sweep: Option<Sweep>,
    /// Table for the sweep (area, energy, multiplier, ...).
    #[arg(long)]
    #[serde(default)]
    pub sweep_out: Option<PathBuf>,
    #[arg(long)]
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    #[serde(default)]
    pub report: Option<PathBuf>,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct WaveArgs {
    /// Heteroclinic curve (CSV `param,x,y`).
    #[arg(long)]
    pub curve: PathBuf,
    #[arg(long)]
    pub potential: PotentialSource,
    /// Uniform grid size for the second-variation spectrum; 0 skips it.
    #[arg(long, default_value_t = default_eigen_grid())]
    #[serde(default = "default_eigen_grid")]
    pub eigen_grid: usize,
    #[arg(long)]
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    #[serde(default)]
    pub report: Option<PathBuf>,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct SpectrumArgs {
    #[arg(long)]
    pub lambda1: f64,
    #[arg(long)]
    pub lambda2: f64,
    /// Speed or sweep `start:step:end`.
    #[arg(long, allow_hyphen_values = true)]
    pub nu: Sweep,
    #[arg(long)]
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    #[serde(default)]
    pub report: Option<PathBuf>,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct SeriesArgs {
    #[arg(long)]
    pub potential: PotentialSource,
    /// Index of the well to expand about.
    #[arg(long, default_value_t = 0)]
    #[serde(default)]
    pub well: usize,
    /// Calibration angle in `(0, pi)`.
    #[arg(long)]
    pub beta: f64,
    #[arg(long, default_value_t = default_degree())]
    #[serde(default = "default_degree")]
    pub degree: usize,
    /// Ring radius for the residual check.
    #[arg(long, default_value_t = default_radius())]
    #[serde(default = "default_radius")]
    pub radius: f64,
    /// Points per ring.
    #[arg(long, default_value_t = default_ring())]
    #[serde(default = "default_ring")]
    pub ring: usize,
    /// Coefficient table `{degree: {"a1,a2": coefficient}}`.
    #[arg(long)]
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    #[serde(default)]
    pub report: Option<PathBuf>,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct NonexistArgs {
    /// Exponent of `F = |p|^q`.
    #[arg(long)]
    pub q: f64,
    #[arg(long, allow_hyphen_values = true)]
    pub area: f64,
    /// Largest number of circles.
    #[arg(long)]
    pub jmax: usize,
    #[arg(long)]
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    #[serde(default)]
    pub report: Option<PathBuf>,
}

#[derive(Args, Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
pub struct PlotdataArgs {
    /// Artifact to reshape: curve, regimes, profile, sweep or nonexist CSV.
    #[arg(long)]
    pub input: PathBuf,
    /// Artifact kind; detected from the header when omitted.
    #[arg(long)]
    #[serde(default)]
    pub kind: Option<String>,
    /// Needed for profiles (equipartition column).
    #[arg(long)]
    #[serde(default)]
    pub potential: Option<PotentialSource>,
    /// Pole for the polar columns of a curve.
    #[arg(long, allow_hyphen_values = true)]
    #[serde(default)]
    pub center: Option<Point>,
    #[arg(long)]
    pub out: PathBuf,
}

/// JSON run config: `{"subcommand", "seed", "args"}`.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub subcommand: String,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub args: serde_json::Value,
}
