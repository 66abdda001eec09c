//! The JSON run configuration. Every field has a default, unknown keys are
//! rejected, and the fully resolved document is written next to the outputs.

use crate::error::CliError;
use rfh_core::distributions::{DistributionKind, MomentumDistribution, RadialTable, TableTail};
use rfh_core::dynamics::{DuhamelRule, EvolutionConfig, FixedPointConfig, InitialPerturbation};
use rfh_core::fields::{PerturbationShape, SpectralGrid};
use rfh_core::norms::NormSpec;
use rfh_core::quadrature::QuadConfig;
use rfh_core::response::{Potential, PotentialKind, SymbolConfig};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DistributionConfig {
    FermiZero { mu: f64 },
    FermiDirac { temperature: f64, mu: f64 },
    Bose { temperature: f64, mu: f64 },
    Boltzmann { temperature: f64, mu: f64 },
    /// Two-column CSV (radius, |f|²) with a header line; relative paths
    /// resolve against the config file's directory.
    CustomRadial { path: PathBuf, tail: TableTail },
}

impl Default for DistributionConfig {
    fn default() -> Self {
        DistributionConfig::FermiZero { mu: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialConfig {
    PointMass { weight: f64 },
    GaussianMeasure { weight: f64, width: f64 },
    Yukawa3d { weight: f64, screening: f64 },
    CustomFourier { k: Vec<f64>, values: Vec<f64> },
}

impl Default for PotentialConfig {
    fn default() -> Self {
        PotentialConfig::PointMass { weight: -0.01 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridConfig {
    pub length: f64,
    pub points: usize,
    /// Lattice momenta with |ξ| above this carry no steady mode.
    pub mode_cutoff: f64,
}

impl Default for GridConfig {
    fn default() -> Self {
        Self { length: 8.0 * std::f64::consts::PI, points: 16, mode_cutoff: 1.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NormsConfig {
    /// Spatial norms of ρ(t) reported by `simulate`; time exponents are ignored.
    pub diagnostics: Vec<NormSpec>,
}

impl Default for NormsConfig {
    fn default() -> Self {
        Self { diagnostics: ["L2", "Linf", "Hs(0.5)"].iter().map(|s| s.parse().expect("valid norm")).collect() }
    }
}

/// Initial perturbation Z₀. Random shapes have their seed shifted by the
/// run seed; the correlated shape is sampled once per steady mode, with the
/// mode index added to a random seed.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PerturbationConfig {
    pub extras: Vec<PerturbationShape>,
    pub correlated: Option<PerturbationShape>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SteadyConfig {
    pub r_max: f64,
    pub points: usize,
}

impl Default for SteadyConfig {
    fn default() -> Self {
        Self { r_max: 100.0, points: 4000 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Cor3dConfig {
    pub delta: f64,
    pub delta0: f64,
}

impl Default for Cor3dConfig {
    fn default() -> Self {
        Self { delta: 0.1, delta0: 0.1 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ResponseConfig {
    pub tau_max: f64,
    pub tau_points: usize,
    pub k_min: f64,
    pub k_max: f64,
    /// k nodes are log-spaced.
    pub k_points: usize,
    /// Also tabulate m_f - log_term (d = 3 Fermi-zero only).
    pub log_residual: bool,
    pub cor3d: Cor3dConfig,
    pub gap_margin: f64,
    /// θ of the A_θ constant reported with the criteria.
    pub theta: f64,
}

impl Default for ResponseConfig {
    fn default() -> Self {
        Self { tau_max: 4.0, tau_points: 81, k_min: 0.05, k_max: 2.0, k_points: 40, log_residual: true, cor3d: Cor3dConfig::default(), gap_margin: 0.1, theta: 0.25 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CrosscheckConfig {
    /// Time window covered at every refinement level.
    pub window: f64,
    /// Time steps per level.
    pub levels: Vec<usize>,
    /// Lattice frequency of the spatial harmonic.
    pub harmonic: [i64; 3],
    /// Temporal frequency ω of u = cos(ξ·x)cos(ωt).
    pub omega: f64,
    /// The multiplier path zero-pads to this time span.
    pub padded_window: f64,
    pub rule: DuhamelRule,
}

impl Default for CrosscheckConfig {
    fn default() -> Self {
        Self { window: 4.0, levels: vec![16, 32, 64], harmonic: [1, 0, 0], omega: 1.0, padded_window: 64.0, rule: DuhamelRule::Trapezoid }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub dim: usize,
    pub distribution: DistributionConfig,
    pub potential: PotentialConfig,
    pub grid: GridConfig,
    pub evolution: EvolutionConfig,
    pub quadrature: QuadConfig,
    pub symbol: SymbolConfig,
    pub norms: NormsConfig,
    pub perturbation: PerturbationConfig,
    pub output: PathBuf,
    pub seed: u64,
    pub steady: SteadyConfig,
    pub response: ResponseConfig,
    pub fixedpoint: FixedPointConfig,
    pub crosscheck: CrosscheckConfig,
    /// Directory that relative input paths resolve against; not serialized.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            dim: 3,
            distribution: DistributionConfig::default(),
            potential: PotentialConfig::default(),
            grid: GridConfig::default(),
            evolution: EvolutionConfig::default(),
            quadrature: QuadConfig::default(),
            symbol: SymbolConfig::default(),
            norms: NormsConfig::default(),
            perturbation: PerturbationConfig::default(),
            output: PathBuf::from("out"),
            seed: 0,
            steady: SteadyConfig::default(),
            response: ResponseConfig::default(),
            fixedpoint: FixedPointConfig::default(),
            crosscheck: CrosscheckConfig::default(),
            base_dir: PathBuf::from("."),
        }
    }
}

fn config_err(e: impl std::fmt::Display) -> CliError {
    CliError::Config(e.to_string())
}

impl RunConfig {
    pub fn from_json(text: &str, base_dir: &Path) -> Result<Self, CliError> {
        let mut cfg: RunConfig = serde_json::from_str(text).map_err(config_err)?;
        cfg.base_dir = base_dir.to_path_buf();
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json(&text, path.parent().unwrap_or(Path::new(".")))
    }

    /// The resolved document written next to the outputs. Input paths are
    /// made absolute so the echo can be re-run from anywhere.
    pub fn echo(&self) -> String {
        let mut copy = self.clone();
        if let DistributionConfig::CustomRadial { path, .. } = &mut copy.distribution {
            *path = self.resolve(path);
        }
        serde_json::to_string_pretty(&copy).expect("config serializes")
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        let joined = if p.is_absolute() { p.to_path_buf() } else { self.base_dir.join(p) };
        std::fs::canonicalize(&joined).unwrap_or(joined)
    }

    pub fn grid(&self) -> Result<SpectralGrid, CliError> {
        SpectralGrid::new(self.dim, self.grid.length, self.grid.points).map_err(config_err)
    }

    pub fn distribution(&self) -> Result<MomentumDistribution, CliError> {
        let kind = match &self.distribution {
            DistributionConfig::FermiZero { mu } => DistributionKind::FermiZero { mu: *mu },
            DistributionConfig::FermiDirac { temperature, mu } => DistributionKind::FermiDirac { temperature: *temperature, mu: *mu },
            DistributionConfig::Bose { temperature, mu } => DistributionKind::Bose { temperature: *temperature, mu: *mu },
            DistributionConfig::Boltzmann { temperature, mu } => DistributionKind::Boltzmann { temperature: *temperature, mu: *mu },
            DistributionConfig::CustomRadial { path, tail } => DistributionKind::CustomRadial(read_radial_table(&self.resolve(path), *tail)?),
        };
        let dist = MomentumDistribution::new(kind, self.dim).map_err(config_err)?;
        if dist.is_zero() {
            return Err(CliError::Config("the distribution vanishes identically".into()));
        }
        Ok(dist)
    }

    pub fn potential(&self) -> Result<Potential, CliError> {
        let kind = match &self.potential {
            PotentialConfig::PointMass { weight } => PotentialKind::PointMass { weight: *weight },
            PotentialConfig::GaussianMeasure { weight, width } => PotentialKind::GaussianMeasure { weight: *weight, width: *width },
            PotentialConfig::Yukawa3d { weight, screening } => PotentialKind::Yukawa3D { weight: *weight, screening: *screening },
            PotentialConfig::CustomFourier { k, values } => PotentialKind::CustomFourier { k: k.clone(), values: values.clone() },
        };
        Potential::new(kind).map_err(config_err)
    }

    fn seeded(&self, shape: &PerturbationShape, offset: u64) -> PerturbationShape {
        match shape {
            PerturbationShape::Random { bandwidth, amplitude, seed } => {
                PerturbationShape::Random { bandwidth: *bandwidth, amplitude: *amplitude, seed: seed.wrapping_add(self.seed).wrapping_add(offset) }
            }
            other => other.clone(),
        }
    }

    /// Z₀ sampled on the grid; `modes` is the number of steady directions.
    pub fn perturbation(&self, grid: &SpectralGrid, modes: usize) -> Result<InitialPerturbation, CliError> {
        let extras = self.perturbation.extras.iter().map(|s| self.seeded(s, 0).sample(grid)).collect::<rfh_core::Result<Vec<_>>>().map_err(config_err)?;
        let correlated = match &self.perturbation.correlated {
            None => None,
            Some(shape) => Some((0..modes as u64).map(|k| self.seeded(shape, k).sample(grid)).collect::<rfh_core::Result<Vec<_>>>().map_err(config_err)?),
        };
        Ok(InitialPerturbation { correlated, extras })
    }

    /// Checks cross-field consistency that serde cannot express.
    pub fn validate(&self) -> Result<(), CliError> {
        self.grid()?;
        self.potential()?;
        self.evolution.validate().map_err(config_err)?;
        let r = &self.response;
        if !(r.tau_max > 0.0) || r.tau_points < 2 || !(r.k_min > 0.0) || !(r.k_max > r.k_min) || r.k_points < 2 {
            return Err(CliError::Config("response grid needs tau_max > 0, 0 < k_min < k_max and at least two nodes per axis".into()));
        }
        if !(self.steady.r_max > 0.0) || self.steady.points < 16 {
            return Err(CliError::Config("steady profile needs r_max > 0 and at least 16 points".into()));
        }
        let c = &self.crosscheck;
        if c.levels.is_empty() || c.levels.contains(&0) || !(c.window > 0.0) || !(c.padded_window >= c.window) {
            return Err(CliError::Config("crosscheck needs positive levels and padded_window ≥ window > 0".into()));
        }
        if self.fixedpoint.steps == 0 || !(self.fixedpoint.dt > 0.0) {
            return Err(CliError::Config("fixedpoint needs steps ≥ 1 and dt > 0".into()));
        }
        Ok(())
    }
}

/// Reads (radius, value) rows; the header names are not checked.
pub fn read_radial_table(path: &Path, tail: TableTail) -> Result<RadialTable, CliError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_path(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let (mut radii, mut values) = (Vec::new(), Vec::new());
    for row in reader.deserialize::<(f64, f64)>() {
        let (r, v) = row.map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        radii.push(r);
        values.push(v);
    }
    RadialTable::new(radii, values, tail).map_err(config_err)
}
