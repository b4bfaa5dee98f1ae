//! Declarative run description, read from TOML and overridden by CLI flags.

use std::path::{Path, PathBuf};

use etpa::exact::{self, DiscretizationConfig, Storage};
use etpa::molecule::{MolecularSystem, MoleculeConfig};
use etpa::photons::PhotonFieldConfig;
use etpa::pt::{k0_for_target, InteractionParams, DEFAULT_TRACE_POINTS};
use etpa::units::{thz_to_ev, FreqConvention};
use serde::{Deserialize, Serialize};

use crate::error::Context;
use crate::{CliError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    #[default]
    Analytic,
    Exact,
    Both,
}

impl Engine {
    pub fn analytic(self) -> bool {
        matches!(self, Engine::Analytic | Engine::Both)
    }

    pub fn exact(self) -> bool {
        matches!(self, Engine::Exact | Engine::Both)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scan {
    #[default]
    Populations,
    SelectivityResonance,
    Schmidt,
    TransitionMatrix,
    SteadyVsEntanglement,
    Benchmark,
}

/// Either the bundled Na₂ preset or a TOML file with a molecule description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MoleculeRef {
    Preset(String),
    Path(PathBuf),
}

impl Default for MoleculeRef {
    fn default() -> Self {
        MoleculeRef::Preset("na2".into())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FieldSpec {
    /// Central photon energy in eV. Overrides `target`.
    pub k0_ev: Option<f64>,
    /// Excited level put in two-photon resonance, 2k₀ = ω_e,target.
    pub target: usize,
    pub sigma_thz: f64,
    /// Entangled cases as σ_s/σ.
    pub sigma_s: Vec<f64>,
    pub uncorrelated: bool,
    /// Start of the pulse window in units of 1/σ; default scales with σ_s.
    pub r0_sigma: Option<f64>,
}

impl Default for FieldSpec {
    fn default() -> Self {
        FieldSpec {
            k0_ev: None,
            target: 18,
            sigma_thz: 10.0,
            sigma_s: vec![1.0, 0.5, 0.25, 0.1, 0.05],
            uncorrelated: true,
            r0_sigma: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunSpec {
    pub molecule: MoleculeRef,
    pub field: FieldSpec,
    pub engine: Engine,
    pub scan: Scan,
    pub out: PathBuf,
    /// Exact solver on a laptop-sized grid instead of the 100 GHz tables.
    pub desk_scale: bool,
    pub freq_convention: FreqConvention,
    pub gamma_mhz: f64,
    /// Levels traced by the population scan.
    pub alphas: Vec<usize>,
    /// Resonance targets of the selectivity scan.
    pub targets: Vec<usize>,
    /// Resonance targets of the transition-matrix scan.
    pub theta_targets: Vec<usize>,
    pub trace_points: usize,
    /// Mode counts timed by the benchmark.
    pub benchmark_modes: Vec<usize>,
    /// Exit with an error when the engines disagree by more than this (top-3 levels).
    pub cross_check_bound: Option<f64>,
}

impl Default for RunSpec {
    fn default() -> Self {
        RunSpec {
            molecule: MoleculeRef::default(),
            field: FieldSpec::default(),
            engine: Engine::Analytic,
            scan: Scan::Populations,
            out: PathBuf::from("out"),
            desk_scale: false,
            freq_convention: FreqConvention::H,
            gamma_mhz: 6.0,
            alphas: (0..=22).collect(),
            targets: (0..=45).collect(),
            theta_targets: vec![7, 18, 36],
            trace_points: DEFAULT_TRACE_POINTS,
            benchmark_modes: vec![401, 601, 1001],
            cross_check_bound: None,
        }
    }
}

/// One photon-pair case of a scan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mode {
    /// σ_s/σ, `None` for uncorrelated photons.
    pub ratio: Option<f64>,
}

impl Mode {
    /// File-name tag, e.g. `uncorrelated` or `ss0.25`.
    pub fn tag(&self) -> String {
        self.ratio.map_or_else(|| "uncorrelated".into(), |r| format!("ss{r}"))
    }
}

impl RunSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run spec serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let f = &self.field;
        if !(f.sigma_thz > 0.0) {
            return Err(CliError::Config(format!("sigma_thz must be positive, got {}", f.sigma_thz)));
        }
        if let Some(bad) = f.sigma_s.iter().find(|r| !(**r > 0.0)) {
            return Err(CliError::Config(format!("σ_s ratios must be positive, got {bad}")));
        }
        if self.modes().is_empty() {
            return Err(CliError::Config("σ_s list is empty and uncorrelated photons are off".into()));
        }
        if !(self.gamma_mhz > 0.0) {
            return Err(CliError::Config(format!("gamma_mhz must be positive, got {}", self.gamma_mhz)));
        }
        if self.trace_points < 10 {
            return Err(CliError::Config("trace_points must be at least 10".into()));
        }
        Ok(())
    }

    /// Uncorrelated first, then the entangled ratios in the order given.
    pub fn modes(&self) -> Vec<Mode> {
        let mut m = Vec::new();
        if self.field.uncorrelated {
            m.push(Mode { ratio: None });
        }
        m.extend(self.field.sigma_s.iter().map(|&r| Mode { ratio: Some(r) }));
        m
    }

    pub fn molecule(&self) -> Result<MolecularSystem> {
        let cfg = match &self.molecule {
            MoleculeRef::Preset(name) if name == "na2" => MoleculeConfig::na2(),
            MoleculeRef::Preset(name) => return Err(CliError::Config(format!("unknown molecule preset {name:?}"))),
            MoleculeRef::Path(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
                MoleculeConfig::from_toml(&text).context(|| format!("molecule file {}", p.display()))?
            }
        };
        let sys = cfg.build().context(|| "building the molecule".into())?;
        let n = sys.n_excited;
        let lists = [("target", &vec![self.field.target]), ("alphas", &self.alphas), ("targets", &self.targets), ("theta_targets", &self.theta_targets)];
        for (name, list) in lists {
            if let Some(bad) = list.iter().find(|&&a| a >= n) {
                return Err(CliError::Config(format!("{name}: level {bad} outside the {n} excited levels")));
            }
        }
        Ok(sys)
    }

    pub fn sigma(&self) -> f64 {
        thz_to_ev(self.field.sigma_thz, self.freq_convention)
    }

    pub fn interaction(&self) -> Result<InteractionParams> {
        InteractionParams::from_mhz(self.gamma_mhz, self.freq_convention).context(|| "coupling strength".into())
    }

    /// Field for one mode with 2k₀ on `target` (or the spec's own k₀).
    pub fn field_for(&self, sys: &MolecularSystem, mode: Mode, target: Option<usize>) -> Result<PhotonFieldConfig> {
        let k0 = match (target, self.field.k0_ev) {
            (Some(t), _) => k0_for_target(sys, t),
            (None, Some(k)) => Ok(k),
            (None, None) => k0_for_target(sys, self.field.target),
        }
        .context(|| "resonance target".into())?;
        let sigma = self.sigma();
        let cfg = match mode.ratio {
            None => PhotonFieldConfig::uncorrelated(k0, sigma),
            Some(r) => PhotonFieldConfig::entangled(k0, sigma, r * sigma).context(|| format!("σ_s = {r}σ"))?,
        };
        Ok(match self.field.r0_sigma {
            Some(r0) => cfg.with_r0(r0 / sigma),
            None => cfg,
        })
    }

    /// Exact-solver grid: desk-sized, or the 100 GHz tables at full size.
    pub fn discretization(&self, cfg: &PhotonFieldConfig, r_end: f64) -> Result<DiscretizationConfig> {
        let ratio = cfg.sigma_s.map(|s| s / cfg.sigma);
        if self.desk_scale {
            DiscretizationConfig::desk(cfg, r_end - cfg.r0)
        } else {
            DiscretizationConfig::tabulated(cfg, ratio, 1, self.freq_convention).map(|d| d.with_storage(Storage::Packed))
        }
        .context(|| "photon grid".into())
    }

    pub fn r_end(&self, cfg: &PhotonFieldConfig) -> f64 {
        exact::default_r_end(cfg)
    }
}
