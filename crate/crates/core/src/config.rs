//! TOML campaign configuration. Every section is optional and falls back to
//! the reference experimental settings.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bo::{CampaignSettings, SearchDomain};
use crate::controller::GainVector;
use crate::cost::CostWeights;
use crate::error::{Error, Result};
use crate::objective::LapObjective;
use crate::sim::SimConfig;
use crate::track::TrackSpec;

/// Per-gain `[lower, upper]` search bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DomainConfig {
    pub lambda_v: [f64; 2],
    pub lambda_a: [f64; 2],
    pub k1: [f64; 2],
    pub k2: [f64; 2],
}

impl Default for DomainConfig {
    fn default() -> Self {
        Self::from(SearchDomain::default())
    }
}

impl From<SearchDomain> for DomainConfig {
    fn from(d: SearchDomain) -> Self {
        let (lo, hi) = (d.lower, d.upper);
        Self {
            lambda_v: [lo.lambda_v, hi.lambda_v],
            lambda_a: [lo.lambda_a, hi.lambda_a],
            k1: [lo.k1, hi.k1],
            k2: [lo.k2, hi.k2],
        }
    }
}

impl From<DomainConfig> for SearchDomain {
    fn from(c: DomainConfig) -> Self {
        SearchDomain {
            lower: GainVector::from_array([c.lambda_v[0], c.lambda_a[0], c.k1[0], c.k2[0]]),
            upper: GainVector::from_array([c.lambda_v[1], c.lambda_a[1], c.k1[1], c.k2[1]]),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Budget {
    pub n_init: usize,
    pub n_max: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Self { n_init: 15, n_max: 32 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Stopping {
    /// Max-EI threshold, in standardized cost units.
    pub ei_tol: f64,
    pub stall_window: usize,
}

impl Default for Stopping {
    fn default() -> Self {
        Self { ei_tol: 1e-3, stall_window: 8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CampaignConfig {
    pub seed: u64,
    pub output_dir: PathBuf,
    pub track: TrackSpec,
    pub sim: SimConfig,
    pub cost: CostWeights,
    pub domain: DomainConfig,
    pub baseline: GainVector,
    pub budget: Budget,
    pub stopping: Stopping,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            output_dir: PathBuf::from("runs/default"),
            track: TrackSpec::default(),
            sim: SimConfig::default(),
            cost: CostWeights::default(),
            domain: DomainConfig::default(),
            baseline: GainVector::BASELINE,
            budget: Budget::default(),
            stopping: Stopping::default(),
        }
    }
}

fn collect(problems: &mut Vec<String>, r: Result<()>) {
    match r {
        Ok(()) => {}
        Err(Error::InvalidConfig(p)) => problems.extend(p),
        Err(e) => problems.push(e.to_string()),
    }
}

impl CampaignConfig {
    /// Parses without validating.
    pub fn from_toml_str(text: &str) -> std::result::Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string().trim_end().to_string())
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("config is always representable in TOML")
    }

    /// Reads, parses and validates a config file.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let cfg = Self::from_toml_str(&text).map_err(|message| Error::Parse { path: path.to_path_buf(), message })?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks every section and reports all violations at once.
    pub fn validate(&self) -> Result<()> {
        let mut p = Vec::new();
        collect(&mut p, self.track.validate());
        collect(&mut p, self.sim.validate());
        collect(&mut p, self.cost.validate());
        let domain = self.search_domain();
        collect(&mut p, domain.validate());
        for (name, v) in GainVector::NAMES.iter().zip(self.baseline.to_array()) {
            if !(v.is_finite() && v > 0.0) {
                p.push(format!("baseline.{name} must be > 0, got {v}"));
            }
        }
        if p.is_empty() && !domain.contains(&self.baseline) {
            let (lo, hi, b) = (domain.lower.to_array(), domain.upper.to_array(), self.baseline.to_array());
            for (d, name) in GainVector::NAMES.iter().enumerate() {
                if b[d] < lo[d] || b[d] > hi[d] {
                    p.push(format!("baseline.{name} = {} lies outside domain.{name} [{}, {}]", b[d], lo[d], hi[d]));
                }
            }
        }
        collect(&mut p, self.settings().validate());
        if p.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidConfig(p))
        }
    }

    pub fn search_domain(&self) -> SearchDomain {
        self.domain.into()
    }

    pub fn settings(&self) -> CampaignSettings {
        CampaignSettings {
            n_init: self.budget.n_init,
            n_max: self.budget.n_max,
            ei_tol: self.stopping.ei_tol,
            stall_window: self.stopping.stall_window,
            seed: self.seed,
            ..CampaignSettings::default()
        }
    }

    pub fn objective(&self) -> LapObjective {
        LapObjective { track: self.track, sim: self.sim, weights: self.cost, seed: self.seed }
    }
}
