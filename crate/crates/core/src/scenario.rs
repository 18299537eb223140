//! Scenario configuration: input paths plus every model parameter, read from
//! TOML with defaults filled in.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::capture::CaptureCostParams;
use crate::costsurface::{SejMode, SejParams, WeightTable};
use crate::error::{Error, Result};
use crate::netdesign::{PipelineEconomics, SolverOptions};
use crate::phasing::{CreditPolicy, PhaseOptions, PhaseSchedule};
use crate::reservoir::{FormationMode, MonteCarloParams, StorageCostParams};
use crate::routing::Connectivity;
use crate::screening::ScreeningParams;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Inputs {
    pub facilities: PathBuf,
    pub landcover: PathBuf,
    pub active_fields: PathBuf,
    pub formations: PathBuf,
    /// `site_id,formation` rows.
    pub adjacency: PathBuf,
    pub announced: Option<PathBuf>,
    pub population: Option<PathBuf>,
    pub tract_ids: Option<PathBuf>,
    /// `tract_id,categories` rows.
    pub tracts: Option<PathBuf>,
    pub parcels: Option<PathBuf>,
    /// Layer name → raster; names key the weight table.
    pub cost_layers: BTreeMap<String, PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReservoirSection {
    pub monte_carlo: MonteCarloParams,
    pub costs: StorageCostParams,
    pub formation_mode: FormationMode,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SurfaceSection {
    pub weights: WeightTable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SejSection {
    pub mode: SejMode,
    pub population_threshold: f64,
    /// Meters.
    pub buffer: f64,
}

impl Default for SejSection {
    fn default() -> Self {
        let p = SejParams::sej3();
        SejSection {
            mode: SejMode::Off,
            population_threshold: p.population_threshold,
            buffer: p.buffer,
        }
    }
}

impl SejSection {
    /// Layer parameters for a mode; `Off` yields the reporting layer.
    pub fn params(&self, mode: SejMode) -> SejParams {
        SejParams {
            population_threshold: self.population_threshold,
            buffer: self.buffer,
            categories: mode.categories(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RoutingSection {
    pub connectivity: Connectivity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkSection {
    pub economics: PipelineEconomics,
    /// Mt/y.
    pub target: f64,
    pub all_or_nothing: bool,
    pub solver: SolverOptions,
}

impl Default for NetworkSection {
    fn default() -> Self {
        NetworkSection {
            economics: PipelineEconomics::default(),
            target: 1.0,
            all_or_nothing: false,
            solver: SolverOptions::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PhasingSection {
    pub schedule: PhaseSchedule,
    pub policy: CreditPolicy,
    pub options: PhaseOptions,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub name: String,
    pub seed: u64,
    /// Relative to the scenario file's directory unless absolute.
    pub output_dir: PathBuf,
    pub inputs: Inputs,
    pub capture: CaptureCostParams,
    pub screening: ScreeningParams,
    pub reservoir: ReservoirSection,
    pub surface: SurfaceSection,
    pub sej: SejSection,
    pub routing: RoutingSection,
    pub network: NetworkSection,
    pub phasing: PhasingSection,
    /// Directory relative input paths resolve against.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            name: "scenario".into(),
            seed: 0,
            output_dir: PathBuf::from("out"),
            inputs: Inputs::default(),
            capture: CaptureCostParams::default(),
            screening: ScreeningParams::default(),
            reservoir: ReservoirSection::default(),
            surface: SurfaceSection::default(),
            sej: SejSection::default(),
            routing: RoutingSection::default(),
            network: NetworkSection::default(),
            phasing: PhasingSection::default(),
            base_dir: PathBuf::from("."),
        }
    }
}

impl Scenario {
    pub fn from_toml_str(text: &str, file: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let line = e
                .span()
                .map(|s| text[..s.start.min(text.len())].matches('\n').count() + 1)
                .unwrap_or(0);
            Error::Parse {
                file: file.to_string(),
                line,
                message: e.message().to_string(),
            }
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut s = Self::from_toml_str(&text, &path.display().to_string())?;
        s.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_else(|| PathBuf::from("."));
        s.validate()?;
        Ok(s)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Internal(format!("scenario serialization: {e}")))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    /// sha256 of the canonical JSON form.
    pub fn config_hash(&self) -> String {
        hex::encode(Sha256::digest(serde_json::to_vec(self).expect("scenario serializes")))
    }

    pub fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base_dir.join(p)
        }
    }

    pub fn output_path(&self) -> PathBuf {
        self.resolve(&self.output_dir)
    }

    /// Parameter checks plus existence of every referenced input.
    pub fn validate(&self) -> Result<()> {
        self.capture.validate()?;
        self.screening.validate()?;
        self.reservoir.costs.validate()?;
        self.surface.weights.validate()?;
        self.sej.params(SejMode::Sej3).validate()?;
        self.network.economics.validate()?;
        if !(self.network.target >= 0.0) {
            return Err(Error::config("network.target must be >= 0"));
        }
        self.phasing.schedule.validate()?;
        self.phasing.policy.validate(self.phasing.schedule.operating_life)?;
        let i = &self.inputs;
        let mut required: Vec<(&str, &PathBuf)> = vec![
            ("facilities", &i.facilities),
            ("landcover", &i.landcover),
            ("active_fields", &i.active_fields),
            ("formations", &i.formations),
            ("adjacency", &i.adjacency),
        ];
        for (k, v) in [
            ("announced", &i.announced),
            ("population", &i.population),
            ("tract_ids", &i.tract_ids),
            ("tracts", &i.tracts),
            ("parcels", &i.parcels),
        ] {
            if let Some(p) = v {
                required.push((k, p));
            }
        }
        for (k, p) in &i.cost_layers {
            required.push((k.as_str(), p));
        }
        for (key, p) in required {
            if p.as_os_str().is_empty() {
                return Err(Error::config(format!("inputs.{key} is not set")));
            }
            let full = self.resolve(p);
            if !full.is_file() {
                return Err(Error::config(format!("inputs.{key}: `{}` does not exist", full.display())));
            }
        }
        let sej_inputs = [&i.population, &i.tract_ids, &i.tracts];
        let given = sej_inputs.iter().filter(|p| p.is_some()).count();
        if given != 0 && given != 3 {
            return Err(Error::config("population, tract_ids and tracts must be given together"));
        }
        if given == 0 && self.sej.mode != SejMode::Off {
            return Err(Error::config("SEJ mode needs population, tract_ids and tracts inputs"));
        }
        Ok(())
    }

    pub fn has_sej_inputs(&self) -> bool {
        self.inputs.population.is_some()
    }
}
