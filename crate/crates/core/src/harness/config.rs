//! TOML experiment files and command-line overrides.
//!
//! A file either extends a preset (`preset = "gm2d"`) and overrides some
//! fields, or describes a custom experiment in full:
//!
//! ```toml
//! name = "quad"
//! methods = ["rgld", "pgld"]
//! eta = 0.01
//! beta = 4.0
//! steps = 5000
//! seeds = "0..9"
//! start = [0.5, 0.0]
//!
//! [objective]
//! kind = "quadratic"
//! dim = 2
//! scale = 1.0
//!
//! [domain]
//! kind = "ball"
//! center = [0.0, 0.0]
//! radius = 1.0
//! ```

use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{
    preset_by_name, Aggregation, DomainSpec, ExperimentSpec, ObjectiveSpec, PresetName, StartSpec,
    StationaritySpec,
};
use crate::dynamics::{Method, NoiseKind, StepCheck};
use crate::error::{Error, Result};

/// Largest number of seeds a seed list may expand to.
pub const MAX_SEEDS: usize = 1 << 20;

/// A list of seeds written as `a..b` (inclusive), `a,b,c` or `a`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeedList(pub Vec<u64>);

impl FromStr for SeedList {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = |why: &str| Error::config("seeds", format!("`{s}`: {why}"));
        let s = s.trim();
        if let Some((a, b)) = s.split_once("..") {
            let a: u64 = a.trim().parse().map_err(|_| bad("bad range start"))?;
            let b: u64 = b.trim().parse().map_err(|_| bad("bad range end"))?;
            if b < a {
                return Err(bad("range end is below start"));
            }
            if b - a >= MAX_SEEDS as u64 {
                return Err(bad("too many seeds"));
            }
            return Ok(SeedList((a..=b).collect()));
        }
        let seeds = s
            .split(',')
            .map(|t| t.trim().parse::<u64>().map_err(|_| bad("bad seed")))
            .collect::<Result<Vec<_>>>()?;
        if seeds.len() > MAX_SEEDS {
            return Err(bad("too many seeds"));
        }
        Ok(SeedList(seeds))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SeedsField {
    List(Vec<u64>),
    Text(String),
}

impl SeedsField {
    fn resolve(&self) -> Result<Vec<u64>> {
        match self {
            SeedsField::List(v) => Ok(v.clone()),
            SeedsField::Text(s) => Ok(s.parse::<SeedList>()?.0),
        }
    }
}

/// Contents of an experiment TOML file. Every field is optional when a
/// preset is given.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    pub preset: Option<String>,
    pub name: Option<String>,
    pub objective: Option<ObjectiveSpec>,
    pub domain: Option<DomainSpec>,
    pub methods: Option<Vec<Method>>,
    pub eta: Option<f64>,
    pub beta: Option<f64>,
    pub steps: Option<usize>,
    pub noise: Option<NoiseKind>,
    pub step_check: Option<StepCheck>,
    pub start: Option<StartSpec>,
    pub project_start: Option<bool>,
    pub seeds: Option<SeedsField>,
    pub output: Option<PathBuf>,
    pub aggregation: Option<Aggregation>,
    pub workers: Option<usize>,
    pub stationarity: Option<StationaritySpec>,
}

impl ConfigFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    /// Resolves the file into experiment specs. A sweep preset yields
    /// several specs; field overrides apply to each.
    pub fn into_specs(self) -> Result<Vec<ExperimentSpec>> {
        let bases = match &self.preset {
            Some(p) => preset_by_name(p)?,
            None => vec![self.custom_base()?],
        };
        let many = bases.len() > 1;
        bases
            .into_iter()
            .map(|mut spec| {
                if let Some(name) = &self.name {
                    spec.name = if many {
                        format!("{name}-{}", spec.name)
                    } else {
                        name.clone()
                    };
                }
                if let Some(v) = &self.objective {
                    spec.objective = v.clone();
                }
                if let Some(v) = &self.domain {
                    spec.domain = v.clone();
                }
                if let Some(v) = &self.methods {
                    spec.methods = v.clone();
                }
                if let Some(v) = self.eta {
                    spec.eta = v;
                }
                if let Some(v) = self.beta {
                    spec.beta = v;
                }
                if let Some(v) = self.steps {
                    spec.steps = v;
                }
                if let Some(v) = self.noise {
                    spec.noise = v;
                }
                if let Some(v) = self.step_check {
                    spec.step_check = v;
                }
                if let Some(v) = &self.start {
                    spec.start = v.clone();
                }
                if let Some(v) = self.project_start {
                    spec.project_start = v;
                }
                if let Some(v) = &self.seeds {
                    spec.seeds = v.resolve()?;
                }
                if let Some(v) = &self.output {
                    spec.output = v.clone();
                }
                if let Some(v) = self.aggregation {
                    spec.aggregation = v;
                }
                if let Some(v) = self.workers {
                    spec.workers = v;
                }
                if let Some(v) = &self.stationarity {
                    spec.stationarity = Some(v.clone());
                }
                Ok(spec)
            })
            .collect()
    }

    fn custom_base(&self) -> Result<ExperimentSpec> {
        let need = |field: &str| Error::config(field, "required when no preset is given");
        let objective = self.objective.clone().ok_or_else(|| need("objective"))?;
        let domain = self.domain.clone().ok_or_else(|| need("domain"))?;
        Ok(ExperimentSpec {
            name: self.name.clone().ok_or_else(|| need("name"))?,
            preset: PresetName::Custom,
            objective,
            domain,
            methods: self.methods.clone().ok_or_else(|| need("methods"))?,
            eta: self.eta.ok_or_else(|| need("eta"))?,
            beta: self.beta.unwrap_or(1.0),
            steps: self.steps.ok_or_else(|| need("steps"))?,
            noise: NoiseKind::default(),
            start: self.start.clone().ok_or_else(|| need("start"))?,
            project_start: false,
            seeds: super::DEFAULT_SEEDS.collect(),
            output: PathBuf::from("out"),
            aggregation: Aggregation::default(),
            workers: super::default_workers(),
            step_check: StepCheck::default(),
            stationarity: None,
        })
    }
}

/// Command-line overrides applied after presets and files.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seeds: Option<Vec<u64>>,
    pub eta: Option<f64>,
    pub beta: Option<f64>,
    pub steps: Option<usize>,
    pub output: Option<PathBuf>,
    pub workers: Option<usize>,
}

impl Overrides {
    pub fn apply(&self, spec: &mut ExperimentSpec) {
        if let Some(v) = &self.seeds {
            spec.seeds = v.clone();
        }
        if let Some(v) = self.eta {
            spec.eta = v;
        }
        if let Some(v) = self.beta {
            spec.beta = v;
        }
        if let Some(v) = self.steps {
            spec.steps = v;
            if let Some(st) = &mut spec.stationarity {
                st.prefixes.retain(|p| *p <= v);
                if st.prefixes.last() != Some(&v) {
                    st.prefixes.push(v);
                }
            }
        }
        if let Some(v) = &self.output {
            spec.output = v.clone();
        }
        if let Some(v) = self.workers {
            spec.workers = v;
        }
    }
}
