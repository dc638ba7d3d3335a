//! TOML experiment configuration.
//!
//! ```toml
//! seed = 20130501
//! workers = 8                      # optional; defaults to all cores
//!
//! [[experiment]]
//! id = "nn-c1.5"
//! model = { name = "normal-normal" }
//! sampler = { kind = "cmh-c", c = 1.5 }
//! n = 1000
//! replicates = 1000
//! beta_ref = { analytic = 0.0 }
//! accept_run_length = 1000000      # optional dedicated acceptance-rate run
//!
//! [[trace]]
//! id = "nn-gs"
//! model = { name = "normal-normal" }
//! sampler = { kind = "gs" }
//! run_length = 1000000
//! window = [999000, 1000000]
//! ```

use std::collections::HashSet;
use std::path::{Path, PathBuf};

use cmh_core::diagnostics::Functional;
use cmh_core::models::{GeneratingHyper, InferenceHyper};
use cmh_core::neighborhoods::{NeighborhoodSpec, Scaling};
use cmh_core::Kernel;
use serde::Deserialize;

use crate::error::{HarnessError, Result};

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HarnessConfig {
    pub seed: u64,
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default, rename = "experiment")]
    pub experiments: Vec<ExperimentConfig>,
    #[serde(default, rename = "trace")]
    pub traces: Vec<TraceConfig>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub id: String,
    pub model: ModelConfig,
    pub sampler: SamplerConfig,
    /// Chain length, counting the initial state.
    pub n: usize,
    /// Number of independent chains per sampler.
    pub replicates: usize,
    #[serde(default)]
    pub functional: Option<FunctionalConfig>,
    pub beta_ref: BetaRefConfig,
    #[serde(default)]
    pub accept_run_length: Option<usize>,
    /// Overrides the file-level seed for this experiment.
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceConfig {
    pub id: String,
    pub model: ModelConfig,
    pub sampler: SamplerConfig,
    pub run_length: usize,
    /// Half-open iteration range `[start, end)`.
    pub window: [usize; 2],
    #[serde(default)]
    pub functional: Option<FunctionalConfig>,
    #[serde(default)]
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ModelConfig {
    NormalNormal,
    UnitSquare,
    RandomEffects {
        #[serde(default)]
        dataset: Option<PathBuf>,
        #[serde(default)]
        simulate: Option<SimulateConfig>,
        #[serde(default)]
        hyper: InferenceHyper,
    },
}

impl ModelConfig {
    pub fn label(&self) -> &'static str {
        match self {
            ModelConfig::NormalNormal => "normal-normal",
            ModelConfig::UnitSquare => "unit-square",
            ModelConfig::RandomEffects { .. } => "random-effects",
        }
    }

    pub fn default_functional(&self) -> Functional {
        match self {
            ModelConfig::RandomEffects { .. } => Functional::new(cmh_core::RandomEffectsModel::MU_BLOCK, 0),
            _ => Functional::new(0, 0),
        }
    }

    fn resolve_paths(&mut self, base: &Path) {
        if let ModelConfig::RandomEffects {
            dataset: Some(path), ..
        } = self
        {
            if path.is_relative() {
                *path = base.join(&*path);
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub subjects: usize,
    pub replicates: usize,
    pub seed: u64,
    #[serde(default)]
    pub hyper: GeneratingHyper,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionalConfig {
    pub block: usize,
    #[serde(default)]
    pub coordinate: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum BetaRefConfig {
    Analytic(f64),
    /// Length of an independent GS run whose average is used as the reference.
    ReferenceRun(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ScalingConfig {
    #[default]
    Absolute,
    ConditionalSd,
}

impl From<ScalingConfig> for Scaling {
    fn from(s: ScalingConfig) -> Self {
        match s {
            ScalingConfig::Absolute => Scaling::Absolute,
            ScalingConfig::ConditionalSd => Scaling::ConditionalSd,
        }
    }
}

/// One block's neighborhood in an explicit `cmh` sampler.
#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum BlockSpecConfig {
    Empty,
    Interval {
        halfwidth: f64,
        #[serde(default)]
        scaling: ScalingConfig,
    },
    FixedDensity {
        q: f64,
    },
    Ball {
        radius: f64,
        #[serde(default)]
        scaling: ScalingConfig,
    },
    Rectangle {
        halfwidths: [f64; 2],
        #[serde(default)]
        scaling: ScalingConfig,
    },
}

impl BlockSpecConfig {
    pub fn to_spec(self) -> cmh_core::Result<NeighborhoodSpec> {
        match self {
            BlockSpecConfig::Empty => Ok(NeighborhoodSpec::empty()),
            BlockSpecConfig::Interval { halfwidth, scaling } => NeighborhoodSpec::interval(halfwidth, scaling.into()),
            BlockSpecConfig::FixedDensity { q } => NeighborhoodSpec::fixed_density(q),
            BlockSpecConfig::Ball { radius, scaling } => NeighborhoodSpec::ball(radius, scaling.into()),
            BlockSpecConfig::Rectangle { halfwidths, scaling } => {
                NeighborhoodSpec::rectangle(halfwidths, scaling.into())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SamplerConfig {
    Gs,
    /// Explicit neighborhood per block.
    Cmh {
        blocks: Vec<BlockSpecConfig>,
    },
    /// Interval of `c` conditional standard deviations around each scalar block.
    CmhC {
        c: f64,
    },
    /// Interval holding conditional mass `q` around each scalar block.
    CmhQ {
        q: f64,
    },
    /// Random effects neighborhoods scaled by conditional standard deviations:
    /// a θ-ball, a μ-interval and a λ-rectangle.
    CmhEps {
        theta: f64,
        mu: f64,
        lambda: f64,
    },
}

impl SamplerConfig {
    /// Short description for reports, e.g. `cmh-c(c=1.5)`.
    pub fn label(&self) -> String {
        match self {
            SamplerConfig::Gs => "gs".to_owned(),
            SamplerConfig::Cmh { blocks } => format!("cmh({} blocks)", blocks.len()),
            SamplerConfig::CmhC { c } => format!("cmh-c(c={c})"),
            SamplerConfig::CmhQ { q } => format!("cmh-q(q={q})"),
            SamplerConfig::CmhEps { theta, mu, lambda } => format!("cmh-eps({theta};{mu};{lambda})"),
        }
    }

    /// Builds the kernel for a model with `blocks` blocks.
    pub fn kernel(&self, model: &ModelConfig, blocks: usize) -> Result<Kernel> {
        let repeat = |spec: cmh_core::Result<NeighborhoodSpec>| -> Result<Kernel> {
            if matches!(model, ModelConfig::RandomEffects { .. }) {
                return Err(HarnessError::Config(format!(
                    "sampler {} needs scalar blocks; use cmh-eps or explicit blocks for random-effects",
                    self.label()
                )));
            }
            Ok(Kernel::cmh(vec![spec?; blocks]))
        };
        let kernel = match self {
            SamplerConfig::Gs => Kernel::Gibbs,
            SamplerConfig::Cmh { blocks } => Kernel::cmh(
                blocks
                    .iter()
                    .map(|b| b.to_spec())
                    .collect::<cmh_core::Result<Vec<_>>>()?,
            ),
            SamplerConfig::CmhC { c } => repeat(NeighborhoodSpec::interval(*c, Scaling::ConditionalSd))?,
            SamplerConfig::CmhQ { q } => repeat(NeighborhoodSpec::fixed_density(*q))?,
            SamplerConfig::CmhEps { theta, mu, lambda } => {
                if !matches!(model, ModelConfig::RandomEffects { .. }) {
                    return Err(HarnessError::Config(
                        "cmh-eps applies to the random-effects model only".into(),
                    ));
                }
                Kernel::cmh(vec![
                    NeighborhoodSpec::ball(*theta, Scaling::ConditionalSd)?,
                    NeighborhoodSpec::interval(*mu, Scaling::ConditionalSd)?,
                    NeighborhoodSpec::rectangle([*lambda, *lambda], Scaling::ConditionalSd)?,
                ])
            }
        };
        Ok(kernel)
    }
}

impl HarnessConfig {
    pub fn from_toml(text: &str, base_dir: &Path) -> Result<Self> {
        let mut config: HarnessConfig = toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))?;
        for e in &mut config.experiments {
            e.model.resolve_paths(base_dir);
        }
        for t in &mut config.traces {
            t.model.resolve_paths(base_dir);
        }
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Read {
            path: path.to_owned(),
            source,
        })?;
        let base = path.parent().unwrap_or_else(|| Path::new("."));
        Self::from_toml(&text, base)
    }

    pub fn validate(&self) -> Result<()> {
        let mut ids = HashSet::new();
        for e in &self.experiments {
            if !ids.insert(e.id.as_str()) {
                return Err(HarnessError::Config(format!("duplicate experiment id {:?}", e.id)));
            }
            e.validate()?;
        }
        let mut ids = HashSet::new();
        for t in &self.traces {
            if !ids.insert(t.id.as_str()) {
                return Err(HarnessError::Config(format!("duplicate trace id {:?}", t.id)));
            }
            t.validate()?;
        }
        if self.workers == Some(0) {
            return Err(HarnessError::Config("workers must be at least 1".into()));
        }
        Ok(())
    }
}

fn validate_model(model: &ModelConfig) -> Result<()> {
    if let ModelConfig::RandomEffects { dataset, simulate, .. } = model {
        match (dataset, simulate) {
            (Some(_), None) | (None, Some(_)) => {}
            _ => {
                return Err(HarnessError::Config(
                    "random-effects model needs exactly one of `dataset` or `simulate`".into(),
                ))
            }
        }
    }
    Ok(())
}

impl ExperimentConfig {
    pub fn functional(&self) -> Functional {
        self.functional
            .map(|f| Functional::new(f.block, f.coordinate))
            .unwrap_or_else(|| self.model.default_functional())
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(HarnessError::Config(format!("experiment {:?}: {msg}", self.id)));
        if self.n < 2 {
            return fail(format!("n must be at least 2, got {}", self.n));
        }
        if self.replicates < 2 {
            return fail(format!("replicates must be at least 2, got {}", self.replicates));
        }
        if let BetaRefConfig::ReferenceRun(0) = self.beta_ref {
            return fail("reference run length must be at least 1".into());
        }
        if self.accept_run_length == Some(0) {
            return fail("accept_run_length must be at least 1".into());
        }
        validate_model(&self.model)
    }
}

impl TraceConfig {
    pub fn functional(&self) -> Functional {
        self.functional
            .map(|f| Functional::new(f.block, f.coordinate))
            .unwrap_or_else(|| self.model.default_functional())
    }

    pub fn validate(&self) -> Result<()> {
        let [start, end] = self.window;
        if !(start < end && end <= self.run_length) {
            return Err(HarnessError::Config(format!(
                "trace {:?}: window [{start}, {end}) must satisfy start < end <= run_length = {}",
                self.id, self.run_length
            )));
        }
        validate_model(&self.model)
    }
}
