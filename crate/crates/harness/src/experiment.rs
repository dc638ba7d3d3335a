//! Replicated GS-versus-CMH comparisons.

use std::collections::HashMap;

use cmh_core::diagnostics::{ChainAccumulator, ChainSummary, ExperimentReport, Functional};
use cmh_core::neighborhoods::{check_admissibility, AdmissibilityAudit};
use cmh_core::rng::chain_rng;
use cmh_core::{Kernel, NormalNormalModel, RandomEffectsModel, StateVector, TargetModel, UnitSquareModel};
use log::{debug, info};
use rayon::prelude::*;

use crate::config::{BetaRefConfig, ExperimentConfig, ModelConfig, SamplerConfig};
use crate::dataset;
use crate::error::{HarnessError, Result};

/// Number of CMH steps whose visited states feed the admissibility audit.
pub const AUDIT_WARMUP: usize = 1000;

/// A model instantiated from its configuration.
pub enum BuiltModel {
    NormalNormal(NormalNormalModel),
    UnitSquare(UnitSquareModel),
    RandomEffects(RandomEffectsModel),
}

impl BuiltModel {
    pub fn from_config(config: &ModelConfig) -> Result<Self> {
        Ok(match config {
            ModelConfig::NormalNormal => BuiltModel::NormalNormal(NormalNormalModel::new()),
            ModelConfig::UnitSquare => BuiltModel::UnitSquare(UnitSquareModel::new()),
            ModelConfig::RandomEffects {
                dataset: path,
                simulate,
                hyper,
            } => {
                let data = match (path, simulate) {
                    (Some(path), _) => dataset::read_dataset(path)?,
                    (None, Some(sim)) => {
                        dataset::simulate(sim.subjects, sim.replicates, &sim.hyper, sim.seed)?
                            .0
                            .dataset
                    }
                    (None, None) => {
                        return Err(HarnessError::Config("random-effects model needs a dataset".into()));
                    }
                };
                BuiltModel::RandomEffects(RandomEffectsModel::new(&data, *hyper)?)
            }
        })
    }

    pub fn target(&self) -> &dyn TargetModel {
        match self {
            BuiltModel::NormalNormal(m) => m,
            BuiltModel::UnitSquare(m) => m,
            BuiltModel::RandomEffects(m) => m,
        }
    }
}

/// Stream tag of a kernel: a CMH with only empty neighborhoods shares the GS streams,
/// so the two produce identical chains under one master seed.
pub fn stream_tag(kernel: &Kernel) -> &'static str {
    if kernel.is_gibbs_equivalent() {
        "gs"
    } else {
        "cmh"
    }
}

fn check_functional(model: &dyn TargetModel, f: Functional) -> Result<()> {
    let dims = model.block_dims();
    match dims.get(f.block) {
        Some(&d) if f.coordinate < d => Ok(()),
        _ => Err(HarnessError::Config(format!(
            "functional (block {}, coordinate {}) does not exist in a model with block sizes {dims:?}",
            f.block, f.coordinate
        ))),
    }
}

/// Runs one chain of `n` states (n − 1 transitions) from the model's initial state.
pub fn run_chain(
    model: &dyn TargetModel,
    kernel: &Kernel,
    functional: Functional,
    n: usize,
    seed: u64,
    tag: &str,
    index: u64,
) -> Result<ChainSummary> {
    let mut rng = chain_rng(seed, tag, index);
    let mut state = model.initial_state();
    let mut acc = ChainAccumulator::new(functional, &state);
    for _ in 1..n {
        let record = kernel.step(model, &mut state, &mut rng)?;
        acc.push(&state, record.accepted);
    }
    Ok(acc.finish()?)
}

/// Runs `replicates` independent chains in parallel; results are in chain-index order.
pub fn run_replicates(
    model: &dyn TargetModel,
    kernel: &Kernel,
    functional: Functional,
    n: usize,
    replicates: usize,
    seed: u64,
) -> Result<Vec<ChainSummary>> {
    let tag = stream_tag(kernel);
    (0..replicates as u64)
        .into_par_iter()
        .map(|i| run_chain(model, kernel, functional, n, seed, tag, i))
        .collect()
}

/// Average of the functional over one GS run of `length` states on its own stream.
pub fn run_reference(model: &dyn TargetModel, functional: Functional, length: usize, seed: u64) -> Result<f64> {
    if length == 0 {
        return Err(HarnessError::Config("reference run length must be at least 1".into()));
    }
    check_functional(model, functional)?;
    let mut rng = chain_rng(seed, "reference", 0);
    let mut state = model.initial_state();
    let mut sum = functional.eval(&state);
    for _ in 1..length {
        Kernel::Gibbs.step(model, &mut state, &mut rng)?;
        sum += functional.eval(&state);
    }
    Ok(sum / length as f64)
}

/// Acceptance rate of a single dedicated run of `length` transitions.
pub fn run_acceptance(model: &dyn TargetModel, kernel: &Kernel, length: usize, seed: u64) -> Result<f64> {
    let mut rng = chain_rng(seed, "accept", 0);
    let mut state = model.initial_state();
    let mut accepted = 0u64;
    for _ in 0..length {
        if kernel.step(model, &mut state, &mut rng)?.accepted {
            accepted += 1;
        }
    }
    Ok(accepted as f64 / length as f64)
}

/// Per-block acceptance rates of one run of `length` transitions.
pub fn block_acceptance_rates(model: &dyn TargetModel, kernel: &Kernel, length: usize, seed: u64) -> Result<Vec<f64>> {
    let blocks = model.block_dims().len();
    let mut rng = chain_rng(seed, "accept", 0);
    let mut state = model.initial_state();
    let mut tries = vec![0u64; blocks];
    let mut accepts = vec![0u64; blocks];
    for _ in 0..length {
        let r = kernel.step(model, &mut state, &mut rng)?;
        tries[r.selected_block] += 1;
        accepts[r.selected_block] += r.accepted as u64;
    }
    Ok(tries
        .iter()
        .zip(&accepts)
        .map(|(&t, &a)| if t == 0 { f64::NAN } else { a as f64 / t as f64 })
        .collect())
}

/// Realized neighborhood masses over the initial state and a short CMH warm-up.
pub fn audit_kernel(model: &dyn TargetModel, kernel: &Kernel, seed: u64) -> Result<Option<AdmissibilityAudit>> {
    let Kernel::Cmh { specs, .. } = kernel else {
        return Ok(None);
    };
    let mut rng = chain_rng(seed, "audit", 0);
    let mut state = model.initial_state();
    let mut probes: Vec<StateVector> = vec![state.clone()];
    for _ in 0..AUDIT_WARMUP {
        kernel.step(model, &mut state, &mut rng)?;
        probes.push(state.clone());
    }
    let audit = check_admissibility(specs, model, &probes)?;
    if audit.violation {
        return Err(HarnessError::Config(format!(
            "neighborhood mass reached {} (must stay below 1)",
            audit.q_max_observed
        )));
    }
    Ok(Some(audit))
}

/// Result of one configured experiment.
#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub id: String,
    pub model: &'static str,
    pub sampler: String,
    pub n: usize,
    pub replicates: usize,
    pub seed: u64,
    pub report: ExperimentReport,
    pub audit: Option<AdmissibilityAudit>,
    pub cmh_summaries: Vec<ChainSummary>,
    pub gs_summaries: Vec<ChainSummary>,
}

/// Runs experiments, sharing GS baselines and reference runs between experiments
/// with the same model, seed and sizes.
#[derive(Default)]
pub struct Runner {
    gs_cache: HashMap<String, Vec<ChainSummary>>,
    reference_cache: HashMap<String, f64>,
}

impl Runner {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn run(&mut self, exp: &ExperimentConfig, default_seed: u64) -> Result<ExperimentOutcome> {
        let seed = exp.seed.unwrap_or(default_seed);
        let built = BuiltModel::from_config(&exp.model)?;
        let model = built.target();
        let blocks = model.block_dims().len();
        let kernel = exp.sampler.kernel(&exp.model, blocks)?;
        kernel.validate_for(model)?;
        let functional = exp.functional();
        check_functional(model, functional)?;

        let audit = audit_kernel(model, &kernel, seed)?;
        if let Some(a) = &audit {
            debug!(
                "{}: neighborhood masses in [{}, {}]",
                exp.id, a.q_min_observed, a.q_max_observed
            );
        }

        let model_key = format!("{:?}|{seed}|{functional:?}", exp.model);
        let gs_key = format!("{model_key}|{}|{}", exp.n, exp.replicates);
        let gs = match self.gs_cache.get(&gs_key) {
            Some(g) => g.clone(),
            None => {
                info!("{}: running {} GS chains of length {}", exp.id, exp.replicates, exp.n);
                let g = run_replicates(model, &Kernel::Gibbs, functional, exp.n, exp.replicates, seed)?;
                self.gs_cache.insert(gs_key, g.clone());
                g
            }
        };
        let cmh = if kernel.is_gibbs_equivalent() && exp.sampler == SamplerConfig::Gs {
            gs.clone()
        } else {
            info!("{}: running {} {} chains", exp.id, exp.replicates, exp.sampler.label());
            run_replicates(model, &kernel, functional, exp.n, exp.replicates, seed)?
        };

        let beta_ref = match exp.beta_ref {
            BetaRefConfig::Analytic(b) => b,
            BetaRefConfig::ReferenceRun(length) => {
                let key = format!("{model_key}|{length}");
                match self.reference_cache.get(&key) {
                    Some(&b) => b,
                    None => {
                        info!("{}: reference GS run of length {length}", exp.id);
                        let b = run_reference(model, functional, length, seed)?;
                        self.reference_cache.insert(key, b);
                        b
                    }
                }
            }
        };
        let accept_rate = match exp.accept_run_length {
            Some(length) => run_acceptance(model, &kernel, length, seed)?,
            None => cmh_core::pooled_acceptance_rate(&cmh)?,
        };
        let report = ExperimentReport::from_summaries(exp.id.clone(), &gs, &cmh, beta_ref, accept_rate)?;
        info!(
            "{}: ESJDR {:.4} ({:.4}), MSER {:.4} ({:.4}), accept {:.4}",
            exp.id, report.esjdr, report.se_esjdr, report.mser, report.se_mser, report.accept_rate
        );
        Ok(ExperimentOutcome {
            id: exp.id.clone(),
            model: exp.model.label(),
            sampler: exp.sampler.label(),
            n: exp.n,
            replicates: exp.replicates,
            seed,
            report,
            audit,
            cmh_summaries: cmh,
            gs_summaries: gs,
        })
    }
}

/// Runs every experiment in order on a pool of `workers` threads (all cores when `None`).
pub fn run_all(experiments: &[ExperimentConfig], seed: u64, workers: Option<usize>) -> Result<Vec<ExperimentOutcome>> {
    with_workers(workers, || {
        let mut runner = Runner::new();
        experiments.iter().map(|e| runner.run(e, seed)).collect()
    })
}

/// Runs `f` inside a rayon pool of the requested size.
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> T {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        builder = builder.num_threads(w);
    }
    match builder.build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}
