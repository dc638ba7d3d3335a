//! Chain paths of one coordinate over an iteration window.

use cmh_core::diagnostics::Functional;
use cmh_core::rng::chain_rng;
use cmh_core::{Kernel, TargetModel};

use crate::config::TraceConfig;
use crate::error::{HarnessError, Result};
use crate::experiment::{stream_tag, BuiltModel};

#[derive(Debug, Clone, PartialEq)]
pub struct TraceRow {
    pub trace: String,
    pub iteration: usize,
    pub value: f64,
}

/// Values of `functional` at iterations `start..end` of a chain of `run_length`
/// states (iteration 0 is the initial state).
pub fn chain_window(
    model: &dyn TargetModel,
    kernel: &Kernel,
    functional: Functional,
    run_length: usize,
    window: [usize; 2],
    seed: u64,
) -> Result<Vec<(usize, f64)>> {
    let [start, end] = window;
    if !(start < end && end <= run_length) {
        return Err(HarnessError::Config(format!(
            "trace window [{start}, {end}) must satisfy start < end <= run_length = {run_length}"
        )));
    }
    let tag = format!("trace-{}", stream_tag(kernel));
    let mut rng = chain_rng(seed, &tag, 0);
    let mut state = model.initial_state();
    let mut rows = Vec::with_capacity(end - start);
    for i in 0..end {
        if i > 0 {
            kernel.step(model, &mut state, &mut rng)?;
        }
        if i >= start {
            rows.push((i, functional.eval(&state)));
        }
    }
    Ok(rows)
}

pub fn emit_trace(config: &TraceConfig, default_seed: u64) -> Result<Vec<TraceRow>> {
    config.validate()?;
    let built = BuiltModel::from_config(&config.model)?;
    let model = built.target();
    let kernel = config.sampler.kernel(&config.model, model.block_dims().len())?;
    kernel.validate_for(model)?;
    let seed = config.seed.unwrap_or(default_seed);
    let rows = chain_window(
        model,
        &kernel,
        config.functional(),
        config.run_length,
        config.window,
        seed,
    )?;
    Ok(rows
        .into_iter()
        .map(|(iteration, value)| TraceRow {
            trace: config.id.clone(),
            iteration,
            value,
        })
        .collect())
}
