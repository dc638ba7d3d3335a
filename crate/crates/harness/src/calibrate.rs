//! Heuristic search for per-block neighborhood sizes with a common acceptance rate.
//!
//! Each block is tuned on its own: the other blocks keep empty neighborhoods, so
//! the block's acceptance rate depends only on its own size. This is a
//! convenience for choosing configurations, not an optimality criterion.

use cmh_core::neighborhoods::{NeighborhoodSpec, Scaling};
use cmh_core::{Kernel, RandomEffectsModel, TargetModel};

use crate::error::{HarnessError, Result};
use crate::experiment::block_acceptance_rates;

#[derive(Debug, Clone, PartialEq)]
pub struct BlockCalibration {
    pub block: usize,
    pub size: f64,
    pub rate: f64,
}

/// For every block, the candidate size whose acceptance rate is closest to `target`.
pub fn calibrate_sizes<F>(
    model: &dyn TargetModel,
    candidates: &[Vec<f64>],
    spec_for: F,
    target: f64,
    run_length: usize,
    seed: u64,
) -> Result<Vec<BlockCalibration>>
where
    F: Fn(usize, f64) -> cmh_core::Result<NeighborhoodSpec>,
{
    let blocks = model.block_dims().len();
    if candidates.len() != blocks {
        return Err(HarnessError::Config(format!(
            "{} candidate lists for a model with {blocks} blocks",
            candidates.len()
        )));
    }
    let mut chosen = Vec::with_capacity(blocks);
    for (block, sizes) in candidates.iter().enumerate() {
        let mut best: Option<BlockCalibration> = None;
        for &size in sizes {
            let mut specs = vec![NeighborhoodSpec::empty(); blocks];
            specs[block] = spec_for(block, size)?;
            let rate = block_acceptance_rates(model, &Kernel::cmh(specs), run_length, seed)?[block];
            if best
                .as_ref()
                .is_none_or(|b| (rate - target).abs() < (b.rate - target).abs())
            {
                best = Some(BlockCalibration { block, size, rate });
            }
        }
        chosen.push(best.ok_or_else(|| HarnessError::Config(format!("no candidates for block {block}")))?);
    }
    Ok(chosen)
}

/// The random effects neighborhoods (θ-ball, μ-interval, λ-rectangle) in conditional sd units.
pub fn random_effects_spec(block: usize, eps: f64) -> cmh_core::Result<NeighborhoodSpec> {
    match block {
        RandomEffectsModel::THETA_BLOCK => NeighborhoodSpec::ball(eps, Scaling::ConditionalSd),
        RandomEffectsModel::MU_BLOCK => NeighborhoodSpec::interval(eps, Scaling::ConditionalSd),
        _ => NeighborhoodSpec::rectangle([eps, eps], Scaling::ConditionalSd),
    }
}
