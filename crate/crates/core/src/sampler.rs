//! Random-scan Gibbs (GS) and conditional Metropolis-Hastings (CMH) kernels.
//!
//! Every kernel step consumes the stream in the same order: one uniform for
//! the block selection, then the proposal draws (all accept-reject attempts),
//! then one uniform for the accept/reject decision. The GS draws and ignores
//! the last uniform too, so a CMH with empty neighborhoods follows a GS run
//! draw for draw.

use crate::distributions::{Conditional, Univariate};
use crate::error::{Error, Result};
use crate::neighborhoods::{realize, NeighborhoodSpec, RealizedNeighborhood, Region};
use crate::quadrature;
use crate::rng::UniformSource;

/// Default accept-reject attempt budget per proposal.
pub const DEFAULT_MAX_ATTEMPTS: u64 = 1_000_000;

/// A point in the product state space: one real vector per Gibbs block.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    blocks: Vec<Vec<f64>>,
}

impl StateVector {
    pub fn new(blocks: Vec<Vec<f64>>) -> Result<Self> {
        if blocks.is_empty() || blocks.iter().any(Vec::is_empty) {
            return Err(Error::Config("a state needs at least one nonempty block".into()));
        }
        if blocks.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Domain("state coordinates must be finite".into()));
        }
        Ok(Self { blocks })
    }

    /// One scalar block per value.
    pub fn from_scalars(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| vec![v]).collect())
    }

    pub fn block(&self, index: usize) -> &[f64] {
        &self.blocks[index]
    }

    pub fn blocks(&self) -> &[Vec<f64>] {
        &self.blocks
    }

    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.blocks.iter().map(Vec::len).collect()
    }

    /// Replaces block `index`; the new value must keep the block's dimension.
    pub fn set_block(&mut self, index: usize, values: &[f64]) {
        debug_assert_eq!(self.blocks[index].len(), values.len());
        self.blocks[index].copy_from_slice(values);
    }

    /// All coordinates, blocks concatenated in order.
    pub fn coords(&self) -> impl Iterator<Item = f64> + '_ {
        self.blocks.iter().flatten().copied()
    }

    pub fn squared_distance(&self, other: &StateVector) -> f64 {
        self.coords().zip(other.coords()).map(|(a, b)| (a - b) * (a - b)).sum()
    }
}

/// Block selection probabilities of the random scan.
#[derive(Debug, Clone, PartialEq)]
pub struct ScanProbabilities {
    probs: Vec<f64>,
    cumulative: Vec<f64>,
}

impl ScanProbabilities {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::Config("scan probabilities are empty".into()));
        }
        if probs.iter().any(|&p| !(p > 0.0 && p <= 1.0)) {
            return Err(Error::Config(format!(
                "scan probabilities must lie in (0, 1]: {probs:?}"
            )));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::Config(format!("scan probabilities sum to {total}, not 1")));
        }
        let cumulative = probs
            .iter()
            .scan(0.0, |acc, &p| {
                *acc += p;
                Some(*acc)
            })
            .collect();
        Ok(Self { probs, cumulative })
    }

    /// Equal probability for each of `blocks` blocks.
    pub fn uniform(blocks: usize) -> Self {
        Self::new(vec![1.0 / blocks as f64; blocks]).expect("uniform scan probabilities are valid")
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Inverse CDF of the block index at stream value `u`.
    pub fn select(&self, u: f64) -> usize {
        self.cumulative
            .iter()
            .position(|&c| u < c)
            .unwrap_or(self.probs.len() - 1)
    }
}

/// A target distribution presented through its full conditionals.
pub trait TargetModel: Send + Sync {
    /// Dimension of each block, in block order.
    fn block_dims(&self) -> Vec<usize>;

    fn scan_probabilities(&self) -> &ScanProbabilities;

    fn initial_state(&self) -> StateVector;

    /// Full conditional of block `block` given the other blocks of `state`.
    fn conditional(&self, block: usize, state: &StateVector) -> Result<Conditional>;
}

/// What happened during one kernel step.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelStepRecord {
    pub selected_block: usize,
    pub proposal: Option<Vec<f64>>,
    pub accepted: bool,
    pub alpha: f64,
    pub proposal_attempts: u64,
}

pub fn select_block<R: UniformSource + ?Sized>(p: &ScanProbabilities, rng: &mut R) -> usize {
    p.select(rng.uniform())
}

/// Draws block `block` from its full conditional (GS update of a forced block).
pub fn gibbs_update_block<M, R>(
    model: &M,
    state: &mut StateVector,
    block: usize,
    rng: &mut R,
) -> Result<KernelStepRecord>
where
    M: TargetModel + ?Sized,
    R: UniformSource + ?Sized,
{
    let conditional = model.conditional(block, state)?;
    let draw = conditional.sample(rng);
    // Stream alignment with the CMH accept/reject draw.
    let _ = rng.uniform();
    state.set_block(block, &draw);
    Ok(KernelStepRecord {
        selected_block: block,
        proposal: Some(draw),
        accepted: true,
        alpha: 1.0,
        proposal_attempts: 1,
    })
}

/// One random-scan GS transition.
pub fn gibbs_step<M, R>(model: &M, state: &mut StateVector, rng: &mut R) -> Result<KernelStepRecord>
where
    M: TargetModel + ?Sized,
    R: UniformSource + ?Sized,
{
    let block = select_block(model.scan_probabilities(), rng);
    gibbs_update_block(model, state, block, rng)
}

/// Accept-reject draw from the conditional restricted to the complement of
/// `neighborhood`. Returns the proposal and the number of draws used.
pub fn restricted_proposal<R: UniformSource + ?Sized>(
    conditional: &Conditional,
    neighborhood: &RealizedNeighborhood,
    rng: &mut R,
    max_attempts: u64,
) -> Result<(Vec<f64>, u64)> {
    let mut draw = Vec::with_capacity(conditional.dim());
    for attempt in 1..=max_attempts {
        conditional.sample_into(rng, &mut draw);
        if !neighborhood.region.contains(&draw) {
            return Ok((draw, attempt));
        }
    }
    Err(Error::StuckProposal {
        block: neighborhood.block_index,
        mass: neighborhood.mass,
        max_attempts,
        state: Vec::new(),
    })
}

/// min{1, (1 - mass_at_current) / (1 - mass_at_proposal)}.
pub fn acceptance_probability(mass_at_current: f64, mass_at_proposal: f64) -> Result<f64> {
    for m in [mass_at_current, mass_at_proposal] {
        if !(0.0..1.0).contains(&m) {
            return Err(Error::Domain(format!("neighborhood mass must lie in [0, 1), got {m}")));
        }
    }
    Ok(acceptance_from_outside(1.0 - mass_at_current, 1.0 - mass_at_proposal))
}

#[inline]
fn acceptance_from_outside(outside_current: f64, outside_proposal: f64) -> f64 {
    if outside_current >= outside_proposal {
        1.0
    } else {
        outside_current / outside_proposal
    }
}

/// CMH update of a forced block.
pub fn cmh_update_block<M, R>(
    model: &M,
    specs: &[NeighborhoodSpec],
    state: &mut StateVector,
    block: usize,
    rng: &mut R,
    max_attempts: u64,
) -> Result<KernelStepRecord>
where
    M: TargetModel + ?Sized,
    R: UniformSource + ?Sized,
{
    let spec = &specs[block];
    let conditional = model.conditional(block, state)?;
    let here = realize(spec, block, &conditional, state.block(block))?;
    let (proposal, attempts) =
        restricted_proposal(&conditional, &here, rng, max_attempts).map_err(|err| match err {
            Error::StuckProposal {
                block,
                mass,
                max_attempts,
                ..
            } => Error::StuckProposal {
                block,
                mass,
                max_attempts,
                state: state.blocks().to_vec(),
            },
            other => other,
        })?;
    // Neighborhood shape depends only on the other blocks, which are unchanged.
    let there = realize(spec, block, &conditional, &proposal)?;
    let alpha = acceptance_from_outside(here.outside, there.outside);
    let accepted = rng.uniform() < alpha;
    if accepted {
        state.set_block(block, &proposal);
    }
    Ok(KernelStepRecord {
        selected_block: block,
        proposal: Some(proposal),
        accepted,
        alpha,
        proposal_attempts: attempts,
    })
}

/// One random-scan CMH transition.
pub fn cmh_step<M, R>(
    model: &M,
    specs: &[NeighborhoodSpec],
    state: &mut StateVector,
    rng: &mut R,
    max_attempts: u64,
) -> Result<KernelStepRecord>
where
    M: TargetModel + ?Sized,
    R: UniformSource + ?Sized,
{
    let block = select_block(model.scan_probabilities(), rng);
    cmh_update_block(model, specs, state, block, rng, max_attempts)
}

/// A transition kernel: the GS or a CMH with one neighborhood spec per block.
#[derive(Debug, Clone, PartialEq)]
pub enum Kernel {
    Gibbs,
    Cmh {
        specs: Vec<NeighborhoodSpec>,
        max_attempts: u64,
    },
}

impl Kernel {
    pub fn cmh(specs: Vec<NeighborhoodSpec>) -> Self {
        Kernel::Cmh {
            specs,
            max_attempts: DEFAULT_MAX_ATTEMPTS,
        }
    }

    /// True when the kernel is the GS kernel (including a CMH whose neighborhoods are all empty).
    pub fn is_gibbs_equivalent(&self) -> bool {
        match self {
            Kernel::Gibbs => true,
            Kernel::Cmh { specs, .. } => specs.iter().all(NeighborhoodSpec::is_empty),
        }
    }

    pub fn step<M, R>(&self, model: &M, state: &mut StateVector, rng: &mut R) -> Result<KernelStepRecord>
    where
        M: TargetModel + ?Sized,
        R: UniformSource + ?Sized,
    {
        match self {
            Kernel::Gibbs => gibbs_step(model, state, rng),
            Kernel::Cmh { specs, max_attempts } => cmh_step(model, specs, state, rng, *max_attempts),
        }
    }

    /// Checks that the kernel fits the model's block structure.
    pub fn validate_for<M: TargetModel + ?Sized>(&self, model: &M) -> Result<()> {
        if let Kernel::Cmh { specs, .. } = self {
            let blocks = model.block_dims().len();
            if specs.len() != blocks {
                return Err(Error::Config(format!(
                    "{} neighborhood specs given for a model with {blocks} blocks",
                    specs.len()
                )));
            }
            for spec in specs {
                spec.validate()?;
            }
        }
        Ok(())
    }
}

fn scalar_pdf(conditional: &Conditional, x: f64) -> Result<f64> {
    match conditional {
        Conditional::Gaussian(d) => Ok(d.pdf(x)),
        Conditional::Uniform(d) => Ok(d.pdf(x)),
        Conditional::Gamma(d) => Ok(d.pdf(x)),
        _ => Err(Error::Config("move masses are only defined for scalar blocks".into())),
    }
}

/// GS probability of moving a scalar block into `[lo, hi]`.
pub fn gibbs_move_mass(conditional: &Conditional, lo: f64, hi: f64) -> Result<f64> {
    match conditional {
        Conditional::Gaussian(d) => Ok(d.interval_mass(lo, hi)),
        Conditional::Uniform(d) => Ok(d.interval_mass(lo, hi)),
        Conditional::Gamma(d) => Ok(d.interval_mass(lo, hi)),
        _ => Err(Error::Config("move masses are only defined for scalar blocks".into())),
    }
}

/// Probability that a CMH update of a scalar block currently at `current`
/// proposes and accepts a value in `[lo, hi]`:
///
/// ∫_{[lo,hi] \ B(current)} π(z) / max{1 - M(current), 1 - M(z)} dz,
///
/// where `M(z)` is the neighborhood mass with the neighborhood centered at `z`.
/// The rejection atom at `current` is excluded.
pub fn cmh_move_mass(
    conditional: &Conditional,
    spec: &NeighborhoodSpec,
    current: f64,
    lo: f64,
    hi: f64,
) -> Result<f64> {
    let here = realize(spec, 0, conditional, &[current])?;
    let pieces = match here.region {
        Region::Empty => vec![(lo, hi)],
        Region::Interval { lo: b_lo, hi: b_hi } => vec![(lo, hi.min(b_lo)), (lo.max(b_hi), hi)],
        _ => return Err(Error::Config("move masses are only defined for scalar blocks".into())),
    };
    scalar_pdf(conditional, current)?;
    let integrand = |z: f64| {
        let density = scalar_pdf(conditional, z).unwrap_or(0.0);
        if density == 0.0 {
            return 0.0;
        }
        let there = realize(spec, 0, conditional, &[z]).map(|nb| nb.outside).unwrap_or(1.0);
        density / here.outside.max(there)
    };
    Ok(pieces
        .into_iter()
        .filter(|(a, b)| b > a)
        .map(|(a, b)| quadrature::integrate(integrand, a, b, 1e-12))
        .sum())
}
