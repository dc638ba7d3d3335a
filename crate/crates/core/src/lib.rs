//! Random-scan Gibbs sampling and its conditional Metropolis-Hastings
//! modification on products of real-vector blocks.
//!
//! The CMH replaces each Gibbs block update with a proposal drawn from the full
//! conditional restricted to the complement of a neighborhood of the current
//! value, accepted with probability `min{1, (1 − M(x)) / (1 − M(x'))}` where
//! `M` is the conditional mass of the neighborhood. An empty neighborhood
//! recovers the Gibbs sampler exactly.

// `!(x > 0.0)` style checks deliberately reject NaN along with out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod distributions;
pub mod ergodicity;
pub mod error;
pub mod models;
pub mod neighborhoods;
pub mod quadrature;
pub mod rng;
pub mod sampler;

pub use diagnostics::{
    acceptance_rate, esjd, mse, msjd, pooled_acceptance_rate, ratio_with_se, ChainAccumulator, ChainSummary, Estimate,
    ExperimentReport, Functional,
};
pub use distributions::{Conditional, Gamma1D, Gaussian1D, IsotropicGaussianBlock, Uniform01, Univariate};
pub use ergodicity::{
    solve_cmh_c_threshold, solve_cmh_q_threshold, solve_re_thresholds, theorem1_check, verify_nn_drift, DriftSpec,
    ReThresholds, Theorem1Inputs,
};
pub use error::{Error, Result};
pub use models::{
    simulate_re_data, GeneratingHyper, InferenceHyper, NormalNormalModel, REState, RandomEffectsModel, ReDataset,
    SimulatedReData, UnitSquareModel,
};
pub use neighborhoods::{realize, NeighborhoodKind, NeighborhoodSpec, RealizedNeighborhood, Region, Scaling};
pub use rng::{chain_rng, StreamRng, UniformSource};
pub use sampler::{cmh_step, gibbs_step, Kernel, KernelStepRecord, ScanProbabilities, StateVector, TargetModel};
